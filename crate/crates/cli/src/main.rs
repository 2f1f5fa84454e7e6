use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use cnosim::experiment::{run_experiment, OutputFormat, RunConfig};
use log::info;
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgorithmArg {
    Trotter,
    Cartan,
    Qas,
    Exact,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MuKindArg {
    Constant,
    Profile,
    Table,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Simulate collective neutrino oscillations and emit survival-probability
/// trajectories.
///
/// Settings come from an optional TOML file; flags and CNOSIM_* environment
/// variables override it.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, env = "CNOSIM_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, env = "CNOSIM_ALGORITHM")]
    algorithm: Option<AlgorithmArg>,
    /// Number of neutrinos (qubits).
    #[arg(long, env = "CNOSIM_N")]
    n: Option<i64>,
    /// Mixing angle in radians.
    #[arg(long, env = "CNOSIM_THETA", allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, value_enum, env = "CNOSIM_MU_KIND")]
    mu_kind: Option<MuKindArg>,
    #[arg(long, env = "CNOSIM_MU0", allow_negative_numbers = true)]
    mu0: Option<f64>,
    #[arg(long, env = "CNOSIM_RNU")]
    rnu: Option<f64>,
    /// CSV with `t,mu` columns, for `--mu-kind table`.
    #[arg(long, env = "CNOSIM_MU_TABLE")]
    mu_table: Option<PathBuf>,
    #[arg(long, env = "CNOSIM_T_START")]
    t_start: Option<f64>,
    #[arg(long, env = "CNOSIM_T_END")]
    t_end: Option<f64>,
    #[arg(long, env = "CNOSIM_DT")]
    dt: Option<f64>,
    /// Shots per circuit; 0 for analytic probabilities.
    #[arg(long, env = "CNOSIM_SHOTS")]
    shots: Option<i64>,
    #[arg(long, env = "CNOSIM_RUNS")]
    runs: Option<i64>,
    #[arg(long, env = "CNOSIM_SEED")]
    seed: Option<i64>,
    /// Output file; standard output when omitted.
    #[arg(long, env = "CNOSIM_OUT")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, env = "CNOSIM_FORMAT")]
    format: Option<FormatArg>,
    /// Report every qubit instead of qubit 0 only.
    #[arg(long, env = "CNOSIM_ALL_QUBITS")]
    all_qubits: bool,
}

impl Cli {
    /// The config file contents with command-line values layered on top.
    fn merged_table(&self) -> Result<Table> {
        let mut table = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                text.parse::<Table>()
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            None => Table::new(),
        };
        let mut set = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                table.insert(key.to_string(), v);
            }
        };
        let name = |v: &dyn ValueEnumName| Value::String(v.name());
        let path = |p: &PathBuf| Value::String(p.to_string_lossy().into_owned());
        set("algorithm", self.algorithm.as_ref().map(|a| name(a)));
        set("n_neutrinos", self.n.map(Value::Integer));
        set("theta", self.theta.map(Value::Float));
        set("mu_kind", self.mu_kind.as_ref().map(|k| name(k)));
        set("mu0", self.mu0.map(Value::Float));
        set("r_nu", self.rnu.map(Value::Float));
        set("mu_table", self.mu_table.as_ref().map(path));
        set("t_start", self.t_start.map(Value::Float));
        set("t_end", self.t_end.map(Value::Float));
        set("dt", self.dt.map(Value::Float));
        set("shots", self.shots.map(Value::Integer));
        set("runs", self.runs.map(Value::Integer));
        set("seed", self.seed.map(Value::Integer));
        set("out", self.out.as_ref().map(path));
        set("format", self.format.as_ref().map(|f| name(f)));
        if self.all_qubits {
            set("all_qubits", Some(Value::Boolean(true)));
        }
        Ok(table)
    }
}

trait ValueEnumName {
    fn name(&self) -> String;
}

impl<T: ValueEnum> ValueEnumName for T {
    fn name(&self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = RunConfig::from_toml_table(cli.merged_table()?).context("invalid configuration")?;
    cfg.validate().context("invalid configuration")?;
    let record = run_experiment(&cfg)?;
    let text = match cfg.format {
        OutputFormat::Csv => record.to_csv()?,
        OutputFormat::Json => record.to_json()?,
    };
    match &cfg.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            info!("wrote {} rows to {}", record.rows.len(), path.display());
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
