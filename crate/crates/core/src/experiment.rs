//! Repeated-run experiments: configuration, execution and aggregation.
//!
//! Each run draws its own sampling noise from `seed + run_index`. Runs are
//! executed in parallel and reduced in run order, so the output depends only
//! on the configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::DEFAULT_DENSE_CAP;
use crate::grid::TimeGrid;
use crate::model::{
    build_model, flavor_prep_circuit, CouplingSchedule, Flavor, HamiltonianSplit,
    TabulatedSchedule, DEFAULT_T_START,
};
use crate::oracle::{evolve_exact, OracleConfig};
use crate::output::{TrajectoryRecord, TrajectoryRow};
use crate::qas::{self, HadamardBackend, Integrator, PropagationOptions, QasBasis};
use crate::statevector::{sample_index_counts, Statevector};
use crate::stats::median_mad;
use crate::trotter::{self, MuEvaluation, TrotterPlan, Variant};
use crate::{Error, Result};

/// Largest register the experiment driver accepts.
pub const MAX_NEUTRINOS: usize = 20;

/// End time used by the four-neutrino Trotter presets when none is given.
pub const FOUR_NEUTRINO_T_END: f64 = 270.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Trotter,
    Cartan,
    Qas,
    /// Classical reference propagation only.
    Exact,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Trotter => "trotter",
            Self::Cartan => "cartan",
            Self::Qas => "qas",
            Self::Exact => "exact",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trotter" => Ok(Self::Trotter),
            "cartan" => Ok(Self::Cartan),
            "qas" => Ok(Self::Qas),
            "exact" => Ok(Self::Exact),
            other => Err(Error::Parse(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuKind {
    Constant,
    Profile,
    Table,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_t_start() -> f64 {
    DEFAULT_T_START
}
fn default_dt() -> f64 {
    0.2
}
fn default_shots() -> u64 {
    1024
}
fn default_runs() -> usize {
    50
}
fn default_true() -> bool {
    true
}
fn default_moment() -> usize {
    1
}
fn default_qas_substeps() -> usize {
    20
}
fn default_oracle_substeps() -> usize {
    100
}

/// Flat key-value experiment description, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_neutrinos: usize,
    /// Vacuum mixing angle in radians.
    pub theta: f64,
    pub mu_kind: MuKind,
    pub mu0: Option<f64>,
    pub r_nu: Option<f64>,
    /// CSV file with `t,mu` columns for `mu_kind = "table"`.
    pub mu_table: Option<PathBuf>,
    #[serde(default = "default_t_start")]
    pub t_start: f64,
    pub t_end: Option<f64>,
    /// Reporting step, also the Trotter step.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub algorithm: Algorithm,
    /// Shots per circuit; 0 means analytic probabilities.
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Report every qubit rather than qubit 0 only.
    #[serde(default)]
    pub all_qubits: bool,
    #[serde(default)]
    pub mu_eval: MuEvaluation,
    #[serde(default = "default_moment")]
    pub qas_moment: usize,
    #[serde(default)]
    pub qas_integrator: Integrator,
    #[serde(default = "default_qas_substeps")]
    pub qas_substeps: usize,
    #[serde(default = "default_true")]
    pub renormalize: bool,
    #[serde(default = "default_oracle_substeps")]
    pub oracle_substeps: usize,
}

impl RunConfig {
    /// A configuration with every optional key at its default.
    pub fn new(n_neutrinos: usize, theta: f64, schedule: &CouplingSchedule) -> Self {
        let (mu_kind, mu0, r_nu) = match schedule {
            CouplingSchedule::Constant { mu0 } => (MuKind::Constant, Some(*mu0), None),
            CouplingSchedule::SupernovaProfile { mu0, r_nu } => {
                (MuKind::Profile, Some(*mu0), Some(*r_nu))
            }
            CouplingSchedule::Tabulated(_) => (MuKind::Table, None, None),
        };
        Self {
            n_neutrinos,
            theta,
            mu_kind,
            mu0,
            r_nu,
            mu_table: None,
            t_start: default_t_start(),
            t_end: None,
            dt: default_dt(),
            algorithm: Algorithm::default(),
            shots: default_shots(),
            runs: default_runs(),
            seed: 0,
            out: None,
            format: OutputFormat::default(),
            all_qubits: false,
            mu_eval: MuEvaluation::default(),
            qas_moment: default_moment(),
            qas_integrator: Integrator::default(),
            qas_substeps: default_qas_substeps(),
            renormalize: true,
            oracle_substeps: default_oracle_substeps(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_toml_table(table: toml::Table) -> Result<Self> {
        Ok(table.try_into()?)
    }

    /// `t_end`, falling back to the four-neutrino Trotter preset.
    pub fn effective_t_end(&self) -> Result<f64> {
        match (self.t_end, self.n_neutrinos, self.algorithm) {
            (Some(t), _, _) => Ok(t),
            (None, 4, Algorithm::Trotter | Algorithm::Cartan) => Ok(FOUR_NEUTRINO_T_END),
            _ => Err(Error::InvalidParameter("t_end is required".into())),
        }
    }

    /// Checks everything that does not need the file system.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParameter(msg));
        if !(2..=MAX_NEUTRINOS).contains(&self.n_neutrinos) {
            return invalid(format!(
                "n_neutrinos must be between 2 and {MAX_NEUTRINOS}, got {}",
                self.n_neutrinos
            ));
        }
        build_model(self.n_neutrinos, self.theta)?;
        let t_end = self.effective_t_end()?;
        if !(self.t_start.is_finite() && t_end.is_finite() && t_end > self.t_start) {
            return invalid(format!(
                "need t_end > t_start, got {} and {t_end}",
                self.t_start
            ));
        }
        TimeGrid::new(self.t_start, t_end, self.dt)?;
        if self.runs == 0 {
            return invalid("runs must be at least 1".into());
        }
        if self.qas_moment == 0 || self.qas_substeps == 0 || self.oracle_substeps == 0 {
            return invalid("qas_moment, qas_substeps and oracle_substeps must be positive".into());
        }
        match self.mu_kind {
            MuKind::Constant => {
                CouplingSchedule::constant(self.require(self.mu0, "mu0")?)?;
            }
            MuKind::Profile => {
                let s = CouplingSchedule::supernova_profile(
                    self.require(self.mu0, "mu0")?,
                    self.require(self.r_nu, "r_nu")?,
                )?;
                check_domain(&s, self.t_start, t_end)?;
            }
            MuKind::Table => {
                if self.mu_table.is_none() {
                    return invalid("mu_table is required for mu_kind = \"table\"".into());
                }
            }
        }
        Ok(())
    }

    fn require(&self, v: Option<f64>, key: &str) -> Result<f64> {
        v.ok_or_else(|| {
            Error::InvalidParameter(format!(
                "{key} is required for mu_kind = {:?}",
                self.mu_kind
            ))
        })
    }

    /// Builds the coupling schedule, reading the table file if needed.
    pub fn schedule(&self) -> Result<CouplingSchedule> {
        let s = match self.mu_kind {
            MuKind::Constant => CouplingSchedule::constant(self.require(self.mu0, "mu0")?)?,
            MuKind::Profile => CouplingSchedule::supernova_profile(
                self.require(self.mu0, "mu0")?,
                self.require(self.r_nu, "r_nu")?,
            )?,
            MuKind::Table => {
                let path = self
                    .mu_table
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("mu_table is required".into()))?;
                CouplingSchedule::Tabulated(TabulatedSchedule::from_csv_str(
                    &std::fs::read_to_string(path)?,
                )?)
            }
        };
        check_domain(&s, self.t_start, self.effective_t_end()?)?;
        Ok(s)
    }

    fn tracked_qubits(&self) -> Vec<usize> {
        if self.all_qubits {
            (0..self.n_neutrinos).collect()
        } else {
            vec![0]
        }
    }
}

fn check_domain(s: &CouplingSchedule, t_start: f64, t_end: f64) -> Result<()> {
    let (start, end) = s.domain();
    if t_start < start || t_end > end {
        return Err(Error::InvalidParameter(format!(
            "schedule is defined on [{start}, {end}], window is [{t_start}, {t_end}]"
        )));
    }
    Ok(())
}

/// `[time][qubit]` survival probabilities of one run.
type RunEstimates = Vec<Vec<f64>>;

/// Runs the configured experiment and aggregates median and MAD per point.
pub fn run_experiment(cfg: &RunConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let schedule = cfg.schedule()?;
    let t_end = cfg.effective_t_end()?;
    let n = cfg.n_neutrinos;
    let split = build_model(n, cfg.theta)?;
    let flavors = vec![Flavor::Electron; n];
    let prep = flavor_prep_circuit(n, &flavors)?;
    let state0 = prep.apply(&Statevector::zero(n))?;
    let qubits = cfg.tracked_qubits();
    let times = TimeGrid::new(cfg.t_start, t_end, cfg.dt)?.times();
    info!(
        "{} on {n} neutrinos, {} reporting points, {} runs x {} shots",
        cfg.algorithm,
        times.len(),
        cfg.runs,
        cfg.shots
    );

    let exact = if n <= DEFAULT_DENSE_CAP {
        let oracle = OracleConfig {
            substeps: cfg.oracle_substeps,
            ..OracleConfig::default()
        };
        let out = evolve_exact(
            &split,
            &schedule,
            &state0,
            cfg.t_start,
            t_end,
            cfg.dt,
            &oracle,
        )?;
        Some(marginal_table(&out.trajectory.states, &qubits)?)
    } else if cfg.algorithm == Algorithm::Exact {
        return Err(Error::RegisterTooLarge {
            n_qubits: n,
            cap: DEFAULT_DENSE_CAP,
        });
    } else {
        warn!("{n} qubits exceed the dense cap of {DEFAULT_DENSE_CAP}; omitting p_exact");
        None
    };

    let runs: Vec<RunEstimates> = match cfg.algorithm {
        Algorithm::Exact => vec![exact.clone().expect("oracle ran")],
        Algorithm::Trotter | Algorithm::Cartan => {
            let variant = if cfg.algorithm == Algorithm::Cartan {
                Variant::Cartan
            } else {
                Variant::BruteForce
            };
            let plan = TrotterPlan::new(variant, cfg.dt)?.with_mu_eval(cfg.mu_eval);
            let evolution = trotter::evolve(
                &split,
                &plan,
                &schedule,
                &state0,
                cfg.t_start,
                t_end,
                |_, _, _| Ok(()),
            )?;
            sampled_runs(cfg, &evolution.trajectory.states, &qubits)?
        }
        Algorithm::Qas => {
            let basis = qas::build_basis(&split, &prep, cfg.qas_moment, true)?;
            info!("QAS basis of {} states", basis.len());
            qas_runs(cfg, &basis, &split, &schedule, t_end, &qubits)?
        }
    };

    let mut rows = Vec::with_capacity(times.len() * qubits.len());
    for (k, &t) in times.iter().enumerate() {
        for (j, &q) in qubits.iter().enumerate() {
            let sample: Vec<f64> = runs.iter().map(|r| r[k][j]).collect();
            let (p_median, p_mad) = median_mad(&sample)?;
            rows.push(TrajectoryRow {
                t,
                p_median,
                p_mad,
                p_exact: exact.as_ref().map(|e| e[k][j]),
                algorithm: cfg.algorithm,
                qubit: q,
            });
        }
    }
    Ok(TrajectoryRecord {
        config: Some(cfg.clone()),
        seed: Some(cfg.seed),
        rows,
    })
}

fn marginal_table(states: &[Statevector], qubits: &[usize]) -> Result<RunEstimates> {
    states
        .iter()
        .map(|s| {
            qubits
                .iter()
                .map(|&q| Ok(s.marginal_probability(q, false)?.clamp(0.0, 1.0)))
                .collect()
        })
        .collect()
}

/// Measures every state `shots` times per run; analytic when `shots == 0`.
fn sampled_runs(
    cfg: &RunConfig,
    states: &[Statevector],
    qubits: &[usize],
) -> Result<Vec<RunEstimates>> {
    if cfg.shots == 0 {
        return Ok(vec![marginal_table(states, qubits)?]);
    }
    (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
            states
                .iter()
                .map(|s| {
                    let mut step_rng = ChaCha8Rng::seed_from_u64(rng.random());
                    let counts = sample_index_counts(s, cfg.shots, &mut step_rng)?;
                    Ok(qubits
                        .iter()
                        .map(|&q| {
                            let hits: u64 = counts
                                .iter()
                                .enumerate()
                                .filter(|(k, _)| k >> q & 1 == 0)
                                .map(|(_, c)| c)
                                .sum();
                            hits as f64 / cfg.shots as f64
                        })
                        .collect())
                })
                .collect()
        })
        .collect()
}

fn qas_runs(
    cfg: &RunConfig,
    basis: &QasBasis,
    split: &HamiltonianSplit,
    schedule: &CouplingSchedule,
    t_end: f64,
    qubits: &[usize],
) -> Result<Vec<RunEstimates>> {
    let options = PropagationOptions {
        integrator: cfg.qas_integrator,
        substeps: cfg.qas_substeps,
        renormalize: cfg.renormalize,
    };
    let (n_runs, tolerance) = if cfg.shots == 0 {
        (1, qas::ALPHA_NORM_TOLERANCE)
    } else {
        (
            cfg.runs,
            qas::sampled_norm_tolerance(cfg.shots, basis.len()),
        )
    };
    (0..n_runs)
        .into_par_iter()
        .map(|r| {
            let mut backend = if cfg.shots == 0 {
                HadamardBackend::exact()
            } else {
                HadamardBackend::sampled(cfg.shots, cfg.seed.wrapping_add(r as u64))?
            };
            let out = qas::run(
                basis,
                split,
                schedule,
                &mut backend,
                cfg.t_start,
                t_end,
                cfg.dt,
                &options,
                |_, _, _| Ok(()),
            )?;
            if out.propagation_calls != 0 {
                return Err(Error::InvalidParameter(format!(
                    "{} Hadamard tests ran during propagation",
                    out.propagation_calls
                )));
            }
            out.trajectory
                .alphas
                .iter()
                .map(|a| {
                    qubits
                        .iter()
                        .map(|&q| qas::survival_from_alpha(basis, a, q, false, tolerance))
                        .collect()
                })
                .collect()
        })
        .collect()
}
