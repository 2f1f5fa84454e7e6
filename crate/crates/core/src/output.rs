//! Trajectory records and their CSV/JSON encodings.
//!
//! CSV values are written with 12 significant digits and trailing zeros
//! trimmed, so a parsed file re-emits byte for byte.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::experiment::{Algorithm, RunConfig};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 6] = ["t", "p_median", "p_mad", "p_exact", "algorithm", "qubit"];

const SIGNIFICANT_DIGITS: usize = 12;

/// One tracked qubit at one reporting time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    /// Median over runs of the survival probability estimate.
    pub p_median: f64,
    pub p_mad: f64,
    /// Classical reference value; absent when the register is too large.
    pub p_exact: Option<f64>,
    pub algorithm: Algorithm,
    pub qubit: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// Configuration that produced the rows, echoed into JSON output.
    pub config: Option<RunConfig>,
    pub seed: Option<u64>,
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryRecord {
    pub fn validate(&self) -> Result<()> {
        let mut last_t: BTreeMap<usize, f64> = BTreeMap::new();
        for r in &self.rows {
            let probs = [Some(r.p_median), r.p_exact];
            if !r.t.is_finite() || probs.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Parse(format!(
                    "probability outside [0, 1] at t = {}",
                    r.t
                )));
            }
            if !(r.p_mad >= 0.0 && r.p_mad.is_finite()) {
                return Err(Error::Parse(format!(
                    "invalid MAD {} at t = {}",
                    r.p_mad, r.t
                )));
            }
            if let Some(prev) = last_t.insert(r.qubit, r.t) {
                if r.t <= prev {
                    return Err(Error::Parse(format!(
                        "times for qubit {} not strictly increasing at t = {}",
                        r.qubit, r.t
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                format_sig(r.t),
                format_sig(r.p_median),
                format_sig(r.p_mad),
                r.p_exact.map(format_sig).unwrap_or_default(),
                r.algorithm.to_string(),
                r.qubit.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses CSV produced by [`TrajectoryRecord::write_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = rdr.headers()?;
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::Parse(format!(
                "expected header {}, found {}",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or_default();
            let number = |i: usize| -> Result<f64> {
                field(i)
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("column {}: {e}", CSV_HEADER[i])))
            };
            rows.push(TrajectoryRow {
                t: number(0)?,
                p_median: number(1)?,
                p_mad: number(2)?,
                p_exact: if field(3).is_empty() {
                    None
                } else {
                    Some(number(3)?)
                },
                algorithm: field(4).parse()?,
                qubit: field(5)
                    .parse()
                    .map_err(|e| Error::Parse(format!("column qubit: {e}")))?,
            });
        }
        let record = Self {
            config: None,
            seed: None,
            rows,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: Self = serde_json::from_str(text)?;
        record.validate()?;
        Ok(record)
    }
}

/// `%.12g`-style formatting with trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
