//! The N-neutrino two-flavor Hamiltonian and its time-dependent coupling.
//!
//! Units: all times are in `1/omega_0` and all energies in `omega_0`
//! (`omega_0 = 1`). Neutrino `i` sits in frequency bin `omega_i = (i + 1)`,
//! the coefficient carried by the one-body term, so qubit 0 is the lowest
//! (`omega_1`) bin. The prose convention `omega_i = i omega_0` is off by one
//! relative to that coefficient; the coefficient is what is implemented.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::dense::CMatrix;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::statevector::{Circuit, Gate, Statevector};
use crate::{Error, Result};

/// Default start of the simulated window, in `1/omega_0`.
pub const DEFAULT_T_START: f64 = 210.64;

/// Time-dependent neutrino-neutrino interaction strength `mu(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingSchedule {
    Constant {
        mu0: f64,
    },
    /// `mu0 * (1 - sqrt(1 - (r_nu / t)^2))^2` for `t >= r_nu`.
    SupernovaProfile {
        mu0: f64,
        r_nu: f64,
    },
    Tabulated(TabulatedSchedule),
}

impl CouplingSchedule {
    pub fn constant(mu0: f64) -> Result<Self> {
        check_nonneg("mu0", mu0)?;
        Ok(Self::Constant { mu0 })
    }

    pub fn supernova_profile(mu0: f64, r_nu: f64) -> Result<Self> {
        check_nonneg("mu0", mu0)?;
        if !(r_nu.is_finite() && r_nu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "r_nu must be positive, got {r_nu}"
            )));
        }
        Ok(Self::SupernovaProfile { mu0, r_nu })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { mu0 } => Self::constant(*mu0).map(|_| ()),
            Self::SupernovaProfile { mu0, r_nu } => {
                Self::supernova_profile(*mu0, *r_nu).map(|_| ())
            }
            Self::Tabulated(t) => {
                TabulatedSchedule::new(t.times.clone(), t.values.clone()).map(|_| ())
            }
        }
    }

    /// Closed interval on which `mu_at` is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::Constant { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::SupernovaProfile { r_nu, .. } => (*r_nu, f64::INFINITY),
            Self::Tabulated(t) => (t.times[0], *t.times.last().expect("non-empty table")),
        }
    }

    pub fn mu_at(&self, t: f64) -> Result<f64> {
        let (start, end) = self.domain();
        if !t.is_finite() || t < start || t > end {
            return Err(Error::ScheduleDomain { t, start, end });
        }
        Ok(match self {
            Self::Constant { mu0 } => *mu0,
            Self::SupernovaProfile { mu0, r_nu } => {
                let ratio = r_nu / t;
                let inner = 1.0 - (1.0 - ratio * ratio).max(0.0).sqrt();
                mu0 * inner * inner
            }
            Self::Tabulated(table) => table.interpolate(t),
        })
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and non-negative, got {v}"
        )))
    }
}

/// Piecewise-linear `mu(t)` through sampled points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedSchedule {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedSchedule {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "tabulated schedule needs matching non-empty columns, got {} times and {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("schedule times"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "tabulated schedule times must be strictly increasing".into(),
            ));
        }
        for &v in &values {
            check_nonneg("tabulated mu", v)?;
        }
        Ok(Self { times, values })
    }

    /// Parses two numeric columns `t, mu`. A header row and `#` comments are allowed.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            if record.len() != 2 {
                return Err(Error::Parse(format!(
                    "schedule row {} has {} fields, expected 2",
                    row + 1,
                    record.len()
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(t), Ok(mu)) => {
                    times.push(t);
                    values.push(mu);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "schedule row {} is not numeric: {:?}",
                        row + 1,
                        record
                    )))
                }
            }
        }
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn interpolate(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return self.values[0];
        }
        if k == self.times.len() {
            return *self.values.last().expect("non-empty table");
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

/// `H(t) = h_i + mu(t) h_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSplit {
    /// One-body vacuum term, time independent.
    pub h_i: PauliSum,
    /// Two-body exchange term without the coupling.
    pub h_d: PauliSum,
}

impl HamiltonianSplit {
    pub fn n_qubits(&self) -> usize {
        self.h_i.n_qubits()
    }

    pub fn at(&self, mu: f64) -> PauliSum {
        self.h_i.add(&self.h_d.scale(mu)).expect("same register")
    }

    pub fn dense(&self, cap: usize) -> Result<(CMatrix, CMatrix)> {
        Ok((self.h_i.to_matrix(cap)?, self.h_d.to_matrix(cap)?))
    }
}

/// Builds `h_i = 1/2 sum_i (i+1)(sin theta X_i - cos theta Z_i)` and
/// `h_d = 1/2 sum_{i<j} (X_i X_j + Y_i Y_j + Z_i Z_j)`.
pub fn build_model(n: usize, theta: f64) -> Result<HamiltonianSplit> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 neutrinos, got {n}"
        )));
    }
    if !(theta.is_finite() && (0.0..FRAC_PI_2).contains(&theta)) {
        return Err(Error::InvalidParameter(format!(
            "mixing angle must lie in [0, pi/2), got {theta}"
        )));
    }
    let (s, c) = theta.sin_cos();
    let mut h_i = PauliSum::zero(n);
    for i in 0..n {
        let w = (i + 1) as f64;
        h_i.add_term(0.5 * w * s, PauliString::single(n, i, Pauli::X)?)?;
        h_i.add_term(-0.5 * w * c, PauliString::single(n, i, Pauli::Z)?)?;
    }
    let mut h_d = PauliSum::zero(n);
    for i in 0..n {
        for j in i + 1..n {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                h_d.add_term(0.5, PauliString::from_sparse(n, &[(i, p), (j, p)])?)?;
            }
        }
    }
    Ok(HamiltonianSplit { h_i, h_d })
}

/// Model parameters together with the coupling schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct NeutrinoModel {
    pub n: usize,
    pub theta: f64,
    pub schedule: CouplingSchedule,
    split: HamiltonianSplit,
}

impl NeutrinoModel {
    pub fn new(n: usize, theta: f64, schedule: CouplingSchedule) -> Result<Self> {
        schedule.validate()?;
        let split = build_model(n, theta)?;
        Ok(Self {
            n,
            theta,
            schedule,
            split,
        })
    }

    pub fn split(&self) -> &HamiltonianSplit {
        &self.split
    }

    /// Vacuum frequency of neutrino `i` in units of `omega_0`.
    pub fn frequency(i: usize) -> f64 {
        (i + 1) as f64
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<PauliSum> {
        Ok(self.split.at(self.schedule.mu_at(t)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// Electron flavor, encoded as `|0>`.
    Electron,
    /// Heavy-lepton flavor, encoded as `|1>`.
    X,
}

pub fn initial_flavor_state(n: usize, flavors: &[Flavor]) -> Result<Statevector> {
    check_flavors(n, flavors)?;
    let index = flavors
        .iter()
        .enumerate()
        .filter(|(_, &f)| f == Flavor::X)
        .fold(0usize, |k, (q, _)| k | (1 << q));
    Statevector::basis(n, index)
}

/// Circuit preparing the flavor product state from `|0...0>`.
pub fn flavor_prep_circuit(n: usize, flavors: &[Flavor]) -> Result<Circuit> {
    check_flavors(n, flavors)?;
    let mut c = Circuit::new(n);
    for (q, &f) in flavors.iter().enumerate() {
        if f == Flavor::X {
            c.push(Gate::X(q))?;
        }
    }
    Ok(c)
}

fn check_flavors(n: usize, flavors: &[Flavor]) -> Result<()> {
    if flavors.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: flavors.len(),
        });
    }
    Ok(())
}
