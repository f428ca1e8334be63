//! Simulation and experimentation toolkit for higher-order Ising spin glasses
//! native to heavy-hex coupling maps.
//!
//! The crate covers the full pipeline:
//!
//! * [`model`] — coupling maps, the V2/V3/W structure of heavy-hex graphs,
//!   seeded random ±1 instances, and exact cost evaluation.
//! * [`circuit`] — depth-optimal QAOA phase-separator circuits (CNOT depth 6
//!   per round), edge coloring, gate statistics, and text export.
//! * [`statevector`] — exact dense simulation: a Gray-code cost table, the
//!   fast diagonal-phase path, a gate-by-gate path, expectations, sampling.
//! * [`mps`] — matrix-product-state simulation with interval phase MPOs,
//!   grouped application, SVD compression, exact expectation values, and
//!   perfect sampling.
//! * [`optimize`] — angle canonicalization, grid search, Nelder–Mead, basin
//!   hopping, parameter-fixing search, and angle extrapolation.
//! * [`solve`] — brute-force extrema, cubic-to-quadratic order reduction,
//!   LP-format export, and local-search bounds.
//!
//! Conventions used throughout (documented once here, relied on everywhere):
//!
//! * Qubit `k` of an `n`-qubit register is bit `k` (LSB = qubit 0) of a `u64`
//!   basis index. Bit value 0 means spin `z = +1`, bit 1 means `z = −1`,
//!   i.e. `z = (−1)^bit`.
//! * `RZ(θ) = diag(e^{−iθ/2}, e^{+iθ/2})`, so `RZ(2γd)` applies `e^{−iγd·z}`.
//! * `RX(2β) = cos β·I − i sin β·X`, the mixer factor `e^{−iβσ^x}`.
//! * A cost function is `C(z) = Σ_v d_v z_v + Σ_(i,j) d_ij z_i z_j +
//!   Σ_l d_l z_l z_n1 z_n2` with every coefficient in {−1, +1}.

pub mod circuit;
pub mod linalg;
pub mod model;
pub mod mps;
pub mod optimize;
pub mod solve;
pub mod statevector;

use serde::{Deserialize, Serialize};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid coupling map: {0}")]
    InvalidMap(String),
    #[error("not a heavy-hex graph: {0}")]
    NotHeavyHex(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid angles: {0}")]
    InvalidAngles(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A QAOA angle schedule: `beta[r]` and `gamma[r]` for rounds `r = 0..p`.
///
/// `p = 0` (both vectors empty) is allowed and denotes the bare `|+^n⟩`
/// state; circuit construction rejects it, the simulators accept it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Angles {
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if beta.len() != gamma.len() {
            return Err(Error::InvalidAngles(format!(
                "beta has {} entries but gamma has {}",
                beta.len(),
                gamma.len()
            )));
        }
        if beta.iter().chain(gamma.iter()).any(|a| !a.is_finite()) {
            return Err(Error::InvalidAngles("non-finite angle".into()));
        }
        Ok(Self { beta, gamma })
    }

    /// Number of rounds.
    pub fn p(&self) -> usize {
        self.beta.len()
    }

    /// Serialize as `{"p": …, "beta": […], "gamma": […]}`.
    pub fn to_json_string(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("p".into(), serde_json::json!(self.p()));
        obj.insert("beta".into(), serde_json::json!(self.beta));
        obj.insert("gamma".into(), serde_json::json!(self.gamma));
        serde_json::to_string_pretty(&serde_json::Value::Object(obj)).expect("angles serialize")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            p: Option<usize>,
            beta: Vec<f64>,
            gamma: Vec<f64>,
        }
        let raw: Raw = serde_json::from_str(s)?;
        if let Some(p) = raw.p {
            if p != raw.beta.len() {
                return Err(Error::InvalidAngles(format!(
                    "declared p = {} but beta has {} entries",
                    p,
                    raw.beta.len()
                )));
            }
        }
        Self::new(raw.beta, raw.gamma)
    }
}
