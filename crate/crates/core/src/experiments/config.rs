//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "modes": [{"kind": "odd_cat", "alpha": [0.5, 0]}, {"kind": "vacuum"}],
//!   "unitary": {"kind": "gates", "gates": [
//!     {"type": "beamsplitter", "i": 0, "j": 1, "theta": 0.785398, "phi": 0}
//!   ]},
//!   "cutoff": {"auto": 1e-9},
//!   "samples": 1000,
//!   "seed": 7
//! }
//! ```
//!
//! Mode indices are zero-based. Gate lists are applied in listed order.

use crate::error::{Error, Result};
use crate::optics::{beamsplitter, compose, haar_random_unitary, phase_shifter, MatrixFile, UnitaryMatrix, DEFAULT_UNITARITY_TOL};
use crate::sampler::{auto_cutoff, CutoffPolicy};
use crate::states::{make_register, CatSpecJson, InputRegister};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub modes: Vec<CatSpecJson>,
    pub unitary: UnitarySpec,
    pub cutoff: CutoffSpec,
    #[serde(default)]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dist: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_samples: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitarySpec {
    /// Haar-random; the seed defaults to the experiment seed.
    Haar {
        #[serde(default)]
        seed: Option<u64>,
    },
    Explicit(MatrixFile),
    Gates { gates: Vec<GateSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateSpec {
    Beamsplitter {
        i: usize,
        j: usize,
        theta: f64,
        #[serde(default)]
        phi: f64,
    },
    PhaseShifter { i: usize, phi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffSpec {
    Auto(f64),
    PerMode(Vec<usize>),
}

/// A configuration resolved into simulator objects.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub register: InputRegister,
    pub unitary: UnitaryMatrix,
    pub policy: CutoffPolicy,
}

impl ExperimentConfig {
    /// Parse a config; errors carry `source_name:line:column`.
    pub fn from_json_str(text: &str, source_name: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json(source_name, &e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    pub fn build_unitary(&self) -> Result<UnitaryMatrix> {
        let m = self.modes.len();
        let u = match &self.unitary {
            UnitarySpec::Haar { seed } => haar_random_unitary(m, seed.unwrap_or(self.seed)),
            UnitarySpec::Explicit(file) => file.to_unitary(DEFAULT_UNITARITY_TOL)?,
            UnitarySpec::Gates { gates } => {
                let mut u = UnitaryMatrix::identity(m);
                for gate in gates {
                    let g = match *gate {
                        GateSpec::Beamsplitter { i, j, theta, phi } => beamsplitter(m, i, j, theta, phi)?,
                        GateSpec::PhaseShifter { i, phi } => phase_shifter(m, i, phi)?,
                    };
                    u = compose(&u, &g)?;
                }
                u
            }
        };
        if u.dim() != m {
            return Err(Error::DimMismatch {
                expected: m,
                found: u.dim(),
            });
        }
        Ok(u)
    }

    pub fn build(&self) -> Result<Experiment> {
        let specs = self.modes.iter().map(CatSpecJson::build).collect::<Result<Vec<_>>>()?;
        let register = make_register(specs)?;
        let unitary = self.build_unitary()?;
        let policy = match &self.cutoff {
            CutoffSpec::Auto(epsilon) => auto_cutoff(&register, &unitary, *epsilon)?,
            CutoffSpec::PerMode(limits) => {
                if limits.len() != register.num_modes() {
                    return Err(Error::DimMismatch {
                        expected: register.num_modes(),
                        found: limits.len(),
                    });
                }
                CutoffPolicy::explicit(limits.clone())?
            }
        };
        Ok(Experiment {
            register,
            unitary,
            policy,
        })
    }
}
