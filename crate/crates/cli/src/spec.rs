//! JSON Hamiltonian spec files.
//!
//! ```json
//! { "n": 1, "omega": [1.0], "d": 2,
//!   "components": [ { "m": [0], "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]] } ] }
//! ```
//!
//! Complex entries are `[re, im]` pairs. `alpha` is optional and defaults to
//! the operator norm of the component.

use std::path::Path;

use fqet_core::{c64, ComplexMatrix, FourierComponent, FourierHamiltonian};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub m: Vec<i64>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpecFile {
    pub n: usize,
    pub omega: Vec<f64>,
    pub d: usize,
    pub components: Vec<ComponentSpec>,
}

impl HamiltonianSpecFile {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            // serde_json appends its own " at line L column C".
            let full = e.to_string();
            let message = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m).to_string();
            CliError::Parse { path: origin.to_path_buf(), line: e.line(), column: e.column(), message }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec files always serialize")
    }

    /// Writes every weight explicitly so that a round trip is exact.
    pub fn from_hamiltonian(h: &FourierHamiltonian) -> Self {
        let d = h.dim();
        let components = h
            .components()
            .iter()
            .map(|c| ComponentSpec {
                m: c.index.0.clone(),
                matrix: (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                let z = c.matrix.get(i, j);
                                [z.re, z.im]
                            })
                            .collect()
                    })
                    .collect(),
                alpha: Some(c.weight),
            })
            .collect();
        Self { n: h.n(), omega: h.omega().to_vec(), d, components }
    }

    pub fn to_hamiltonian(&self) -> Result<FourierHamiltonian> {
        if self.omega.len() != self.n {
            return Err(CliError::Invalid(format!("n = {} but omega has {} entries", self.n, self.omega.len())));
        }
        let mut comps = Vec::with_capacity(self.components.len());
        for c in &self.components {
            if c.m.len() != self.n {
                return Err(CliError::Invalid(format!(
                    "index m = {:?} has length {}, expected n = {}",
                    c.m,
                    c.m.len(),
                    self.n
                )));
            }
            if c.matrix.len() != self.d || c.matrix.iter().any(|row| row.len() != self.d) {
                return Err(CliError::Invalid(format!("matrix of m = {:?} is not {}x{}", c.m, self.d, self.d)));
            }
            let entries: Vec<_> = c.matrix.iter().flatten().map(|&[re, im]| c64(re, im)).collect();
            let matrix = ComplexMatrix::from_row_slice(self.d, self.d, &entries);
            comps.push(match c.alpha {
                Some(a) => FourierComponent::with_weight(c.m.clone(), matrix, a),
                None => FourierComponent::new(c.m.clone(), matrix),
            });
        }
        Ok(FourierHamiltonian::new(self.omega.clone(), comps)?)
    }
}

pub fn parse_spec(path: &Path) -> Result<FourierHamiltonian> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    HamiltonianSpecFile::from_json(&text, path)?.to_hamiltonian()
}
