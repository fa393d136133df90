//! Quantum-jump trajectories and stochastic thermodynamics of a
//! periodically driven qubit coupled to a fermionic bath, together with
//! the dressed (Floquet-ladder) embedding that tracks the number of drive
//! quanta exchanged.

pub mod bath;
pub mod channels;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod presets;
pub mod thermo;

pub use error::{Error, Result};

use std::fmt;

use serde::{Deserialize, Serialize};

/// Label of a Floquet state. `Plus` has the larger period-averaged
/// `sigma_z` expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn index(self) -> usize {
        match self {
            Branch::Plus => 0,
            Branch::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> Branch {
        if i == 0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }

    pub fn other(self) -> Branch {
        Branch::from_index(1 - self.index())
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}
