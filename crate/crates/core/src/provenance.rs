use serde::{Deserialize, Serialize};
use std::fmt;

/// How a reported number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Closed-form or exact-arithmetic evaluation.
    Exact,
    /// Finite Galerkin truncation of a generator.
    Galerkin,
    /// Monte Carlo estimate.
    MonteCarlo,
    /// Derived from an estimated input (e.g. a Poincaré constant from a Galerkin gap).
    Estimated,
}

impl Provenance {
    pub const ALL: [Provenance; 4] =
        [Provenance::Exact, Provenance::Galerkin, Provenance::MonteCarlo, Provenance::Estimated];

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Galerkin => "galerkin",
            Provenance::MonteCarlo => "monte-carlo",
            Provenance::Estimated => "estimated",
        }
    }

    /// The weaker of two provenances; used when a quantity combines inputs.
    pub fn combine(self, other: Provenance) -> Provenance {
        fn rank(p: Provenance) -> u8 {
            match p {
                Provenance::Exact => 0,
                Provenance::Galerkin => 1,
                Provenance::MonteCarlo => 2,
                Provenance::Estimated => 3,
            }
        }
        if rank(self) >= rank(other) {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A number together with its provenance tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tagged {
    pub value: f64,
    pub provenance: Provenance,
}

impl Tagged {
    pub fn new(value: f64, provenance: Provenance) -> Self {
        Self { value, provenance }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, Provenance::Exact)
    }
}
