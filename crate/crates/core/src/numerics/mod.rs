//! Shared numerical plumbing: quadrature rules, lattice shells on the
//! l1-sphere, a small symmetric eigen-solver and the tolerance policy.

mod eigen;
mod lattice;
mod quadrature;

pub use eigen::{symmetric_eigen, tridiagonal_eigen, DenseMatrix, SymmetricEigen};
pub use lattice::{shell_cached, shell_count, shell_enumerate, LatticeShell};
pub use quadrature::{gauss_gegenbauer, gauss_legendre, integrate_piecewise, torus_trapezoid, QuadRule, RuleKind};

use serde::Serialize;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum NumericsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("eigen-solver did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
}

/// Mixed absolute/relative comparison: absolute for expected values of
/// magnitude at most one, relative above that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(1e-10)
    }
}

impl Tolerance {
    /// Scaled error of `actual` against `expected`.
    pub fn error(&self, actual: f64, expected: f64) -> f64 {
        let diff = (actual - expected).abs();
        if expected.abs() <= 1.0 {
            diff
        } else {
            diff / expected.abs()
        }
    }

    pub fn close(&self, actual: f64, expected: f64) -> bool {
        self.error(actual, expected) <= self.0
    }
}

/// Two independently computed values of the same quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualRoute {
    pub lhs: f64,
    pub rhs: f64,
}

impl DualRoute {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs }
    }

    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}
