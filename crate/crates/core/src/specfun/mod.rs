//! Special functions used by the kernel, spectrum and zeta modules.
//!
//! Everything here is a pure function of its arguments. Accuracy targets are
//! carried explicitly by [`Accuracy`] where an operation iterates a series.

mod bessel_i;
mod bessel_j;
mod gamma;
mod zeta;

pub use bessel_i::{bessel_i_scaled, bessel_i_scaled_pair};
pub use bessel_j::{bessel_j, bessel_j_and_derivative, bessel_j_zero, bessel_j_zeros_below, mcmahon_seed};
pub use gamma::log_gamma;
pub use zeta::hurwitz_zeta;

use crate::error::{domain, Result};

/// Series tolerance and term cap shared by the iterative evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    rel_tol: f64,
    max_terms: usize,
}

impl Accuracy {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1e-3) {
            return Err(domain(format!("rel_tol must lie in (0, 1e-3), got {rel_tol}")));
        }
        if max_terms < 50 {
            return Err(domain(format!("max_terms must be at least 50, got {max_terms}")));
        }
        Ok(Self { rel_tol, max_terms })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for Accuracy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_invariants() {
        assert!(Accuracy::new(1e-12, 50).is_ok());
        assert!(Accuracy::new(0.0, 100).is_err());
        assert!(Accuracy::new(1e-2, 100).is_err());
        assert!(Accuracy::new(1e-10, 49).is_err());
    }
}
