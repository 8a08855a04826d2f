use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};

/// Global knobs shared by every construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    /// Differentiability order, `k >= 2`.
    pub k: u32,
    /// Ambient dimension, `n >= 2`.
    pub n: usize,
    /// Base branching angle in `(0, pi/2)`.
    pub phi: f64,
    /// Dilatation distance.
    pub epsilon: f64,
    /// Relative truncation tolerance for the infinite sums.
    pub tail_tol: f64,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        Self { k: 3, n: 6, phi: FRAC_PI_4, epsilon: 0.1, tail_tol: 1e-12 }
    }
}

impl ConstructionParams {
    pub fn new(k: u32, n: usize, phi: f64, epsilon: f64) -> Result<Self> {
        let p = Self { k, n, phi, epsilon, tail_tol: 1e-12 };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `n` fixed to [`canonical_n`](crate::selfsim::canonical_n).
    pub fn canonical(k: u32, phi: f64, epsilon: f64) -> Result<Self> {
        let c = crate::selfsim::canonical_n(k);
        Self::new(k, c.n, phi, epsilon)
    }

    pub fn with_tail_tol(mut self, tol: f64) -> Result<Self> {
        self.tail_tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.k > 30 {
            return Err(Error::InvalidParams(format!("k = {} outside [2, 30]", self.k)));
        }
        if self.n < 2 || self.n > 64 {
            return Err(Error::InvalidParams(format!("n = {} outside [2, 64]", self.n)));
        }
        if !(self.phi > 0.0 && self.phi < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParams(format!("phi = {} outside (0, pi/2)", self.phi)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol <= 1e-6) {
            return Err(Error::InvalidParams(format!("tail_tol = {} outside (0, 1e-6]", self.tail_tol)));
        }
        Ok(())
    }

    /// Alphabet size `2n - 1`.
    pub fn branching(&self) -> usize {
        2 * self.n - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_values() {
        assert!(ConstructionParams::new(1, 3, 0.5, 0.1).is_err());
        assert!(ConstructionParams::new(3, 1, 0.5, 0.1).is_err());
        assert!(ConstructionParams::new(3, 3, 0.0, 0.1).is_err());
        assert!(ConstructionParams::new(3, 3, 1.6, 0.1).is_err());
        assert!(ConstructionParams::new(3, 3, 0.5, 0.0).is_err());
        assert!(ConstructionParams::default().with_tail_tol(1e-3).is_err());
        assert!(ConstructionParams::new(2, 3, 0.5, 0.1).is_ok());
    }

    #[test]
    fn canonical_sets_n() {
        assert_eq!(ConstructionParams::canonical(3, FRAC_PI_4, 0.1).unwrap().n, 6);
        assert_eq!(ConstructionParams::canonical(4, FRAC_PI_4, 0.1).unwrap().n, 15);
    }
}
