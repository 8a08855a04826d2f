//! Smooth cut-off functions built from `phi(t) = exp(-1/t)`.

use serde::Serialize;

use crate::error::{Error, Result};

/// `exp(-1/t)` for `t > 0`, else 0.
pub fn phi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// `phi'(t) = phi(t) / t^2`.
pub fn phi_prime(t: f64) -> f64 {
    if t > 0.0 {
        phi(t) / (t * t)
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= sigma`,
/// `phi(t) / (phi(t) + phi(sigma - t))` between.
pub fn g_sigma(t: f64, sigma: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= sigma {
        1.0
    } else {
        let a = phi(t);
        a / (a + phi(sigma - t))
    }
}

pub fn g_sigma_prime(t: f64, sigma: f64) -> f64 {
    if t <= 0.0 || t >= sigma {
        return 0.0;
    }
    let a = phi(t);
    let b = phi(sigma - t);
    let s = a + b;
    if s == 0.0 {
        return 0.0;
    }
    (phi_prime(t) * b + a * phi_prime(sigma - t)) / (s * s)
}

/// Second derivative of `g_sigma`, by the quotient rule on `a / (a + b)`.
pub fn g_sigma_second(t: f64, sigma: f64) -> f64 {
    if t <= 0.0 || t >= sigma {
        return 0.0;
    }
    let u = sigma - t;
    let a = phi(t);
    let b = phi(u);
    let s = a + b;
    if s == 0.0 {
        return 0.0;
    }
    let a1 = phi_prime(t);
    let b1 = -phi_prime(u);
    // phi'' = phi (1 - 2t) / t^4
    let a2 = a * (1.0 - 2.0 * t) / t.powi(4);
    let b2 = b * (1.0 - 2.0 * u) / u.powi(4);
    let num = a1 * b - a * b1;
    let num1 = a2 * b - a * b2;
    let s1 = a1 + b1;
    (num1 * s - 2.0 * num * s1) / (s * s * s)
}

/// Decreasing step: 1 for `t <= 0`, 0 for `t >= rho`.
pub fn h_rho(t: f64, rho: f64) -> f64 {
    g_sigma(rho - t, rho)
}

/// Even bump `c g_1((t + delta)/delta) g_1((delta - t)/delta)`: support
/// `[-delta, delta]`, peak `c` at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpH {
    pub c: f64,
    pub delta: f64,
}

impl BumpH {
    pub fn new(c: f64, delta: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::AmplitudeTooLarge(c));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParams(format!("delta = {delta} outside (0, 1)")));
        }
        Ok(Self { c, delta })
    }

    /// Same shape without the amplitude gate, for fault injection.
    pub fn unchecked(c: f64, delta: f64) -> Self {
        Self { c, delta }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t.abs() >= self.delta {
            return 0.0;
        }
        let d = self.delta;
        self.c * g_sigma((t + d) / d, 1.0) * g_sigma((d - t) / d, 1.0)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t.abs() >= self.delta {
            return 0.0;
        }
        let d = self.delta;
        let (u, v) = ((t + d) / d, (d - t) / d);
        self.c * (g_sigma_prime(u, 1.0) * g_sigma(v, 1.0) - g_sigma(u, 1.0) * g_sigma_prime(v, 1.0)) / d
    }
}
