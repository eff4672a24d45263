//! Physical and controller constants of the closed loop.

use crate::error::{Error, Result};

/// Constants of the plant `u_t = lambda u_xx - k u`, of the boundary
/// compensator (`gamma`, `rho`, `y_r`) and of the observer injection gain.
///
/// `k_true` is what the plant simulator uses. Estimators never read it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub lambda: f64,
    pub k_true: f64,
    pub gamma: f64,
    pub rho: f64,
    pub y_r: f64,
    pub alpha: f64,
}

impl SystemParams {
    pub fn new(lambda: f64, k_true: f64, gamma: f64, rho: f64, y_r: f64, alpha: f64) -> Result<Self> {
        let p = SystemParams {
            lambda,
            k_true,
            gamma,
            rho,
            y_r,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    /// The numerical experiment parameters: lambda = 3, k = 2, gamma = 2,
    /// rho = 4.5, y_r = 1, with observer gain 2.
    pub fn reference() -> Self {
        SystemParams {
            lambda: 3.0,
            k_true: 2.0,
            gamma: 2.0,
            rho: 4.5,
            y_r: 1.0,
            alpha: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("k", self.k_true)?;
        positive("gamma", self.gamma)?;
        positive("rho", self.rho)?;
        positive("alpha", self.alpha)?;
        if !self.y_r.is_finite() {
            return Err(Error::validation("y_r", "must be finite"));
        }
        Ok(())
    }

    /// Upper end of the admissible Lyapunov cross-weight interval, `sqrt(lambda/rho)`.
    pub fn epsilon_bound(&self) -> f64 {
        (self.lambda / self.rho).sqrt()
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(name, format!("must be > 0 (got {value})")))
    }
}
