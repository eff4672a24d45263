//! Method-of-lines discretization of `u_t = lambda u_xx - k u` on `[0, 1]`
//! with `u_x(0) = 0` and actuated flux `u_x(1) = v`.
//!
//! Second-order central differences; both Neumann conditions are imposed by
//! eliminating a ghost node, so the semi-discrete plant is
//! `du/dt = A u + b v` with `b = (0, …, 0, 2 lambda / h)`.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::linalg::Tridiagonal;
use crate::params::SystemParams;

/// Semi-discrete plant `du/dt = A u + b v`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantOperator {
    pub a: Tridiagonal,
    /// Only nonzero entry of `b`, sitting in the last row.
    pub input_gain: f64,
}

impl PlantOperator {
    pub fn input_vector(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.a.dim()];
        b[self.a.dim() - 1] = self.input_gain;
        b
    }

    /// `A u + b v`.
    pub fn apply(&self, u: &[f64], v: f64) -> Vec<f64> {
        let mut r = self.a.matvec(u);
        *r.last_mut().unwrap() += self.input_gain * v;
        r
    }
}

/// `lambda ∂²/∂x² - k` with homogeneous Neumann rows at both ends.
pub fn diffusion_reaction(lambda: f64, k: f64, grid: &Grid) -> Tridiagonal {
    let n = grid.n();
    let h = grid.h();
    let c = lambda / (h * h);
    let mut a = Tridiagonal::zeros(n);
    for i in 0..n {
        a.diag[i] = -2.0 * c - k;
    }
    for i in 0..n - 1 {
        a.lower[i] = c;
        a.upper[i] = c;
    }
    // ghost nodes u_{-1} = u_1 and u_n = u_{n-2} (+ 2 h v, carried by b)
    a.upper[0] = 2.0 * c;
    a.lower[n - 2] = 2.0 * c;
    a
}

pub fn assemble_operator(params: &SystemParams, grid: &Grid) -> Result<PlantOperator> {
    if grid.n() < 3 {
        return Err(Error::validation("grid.n", "need at least 3 nodes"));
    }
    Ok(PlantOperator {
        a: diffusion_reaction(params.lambda, params.k_true, grid),
        input_gain: 2.0 * params.lambda / grid.h(),
    })
}

/// Closed-loop state: temperature-like field `u`, compensator state `chi`
/// and time.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub u: Field,
    pub chi: f64,
    pub t: f64,
}

impl PlantState {
    pub fn new(u: Field, chi: f64) -> Self {
        PlantState { u, chi, t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.chi.is_finite() && self.t.is_finite()
    }
}

/// Measured output `y = u(1)`.
pub fn boundary_output(s: &PlantState) -> f64 {
    s.u.right()
}
