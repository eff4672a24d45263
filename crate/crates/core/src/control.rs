//! Boundary compensator `chi' = -rho (y - y_r)`, `v = chi - gamma (y - y_r)`
//! closed around the discretized plant, and its implicit time integration.
//!
//! Ordering the augmented state as `z = (u_0, …, u_{n-1}, chi)` keeps the
//! closed-loop matrix tridiagonal: the compensator only couples to the last
//! node, so each implicit step is a single Thomas solve.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::linalg::{Tridiagonal, TridiagonalLu};
use crate::params::SystemParams;
use crate::plant::{assemble_operator, boundary_output, diffusion_reaction, PlantOperator, PlantState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    ImplicitEuler,
    CrankNicolson,
}

impl Scheme {
    /// Implicit weight of the one-step theta method.
    pub fn theta(self) -> f64 {
        match self {
            Scheme::ImplicitEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ImplicitEuler => "implicit-euler",
            Scheme::CrankNicolson => "crank-nicolson",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "implicit-euler" => Ok(Scheme::ImplicitEuler),
            "crank-nicolson" => Ok(Scheme::CrankNicolson),
            other => Err(Error::validation(
                "loop.scheme",
                format!("expected implicit-euler or crank-nicolson, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub record_every: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            dt: 1e-3,
            t_end: 10.0,
            scheme: Scheme::ImplicitEuler,
            record_every: 10,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::validation("loop.dt", format!("must be > 0 (got {})", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::validation(
                "loop.t_end",
                format!("must be > 0 (got {})", self.t_end),
            ));
        }
        if self.dt >= self.t_end {
            return Err(Error::validation("loop.dt", "must be smaller than loop.t_end"));
        }
        if self.record_every == 0 {
            return Err(Error::validation("loop.record_every", "must be >= 1"));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_end`, rounding to the nearest step.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

/// `v = chi - gamma (y - y_r)`.
pub fn control_input(s: &PlantState, params: &SystemParams) -> f64 {
    s.chi - params.gamma * (boundary_output(s) - params.y_r)
}

/// Closed-loop semi-discrete system `z' = A z + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem {
    pub a: Tridiagonal,
    pub c: Vec<f64>,
    /// Plant input gain `2 lambda / h`, kept for the noise hooks.
    input_gain: f64,
}

impl AugmentedSystem {
    pub fn new(params: &SystemParams, grid: &Grid) -> Result<Self> {
        let PlantOperator { a: plant, input_gain } = assemble_operator(params, grid)?;
        let n = grid.n();
        let mut a = Tridiagonal::zeros(n + 1);
        a.diag[..n].copy_from_slice(&plant.diag);
        a.lower[..n - 1].copy_from_slice(&plant.lower);
        a.upper[..n - 1].copy_from_slice(&plant.upper);
        // v = chi - gamma u_{n-1} + gamma y_r enters through b
        a.diag[n - 1] -= input_gain * params.gamma;
        a.upper[n - 1] = input_gain;
        // chi' = -rho u_{n-1} + rho y_r
        a.lower[n - 1] = -params.rho;
        a.diag[n] = 0.0;

        let mut c = vec![0.0; n + 1];
        c[n - 1] = input_gain * params.gamma * params.y_r;
        c[n] = params.rho * params.y_r;
        Ok(AugmentedSystem { a, c, input_gain })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `A z + c`.
    pub fn rhs(&self, z: &[f64]) -> Vec<f64> {
        let mut r = self.a.matvec(z);
        r.iter_mut().zip(&self.c).for_each(|(r, c)| *r += c);
        r
    }

    /// Affine forcing when the compensator reads `y + noise` instead of `y`.
    fn noisy_forcing(&self, params: &SystemParams, noise: f64) -> Vec<f64> {
        let mut c = self.c.clone();
        let n = self.dim() - 1;
        c[n - 1] -= self.input_gain * params.gamma * noise;
        c[n] -= params.rho * noise;
        c
    }

    /// Discrete equilibrium: the solution of `A z + c = 0`.
    pub fn fixed_point(&self) -> Result<(Field, f64)> {
        let neg_c: Vec<f64> = self.c.iter().map(|c| -c).collect();
        let mut z = self.a.solve(&neg_c)?;
        let chi = z.pop().unwrap();
        Ok((Field::from_values(z), chi))
    }
}

/// Dense `(n+1)×(n+1)` closed-loop matrix, for spectral checks.
pub fn augmented_matrix(params: &SystemParams, grid: &Grid) -> Result<DMatrix<f64>> {
    Ok(AugmentedSystem::new(params, grid)?.a.to_dense())
}

/// Reusable stepper for one trajectory: the implicit matrix is factored once.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    system: AugmentedSystem,
    params: SystemParams,
    lu: TridiagonalLu,
    /// `I + (1 - theta) dt A`, absent for implicit Euler.
    explicit: Option<Tridiagonal>,
    dt: f64,
}

impl ClosedLoop {
    pub fn new(params: &SystemParams, grid: &Grid, cfg: &LoopConfig) -> Result<Self> {
        let system = AugmentedSystem::new(params, grid)?;
        let theta = cfg.scheme.theta();
        let lu = system.a.shifted_identity(-theta * cfg.dt).factor()?;
        let explicit = (theta < 1.0).then(|| system.a.shifted_identity((1.0 - theta) * cfg.dt));
        Ok(ClosedLoop {
            system,
            params: *params,
            lu,
            explicit,
            dt: cfg.dt,
        })
    }

    pub fn system(&self) -> &AugmentedSystem {
        &self.system
    }

    pub fn advance(&self, s: &mut PlantState) {
        self.advance_noisy(s, 0.0);
    }

    /// One step with the compensator reading `y + noise` (noise held over the step).
    pub fn advance_noisy(&self, s: &mut PlantState, noise: f64) {
        let n = s.u.len();
        let mut z = Vec::with_capacity(n + 1);
        z.extend_from_slice(&s.u);
        z.push(s.chi);
        let mut rhs = match &self.explicit {
            Some(e) => e.matvec(&z),
            None => z,
        };
        let forcing;
        let c = if noise == 0.0 {
            &self.system.c
        } else {
            forcing = self.system.noisy_forcing(&self.params, noise);
            &forcing
        };
        rhs.iter_mut().zip(c).for_each(|(r, c)| *r += self.dt * c);
        self.lu.solve_in_place(&mut rhs);
        s.chi = rhs[n];
        s.u.copy_from_slice(&rhs[..n]);
        s.t += self.dt;
    }
}

/// One closed-loop step from scratch. Prefer [`ClosedLoop`] for trajectories.
pub fn step(s: &PlantState, params: &SystemParams, cfg: &LoopConfig) -> Result<PlantState> {
    if !(cfg.dt > 0.0) {
        return Err(Error::validation("loop.dt", "must be > 0"));
    }
    let grid = Grid::new(s.u.len())?;
    let stepper = ClosedLoop::new(params, &grid, cfg)?;
    let mut next = s.clone();
    stepper.advance(&mut next);
    Ok(next)
}

/// Open-loop plant stepper with a prescribed boundary flux `v`.
#[derive(Debug, Clone)]
pub struct OpenLoop {
    op: PlantOperator,
    lu: TridiagonalLu,
    explicit: Option<Tridiagonal>,
    dt: f64,
}

impl OpenLoop {
    /// Plant with diffusion `lambda` and reaction `k`; `k = 0` is allowed.
    pub fn new(lambda: f64, k: f64, grid: &Grid, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::validation("loop.dt", "must be > 0"));
        }
        let op = PlantOperator {
            a: diffusion_reaction(lambda, k, grid),
            input_gain: 2.0 * lambda / grid.h(),
        };
        let theta = scheme.theta();
        let lu = op.a.shifted_identity(-theta * dt).factor()?;
        let explicit = (theta < 1.0).then(|| op.a.shifted_identity((1.0 - theta) * dt));
        Ok(OpenLoop { op, lu, explicit, dt })
    }

    pub fn advance(&self, u: &mut Field, v: f64) {
        let mut rhs = match &self.explicit {
            Some(e) => e.matvec(u),
            None => u.to_vec(),
        };
        *rhs.last_mut().unwrap() += self.dt * self.op.input_gain * v;
        self.lu.solve_in_place(&mut rhs);
        u.copy_from_slice(&rhs);
    }
}
