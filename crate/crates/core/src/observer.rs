//! Adaptive boundary observer
//! `û_t = lambda û_xx - k̂ û`, `û_x(0) = 0`, `û_x(1) = v + alpha (y - û(1))`,
//! driven only by the measured output `y`, the applied input `v` and the
//! live estimate `k̂`.

use crate::control::LoopConfig;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::params::SystemParams;
use crate::plant::{diffusion_reaction, PlantState};

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub u_hat: Field,
    pub k_hat: f64,
    pub t: f64,
}

impl ObserverState {
    pub fn new(u_hat: Field, k_hat: f64) -> Self {
        ObserverState {
            u_hat,
            k_hat,
            t: 0.0,
        }
    }
}

/// Advances the observer by one step with `k̂` held at `obs.k_hat`.
///
/// `y_meas` and `v_applied` are the values representative of the step for
/// the chosen scheme: end-of-step values for implicit Euler, the average of
/// both ends for Crank–Nicolson. With that convention an observer started
/// on the true state with the true coefficient reproduces the discrete plant
/// exactly.
///
/// The injection `-alpha û(1)` sits in the implicit boundary row, so the
/// step is stable for any `dt > 0`.
pub fn observer_step(
    obs: &ObserverState,
    y_meas: f64,
    v_applied: f64,
    params: &SystemParams,
    cfg: &LoopConfig,
) -> Result<ObserverState> {
    if !(cfg.dt > 0.0) {
        return Err(Error::validation("loop.dt", "must be > 0"));
    }
    if !(obs.k_hat >= 0.0) {
        return Err(Error::validation("k_hat", format!("must be >= 0 (got {})", obs.k_hat)));
    }
    let grid = Grid::new(obs.u_hat.len())?;
    let n = grid.n();
    let gain = 2.0 * params.lambda / grid.h();
    let mut op = diffusion_reaction(params.lambda, obs.k_hat, &grid);
    op.diag[n - 1] -= gain * params.alpha;

    let theta = cfg.scheme.theta();
    let mut rhs = if theta < 1.0 {
        op.shifted_identity((1.0 - theta) * cfg.dt).matvec(&obs.u_hat)
    } else {
        obs.u_hat.to_vec()
    };
    rhs[n - 1] += cfg.dt * gain * (v_applied + params.alpha * y_meas);
    let u_hat = op.shifted_identity(-theta * cfg.dt).solve(&rhs)?;
    Ok(ObserverState {
        u_hat: Field::from_values(u_hat),
        k_hat: obs.k_hat,
        t: obs.t + cfg.dt,
    })
}

/// Stationary observer profile for frozen `k̂`, output `y` and input `v`:
/// the limit of [`observer_step`] when its inputs stop moving.
pub fn observer_fixed_point(
    k_hat: f64,
    y: f64,
    v: f64,
    params: &SystemParams,
    grid: &Grid,
) -> Result<Field> {
    let n = grid.n();
    let gain = 2.0 * params.lambda / grid.h();
    let mut op = diffusion_reaction(params.lambda, k_hat, grid);
    op.diag[n - 1] -= gain * params.alpha;
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = -gain * (v + params.alpha * y);
    Ok(Field::from_values(op.solve(&rhs)?))
}

/// Estimation error `eta = u - û`.
pub fn error_field(plant: &PlantState, obs: &ObserverState) -> Result<Field> {
    plant.u.checked_sub(&obs.u_hat)
}
