//! Identification of the reaction coefficient of a boundary-controlled
//! reaction-diffusion equation `u_t = λ u_xx - k u` on `[0, 1]`.
//!
//! A dynamic boundary compensator regulates the measured output `y = u(1)`
//! to a constant reference. Its integrator state settles at
//! `g_λ(k) · y_r` with `g_λ(k) = sqrt(k/λ) tanh(sqrt(k/λ))`, and inverting
//! the monotone map `g_λ` recovers `k`. An adaptive boundary observer fed
//! with the live estimate reconstructs the distributed state.
//!
//! Modules follow the pipeline: [`plant`] discretizes the PDE, [`control`]
//! closes the loop, [`steady`] holds the equilibrium and the estimator,
//! [`observer`] the state observer, [`analysis`] the Lyapunov and spectral
//! diagnostics, and [`harness`] runs, sweeps and persists experiments.

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod control;
pub mod error;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod observer;
pub mod output;
pub mod params;
pub mod plant;
pub mod series;
pub mod steady;
mod svg;

pub use analysis::{
    certificate_matrix, decay_rate_fit, find_epsilon_star, lyapunov_u, lyapunov_v, lyapunov_w,
    Certificate, DecayFit,
};
pub use config::{load_config, RunConfig};
pub use control::{augmented_matrix, control_input, step, ClosedLoop, LoopConfig, Scheme};
pub use error::{Error, Result};
pub use grid::{l2_norm, Field, Grid};
pub use harness::{run_single, run_sweep, RunResult};
pub use observer::{error_field, observer_fixed_point, observer_step, ObserverState};
pub use output::emit_outputs;
pub use params::SystemParams;
pub use plant::{assemble_operator, boundary_output, PlantState};
pub use series::{Column, Sample, TimeSeries};
pub use steady::{equilibrium, estimate_k, g_lambda, g_lambda_inverse, EquilibriumProfile};
