//! Experiment orchestration: single closed-loop runs with the estimator and
//! observer, parameter sweeps and spatial convergence studies.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::analysis::{self, Certificate, DecayFit};
use crate::config::RunConfig;
use crate::control::{control_input, AugmentedSystem, ClosedLoop, LoopConfig};
use crate::error::{Error, Result};
use crate::grid::{l2_norm, Field, Grid};
use crate::observer::{observer_step, ObserverState};
use crate::plant::{boundary_output, PlantState};
use crate::series::{Column, Sample, TimeSeries};
use crate::steady::{equilibrium, estimate_k};

/// Trailing fraction of the horizon used for decay fits.
pub const FIT_WINDOW: f64 = 0.5;

/// Profiles at the end of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub x: Vec<f64>,
    pub u: Field,
    pub u_hat: Option<Field>,
    /// Analytic equilibrium for the true coefficient.
    pub u_bar: Field,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub series: TimeSeries,
    pub snapshot: Snapshot,
    pub certificate: Certificate,
    /// Discrete closed-loop equilibrium `(ū_h, χ̄_h)`; `V` is measured from it.
    pub discrete_equilibrium: (Field, f64),
    /// Exponential fits on the trailing [`FIT_WINDOW`] of selected columns.
    pub fits: Vec<(Column, std::result::Result<DecayFit, String>)>,
    /// Set when the run stopped early; the series ends at the last good sample.
    pub alarm: Option<String>,
    pub steps: usize,
    pub wall_clock: Duration,
}

impl RunResult {
    pub fn fit(&self, column: Column) -> Option<&DecayFit> {
        self.fits
            .iter()
            .find(|(c, _)| *c == column)
            .and_then(|(_, f)| f.as_ref().ok())
    }

    /// First recorded time after which `k̂` stays positive.
    pub fn clamp_release_time(&self) -> Option<f64> {
        clamp_release_time(&self.series)
    }

    pub fn final_sample(&self) -> &Sample {
        self.series.last().expect("a run records at least t = 0")
    }

    /// `‖u - û‖ / ‖u‖` at the end of the run.
    pub fn observer_relative_error(&self, grid: &Grid) -> Option<f64> {
        let u_hat = self.snapshot.u_hat.as_ref()?;
        let eta = self.snapshot.u.checked_sub(u_hat).ok()?;
        Some(l2_norm(&eta, grid) / l2_norm(&self.snapshot.u, grid))
    }
}

pub fn clamp_release_time(series: &TimeSeries) -> Option<f64> {
    let k = series.column(Column::KHat)?;
    let last_zero = k.iter().rposition(|&v| v <= 0.0);
    match last_zero {
        None => series.samples.first().map(|s| s.t),
        Some(i) if i + 1 < k.len() => Some(series.samples[i + 1].t),
        Some(_) => None,
    }
}

struct Recorder<'a> {
    cfg: &'a RunConfig,
    grid: Grid,
    eq_u: Field,
    eq_chi: f64,
    epsilon: Option<f64>,
}

impl Recorder<'_> {
    fn sample(&self, s: &PlantState, obs: Option<&ObserverState>) -> Result<Sample> {
        let params = &self.cfg.params;
        let k_hat = if self.cfg.estimator {
            Some(estimate_k(s.chi, params)?)
        } else {
            None
        };
        let lyap_v = match self.epsilon {
            Some(e) => {
                let du = s.u.checked_sub(&self.eq_u)?;
                Some(analysis::lyapunov_v(&du, s.chi - self.eq_chi, e, params, &self.grid)?)
            }
            None => None,
        };
        let (lyap_w, eta_l2) = match obs {
            Some(o) => {
                let eta = s.u.checked_sub(&o.u_hat)?;
                (Some(analysis::lyapunov_w(&eta, &self.grid)), Some(l2_norm(&eta, &self.grid)))
            }
            None => (None, None),
        };
        Ok(Sample {
            t: s.t,
            y: boundary_output(s),
            chi: s.chi,
            v: control_input(s, params),
            k_hat,
            lyap_v,
            lyap_w,
            eta_l2,
        })
    }
}

/// Runs plant, compensator, estimator and (optionally) observer.
///
/// Returns `Err` only for configuration problems. Numerical trouble during
/// the run is reported through [`RunResult::alarm`] with the samples
/// recorded so far.
pub fn run_single(cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    let started = Instant::now();
    let params = cfg.params;
    let grid = cfg.grid()?;
    let loop_cfg: LoopConfig = cfg.loop_cfg;
    let stepper = ClosedLoop::new(&params, &grid, &loop_cfg)?;
    let discrete_equilibrium = AugmentedSystem::new(&params, &grid)?.fixed_point()?;

    let certificate = match cfg.epsilon {
        Some(e) => analysis::certificate_at(e, params.k_true, &params),
        None => analysis::find_epsilon_star(&params, params.k_true),
    };
    let recorder = Recorder {
        cfg,
        grid,
        eq_u: discrete_equilibrium.0.clone(),
        eq_chi: discrete_equilibrium.1,
        epsilon: (cfg.epsilon.is_some() || certificate.valid).then_some(certificate.epsilon),
    };

    let mut state = PlantState::new(cfg.u0.field(&params, &grid)?, cfg.chi0);
    let mut obs = if cfg.observer {
        Some(ObserverState::new(
            Field::polynomial(&grid, &cfg.observer_u0),
            estimate_k(cfg.chi0, &params)?,
        ))
    } else {
        None
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise.seed);
    let output_noise = Normal::new(0.0, cfg.noise.output_std)
        .map_err(|e| Error::validation("noise.output_std", e.to_string()))?;
    let injection_noise = Normal::new(0.0, cfg.noise.injection_std)
        .map_err(|e| Error::validation("noise.injection_std", e.to_string()))?;

    let mut series = TimeSeries::new(params.y_r, params.k_true);
    series.push(recorder.sample(&state, obs.as_ref())?)?;

    let theta = loop_cfg.scheme.theta();
    let total = loop_cfg.steps();
    let mut alarm = None;
    let mut steps = 0;
    for i in 1..=total {
        let nu = if cfg.noise.output_std > 0.0 {
            output_noise.sample(&mut rng)
        } else {
            0.0
        };
        let nu_obs = if cfg.noise.injection_std > 0.0 {
            injection_noise.sample(&mut rng)
        } else {
            0.0
        };
        let y0 = boundary_output(&state);
        let v0 = control_input(&state, &params) - params.gamma * nu;
        let k_hat = if cfg.estimator {
            match estimate_k(state.chi, &params) {
                Ok(k) => k,
                Err(e) => {
                    alarm = Some(e.to_string());
                    break;
                }
            }
        } else {
            0.0
        };

        stepper.advance_noisy(&mut state, nu);
        state.t = i as f64 * loop_cfg.dt;

        if let Some(o) = obs.as_mut() {
            let y1 = boundary_output(&state);
            let v1 = control_input(&state, &params) - params.gamma * nu;
            let y = theta * y1 + (1.0 - theta) * y0 + nu_obs;
            let v = theta * v1 + (1.0 - theta) * v0;
            o.k_hat = k_hat;
            match observer_step(o, y, v, &params, &loop_cfg) {
                Ok(next) => *o = next,
                Err(e) => {
                    alarm = Some(e.to_string());
                    break;
                }
            }
            o.t = state.t;
        }

        if !state.is_finite() || obs.as_ref().is_some_and(|o| !o.u_hat.is_finite()) {
            alarm = Some(format!("non-finite state at t = {}", state.t));
            break;
        }
        steps = i;
        if i % loop_cfg.record_every == 0 || i == total {
            match recorder.sample(&state, obs.as_ref()) {
                Ok(s) if s.is_finite() => series.push(s)?,
                Ok(_) => {
                    alarm = Some(format!("non-finite sample at t = {}", state.t));
                    break;
                }
                Err(e) => {
                    alarm = Some(e.to_string());
                    break;
                }
            }
        }
    }

    let mut fit_columns = vec![Column::TrackingError];
    if recorder.epsilon.is_some() {
        fit_columns.push(Column::LyapV);
    }
    if cfg.observer {
        fit_columns.push(Column::LyapW);
    }
    let fits = fit_columns
        .into_iter()
        .map(|c| {
            (
                c,
                analysis::decay_rate_fit(&series, c, FIT_WINDOW).map_err(|e| e.to_string()),
            )
        })
        .collect();

    let u_bar = equilibrium(params.k_true, &params, &grid)?.u_bar;
    Ok(RunResult {
        snapshot: Snapshot {
            x: grid.nodes(),
            u: state.u,
            u_hat: obs.map(|o| o.u_hat),
            u_bar,
        },
        series,
        certificate,
        discrete_equilibrium,
        fits,
        alarm,
        steps,
        wall_clock: started.elapsed(),
    })
}

/// Keys accepted by [`run_sweep`].
pub const SWEEP_AXES: &[&str] = &[
    "lambda",
    "k",
    "gamma",
    "rho",
    "y_r",
    "alpha",
    "grid.n",
    "loop.dt",
    "loop.t_end",
    "chi0",
    "analysis.theta",
    "noise.output_std",
    "noise.injection_std",
];

#[derive(Debug)]
pub struct SweepCell {
    pub value: f64,
    pub result: std::result::Result<RunResult, String>,
}

/// How independent runs are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Work-stealing over runs; sequential when built without `parallel`.
    #[default]
    Parallel,
}

pub(crate) fn map_runs<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Independent runs along one parameter axis, in the order of `values`.
/// A failing cell is recorded without aborting the sweep.
pub fn run_sweep(base: &RunConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepCell>> {
    run_sweep_with(base, axis, values, Execution::default())
}

pub fn run_sweep_with(
    base: &RunConfig,
    axis: &str,
    values: &[f64],
    exec: Execution,
) -> Result<Vec<SweepCell>> {
    if !SWEEP_AXES.contains(&axis) {
        return Err(Error::validation(
            "axis",
            format!("{axis:?} is not sweepable (one of {})", SWEEP_AXES.join(", ")),
        ));
    }
    Ok(map_runs(values, exec, |&value| {
        let mut cfg = base.clone();
        let result = cfg
            .set(axis, &value.to_string())
            .map_err(|m| format!("{axis}: {m}"))
            .and_then(|()| run_single(&cfg).map_err(|e| e.to_string()))
            .and_then(|r| match &r.alarm {
                Some(a) => Err(format!("numerical alarm: {a}")),
                None => Ok(r),
            });
        SweepCell { value, result }
    }))
}

/// One resolution of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log h`.
    pub order: f64,
    /// Orders from consecutive pairs.
    pub pairwise: Vec<f64>,
}

impl ConvergenceStudy {
    fn from_rows(rows: Vec<ConvergenceRow>) -> Self {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h.ln(), r.error.ln())).collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let pairwise = rows
            .windows(2)
            .map(|w| (w[0].error / w[1].error).ln() / (w[0].h / w[1].h).ln())
            .collect();
        ConvergenceStudy {
            rows,
            order: sxy / sxx,
            pairwise,
        }
    }
}

pub const STUDY_RESOLUTIONS: [usize; 4] = [26, 51, 101, 201];
pub const STUDY_REFERENCE: usize = 401;

/// Discrete closed-loop fixed point against the analytic equilibrium, in L².
pub fn equilibrium_convergence(cfg: &RunConfig, ns: &[usize]) -> Result<ConvergenceStudy> {
    let rows = ns
        .iter()
        .map(|&n| {
            let grid = Grid::new(n)?;
            let (u_h, _) = AugmentedSystem::new(&cfg.params, &grid)?.fixed_point()?;
            let exact = equilibrium(cfg.params.k_true, &cfg.params, &grid)?;
            let err = l2_norm(&u_h.checked_sub(&exact.u_bar)?, &grid);
            Ok(ConvergenceRow {
                n,
                h: grid.h(),
                error: err,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy::from_rows(rows))
}

/// Closed-loop trajectories at `dt = ratio · h²`, compared at `t_end`
/// with a run on `reference_n` nodes sampled at the coarse nodes.
///
/// Coarse grids must nest in the reference grid.
pub fn trajectory_convergence(
    cfg: &RunConfig,
    ns: &[usize],
    reference_n: usize,
    ratio: f64,
    t_end: f64,
    exec: Execution,
) -> Result<ConvergenceStudy> {
    for &n in ns {
        if !(reference_n - 1).is_multiple_of(n - 1) {
            return Err(Error::validation(
                "grid.n",
                format!("{n} nodes do not nest in the {reference_n}-node reference grid"),
            ));
        }
    }
    let final_u = |n: usize| -> Result<Field> {
        let grid = Grid::new(n)?;
        let h = grid.h();
        let dt = ratio * h * h;
        let loop_cfg = LoopConfig {
            dt,
            t_end,
            ..cfg.loop_cfg
        };
        let stepper = ClosedLoop::new(&cfg.params, &grid, &loop_cfg)?;
        let mut s = PlantState::new(cfg.u0.field(&cfg.params, &grid)?, cfg.chi0);
        let steps = (t_end / dt).round() as usize;
        for _ in 0..steps {
            stepper.advance(&mut s);
        }
        if !s.is_finite() {
            return Err(Error::Numerical(format!("non-finite state at n = {n}")));
        }
        Ok(s.u)
    };
    let mut all: Vec<usize> = ns.to_vec();
    all.push(reference_n);
    let finals = map_runs(&all, exec, |&n| final_u(n))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let reference = finals.last().unwrap();
    let rows = ns
        .iter()
        .zip(&finals)
        .map(|(&n, u)| {
            let grid = Grid::new(n)?;
            let stride = (reference_n - 1) / (n - 1);
            let sampled = Field::from_values((0..n).map(|i| reference[i * stride]).collect());
            Ok(ConvergenceRow {
                n,
                h: grid.h(),
                error: l2_norm(&u.checked_sub(&sampled)?, &grid),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy::from_rows(rows))
}
