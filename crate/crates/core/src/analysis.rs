//! Lyapunov diagnostics for the closed loop and the observer cascade.
//!
//! `V(ũ, χ̃) = ∫ [ũ; χ̃]ᵀ Q [ũ; χ̃] dx` with `Q = [[1, -ε], [-ε, λ/ρ]]`
//! certifies exponential convergence of the regulation error, `W(η) = ½‖η‖²`
//! measures the observer error and `U = V + θ W` is the composite used for
//! the cascade. The certificate matrix `Ψ(ε)` bounds `dV/dt` by a quadratic
//! form in `(ũ, χ̃, ũ(1))`.
//!
//! Differentiating `V` along the closed loop puts a factor 2 on every
//! `ε`-weighted cross term, so the bound that actually holds for `V` built
//! with weight `ε` is `Ψ(2ε)`; see [`dissipation_matrix`]. A certificate is
//! only reported valid when both matrices are negative definite.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::linalg::{symmetric_eigenvalues2, symmetric_eigenvalues3};
use crate::params::SystemParams;
use crate::series::{Column, TimeSeries};

/// Default weight of `W` inside `U`.
pub const DEFAULT_THETA: f64 = 0.1;

/// Points of the logarithmic search grid for `ε`.
const SEARCH_POINTS: usize = 400;
/// Lower end of the search grid relative to `sqrt(λ/ρ)`.
const SEARCH_FLOOR: f64 = 1e-6;
/// Chosen `ε` stays this far (relatively) inside the validity region.
const EDGE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub epsilon: f64,
    /// Largest eigenvalue of `Ψ(ε)`.
    pub psi_max_eig: f64,
    /// Largest eigenvalue of `Ψ(2ε)`, the bound that holds for `dV/dt`.
    pub dissipation_max_eig: f64,
    pub q_min_eig: f64,
    /// Upper end of `{ε : Ψ(ε) ≺ 0}` found by bisection.
    pub epsilon_star: f64,
    pub valid: bool,
}

/// `(min, max)` eigenvalues of `Q(ε)`.
pub fn q_eigenvalues(epsilon: f64, params: &SystemParams) -> (f64, f64) {
    symmetric_eigenvalues2(1.0, -epsilon, params.lambda / params.rho)
}

fn check_epsilon(epsilon: f64, params: &SystemParams) -> Result<()> {
    let bound = params.epsilon_bound();
    if epsilon > 0.0 && epsilon < bound {
        Ok(())
    } else {
        Err(Error::validation(
            "epsilon",
            format!("must lie in (0, sqrt(lambda/rho)) = (0, {bound}) (got {epsilon})"),
        ))
    }
}

/// Quadratic Lyapunov functional of the regulation error.
pub fn lyapunov_v(
    u_tilde: &Field,
    chi_tilde: f64,
    epsilon: f64,
    params: &SystemParams,
    grid: &Grid,
) -> Result<f64> {
    check_epsilon(epsilon, params)?;
    let uu = grid.inner(u_tilde, u_tilde);
    let mean = grid.integrate(u_tilde);
    let v = uu - 2.0 * epsilon * chi_tilde * mean + params.lambda / params.rho * chi_tilde * chi_tilde;
    Ok(v.max(0.0))
}

/// `Ψ(ε)` for reaction coefficient `k`.
pub fn certificate_matrix(epsilon: f64, k: f64, params: &SystemParams) -> Matrix3<f64> {
    let SystemParams {
        lambda, gamma, rho, ..
    } = *params;
    let a = 0.5 * epsilon * k;
    let b = 0.5 * epsilon * rho;
    let c = 0.5 * lambda * epsilon * gamma;
    Matrix3::new(
        -2.0 * k, a, b, //
        a, -lambda * epsilon, c, //
        b, c, -2.0 * gamma * lambda,
    )
}

/// Matrix bounding `dV/dt` for `V` built with weight `ε`: `Ψ(2ε)`.
pub fn dissipation_matrix(epsilon: f64, k: f64, params: &SystemParams) -> Matrix3<f64> {
    certificate_matrix(2.0 * epsilon, k, params)
}

pub fn max_eigenvalue(m: &Matrix3<f64>) -> f64 {
    symmetric_eigenvalues3(m)[2]
}

/// `∫ [ũ, χ̃, ũ(1)] M [ũ, χ̃, ũ(1)]ᵀ dx`.
pub fn quadratic_bound(u_tilde: &Field, chi_tilde: f64, m: &Matrix3<f64>, grid: &Grid) -> f64 {
    let uu = grid.inner(u_tilde, u_tilde);
    let mean = grid.integrate(u_tilde);
    let u1 = u_tilde.right();
    m[(0, 0)] * uu
        + 2.0 * m[(0, 1)] * chi_tilde * mean
        + 2.0 * m[(0, 2)] * u1 * mean
        + m[(1, 1)] * chi_tilde * chi_tilde
        + 2.0 * m[(1, 2)] * chi_tilde * u1
        + m[(2, 2)] * u1 * u1
}

/// Certificate values at a given `ε`.
pub fn certificate_at(epsilon: f64, k: f64, params: &SystemParams) -> Certificate {
    let psi = max_eigenvalue(&certificate_matrix(epsilon, k, params));
    let diss = max_eigenvalue(&dissipation_matrix(epsilon, k, params));
    let (q_min, _) = q_eigenvalues(epsilon, params);
    let inside = epsilon > 0.0 && epsilon < params.epsilon_bound();
    Certificate {
        epsilon,
        psi_max_eig: psi,
        dissipation_max_eig: diss,
        q_min_eig: q_min,
        epsilon_star: f64::NAN,
        valid: inside && psi < 0.0 && diss < 0.0 && q_min > 0.0,
    }
}

/// Searches `ε ∈ (0, sqrt(λ/ρ))` for the certificate with the most negative
/// `λ_max(Ψ(ε))`.
///
/// `λ_max(Ψ(ε))` is convex in `ε` (`Ψ` is affine), so the valid set is an
/// interval starting at 0 and the objective has a single minimum on it. A
/// logarithmic grid locates it, bisection finds the edge of validity and a
/// golden-section pass refines the minimizer.
pub fn find_epsilon_star(params: &SystemParams, k: f64) -> Certificate {
    let bound = params.epsilon_bound();
    let psi = |e: f64| max_eigenvalue(&certificate_matrix(e, k, params));
    let valid = |e: f64| certificate_at(e, k, params).valid;

    let grid: Vec<f64> = (0..SEARCH_POINTS)
        .map(|i| {
            let s = i as f64 / (SEARCH_POINTS - 1) as f64;
            bound * SEARCH_FLOOR.powf(1.0 - s) * (1.0 - EDGE_MARGIN).powf(s)
        })
        .collect();

    let best = grid
        .iter()
        .enumerate()
        .filter(|(_, &e)| valid(e))
        .min_by(|a, b| psi(*a.1).total_cmp(&psi(*b.1)));

    let epsilon_star = psi_edge(&psi, grid[0], 2.0 * bound.max(1.0));
    let Some((idx, _)) = best else {
        let mut c = certificate_at(grid[0], k, params);
        c.epsilon_star = epsilon_star;
        c.valid = false;
        return c;
    };

    // largest valid ε, slightly inside the edge
    let last_valid = grid.iter().rposition(|&e| valid(e)).unwrap();
    let upper = if last_valid + 1 < grid.len() {
        let edge = bisect_edge(&valid, grid[last_valid], grid[last_valid + 1]);
        edge * (1.0 - EDGE_MARGIN)
    } else {
        grid[last_valid]
    };

    let lo = if idx > 0 { grid[idx - 1] } else { grid[0] };
    let hi = if idx + 1 < grid.len() { grid[idx + 1].min(upper) } else { upper };
    let hi = hi.max(grid[idx].min(upper));
    let refined = golden_section(&psi, lo, hi);
    let candidates = [refined, grid[idx], upper];
    let epsilon = candidates
        .into_iter()
        .filter(|&e| e <= upper && valid(e))
        .min_by(|a, b| psi(*a).total_cmp(&psi(*b)))
        .unwrap_or(grid[idx]);

    let mut c = certificate_at(epsilon, k, params);
    c.epsilon_star = epsilon_star;
    c
}

/// Edge of `{ε : λ_max(Ψ(ε)) < 0}` above `lo`, capped at `cap`.
fn psi_edge(psi: &impl Fn(f64) -> f64, lo: f64, cap: f64) -> f64 {
    if psi(lo) >= 0.0 {
        return lo;
    }
    let mut hi = lo;
    while psi(hi) < 0.0 {
        hi *= 2.0;
        if hi > cap * 1e6 {
            return f64::INFINITY;
        }
    }
    bisect_edge(&|e| psi(e) < 0.0, hi / 2.0, hi)
}

/// Bisection for the switch from `pred = true` at `lo` to `false` at `hi`.
fn bisect_edge(pred: &impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// `½ ∫ η² dx`.
pub fn lyapunov_w(eta: &Field, grid: &Grid) -> f64 {
    0.5 * grid.inner(eta, eta)
}

/// `V + θ W`; `θ = 0` is accepted as the degenerate case.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov_u(
    u_tilde: &Field,
    chi_tilde: f64,
    eta: &Field,
    epsilon: f64,
    theta: f64,
    params: &SystemParams,
    grid: &Grid,
) -> Result<f64> {
    if !(theta >= 0.0) || theta.is_infinite() {
        return Err(Error::validation("theta", format!("must be >= 0 (got {theta})")));
    }
    Ok(lyapunov_v(u_tilde, chi_tilde, epsilon, params, grid)? + theta * lyapunov_w(eta, grid))
}

/// Least-squares fit of `log(value) = log C - σ t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub c: f64,
    pub sigma: f64,
    pub r2: f64,
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Fits an exponential to the trailing `window` fraction (by time) of a column.
pub fn decay_rate_fit(series: &TimeSeries, column: Column, window: f64) -> Result<DecayFit> {
    let values = series
        .column(column)
        .ok_or_else(|| Error::validation("column", format!("{column:?} not recorded")))?;
    fit_exponential(&series.times(), &values, window)
}

pub fn fit_exponential(t: &[f64], values: &[f64], window: f64) -> Result<DecayFit> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::validation("window", format!("must be in (0, 1] (got {window})")));
    }
    assert_eq!(t.len(), values.len());
    let (Some(&t0), Some(&t1)) = (t.first(), t.last()) else {
        return Err(Error::validation("series", "empty"));
    };
    let start = t1 - window * (t1 - t0);
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= start)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::validation(
            "window",
            format!("needs at least {MIN_FIT_SAMPLES} samples (got {})", pts.len()),
        ));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::validation(
            "series",
            format!("nonpositive value {v} at t = {t} inside the fit window"),
        ));
    }
    let m = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_l = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (mut stt, mut stl, mut sll) = (0.0, 0.0, 0.0);
    for &(t, v) in &pts {
        let dt = t - mean_t;
        let dl = v.ln() - mean_l;
        stt += dt * dt;
        stl += dt * dl;
        sll += dl * dl;
    }
    let slope = if stt > 0.0 { stl / stt } else { 0.0 };
    let intercept = mean_l - slope * mean_t;
    let sse: f64 = pts
        .iter()
        .map(|&(t, v)| {
            let r = v.ln() - (intercept + slope * t);
            r * r
        })
        .sum();
    // a flat log-series is fitted exactly by σ = 0
    let r2 = if sll > 1e-20 * m { 1.0 - sse / sll } else { 1.0 };
    Ok(DecayFit {
        c: intercept.exp(),
        sigma: -slope,
        r2,
        samples: pts.len(),
    })
}

/// Largest real part of the closed-loop spectrum.
pub fn spectral_abscissa(params: &SystemParams, grid: &Grid) -> Result<f64> {
    let a = crate::control::augmented_matrix(params, grid)?;
    Ok(crate::linalg::max_real_eigenvalue(&a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Sample;
    use proptest::prelude::*;

    fn reference() -> SystemParams {
        SystemParams::reference()
    }

    /// Independent oracle: largest root of det(M - xI) by bisection from a
    /// Gershgorin upper bound.
    fn largest_root(m: &Matrix3<f64>) -> f64 {
        let det = |x: f64| (m - Matrix3::identity() * x).determinant();
        let radius = (0..3)
            .map(|i| m[(i, i)] + (0..3).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut hi = radius + 1.0;
        // det(M - xI) -> -∞ as x -> +∞ for 3×3; walk down until the sign flips
        let mut lo = hi;
        let step = 1e-3;
        while det(lo) < 0.0 {
            lo -= step;
        }
        hi = lo + step;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if det(mid) < 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn psi_small_and_large_epsilon() {
        let p = reference();
        let small = max_eigenvalue(&certificate_matrix(0.05, 2.0, &p));
        assert!(small < 0.0);
        assert!((small - largest_root(&certificate_matrix(0.05, 2.0, &p))).abs() < 1e-10);
        let large = max_eigenvalue(&certificate_matrix(10.0, 2.0, &p));
        assert!(large > 0.0);
        assert!((large - largest_root(&certificate_matrix(10.0, 2.0, &p))).abs() < 1e-10);
        let zero = certificate_matrix(0.0, 2.0, &p);
        assert_eq!(zero, Matrix3::from_diagonal(&nalgebra::Vector3::new(-4.0, 0.0, -12.0)));
        assert!(max_eigenvalue(&certificate_matrix(1e-9, 2.0, &p)) < 0.0);
        assert!(max_eigenvalue(&certificate_matrix(1e-9, 2.0, &p)) > -1e-8);
    }

    #[test]
    fn psi_is_symmetric() {
        let m = certificate_matrix(0.3, 2.0, &reference());
        assert_eq!(m, m.transpose());
        assert_eq!(m[(0, 1)], 0.3);
        assert_eq!(m[(0, 2)], 0.3 * 4.5 / 2.0);
        assert_eq!(m[(1, 2)], 3.0 * 0.3 * 2.0 / 2.0);
    }

    #[test]
    fn reference_certificate_is_valid() {
        let p = reference();
        let c = find_epsilon_star(&p, 2.0);
        assert!(c.valid, "{c:?}");
        assert!(c.epsilon > 0.0 && c.epsilon < (2.0f64 / 3.0).sqrt());
        assert!(c.psi_max_eig < 0.0 && c.dissipation_max_eig < 0.0 && c.q_min_eig > 0.0);
        assert!(c.epsilon_star > c.epsilon);
        // no grid point does better than the returned ε
        for i in 1..2000 {
            let e = (2.0f64 / 3.0).sqrt() * i as f64 / 2000.0;
            let other = certificate_at(e, 2.0, &p);
            if other.valid {
                assert!(other.psi_max_eig >= c.psi_max_eig - 1e-9, "ε = {e}");
            }
        }
    }

    #[test]
    fn certificate_survives_joint_scaling() {
        let p = reference();
        let c = find_epsilon_star(&p, 2.0);
        let scaled = SystemParams {
            lambda: 2.0 * p.lambda,
            gamma: 2.0 * p.gamma,
            rho: 2.0 * p.rho,
            ..p
        };
        let s = find_epsilon_star(&scaled, 4.0);
        assert!(s.valid);
        assert!(c.valid);
        assert_eq!(scaled.epsilon_bound(), p.epsilon_bound());
    }

    #[test]
    fn certificate_margin_vanishes_with_gain() {
        let margins: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&gamma| {
                let p = SystemParams { gamma, ..reference() };
                let c = find_epsilon_star(&p, 2.0);
                assert!(c.valid);
                c.psi_max_eig
            })
            .collect();
        for w in margins.windows(2) {
            assert!(w[1] > w[0] && w[1] < 0.0);
        }
        assert!(margins[3] > -1e-3);
    }

    #[test]
    fn v_reference_values() {
        let g = Grid::new(101).unwrap();
        let p = reference();
        let zero = Field::zeros(&g);
        let one = Field::constant(&g, 1.0);
        assert_eq!(lyapunov_v(&zero, 0.0, 0.3, &p, &g).unwrap(), 0.0);
        assert!((lyapunov_v(&one, 0.0, 0.3, &p, &g).unwrap() - 1.0).abs() < 1e-14);
        assert!((lyapunov_v(&zero, 1.0, 0.3, &p, &g).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(lyapunov_v(&one, 0.0, 0.0, &p, &g).is_err());
        assert!(lyapunov_v(&one, 0.0, p.epsilon_bound(), &p, &g).is_err());
    }

    #[test]
    fn q_boundary_behaviour() {
        let p = reference();
        let b = p.epsilon_bound();
        for i in 1..100 {
            let e = b * i as f64 / 100.0;
            assert!(q_eigenvalues(e, &p).0 > 0.0);
        }
        assert!(q_eigenvalues(b, &p).0.abs() < 1e-15);
    }

    #[test]
    fn w_and_u_values() {
        let g = Grid::new(401).unwrap();
        let p = reference();
        let zero = Field::zeros(&g);
        assert_eq!(lyapunov_w(&zero, &g), 0.0);
        assert!((lyapunov_w(&Field::constant(&g, 1.0), &g) - 0.5).abs() < 1e-14);
        let eta = Field::polynomial(&g, &[0.0, 0.0, 1.75]);
        assert!((lyapunov_w(&eta, &g) - 49.0 / 160.0).abs() < 1e-5);
        assert_eq!(lyapunov_u(&zero, 0.0, &zero, 0.3, 0.1, &p, &g).unwrap(), 0.0);
        let u = Field::from_fn(&g, |x| x.sin());
        let v = lyapunov_v(&u, 0.2, 0.3, &p, &g).unwrap();
        assert_eq!(lyapunov_u(&u, 0.2, &eta, 0.3, 0.0, &p, &g).unwrap(), v);
        assert!(lyapunov_u(&u, 0.2, &eta, 0.3, -1.0, &p, &g).is_err());
    }

    fn synthetic(f: impl Fn(f64) -> f64) -> TimeSeries {
        let mut ts = TimeSeries::new(0.0, 2.0);
        for i in 0..=200 {
            let t = i as f64 * 0.05;
            ts.push(Sample {
                t,
                y: f(t),
                chi: 0.0,
                v: 0.0,
                k_hat: None,
                lyap_v: Some(f(t)),
                lyap_w: None,
                eta_l2: None,
            })
            .unwrap();
        }
        ts
    }

    #[test]
    fn fit_recovers_exponential() {
        let ts = synthetic(|t| 0.7 * (-3.0 * t).exp());
        let fit = decay_rate_fit(&ts, Column::LyapV, 0.5).unwrap();
        assert!((fit.sigma - 3.0).abs() < 1e-6);
        assert!((fit.c - 0.7).abs() < 1e-6);
        assert!(fit.r2 > 1.0 - 1e-12);
        let tracking = decay_rate_fit(&ts, Column::TrackingError, 0.5).unwrap();
        assert!((tracking.sigma - 3.0).abs() < 1e-6);
    }

    #[test]
    fn fit_of_constant_is_flat() {
        let ts = synthetic(|_| 0.25);
        let fit = decay_rate_fit(&ts, Column::LyapV, 0.5).unwrap();
        assert!(fit.sigma.abs() < 1e-12);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn fit_rejects_bad_windows() {
        let ts = synthetic(|t| 1.0 - t / 5.0);
        assert!(decay_rate_fit(&ts, Column::LyapV, 0.9).is_err());
        assert!(decay_rate_fit(&ts, Column::LyapV, 0.01).is_err());
        assert!(decay_rate_fit(&ts, Column::LyapW, 0.5).is_err());
        assert!(decay_rate_fit(&ts, Column::LyapV, 0.0).is_err());
    }

    /// Slowest real closed-loop mode of the continuum problem: the real root
    /// of `s (μ tanh μ + γ) + ρ = 0` with `μ = sqrt((s + k) / λ)`.
    fn continuum_real_mode(p: &SystemParams) -> f64 {
        let f = |s: f64| {
            let q = (s + p.k_true) / p.lambda;
            let m = if q >= 0.0 {
                q.sqrt() * q.sqrt().tanh()
            } else {
                -(-q).sqrt() * (-q).sqrt().tan()
            };
            s * (m + p.gamma) + p.rho
        };
        // f(0) = ρ > 0; walk left to the first sign change
        let mut hi = 0.0;
        while f(hi - 1e-3) > 0.0 {
            hi -= 1e-3;
        }
        let mut lo = hi - 1e-3;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn spectral_abscissa_matches_continuum_mode() {
        // for larger k the slowest mode is the real integrator mode, which
        // creeps towards the imaginary axis as k grows
        let g = Grid::new(201).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in [2.0, 4.0, 8.0] {
            let p = SystemParams { k_true: k, ..reference() };
            let s = spectral_abscissa(&p, &g).unwrap();
            let oracle = continuum_real_mode(&p);
            assert!((s - oracle).abs() < 1e-4, "k = {k}: {s} vs {oracle}");
            assert!(s < 0.0 && s > prev);
            prev = s;
        }
    }

    proptest! {
        #[test]
        fn sandwich_bounds(
            vals in prop::collection::vec(-2.0f64..2.0, 21),
            chi in -3.0f64..3.0,
            frac in 0.01f64..0.99,
        ) {
            let g = Grid::new(21).unwrap();
            let p = reference();
            let e = frac * p.epsilon_bound();
            let u = Field::from_values(vals);
            let v = lyapunov_v(&u, chi, e, &p, &g).unwrap();
            let (lo, hi) = q_eigenvalues(e, &p);
            let z2 = g.inner(&u, &u) + chi * chi;
            prop_assert!(v >= lo * z2 - 1e-12);
            prop_assert!(v <= hi * z2 + 1e-12);
        }

        #[test]
        fn quadratic_bound_matches_matrix_form(
            vals in prop::collection::vec(-2.0f64..2.0, 11),
            chi in -3.0f64..3.0,
        ) {
            // with a constant field the integrand is the same at every node
            let g = Grid::new(11).unwrap();
            let m = certificate_matrix(0.4, 2.0, &reference());
            let c = vals[0];
            let u = Field::constant(&g, c);
            let z = nalgebra::Vector3::new(c, chi, c);
            let direct = (z.transpose() * m * z)[0];
            prop_assert!((quadratic_bound(&u, chi, &m, &g) - direct).abs() < 1e-10 * (1.0 + direct.abs()));
        }
    }
}
