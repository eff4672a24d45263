//! Closed-loop equilibrium, the steady-state map
//! `g_lambda(k) = sqrt(k/lambda) tanh(sqrt(k/lambda))` and its inversion,
//! which turns the compensator state into a reaction-coefficient estimate.
//!
//! At equilibrium the compensator settles at `chi_bar = g_lambda(k) y_r`.
//! `g_lambda` is zero at zero, strictly increasing and unbounded, so `k` is
//! recovered from `chi_bar / y_r` whenever `y_r != 0`.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::params::SystemParams;

/// Below this value of `sqrt(k/lambda)` the map is evaluated by its Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;
/// Absolute tolerance on `g_lambda(k) - v` for the inverse.
pub const INVERSE_TOL: f64 = 1e-12;
const INVERSE_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    pub u_bar: Field,
    pub chi_bar: f64,
}

/// `cosh(s x) / cosh(s)` without overflow for large `s`.
fn cosh_ratio(s: f64, x: f64) -> f64 {
    (s * (x - 1.0)).exp() * (1.0 + (-2.0 * s * x).exp()) / (1.0 + (-2.0 * s).exp())
}

/// Analytic equilibrium of the closed loop for reaction coefficient `k`.
pub fn equilibrium(k: f64, params: &SystemParams, grid: &Grid) -> Result<EquilibriumProfile> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::validation("k", format!("must be > 0 (got {k})")));
    }
    if !(params.lambda.is_finite() && params.lambda > 0.0) {
        return Err(Error::validation("lambda", "must be > 0"));
    }
    let s = (k / params.lambda).sqrt();
    let mut u_bar = Field::from_fn(grid, |x| cosh_ratio(s, x) * params.y_r);
    // pin the boundary value exactly
    *u_bar.last_mut().unwrap() = params.y_r;
    Ok(EquilibriumProfile {
        u_bar,
        chi_bar: g_lambda(k, params.lambda)? * params.y_r,
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::validation("lambda", format!("must be > 0 (got {lambda})")))
    }
}

fn g_unchecked(k: f64, lambda: f64) -> f64 {
    let q = k / lambda;
    let s = q.sqrt();
    if s < SERIES_CUTOFF {
        q * (1.0 - q / 3.0 + 2.0 * q * q / 15.0)
    } else {
        s * s.tanh()
    }
}

fn dg_unchecked(k: f64, lambda: f64) -> f64 {
    let q = k / lambda;
    let s = q.sqrt();
    if s < SERIES_CUTOFF {
        (1.0 - 2.0 * q / 3.0 + 0.4 * q * q) / lambda
    } else {
        let sech = 1.0 / s.cosh();
        (s.tanh() / s + sech * sech) / (2.0 * lambda)
    }
}

pub fn g_lambda(k: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(k >= 0.0) || k.is_infinite() {
        return Err(Error::validation("k", format!("must be >= 0 (got {k})")));
    }
    Ok(g_unchecked(k, lambda))
}

/// Derivative of [`g_lambda`] in `k`; tends to `1/lambda` at `k = 0`.
pub fn g_lambda_derivative(k: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(k >= 0.0) || k.is_infinite() {
        return Err(Error::validation("k", format!("must be >= 0 (got {k})")));
    }
    Ok(dg_unchecked(k, lambda))
}

/// The unique `k >= 0` with `g_lambda(k) = v`.
///
/// Doubling bracket followed by Newton steps that fall back to bisection
/// whenever the step leaves the bracket.
pub fn g_lambda_inverse(v: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(v >= 0.0) || v.is_infinite() {
        return Err(Error::validation("value", format!("must be finite and >= 0 (got {v})")));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = lambda * (1.0f64).max(v + 1.0).powi(2);
    while g_unchecked(hi, lambda) < v {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical(format!("no bracket for g^-1({v})")));
        }
    }
    // small v: g ≈ k/lambda, large v: g ≈ sqrt(k/lambda)
    let guess = if v < 1.0 { lambda * v } else { lambda * v * v };
    let mut x = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..INVERSE_MAX_ITER {
        let f = g_unchecked(x, lambda) - v;
        if f.abs() <= INVERSE_TOL {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(0.5 * (lo + hi));
        }
        let d = dg_unchecked(x, lambda);
        let newton = x - f / d;
        x = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::Numerical(format!(
        "g^-1({v}) did not converge in {INVERSE_MAX_ITER} iterations"
    )))
}

/// Reaction-coefficient estimate `g_lambda^-1(max(0, chi / y_r))`.
pub fn estimate_k(chi: f64, params: &SystemParams) -> Result<f64> {
    if params.y_r == 0.0 {
        return Err(Error::validation(
            "y_r",
            "estimator needs a nonzero output reference",
        ));
    }
    g_lambda_inverse((chi / params.y_r).max(0.0), params.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // sqrt(2/3) tanh(sqrt(2/3)) and 1/cosh(sqrt(2/3)), evaluated with mpmath at 30 digits
    const CHI_BAR_REF: f64 = 0.549_631_629_138_480_9;
    const U0_REF: f64 = 0.739_498_213_909_857_3;

    fn reference() -> SystemParams {
        SystemParams::reference()
    }

    #[test]
    fn g_anchor_and_reference_value() {
        assert_eq!(g_lambda(0.0, 3.0).unwrap(), 0.0);
        assert!((g_lambda(2.0, 3.0).unwrap() - CHI_BAR_REF).abs() < 1e-15);
        assert!(g_lambda(-1.0, 3.0).is_err());
        assert!(g_lambda(1.0, 0.0).is_err());
    }

    #[test]
    fn g_large_k_asymptote() {
        let lambda = 3.0;
        let k = 1e6 * lambda;
        let r = g_lambda(k, lambda).unwrap() / (k / lambda).sqrt();
        assert!((r - 1.0).abs() < 1e-6);
    }

    #[test]
    fn series_branch_is_continuous() {
        for lambda in [0.5, 3.0] {
            let k = SERIES_CUTOFF * SERIES_CUTOFF * lambda;
            let below = g_lambda(k * (1.0 - 1e-9), lambda).unwrap();
            let above = g_lambda(k * (1.0 + 1e-9), lambda).unwrap();
            assert!(((above - below) / above).abs() < 1e-8);
            let d_below = g_lambda_derivative(k * (1.0 - 1e-9), lambda).unwrap();
            let d_above = g_lambda_derivative(k * (1.0 + 1e-9), lambda).unwrap();
            assert!(((d_above - d_below) / d_above).abs() < 1e-8);
        }
        assert!((g_lambda_derivative(0.0, 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_positive_on_log_grid() {
        for lambda in [0.5, 3.0] {
            for i in 0..=120 {
                let k = 10f64.powf(-6.0 + 12.0 * i as f64 / 120.0);
                let h = 1e-6 * k;
                let fd = (g_lambda(k + h, lambda).unwrap() - g_lambda(k - h, lambda).unwrap()) / (2.0 * h);
                assert!(fd > 0.0, "k = {k}");
                let an = g_lambda_derivative(k, lambda).unwrap();
                assert!(((fd - an) / an).abs() < 1e-5, "k = {k}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        for lambda in [0.5, 3.0] {
            for k in [1e-6, 0.1, 1.0, 2.0, 10.0, 1e4] {
                let back = g_lambda_inverse(g_lambda(k, lambda).unwrap(), lambda).unwrap();
                assert!((back - k).abs() <= 1e-8 * k.max(1.0), "k = {k}, lambda = {lambda}: {back}");
            }
        }
        assert_eq!(g_lambda_inverse(0.0, 3.0).unwrap(), 0.0);
        assert!((g_lambda_inverse(CHI_BAR_REF, 3.0).unwrap() - 2.0).abs() < 1e-6);
        assert!(g_lambda_inverse(-0.1, 3.0).is_err());
        assert!(g_lambda_inverse(f64::NAN, 3.0).is_err());
    }

    #[test]
    fn inverse_handles_huge_values() {
        let v = 1e7;
        let k = g_lambda_inverse(v, 0.5).unwrap();
        assert!((g_lambda(k, 0.5).unwrap() - v).abs() / v < 1e-14);
    }

    #[test]
    fn estimator_clamps_and_inverts() {
        let p = reference();
        assert_eq!(estimate_k(-0.3, &p).unwrap(), 0.0);
        assert_eq!(estimate_k(0.0, &p).unwrap(), 0.0);
        assert!((estimate_k(CHI_BAR_REF, &p).unwrap() - 2.0).abs() < 1e-6);
        let neg = SystemParams { y_r: -2.0, ..p };
        assert!((estimate_k(-2.0 * CHI_BAR_REF, &neg).unwrap() - 2.0).abs() < 1e-6);
        assert_eq!(estimate_k(0.3, &neg).unwrap(), 0.0);
        let zero = SystemParams { y_r: 0.0, ..p };
        assert!(matches!(estimate_k(0.5, &zero), Err(Error::Validation { .. })));
    }

    #[test]
    fn equilibrium_reference_values() {
        let g = Grid::new(101).unwrap();
        let eq = equilibrium(2.0, &reference(), &g).unwrap();
        assert!((eq.chi_bar - CHI_BAR_REF).abs() < 1e-14);
        assert!((eq.u_bar[0] - U0_REF).abs() < 1e-14);
        assert_eq!(eq.u_bar.right(), 1.0);
        assert!(equilibrium(0.0, &reference(), &g).is_err());
        assert!(equilibrium(-1.0, &reference(), &g).is_err());
        let bad = SystemParams { lambda: -1.0, ..reference() };
        assert!(equilibrium(1.0, &bad, &g).is_err());
    }

    #[test]
    fn equilibrium_small_k_limit() {
        let g = Grid::new(11).unwrap();
        let p = SystemParams { y_r: 0.8, ..reference() };
        let eq = equilibrium(1e-14, &p, &g).unwrap();
        assert!(eq.u_bar.iter().all(|v| (v - 0.8).abs() < 1e-12));
        assert!(eq.chi_bar.abs() < 1e-14);
    }

    #[test]
    fn equilibrium_large_k_is_finite() {
        let g = Grid::new(11).unwrap();
        let eq = equilibrium(1e8, &reference(), &g).unwrap();
        assert!(eq.u_bar.is_finite());
        assert!(eq.u_bar[0] >= 0.0 && eq.u_bar[0] < 1e-100);
    }

    #[test]
    fn equilibrium_solves_the_boundary_value_problem() {
        // λ D²ū - k ū with ghost-node rows is O(h²) in discrete L²
        let p = reference();
        let mut prev = f64::NAN;
        for n in [51, 101, 201] {
            let g = Grid::new(n).unwrap();
            let eq = equilibrium(2.0, &p, &g).unwrap();
            let a = crate::plant::assemble_operator(&p, &g).unwrap();
            let r = a.apply(&eq.u_bar, eq.chi_bar);
            let res = crate::grid::l2_norm(&Field::from_values(r), &g);
            if prev.is_finite() {
                // boundary rows carry the O(h) term of the ghost elimination,
                // which the trapezoid weight h/2 turns into O(h^1.5) in L²
                assert!(res < prev / 2.0, "{res} vs {prev}");
            }
            prev = res;
        }
    }

    #[test]
    fn equilibrium_slope_at_left_end_vanishes() {
        let p = reference();
        let slopes: Vec<f64> = [51, 101, 201]
            .iter()
            .map(|&n| {
                let g = Grid::new(n).unwrap();
                let eq = equilibrium(2.0, &p, &g).unwrap();
                ((eq.u_bar[1] - eq.u_bar[0]) / g.h()).abs()
            })
            .collect();
        assert!(slopes[2] < slopes[1] && slopes[1] < slopes[0]);
        assert!(slopes[2] < 1e-2);
    }

    #[test]
    fn chi_bar_scales_with_reference() {
        let g = Grid::new(21).unwrap();
        let base = equilibrium(2.0, &reference(), &g).unwrap();
        for y_r in [-3.0, 0.25, 4.0] {
            let p = SystemParams { y_r, ..reference() };
            let eq = equilibrium(2.0, &p, &g).unwrap();
            assert!((eq.chi_bar - y_r * base.chi_bar).abs() < 1e-14);
            assert!((estimate_k(eq.chi_bar, &p).unwrap() - 2.0).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn g_is_strictly_increasing(a in 0.0f64..1e4, b in 0.0f64..1e4, lambda in 0.01f64..100.0) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!((hi - lo) > 1e-9 * hi.max(1.0));
            prop_assert!(g_lambda(lo, lambda).unwrap() < g_lambda(hi, lambda).unwrap());
        }

        #[test]
        fn inverse_hits_the_value(v in 0.0f64..50.0, lambda in 0.05f64..20.0) {
            let k = g_lambda_inverse(v, lambda).unwrap();
            prop_assert!(k >= 0.0);
            prop_assert!((g_lambda(k, lambda).unwrap() - v).abs() <= INVERSE_TOL.max(4.0 * f64::EPSILON * v));
        }
    }
}
