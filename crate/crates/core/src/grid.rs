//! Uniform mesh on `[0, 1]`, nodal fields and trapezoid-rule L² machinery.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    /// Uniform grid with `n` nodes including both end points.
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::validation(
                "grid.n",
                format!("need at least 3 nodes for the boundary stencil (got {n})"),
            ));
        }
        Ok(Grid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    /// Node `i` as `i / (n - 1)`, so the end points are exactly 0 and 1.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / (self.n - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weights; they sum to one.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.h();
        if i == 0 || i == self.n - 1 {
            0.5 * h
        } else {
            h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.weight(i)).collect()
    }

    /// Trapezoid approximation of `∫₀¹ f dx`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.n, "field does not match grid");
        let inner: f64 = f[1..self.n - 1].iter().sum();
        self.h() * (inner + 0.5 * (f[0] + f[self.n - 1]))
    }

    /// Trapezoid approximation of `∫₀¹ f g dx`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        assert_eq!(f.len(), self.n, "field does not match grid");
        assert_eq!(g.len(), self.n, "field does not match grid");
        let last = self.n - 1;
        let inner: f64 = (1..last).map(|i| f[i] * g[i]).sum();
        self.h() * (inner + 0.5 * (f[0] * g[0] + f[last] * g[last]))
    }
}

/// Nodal values of a scalar field on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Field(vec![0.0; grid.n()])
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Field(vec![c; grid.n()])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Field((0..grid.n()).map(|i| f(grid.node(i))).collect())
    }

    /// Polynomial with coefficients ordered from the constant term upwards.
    pub fn polynomial(grid: &Grid, coeffs: &[f64]) -> Self {
        Field::from_fn(grid, |x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c))
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Field(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    /// Value at `x = 1`.
    pub fn right(&self) -> f64 {
        *self.0.last().expect("field is never empty")
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn checked_sub(&self, other: &Field) -> Result<Field> {
        if self.len() != other.len() {
            return Err(Error::validation(
                "field",
                format!("length mismatch ({} vs {})", self.len(), other.len()),
            ));
        }
        Ok(Field(self.iter().zip(other.iter()).map(|(a, b)| a - b).collect()))
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// `sqrt(∫₀¹ f² dx)` by the trapezoid rule.
pub fn l2_norm(f: &Field, grid: &Grid) -> f64 {
    grid.inner(f, f).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grid() {
        assert!(Grid::new(2).is_err());
        assert!(Grid::new(0).is_err());
        assert!(Grid::new(3).is_ok());
    }

    #[test]
    fn end_nodes_are_exact() {
        for n in [3, 7, 26, 101, 401, 1000] {
            let g = Grid::new(n).unwrap();
            let x = g.nodes();
            assert_eq!(x[0], 0.0);
            assert_eq!(x[n - 1], 1.0);
            let wsum: f64 = g.weights().iter().sum();
            assert!((wsum - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = Grid::new(101).unwrap();
        assert_eq!(l2_norm(&Field::zeros(&g), &g), 0.0);
        assert!((l2_norm(&Field::constant(&g, 1.0), &g) - 1.0).abs() < 1e-14);
        let x = Field::from_fn(&g, |x| x);
        assert!((l2_norm(&x, &g) - (1.0f64 / 3.0).sqrt()).abs() < 1e-4);
        // 7x²/4 has squared norm 49/80.
        let u0 = Field::polynomial(&g, &[0.0, 0.0, 1.75]);
        assert!((l2_norm(&u0, &g) - 1.75 / 5f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn polynomial_is_low_to_high() {
        let g = Grid::new(5).unwrap();
        let p = Field::polynomial(&g, &[1.0, 2.0, 3.0]);
        for (i, x) in g.nodes().into_iter().enumerate() {
            assert!((p[i] - (1.0 + 2.0 * x + 3.0 * x * x)).abs() < 1e-15);
        }
        assert_eq!(p.right(), 6.0);
    }

    #[test]
    fn sub_checks_length() {
        let a = Field::zeros(&Grid::new(4).unwrap());
        let b = Field::zeros(&Grid::new(5).unwrap());
        assert!(a.checked_sub(&b).is_err());
    }
}
