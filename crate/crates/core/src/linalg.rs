//! Tridiagonal storage and direct solve, plus the dense eigenvalue
//! helpers used by the spectral diagnostics.

use nalgebra::{DMatrix, Matrix3};

use crate::error::{Error, Result};

/// Square tridiagonal matrix. `lower[i]` is entry `(i+1, i)` and
/// `upper[i]` is entry `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal {
            lower: vec![0.0; n - 1],
            diag: vec![0.0; n],
            upper: vec![0.0; n - 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// `I + scale * self`.
    pub fn shifted_identity(&self, scale: f64) -> Tridiagonal {
        Tridiagonal {
            lower: self.lower.iter().map(|v| scale * v).collect(),
            diag: self.diag.iter().map(|v| 1.0 + scale * v).collect(),
            upper: self.upper.iter().map(|v| scale * v).collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i == j + 1 {
                self.lower[j]
            } else if j == i + 1 {
                self.upper[i]
            } else {
                0.0
            }
        })
    }

    /// Thomas elimination without pivoting.
    pub fn factor(&self) -> Result<TridiagonalLu> {
        let n = self.dim();
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = Vec::with_capacity(n.saturating_sub(1));
        let scale = self
            .diag
            .iter()
            .chain(&self.lower)
            .chain(&self.upper)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        let mut p = self.diag[0];
        for i in 0..n {
            if i > 0 {
                let m = self.lower[i - 1] / pivots[i - 1];
                multipliers.push(m);
                p = self.diag[i] - m * self.upper[i - 1];
            }
            if !p.is_finite() || p.abs() <= tiny {
                return Err(Error::Numerical(format!(
                    "singular tridiagonal system (pivot {p:e} at row {i})"
                )));
            }
            pivots.push(p);
        }
        Ok(TridiagonalLu {
            pivots,
            multipliers,
            upper: self.upper.clone(),
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.factor()?.solve(rhs))
    }
}

/// LU factors of a [`Tridiagonal`], reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    pivots: Vec<f64>,
    multipliers: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagonalLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.pivots.len();
        assert_eq!(x.len(), n);
        for i in 1..n {
            x[i] -= self.multipliers[i - 1] * x[i - 1];
        }
        x[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) / self.pivots[i];
        }
    }
}

/// Largest real part over the spectrum of a dense square matrix.
pub fn max_real_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Ascending eigenvalues of a symmetric 3×3 matrix.
pub fn symmetric_eigenvalues3(m: &Matrix3<f64>) -> [f64; 3] {
    let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    [e[0], e[1], e[2]]
}

/// Eigenvalues `(min, max)` of the symmetric 2×2 matrix `[[a, b], [b, c]]`.
pub fn symmetric_eigenvalues2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    // The smaller root via the product avoids cancellation when the
    // determinant is tiny relative to the trace.
    let big = if mean >= 0.0 { mean + radius } else { mean - radius };
    let det = a * c - b * b;
    let other = if big != 0.0 { det / big } else { 0.0 };
    if big >= other {
        (other, big)
    } else {
        (big, other)
    }
}
