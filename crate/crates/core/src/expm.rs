//! Dense square matrices and the matrix exponential used by operator scaling.
//!
//! `exp(M)` is computed by scaling and squaring around a truncated Taylor
//! series: `M` is divided by `2^s` until its 1-norm is at most 1/2, the
//! series is summed until the next term falls below the target relative
//! tolerance, and the result is squared `s` times.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const TAYLOR_TOL: f64 = 1e-17;
const MAX_TAYLOR_TERMS: usize = 40;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::domain("matrix rows must form a square"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(Matrix { dim, data: rows.concat() })
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut m = Self::identity(dim);
        m.data.iter_mut().for_each(|v| *v *= value);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Matrix { dim: self.dim, data: self.data.iter().map(|v| v * factor).collect() }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * x[j]).sum())
            .collect()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
                .unwrap_or(col);
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in col + 1..n {
                let f = a[row * n + col] / p;
                for j in col..n {
                    a[row * n + j] -= f * a[col * n + j];
                }
            }
        }
        det
    }

    /// Non-degeneracy certificate: `|det A| > 1e-12 · ‖A‖₁^d`.
    pub fn is_non_degenerate(&self) -> bool {
        let scale = self.norm_one().powi(self.dim as i32);
        scale > 0.0 && self.determinant().abs() > 1e-12 * scale
    }
}

/// Matrix exponential by scaling and squaring.
pub fn expm(m: &Matrix) -> Matrix {
    let n = m.dim();
    let norm = m.norm_one();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let reduced = m.scaled(0.5f64.powi(squarings));

    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=MAX_TAYLOR_TERMS {
        term = term.mul(&reduced).scaled(1.0 / k as f64);
        sum.data.iter_mut().zip(&term.data).for_each(|(s, t)| *s += t);
        if term.norm_one() <= TAYLOR_TOL * sum.norm_one() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn nilpotent_exponential_is_truncated_series() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let e = expm(&a);
        let expected = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(max_abs_diff(&e, &expected) < 1e-15);
    }

    #[test]
    fn diagonal_matches_scalar_exponentials() {
        let a = Matrix::from_rows(&[vec![3.5, 0.0], vec![0.0, -2.25]]).unwrap();
        let e = expm(&a);
        assert!((e.get(0, 0) / 3.5f64.exp() - 1.0).abs() < 1e-13);
        assert!((e.get(1, 1) / (-2.25f64).exp() - 1.0).abs() < 1e-13);
        assert_eq!(e.get(0, 1), 0.0);
    }

    #[test]
    fn rotation_generator() {
        let theta = 2.0;
        let a = Matrix::from_rows(&[vec![0.0, -theta], vec![theta, 0.0]]).unwrap();
        let e = expm(&a);
        let expected = Matrix::from_rows(&[
            vec![theta.cos(), -theta.sin()],
            vec![theta.sin(), theta.cos()],
        ])
        .unwrap();
        assert!(max_abs_diff(&e, &expected) < 1e-14);
    }

    #[test]
    fn inverse_pair_multiplies_to_identity() {
        let a = Matrix::from_rows(&[
            vec![1.2, -0.4, 0.3],
            vec![0.5, 0.9, -0.7],
            vec![-0.2, 0.6, 1.4],
        ])
        .unwrap();
        let prod = expm(&a).mul(&expm(&a.scaled(-1.0)));
        assert!(max_abs_diff(&prod, &Matrix::identity(3)) < 1e-12);
    }

    #[test]
    fn degeneracy_certificate() {
        let singular = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(!singular.is_non_degenerate());
        assert!(Matrix::identity(3).is_non_degenerate());
        assert!((Matrix::scalar(2, 3.0).determinant() - 9.0).abs() < 1e-12);
    }
}
