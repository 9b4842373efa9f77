//! Small dense linear-algebra helpers built on a one-sided Jacobi SVD.
//!
//! Rank and nullspace decisions use a relative threshold: a singular value
//! counts as zero when it is at most `rel_tol * max(sigma_max, 1)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Singular value decomposition `m = u diag(singular) v^T` with singular
/// values in decreasing order and a complete orthogonal `v` (`ncols x ncols`).
/// Columns of `u` belonging to zero singular values are zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(m: &DMatrix<f64>) -> Svd {
    let (rows, cols) = m.shape();
    let mut u = m.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    let (a, b) = (u[(i, p)], u[(i, q)]);
                    alpha += a * a;
                    beta += b * b;
                    gamma += a * b;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (a, b) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * a - s * b;
                    u[(i, q)] = s * a + c * b;
                }
                for i in 0..cols {
                    let (a, b) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * a - s * b;
                    v[(i, q)] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..cols).map(|j| u.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut su = DMatrix::zeros(rows, cols);
    let mut sv = DMatrix::zeros(cols, cols);
    let mut singular = Vec::with_capacity(cols);
    for (c, &j) in order.iter().enumerate() {
        let s = norms[j];
        singular.push(s);
        if s > 0.0 {
            su.set_column(c, &(u.column(j) / s));
        }
        sv.set_column(c, &v.column(j));
    }
    Svd { u: su, singular, v: sv }
}

/// Singular values in decreasing order; `min(rows, cols)` of them.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows().min(m.ncols());
    let mut s = if m.nrows() < m.ncols() {
        svd(&m.transpose()).singular
    } else {
        svd(m).singular
    };
    s.truncate(k);
    s
}

pub(crate) fn threshold(singular: &[f64], rel_tol: f64) -> f64 {
    let top = singular.first().copied().unwrap_or(0.0);
    rel_tol * top.max(1.0)
}

pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let vals = singular_values(m);
    let thr = threshold(&vals, rel_tol);
    vals.iter().filter(|&&x| x > thr).count()
}

/// Orthonormal basis of the nullspace as matrix columns.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    let d = svd(m);
    let thr = threshold(&d.singular, rel_tol);
    let r = d.singular.iter().filter(|&&x| x > thr).count();
    d.v.columns(r, cols - r).into_owned()
}

/// Orthonormal basis of the column space.
pub fn range_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let d = svd(m);
    let thr = threshold(&d.singular, rel_tol);
    let r = d.singular.iter().filter(|&&x| x > thr).count();
    d.u.columns(0, r).into_owned()
}

/// Moore-Penrose pseudo-inverse with the relative cut-off.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let d = svd(m);
    let thr = threshold(&d.singular, rel_tol);
    let mut out = DMatrix::zeros(cols, rows);
    for (j, &s) in d.singular.iter().enumerate() {
        if s > thr {
            out += d.v.column(j) * d.u.column(j).transpose() / s;
        }
    }
    out
}

/// Smallest singular value (0 for empty or wide matrices).
pub fn min_singular(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 || m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

/// Row-major flattening, matching the JSON matrix layout.
pub fn flatten_row_major(m: &DMatrix<f64>) -> DVector<f64> {
    let (r, c) = m.shape();
    DVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

pub fn unflatten_row_major(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Serialized matrix: explicit shape and row-major entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowMajor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&DMatrix<f64>> for RowMajor {
    fn from(m: &DMatrix<f64>) -> Self {
        RowMajor {
            rows: m.nrows(),
            cols: m.ncols(),
            data: flatten_row_major(m).iter().copied().collect(),
        }
    }
}

impl RowMajor {
    /// `None` when the entry count does not match the shape.
    pub fn to_matrix(&self) -> Option<DMatrix<f64>> {
        (self.data.len() == self.rows * self.cols).then(|| DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

/// Stacks vectors as matrix columns.
pub fn hstack(cols: &[DVector<f64>], rows: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Orthogonal projector onto the column span of `basis` (orthonormal columns).
pub fn projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis * basis.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = nullspace(&m, 1e-10);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).norm() < 1e-12);
        assert!((n.transpose() * &n - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn rank_and_pinv() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 0.0, 0.0]);
        assert_eq!(rank(&m, 1e-10), 1);
        let p = pinv(&m, 1e-10);
        assert!((&m * &p * &m - &m).norm() < 1e-12);
    }

    #[test]
    fn jacobi_svd_is_accurate_on_a_wide_matrix() {
        let v = DMatrix::from_row_slice(
            2,
            3,
            &[
                0.0,
                -0.4315957503034934,
                -0.560111692718482,
                0.0,
                -0.7118257837599019,
                0.5484994996910845,
            ],
        );
        let gram = (&v * v.transpose()).symmetric_eigenvalues();
        let mut exact: Vec<f64> = gram.iter().map(|x: &f64| x.sqrt()).collect();
        exact.sort_by(|a, b| b.total_cmp(a));
        let s = singular_values(&v);
        for (a, b) in s.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-14, "{a} {b}");
        }
        assert!((&v * pinv(&v, 1e-10) - DMatrix::identity(2, 2)).norm() < 1e-14);
        let d = svd(&v);
        assert!((d.v.transpose() * &d.v - DMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn flatten_is_row_major() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let v = flatten_row_major(&m);
        assert_eq!(v.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(unflatten_row_major(&v, 2, 2), m);
    }
}
