//! Built-in matrix groups.
//!
//! Basis orderings: rotations first (`E_ij - E_ji`, `i < j`, with so(3)
//! ordered as `L_x, L_y, L_z`), then translations `t_1..t_n` in the last
//! column of the affine block.

use nalgebra::DMatrix;

use super::{GroupSpec, LinearPart, Membership};
use crate::error::{Error, Result};

fn unit(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

/// Skew generators of so(k) embedded in the top-left block of an `n x n` matrix.
fn rotation_generators(k: usize, n: usize) -> Vec<DMatrix<f64>> {
    if k == 3 {
        // L_x, L_y, L_z with [L_x, L_y] = L_z as matrices
        return vec![
            unit(n, 2, 1) - unit(n, 1, 2),
            unit(n, 0, 2) - unit(n, 2, 0),
            unit(n, 1, 0) - unit(n, 0, 1),
        ];
    }
    let mut out = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            // E_ji - E_ij: for k = 2 this is the counter-clockwise generator
            out.push(unit(n, j, i) - unit(n, i, j));
        }
    }
    out
}

fn translation_generators(k: usize) -> Vec<DMatrix<f64>> {
    (0..k).map(|i| unit(k + 1, i, k)).collect()
}

fn gl_generators(k: usize, n: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            out.push(unit(n, i, j));
        }
    }
    out
}

fn sl_generators(k: usize, n: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i != j {
                out.push(unit(n, i, j));
            }
        }
    }
    for i in 0..k.saturating_sub(1) {
        out.push(unit(n, i, i) - unit(n, i + 1, i + 1));
    }
    out
}

/// Orientation-preserving rigid motions of `R^k`.
pub fn special_euclidean(k: usize) -> Result<GroupSpec> {
    let mut basis = rotation_generators(k, k + 1);
    basis.extend(translation_generators(k));
    GroupSpec::new(
        &format!("se{k}"),
        basis,
        Membership::Affine(LinearPart::Orthogonal { proper: true }),
    )
}

/// Full isometry group of `R^k` (reflections allowed).
pub fn euclidean(k: usize) -> Result<GroupSpec> {
    let mut basis = rotation_generators(k, k + 1);
    basis.extend(translation_generators(k));
    GroupSpec::new(
        &format!("e{k}"),
        basis,
        Membership::Affine(LinearPart::Orthogonal { proper: false }),
    )
}

pub fn special_orthogonal(k: usize) -> Result<GroupSpec> {
    GroupSpec::new(
        &format!("so{k}"),
        rotation_generators(k, k),
        Membership::Orthogonal { proper: true },
    )
}

pub fn special_linear(k: usize) -> Result<GroupSpec> {
    GroupSpec::new(&format!("sl{k}"), sl_generators(k, k), Membership::Unimodular)
}

/// `GL(k) x| R^k`.
pub fn affine(k: usize) -> Result<GroupSpec> {
    let mut basis = gl_generators(k, k + 1);
    basis.extend(translation_generators(k));
    GroupSpec::new(&format!("affine{k}"), basis, Membership::Affine(LinearPart::General))
}

/// `SL(k) x| R^k`.
pub fn equiaffine(k: usize) -> Result<GroupSpec> {
    let mut basis = sl_generators(k, k + 1);
    basis.extend(translation_generators(k));
    GroupSpec::new(
        &format!("equiaffine{k}"),
        basis,
        Membership::Affine(LinearPart::Unimodular),
    )
}

pub fn translations(k: usize) -> Result<GroupSpec> {
    GroupSpec::new(
        &format!("r{k}"),
        translation_generators(k),
        Membership::Affine(LinearPart::Identity),
    )
}

/// `(0, inf)` as `1 x 1` matrices.
pub fn positive_reals() -> Result<GroupSpec> {
    GroupSpec::new("positive-reals", vec![DMatrix::identity(1, 1)], Membership::Positive)
}

/// Looks up a catalog group: `se2`, `se3`, `e2`, `e3`, `so2`..`so4`, `sl2`,
/// `sl3`, `affine2`, `affine3`, `equiaffine2`, `equiaffine3`, `r2`, `r3`,
/// `positive-reals`.
pub fn group_by_name(name: &str) -> Result<GroupSpec> {
    let parse_k = |prefix: &str| -> Option<usize> { name.strip_prefix(prefix)?.parse().ok() };
    if name == "positive-reals" {
        return positive_reals();
    }
    let found = if let Some(k) = parse_k("equiaffine") {
        (2..=3).contains(&k).then(|| equiaffine(k))
    } else if let Some(k) = parse_k("affine") {
        (2..=3).contains(&k).then(|| affine(k))
    } else if let Some(k) = parse_k("se") {
        (2..=3).contains(&k).then(|| special_euclidean(k))
    } else if let Some(k) = parse_k("so") {
        (2..=4).contains(&k).then(|| special_orthogonal(k))
    } else if let Some(k) = parse_k("sl") {
        (2..=3).contains(&k).then(|| special_linear(k))
    } else if let Some(k) = parse_k("e") {
        (2..=3).contains(&k).then(|| euclidean(k))
    } else if let Some(k) = parse_k("r") {
        (1..=3).contains(&k).then(|| translations(k))
    } else {
        None
    };
    found.unwrap_or_else(|| Err(Error::UnknownGeometry(name.to_string())))
}
