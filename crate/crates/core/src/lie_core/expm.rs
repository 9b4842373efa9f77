//! Dense matrix exponential and principal logarithm.
//!
//! `expm` is scaling-and-squaring with the degree-13 Padé approximant
//! (Higham 2005). `logm` is inverse scaling-and-squaring: repeated
//! Denman-Beavers square roots until the matrix is close to the identity,
//! then the Gregory (atanh) series.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn norm1(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let norm = norm1(a);
    if norm == 0.0 {
        return ident;
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a / 2f64.powi(s);
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = &a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Pade denominator is nonsingular for scaled input");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// True when some eigenvalue sits on the closed negative real axis.
pub fn has_negative_real_eigenvalue(a: &DMatrix<f64>) -> bool {
    let scale = norm1(a).max(1.0);
    let eig = a.complex_eigenvalues();
    eig.iter().any(|z| z.re <= 1e-12 * scale && z.im.abs() <= 1e-9 * scale)
}

fn sqrtm_db(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let y_inv = y.clone().try_inverse()?;
        let z_inv = z.clone().try_inverse()?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let delta = norm1(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * norm1(&y).max(1.0) {
            return Some(y);
        }
    }
    Some(y)
}

pub fn logm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    if has_negative_real_eigenvalue(a) {
        return Err(Error::OutOfRadius);
    }
    let mut x = a.clone();
    let mut s = 0;
    while norm1(&(&x - &ident)) > 0.25 {
        x = sqrtm_db(&x).ok_or(Error::OutOfRadius)?;
        s += 1;
        if s > 60 {
            return Err(Error::OutOfRadius);
        }
    }
    let num = &x - &ident;
    let den = &x + &ident;
    let z = den
        .transpose()
        .lu()
        .solve(&num.transpose())
        .ok_or(Error::OutOfRadius)?
        .transpose();
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    let mut k = 1.0;
    for _ in 0..60 {
        term = &term * &z2;
        k += 2.0;
        let add = &term / k;
        let size = norm1(&add);
        sum += add;
        if size < 1e-18 {
            break;
        }
    }
    Ok(sum * (2.0 * 2f64.powi(s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_exp(a: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
        let n = a.nrows();
        let mut out = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..terms {
            term = &term * a / k as f64;
            out += &term;
        }
        out
    }

    #[test]
    fn expm_matches_series_for_moderate_norm() {
        let a = DMatrix::from_row_slice(3, 3, &[0.1, -0.7, 0.3, 0.7, 0.2, -0.4, 0.0, 0.5, -0.3]);
        let e = expm(&a);
        let s = series_exp(&a, 40);
        assert!((e - s).abs().max() < 1e-14);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -20.0, 20.0, 0.0]);
        let e = expm(&a);
        let (c, s) = (20f64.cos(), 20f64.sin());
        let want = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!((e - want).abs().max() < 1e-12);
    }

    #[test]
    fn logm_inverts_expm() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, -2.5, 1.0, 2.5, 0.0, -0.3, 0.0, 0.0, 0.0]);
        let l = logm(&expm(&a)).unwrap();
        assert!((l - a).abs().max() < 1e-12);
    }

    #[test]
    fn logm_rejects_half_turn() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(logm(&a), Err(Error::OutOfRadius)));
    }
}
