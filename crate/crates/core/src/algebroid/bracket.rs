//! Sections of `g + T(Sigma)` and the action-algebroid bracket.

use std::sync::Arc;

use nalgebra::DVector;

use super::{AlgebroidFiber, MCFormField};
use crate::error::{Error, Result};
use crate::lie_core::{self, AlgebraElement, GroupSpec};

/// A section `x -> (xi(x), v(x))` of the trivial bundle `g + T(Sigma)`.
pub type Section = Arc<dyn Fn(&DVector<f64>) -> Result<(AlgebraElement, DVector<f64>)> + Send + Sync>;

/// Frame vector `j` of `fiber`, extended to nearby points by projecting onto the fiber there.
pub fn frame_section(omega: Arc<MCFormField>, fiber: &AlgebroidFiber, j: usize) -> Section {
    let d = omega.algebra_dim();
    let sigma = fiber.sigma();
    let (xi, v) = &fiber.frame[j];
    let mut w = DVector::zeros(d + sigma);
    w.rows_mut(0, d).copy_from(&xi.coeffs);
    w.rows_mut(d, sigma).copy_from(v);
    Arc::new(move |y| {
        let p = omega.projector_at(y)? * &w;
        Ok((
            AlgebraElement::new(p.rows(0, d).into_owned()),
            p.rows(d, sigma).into_owned(),
        ))
    })
}

fn derivative_along(s: &Section, x: &DVector<f64>, v: &DVector<f64>, h: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    let scale = v.norm();
    let (g0, v0) = s(x)?;
    if scale == 0.0 {
        return Ok((g0.coeffs * 0.0, v0 * 0.0));
    }
    let u = v * (h / scale);
    let (gp, vp) = s(&(x + &u))?;
    let (gm, vm) = s(&(x - &u))?;
    let k = scale / (2.0 * h);
    Ok(((gp.coeffs - gm.coeffs) * k, (vp - vm) * k))
}

/// `[X, Y] = (D_{#X} Y - D_{#Y} X + [xi_X, xi_Y], D_{#X} Y_v - D_{#Y} X_v)` with central differences of step `h`.
pub fn section_bracket(x_sec: &Section, y_sec: &Section, spec: &GroupSpec, h: f64) -> Section {
    let (xs, ys, spec) = (x_sec.clone(), y_sec.clone(), spec.clone());
    Arc::new(move |x| {
        let (xg, xv) = xs(x)?;
        let (yg, yv) = ys(x)?;
        let (dy_g, dy_v) = derivative_along(&ys, x, &xv, h)?;
        let (dx_g, dx_v) = derivative_along(&xs, x, &yv, h)?;
        let br = lie_core::bracket(&xg, &yg, &spec);
        Ok((AlgebraElement::new((dy_g - dx_g) + br.coeffs), dy_v - dx_v))
    })
}

/// Bracket of two sections at `x`, checked to lie in the fiber of `omega`.
pub fn bracket_sections(
    x: &DVector<f64>,
    x_sec: &Section,
    y_sec: &Section,
    omega: &MCFormField,
    h: f64,
) -> Result<(AlgebraElement, DVector<f64>)> {
    for s in [x_sec, y_sec] {
        let (g, v) = s(x)?;
        let distance = fiber_distance(omega, x, &g, &v)?;
        if distance > omega.fiber_tol {
            return Err(Error::NotInFiber { residual: distance });
        }
    }
    let (g, v) = section_bracket(x_sec, y_sec, &omega.geometry.group, h)(x)?;
    let distance = fiber_distance(omega, x, &g, &v)?;
    if distance > omega.fiber_tol {
        return Err(Error::NotInFiber { residual: distance });
    }
    Ok((g, v))
}

fn fiber_distance(omega: &MCFormField, x: &DVector<f64>, g: &AlgebraElement, v: &DVector<f64>) -> Result<f64> {
    let d = g.dim();
    let mut w = DVector::zeros(d + v.len());
    w.rows_mut(0, d).copy_from(&g.coeffs);
    w.rows_mut(d, v.len()).copy_from(v);
    let p = omega.projector_at(x)?;
    Ok((&w - p * &w).norm())
}
