//! Curves from curvature and torsion.
//!
//! A unit-speed curve with Frenet frame `F(s)` has body velocity
//! `X = F^-1 F'`: `kappa * rot + t_x` in the plane and
//! `tau * L_x + kappa * L_z + t_x` in space. The development here uses the
//! right logarithmic derivative, so the g-path returned is
//! `xi = F' F^-1 = Ad_F X`, with `F` obtained by first developing `-X`
//! (whose development is `F^-1`).

use nalgebra::DVector;

use super::GeometrySpec;
use crate::error::{Error, Result};
use crate::lie_core::{self, AlgebraElement};
use crate::path_engine::{develop_with, APath, DevelopOptions};

/// Curvature (and torsion) samples on a uniform grid over `[0, 1]`,
/// for a curve of total arc length `length`.
#[derive(Clone, Debug)]
pub struct FrenetInput {
    pub length: f64,
    pub kappa: Vec<f64>,
    pub tau: Option<Vec<f64>>,
}

impl FrenetInput {
    pub fn constant(length: f64, kappa: f64, tau: Option<f64>, samples: usize) -> Self {
        FrenetInput {
            length,
            kappa: vec![kappa; samples],
            tau: tau.map(|t| vec![t; samples]),
        }
    }
}

/// Builds the g-path whose development carries the frame at arc length 0
/// to the frame at arc length `t * length`.
pub fn frenet_xi(input: &FrenetInput, geo: &GeometrySpec, opts: &DevelopOptions) -> Result<APath> {
    if !geo.euclidean {
        return Err(Error::InvalidInput(format!("{} is not a Euclidean geometry", geo.name)));
    }
    let n = geo.dim;
    if n != 2 && n != 3 {
        return Err(Error::DimensionUnsupported(n));
    }
    let samples = input.kappa.len();
    if samples < 2 {
        return Err(Error::InvalidInput("at least two curvature samples are needed".into()));
    }
    if !(input.length > 0.0) || !input.length.is_finite() {
        return Err(Error::InvalidInput("curve length must be positive".into()));
    }
    if input.kappa.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidInput("curvature samples must be finite".into()));
    }
    let tau = match (n, &input.tau) {
        (3, Some(t)) if t.len() == samples && t.iter().all(|x| x.is_finite()) => t.clone(),
        (3, _) => {
            return Err(Error::InvalidInput(
                "space curves need one finite torsion sample per curvature sample".into(),
            ))
        }
        _ => vec![0.0; samples],
    };
    let spec = &geo.group;
    let body = |k: f64, t: f64| -> AlgebraElement {
        let mut c = DVector::zeros(spec.dim());
        if n == 2 {
            // [rot, t_x, t_y]
            c[0] = k;
            c[1] = 1.0;
        } else {
            // [L_x, L_y, L_z, t_x, t_y, t_z]
            c[0] = t;
            c[2] = k;
            c[3] = 1.0;
        }
        AlgebraElement::new(c * input.length)
    };
    let t_grid: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
    let gamma: Vec<DVector<f64>> = t_grid.iter().map(|&t| DVector::from_element(1, t)).collect();
    let body_samples: Vec<AlgebraElement> = (0..samples).map(|i| body(input.kappa[i], tau[i])).collect();
    let minus: Vec<AlgebraElement> = body_samples.iter().map(|x| -x).collect();
    let inverse_path = APath::sampled(t_grid.clone(), minus, gamma.clone(), "inverse frame")?;
    let mut o = opts.clone();
    o.step = opts.step / input.length;
    let frames_inv = develop_with(&inverse_path, spec, &o)?;
    let xi = frames_inv
        .g_samples
        .iter()
        .zip(&body_samples)
        .map(|(h, x)| lie_core::adjoint(&h.inverse(), x, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(APath::sampled(t_grid, xi, gamma, "frenet")?
        .with_meta(&format!("frenet curve of length {} in {}", input.length, geo.name)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::klein::{act, geometry_by_name, MPoint};
    use std::f64::consts::PI;

    fn curve(input: &FrenetInput, name: &str) -> Vec<MPoint> {
        let geo = geometry_by_name(name).unwrap();
        let opts = DevelopOptions::default();
        let path = frenet_xi(input, &geo, &opts).unwrap();
        let mut o = opts.clone();
        o.step /= input.length;
        let dev = develop_with(&path, &geo.group, &o).unwrap();
        dev.g_samples
            .iter()
            .map(|g| act(g, &geo.base_point, &geo).unwrap())
            .collect()
    }

    #[test]
    fn zero_curvature_gives_a_straight_line() {
        let pts = curve(&FrenetInput::constant(2.0, 0.0, None, 11), "se2-plane");
        for (i, p) in pts.iter().enumerate() {
            let s = 2.0 * i as f64 / 10.0;
            assert!(p.distance(&MPoint::from_slice(&[s, 0.0])) < 1e-12);
        }
    }

    #[test]
    fn unit_curvature_closes_a_circle() {
        let pts = curve(&FrenetInput::constant(2.0 * PI, 1.0, Some(0.0), 401), "se3-space");
        assert!(pts[pts.len() - 1].distance(&pts[0]) < 1e-6);
        // center (0, 1, 0), radius 1
        for p in &pts {
            let r = (p.coords[0].powi(2) + (p.coords[1] - 1.0).powi(2)).sqrt();
            assert!((r - 1.0).abs() < 1e-6 && p.coords[2].abs() < 1e-9);
        }
    }

    #[test]
    fn unsupported_geometries() {
        let input = FrenetInput::constant(1.0, 1.0, Some(0.0), 3);
        let so3 = geometry_by_name("so3-sphere").unwrap();
        assert!(frenet_xi(&input, &so3, &DevelopOptions::default()).is_err());
        let no_tau = FrenetInput::constant(1.0, 1.0, None, 3);
        let se3 = geometry_by_name("se3-space").unwrap();
        assert!(frenet_xi(&no_tau, &se3, &DevelopOptions::default()).is_err());
    }
}
