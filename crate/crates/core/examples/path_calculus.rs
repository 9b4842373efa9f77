//! Developments of A-paths: reparameterization invariance, concatenation,
//! and homotopy invariance for a flat form on the square.

use std::sync::Arc;

use cartankit::algebroid::{MCFormField, OrdinaryEvaluator};
use cartankit::klein::left_regular;
use cartankit::lie_core::{self, group_by_name, AlgebraElement};
use cartankit::monodromy::MeshDomain;
use cartankit::path_engine::{
    concatenate, develop, develop_polyline, smooth_reparam, APath, DevelopOptions, PathPolyline, XiEvaluator,
};
use nalgebra::DVector;

fn constant_path(xi: AlgebraElement, start: f64) -> cartankit::Result<APath> {
    let eval: XiEvaluator = Arc::new(move |_, t| Ok(xi.scale(1.0 + t * t)));
    let t: Vec<f64> = (0..33).map(|i| i as f64 / 32.0).collect();
    let gamma = t.iter().map(|&s| DVector::from_element(1, start + s)).collect();
    APath::from_evaluator(t, vec![0.0, 1.0], gamma, eval, "quadratic")
}

fn main() -> cartankit::Result<()> {
    let spec = group_by_name("so3")?;
    let a = AlgebraElement::from_slice(&[0.3, -0.7, 0.2]);
    let b = AlgebraElement::from_slice(&[-0.4, 0.1, 0.9]);
    let p = constant_path(a.clone(), 0.0)?;
    let q = constant_path(b.clone(), 1.0)?;
    let gp = develop(&p, &spec, 1e-3)?.final_element;
    let gq = develop(&q, &spec, 1e-3)?.final_element;
    let reparam = develop(&smooth_reparam(&p), &spec, 1e-3)?.final_element.distance(&gp);
    let concat = develop(&concatenate(&q, &p)?, &spec, 1e-3)?
        .final_element
        .distance(&gq.compose(&gp));
    println!("reparameterization deviation {reparam:.2e}, concatenation deviation {concat:.2e}");

    // omega = A du + Ad_exp(uA) B dv is flat; its developments depend only on endpoints
    let mesh = Arc::new(MeshDomain::disk(&[0.0, 0.0], &[1.0, 1.0], &[5, 5])?);
    let (s, a2, b2) = (spec.clone(), a.clone(), b.clone());
    let eval: OrdinaryEvaluator = Arc::new(move |x, v| {
        let rot = lie_core::adjoint(&lie_core::exp(&a2.scale(x[0]), &s), &b2, &s)?;
        Ok(&a2.scale(v[0]) + &rot.scale(v[1]))
    });
    let omega = MCFormField::ordinary(mesh, left_regular(spec.clone()), eval)?;
    let exact = lie_core::exp(&a, &spec).compose(&lie_core::exp(&b, &spec));
    let opts = DevelopOptions::with_step(1e-3);
    for pts in [
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
        vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
        vec![[0.0, 0.0], [1.0, 1.0]],
    ] {
        let gamma = PathPolyline {
            points: pts.iter().map(|p| DVector::from_row_slice(p)).collect(),
            samples_per_segment: 17,
        };
        let d = develop_polyline(&gamma, &omega, &spec, &opts)?;
        println!(
            "{pts:?}: distance to exp(A) exp(B) {:.2e}, Richardson estimate {:?}",
            d.final_element.distance(&exact),
            d.err_est
        );
    }
    Ok(())
}
