use std::f64::consts::PI;

use super::*;
use crate::algebroid::{log_derivative, MapField, PointEvaluator};
use crate::klein::geometry_by_name;
use crate::lie_core::{self, AlgebraElement};

fn so2_circle_form(k: f64, nodes: usize) -> (MCFormField, GeometrySpec) {
    let geo = geometry_by_name("so2-circle").unwrap();
    let mesh = Arc::new(MeshDomain::circle(2.0 * PI, nodes).unwrap());
    let omega = constant_form(mesh, geo.clone(), vec![DVector::from_element(1, k)]).unwrap();
    (omega, geo)
}

#[test]
fn rotation_form_on_a_circle() {
    let m0 = MPoint::from_slice(&[0.0, 1.0]);
    let (one, geo) = so2_circle_form(1.0, 16);
    let r = pointed_monodromy(&one, &m0, &geo, &MeshOptions::default()).unwrap();
    assert_eq!(r.cycles.len(), 1);
    assert!(!r.cycles[0].contractible);
    assert!(r.trivial && r.max_deviation() < 1e-10, "{}", r.max_deviation());
    let (half, geo) = so2_circle_form(0.5, 16);
    let r = pointed_monodromy(&half, &m0, &geo, &MeshOptions::default()).unwrap();
    assert!(!r.trivial);
    // rotation by pi sends m0 to -m0
    assert!((r.max_deviation() - 2.0).abs() < 1e-10);
}

#[test]
fn translations_on_a_torus_pick_up_the_periods() {
    let geo = geometry_by_name("r2-translations").unwrap();
    let mesh = Arc::new(MeshDomain::torus([1.0, 2.0], [4, 5]).unwrap());
    let cols = vec![
        DVector::from_row_slice(&[1.0, 0.0]),
        DVector::from_row_slice(&[0.0, 0.5]),
    ];
    let omega = constant_form(mesh.clone(), geo.clone(), cols).unwrap();
    let r = pointed_monodromy(&omega, &geo.base_point, &geo, &MeshOptions::default()).unwrap();
    assert_eq!(r.cycles.len(), mesh.edges.len() - mesh.len() + 1);
    for c in &r.cycles {
        let expected = (c.winding[0].powi(2) + (0.5 * c.winding[1]).powi(2)).sqrt();
        assert!((c.deviation - expected).abs() < 1e-12);
        assert_eq!(c.contractible, c.deviation < 1e-12);
    }
    assert!(!r.trivial);
}

#[test]
fn exact_forms_have_trivial_monodromy_on_a_disk() {
    let geo = geometry_by_name("se2-plane").unwrap();
    let mesh = Arc::new(MeshDomain::disk(&[0.0, 0.0], &[1.0, 1.0], &[5, 5]).unwrap());
    let eval: PointEvaluator = Arc::new(|x| {
        Ok(DVector::from_row_slice(&[
            x[0] + 0.1 * (2.0 * x[1]).sin(),
            x[1] + 0.1 * (3.0 * x[0]).sin(),
        ]))
    });
    let f = MapField::from_fn(mesh, geo.clone(), eval).unwrap();
    let omega = log_derivative(&f).unwrap();
    let r = pointed_monodromy(&omega, &f.values[0], &geo, &MeshOptions::with_step(0.02)).unwrap();
    assert!(r.cycles.iter().all(|c| c.contractible));
    assert!(r.trivial, "{}", r.max_deviation());
}

#[test]
fn route_reversal_inverts_the_development() {
    let geo = geometry_by_name("se3-space").unwrap();
    let mesh = Arc::new(MeshDomain::disk(&[0.0, 0.0], &[1.0, 1.0], &[3, 3]).unwrap());
    let spec = geo.group.clone();
    let eval: crate::algebroid::OrdinaryEvaluator = Arc::new(move |x, v| {
        let a = DVector::from_fn(6, |i, _| ((i + 1) as f64 * x[0]).sin() + x[1] * i as f64);
        let b = DVector::from_fn(6, |i, _| (x[0] * x[1] + i as f64).cos());
        Ok(AlgebraElement::new(a * v[0] + b * v[1]))
    });
    let omega = MCFormField::ordinary(mesh.clone(), geo, eval).unwrap();
    let route = mesh.route_through(&[0, 1, 4, 5, 8]).unwrap();
    let opts = DevelopOptions::with_step(0.01);
    let g = develop_along(&omega, &route, &opts).unwrap();
    let h = develop_along(&omega, &route.reversed(&mesh), &opts).unwrap();
    assert!(g.compose(&h).distance(&spec.identity()) < 1e-10);
    let e = develop_along(&omega, &Route::empty(3), &opts).unwrap();
    assert_eq!(e.distance(&spec.identity()), 0.0);
    let _ = lie_core::log(&g, &spec).unwrap();
}

#[test]
fn basepoint_must_be_fixed_by_the_isotropy() {
    let geo = geometry_by_name("se2-plane").unwrap();
    let mesh = Arc::new(MeshDomain::disk(&[0.0, 0.0], &[1.0, 1.0], &[3, 3]).unwrap());
    let eval: PointEvaluator = Arc::new(|x| Ok(x.clone()));
    let f = MapField::from_fn(mesh, geo.clone(), eval).unwrap();
    let omega = log_derivative(&f).unwrap();
    let err = pointed_monodromy(&omega, &MPoint::from_slice(&[1.0, 0.0]), &geo, &MeshOptions::default());
    assert!(matches!(err, Err(Error::BasepointMismatch { .. })));
}

#[test]
fn tree_developments_match_direct_routes() {
    let (omega, _) = so2_circle_form(0.75, 8);
    let opts = DevelopOptions {
        richardson: false,
        ..DevelopOptions::with_step(0.01)
    };
    let tree = tree_developments(&omega, &opts).unwrap();
    for (node, g) in tree.iter().enumerate() {
        let direct = develop_along(&omega, &omega.mesh.tree_route(node), &opts).unwrap();
        assert!(g.distance(&direct) < 1e-14);
    }
}
