use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebroid::log_derivative_ordinary;
use crate::klein::geometry_by_name;
use crate::lie_core::{group_by_name, AlgebraElement};
use crate::monodromy::constant_form;
use crate::test_maps::{default_test_map, test_map};

fn circle_form(geo: &GeometrySpec, xi: &[f64], nodes: usize) -> MCFormField {
    let mesh = Arc::new(MeshDomain::circle(2.0 * PI, nodes).unwrap());
    constant_form(mesh, geo.clone(), vec![DVector::from_row_slice(xi)]).unwrap()
}

#[test]
fn rotation_form_reconstructs_circles() {
    let geo = geometry_by_name("e2-plane").unwrap();
    let omega = circle_form(&geo, &[1.0, 0.0, 0.0], 24);
    for r in [0.0, 0.5, 2.0] {
        let p = reconstruct_primitive(&omega, &MPoint::from_slice(&[r, 0.0]), &geo, &MeshOptions::default()).unwrap();
        for (x, m) in omega.mesh.nodes.iter().zip(&p.values) {
            let t = x[0];
            assert!(m.distance(&MPoint::from_slice(&[r * t.cos(), r * t.sin()])) < 1e-9);
        }
        assert!(p.max_residual < 1e-9);
    }
}

#[test]
fn translation_form_refuses_to_reconstruct() {
    let geo = geometry_by_name("se2-plane").unwrap();
    let omega = circle_form(&geo, &[0.0, 1.0, 0.0], 12);
    match reconstruct_primitive(&omega, &MPoint::from_slice(&[0.0, 0.0]), &geo, &MeshOptions::default()) {
        Err(Error::NontrivialMonodromy(report)) => {
            assert!((report.max_deviation() - 2.0 * PI).abs() < 1e-9);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn zero_form_gives_a_constant_group_map() {
    let spec = group_by_name("so3").unwrap();
    let geo = crate::klein::left_regular(spec.clone());
    let mesh = Arc::new(MeshDomain::disk(&[0.0, 0.0], &[1.0, 1.0], &[4, 4]).unwrap());
    let omega = constant_form(mesh, geo, vec![DVector::zeros(3), DVector::zeros(3)]).unwrap();
    let g0 = lie_core::exp(&AlgebraElement::from_slice(&[0.3, -0.2, 0.9]), &spec);
    let p = reconstruct_group_primitive(&omega, &g0, &spec, &MeshOptions::default()).unwrap();
    let flat = linalg::flatten_row_major(&g0.mat);
    assert!(p.values.iter().all(|m| (&m.coords - &flat).norm() < 1e-14));
}

#[test]
fn constant_xi_on_an_interval_gives_exp() {
    let spec = group_by_name("se3").unwrap();
    let geo = crate::klein::left_regular(spec.clone());
    let mesh = Arc::new(MeshDomain::disk(&[0.0], &[1.0], &[6]).unwrap());
    let xi = DVector::from_row_slice(&[0.2, -0.4, 0.7, 1.0, 0.0, -0.5]);
    let omega = constant_form(mesh.clone(), geo, vec![xi.clone()]).unwrap();
    let g0 = spec.random_element(&mut ChaCha8Rng::seed_from_u64(3), 0.5);
    let p = reconstruct_group_primitive(&omega, &g0, &spec, &MeshOptions::default()).unwrap();
    for (x, m) in mesh.nodes.iter().zip(&p.values) {
        let expected = lie_core::exp(&AlgebraElement::new(&xi * x[0]), &spec).compose(&g0);
        assert!((&m.coords - linalg::flatten_row_major(&expected.mat)).norm() < 1e-11);
    }
}

#[test]
fn group_round_trip_up_to_right_translation() {
    let spec = group_by_name("se2").unwrap();
    let t = test_map("test.spiral").unwrap();
    let f = t.on_grid(9, &crate::klein::left_regular(spec.clone())).unwrap();
    let omega = log_derivative_ordinary(&f, &spec).unwrap();
    let g0 = spec.random_element(&mut ChaCha8Rng::seed_from_u64(1), 0.7);
    let p = reconstruct_group_primitive(&omega, &g0, &spec, &MeshOptions::default()).unwrap();
    let rebuilt = MapField::sampled(f.mesh.clone(), f.geometry.clone(), p.values.clone()).unwrap();
    let verdict = uniqueness_up_to_symmetry(&f, &rebuilt, &Candidate::RightTranslation, &f.geometry, 1e-8).unwrap();
    let g = linalg::unflatten_row_major(&DVector::from_vec(verdict.translation.unwrap()), 3, 3);
    let f0 = linalg::unflatten_row_major(&f.values[0].coords, 3, 3);
    assert!(linalg::max_abs(&(g - f0.try_inverse().unwrap() * &g0.mat)) < 1e-10);
}

#[test]
fn homogeneous_round_trips_and_principal_witness() {
    for name in ["se2-plane", "so3-sphere", "affine2-plane", "so2-circle"] {
        let geo = geometry_by_name(name).unwrap();
        let t = default_test_map(name).unwrap();
        let f = t.on_grid(6, &geo).unwrap();
        let omega = log_derivative(&f).unwrap();
        let p = reconstruct_primitive(&omega, &f.values[0], &geo, &MeshOptions::default()).unwrap();
        let err = p
            .values
            .iter()
            .zip(&f.values)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{name}: {err}");
        assert!(p.max_isotropy_residual() < 1e-8, "{name}");
        let w = verify_principal_primitive(&omega, &p.to_map_field().unwrap(), &geo, 1e-6).unwrap();
        assert!(w.injective && w.residual < 1e-6, "{name}: {}", w.residual);
        if omega.fibers[0].rank() == geo.group.dim() - geo.dim + omega.sigma() {
            assert!(w.lambda.iter().all(|l| l.is_square()));
        }
    }
}

#[test]
fn constant_map_is_not_a_primitive_of_a_moving_form() {
    let geo = geometry_by_name("se2-plane").unwrap();
    let t = test_map("test.wavy-patch").unwrap();
    let f = t.on_grid(4, &geo).unwrap();
    let omega = log_derivative(&f).unwrap();
    let constant = MapField::sampled(f.mesh.clone(), geo.clone(), vec![f.values[0].clone(); f.values.len()]).unwrap();
    assert!(matches!(
        verify_principal_primitive(&omega, &constant, &geo, 1e-7),
        Err(Error::NoSolution { .. })
    ));
}

#[test]
fn symmetric_images_have_isomorphic_log_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let geo = geometry_by_name("so3-sphere").unwrap();
    let t = test_map("test.sphere-patch").unwrap();
    let f1 = t.on_grid(5, &geo).unwrap();
    let s = klein::random_symmetry_pair(&geo, &mut rng, 1.0).unwrap();
    let base = t.evaluator(&geo).unwrap();
    let (s2, g2) = (s.clone(), geo.clone());
    let moved: PointEvaluator = Arc::new(move |x| Ok(klein::apply_symmetry(&s2, &MPoint::new(base(x)?), &g2)?.coords));
    let f2 = MapField::from_fn(f1.mesh.clone(), geo.clone(), moved).unwrap();
    let verdict = uniqueness_up_to_symmetry(&f1, &f2, &Candidate::Symmetry(s.clone()), &geo, 1e-9).unwrap();
    assert!(verdict.related);
    let omega1 = log_derivative(&f1).unwrap();
    let omega2 = log_derivative(&f2).unwrap();
    let w = check_morphism(&omega1, &omega2, &s.l, &geo, 1e-7);
    assert!(w.is_ok(), "{w:?}");
    let same = check_morphism(&omega1, &omega1, &geo.group.identity(), &geo, 1e-12).unwrap();
    assert!(same.residual < 1e-14);
}

#[test]
fn circles_of_different_radii_are_not_related() {
    let geo = geometry_by_name("e2-plane").unwrap();
    let omega = circle_form(&geo, &[1.0, 0.0, 0.0], 16);
    let opts = MeshOptions::default();
    let f1 = reconstruct_primitive(&omega, &MPoint::from_slice(&[0.5, 0.0]), &geo, &opts).unwrap();
    let f2 = reconstruct_primitive(&omega, &MPoint::from_slice(&[2.0, 0.0]), &geo, &opts).unwrap();
    let m1 = MapField::sampled(omega.mesh.clone(), geo.clone(), f1.values).unwrap();
    let m2 = MapField::sampled(omega.mesh.clone(), geo.clone(), f2.values).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let candidates = catalog_candidates(&m1, &m2, &geo, &mut rng, 10).unwrap();
    for c in candidates {
        assert!(matches!(
            uniqueness_up_to_symmetry(&m1, &m2, &Candidate::Symmetry(c), &geo, 1e-6),
            Err(Error::NotRelated { .. })
        ));
    }
    // a rotated copy is found by the rigid fit
    let s = klein::is_symmetry_pair(
        &lie_core::exp(&AlgebraElement::from_slice(&[0.7, 0.3, -1.0]), &geo.group),
        &geo.group.identity(),
        &geo.base_point,
        &geo,
    )
    .unwrap();
    let moved: Vec<MPoint> = m1
        .values
        .iter()
        .map(|m| klein::apply_symmetry(&s, m, &geo).unwrap())
        .collect();
    let m3 = MapField::sampled(omega.mesh.clone(), geo.clone(), moved).unwrap();
    let fit = procrustes_candidate(&m1, &m3, &geo).unwrap();
    assert!(uniqueness_up_to_symmetry(&m1, &m3, &Candidate::Symmetry(fit), &geo, 1e-9).is_ok());
}
