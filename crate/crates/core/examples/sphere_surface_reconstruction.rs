//! A patch of the unit sphere rebuilt from its generalized logarithmic
//! derivative, followed by the primitive and structural checks.

use cartankit::algebroid::{axiom_report, log_derivative};
use cartankit::klein::geometry_by_name;
use cartankit::monodromy::MeshOptions;
use cartankit::reconstruct::{reconstruct_primitive, verify_principal_primitive};
use cartankit::test_maps::test_map;

fn main() -> cartankit::Result<()> {
    for (geometry, map) in [
        ("so3-sphere", "test.sphere-patch"),
        ("so4-sphere3", "test.s3-patch"),
        ("se3-space", "test.surface3"),
    ] {
        let geo = geometry_by_name(geometry)?;
        let f = test_map(map)?.on_grid(9, &geo)?;
        let omega = log_derivative(&f)?;
        let p = reconstruct_primitive(&omega, &f.values[f.mesh.x0], &geo, &MeshOptions::default())?;
        let err = p
            .values
            .iter()
            .zip(&f.values)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max);
        let w = verify_principal_primitive(&omega, &p.to_map_field()?, &geo, 1e-6)?;
        let axioms = axiom_report(&omega, &geo, omega.mesh.x0)?;
        println!(
            "{map:<18} error {err:.2e}, primitive residual {:.2e}, isotropy residual {:.2e}, maximal {}",
            w.residual,
            p.max_isotropy_residual(),
            axioms.maximal
        );
    }
    Ok(())
}
