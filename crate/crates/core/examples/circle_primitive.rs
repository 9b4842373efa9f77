//! The rotation form on a circle: trivial monodromy and circles of any radius
//! as primitives, none related to another by a symmetry of the plane.

use std::f64::consts::PI;
use std::sync::Arc;

use cartankit::klein::{geometry_by_name, MPoint};
use cartankit::monodromy::{constant_form, pointed_monodromy, MeshDomain, MeshOptions};
use cartankit::reconstruct::{procrustes_candidate, reconstruct_primitive, uniqueness_up_to_symmetry, Candidate};
use nalgebra::DVector;

fn main() -> cartankit::Result<()> {
    let geo = geometry_by_name("e2-plane")?;
    let mesh = Arc::new(MeshDomain::circle(2.0 * PI, 32)?);
    let omega = constant_form(mesh, geo.clone(), vec![DVector::from_row_slice(&[1.0, 0.0, 0.0])])?;
    let opts = MeshOptions::default();
    let mut fields = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let m0 = MPoint::from_slice(&[r, 0.0]);
        let mono = pointed_monodromy(&omega, &m0, &geo, &opts)?;
        let p = reconstruct_primitive(&omega, &m0, &geo, &opts)?;
        let radius = p.values.iter().map(|m| m.coords.norm()).fold(0.0, f64::max);
        println!(
            "r = {r}: monodromy deviation {:.2e}, max radius {radius:.12}, cycle residual {:.2e}",
            mono.max_deviation(),
            p.max_residual
        );
        fields.push(p.to_map_field()?);
    }
    let pair = procrustes_candidate(&fields[0], &fields[2], &geo)?;
    match uniqueness_up_to_symmetry(&fields[0], &fields[2], &Candidate::Symmetry(pair), &geo, 1e-6) {
        Ok(v) => println!("r = 0.5 and r = 2 related (deviation {:.2e})", v.deviation),
        Err(e) => println!("r = 0.5 and r = 2 not related: {e}"),
    }
    Ok(())
}
