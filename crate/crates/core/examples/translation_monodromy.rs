//! A constant translation form around a circle and on a torus: the
//! monodromy is nontrivial and reconstruction is refused.

use std::f64::consts::PI;
use std::sync::Arc;

use cartankit::klein::geometry_by_name;
use cartankit::monodromy::{constant_form, pointed_monodromy, MeshDomain, MeshOptions};
use cartankit::reconstruct::reconstruct_primitive;
use nalgebra::DVector;

fn main() -> cartankit::Result<()> {
    let opts = MeshOptions::default();
    let se2 = geometry_by_name("se2-plane")?;
    let circle = Arc::new(MeshDomain::circle(2.0 * PI, 16)?);
    let omega = constant_form(circle, se2.clone(), vec![DVector::from_row_slice(&[0.0, 1.0, 0.0])])?;
    let report = pointed_monodromy(&omega, &se2.base_point, &se2, &opts)?;
    for c in report.cycles.iter().filter(|c| !c.contractible) {
        println!(
            "circle generator: winding {:?}, image {:?}, deviation {:.12}",
            c.winding, c.image, c.deviation
        );
    }
    if let Err(e) = reconstruct_primitive(&omega, &se2.base_point, &se2, &opts) {
        println!("reconstruction refused: {e}");
    }

    let r2 = geometry_by_name("r2-translations")?;
    let torus = Arc::new(MeshDomain::torus([1.0, 2.0], [8, 12])?);
    let cols = vec![
        DVector::from_row_slice(&[1.0, 0.0]),
        DVector::from_row_slice(&[0.0, 0.5]),
    ];
    let omega = constant_form(torus, r2.clone(), cols)?;
    let report = pointed_monodromy(&omega, &r2.base_point, &r2, &opts)?;
    let mut seen: Vec<&Vec<f64>> = Vec::new();
    for c in report.cycles.iter().filter(|c| !c.contractible) {
        if !seen.contains(&&c.winding) {
            seen.push(&c.winding);
            println!("torus cycle class: winding {:?}, image {:?}", c.winding, c.image);
        }
    }
    println!("{} cycles, trivial: {}", report.cycles.len(), report.trivial);
    Ok(())
}
