//! Logarithmic derivative of a map into SE(2), reconstructed from the form
//! alone and compared with the original, for several grid resolutions.

use cartankit::algebroid::{log_derivative_ordinary, morphism_residual};
use cartankit::klein::left_regular;
use cartankit::lie_core::group_by_name;
use cartankit::linalg;
use cartankit::monodromy::MeshOptions;
use cartankit::reconstruct::reconstruct_group_primitive;
use cartankit::test_maps::test_map;

fn main() -> cartankit::Result<()> {
    let spec = group_by_name("se2")?;
    let geo = left_regular(spec.clone());
    let t = test_map("test.spiral")?;
    for n in [17, 33, 65] {
        let f = t.on_grid(n, &geo)?;
        let omega = log_derivative_ordinary(&f, &spec)?;
        let residual = morphism_residual(&omega, &omega.geometry)?.max;
        let g0 = spec.element(linalg::unflatten_row_major(&f.values[f.mesh.x0].coords, 3, 3))?;
        let p = reconstruct_group_primitive(&omega, &g0, &spec, &MeshOptions::with_step(1e-3))?;
        let err = p
            .values
            .iter()
            .zip(&f.values)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max);
        println!("{n:>3} x {n:<3} structure residual {residual:.3e}, reconstruction error {err:.3e}");
    }
    Ok(())
}
