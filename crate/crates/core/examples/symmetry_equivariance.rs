//! Two surfaces related by a symmetry pair have logarithmic derivatives
//! related by a morphism whose witness is recovered numerically.

use std::sync::Arc;

use cartankit::algebroid::{log_derivative, MapField, PointEvaluator};
use cartankit::klein::{apply_symmetry, geometry_by_name, random_symmetry_pair, MPoint};
use cartankit::reconstruct::check_morphism;
use cartankit::test_maps::test_map;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cartankit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (geometry, map) in [
        ("se2-plane", "test.wavy-patch"),
        ("so3-sphere", "test.sphere-patch"),
        ("se3-space", "test.surface3"),
    ] {
        let geo = geometry_by_name(geometry)?;
        let t = test_map(map)?;
        let f1 = t.on_grid(8, &geo)?;
        let s = random_symmetry_pair(&geo, &mut rng, 1.0)?;
        let base = t.evaluator(&geo)?;
        let (s2, g2) = (s.clone(), geo.clone());
        let moved: PointEvaluator = Arc::new(move |x| Ok(apply_symmetry(&s2, &MPoint::new(base(x)?), &g2)?.coords));
        let f2 = MapField::from_fn(f1.mesh.clone(), geo.clone(), moved)?;
        let w = check_morphism(&log_derivative(&f1)?, &log_derivative(&f2)?, &s.l, &geo, 1e-7)?;
        println!(
            "{map:<18} on {geometry:<10} witness residual {:.2e}, injective {}, min singular value {:.3}",
            w.residual, w.injective, w.min_singular
        );
    }
    Ok(())
}
