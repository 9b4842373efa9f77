//! Isotropy algebras, actions and symmetry pairs for every catalog geometry.

use cartankit::klein::{
    act, apply_symmetry, catalog_names, geometry_by_name, isotropy_algebra, random_symmetry_pair,
    weakly_connected_report,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cartankit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for name in catalog_names() {
        let geo = geometry_by_name(name)?;
        let m = geo.random_point(&mut rng, 1.0);
        let iso = isotropy_algebra(&m, &geo)?;
        let g = geo.group.random_element(&mut rng, 1.0);
        let s = random_symmetry_pair(&geo, &mut rng, 1.0)?;
        // S(g m) = (l g l^-1) S(m)
        let lhs = apply_symmetry(&s, &act(&g, &m, &geo)?, &geo)?;
        let conj = s.l.compose(&g).compose(&s.l.inverse());
        let rhs = act(&conj, &apply_symmetry(&s, &m, &geo)?, &geo)?;
        let weak = weakly_connected_report(&geo)?;
        println!(
            "{name:<18} group dim {:>2}, space dim {}, isotropy dim {}, equivariance {:.2e}, weakly connected {} ({})",
            geo.group.dim(),
            geo.dim,
            iso.len(),
            lhs.distance(&rhs),
            weak.declared,
            if weak.consistent { "consistent" } else { "inconsistent" }
        );
    }
    Ok(())
}
