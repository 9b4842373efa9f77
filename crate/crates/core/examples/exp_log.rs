//! Exponential, logarithm, adjoint action and brackets on the catalog groups.

use cartankit::lie_core::{self, group_by_name};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cartankit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for name in ["so2", "se2", "so3", "se3", "sl2"] {
        let spec = group_by_name(name)?;
        let xi = spec.random_algebra_element(&mut rng, 0.5);
        let eta = spec.random_algebra_element(&mut rng, 0.5);
        let g = lie_core::exp(&xi, &spec);
        let back = lie_core::log(&g, &spec)?;
        let roundtrip = (&back.coeffs - &xi.coeffs).norm();
        let membership = lie_core::membership_residual(&g.mat, &spec);
        // Ad_g [xi, eta] = [Ad_g xi, Ad_g eta]
        let lhs = lie_core::adjoint(&g, &lie_core::bracket(&xi, &eta, &spec), &spec)?;
        let rhs = lie_core::bracket(
            &lie_core::adjoint(&g, &xi, &spec)?,
            &lie_core::adjoint(&g, &eta, &spec)?,
            &spec,
        );
        println!(
            "{name:>4}: dim {}, log(exp) error {roundtrip:.2e}, membership {membership:.2e}, Ad bracket {:.2e}, Jacobi {:.2e}",
            spec.dim(),
            (&lhs.coeffs - &rhs.coeffs).norm(),
            spec.jacobi_residual()
        );
    }
    Ok(())
}
