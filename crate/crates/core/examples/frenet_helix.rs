//! Curves in space from constant curvature and torsion: a closed circle and
//! a helix whose radius and pitch match the closed-form values.

use std::f64::consts::PI;

use cartankit::klein::{act, frenet_xi, geometry_by_name, FrenetInput};
use cartankit::path_engine::{develop_with, DevelopOptions};

fn main() -> cartankit::Result<()> {
    let geo = geometry_by_name("se3-space")?;
    for (kappa, tau) in [(1.0_f64, 0.0_f64), (1.0, 1.0), (2.0, 0.5)] {
        let length = 2.0 * PI / (kappa * kappa + tau * tau).sqrt();
        let input = FrenetInput::constant(length, kappa, Some(tau), 257);
        let opts = DevelopOptions::with_step(1e-3);
        let path = frenet_xi(&input, &geo, &opts)?;
        let mut o = opts.clone();
        o.step /= length;
        o.richardson = false;
        let dev = develop_with(&path, &geo.group, &o)?;
        let end = act(&dev.final_element, &geo.base_point, &geo)?.coords;
        let w2 = kappa * kappa + tau * tau;
        println!(
            "kappa {kappa}, tau {tau}: one turn ends at {:.6?}; radius {:.4}, pitch {:.4}",
            end.as_slice(),
            kappa / w2,
            2.0 * PI * tau / w2
        );
    }
    Ok(())
}
