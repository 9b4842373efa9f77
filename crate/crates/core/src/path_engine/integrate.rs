//! Fixed-step Lie-group integrators for `g' = Xi(t) g`, `g(0) = I`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::APath;
use crate::error::{Error, Result};
use crate::lie_core::{expm::expm, GroupElement, GroupSpec};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Fourth-order Runge-Kutta-Munthe-Kaas.
    Rkmk4,
    /// First-order exponential Euler, for diagnostics.
    LieEuler,
}

#[derive(Clone, Debug)]
pub struct DevelopOptions {
    /// Nominal step in path parameter units.
    pub step: f64,
    /// Bound on the Richardson estimate.
    pub tol: f64,
    pub integrator: Integrator,
    /// Integrate again at half step to estimate the error.
    pub richardson: bool,
}

impl Default for DevelopOptions {
    fn default() -> Self {
        DevelopOptions {
            step: 1e-3,
            tol: 1e-8,
            integrator: Integrator::Rkmk4,
            richardson: true,
        }
    }
}

impl DevelopOptions {
    pub fn with_step(step: f64) -> Self {
        DevelopOptions {
            step,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct DevelopmentResult {
    /// One element per sample of the path's `t_grid`.
    pub g_samples: Vec<GroupElement>,
    pub final_element: GroupElement,
    pub step: f64,
    pub err_est: Option<f64>,
}

fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Truncated inverse of the derivative of exp: `a - [u,a]/2 + [u,[u,a]]/12`.
fn dexpinv(u: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let ua = commutator(u, a);
    a - &ua * 0.5 + commutator(u, &ua) / 12.0
}

struct Stepper<'a> {
    path: &'a APath,
    spec: &'a GroupSpec,
    integrator: Integrator,
}

impl Stepper<'_> {
    fn field(&self, piece: usize, t: f64) -> Result<DMatrix<f64>> {
        Ok(self.spec.realize(&self.path.xi_in_piece(piece, t)?))
    }

    /// Advances `g` across `[a, b]` inside one piece with `n` equal steps.
    fn advance(&self, g: &mut DMatrix<f64>, piece: usize, a: f64, b: f64, n: usize) -> Result<()> {
        let h = (b - a) / n as f64;
        let mut left = self.field(piece, a)?;
        for i in 0..n {
            let t = a + i as f64 * h;
            let t_next = if i + 1 == n { b } else { t + h };
            let u = match self.integrator {
                Integrator::LieEuler => {
                    let u = &left * h;
                    if i + 1 < n {
                        left = self.field(piece, t_next)?;
                    }
                    u
                }
                Integrator::Rkmk4 => {
                    let mid = self.field(piece, t + 0.5 * h)?;
                    let right = self.field(piece, t_next)?;
                    let k1 = &left * h;
                    let k2 = dexpinv(&(&k1 * 0.5), &mid) * h;
                    let k3 = dexpinv(&(&k2 * 0.5), &mid) * h;
                    let k4 = dexpinv(&k3, &right) * h;
                    left = right;
                    (k1 + (k2 + k3) * 2.0 + k4) / 6.0
                }
            };
            *g = expm(&u) * &*g;
        }
        Ok(())
    }

    /// Integrates across the whole path, recording the value at every grid sample.
    fn run(&self, step: f64) -> Result<Vec<DMatrix<f64>>> {
        let path = self.path;
        let n = self.spec.n();
        let mut stops: Vec<f64> = path.t_grid.iter().chain(path.breaks.iter()).copied().collect();
        stops.sort_by(|a, b| a.total_cmp(b));
        stops.dedup();
        let mut g = DMatrix::identity(n, n);
        let mut samples = Vec::with_capacity(path.t_grid.len());
        let mut next_sample = 0;
        for w in 0..stops.len() {
            let t = stops[w];
            if w > 0 {
                let a = stops[w - 1];
                let piece = path.piece_of(a);
                let steps = (((t - a) / step) - 1e-9).ceil().max(1.0) as usize;
                self.advance(&mut g, piece, a, t, steps)?;
            }
            if next_sample < path.t_grid.len() && path.t_grid[next_sample] == t {
                samples.push(g.clone());
                next_sample += 1;
            }
        }
        Ok(samples)
    }
}

pub fn develop(path: &APath, spec: &GroupSpec, step: f64) -> Result<DevelopmentResult> {
    develop_with(path, spec, &DevelopOptions::with_step(step))
}

/// Solves `g'(t) = Xi(t) g(t)`, `g(0) = I` along the path.
pub fn develop_with(path: &APath, spec: &GroupSpec, opts: &DevelopOptions) -> Result<DevelopmentResult> {
    if !(opts.step > 0.0) || !opts.step.is_finite() {
        return Err(Error::InvalidInput(format!("step must be positive, got {}", opts.step)));
    }
    if path.algebra_dim() != spec.dim() {
        return Err(Error::InvalidInput(format!(
            "path lives in a {}-dimensional algebra, group has dimension {}",
            path.algebra_dim(),
            spec.dim()
        )));
    }
    let stepper = Stepper {
        path,
        spec,
        integrator: opts.integrator,
    };
    let samples = stepper.run(opts.step)?;
    let last = samples.last().cloned().expect("paths have at least two samples");
    let err_est = if opts.richardson {
        let fine = stepper.run(0.5 * opts.step)?;
        let order = match opts.integrator {
            Integrator::Rkmk4 => 4,
            Integrator::LieEuler => 1,
        };
        let diff = linalg::max_abs(&(&last - fine.last().expect("nonempty")));
        Some(diff / (2f64.powi(order) - 1.0))
    } else {
        None
    };
    if let Some(e) = err_est {
        if e > opts.tol {
            return Err(Error::StepTooLarge {
                estimate: e,
                tol: opts.tol,
            });
        }
    }
    Ok(DevelopmentResult {
        g_samples: samples.into_iter().map(GroupElement::from_matrix).collect(),
        final_element: GroupElement::from_matrix(last),
        step: opts.step,
        err_est,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::{self, group_by_name, membership_residual, AlgebraElement};
    use crate::path_engine::XiEvaluator;
    use nalgebra::DVector;
    use std::sync::Arc;

    fn line(n: usize) -> (Vec<f64>, Vec<DVector<f64>>) {
        let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let g = t.iter().map(|&s| DVector::from_element(1, s)).collect();
        (t, g)
    }

    #[test]
    fn zero_path_develops_to_identity() {
        let spec = group_by_name("se2").unwrap();
        let r = develop(&APath::zero(3, DVector::zeros(2)), &spec, 1e-3).unwrap();
        assert!(r.g_samples.iter().all(|g| *g == spec.identity()));
    }

    #[test]
    fn constant_xi_matches_exp() {
        let spec = group_by_name("se3").unwrap();
        let xi = AlgebraElement::from_slice(&[0.4, -1.1, 0.7, 1.0, 2.0, -0.5]);
        let p = APath::constant(xi.clone(), DVector::zeros(1), 11);
        let r = develop(&p, &spec, 1e-3).unwrap();
        for (t, g) in p.t_grid.iter().zip(&r.g_samples) {
            assert!(g.distance(&lie_core::exp(&xi.scale(*t), &spec)) < 1e-10);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let spec = group_by_name("so3").unwrap();
        let eval: XiEvaluator = Arc::new(|_, t| {
            Ok(AlgebraElement::from_slice(&[
                3.0 * (2.0 * t).cos(),
                2.0 * t * t,
                1.0 - 3.0 * (3.0 * t).sin(),
            ]))
        });
        let (t, g) = line(3);
        let p = APath::from_evaluator(t, vec![0.0, 1.0], g, eval, "smooth").unwrap();
        let mut opts = DevelopOptions::with_step(1e-3);
        opts.richardson = false;
        let exact = develop_with(&p, &spec, &opts).unwrap().final_element;
        let err = |h: f64| {
            let mut o = opts.clone();
            o.step = h;
            develop_with(&p, &spec, &o).unwrap().final_element.distance(&exact)
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}");
        let r = develop(&p, &spec, 1e-3).unwrap();
        assert!(r.g_samples.iter().all(|g| membership_residual(&g.mat, &spec) <= 1e-12));
    }

    #[test]
    fn coarse_step_is_reported() {
        let spec = group_by_name("so3").unwrap();
        let eval: XiEvaluator =
            Arc::new(|_, t| Ok(AlgebraElement::from_slice(&[20.0 * (9.0 * t).cos(), 5.0, 20.0 * t])));
        let (t, g) = line(2);
        let p = APath::from_evaluator(t, vec![0.0, 1.0], g, eval, "fast").unwrap();
        assert!(matches!(develop(&p, &spec, 0.25), Err(Error::StepTooLarge { .. })));
        assert!(develop(&p, &spec, -1.0).is_err());
    }
}
