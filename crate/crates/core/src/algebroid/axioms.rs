//! Checks of the Cartan-connection axioms on a form.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::MCFormField;
use crate::error::{Error, Result};
use crate::klein::{self, ActionKind, GeometrySpec, MPoint};
use crate::lie_core::AlgebraElement;
use crate::linalg;

/// Max generator residual allowed for a common fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct NodeAxioms {
    pub node: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    /// Anchor surjective.
    pub m1: bool,
    /// Smallest singular value of the anchor.
    pub m1_residual: f64,
    /// Form injective on the isotropy.
    pub m2: bool,
    /// Smallest singular value of the form restricted to the isotropy.
    pub m2_residual: f64,
    /// Dimension of `omega(ker #)` equals that of the stabilizer of its fixed point.
    pub m3_prime: Option<bool>,
    pub m3_prime_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub x0: usize,
    pub nodes: Vec<NodeAxioms>,
    pub m1: bool,
    pub m2: bool,
    /// `omega(ker #_x0)` fixes a point of `M`.
    pub m3: bool,
    pub m3_point: Option<Vec<f64>>,
    pub m3_residual: f64,
    pub rank_min: usize,
    pub rank_max: usize,
    /// `dim g - dim M`
    pub rank_lower: usize,
    /// `dim g - dim M + sigma`
    pub rank_upper: usize,
    pub rank_bounds: bool,
    pub maximal: bool,
    /// Checked only for maximal forms.
    pub m3_prime: Option<bool>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.m1 && self.m2 && self.m3 && self.rank_bounds && self.m3_prime != Some(false)
    }

    pub fn first_violation(&self) -> Option<Error> {
        let violated = |axiom: &str, node: usize, residual: f64| {
            Some(Error::AxiomViolated {
                axiom: axiom.to_string(),
                node,
                residual,
            })
        };
        if let Some(n) = self.nodes.iter().find(|n| !n.m1) {
            return violated("M1", n.node, n.m1_residual);
        }
        if let Some(n) = self.nodes.iter().find(|n| !n.m2) {
            return violated("M2", n.node, n.m2_residual);
        }
        if !self.m3 {
            return violated("M3", self.x0, self.m3_residual);
        }
        if let Some(n) = self
            .nodes
            .iter()
            .find(|n| n.rank < self.rank_lower || n.rank > self.rank_upper)
        {
            return violated("rank", n.node, n.rank as f64);
        }
        if let Some(n) = self.nodes.iter().find(|n| n.m3_prime == Some(false)) {
            return violated("M3'", n.node, n.m3_prime_residual.unwrap_or(f64::INFINITY));
        }
        None
    }
}

/// Common fixed point of the one-parameter subgroups of `images`, with the
/// largest generator residual there.
pub fn solve_fixed_point(images: &[AlgebraElement], geo: &GeometrySpec) -> Result<(MPoint, f64)> {
    if images.is_empty() {
        return Ok((geo.base_point.clone(), 0.0));
    }
    let spec = &geo.group;
    let mats: Vec<DMatrix<f64>> = images.iter().map(|xi| spec.realize(xi)).collect();
    let n = spec.n();
    let point = match geo.action {
        ActionKind::Affine => {
            let k = n - 1;
            let mut a = DMatrix::zeros(k * mats.len(), k);
            let mut b = DVector::zeros(k * mats.len());
            for (i, m) in mats.iter().enumerate() {
                a.view_mut((i * k, 0), (k, k)).copy_from(&m.view((0, 0), (k, k)));
                b.rows_mut(i * k, k).copy_from(&(-m.view((0, k), (k, 1))));
            }
            MPoint::new(linalg::pinv(&a, spec.lin_tol) * b)
        }
        ActionKind::Linear | ActionKind::Sphere => {
            let mut a = DMatrix::zeros(n * mats.len(), n);
            for (i, m) in mats.iter().enumerate() {
                a.view_mut((i * n, 0), (n, n)).copy_from(m);
            }
            let null = linalg::nullspace(&a, spec.lin_tol);
            if null.ncols() == 0 {
                let residual = linalg::min_singular(&a);
                return Ok((geo.base_point.clone(), residual));
            }
            let mut p = &null * (null.transpose() * &geo.base_point.coords);
            if p.norm() < 1e-8 {
                p = null.column(0).into_owned();
            }
            if geo.action == ActionKind::Sphere {
                p /= p.norm();
            }
            MPoint::new(p)
        }
        ActionKind::LeftRegular => geo.base_point.clone(),
    };
    let residual = images
        .iter()
        .map(|xi| klein::generator(xi, &point, geo).norm())
        .fold(0.0, f64::max);
    Ok((point, residual))
}

fn node_axioms(omega: &MCFormField, geo: &GeometrySpec, node: usize, maximal: bool) -> Result<NodeAxioms> {
    let fiber = &omega.fibers[node];
    let d = geo.group.dim();
    let tol = geo.group.lin_tol;
    let sigma = fiber.sigma();
    let v = fiber.anchor_matrix();
    let (m1, m1_residual) = if sigma == 0 {
        (true, 0.0)
    } else if fiber.rank() == 0 {
        (false, 0.0)
    } else {
        let sv = linalg::singular_values(&v);
        let top = sv.first().copied().unwrap_or(0.0);
        let s_sigma = sv.get(sigma - 1).copied().unwrap_or(0.0);
        (s_sigma > tol * top.max(1.0), s_sigma)
    };
    let kernel = fiber.kernel_coeffs(tol);
    let kernel_dim = kernel.ncols();
    let (m2, m2_residual) = if kernel_dim == 0 {
        (true, f64::INFINITY)
    } else {
        let s = linalg::min_singular(&(fiber.xi_matrix(d) * &kernel));
        (s > tol, s)
    };
    let (m3_prime, m3_prime_residual) = if maximal && m2 {
        let images = fiber.kernel_images(d, tol);
        let (m, residual) = solve_fixed_point(&images, geo)?;
        let iso = klein::isotropy_algebra(&m, geo).map(|i| i.len()).unwrap_or(usize::MAX);
        (Some(residual <= FIXED_POINT_TOL && iso == kernel_dim), Some(residual))
    } else {
        (None, None)
    };
    Ok(NodeAxioms {
        node,
        rank: fiber.rank(),
        kernel_dim,
        m1,
        m1_residual,
        m2,
        m2_residual,
        m3_prime,
        m3_prime_residual,
    })
}

/// Evaluates M1, M2, M3 at `x0`, the rank bounds, and M3' for maximal forms.
pub fn axiom_summary(omega: &MCFormField, geo: &GeometrySpec, x0: usize) -> Result<AxiomReport> {
    if x0 >= omega.mesh.len() {
        return Err(Error::InvalidInput(format!("x0 = {x0} is not a mesh node")));
    }
    if geo.group.dim() != omega.algebra_dim() {
        return Err(Error::InvalidInput("form and geometry use different algebras".into()));
    }
    let d = geo.group.dim();
    let sigma = omega.sigma();
    let rank_lower = d.saturating_sub(geo.dim);
    let rank_upper = rank_lower + sigma;
    let ranks: Vec<usize> = omega.fibers.iter().map(|f| f.rank()).collect();
    let maximal = ranks.iter().all(|&r| r == rank_upper);
    let nodes = (0..omega.mesh.len())
        .into_par_iter()
        .map(|n| node_axioms(omega, geo, n, maximal))
        .collect::<Result<Vec<_>>>()?;
    let images = omega.fibers[x0].kernel_images(d, geo.group.lin_tol);
    let (m3_point, m3_residual) = solve_fixed_point(&images, geo)?;
    let m3 = m3_residual <= FIXED_POINT_TOL;
    let m3_prime = maximal.then(|| nodes.iter().all(|n| n.m3_prime != Some(false)));
    Ok(AxiomReport {
        x0,
        m1: nodes.iter().all(|n| n.m1),
        m2: nodes.iter().all(|n| n.m2),
        m3,
        m3_point: m3.then(|| m3_point.coords.iter().copied().collect()),
        m3_residual,
        rank_min: ranks.iter().copied().min().unwrap_or(0),
        rank_max: ranks.iter().copied().max().unwrap_or(0),
        rank_lower,
        rank_upper,
        rank_bounds: ranks.iter().all(|&r| r >= rank_lower && r <= rank_upper),
        maximal,
        m3_prime,
        nodes,
    })
}

/// Like [`axiom_summary`], failing with the first violated axiom.
pub fn axiom_report(omega: &MCFormField, geo: &GeometrySpec, x0: usize) -> Result<AxiomReport> {
    let report = axiom_summary(omega, geo, x0)?;
    match report.first_violation() {
        Some(e) => Err(e),
        None => Ok(report),
    }
}
