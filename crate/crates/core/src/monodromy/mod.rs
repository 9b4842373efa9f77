//! Development along mesh routes and pointed monodromy.

mod mesh;

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebroid::MCFormField;
use crate::error::{Error, Result};
use crate::klein::{self, GeometrySpec, MPoint};
use crate::lie_core::GroupElement;
use crate::linalg::RowMajor;
use crate::path_engine::{develop_with, APath, DevelopOptions, XiEvaluator};

pub use mesh::{cycle_basis, Cycle, GridInfo, MeshDomain, MeshEdge, Route};

#[derive(Clone, Debug)]
pub struct MeshOptions {
    /// Edge developments; `step` is measured in parameter length.
    pub develop: DevelopOptions,
    /// Max `|D m0 - m0|` for a cycle to count as trivial.
    pub triviality_tol: f64,
    /// Max generator residual of isotropy vectors on their base points.
    pub isotropy_tol: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions {
            develop: DevelopOptions {
                richardson: false,
                ..DevelopOptions::default()
            },
            triviality_tol: 1e-6,
            isotropy_tol: 1e-7,
        }
    }
}

impl MeshOptions {
    pub fn with_step(step: f64) -> Self {
        let mut o = Self::default();
        o.develop.step = step;
        o
    }
}

/// A-path over edge `e` of the form's mesh, lifted through the anchor right inverse.
pub fn edge_path(omega: &MCFormField, e: usize, forward: bool) -> Result<APath> {
    let mesh = &omega.mesh;
    if e >= mesh.edges.len() {
        return Err(Error::InvalidInput(format!("edge {e} is not in the mesh")));
    }
    let start = mesh.edge_start(e, forward);
    let delta = mesh.edge_delta(e, forward);
    let end = &start + &delta;
    let xi = omega.xi_along_fn();
    let (x, v) = (start.clone(), delta.clone());
    let eval: XiEvaluator = Arc::new(move |_, t| xi(&(&x + &v * t), &v));
    APath::from_evaluator(
        vec![0.0, 1.0],
        vec![0.0, 1.0],
        vec![start, end],
        eval,
        &format!("edge {e}"),
    )
}

fn develop_edge(omega: &MCFormField, e: usize, forward: bool, opts: &DevelopOptions) -> Result<GroupElement> {
    let path = edge_path(omega, e, forward)?;
    let length = omega.mesh.edge_delta(e, forward).norm();
    let mut o = opts.clone();
    if length > 0.0 {
        o.step = (opts.step / length).min(1.0);
    }
    Ok(develop_with(&path, &omega.geometry.group, &o)?.final_element)
}

/// Development along a route: the product of edge developments, later edges on the left.
pub fn develop_along(omega: &MCFormField, route: &Route, opts: &DevelopOptions) -> Result<GroupElement> {
    let mut g = omega.geometry.group.identity();
    for &(e, fwd) in &route.steps {
        g = develop_edge(omega, e, fwd, opts)?.compose(&g);
    }
    Ok(g)
}

/// Development from `x0` to every node along the spanning tree.
pub fn tree_developments(omega: &MCFormField, opts: &DevelopOptions) -> Result<Vec<GroupElement>> {
    let mesh = &omega.mesh;
    let edge_devs: Vec<Option<GroupElement>> = mesh
        .parent
        .par_iter()
        .map(|p| p.map(|(e, fwd)| develop_edge(omega, e, fwd, opts)).transpose())
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![omega.geometry.group.identity(); mesh.len()];
    for &node in &mesh.order {
        if let (Some((e, fwd)), Some(dev)) = (mesh.parent[node], &edge_devs[node]) {
            let edge = &mesh.edges[e];
            let from = if fwd { edge.a } else { edge.b };
            out[node] = dev.compose(&out[from]);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleMonodromy {
    pub closing_edge: usize,
    pub winding: Vec<f64>,
    pub contractible: bool,
    /// Development around the cycle.
    pub development: RowMajor,
    pub image: Vec<f64>,
    /// `|D m0 - m0|`
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonodromyReport {
    pub x0: usize,
    pub m0: Vec<f64>,
    pub cycles: Vec<CycleMonodromy>,
    pub trivial: bool,
    pub tolerance: f64,
}

impl MonodromyReport {
    pub fn max_deviation(&self) -> f64 {
        self.cycles.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }
}

/// Checks that `omega(ker #)` at `x0` fixes `m0`.
pub fn check_basepoint(omega: &MCFormField, m0: &MPoint, geo: &GeometrySpec, tol: f64) -> Result<()> {
    let d = geo.group.dim();
    let images = omega.fibers[omega.mesh.x0].kernel_images(d, geo.group.lin_tol);
    for (index, xi) in images.iter().enumerate() {
        let residual = klein::generator(xi, m0, geo).norm();
        if residual > tol * xi.norm().max(1.0) {
            return Err(Error::BasepointMismatch { index, residual });
        }
    }
    Ok(())
}

/// Tree developments and the monodromy of every fundamental cycle.
pub fn transport(
    omega: &MCFormField,
    m0: &MPoint,
    geo: &GeometrySpec,
    opts: &MeshOptions,
) -> Result<(Vec<GroupElement>, MonodromyReport)> {
    geo.point(m0.coords.clone())?;
    check_basepoint(omega, m0, geo, opts.isotropy_tol)?;
    let mesh = &omega.mesh;
    let tree = tree_developments(omega, &opts.develop)?;
    let cycles = mesh
        .cycles
        .par_iter()
        .map(|c| {
            let edge = &mesh.edges[c.closing_edge];
            let e = develop_edge(omega, c.closing_edge, true, &opts.develop)?;
            let dev = tree[edge.b].inverse().compose(&e.compose(&tree[edge.a]));
            let image = klein::act(&dev, m0, geo)?;
            Ok(CycleMonodromy {
                closing_edge: c.closing_edge,
                winding: c.winding.iter().copied().collect(),
                contractible: c.contractible(),
                development: RowMajor::from(&dev.mat),
                deviation: image.distance(m0),
                image: image.coords.iter().copied().collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let trivial = cycles.iter().all(|c| c.deviation <= opts.triviality_tol);
    let report = MonodromyReport {
        x0: mesh.x0,
        m0: m0.coords.iter().copied().collect(),
        cycles,
        trivial,
        tolerance: opts.triviality_tol,
    };
    log::debug!(
        "monodromy over {} cycles, max deviation {:.3e}",
        report.cycles.len(),
        report.max_deviation()
    );
    Ok((tree, report))
}

/// Pointed monodromy of `omega` at `(x0, m0)` over the mesh cycle basis.
pub fn pointed_monodromy(
    omega: &MCFormField,
    m0: &MPoint,
    geo: &GeometrySpec,
    opts: &MeshOptions,
) -> Result<MonodromyReport> {
    transport(omega, m0, geo, opts).map(|(_, r)| r)
}

/// Constant-coefficient form `omega(d_k) = xi_k` over a mesh.
pub fn constant_form(mesh: Arc<MeshDomain>, geo: GeometrySpec, cols: Vec<DVector<f64>>) -> Result<MCFormField> {
    let d = geo.group.dim();
    if cols.len() != mesh.sigma() || cols.iter().any(|c| c.len() != d) {
        return Err(Error::InvalidInput(
            "one algebra vector per domain direction is needed".into(),
        ));
    }
    let eval: crate::algebroid::OrdinaryEvaluator = Arc::new(move |_, v| {
        let mut out = DVector::zeros(d);
        for (k, c) in cols.iter().enumerate() {
            out += c * v[k];
        }
        Ok(crate::lie_core::AlgebraElement::new(out))
    });
    MCFormField::ordinary(mesh, geo, eval)
}

#[cfg(test)]
mod tests;
