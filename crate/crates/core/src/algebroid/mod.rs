//! Maurer-Cartan forms as anchored sub-bundles of `g + T(Sigma)`.
//!
//! A fiber over a domain point `x` is a frame of abstract vectors `a_j`,
//! each recorded by its form value `xi_j = omega(a_j)` and anchor
//! `v_j = #(a_j)`. Ordinary forms use the tangent frame `(omega(d_j), e_j)`.
//! Logarithmic derivatives of maps into `M` use the pullback fiber
//! `{(xi, v) : xi^dagger(f(x)) = Tf v}`.

mod axioms;
mod bracket;
mod fields;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::klein::{self, GeometrySpec, MPoint};
use crate::lie_core::{AlgebraElement, BracketSign, GroupSpec};
use crate::linalg;
use crate::monodromy::MeshDomain;

pub use axioms::{axiom_report, axiom_summary, solve_fixed_point, AxiomReport, NodeAxioms};
pub use bracket::{bracket_sections, frame_section, section_bracket, Section};
pub use fields::{grid_derivative, MapField, PointEvaluator, FD_STEP};

/// Relative singular-value band treated as an ambiguous rank of a
/// finite-difference tangent map.
pub const TF_RANK_TOL: f64 = 1e-7;
pub const TF_RANK_GAP: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct AlgebroidFiber {
    pub x: DVector<f64>,
    pub frame: Vec<(AlgebraElement, DVector<f64>)>,
    /// Frame vectors with zero anchor.
    pub kernel_index: Vec<usize>,
}

/// Minimum-norm right inverse `s` of the anchor in frame coordinates.
#[derive(Clone, Debug)]
pub struct RightInverse {
    /// `r x sigma`: frame coefficients of `s(e_k)`.
    pub coeffs: DMatrix<f64>,
    /// `d x sigma`: `omega(s(e_k))`.
    pub killing: DMatrix<f64>,
    /// Max-norm of `# s - I`.
    pub anchor_residual: f64,
}

impl AlgebroidFiber {
    pub fn new(x: DVector<f64>, frame: Vec<(AlgebraElement, DVector<f64>)>) -> Result<Self> {
        let sigma = x.len();
        if frame.iter().any(|(_, v)| v.len() != sigma) {
            return Err(Error::InvalidInput(format!(
                "anchor vectors must have {sigma} components"
            )));
        }
        if let Some((first, _)) = frame.first() {
            if frame.iter().any(|(xi, _)| xi.dim() != first.dim()) {
                return Err(Error::InvalidInput("frame algebra elements differ in dimension".into()));
            }
        }
        if frame
            .iter()
            .any(|(xi, v)| !xi.is_finite() || v.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::InvalidInput("frame has non-finite entries".into()));
        }
        let kernel_index = frame
            .iter()
            .enumerate()
            .filter(|(_, (_, v))| v.iter().all(|&c| c == 0.0))
            .map(|(i, _)| i)
            .collect();
        Ok(AlgebroidFiber { x, frame, kernel_index })
    }

    /// Tangent fiber of an ordinary form with `omega(d_j) = cols[j]`.
    pub fn tangent(x: DVector<f64>, cols: Vec<AlgebraElement>) -> Self {
        let sigma = x.len();
        let frame = cols
            .into_iter()
            .enumerate()
            .map(|(j, xi)| {
                let mut e = DVector::zeros(sigma);
                e[j] = 1.0;
                (xi, e)
            })
            .collect();
        AlgebroidFiber {
            x,
            frame,
            kernel_index: vec![],
        }
    }

    pub fn rank(&self) -> usize {
        self.frame.len()
    }

    pub fn sigma(&self) -> usize {
        self.x.len()
    }

    /// `d x r` matrix of form values.
    pub fn xi_matrix(&self, d: usize) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.frame.iter().map(|(xi, _)| xi.coeffs.clone()).collect();
        linalg::hstack(&cols, d)
    }

    /// `sigma x r` anchor matrix.
    pub fn anchor_matrix(&self) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.frame.iter().map(|(_, v)| v.clone()).collect();
        linalg::hstack(&cols, self.sigma())
    }

    /// `(d + sigma) x r` matrix of stacked pairs.
    pub fn stacked(&self, d: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(d + self.sigma(), self.rank());
        m.view_mut((0, 0), (d, self.rank())).copy_from(&self.xi_matrix(d));
        m.view_mut((d, 0), (self.sigma(), self.rank()))
            .copy_from(&self.anchor_matrix());
        m
    }

    /// Frame coefficients spanning the isotropy `ker #`.
    pub fn kernel_coeffs(&self, tol: f64) -> DMatrix<f64> {
        if self.rank() == 0 {
            return DMatrix::zeros(0, 0);
        }
        linalg::nullspace(&self.anchor_matrix(), tol)
    }

    /// `omega` of a basis of the isotropy.
    pub fn kernel_images(&self, d: usize, tol: f64) -> Vec<AlgebraElement> {
        let n = self.kernel_coeffs(tol);
        let imgs = self.xi_matrix(d) * &n;
        (0..imgs.ncols())
            .map(|j| AlgebraElement::new(imgs.column(j).into_owned()))
            .collect()
    }

    /// Orthogonal projector of `g + R^sigma` onto the span of the frame pairs.
    pub fn projector(&self, d: usize, tol: f64) -> DMatrix<f64> {
        linalg::projector(&linalg::range_basis(&self.stacked(d), tol))
    }

    pub fn right_inverse(&self, d: usize, tol: f64) -> Result<RightInverse> {
        let sigma = self.sigma();
        let v = self.anchor_matrix();
        let rank = if self.rank() == 0 { 0 } else { linalg::rank(&v, tol) };
        if rank < sigma {
            return Err(Error::NotTransitive {
                found: rank,
                expected: sigma,
            });
        }
        let coeffs = linalg::pinv(&v, tol);
        let anchor_residual = linalg::max_abs(&(&v * &coeffs - DMatrix::identity(sigma, sigma)));
        Ok(RightInverse {
            killing: self.xi_matrix(d) * &coeffs,
            coeffs,
            anchor_residual,
        })
    }
}

/// `omega_x(v)` for an ordinary form.
pub type OrdinaryEvaluator = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> Result<AlgebraElement> + Send + Sync>;
/// `omega(s_x(v))` as a shareable closure.
pub type XiAlong = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> Result<AlgebraElement> + Send + Sync>;
/// Killing map at a node and its anchor residual.
type NodeKilling = (DMatrix<f64>, f64);
/// Fiber of a generalized form at an arbitrary domain point.
pub type FiberEvaluator = Arc<dyn Fn(&DVector<f64>) -> Result<AlgebroidFiber> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormKind {
    Ordinary,
    Generalized,
}

#[derive(Clone)]
enum FormSource {
    Sampled,
    Ordinary(OrdinaryEvaluator),
    /// Fibers, and optionally a direct `omega(s_x(v))`.
    Generalized(FiberEvaluator, Option<XiAlong>),
}

#[derive(Clone)]
pub struct MCFormField {
    pub mesh: Arc<MeshDomain>,
    pub geometry: GeometrySpec,
    pub kind: FormKind,
    pub fibers: Vec<AlgebroidFiber>,
    /// The map whose logarithmic derivative this is, when known.
    pub map: Option<MapField>,
    /// Distance allowed between a section bracket and the fiber.
    pub fiber_tol: f64,
    node_killing: Arc<Vec<Option<NodeKilling>>>,
    source: FormSource,
}

impl std::fmt::Debug for MCFormField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MCFormField")
            .field("geometry", &self.geometry.name)
            .field("kind", &self.kind)
            .field("nodes", &self.fibers.len())
            .field("has_map", &self.map.is_some())
            .finish()
    }
}

impl MCFormField {
    fn assemble(
        mesh: Arc<MeshDomain>,
        geometry: GeometrySpec,
        kind: FormKind,
        fibers: Vec<AlgebroidFiber>,
        source: FormSource,
    ) -> Result<Self> {
        if fibers.len() != mesh.len() {
            return Err(Error::InvalidInput(format!(
                "{} fibers for {} mesh nodes",
                fibers.len(),
                mesh.len()
            )));
        }
        let d = geometry.group.dim();
        let sigma = mesh.sigma();
        for f in &fibers {
            if f.sigma() != sigma || f.frame.iter().any(|(xi, _)| xi.dim() != d) {
                return Err(Error::InvalidInput(
                    "fiber dimensions do not match the mesh and group".into(),
                ));
            }
        }
        let tol = geometry.group.lin_tol;
        let node_killing = Arc::new(
            fibers
                .par_iter()
                .map(|f| f.right_inverse(d, tol).ok().map(|r| (r.killing, r.anchor_residual)))
                .collect(),
        );
        Ok(MCFormField {
            mesh,
            geometry,
            kind,
            fibers,
            map: None,
            fiber_tol: 1e-6,
            node_killing,
            source,
        })
    }

    /// Ordinary form from `omega_x(v)`.
    pub fn ordinary(mesh: Arc<MeshDomain>, geometry: GeometrySpec, eval: OrdinaryEvaluator) -> Result<Self> {
        let sigma = mesh.sigma();
        let fibers = mesh
            .nodes
            .par_iter()
            .map(|x| {
                let cols = (0..sigma)
                    .map(|j| {
                        let mut e = DVector::zeros(sigma);
                        e[j] = 1.0;
                        eval(x, &e)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AlgebroidFiber::tangent(x.clone(), cols))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(mesh, geometry, FormKind::Ordinary, fibers, FormSource::Ordinary(eval))
    }

    /// Ordinary form from node samples `values[node][j] = omega(d_j)`.
    pub fn ordinary_sampled(
        mesh: Arc<MeshDomain>,
        geometry: GeometrySpec,
        values: Vec<Vec<AlgebraElement>>,
    ) -> Result<Self> {
        if values.len() != mesh.len() || values.iter().any(|v| v.len() != mesh.sigma()) {
            return Err(Error::InvalidInput(
                "ordinary samples need one value per node and direction".into(),
            ));
        }
        let fibers = values
            .into_iter()
            .zip(&mesh.nodes)
            .map(|(cols, x)| AlgebroidFiber::tangent(x.clone(), cols))
            .collect();
        Self::assemble(mesh, geometry, FormKind::Ordinary, fibers, FormSource::Sampled)
    }

    pub fn generalized(mesh: Arc<MeshDomain>, geometry: GeometrySpec, eval: FiberEvaluator) -> Result<Self> {
        let fibers = mesh.nodes.par_iter().map(|x| eval(x)).collect::<Result<Vec<_>>>()?;
        Self::assemble(
            mesh,
            geometry,
            FormKind::Generalized,
            fibers,
            FormSource::Generalized(eval, None),
        )
    }

    pub fn generalized_sampled(
        mesh: Arc<MeshDomain>,
        geometry: GeometrySpec,
        fibers: Vec<AlgebroidFiber>,
    ) -> Result<Self> {
        Self::assemble(mesh, geometry, FormKind::Generalized, fibers, FormSource::Sampled)
    }

    pub fn sigma(&self) -> usize {
        self.mesh.sigma()
    }

    pub fn algebra_dim(&self) -> usize {
        self.geometry.group.dim()
    }

    pub fn has_evaluator(&self) -> bool {
        !matches!(self.source, FormSource::Sampled)
    }

    /// Same form viewed against another geometry with the same group basis.
    pub fn with_geometry(&self, geometry: GeometrySpec) -> Result<Self> {
        if geometry.group.dim() != self.algebra_dim() {
            return Err(Error::InvalidInput("group dimensions differ".into()));
        }
        let mut out = self.clone();
        out.geometry = geometry;
        Ok(out)
    }

    fn node_at(&self, x: &DVector<f64>) -> Option<usize> {
        let candidate = match &self.mesh.grid {
            Some(g) => g.nearest(x),
            None => (0..self.mesh.len())
                .min_by(|&a, &b| {
                    (&self.mesh.nodes[a] - x)
                        .norm()
                        .total_cmp(&(&self.mesh.nodes[b] - x).norm())
                })
                .unwrap_or(0),
        };
        let dist = match &self.mesh.grid {
            Some(g) => (0..g.dim())
                .map(|k| {
                    let diff = x[k] - self.mesh.nodes[candidate][k];
                    if g.periodic[k] {
                        let p = g.period(k);
                        (diff - p * (diff / p).round()).abs()
                    } else {
                        diff.abs()
                    }
                })
                .fold(0.0, f64::max),
            None => (&self.mesh.nodes[candidate] - x).norm(),
        };
        (dist <= 1e-12 * x.norm().max(1.0)).then_some(candidate)
    }

    pub fn fiber_at(&self, x: &DVector<f64>) -> Result<AlgebroidFiber> {
        match &self.source {
            FormSource::Ordinary(eval) => {
                let sigma = self.sigma();
                let cols = (0..sigma)
                    .map(|j| {
                        let mut e = DVector::zeros(sigma);
                        e[j] = 1.0;
                        eval(x, &e)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AlgebroidFiber::tangent(x.clone(), cols))
            }
            FormSource::Generalized(eval, _) => eval(x),
            FormSource::Sampled => self
                .node_at(x)
                .map(|n| self.fibers[n].clone())
                .ok_or_else(|| Error::InvalidInput("sampled form evaluated off the mesh nodes".into())),
        }
    }

    /// `omega o s_x` as a `d x sigma` matrix, with the anchor residual of `s_x`.
    pub fn killing_at(&self, x: &DVector<f64>) -> Result<(DMatrix<f64>, f64)> {
        let d = self.algebra_dim();
        let tol = self.geometry.group.lin_tol;
        match &self.source {
            FormSource::Sampled => {
                if let Some(n) = self.node_at(x) {
                    return self.node_killing[n].clone().ok_or(Error::NotTransitive {
                        found: 0,
                        expected: self.sigma(),
                    });
                }
                let grid = self
                    .mesh
                    .grid
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("sampled form evaluated off the mesh nodes".into()))?;
                let mut k = DMatrix::zeros(d, self.sigma());
                let mut res: f64 = 0.0;
                for (n, w) in grid.locate(x) {
                    let (kn, rn) = self.node_killing[n].as_ref().ok_or(Error::NotTransitive {
                        found: 0,
                        expected: self.sigma(),
                    })?;
                    k += kn * w;
                    res = res.max(*rn);
                }
                Ok((k, res))
            }
            _ => {
                let f = self.fiber_at(x)?;
                let r = f.right_inverse(d, tol)?;
                Ok((r.killing, r.anchor_residual))
            }
        }
    }

    /// `omega(s_x(v))`: the lifted form value along a tangent vector.
    pub fn xi_along(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<AlgebraElement> {
        match &self.source {
            FormSource::Ordinary(eval) => return eval(x, v),
            FormSource::Generalized(_, Some(lift)) => return lift(x, v),
            _ => {}
        }
        let (k, _) = self.killing_at(x)?;
        Ok(AlgebraElement::new(k * v))
    }

    /// [`Self::xi_along`] as a closure that shares, rather than copies, the node data.
    pub fn xi_along_fn(&self) -> XiAlong {
        let light = MCFormField {
            mesh: self.mesh.clone(),
            geometry: self.geometry.clone(),
            kind: self.kind,
            fibers: Vec::new(),
            map: None,
            fiber_tol: self.fiber_tol,
            node_killing: self.node_killing.clone(),
            source: self.source.clone(),
        };
        Arc::new(move |x, v| light.xi_along(x, v))
    }

    /// Fiber projector in `g + R^sigma` at `x`, interpolated for sampled grid forms.
    pub fn projector_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.algebra_dim();
        let tol = self.geometry.group.lin_tol;
        if let FormSource::Sampled = self.source {
            if let Some(n) = self.node_at(x) {
                return Ok(self.fibers[n].projector(d, tol));
            }
            let grid = self
                .mesh
                .grid
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("sampled form evaluated off the mesh nodes".into()))?;
            let size = d + self.sigma();
            let mut p = DMatrix::zeros(size, size);
            for (n, w) in grid.locate(x) {
                p += self.fibers[n].projector(d, tol) * w;
            }
            return Ok(p);
        }
        Ok(self.fiber_at(x)?.projector(d, tol))
    }
}

/// Fiber of `A(f)` from the point `m = f(x)` and the tangent map `tf`
/// (ambient coordinates, `coord_dim x sigma`). Also returns the numerical rank of `tf`.
pub fn pullback_from_tangent(
    x: &DVector<f64>,
    m: &MPoint,
    tf: &DMatrix<f64>,
    geo: &GeometrySpec,
    node: usize,
) -> Result<(AlgebroidFiber, usize)> {
    let d = geo.group.dim();
    let sigma = x.len();
    let tol = geo.group.lin_tol;
    let basis = geo.tangent_basis(m);
    let j_t = basis.transpose() * geo.generator_matrix(m);
    let t_t = basis.transpose() * tf;
    let j_rank = linalg::rank(&j_t, tol);
    if j_rank < geo.dim {
        return Err(Error::NotTransitive {
            found: j_rank,
            expected: geo.dim,
        });
    }
    let tf_rank = if sigma == 0 || geo.dim == 0 {
        0
    } else {
        let sv = linalg::singular_values(&t_t);
        let top = sv.iter().copied().fold(0.0, f64::max).max(1.0);
        if let Some(s) = sv.iter().find(|&&s| s > TF_RANK_TOL * top && s <= TF_RANK_GAP * top) {
            return Err(Error::RankDeficient {
                node,
                detail: format!("tangent map singular value {s:.3e} is neither zero nor clearly nonzero"),
            });
        }
        sv.iter().filter(|&&s| s > TF_RANK_GAP * top).count()
    };
    let mut system = DMatrix::zeros(geo.dim, d + sigma);
    system.view_mut((0, 0), (geo.dim, d)).copy_from(&j_t);
    system.view_mut((0, d), (geo.dim, sigma)).copy_from(&(-&t_t));
    let fiber_basis = linalg::nullspace(&system, tol);
    let kernel = linalg::nullspace(&j_t, tol);
    let k = kernel.ncols();
    let mut kernel_emb = DMatrix::zeros(d + sigma, k);
    kernel_emb.view_mut((0, 0), (d, k)).copy_from(&kernel);
    let rest = &fiber_basis - &kernel_emb * (kernel_emb.transpose() * &fiber_basis);
    let complement = linalg::range_basis(&rest, 1e-8);
    let expected = d - geo.dim + sigma;
    if k + complement.ncols() != expected {
        return Err(Error::RankDeficient {
            node,
            detail: format!(
                "fiber dimension {} differs from dim g - dim M + sigma = {expected}",
                k + complement.ncols()
            ),
        });
    }
    let mut frame = Vec::with_capacity(expected);
    for j in 0..k {
        frame.push((
            AlgebraElement::new(kernel.column(j).into_owned()),
            DVector::zeros(sigma),
        ));
    }
    for j in 0..complement.ncols() {
        let c = complement.column(j);
        frame.push((
            AlgebraElement::new(c.rows(0, d).into_owned()),
            c.rows(d, sigma).into_owned(),
        ));
    }
    Ok((
        AlgebroidFiber {
            x: x.clone(),
            frame,
            kernel_index: (0..k).collect(),
        },
        tf_rank,
    ))
}

/// Minimum-norm `xi` with `generator(xi, m) = w`: the lift of a tangent
/// vector `w = Tf v` through an orthonormal frame of `A(f)`.
pub fn pullback_lift(m: &MPoint, w: &DVector<f64>, geo: &GeometrySpec) -> Result<AlgebraElement> {
    let basis = geo.tangent_basis(m);
    let j = basis.transpose() * geo.generator_matrix(m);
    let rhs = basis.transpose() * w;
    let y = (&j * j.transpose())
        .cholesky()
        .ok_or_else(|| Error::NotTransitive {
            found: linalg::rank(&j, geo.group.lin_tol),
            expected: geo.dim,
        })?
        .solve(&rhs);
    Ok(AlgebraElement::new(j.transpose() * y))
}

/// Fiber of `A(f)` at a mesh node.
pub fn pullback_fiber(f: &MapField, node: usize, geo: &GeometrySpec) -> Result<AlgebroidFiber> {
    let tf = f.tangent_map(node)?;
    pullback_from_tangent(&f.mesh.nodes[node], &f.values[node], &tf, geo, node).map(|p| p.0)
}

/// Generalized logarithmic derivative of a map into `M`: the projection on `A(f)`.
pub fn log_derivative(f: &MapField) -> Result<MCFormField> {
    let geo = f.geometry.clone();
    let nodes = f.mesh.len();
    let fibers = (0..nodes)
        .into_par_iter()
        .map(|n| {
            let tf = f.tangent_map(n)?;
            pullback_from_tangent(&f.mesh.nodes[n], &f.values[n], &tf, &geo, n)
        })
        .collect::<Result<Vec<_>>>()?;
    let rank0 = fibers[0].1;
    if let Some(n) = fibers.iter().position(|(_, r)| *r != rank0) {
        return Err(Error::RankDeficient {
            node: n,
            detail: format!(
                "tangent map rank {} differs from {} at the first node",
                fibers[n].1, rank0
            ),
        });
    }
    let fibers: Vec<AlgebroidFiber> = fibers.into_iter().map(|p| p.0).collect();
    let source = if f.has_evaluator() {
        let fm = f.clone();
        let g = geo.clone();
        let eval: FiberEvaluator = Arc::new(move |x| {
            let m = fm.value_at(x)?;
            let tf = fm.tangent_map_at(x)?;
            pullback_from_tangent(x, &m, &tf, &g, usize::MAX).map(|p| p.0)
        });
        let (fm, g) = (f.clone(), geo.clone());
        let lift: XiAlong = Arc::new(move |x, v| {
            let m = fm.value_at(x)?;
            pullback_lift(&m, &(fm.tangent_map_at(x)? * v), &g)
        });
        FormSource::Generalized(eval, Some(lift))
    } else {
        FormSource::Sampled
    };
    let mut form = MCFormField::assemble(f.mesh.clone(), geo, FormKind::Generalized, fibers, source)?;
    form.map = Some(f.clone());
    Ok(form)
}

/// Right logarithmic derivative `(d f) f^-1` of a group-valued map as an ordinary form.
pub fn log_derivative_ordinary(f: &MapField, spec: &GroupSpec) -> Result<MCFormField> {
    let geo = &f.geometry;
    if geo.action != klein::ActionKind::LeftRegular || geo.group.name() != spec.name() {
        return Err(Error::InvalidInput(format!(
            "log_derivative_ordinary needs a map into {} acting on itself, got {}",
            spec.name(),
            geo.name
        )));
    }
    let n = spec.n();
    let target = klein::left_regular(spec.clone());
    let project = move |dmat: DMatrix<f64>, fmat: &DMatrix<f64>, rel_tol: f64, spec: &GroupSpec| {
        let inv = fmat.clone().try_inverse().ok_or(Error::NotInGroup {
            group: spec.name().to_string(),
            residual: f64::INFINITY,
        })?;
        let w = dmat * inv;
        let (coeffs, residual) = spec.project(&w);
        if residual > rel_tol * linalg::max_abs(&w).max(1.0) {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(AlgebraElement::new(coeffs))
    };
    if f.has_evaluator() {
        let fm = f.clone();
        let sp = spec.clone();
        let eval: OrdinaryEvaluator = Arc::new(move |x, v| {
            let scale = v.norm();
            if scale == 0.0 {
                return Ok(AlgebraElement::zeros(sp.dim()));
            }
            let dir = v / scale;
            let fx = linalg::unflatten_row_major(&fm.value_at(x)?.coords, n, n);
            let dv = fm.directional_derivative(x, &dir)?;
            let dmat = linalg::unflatten_row_major(&dv, n, n);
            Ok(project(dmat, &fx, 1e-6, &sp)?.scale(scale))
        });
        let mut form = MCFormField::ordinary(f.mesh.clone(), target, eval)?;
        form.map = Some(f.clone());
        return Ok(form);
    }
    let grid =
        f.mesh.grid.as_ref().ok_or_else(|| {
            Error::InvalidInput("finite differences need a grid mesh or an analytic evaluator".into())
        })?;
    let h_max = (0..grid.dim()).map(|k| grid.spacing(k)).fold(0.0, f64::max);
    let rel_tol = (50.0 * h_max * h_max).max(1e-6);
    let values = (0..f.mesh.len())
        .into_par_iter()
        .map(|node| {
            let fx = linalg::unflatten_row_major(&f.values[node].coords, n, n);
            (0..grid.dim())
                .map(|k| {
                    let dv = grid_derivative(grid, node, k, |m| f.values[m].coords.clone());
                    project(linalg::unflatten_row_major(&dv, n, n), &fx, rel_tol, spec)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut form = MCFormField::ordinary_sampled(f.mesh.clone(), target, values)?;
    form.map = Some(f.clone());
    Ok(form)
}

/// Residual of the Maurer-Cartan equation (ordinary forms) or of the
/// algebroid morphism property (generalized forms) at every node.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualField {
    pub kind: FormKind,
    pub per_node: Vec<f64>,
    pub max: f64,
    pub argmax: usize,
    /// Largest `|generator(omega X, f(x)) - Tf #X|` (generalized forms with a known map).
    pub anchor_max: f64,
}

pub fn morphism_residual(omega: &MCFormField, geo: &GeometrySpec) -> Result<ResidualField> {
    let spec = &geo.group;
    let (per_node, anchor): (Vec<f64>, Vec<f64>) = match omega.kind {
        FormKind::Ordinary => {
            let grid = omega
                .mesh
                .grid
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("the Maurer-Cartan residual needs a grid mesh".into()))?;
            let sigma = grid.dim();
            (0..omega.mesh.len())
                .into_par_iter()
                .map(|node| {
                    let w = |n: usize, j: usize| omega.fibers[n].frame[j].0.coeffs.clone();
                    let mut worst: f64 = 0.0;
                    for a in 0..sigma {
                        for b in (a + 1)..sigma {
                            let da_wb = grid_derivative(grid, node, a, |n| w(n, b));
                            let db_wa = grid_derivative(grid, node, b, |n| w(n, a));
                            let br = crate::lie_core::bracket(
                                &omega.fibers[node].frame[a].0,
                                &omega.fibers[node].frame[b].0,
                                spec,
                            );
                            worst = worst.max((da_wb - db_wa + br.coeffs).norm());
                        }
                    }
                    (worst, 0.0)
                })
                .unzip()
        }
        FormKind::Generalized => {
            let h = match &omega.mesh.grid {
                Some(g) if !omega.has_evaluator() => (0..g.dim()).map(|k| g.spacing(k)).fold(f64::INFINITY, f64::min),
                _ => 1e-4,
            };
            let shared = Arc::new(omega.clone());
            let results = (0..omega.mesh.len())
                .into_par_iter()
                .map(|node| generalized_node_residual(&shared, geo, node, h))
                .collect::<Result<Vec<_>>>()?;
            results.into_iter().unzip()
        }
    };
    let (argmax, max) = per_node
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
    Ok(ResidualField {
        kind: omega.kind,
        per_node,
        max,
        argmax,
        anchor_max: anchor.into_iter().fold(0.0, f64::max),
    })
}

fn generalized_node_residual(omega: &Arc<MCFormField>, geo: &GeometrySpec, node: usize, h: f64) -> Result<(f64, f64)> {
    let fiber = &omega.fibers[node];
    let x = &omega.mesh.nodes[node];
    let d = geo.group.dim();
    let proj = omega.projector_at(x)?;
    let mut worst: f64 = 0.0;
    let sections: Vec<Section> = (0..fiber.rank())
        .map(|j| frame_section(omega.clone(), fiber, j))
        .collect();
    for i in 0..sections.len() {
        for j in (i + 1)..sections.len() {
            let s = section_bracket(&sections[i], &sections[j], &geo.group, h);
            let (xi, v) = s(x)?;
            let mut w = DVector::zeros(d + fiber.sigma());
            w.rows_mut(0, d).copy_from(&xi.coeffs);
            w.rows_mut(d, fiber.sigma()).copy_from(&v);
            worst = worst.max((&w - &proj * &w).norm());
        }
    }
    let mut anchor: f64 = 0.0;
    if let Some(f) = &omega.map {
        let tf = f.tangent_map(node)?;
        let m = &f.values[node];
        for (xi, v) in &fiber.frame {
            anchor = anchor.max((klein::generator(xi, m, geo) - &tf * v).norm());
        }
    }
    Ok((worst.max(anchor), anchor))
}

/// Picks the bracket sign that makes the residual of `(d f) f^-1` smallest.
/// Returns the sign and the max residuals for right-invariant and commutator signs.
pub fn calibrate_bracket_sign(f: &MapField, spec: &GroupSpec) -> Result<(BracketSign, f64, f64)> {
    let residual = |sign: BracketSign| -> Result<f64> {
        let s = spec.resigned(sign);
        let mut fm = f.clone();
        fm.geometry = klein::left_regular(s.clone());
        let omega = log_derivative_ordinary(&fm, &s)?;
        Ok(morphism_residual(&omega, &omega.geometry)?.max)
    };
    let right = residual(BracketSign::RightInvariant)?;
    let comm = residual(BracketSign::Commutator)?;
    let sign = if right <= comm {
        BracketSign::RightInvariant
    } else {
        BracketSign::Commutator
    };
    Ok((sign, right, comm))
}

pub fn anchor_right_inverse(omega: &MCFormField, node: usize) -> Result<RightInverse> {
    omega
        .fibers
        .get(node)
        .ok_or_else(|| Error::InvalidInput(format!("node {node} is not in the mesh")))?
        .right_inverse(omega.algebra_dim(), omega.geometry.group.lin_tol)
}
