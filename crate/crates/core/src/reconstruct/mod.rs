//! Primitives of Maurer-Cartan forms, morphism witnesses, and uniqueness up
//! to symmetry.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebroid::{log_derivative, MCFormField, MapField, PointEvaluator};
use crate::error::{Error, Result};
use crate::klein::{self, ActionKind, GeometrySpec, MPoint, SymmetryPair};
use crate::lie_core::{self, GroupElement, GroupSpec};
use crate::linalg;
use crate::monodromy::{transport, MeshDomain, MeshOptions, MonodromyReport};
use crate::path_engine::{develop_with, APath, XiEvaluator};

/// Residual allowed when solving for a morphism.
pub const MORPHISM_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct PrimitiveField {
    pub mesh: Arc<MeshDomain>,
    pub geometry: GeometrySpec,
    pub values: Vec<MPoint>,
    pub x0: usize,
    pub m0: MPoint,
    /// Development from `x0` to each node along the spanning tree.
    pub developments: Vec<GroupElement>,
    /// `(edge, |E f(a) - f(b)|)` for each closing edge.
    pub cycle_residuals: Vec<(usize, f64)>,
    pub max_residual: f64,
    /// Max over normalized isotropy vectors of `|generator(xi, f(x))|` per node.
    pub isotropy_residuals: Vec<f64>,
    pub monodromy: MonodromyReport,
    form: MCFormField,
    step: f64,
}

impl PrimitiveField {
    pub fn max_isotropy_residual(&self) -> f64 {
        self.isotropy_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Continuous extension: develops from the nearest node along a straight segment.
    pub fn to_map_field(&self) -> Result<MapField> {
        let form = self.form.xi_along_fn();
        let mesh = self.mesh.clone();
        let values = self.values.clone();
        let step = self.step;
        let spec = self.geometry.group.clone();
        let geo = self.geometry.clone();
        let eval: PointEvaluator = Arc::new(move |x| {
            let node = nearest_node(&mesh, x);
            let start = mesh.nodes[node].clone();
            let delta = x - &start;
            let len = delta.norm();
            if len == 0.0 {
                return Ok(values[node].coords.clone());
            }
            let f = form.clone();
            let (s, v) = (start.clone(), delta.clone());
            let xi: XiEvaluator = Arc::new(move |_, t| f(&(&s + &v * t), &v));
            let path = APath::from_evaluator(vec![0.0, 1.0], vec![0.0, 1.0], vec![start, x.clone()], xi, "extension")?;
            let mut o = crate::path_engine::DevelopOptions::with_step((step / len).min(1.0));
            o.richardson = false;
            let g = develop_with(&path, &spec, &o)?.final_element;
            Ok(klein::act(&g, &values[node], &geo)?.coords)
        });
        MapField::from_fn(self.mesh.clone(), self.geometry.clone(), eval)
    }
}

fn nearest_node(mesh: &MeshDomain, x: &DVector<f64>) -> usize {
    match &mesh.grid {
        Some(g) => g.nearest(x),
        None => (0..mesh.len())
            .min_by(|&a, &b| (&mesh.nodes[a] - x).norm().total_cmp(&(&mesh.nodes[b] - x).norm()))
            .unwrap_or(0),
    }
}

/// `f(x) = (development along the tree path x0 -> x) m0`.
pub fn reconstruct_primitive(
    omega: &MCFormField,
    m0: &MPoint,
    geo: &GeometrySpec,
    opts: &MeshOptions,
) -> Result<PrimitiveField> {
    let (tree, report) = transport(omega, m0, geo, opts)?;
    if !report.trivial {
        return Err(Error::NontrivialMonodromy(Box::new(report)));
    }
    let mesh = omega.mesh.clone();
    let values = tree
        .iter()
        .map(|g| klein::act(g, m0, geo))
        .collect::<Result<Vec<_>>>()?;
    let cycle_residuals: Vec<(usize, f64)> = mesh
        .cycles
        .iter()
        .zip(&report.cycles)
        .map(|(c, cm)| {
            let b = mesh.edges[c.closing_edge].b;
            let carried = klein::act(&tree[b], &MPoint::new(DVector::from_vec(cm.image.clone())), geo)?;
            Ok((c.closing_edge, carried.distance(&values[b])))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = geo.group.dim();
    let isotropy_residuals: Vec<f64> = (0..mesh.len())
        .into_par_iter()
        .map(|n| {
            omega.fibers[n]
                .kernel_images(d, geo.group.lin_tol)
                .iter()
                .filter(|xi| xi.norm() > 0.0)
                .map(|xi| klein::generator(&xi.scale(1.0 / xi.norm()), &values[n], geo).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    if let Some((node, &residual)) = isotropy_residuals
        .iter()
        .enumerate()
        .find(|(_, &r)| r > opts.isotropy_tol)
    {
        return Err(Error::IsotropyDrift { node, residual });
    }
    let max_residual = cycle_residuals.iter().map(|c| c.1).fold(0.0, f64::max);
    log::info!(
        "reconstructed {} nodes, max cycle residual {:.3e}",
        values.len(),
        max_residual
    );
    Ok(PrimitiveField {
        x0: mesh.x0,
        mesh,
        geometry: geo.clone(),
        values,
        m0: m0.clone(),
        developments: tree,
        cycle_residuals,
        max_residual,
        isotropy_residuals,
        monodromy: report,
        form: omega.clone(),
        step: opts.develop.step,
    })
}

/// Group-valued primitive `f(x) = (development to x) g0` of an ordinary form.
pub fn reconstruct_group_primitive(
    omega: &MCFormField,
    g0: &GroupElement,
    spec: &GroupSpec,
    opts: &MeshOptions,
) -> Result<PrimitiveField> {
    if spec.dim() != omega.algebra_dim() {
        return Err(Error::InvalidInput("form and group dimensions differ".into()));
    }
    let geo = klein::left_regular(spec.clone());
    let form = omega.with_geometry(geo.clone())?;
    let g0 = spec.element(g0.mat.clone())?;
    let m0 = MPoint::new(linalg::flatten_row_major(&g0.mat));
    reconstruct_primitive(&form, &m0, &geo, opts)
}

#[derive(Clone, Debug)]
pub struct MorphismWitness {
    pub l: GroupElement,
    /// Per node, `r2 x r1` frame coefficients of `lambda`.
    pub lambda: Vec<DMatrix<f64>>,
    pub node_residuals: Vec<f64>,
    pub residual: f64,
    /// Smallest singular value of `lambda` over nodes.
    pub min_singular: f64,
    pub injective: bool,
}

/// Solves `omega2(lambda a) = Ad_l omega1(a)` and `# lambda a = # a` node by node.
pub fn check_morphism(
    omega1: &MCFormField,
    omega2: &MCFormField,
    l: &GroupElement,
    geo: &GeometrySpec,
    tol: f64,
) -> Result<MorphismWitness> {
    if omega1.mesh.len() != omega2.mesh.len() || omega1.sigma() != omega2.sigma() {
        return Err(Error::InvalidInput("forms live on different meshes".into()));
    }
    let spec = &geo.group;
    let d = spec.dim();
    if omega1.algebra_dim() != d || omega2.algebra_dim() != d {
        return Err(Error::InvalidInput("forms and geometry use different algebras".into()));
    }
    let l = spec.element(l.mat.clone())?;
    let lin_tol = spec.lin_tol;
    let solved = (0..omega1.mesh.len())
        .into_par_iter()
        .map(|n| {
            let f1 = &omega1.fibers[n];
            let f2 = &omega2.fibers[n];
            let mut target = f1.stacked(d);
            for (j, (xi, _)) in f1.frame.iter().enumerate() {
                target
                    .view_mut((0, j), (d, 1))
                    .copy_from(&lie_core::adjoint(&l, xi, spec)?.coeffs);
            }
            let a = f2.stacked(d);
            let lambda = linalg::pinv(&a, lin_tol) * &target;
            let residual = (&a * &lambda - &target)
                .column_iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            let scale = linalg::max_abs(&target).max(1.0);
            if residual > tol * scale {
                return Err(Error::NoSolution { node: n, residual });
            }
            let smin = if lambda.ncols() == 0 {
                f64::INFINITY
            } else if lambda.nrows() < lambda.ncols() {
                0.0
            } else {
                linalg::min_singular(&lambda)
            };
            Ok((lambda, residual, smin))
        })
        .collect::<Result<Vec<_>>>()?;
    let min_singular = solved.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let node_residuals: Vec<f64> = solved.iter().map(|s| s.1).collect();
    Ok(MorphismWitness {
        l,
        residual: node_residuals.iter().copied().fold(0.0, f64::max),
        node_residuals,
        lambda: solved.into_iter().map(|s| s.0).collect(),
        injective: min_singular > lin_tol,
        min_singular,
    })
}

/// Witness that `f` is a principal primitive of `omega` (morphism into `A(f)` with `l = I`).
pub fn verify_principal_primitive(
    omega: &MCFormField,
    f: &MapField,
    geo: &GeometrySpec,
    tol: f64,
) -> Result<MorphismWitness> {
    if !Arc::ptr_eq(&omega.mesh, &f.mesh) && omega.mesh.nodes != f.mesh.nodes {
        return Err(Error::InvalidInput("form and map live on different meshes".into()));
    }
    let df = log_derivative(f)?;
    check_morphism(omega, &df, &geo.group.identity(), geo, tol)
}

/// A proposed relation between two maps.
#[derive(Clone, Debug)]
pub enum Candidate {
    /// `f2 = f1 g` for maps into a group; `g` is computed.
    RightTranslation,
    Symmetry(SymmetryPair),
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessVerdict {
    pub related: bool,
    /// Row-major right translation, for the group case.
    pub translation: Option<Vec<f64>>,
    pub deviation: f64,
    pub node: usize,
}

pub fn uniqueness_up_to_symmetry(
    f1: &MapField,
    f2: &MapField,
    candidate: &Candidate,
    geo: &GeometrySpec,
    tol: f64,
) -> Result<UniquenessVerdict> {
    if f1.values.len() != f2.values.len() {
        return Err(Error::InvalidInput("maps live on different meshes".into()));
    }
    let worst = |devs: Vec<f64>| {
        devs.into_iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc })
    };
    let (node, deviation, translation) = match candidate {
        Candidate::RightTranslation => {
            if geo.action != ActionKind::LeftRegular {
                return Err(Error::InvalidInput("right translations need a group-valued map".into()));
            }
            let n = geo.group.n();
            let mat = |m: &MPoint| linalg::unflatten_row_major(&m.coords, n, n);
            let g_of = |i: usize| -> Result<DMatrix<f64>> {
                let a = mat(&f1.values[i]).try_inverse().ok_or(Error::NotInGroup {
                    group: geo.group.name().to_string(),
                    residual: f64::INFINITY,
                })?;
                Ok(a * mat(&f2.values[i]))
            };
            let x0 = f1.mesh.x0;
            let g = g_of(x0)?;
            let devs = (0..f1.values.len())
                .map(|i| Ok(linalg::max_abs(&(g_of(i)? - &g))))
                .collect::<Result<Vec<_>>>()?;
            let (node, dev) = worst(devs);
            (node, dev, Some(linalg::flatten_row_major(&g).iter().copied().collect()))
        }
        Candidate::Symmetry(s) => {
            let devs = f1
                .values
                .iter()
                .zip(&f2.values)
                .map(|(a, b)| Ok(klein::apply_symmetry(s, a, geo)?.distance(b)))
                .collect::<Result<Vec<_>>>()?;
            let (node, dev) = worst(devs);
            (node, dev, None)
        }
    };
    if deviation > tol {
        return Err(Error::NotRelated { deviation, node });
    }
    Ok(UniquenessVerdict {
        related: true,
        translation,
        deviation,
        node,
    })
}

/// Best rigid motion carrying `f1` onto `f2` (Kabsch), as a symmetry pair with `r = I`.
/// Reflections are allowed when the geometry has a reflection component.
pub fn procrustes_candidate(f1: &MapField, f2: &MapField, geo: &GeometrySpec) -> Result<SymmetryPair> {
    if !geo.euclidean {
        return Err(Error::InvalidInput(format!("{} is not Euclidean", geo.name)));
    }
    let k = geo.dim;
    let count = f1.values.len() as f64;
    let centroid = |vals: &[MPoint]| vals.iter().fold(DVector::zeros(k), |acc, m| acc + &m.coords) / count;
    let (c1, c2) = (centroid(&f1.values), centroid(&f2.values));
    let mut h = DMatrix::zeros(k, k);
    for (a, b) in f1.values.iter().zip(&f2.values) {
        h += (&b.coords - &c2) * (&a.coords - &c1).transpose();
    }
    let svd = linalg::svd(&h);
    let (u, vt) = (svd.u, svd.v.transpose());
    let mut rot = &u * &vt;
    if rot.determinant() < 0.0 && geo.isotropy_components.is_empty() {
        let mut fix = DMatrix::identity(k, k);
        fix[(k - 1, k - 1)] = -1.0;
        rot = &u * fix * &vt;
    }
    let t = &c2 - &rot * &c1;
    let mut l = DMatrix::identity(k + 1, k + 1);
    l.view_mut((0, 0), (k, k)).copy_from(&rot);
    l.view_mut((0, k), (k, 1)).copy_from(&t);
    klein::is_symmetry_pair(
        &GroupElement::from_matrix(l),
        &geo.group.identity(),
        &geo.base_point,
        geo,
    )
}

/// Procrustes fit (Euclidean geometries) followed by `count` random catalog pairs.
pub fn catalog_candidates<R: Rng + ?Sized>(
    f1: &MapField,
    f2: &MapField,
    geo: &GeometrySpec,
    rng: &mut R,
    count: usize,
) -> Result<Vec<SymmetryPair>> {
    let mut out = Vec::with_capacity(count + 1);
    if geo.euclidean {
        out.push(procrustes_candidate(f1, f2, geo)?);
    }
    for _ in 0..count {
        out.push(klein::random_symmetry_pair(geo, rng, 1.0)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
