//! Klein geometries: transitive matrix-group actions on point spaces.
//!
//! Three action shapes cover the catalog. `Affine` acts on `R^k` through the
//! `(k+1) x (k+1)` affine block, `Sphere` is the linear action restricted to
//! the unit sphere, and `LeftRegular` is a group acting on itself with points
//! stored as row-major flattened matrices.

mod catalog;
mod frenet;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_core::{self, AlgebraElement, GroupElement, GroupSpec};
use crate::linalg;

pub use catalog::{catalog_names, geometry_by_name, left_regular};
pub use frenet::{frenet_xi, FrenetInput};

pub const DEFAULT_POINT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    /// `m -> A m + b`, points are the first `n - 1` homogeneous coordinates.
    Affine,
    /// `m -> g m` on `R^n`.
    Linear,
    /// `m -> g m` restricted to `|m| = 1`.
    Sphere,
    /// `M = G` with `m -> g m` (matrix product), points flattened row-major.
    LeftRegular,
}

/// A point of `M` in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct MPoint {
    pub coords: DVector<f64>,
}

impl MPoint {
    pub fn new(coords: DVector<f64>) -> Self {
        MPoint { coords }
    }

    pub fn from_slice(c: &[f64]) -> Self {
        MPoint {
            coords: DVector::from_column_slice(c),
        }
    }

    pub fn distance(&self, other: &MPoint) -> f64 {
        (&self.coords - &other.coords).norm()
    }
}

#[derive(Clone, Debug)]
pub struct GeometrySpec {
    pub name: String,
    pub group: GroupSpec,
    pub action: ActionKind,
    /// Manifold dimension of `M`.
    pub dim: usize,
    /// Length of the coordinate vector of a point.
    pub coord_dim: usize,
    pub base_point: MPoint,
    /// Representatives of the components of the stabilizer of `base_point`.
    pub isotropy_components: Vec<DMatrix<f64>>,
    /// Catalog elements normalizing the stabilizer of `base_point` beyond the
    /// stabilizer itself.
    pub normalizer_reps: Vec<DMatrix<f64>>,
    pub weakly_connected: bool,
    /// Rigid motions of `R^2` or `R^3`.
    pub euclidean: bool,
    pub tol: f64,
}

/// A validated normalizer pair `(l, r)` inducing `g m0 -> l g r^-1 m0`.
#[derive(Clone, Debug)]
pub struct SymmetryPair {
    pub l: GroupElement,
    pub r: GroupElement,
    pub m0: MPoint,
    pub normalizer_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakConnectednessReport {
    pub geometry: String,
    pub declared: bool,
    pub isotropy_dim: usize,
    /// Dimension of the algebra normalizer from structure constants.
    pub normalizer_dim_bracket: usize,
    /// Dimension of the algebra normalizer from matrix conjugation.
    pub normalizer_dim_adjoint: usize,
    /// Max generator residual of `Ad_h` applied to the isotropy algebra over
    /// the catalog component representatives `h`.
    pub component_residual: f64,
    pub consistent: bool,
}

impl GeometrySpec {
    /// Checks the coordinate length and the constraint locus.
    pub fn point(&self, coords: DVector<f64>) -> Result<MPoint> {
        if coords.len() != self.coord_dim {
            return Err(Error::InvalidInput(format!(
                "{} expects {} point coordinates, got {}",
                self.name,
                self.coord_dim,
                coords.len()
            )));
        }
        let m = MPoint { coords };
        let residual = self.constraint_residual(&m);
        if residual > self.tol {
            return Err(Error::ConstraintViolated {
                geometry: self.name.clone(),
                residual,
            });
        }
        Ok(m)
    }

    pub fn constraint_residual(&self, m: &MPoint) -> f64 {
        if m.coords.len() != self.coord_dim || m.coords.iter().any(|x| !x.is_finite()) {
            return f64::INFINITY;
        }
        match self.action {
            ActionKind::Affine | ActionKind::Linear => 0.0,
            ActionKind::Sphere => (m.coords.norm_squared() - 1.0).abs(),
            ActionKind::LeftRegular => {
                let n = self.group.n();
                let mat = linalg::unflatten_row_major(&m.coords, n, n);
                lie_core::membership_residual(&mat, &self.group)
            }
        }
    }

    /// The point as a matrix (left-regular) or column vector otherwise.
    fn point_matrix(&self, m: &MPoint) -> DMatrix<f64> {
        match self.action {
            ActionKind::LeftRegular => {
                let n = self.group.n();
                linalg::unflatten_row_major(&m.coords, n, n)
            }
            _ => DMatrix::from_column_slice(m.coords.len(), 1, m.coords.as_slice()),
        }
    }

    /// Generator matrix at `m`: column `j` is the infinitesimal generator of `E_j`.
    pub fn generator_matrix(&self, m: &MPoint) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = (0..self.group.dim())
            .map(|j| self.generator_of_matrix(&self.group.basis()[j], m))
            .collect();
        linalg::hstack(&cols, self.coord_dim)
    }

    fn generator_of_matrix(&self, xi: &DMatrix<f64>, m: &MPoint) -> DVector<f64> {
        match self.action {
            ActionKind::Affine => {
                let k = self.coord_dim;
                let lin = xi.view((0, 0), (k, k));
                let trans = xi.view((0, k), (k, 1));
                lin * &m.coords + trans
            }
            ActionKind::Linear | ActionKind::Sphere => xi * &m.coords,
            ActionKind::LeftRegular => linalg::flatten_row_major(&(xi * self.point_matrix(m))),
        }
    }

    /// Orthonormal basis of `T_m M` in ambient coordinates.
    pub fn tangent_basis(&self, m: &MPoint) -> DMatrix<f64> {
        match self.action {
            ActionKind::Affine | ActionKind::Linear => DMatrix::identity(self.coord_dim, self.coord_dim),
            ActionKind::Sphere => {
                let row = DMatrix::from_row_slice(1, self.coord_dim, m.coords.as_slice());
                linalg::nullspace(&row, self.group.lin_tol)
            }
            ActionKind::LeftRegular => linalg::range_basis(&self.generator_matrix(m), self.group.lin_tol),
        }
    }

    /// Group element carrying `base_point` to `m`, by catalog closed form.
    pub fn coset_representative(&self, m: &MPoint) -> Result<GroupElement> {
        let n = self.group.n();
        let g = match self.action {
            ActionKind::Affine => {
                let mut t = DMatrix::identity(n, n);
                let shift = &m.coords - &self.base_point.coords;
                t.view_mut((0, n - 1), (n - 1, 1)).copy_from(&shift);
                t
            }
            ActionKind::Sphere => rotation_between(&self.base_point.coords, &m.coords),
            ActionKind::LeftRegular => {
                let b = self.point_matrix(&self.base_point);
                self.point_matrix(m)
                    * b.try_inverse().ok_or(Error::RepresentativeNotFound {
                        residual: f64::INFINITY,
                    })?
            }
            ActionKind::Linear => {
                return Err(Error::RepresentativeNotFound {
                    residual: f64::INFINITY,
                })
            }
        };
        let g = GroupElement::from_matrix(g);
        let residual = act_unchecked(&g, &self.base_point, self).distance(m);
        if residual > self.tol.max(1e-9)
            || lie_core::membership_residual(&g.mat, &self.group) > self.group.membership_tol
        {
            return Err(Error::RepresentativeNotFound { residual });
        }
        Ok(g)
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> MPoint {
        let g = self.group.random_element(rng, scale);
        act_unchecked(&g, &self.base_point, self)
    }

    pub fn is_free(&self) -> bool {
        self.group.dim() == self.dim
    }
}

/// Rotation in the plane of `a` and `b` taking unit vector `a` to unit vector `b`.
fn rotation_between(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    let n = a.len();
    let ident = DMatrix::<f64>::identity(n, n);
    let a = a.normalize();
    let b = b.normalize();
    let c = a.dot(&b);
    if c > -1.0 + 1e-8 {
        let k = &b * a.transpose() - &a * b.transpose();
        return &ident + &k + &k * &k / (1.0 + c);
    }
    // antipodal: half-turn in a plane containing a
    let mut u = DVector::zeros(n);
    let j = (0..n).min_by(|&i, &k| a[i].abs().total_cmp(&a[k].abs())).unwrap_or(0);
    u[j] = 1.0;
    let u = (&u - &a * a.dot(&u)).normalize();
    ident - &a * a.transpose() * 2.0 - &u * u.transpose() * 2.0
}

fn act_unchecked(g: &GroupElement, m: &MPoint, geo: &GeometrySpec) -> MPoint {
    let coords = match geo.action {
        ActionKind::Affine => {
            let k = geo.coord_dim;
            let a = g.mat.view((0, 0), (k, k));
            let b = g.mat.view((0, k), (k, 1));
            a * &m.coords + b
        }
        ActionKind::Linear | ActionKind::Sphere => &g.mat * &m.coords,
        ActionKind::LeftRegular => linalg::flatten_row_major(&(&g.mat * geo.point_matrix(m))),
    };
    MPoint { coords }
}

pub fn act(g: &GroupElement, m: &MPoint, geo: &GeometrySpec) -> Result<MPoint> {
    let out = act_unchecked(g, m, geo);
    let residual = geo.constraint_residual(&out);
    if residual > geo.tol {
        return Err(Error::ConstraintViolated {
            geometry: geo.name.clone(),
            residual,
        });
    }
    Ok(out)
}

/// `d/dt act(exp(t xi), m)` at `t = 0`.
pub fn generator(xi: &AlgebraElement, m: &MPoint, geo: &GeometrySpec) -> DVector<f64> {
    geo.generator_of_matrix(&geo.group.realize(xi), m)
}

/// Basis of `g_m`, the stabilizer subalgebra at `m`.
pub fn isotropy_algebra(m: &MPoint, geo: &GeometrySpec) -> Result<Vec<AlgebraElement>> {
    let gm = geo.generator_matrix(m);
    let rank = linalg::rank(&gm, geo.group.lin_tol);
    if rank < geo.dim {
        return Err(Error::NotTransitive {
            found: rank,
            expected: geo.dim,
        });
    }
    let null = linalg::nullspace(&gm, geo.group.lin_tol);
    Ok((0..null.ncols())
        .map(|j| AlgebraElement::new(null.column(j).into_owned()))
        .collect())
}

/// Whether `g` fixes `m`, with the displacement as residual.
pub fn isotropy_contains(g: &GroupElement, m: &MPoint, geo: &GeometrySpec) -> (bool, f64) {
    let residual = act_unchecked(g, m, geo).distance(m);
    (residual <= geo.tol, residual)
}

/// Validates that `r` normalizes the stabilizer of `m0`.
pub fn is_symmetry_pair(l: &GroupElement, r: &GroupElement, m0: &MPoint, geo: &GeometrySpec) -> Result<SymmetryPair> {
    let l = geo.group.element(l.mat.clone())?;
    let r = geo.group.element(r.mat.clone())?;
    let m0 = geo.point(m0.coords.clone())?;
    let iso = isotropy_algebra(&m0, geo)?;
    let mut algebra_res: f64 = 0.0;
    for h in &iso {
        let moved = lie_core::adjoint(&r, h, &geo.group)?;
        algebra_res = algebra_res.max(generator(&moved, &m0, geo).norm());
    }
    let tol = geo.tol.max(geo.group.lin_tol);
    if algebra_res > tol {
        return Err(Error::NotNormalizing {
            residual: algebra_res,
            reason: "Ad_r moves the isotropy algebra".into(),
        });
    }
    let k = geo.coset_representative(&m0)?;
    let k_inv = k.inverse();
    let r_inv = r.inverse();
    let mut component_res: f64 = 0.0;
    for h in &geo.isotropy_components {
        // component representative transported to the stabilizer of m0
        let h_m0 = &k.mat * h * &k_inv.mat;
        let conj = GroupElement::from_matrix(&r.mat * h_m0 * &r_inv.mat);
        component_res = component_res.max(isotropy_contains(&conj, &m0, geo).1);
    }
    if component_res > tol {
        return Err(Error::NotNormalizing {
            residual: component_res,
            reason: "r h r^-1 moves m0 for a component representative h".into(),
        });
    }
    Ok(SymmetryPair {
        l,
        r,
        m0,
        normalizer_residual: algebra_res.max(component_res),
    })
}

/// Random validated pair at the base point: `l` in `G` (any catalog component),
/// `r` in the stabilizer times a normalizer representative.
pub fn random_symmetry_pair<R: Rng + ?Sized>(geo: &GeometrySpec, rng: &mut R, scale: f64) -> Result<SymmetryPair> {
    let spec = &geo.group;
    let m0 = &geo.base_point;
    let pick = |rng: &mut R, reps: &[DMatrix<f64>]| -> DMatrix<f64> {
        let i = rng.gen_range(0..=reps.len());
        reps.get(i)
            .cloned()
            .unwrap_or_else(|| DMatrix::identity(spec.n(), spec.n()))
    };
    let l = &spec.random_element(rng, scale).mat * pick(rng, &geo.isotropy_components);
    let iso = isotropy_algebra(m0, geo)?;
    let r = if iso.is_empty() && geo.isotropy_components.is_empty() {
        spec.random_element(rng, scale).mat
    } else {
        let mut eta = AlgebraElement::zeros(spec.dim());
        for h in &iso {
            eta = &eta + &h.scale(rng.gen_range(-scale..scale));
        }
        lie_core::exp(&eta, spec).mat * pick(rng, &geo.isotropy_components) * pick(rng, &geo.normalizer_reps)
    };
    is_symmetry_pair(&GroupElement::from_matrix(l), &GroupElement::from_matrix(r), m0, geo)
}

/// `m = g m0 -> l g r^-1 m0`.
pub fn apply_symmetry(s: &SymmetryPair, m: &MPoint, geo: &GeometrySpec) -> Result<MPoint> {
    let k_m = geo.coset_representative(m)?;
    let k_m0 = geo.coset_representative(&s.m0)?;
    let g = k_m.compose(&k_m0.inverse());
    let residual = act_unchecked(&g, &s.m0, geo).distance(m);
    if residual > geo.tol.max(1e-9) {
        return Err(Error::RepresentativeNotFound { residual });
    }
    let h = s.l.compose(&g).compose(&s.r.inverse());
    act(&h, &s.m0, geo)
}

pub fn weakly_connected_report(geo: &GeometrySpec) -> Result<WeakConnectednessReport> {
    let spec = &geo.group;
    let d = spec.dim();
    let m0 = &geo.base_point;
    let iso = isotropy_algebra(m0, geo)?;
    let gm = geo.generator_matrix(m0);
    let tol = spec.lin_tol;

    // n(h) = { xi : [xi, h_i] in h for all i }, membership in h tested by the generator at m0
    let mut rows_bracket = Vec::new();
    let mut rows_adjoint = Vec::new();
    for h in &iso {
        let mut ad_b = DMatrix::zeros(d, d);
        let mut ad_m = DMatrix::zeros(d, d);
        let hm = spec.realize(h);
        for j in 0..d {
            let ej = spec.basis_element(j);
            ad_b.set_column(j, &lie_core::bracket(&ej, h, spec).coeffs);
            let comm = &spec.basis()[j] * &hm - &hm * &spec.basis()[j];
            ad_m.set_column(j, &spec.project(&comm).0);
        }
        rows_bracket.push(&gm * ad_b);
        rows_adjoint.push(&gm * ad_m);
    }
    let stack = |blocks: &[DMatrix<f64>]| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(blocks.len() * geo.coord_dim, d);
        for (i, b) in blocks.iter().enumerate() {
            out.view_mut((i * geo.coord_dim, 0), (geo.coord_dim, d)).copy_from(b);
        }
        out
    };
    let dim_of = |blocks: &[DMatrix<f64>]| -> usize {
        if blocks.is_empty() {
            d
        } else {
            d - linalg::rank(&stack(blocks), tol)
        }
    };
    let normalizer_dim_bracket = dim_of(&rows_bracket);
    let normalizer_dim_adjoint = dim_of(&rows_adjoint);

    let mut component_residual: f64 = 0.0;
    for h in &geo.isotropy_components {
        let he = GroupElement::from_matrix(h.clone());
        for x in &iso {
            let moved = lie_core::adjoint(&he, x, spec)?;
            component_residual = component_residual.max(generator(&moved, m0, geo).norm());
        }
    }
    let consistent = normalizer_dim_bracket == normalizer_dim_adjoint && component_residual <= geo.tol.max(tol);
    if !consistent {
        log::warn!(
            "weak connectedness check for {} disagrees with the catalog declaration",
            geo.name
        );
    }
    Ok(WeakConnectednessReport {
        geometry: geo.name.clone(),
        declared: geo.weakly_connected,
        isotropy_dim: iso.len(),
        normalizer_dim_bracket,
        normalizer_dim_adjoint,
        component_residual,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn rot2(theta: f64) -> GroupElement {
        let (c, s) = (theta.cos(), theta.sin());
        GroupElement::from_matrix(DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]))
    }

    fn trans2(x: f64, y: f64) -> GroupElement {
        GroupElement::from_matrix(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.0, x, 0.0, 1.0, y, 0.0, 0.0, 1.0],
        ))
    }

    #[test]
    fn act_identity_and_quarter_turn() {
        let geo = geometry_by_name("se2-plane").unwrap();
        let m = MPoint::from_slice(&[1.0, 0.0]);
        assert_eq!(act(&geo.group.identity(), &m, &geo).unwrap(), m);
        let out = act(&rot2(FRAC_PI_2), &m, &geo).unwrap();
        assert!(out.distance(&MPoint::from_slice(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn sphere_action_moves_north_pole_to_third_column() {
        let geo = geometry_by_name("so3-sphere").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = geo.group.random_element(&mut rng, 2.0);
        let out = act(&g, &geo.base_point, &geo).unwrap();
        let col = g.mat.column(2).into_owned();
        assert!((out.coords - col).norm() < 1e-15);
    }

    #[test]
    fn rotation_generator_at_unit_x() {
        let geo = geometry_by_name("se2-plane").unwrap();
        let v = generator(&geo.group.basis_element(0), &MPoint::from_slice(&[1.0, 0.0]), &geo);
        assert_eq!(v.as_slice(), &[0.0, 1.0]);
        // the field is -y d/dx + x d/dy
        let v = generator(&geo.group.basis_element(0), &MPoint::from_slice(&[0.3, 0.7]), &geo);
        assert_eq!(v.as_slice(), &[-0.7, 0.3]);
        assert_eq!(
            generator(&geo.group.zero(), &MPoint::from_slice(&[0.3, 0.7]), &geo).norm(),
            0.0
        );
    }

    #[test]
    fn generator_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for name in ["se2-plane", "so3-sphere", "affine2-plane", "so4-sphere3", "se3-group"] {
            let geo = geometry_by_name(name).unwrap();
            for _ in 0..10 {
                let m = geo.random_point(&mut rng, 1.0);
                let xi = geo.group.random_algebra_element(&mut rng, 1.0);
                let h = 1e-6;
                let moved = act(&lie_core::exp(&xi.scale(h), &geo.group), &m, &geo).unwrap();
                let fd = (&moved.coords - &m.coords) / h;
                assert!((fd - generator(&xi, &m, &geo)).norm() < 1e-5, "{name}");
            }
        }
    }

    #[test]
    fn isotropy_dimensions() {
        let se2 = geometry_by_name("se2-plane").unwrap();
        let iso = isotropy_algebra(&MPoint::from_slice(&[0.0, 0.0]), &se2).unwrap();
        assert_eq!(iso.len(), 1);
        assert!((iso[0].coeffs[0].abs() - 1.0).abs() < 1e-12);
        let so3 = geometry_by_name("so3-sphere").unwrap();
        let iso = isotropy_algebra(&so3.base_point, &so3).unwrap();
        assert_eq!(iso.len(), 1);
        assert!((iso[0].coeffs[2].abs() - 1.0).abs() < 1e-12);
        let aff = geometry_by_name("affine2-plane").unwrap();
        let iso = isotropy_algebra(&MPoint::from_slice(&[0.0, 0.0]), &aff).unwrap();
        assert_eq!(iso.len(), 4);
    }

    #[test]
    fn isotropy_membership() {
        let geo = geometry_by_name("se2-plane").unwrap();
        let o = MPoint::from_slice(&[0.0, 0.0]);
        assert_eq!(isotropy_contains(&geo.group.identity(), &o, &geo), (true, 0.0));
        assert!(isotropy_contains(&rot2(PI), &o, &geo).0);
        let (inside, res) = isotropy_contains(&trans2(1.0, 0.0), &o, &geo);
        assert!(!inside);
        assert_eq!(res, 1.0);
    }

    #[test]
    fn symmetry_pairs() {
        let geo = geometry_by_name("se2-plane").unwrap();
        let o = MPoint::from_slice(&[0.0, 0.0]);
        let k = rot2(0.4).compose(&trans2(1.0, -2.0));
        assert!(is_symmetry_pair(&k, &geo.group.identity(), &o, &geo).is_ok());
        let err = is_symmetry_pair(&geo.group.identity(), &trans2(1.0, 0.0), &o, &geo);
        assert!(matches!(err, Err(Error::NotNormalizing { .. })));
    }

    #[test]
    fn antipodal_map_on_sphere() {
        let geo = geometry_by_name("so3-sphere").unwrap();
        let r = GroupElement::from_matrix(geo.normalizer_reps[0].clone());
        let s = is_symmetry_pair(&geo.group.identity(), &r, &geo.base_point, &geo).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let m = geo.random_point(&mut rng, 2.0);
            let out = apply_symmetry(&s, &m, &geo).unwrap();
            assert!((out.coords + &m.coords).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_symmetry_trivial_cases() {
        let geo = geometry_by_name("se2-plane").unwrap();
        let o = MPoint::from_slice(&[0.0, 0.0]);
        let m = MPoint::from_slice(&[0.5, -1.5]);
        let id = geo.group.identity();
        let s = is_symmetry_pair(&id, &id, &o, &geo).unwrap();
        assert!(apply_symmetry(&s, &m, &geo).unwrap().distance(&m) < 1e-15);
        let k = rot2(1.0).compose(&trans2(0.2, 0.1));
        let s = is_symmetry_pair(&k, &id, &o, &geo).unwrap();
        let want = act(&k, &m, &geo).unwrap();
        assert!(apply_symmetry(&s, &m, &geo).unwrap().distance(&want) < 1e-14);
        // r in the stabilizer acts trivially
        let s = is_symmetry_pair(&id, &rot2(0.9), &o, &geo).unwrap();
        assert!(apply_symmetry(&s, &m, &geo).unwrap().distance(&m) < 1e-14);
    }

    #[test]
    fn weak_connectedness() {
        for name in [
            "e2-plane",
            "e3-space",
            "so3-sphere",
            "so2-circle",
            "r2-translations",
            "affine2-plane",
        ] {
            let geo = geometry_by_name(name).unwrap();
            let rep = weakly_connected_report(&geo).unwrap();
            assert!(rep.declared && rep.consistent, "{name}");
        }
        let free = weakly_connected_report(&geometry_by_name("so2-circle").unwrap()).unwrap();
        assert_eq!(free.isotropy_dim, 0);
        assert_eq!(free.normalizer_dim_bracket, 1);
    }

    #[test]
    fn coset_representatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for name in catalog_names() {
            let geo = geometry_by_name(name).unwrap();
            for _ in 0..5 {
                let m = geo.random_point(&mut rng, 1.5);
                let k = geo.coset_representative(&m).unwrap();
                assert!(act(&k, &geo.base_point, &geo).unwrap().distance(&m) < 1e-10, "{name}");
            }
        }
        let geo = geometry_by_name("so3-sphere").unwrap();
        let south = MPoint::from_slice(&[0.0, 0.0, -1.0]);
        let k = geo.coset_representative(&south).unwrap();
        assert!(act(&k, &geo.base_point, &geo).unwrap().distance(&south) < 1e-15);
    }
}
