//! Matrix Lie groups and their Lie algebras.
//!
//! A [`GroupSpec`] fixes a basis `E_1..E_d` of a matrix Lie algebra, the
//! structure constants in the right-invariant bracket convention, and a
//! membership residual for the group. Algebra elements are coefficient
//! vectors in that basis; group elements are plain `n x n` matrices.

mod catalog;
pub mod expm;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub use catalog::group_by_name;

pub const DEFAULT_LIN_TOL: f64 = 1e-10;
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

/// Constraint defining the group inside `GL(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    None,
    /// `1 x 1` positive reals.
    Positive,
    Orthogonal {
        proper: bool,
    },
    Unimodular,
    /// Last row `(0, .., 0, 1)` plus a constraint on the linear block.
    Affine(LinearPart),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearPart {
    General,
    Orthogonal { proper: bool },
    Unimodular,
    Identity,
}

/// Global sign relating the algebra bracket to the matrix commutator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketSign {
    /// `[X, Y] = -(XY - YX)`: the bracket of right-invariant vector fields.
    RightInvariant,
    /// `[X, Y] = XY - YX`.
    Commutator,
}

impl BracketSign {
    pub fn factor(self) -> f64 {
        match self {
            BracketSign::RightInvariant => -1.0,
            BracketSign::Commutator => 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupSpec {
    name: String,
    n: usize,
    basis: Vec<DMatrix<f64>>,
    /// `c[(i * d + j) * d + k]` with `[E_i, E_j] = sum_k c_ijk E_k`.
    structure: Vec<f64>,
    membership: Membership,
    sign: BracketSign,
    pub lin_tol: f64,
    pub membership_tol: f64,
    basis_flat: DMatrix<f64>,
    basis_pinv: DMatrix<f64>,
}

/// Coefficient vector of an algebra element in the basis of its [`GroupSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub coeffs: DVector<f64>,
}

/// An invertible `n x n` matrix of the group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub mat: DMatrix<f64>,
}

impl GroupSpec {
    /// Builds a spec from basis matrices, computing structure constants from
    /// commutators with the right-invariant sign.
    pub fn new(name: &str, basis: Vec<DMatrix<f64>>, membership: Membership) -> Result<Self> {
        Self::with_sign(name, basis, membership, BracketSign::RightInvariant)
    }

    pub fn with_sign(name: &str, basis: Vec<DMatrix<f64>>, membership: Membership, sign: BracketSign) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty algebra basis".into()));
        }
        let n = basis[0].nrows();
        if basis.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::InvalidInput(
                "basis matrices must all be square of the same size".into(),
            ));
        }
        if basis.iter().any(|b| b.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("basis has non-finite entries".into()));
        }
        let flats: Vec<DVector<f64>> = basis.iter().map(linalg::flatten_row_major).collect();
        let basis_flat = linalg::hstack(&flats, n * n);
        let lin_tol = DEFAULT_LIN_TOL;
        if linalg::rank(&basis_flat, lin_tol) != d {
            return Err(Error::InvalidInput("basis matrices are linearly dependent".into()));
        }
        let basis_pinv = linalg::pinv(&basis_flat, lin_tol);
        let mut spec = GroupSpec {
            name: name.to_string(),
            n,
            basis,
            structure: vec![0.0; d * d * d],
            membership,
            sign,
            lin_tol,
            membership_tol: DEFAULT_MEMBERSHIP_TOL,
            basis_flat,
            basis_pinv,
        };
        spec.recompute_structure()?;
        Ok(spec)
    }

    fn recompute_structure(&mut self) -> Result<()> {
        let d = self.dim();
        let f = self.sign.factor();
        let mut c = vec![0.0; d * d * d];
        for i in 0..d {
            for j in (i + 1)..d {
                let comm = &self.basis[i] * &self.basis[j] - &self.basis[j] * &self.basis[i];
                let (coeffs, residual) = self.project(&comm);
                if residual > self.lin_tol * linalg::max_abs(&comm).max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "basis is not closed under commutators: [E{i}, E{j}] residual {residual:.3e}"
                    )));
                }
                for k in 0..d {
                    c[(i * d + j) * d + k] = f * coeffs[k];
                    c[(j * d + i) * d + k] = -f * coeffs[k];
                }
            }
        }
        self.structure = c;
        Ok(())
    }

    /// Same basis with a different bracket sign.
    pub fn resigned(&self, sign: BracketSign) -> GroupSpec {
        let mut s = self.clone();
        s.sign = sign;
        s.recompute_structure()
            .expect("closure was already verified for this basis");
        s
    }

    pub fn with_tolerances(mut self, lin_tol: f64, membership_tol: f64) -> Self {
        self.lin_tol = lin_tol;
        self.membership_tol = membership_tol;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Matrix size `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Algebra dimension `d`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn membership(&self) -> &Membership {
        &self.membership
    }

    pub fn bracket_sign(&self) -> BracketSign {
        self.sign
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            mat: DMatrix::identity(self.n, self.n),
        }
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement::zeros(self.dim())
    }

    /// `E_i` as an algebra element.
    pub fn basis_element(&self, i: usize) -> AlgebraElement {
        let mut c = DVector::zeros(self.dim());
        c[i] = 1.0;
        AlgebraElement { coeffs: c }
    }

    /// Matrix realization `sum xi_i E_i`.
    pub fn realize(&self, xi: &AlgebraElement) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (b, &c) in self.basis.iter().zip(xi.coeffs.iter()) {
            if c != 0.0 {
                m += b * c;
            }
        }
        m
    }

    /// Least-squares coordinates of a matrix and the max-norm residual.
    pub fn project(&self, m: &DMatrix<f64>) -> (DVector<f64>, f64) {
        let v = linalg::flatten_row_major(m);
        let coeffs = &self.basis_pinv * &v;
        let back = &self.basis_flat * &coeffs;
        (coeffs, linalg::max_abs_vec(&(back - v)))
    }

    /// Coordinates of a matrix that must lie in the algebra.
    pub fn coords(&self, m: &DMatrix<f64>) -> Result<AlgebraElement> {
        let (coeffs, residual) = self.project(m);
        if residual > self.lin_tol * linalg::max_abs(m).max(1.0) {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(AlgebraElement { coeffs })
    }

    /// Validates a matrix as a group element.
    pub fn element(&self, mat: DMatrix<f64>) -> Result<GroupElement> {
        if mat.nrows() != self.n || mat.ncols() != self.n {
            return Err(Error::InvalidInput(format!(
                "expected {}x{} matrix, got {}x{}",
                self.n,
                self.n,
                mat.nrows(),
                mat.ncols()
            )));
        }
        let residual = membership_residual(&mat, self);
        let sv = linalg::singular_values(&mat);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().copied().fold(0.0, f64::max);
        if residual > self.membership_tol || !(smin > 0.0) || !(smax / smin).is_finite() {
            return Err(Error::NotInGroup {
                group: self.name.clone(),
                residual,
            });
        }
        Ok(GroupElement { mat })
    }

    /// Checks the structure-constant invariants: antisymmetry and Jacobi.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let mut worst_antisym: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst_antisym =
                        worst_antisym.max((self.structure_constant(i, j, k) + self.structure_constant(j, i, k)).abs());
                }
            }
        }
        if worst_antisym > 0.0 {
            return Err(Error::InvalidInput(format!(
                "structure constants not antisymmetric ({worst_antisym:.3e})"
            )));
        }
        let jac = self.jacobi_residual();
        if jac > self.lin_tol * self.structure_scale().max(1.0) {
            return Err(Error::InvalidInput(format!("Jacobi identity fails ({jac:.3e})")));
        }
        Ok(())
    }

    fn structure_scale(&self) -> f64 {
        self.structure.iter().fold(0.0_f64, |a, &x| a.max(x.abs())).powi(2)
    }

    /// Max over `(i, j, k, m)` of the cyclic Jacobi sum.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let c = |i: usize, j: usize, k: usize| self.structure_constant(i, j, k);
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for m in 0..d {
                        let mut s = 0.0;
                        for l in 0..d {
                            s += c(i, j, l) * c(l, k, m) + c(j, k, l) * c(l, i, m) + c(k, i, l) * c(l, j, m);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn random_algebra_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraElement {
        AlgebraElement {
            coeffs: DVector::from_fn(self.dim(), |_, _| rng.gen_range(-scale..=scale)),
        }
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> GroupElement {
        exp(&self.random_algebra_element(rng, scale), self)
    }
}

impl AlgebraElement {
    pub fn new(coeffs: DVector<f64>) -> Self {
        AlgebraElement { coeffs }
    }

    pub fn from_slice(c: &[f64]) -> Self {
        AlgebraElement {
            coeffs: DVector::from_column_slice(c),
        }
    }

    pub fn zeros(d: usize) -> Self {
        AlgebraElement {
            coeffs: DVector::zeros(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        AlgebraElement {
            coeffs: &self.coeffs * s,
        }
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            coeffs: &self.coeffs + &rhs.coeffs,
        }
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            coeffs: &self.coeffs - &rhs.coeffs,
        }
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement { coeffs: -&self.coeffs }
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, s: f64) -> AlgebraElement {
        self.scale(s)
    }
}

impl GroupElement {
    /// Wraps a matrix without checking membership.
    pub fn from_matrix(mat: DMatrix<f64>) -> Self {
        GroupElement { mat }
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            mat: &self.mat * &other.mat,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            mat: self.mat.clone().try_inverse().expect("group elements are invertible"),
        }
    }

    /// Max-norm distance between matrices.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        linalg::max_abs(&(&self.mat - &other.mat))
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        self.compose(rhs)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n = {}, dim = {})", self.name, self.n, self.dim())
    }
}

pub fn exp(xi: &AlgebraElement, spec: &GroupSpec) -> GroupElement {
    GroupElement {
        mat: expm::expm(&spec.realize(xi)),
    }
}

pub fn log(g: &GroupElement, spec: &GroupSpec) -> Result<AlgebraElement> {
    let l = expm::logm(&g.mat)?;
    spec.coords(&l)
}

/// `Ad_g xi`, re-expanded in the basis.
pub fn adjoint(g: &GroupElement, xi: &AlgebraElement, spec: &GroupSpec) -> Result<AlgebraElement> {
    let inv = g.mat.clone().try_inverse().ok_or_else(|| Error::NotInGroup {
        group: spec.name.clone(),
        residual: f64::INFINITY,
    })?;
    spec.coords(&(&g.mat * spec.realize(xi) * inv))
}

/// `sum_{i<j} c_ijk (xi_i eta_j - xi_j eta_i)`; exactly antisymmetric in floating point.
pub fn bracket(xi: &AlgebraElement, eta: &AlgebraElement, spec: &GroupSpec) -> AlgebraElement {
    let d = spec.dim();
    let mut out = DVector::zeros(d);
    for i in 0..d {
        for j in (i + 1)..d {
            let w = xi.coeffs[i] * eta.coeffs[j] - xi.coeffs[j] * eta.coeffs[i];
            if w == 0.0 {
                continue;
            }
            for k in 0..d {
                out[k] += spec.structure_constant(i, j, k) * w;
            }
        }
    }
    AlgebraElement { coeffs: out }
}

/// Max-norm violation of the group's defining constraints.
pub fn membership_residual(g: &DMatrix<f64>, spec: &GroupSpec) -> f64 {
    let n = spec.n;
    if g.nrows() != n || g.ncols() != n {
        return f64::INFINITY;
    }
    if g.iter().any(|x| !x.is_finite()) {
        return f64::INFINITY;
    }
    match &spec.membership {
        Membership::None => 0.0,
        Membership::Positive => (-g[(0, 0)]).max(0.0),
        Membership::Orthogonal { proper } => orthogonal_residual(g, *proper),
        Membership::Unimodular => (g.determinant() - 1.0).abs(),
        Membership::Affine(lin) => {
            let mut res: f64 = 0.0;
            for j in 0..n {
                let want = if j == n - 1 { 1.0 } else { 0.0 };
                res = res.max((g[(n - 1, j)] - want).abs());
            }
            let a = g.view((0, 0), (n - 1, n - 1)).into_owned();
            let lin_res = match lin {
                LinearPart::General => 0.0,
                LinearPart::Orthogonal { proper } => orthogonal_residual(&a, *proper),
                LinearPart::Unimodular => (a.determinant() - 1.0).abs(),
                LinearPart::Identity => linalg::max_abs(&(a.clone() - DMatrix::identity(n - 1, n - 1))),
            };
            res.max(lin_res)
        }
    }
}

fn orthogonal_residual(a: &DMatrix<f64>, proper: bool) -> f64 {
    let k = a.nrows();
    let mut res = linalg::max_abs(&(a.transpose() * a - DMatrix::identity(k, k)));
    if proper {
        res = res.max((a.determinant() - 1.0).abs());
    }
    res
}
