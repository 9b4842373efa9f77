//! Named closed-form maps used by round-trip checks, examples and configs.
//!
//! | name | domain | values |
//! |---|---|---|
//! | `test.spiral` | `[0,1]^2` | `SE(2)`: rotation `2x + y`, translation `rho (cos phi, sin phi)`, `rho = 0.5 + x`, `phi = 2.5y + 0.5x` |
//! | `test.plane-patch` | `[0,1]^2` | `R^2`: identity |
//! | `test.wavy-patch` | `[0,1]^2` | `R^2`: `(x + 0.1 sin 2y, y + 0.1 sin 3x)` |
//! | `test.circle` | `[0,2pi]` | `R^2`: `(cos t, sin t)` |
//! | `test.surface3` | `[0,1]^2` | `R^3`: `(x, y, 0.3 sin x cos y)` |
//! | `test.space-curve` | `[0,1]` | `R^3`: `(cos 2t, sin 2t, 0.5 t)` |
//! | `test.circle-s1` | `[0,1]` | `S^1`: `(cos 2t, sin 2t)` |
//! | `test.sphere-patch` | `[0.3,1.2] x [0,1]` | `S^2`: polar angle `x`, azimuth `y` |
//! | `test.sphere-curve` | `[0,1]` | `S^2`: a latitude-varying loop segment |
//! | `test.s3-patch` | `[0.3,1.2] x [0,1]` | `S^3`: Hopf-type coordinates |
//! | `test.so3-map` | `[0,1]^2` | `SO(3)`: `exp(x L_x + y L_y + 0.5 x y L_z)` |
//! | `test.exp-patch` | `[0,1]^2` | any group: `exp(x A + y B)` with fixed `A`, `B` |

use std::sync::Arc;

use nalgebra::DVector;

use crate::algebroid::{MapField, PointEvaluator};
use crate::error::{Error, Result};
use crate::klein::{ActionKind, GeometrySpec};
use crate::lie_core::{self, AlgebraElement};
use crate::linalg;
use crate::monodromy::MeshDomain;

type Formula = fn(&DVector<f64>, &GeometrySpec) -> DVector<f64>;

#[derive(Clone)]
pub struct TestMap {
    pub name: &'static str,
    /// Catalog geometry the map is designed for.
    pub geometry: &'static str,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    formula: Formula,
}

impl std::fmt::Debug for TestMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestMap")
            .field("name", &self.name)
            .field("geometry", &self.geometry)
            .finish()
    }
}

fn v(c: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(c)
}

fn spiral(x: &DVector<f64>, _: &GeometrySpec) -> DVector<f64> {
    let (u, w) = (x[0], x[1]);
    let rho = 0.5 + u;
    let phi = 2.5 * w + 0.5 * u;
    let (s, c) = (2.0 * u + w).sin_cos();
    v(&[c, -s, rho * phi.cos(), s, c, rho * phi.sin(), 0.0, 0.0, 1.0])
}

fn plane_patch(x: &DVector<f64>, _: &GeometrySpec) -> DVector<f64> {
    v(&[x[0], x[1]])
}

fn wavy_patch(x: &DVector<f64>, _: &GeometrySpec) -> DVector<f64> {
    v(&[x[0] + 0.1 * (2.0 * x[1]).sin(), x[1] + 0.1 * (3.0 * x[0]).sin()])
}

fn circle(x: &DVector<f64>, _: &GeometrySpec) -> DVector<f64> {
    v(&[x[0].cos(), x[0].sin()])
}

fn surface3(x: &DVector<f64>, _: &GeometrySpec) -> DVector<f64> {
    v(&[x[0], x[1], 0.3 * x[0].sin() * x[1].cos()])
}

fn space_curve(x: &DVector<f64>, _: &GeometrySpec) -> DVector<f64> {
    let t = x[0];
    v(&[(2.0 * t).cos(), (2.0 * t).sin(), 0.5 * t])
}

fn circle_s1(x: &DVector<f64>, _: &GeometrySpec) -> DVector<f64> {
    v(&[(2.0 * x[0]).cos(), (2.0 * x[0]).sin()])
}

fn sphere_patch(x: &DVector<f64>, _: &GeometrySpec) -> DVector<f64> {
    let (th, ph) = (x[0], x[1]);
    v(&[th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()])
}

fn sphere_curve(x: &DVector<f64>, _: &GeometrySpec) -> DVector<f64> {
    let t = x[0];
    let th = 0.8 + 0.3 * (3.0 * t).sin();
    let ph = 2.0 * t;
    v(&[th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()])
}

fn s3_patch(x: &DVector<f64>, _: &GeometrySpec) -> DVector<f64> {
    let (a, b) = (x[0], x[1]);
    v(&[
        a.sin() * b.cos(),
        a.sin() * b.sin(),
        a.cos() * (2.0 * b).sin(),
        a.cos() * (2.0 * b).cos(),
    ])
}

fn group_exp(geo: &GeometrySpec, coeffs: DVector<f64>) -> DVector<f64> {
    let g = lie_core::exp(&AlgebraElement::new(coeffs), &geo.group);
    linalg::flatten_row_major(&g.mat)
}

fn so3_map(x: &DVector<f64>, geo: &GeometrySpec) -> DVector<f64> {
    group_exp(geo, v(&[x[0], x[1], 0.5 * x[0] * x[1]]))
}

fn exp_patch(x: &DVector<f64>, geo: &GeometrySpec) -> DVector<f64> {
    let d = geo.group.dim();
    let a = DVector::from_fn(d, |i, _| 0.6 * ((i as f64 + 1.0) * 1.3).sin());
    let b = DVector::from_fn(d, |i, _| 0.6 * ((i as f64 + 2.0) * 0.7).cos());
    let y = if x.len() > 1 { x[1] } else { 0.0 };
    group_exp(geo, a * x[0] + b * y)
}

fn entry(name: &'static str, geometry: &'static str, lower: &[f64], upper: &[f64], formula: Formula) -> TestMap {
    TestMap {
        name,
        geometry,
        lower: lower.to_vec(),
        upper: upper.to_vec(),
        formula,
    }
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn table() -> Vec<TestMap> {
    vec![
        entry("test.spiral", "se2-group", &[0.0, 0.0], &[1.0, 1.0], spiral),
        entry("test.plane-patch", "se2-plane", &[0.0, 0.0], &[1.0, 1.0], plane_patch),
        entry("test.wavy-patch", "se2-plane", &[0.0, 0.0], &[1.0, 1.0], wavy_patch),
        entry("test.circle", "se2-plane", &[0.0], &[TWO_PI], circle),
        entry("test.surface3", "se3-space", &[0.0, 0.0], &[1.0, 1.0], surface3),
        entry("test.space-curve", "se3-space", &[0.0], &[1.0], space_curve),
        entry("test.circle-s1", "so2-circle", &[0.0], &[1.0], circle_s1),
        entry(
            "test.sphere-patch",
            "so3-sphere",
            &[0.3, 0.0],
            &[1.2, 1.0],
            sphere_patch,
        ),
        entry("test.sphere-curve", "so3-sphere", &[0.0], &[1.0], sphere_curve),
        entry("test.s3-patch", "so4-sphere3", &[0.3, 0.0], &[1.2, 1.0], s3_patch),
        entry("test.so3-map", "so3-group", &[0.0, 0.0], &[1.0, 1.0], so3_map),
        entry("test.exp-patch", "se3-group", &[0.0, 0.0], &[1.0, 1.0], exp_patch),
    ]
}

pub fn test_map_names() -> Vec<&'static str> {
    table().into_iter().map(|t| t.name).collect()
}

pub fn test_map(name: &str) -> Result<TestMap> {
    table()
        .into_iter()
        .find(|t| t.name == name)
        .ok_or_else(|| Error::InvalidInput(format!("unknown test map `{name}`")))
}

/// Test map suited to a catalog geometry, for round-trip checks.
pub fn default_test_map(geometry: &str) -> Result<TestMap> {
    let name = match geometry {
        "se2-plane" | "e2-plane" | "affine2-plane" | "equiaffine2-plane" | "r2-translations" => "test.wavy-patch",
        "se3-space" | "e3-space" | "affine3-space" | "equiaffine3-space" => "test.surface3",
        "so2-circle" => "test.circle-s1",
        "so3-sphere" => "test.sphere-patch",
        "so4-sphere3" => "test.s3-patch",
        "se2-group" => "test.spiral",
        "so3-group" => "test.so3-map",
        g if g.ends_with("-group") => "test.exp-patch",
        other => return Err(Error::UnknownGeometry(other.to_string())),
    };
    test_map(name)
}

impl TestMap {
    pub fn sigma(&self) -> usize {
        self.lower.len()
    }

    /// Evaluator into `geo`, checking that the value dimension fits.
    pub fn evaluator(&self, geo: &GeometrySpec) -> Result<PointEvaluator> {
        let probe = (self.formula)(&DVector::from_vec(self.lower.clone()), geo);
        let group_ok = geo.action == ActionKind::LeftRegular || !self.geometry.ends_with("-group");
        if probe.len() != geo.coord_dim || !group_ok {
            return Err(Error::InvalidInput(format!(
                "{} does not map into {}",
                self.name, geo.name
            )));
        }
        let formula = self.formula;
        let geo = geo.clone();
        Ok(Arc::new(move |x| Ok(formula(x, &geo))))
    }

    /// The map on a non-periodic grid with `n` nodes per axis.
    pub fn on_grid(&self, n: usize, geo: &GeometrySpec) -> Result<MapField> {
        let counts = vec![n; self.sigma()];
        let mesh = Arc::new(MeshDomain::disk(&self.lower, &self.upper, &counts)?);
        self.on_mesh(mesh, geo)
    }

    pub fn on_mesh(&self, mesh: Arc<MeshDomain>, geo: &GeometrySpec) -> Result<MapField> {
        if mesh.sigma() != self.sigma() {
            return Err(Error::InvalidInput(format!(
                "{} needs a {}-dimensional domain",
                self.name,
                self.sigma()
            )));
        }
        MapField::from_fn(mesh, geo.clone(), self.evaluator(geo)?)
    }
}
