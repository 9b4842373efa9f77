//! Maps from the domain into a Klein geometry, sampled on a mesh.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::klein::{GeometrySpec, MPoint};
use crate::linalg;
use crate::monodromy::{GridInfo, MeshDomain};

/// Ambient coordinates of `f(x)`.
pub type PointEvaluator = Arc<dyn Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync>;

/// Step of the five-point difference used on analytic evaluators.
pub const FD_STEP: f64 = 1e-3;

#[derive(Clone)]
pub struct MapField {
    pub mesh: Arc<MeshDomain>,
    pub geometry: GeometrySpec,
    pub values: Vec<MPoint>,
    evaluator: Option<PointEvaluator>,
}

impl std::fmt::Debug for MapField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MapField")
            .field("geometry", &self.geometry.name)
            .field("nodes", &self.values.len())
            .field("has_evaluator", &self.evaluator.is_some())
            .finish()
    }
}

impl MapField {
    pub fn from_fn(mesh: Arc<MeshDomain>, geometry: GeometrySpec, eval: PointEvaluator) -> Result<Self> {
        let values = mesh
            .nodes
            .iter()
            .map(|x| geometry.point(eval(x)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(MapField {
            mesh,
            geometry,
            values,
            evaluator: Some(eval),
        })
    }

    pub fn sampled(mesh: Arc<MeshDomain>, geometry: GeometrySpec, values: Vec<MPoint>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::InvalidInput(format!(
                "{} map values for {} mesh nodes",
                values.len(),
                mesh.len()
            )));
        }
        let values = values
            .into_iter()
            .map(|m| geometry.point(m.coords))
            .collect::<Result<Vec<_>>>()?;
        Ok(MapField {
            mesh,
            geometry,
            values,
            evaluator: None,
        })
    }

    pub fn has_evaluator(&self) -> bool {
        self.evaluator.is_some()
    }

    pub fn value_at(&self, x: &DVector<f64>) -> Result<MPoint> {
        if let Some(e) = &self.evaluator {
            return Ok(MPoint::new(e(x)?));
        }
        self.mesh
            .nodes
            .iter()
            .position(|n| (n - x).norm() <= 1e-12 * x.norm().max(1.0))
            .map(|i| self.values[i].clone())
            .ok_or_else(|| Error::InvalidInput("sampled map evaluated off the mesh nodes".into()))
    }

    /// Five-point derivative of the evaluator along `dir`.
    pub fn directional_derivative(&self, x: &DVector<f64>, dir: &DVector<f64>) -> Result<DVector<f64>> {
        let e = self
            .evaluator
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("map has no evaluator".into()))?;
        let at = |s: f64| e(&(x + dir * s));
        let h = FD_STEP;
        Ok((at(-2.0 * h)? - at(2.0 * h)? + (at(h)? - at(-h)?) * 8.0) / (12.0 * h))
    }

    /// `Tf` at an arbitrary point, projected on `T M`.
    pub fn tangent_map_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let sigma = x.len();
        let cols = (0..sigma)
            .map(|j| {
                let mut e = DVector::zeros(sigma);
                e[j] = 1.0;
                self.directional_derivative(x, &e)
            })
            .collect::<Result<Vec<_>>>()?;
        let m = self.value_at(x)?;
        Ok(self.project_tangent(&m, linalg::hstack(&cols, self.geometry.coord_dim)))
    }

    /// `Tf` at a node, from the evaluator or from grid differences.
    pub fn tangent_map(&self, node: usize) -> Result<DMatrix<f64>> {
        if self.evaluator.is_some() {
            return self.tangent_map_at(&self.mesh.nodes[node]);
        }
        let grid = self.mesh.grid.as_ref().ok_or_else(|| {
            Error::InvalidInput("finite differences need a grid mesh or an analytic evaluator".into())
        })?;
        let cols: Vec<DVector<f64>> = (0..grid.dim())
            .map(|k| grid_derivative(grid, node, k, |n| self.values[n].coords.clone()))
            .collect();
        Ok(self.project_tangent(&self.values[node], linalg::hstack(&cols, self.geometry.coord_dim)))
    }

    fn project_tangent(&self, m: &MPoint, t: DMatrix<f64>) -> DMatrix<f64> {
        let b = self.geometry.tangent_basis(m);
        &b * (b.transpose() * t)
    }
}

/// Second-order difference of node data along grid axis `k`.
pub fn grid_derivative(grid: &GridInfo, node: usize, k: usize, f: impl Fn(usize) -> DVector<f64>) -> DVector<f64> {
    let h = grid.spacing(k);
    let step = |d: isize| grid.neighbor(node, k, d);
    match (step(-1), step(1)) {
        (Some(m), Some(p)) => (f(p) - f(m)) / (2.0 * h),
        (None, Some(p)) => match step(2) {
            Some(p2) => (f(p) * 4.0 - f(node) * 3.0 - f(p2)) / (2.0 * h),
            None => (f(p) - f(node)) / h,
        },
        (Some(m), None) => match step(-2) {
            Some(m2) => (f(node) * 3.0 - f(m) * 4.0 + f(m2)) / (2.0 * h),
            None => (f(node) - f(m)) / h,
        },
        (None, None) => f(node) * 0.0,
    }
}
