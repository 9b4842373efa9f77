//! Built-in Klein geometries.
//!
//! Names: `se2-plane`, `e2-plane`, `se3-space`, `e3-space`, `affine2-plane`,
//! `equiaffine2-plane`, `affine3-space`, `equiaffine3-space`, `so2-circle`,
//! `so3-sphere`, `so4-sphere3`, `r2-translations`, and `<group>-group` for any
//! catalog group acting on itself.

use nalgebra::{DMatrix, DVector};

use super::{ActionKind, GeometrySpec, MPoint, DEFAULT_POINT_TOL};
use crate::error::{Error, Result};
use crate::lie_core::{self, GroupSpec};
use crate::linalg;

const NAMES: [&str; 12] = [
    "se2-plane",
    "e2-plane",
    "se3-space",
    "e3-space",
    "affine2-plane",
    "equiaffine2-plane",
    "affine3-space",
    "equiaffine3-space",
    "so2-circle",
    "so3-sphere",
    "so4-sphere3",
    "r2-translations",
];

pub fn catalog_names() -> &'static [&'static str] {
    &NAMES
}

fn diag(entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

fn affine_geometry(name: &str, group: GroupSpec, components: Vec<DMatrix<f64>>, euclidean: bool) -> GeometrySpec {
    let k = group.n() - 1;
    GeometrySpec {
        name: name.to_string(),
        group,
        action: ActionKind::Affine,
        dim: k,
        coord_dim: k,
        base_point: MPoint::new(DVector::zeros(k)),
        isotropy_components: components,
        normalizer_reps: vec![],
        weakly_connected: true,
        euclidean,
        tol: DEFAULT_POINT_TOL,
    }
}

fn sphere_geometry(name: &str, group: GroupSpec) -> GeometrySpec {
    let n = group.n();
    let mut base = DVector::zeros(n);
    base[n - 1] = 1.0;
    // diag(-1, 1, .., 1, -1) reverses the base point and normalizes its stabilizer
    let mut flip = vec![1.0; n];
    flip[0] = -1.0;
    flip[n - 1] = -1.0;
    let normalizer_reps = if n > 2 { vec![diag(&flip)] } else { vec![] };
    GeometrySpec {
        name: name.to_string(),
        group,
        action: ActionKind::Sphere,
        dim: n - 1,
        coord_dim: n,
        base_point: MPoint::new(base),
        isotropy_components: vec![],
        normalizer_reps,
        weakly_connected: true,
        euclidean: false,
        tol: DEFAULT_POINT_TOL,
    }
}

/// A catalog group acting on itself by left multiplication.
pub fn left_regular(group: GroupSpec) -> GeometrySpec {
    let n = group.n();
    GeometrySpec {
        name: format!("{}-group", group.name()),
        dim: group.dim(),
        coord_dim: n * n,
        base_point: MPoint::new(linalg::flatten_row_major(&DMatrix::identity(n, n))),
        action: ActionKind::LeftRegular,
        isotropy_components: vec![],
        normalizer_reps: vec![],
        weakly_connected: true,
        euclidean: false,
        tol: DEFAULT_POINT_TOL,
        group,
    }
}

pub fn geometry_by_name(name: &str) -> Result<GeometrySpec> {
    if let Some(group) = name.strip_suffix("-group") {
        return lie_core::group_by_name(group)
            .map(left_regular)
            .map_err(|_| Error::UnknownGeometry(name.to_string()));
    }
    let g = |n: &str| lie_core::group_by_name(n);
    let geo = match name {
        "se2-plane" => affine_geometry(name, g("se2")?, vec![], true),
        "e2-plane" => affine_geometry(name, g("e2")?, vec![diag(&[1.0, -1.0, 1.0])], true),
        "se3-space" => affine_geometry(name, g("se3")?, vec![], true),
        "e3-space" => affine_geometry(name, g("e3")?, vec![diag(&[1.0, 1.0, -1.0, 1.0])], true),
        "affine2-plane" => affine_geometry(name, g("affine2")?, vec![diag(&[-1.0, 1.0, 1.0])], false),
        "affine3-space" => affine_geometry(name, g("affine3")?, vec![diag(&[-1.0, 1.0, 1.0, 1.0])], false),
        "equiaffine2-plane" => affine_geometry(name, g("equiaffine2")?, vec![], false),
        "equiaffine3-space" => affine_geometry(name, g("equiaffine3")?, vec![], false),
        "r2-translations" => affine_geometry(name, g("r2")?, vec![], false),
        "so2-circle" => sphere_geometry(name, g("so2")?),
        "so3-sphere" => sphere_geometry(name, g("so3")?),
        "so4-sphere3" => sphere_geometry(name, g("so4")?),
        _ => return Err(Error::UnknownGeometry(name.to_string())),
    };
    Ok(geo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::klein::isotropy_algebra;

    #[test]
    fn every_catalog_entry_is_transitive_at_its_base_point() {
        for name in catalog_names() {
            let geo = geometry_by_name(name).unwrap();
            let iso = isotropy_algebra(&geo.base_point, &geo).unwrap();
            assert_eq!(geo.group.dim() - iso.len(), geo.dim, "{name}");
            assert_eq!(geo.constraint_residual(&geo.base_point), 0.0);
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(geometry_by_name("h2-disk"), Err(Error::UnknownGeometry(_))));
        assert!(matches!(geometry_by_name("foo-group"), Err(Error::UnknownGeometry(_))));
        assert_eq!(geometry_by_name("se2-group").unwrap().coord_dim, 9);
    }
}
