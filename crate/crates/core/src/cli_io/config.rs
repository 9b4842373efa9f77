//! JSON run configuration.

use std::path::PathBuf;

use nalgebra::DVector;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::expr::{parse_expr, Expr};
use crate::error::{Error, Result};
use crate::klein::{self, ActionKind, FrenetInput, GeometrySpec, MPoint, DEFAULT_POINT_TOL};
use crate::lie_core::{self, GroupElement, GroupSpec, Membership, DEFAULT_LIN_TOL, DEFAULT_MEMBERSHIP_TOL};
use crate::linalg::RowMajor;
use crate::monodromy::MeshDomain;
use crate::path_engine::PathPolyline;
use crate::test_maps::{test_map, TestMap};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: RawGeometry,
    #[serde(default)]
    domain: Option<RawDomain>,
    #[serde(default)]
    form: Option<RawForm>,
    #[serde(default)]
    anchors: RawAnchors,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    path: Option<RawPath>,
    #[serde(default)]
    symmetry: Option<RawSymmetry>,
    #[serde(default)]
    outputs: RawOutputs,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGeometry {
    Name(String),
    Inline(RawInlineGeometry),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInlineGeometry {
    #[serde(default)]
    name: Option<String>,
    group: RawGroup,
    action: ActionKind,
    #[serde(default)]
    base_point: Option<Vec<f64>>,
    #[serde(default)]
    isotropy_components: Vec<RowMajor>,
    #[serde(default)]
    normalizer_reps: Vec<RowMajor>,
    #[serde(default)]
    weakly_connected: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGroup {
    Name(String),
    Inline {
        name: String,
        basis: Vec<RowMajor>,
        membership: Membership,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawResolution {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawDomain {
    Grid {
        #[serde(default)]
        lower: Option<Vec<f64>>,
        #[serde(default)]
        upper: Option<Vec<f64>>,
        resolution: RawResolution,
        #[serde(default)]
        periodic: Option<Vec<bool>>,
    },
    Circle {
        circumference: f64,
        resolution: usize,
    },
    Torus {
        periods: [f64; 2],
        resolution: RawResolution,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawForm {
    Shorthand(String),
    Tagged(RawFormSpec),
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
enum RawFormSpec {
    LogDerivativeOf(String),
    Inline(Vec<Vec<String>>),
    Sampled(Vec<Vec<Vec<f64>>>),
    Frenet(RawFrenet),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSamples {
    Constant(f64),
    Values(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrenet {
    length: f64,
    kappa: RawSamples,
    #[serde(default)]
    tau: Option<RawSamples>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    closed: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAnchors {
    #[serde(default)]
    x0: Option<usize>,
    #[serde(default)]
    m0: Option<Vec<f64>>,
    #[serde(default)]
    g0: Option<RowMajor>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    lin_tol: Option<f64>,
    membership_tol: Option<f64>,
    step: Option<f64>,
    triviality_tol: Option<f64>,
    isotropy_tol: Option<f64>,
    tol: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPath {
    points: Vec<Vec<f64>>,
    #[serde(default)]
    samples_per_segment: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymmetry {
    #[serde(default)]
    l: Option<RowMajor>,
    #[serde(default)]
    r: Option<RowMajor>,
    first: String,
    second: String,
    #[serde(default)]
    candidates: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    #[serde(default)]
    stem: Option<String>,
    #[serde(default)]
    formats: Option<Vec<OutputFormat>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
    /// Whitespace-separated columns with blank lines between grid rows.
    Dat,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    Grid {
        lower: Vec<f64>,
        upper: Vec<f64>,
        counts: Vec<usize>,
        periodic: Vec<bool>,
    },
    Circle {
        circumference: f64,
        nodes: usize,
    },
    Torus {
        periods: [f64; 2],
        counts: [usize; 2],
    },
}

impl DomainSpec {
    pub fn node_count(&self) -> usize {
        match self {
            DomainSpec::Grid { counts, .. } => counts.iter().product(),
            DomainSpec::Circle { nodes, .. } => *nodes,
            DomainSpec::Torus { counts, .. } => counts[0] * counts[1],
        }
    }

    pub fn sigma(&self) -> usize {
        match self {
            DomainSpec::Grid { counts, .. } => counts.len(),
            DomainSpec::Circle { .. } => 1,
            DomainSpec::Torus { .. } => 2,
        }
    }

    pub fn build(&self, x0: usize) -> Result<MeshDomain> {
        let mesh = match self {
            DomainSpec::Grid {
                lower,
                upper,
                counts,
                periodic,
            } => MeshDomain::grid(lower, upper, counts, periodic)?,
            DomainSpec::Circle { circumference, nodes } => MeshDomain::circle(*circumference, *nodes)?,
            DomainSpec::Torus { periods, counts } => MeshDomain::torus(*periods, *counts)?,
        };
        if x0 == 0 {
            Ok(mesh)
        } else {
            mesh.with_root(x0)
        }
    }
}

#[derive(Clone, Debug)]
pub struct FrenetSpec {
    pub input: FrenetInput,
    /// Require the curve to close up within the check tolerance.
    pub closed: bool,
}

#[derive(Clone, Debug)]
pub enum FormSource {
    /// Logarithmic derivative of a named test map.
    LogDerivativeOf(String),
    /// `omega(d_k)` coefficients: one row of `dim g` expressions per domain direction.
    Inline(Vec<Vec<Expr>>),
    /// `values[node][k]` = coefficients of `omega(d_k)` at a node.
    Sampled(Vec<Vec<Vec<f64>>>),
    Frenet(FrenetSpec),
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Tolerances {
    pub lin_tol: f64,
    pub membership_tol: f64,
    /// Integration step in parameter length.
    pub step: f64,
    pub triviality_tol: f64,
    pub isotropy_tol: f64,
    /// Pass/fail threshold of the command; each command has its own default.
    pub tol: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Anchors {
    pub x0: usize,
    pub m0: Option<MPoint>,
    pub g0: Option<GroupElement>,
}

#[derive(Clone, Debug)]
pub struct SymmetryInputs {
    pub l: Option<GroupElement>,
    pub r: Option<GroupElement>,
    pub first: PathBuf,
    pub second: PathBuf,
    /// Random catalog candidates tried when no pair is given.
    pub candidates: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outputs {
    pub stem: String,
    pub formats: Vec<OutputFormat>,
}

/// A fully validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    pub domain: Option<DomainSpec>,
    /// Absent for commands that read result files only.
    pub form: Option<FormSource>,
    pub anchors: Anchors,
    pub tolerances: Tolerances,
    pub path: Option<PathPolyline>,
    pub symmetry: Option<SymmetryInputs>,
    pub outputs: Outputs,
    pub seed: u64,
    /// SHA-256 of the canonical configuration after overrides.
    pub hash: String,
}

impl RunConfig {
    /// Geometry the form is valued in: the group acting on itself for
    /// group-valued test maps, the configured geometry otherwise.
    pub fn form_geometry(&self) -> Result<GeometrySpec> {
        if let Some(FormSource::LogDerivativeOf(name)) = &self.form {
            if test_map(name)?.geometry.ends_with("-group") {
                return Ok(klein::left_regular(self.geometry.group.clone()));
            }
        }
        Ok(self.geometry.clone())
    }
}

/// Command-line values that replace configuration entries.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

fn invalid(key: &str, constraint: impl Into<String>) -> Error {
    Error::ValidationError {
        key: key.to_string(),
        constraint: constraint.into(),
    }
}

fn positive(key: &str, v: Option<f64>, default: f64) -> Result<f64> {
    match v {
        None => Ok(default),
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(invalid(key, format!("must be positive and finite, got {x}"))),
    }
}

fn matrix(key: &str, m: &RowMajor) -> Result<nalgebra::DMatrix<f64>> {
    m.to_matrix().ok_or_else(|| {
        invalid(
            key,
            format!("{} entries do not fill a {}x{} matrix", m.data.len(), m.rows, m.cols),
        )
    })
}

fn resolution(key: &str, r: &RawResolution, axes: usize) -> Result<Vec<usize>> {
    let counts = match r {
        RawResolution::Uniform(n) => vec![*n; axes],
        RawResolution::PerAxis(v) => v.clone(),
    };
    if counts.len() != axes {
        return Err(invalid(key, format!("expected {axes} entries, got {}", counts.len())));
    }
    if let Some(n) = counts.iter().find(|&&n| n < 2) {
        return Err(invalid(key, format!("must be at least 2, got {n}")));
    }
    Ok(counts)
}

fn build_group(raw: &RawGroup) -> Result<GroupSpec> {
    match raw {
        RawGroup::Name(name) => {
            lie_core::group_by_name(name).map_err(|_| Error::UnknownGeometry(format!("group `{name}`")))
        }
        RawGroup::Inline {
            name,
            basis,
            membership,
        } => {
            let mats = basis
                .iter()
                .enumerate()
                .map(|(i, m)| matrix(&format!("geometry.group.basis[{i}]"), m))
                .collect::<Result<Vec<_>>>()?;
            GroupSpec::new(name, mats, membership.clone()).map_err(|e| invalid("geometry.group", e.to_string()))
        }
    }
}

fn build_geometry(raw: &RawGeometry) -> Result<GeometrySpec> {
    let g = match raw {
        RawGeometry::Name(name) => return klein::geometry_by_name(name),
        RawGeometry::Inline(g) => g,
    };
    let group = build_group(&g.group)?;
    if g.action == ActionKind::LeftRegular {
        return Ok(klein::left_regular(group));
    }
    let n = group.n();
    let (dim, coord_dim) = match g.action {
        ActionKind::Affine => (n - 1, n - 1),
        ActionKind::Linear => (n, n),
        ActionKind::Sphere => (n - 1, n),
        ActionKind::LeftRegular => unreachable!(),
    };
    let base = match &g.base_point {
        Some(b) => DVector::from_column_slice(b),
        None if g.action == ActionKind::Sphere => {
            let mut b = DVector::zeros(n);
            b[n - 1] = 1.0;
            b
        }
        None => DVector::zeros(coord_dim),
    };
    let mats = |key: &str, list: &[RowMajor]| -> Result<Vec<_>> {
        list.iter()
            .enumerate()
            .map(|(i, m)| matrix(&format!("geometry.{key}[{i}]"), m))
            .collect()
    };
    let geo = GeometrySpec {
        name: g.name.clone().unwrap_or_else(|| format!("{}-inline", group.name())),
        group,
        action: g.action,
        dim,
        coord_dim,
        base_point: MPoint::new(base.clone()),
        isotropy_components: mats("isotropy_components", &g.isotropy_components)?,
        normalizer_reps: mats("normalizer_reps", &g.normalizer_reps)?,
        weakly_connected: g.weakly_connected,
        euclidean: false,
        tol: DEFAULT_POINT_TOL,
    };
    geo.point(base)
        .map_err(|e| invalid("geometry.base_point", e.to_string()))?;
    let iso = klein::isotropy_algebra(&geo.base_point, &geo)?;
    if geo.group.dim() - iso.len() != dim {
        return Err(invalid(
            "geometry.action",
            format!(
                "orbit of the base point has dimension {}, not {dim}",
                geo.group.dim() - iso.len()
            ),
        ));
    }
    Ok(geo)
}

fn build_domain(raw: &RawDomain, map: Option<&TestMap>) -> Result<DomainSpec> {
    let spec = match raw {
        RawDomain::Grid {
            lower,
            upper,
            resolution: res,
            periodic,
        } => {
            let lower = lower
                .clone()
                .or_else(|| map.map(|t| t.lower.clone()))
                .ok_or_else(|| invalid("domain.lower", "required unless the form names a test map"))?;
            let upper = upper
                .clone()
                .or_else(|| map.map(|t| t.upper.clone()))
                .ok_or_else(|| invalid("domain.upper", "required unless the form names a test map"))?;
            if lower.is_empty() {
                return Err(invalid("domain.lower", "needs at least one axis"));
            }
            if upper.len() != lower.len() {
                return Err(invalid("domain.upper", "must have as many entries as domain.lower"));
            }
            if lower.iter().zip(&upper).any(|(a, b)| !(b > a)) {
                return Err(invalid("domain.upper", "must exceed domain.lower on every axis"));
            }
            let counts = resolution("domain.resolution", res, lower.len())?;
            let periodic = periodic.clone().unwrap_or_else(|| vec![false; lower.len()]);
            if periodic.len() != lower.len() {
                return Err(invalid("domain.periodic", "must have one flag per axis"));
            }
            if let Some(k) = (0..counts.len()).find(|&k| periodic[k] && counts[k] < 3) {
                return Err(invalid(
                    "domain.resolution",
                    format!("periodic axis {k} needs at least 3 nodes"),
                ));
            }
            DomainSpec::Grid {
                lower,
                upper,
                counts,
                periodic,
            }
        }
        RawDomain::Circle {
            circumference,
            resolution,
        } => {
            positive("domain.circumference", Some(*circumference), 1.0)?;
            if *resolution < 3 {
                return Err(invalid(
                    "domain.resolution",
                    format!("a circle needs at least 3 nodes, got {resolution}"),
                ));
            }
            DomainSpec::Circle {
                circumference: *circumference,
                nodes: *resolution,
            }
        }
        RawDomain::Torus {
            periods,
            resolution: res,
        } => {
            for p in periods {
                positive("domain.periods", Some(*p), 1.0)?;
            }
            let c = resolution("domain.resolution", res, 2)?;
            if c.iter().any(|&n| n < 3) {
                return Err(invalid("domain.resolution", "a torus needs at least 3 nodes per axis"));
            }
            DomainSpec::Torus {
                periods: *periods,
                counts: [c[0], c[1]],
            }
        }
    };
    if let Some(t) = map {
        if spec.sigma() != t.sigma() {
            return Err(invalid(
                "domain",
                format!("{} needs a {}-dimensional domain", t.name, t.sigma()),
            ));
        }
    }
    Ok(spec)
}

fn samples(key: &str, raw: &RawSamples, count: usize) -> Result<Vec<f64>> {
    let v = match raw {
        RawSamples::Constant(c) => vec![*c; count],
        RawSamples::Values(v) => v.clone(),
    };
    if v.len() < 2 || v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(key, "needs at least two finite samples"));
    }
    Ok(v)
}

fn build_frenet(raw: &RawFrenet, geo: &GeometrySpec) -> Result<FrenetSpec> {
    let length = positive("form.frenet.length", Some(raw.length), 1.0)?;
    let count = raw.samples.unwrap_or(257);
    if count < 2 {
        return Err(invalid("form.frenet.samples", "must be at least 2"));
    }
    let kappa = samples("form.frenet.kappa", &raw.kappa, count)?;
    let tau = match &raw.tau {
        Some(t) => Some(samples("form.frenet.tau", t, kappa.len())?),
        None if geo.dim == 3 => Some(vec![0.0; kappa.len()]),
        None => None,
    };
    if tau.as_ref().is_some_and(|t| t.len() != kappa.len()) {
        return Err(invalid(
            "form.frenet.tau",
            "must have as many samples as form.frenet.kappa",
        ));
    }
    if !geo.euclidean || !(geo.dim == 2 || geo.dim == 3) {
        return Err(invalid("geometry", "frenet curves need a Euclidean plane or space"));
    }
    Ok(FrenetSpec {
        input: FrenetInput { length, kappa, tau },
        closed: raw.closed.unwrap_or(false),
    })
}

fn build_form(raw: &RawForm, geo: &GeometrySpec) -> Result<FormSource> {
    let spec = match raw {
        RawForm::Shorthand(s) => {
            let (kind, name) = s
                .split_once(':')
                .ok_or_else(|| invalid("form", format!("expected `log-derivative-of: <test map>`, got `{s}`")))?;
            if kind.trim() != "log-derivative-of" {
                return Err(invalid("form", format!("unknown form kind `{}`", kind.trim())));
            }
            RawFormSpec::LogDerivativeOf(name.trim().to_string())
        }
        RawForm::Tagged(spec) => match spec {
            RawFormSpec::LogDerivativeOf(n) => RawFormSpec::LogDerivativeOf(n.clone()),
            RawFormSpec::Inline(rows) => RawFormSpec::Inline(rows.clone()),
            RawFormSpec::Sampled(v) => RawFormSpec::Sampled(v.clone()),
            RawFormSpec::Frenet(f) => return Ok(FormSource::Frenet(build_frenet(f, geo)?)),
        },
    };
    let d = geo.group.dim();
    Ok(match spec {
        RawFormSpec::LogDerivativeOf(name) => {
            let t = test_map(&name).map_err(|e| invalid("form.log-derivative-of", e.to_string()))?;
            if t.geometry.ends_with("-group") {
                let native = klein::geometry_by_name(t.geometry)?;
                if native.group.name() != geo.group.name() {
                    return Err(invalid(
                        "form.log-derivative-of",
                        format!(
                            "{} is valued in {}, not {}",
                            t.name,
                            native.group.name(),
                            geo.group.name()
                        ),
                    ));
                }
            } else {
                t.evaluator(geo)
                    .map_err(|e| invalid("form.log-derivative-of", e.to_string()))?;
            }
            FormSource::LogDerivativeOf(name)
        }
        RawFormSpec::Inline(rows) => {
            let mut out = Vec::with_capacity(rows.len());
            for (k, row) in rows.iter().enumerate() {
                if row.len() != d {
                    return Err(invalid(
                        &format!("form.inline[{k}]"),
                        format!("needs {d} expressions, got {}", row.len()),
                    ));
                }
                let parsed = row
                    .iter()
                    .enumerate()
                    .map(|(i, s)| parse_expr(s).map_err(|e| invalid(&format!("form.inline[{k}][{i}]"), e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                out.push(parsed);
            }
            FormSource::Inline(out)
        }
        RawFormSpec::Sampled(v) => FormSource::Sampled(v),
        RawFormSpec::Frenet(_) => unreachable!(),
    })
}

fn check_form_against_domain(form: Option<&FormSource>, domain: Option<&DomainSpec>, d: usize) -> Result<()> {
    let Some(form) = form else {
        return Ok(());
    };
    let Some(domain) = domain else {
        return match form {
            FormSource::Frenet(_) => Ok(()),
            _ => Err(invalid("domain", "required for mesh forms")),
        };
    };
    let sigma = domain.sigma();
    match form {
        FormSource::Inline(rows) => {
            if rows.len() != sigma {
                return Err(invalid(
                    "form.inline",
                    format!("needs one row per domain direction ({sigma})"),
                ));
            }
            for (k, row) in rows.iter().enumerate() {
                for (i, e) in row.iter().enumerate() {
                    if e.max_var().is_some_and(|v| v >= sigma) {
                        return Err(invalid(
                            &format!("form.inline[{k}][{i}]"),
                            format!("uses a coordinate beyond the {sigma}-dimensional domain"),
                        ));
                    }
                }
            }
        }
        FormSource::Sampled(v) => {
            if v.len() != domain.node_count() {
                return Err(invalid(
                    "form.sampled",
                    format!("needs one entry per node ({})", domain.node_count()),
                ));
            }
            if let Some(n) = v
                .iter()
                .position(|node| node.len() != sigma || node.iter().any(|c| c.len() != d))
            {
                return Err(invalid(
                    &format!("form.sampled[{n}]"),
                    format!("needs {sigma} rows of {d} coefficients"),
                ));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &Overrides::default())
}

/// Like [`parse_config`], applying command-line overrides before validation.
pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<RunConfig> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
    let Value::Object(root) = &mut value else {
        return Err(Error::ParseError("the configuration must be a JSON object".into()));
    };
    let tol_entry = root
        .entry("tolerances")
        .or_insert_with(|| Value::Object(Default::default()));
    if let Value::Object(t) = tol_entry {
        if let Some(s) = overrides.step {
            t.insert("step".into(), s.into());
        }
        if let Some(s) = overrides.tol {
            t.insert("tol".into(), s.into());
        }
    }
    if let Some(s) = overrides.seed {
        root.insert("seed".into(), s.into());
    }
    let canonical = serde_json::to_string(&value).map_err(|e| Error::ParseError(e.to_string()))?;
    let hash = format!("{:x}", Sha256::digest(canonical.as_bytes()));
    let raw: RawConfig = serde_json::from_value(value).map_err(|e| invalid("config", e.to_string()))?;

    let t = &raw.tolerances;
    let tolerances = Tolerances {
        lin_tol: positive("tolerances.lin_tol", t.lin_tol, DEFAULT_LIN_TOL)?,
        membership_tol: positive("tolerances.membership_tol", t.membership_tol, DEFAULT_MEMBERSHIP_TOL)?,
        step: positive("tolerances.step", t.step, 1e-3)?,
        triviality_tol: positive("tolerances.triviality_tol", t.triviality_tol, 1e-6)?,
        isotropy_tol: positive("tolerances.isotropy_tol", t.isotropy_tol, 1e-7)?,
        tol: t.tol.map(|v| positive("tolerances.tol", Some(v), 1.0)).transpose()?,
    };
    let mut geometry = build_geometry(&raw.geometry)?;
    geometry.group = geometry
        .group
        .clone()
        .with_tolerances(tolerances.lin_tol, tolerances.membership_tol);

    let form = raw.form.as_ref().map(|f| build_form(f, &geometry)).transpose()?;
    let map = match &form {
        Some(FormSource::LogDerivativeOf(name)) => Some(test_map(name)?),
        _ => None,
    };
    let domain = raw.domain.as_ref().map(|d| build_domain(d, map.as_ref())).transpose()?;
    check_form_against_domain(form.as_ref(), domain.as_ref(), geometry.group.dim())?;

    let x0 = raw.anchors.x0.unwrap_or(0);
    if let Some(d) = &domain {
        if x0 >= d.node_count() {
            return Err(invalid(
                "anchors.x0",
                format!("must be below the node count {}", d.node_count()),
            ));
        }
        d.build(x0).map_err(|e| match e {
            Error::ValidationError { .. } => e,
            other => invalid("domain", other.to_string()),
        })?;
    }
    let group_valued = map.as_ref().is_some_and(|t| t.geometry.ends_with("-group"));
    let point_geo = if group_valued {
        klein::left_regular(geometry.group.clone())
    } else {
        geometry.clone()
    };
    let m0 = match &raw.anchors.m0 {
        Some(c) => Some(point_geo.point(DVector::from_column_slice(c)).map_err(|e| match e {
            Error::ConstraintViolated { residual, .. } => invalid(
                "anchors.m0",
                format!("must lie on {} (constraint residual {residual:.3e})", point_geo.name),
            ),
            other => invalid("anchors.m0", other.to_string()),
        })?),
        None => None,
    };
    let g0 = match &raw.anchors.g0 {
        Some(m) => Some(
            geometry
                .group
                .element(matrix("anchors.g0", m)?)
                .map_err(|e| invalid("anchors.g0", e.to_string()))?,
        ),
        None => None,
    };

    let path = match &raw.path {
        Some(p) => {
            let sigma = domain.as_ref().map(|d| d.sigma()).unwrap_or(1);
            if p.points.len() < 2 || p.points.iter().any(|q| q.len() != sigma) {
                return Err(invalid(
                    "path.points",
                    format!("needs at least two points with {sigma} coordinates"),
                ));
            }
            Some(PathPolyline {
                points: p.points.iter().map(|q| DVector::from_column_slice(q)).collect(),
                samples_per_segment: p.samples_per_segment.unwrap_or(17).max(2),
            })
        }
        None => None,
    };

    let symmetry = match &raw.symmetry {
        Some(s) => {
            let elem = |key: &str, m: &Option<RowMajor>| -> Result<Option<GroupElement>> {
                m.as_ref()
                    .map(|m| {
                        geometry
                            .group
                            .element(matrix(key, m)?)
                            .map_err(|e| invalid(key, e.to_string()))
                    })
                    .transpose()
            };
            Some(SymmetryInputs {
                l: elem("symmetry.l", &s.l)?,
                r: elem("symmetry.r", &s.r)?,
                first: PathBuf::from(&s.first),
                second: PathBuf::from(&s.second),
                candidates: s.candidates.unwrap_or(16),
            })
        }
        None => None,
    };

    let outputs = Outputs {
        stem: raw.outputs.stem.clone().unwrap_or_else(|| "report".into()),
        formats: raw
            .outputs
            .formats
            .clone()
            .unwrap_or_else(|| vec![OutputFormat::Json, OutputFormat::Csv]),
    };
    if outputs.stem.is_empty() || outputs.stem.contains(['/', '\\']) {
        return Err(invalid("outputs.stem", "must be a plain file name"));
    }

    Ok(RunConfig {
        geometry,
        domain,
        form,
        anchors: Anchors { x0, m0, g0 },
        tolerances,
        path,
        symmetry,
        outputs,
        seed: raw.seed.unwrap_or(0),
        hash,
    })
}
