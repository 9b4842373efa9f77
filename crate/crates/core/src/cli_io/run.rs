//! Command dispatch.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{FormSource, RunConfig};
use crate::algebroid::{
    axiom_summary, log_derivative, log_derivative_ordinary, morphism_residual, MCFormField, MapField, OrdinaryEvaluator,
};
use crate::error::{Error, Result};
use crate::klein::{self, frenet_xi, ActionKind, GeometrySpec, MPoint, SymmetryPair};
use crate::lie_core::{membership_residual, AlgebraElement};
use crate::linalg::{self, RowMajor};
use crate::monodromy::{pointed_monodromy, MeshDomain, MeshOptions};
use crate::path_engine::{a_path_from_path, develop_with, DevelopOptions, PathPolyline};
use crate::reconstruct::{catalog_candidates, reconstruct_primitive, uniqueness_up_to_symmetry, Candidate};
use crate::test_maps::test_map;

/// Default threshold on the largest node residual of `validate`.
pub const VALIDATE_TOL: f64 = 5e-2;
/// Default threshold on the round-trip error and the Frenet closure error.
pub const ROUNDTRIP_TOL: f64 = 1e-6;
/// Default threshold on the symmetry deviation.
pub const SYMMETRY_TOL: f64 = 1e-7;
/// Default bound on the Richardson estimate of `develop`.
pub const DEVELOP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    Develop,
    Monodromy,
    Reconstruct,
    Roundtrip,
    Frenet,
    Symmetry,
}

const COMMANDS: [(Command, &str); 7] = [
    (Command::Validate, "validate"),
    (Command::Develop, "develop"),
    (Command::Monodromy, "monodromy"),
    (Command::Reconstruct, "reconstruct"),
    (Command::Roundtrip, "roundtrip"),
    (Command::Frenet, "frenet"),
    (Command::Symmetry, "symmetry"),
];

impl Command {
    pub fn all() -> impl Iterator<Item = Command> {
        COMMANDS.iter().map(|c| c.0)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = COMMANDS.iter().find(|c| c.0 == *self).map(|c| c.1).unwrap_or("?");
        f.write_str(name)
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        COMMANDS
            .iter()
            .find(|c| c.1 == s)
            .map(|c| c.0)
            .ok_or_else(|| Error::InvalidInput(format!("unknown command `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    /// A residual exceeds its tolerance.
    QuantitativeFailure,
    /// Axiom violation, nontrivial monodromy, or another structural obstruction.
    StructuralError,
    /// The configuration cannot drive the command.
    ConfigError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::ConfigError => 1,
            Status::QuantitativeFailure => 2,
            Status::StructuralError => 3,
        }
    }

    pub fn of_error(e: &Error) -> Status {
        match e {
            Error::StepTooLarge { .. } | Error::NotRelated { .. } => Status::QuantitativeFailure,
            Error::ParseError(_)
            | Error::ValidationError { .. }
            | Error::UnknownGeometry(_)
            | Error::InvalidInput(_)
            | Error::Io(_) => Status::ConfigError,
            _ => Status::StructuralError,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        let debug = format!("{e:?}");
        let kind = debug
            .split(|c: char| !c.is_alphanumeric())
            .next()
            .unwrap_or_default()
            .to_string();
        ErrorInfo {
            kind,
            message: e.to_string(),
        }
    }
}

/// One row per node or sample: parameter coordinates, image coordinates, residual.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Rows per grid line, for plot files.
    #[serde(skip)]
    pub row_break: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: Command,
    pub status: Status,
    /// Verdicts, residual maxima and the thresholds they were held to.
    pub summary: Value,
    /// Full structured results.
    pub details: Value,
    pub table: Table,
    pub error: Option<ErrorInfo>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    fn failed(command: Command, e: &Error, details: Value) -> Self {
        RunReport {
            command,
            status: Status::of_error(e),
            summary: json!({}),
            details,
            table: Table::default(),
            error: Some(e.into()),
        }
    }

    /// One-line human-readable verdict.
    pub fn headline(&self) -> String {
        let status = serde_json::to_value(self.status).unwrap_or_default();
        let mut line = format!("{}: {}", self.command, status.as_str().unwrap_or("?"));
        if let Some(e) = &self.error {
            line.push_str(&format!(" ({})", e.message));
        }
        line
    }
}

fn param_names(sigma: usize) -> Vec<String> {
    match sigma {
        1 => vec!["t".into()],
        2 => vec!["u".into(), "v".into()],
        3 => vec!["u".into(), "v".into(), "w".into()],
        _ => (0..sigma).map(|k| format!("x{k}")).collect(),
    }
}

fn image_names(k: usize) -> Vec<String> {
    match k {
        2 => vec!["f_x".into(), "f_y".into()],
        3 => vec!["f_x".into(), "f_y".into(), "f_z".into()],
        _ => (0..k).map(|i| format!("f_{i}")).collect(),
    }
}

fn columns(sigma: usize, coord_dim: usize, residual: &str) -> Vec<String> {
    let mut c = param_names(sigma);
    c.extend(image_names(coord_dim));
    c.push(residual.into());
    c
}

fn row(x: &DVector<f64>, m: &DVector<f64>, residual: f64) -> Vec<f64> {
    x.iter().chain(m.iter()).copied().chain([residual]).collect()
}

fn grid_break(mesh: &MeshDomain) -> Option<usize> {
    mesh.grid.as_ref().filter(|g| g.dim() == 2).map(|g| g.counts[1])
}

struct Prepared {
    mesh: Arc<MeshDomain>,
    geo: GeometrySpec,
    omega: MCFormField,
    map: Option<MapField>,
}

fn need<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::ValidationError {
        key: what.into(),
        constraint: "required by this command".into(),
    })
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let domain = need(cfg.domain.as_ref(), "domain")?;
    let form = need(cfg.form.as_ref(), "form")?;
    let mesh = Arc::new(domain.build(cfg.anchors.x0)?);
    let geo = cfg.form_geometry()?;
    let (omega, map) = match form {
        FormSource::LogDerivativeOf(name) => {
            let f = test_map(name)?.on_mesh(mesh.clone(), &geo)?;
            let omega = if geo.action == ActionKind::LeftRegular {
                log_derivative_ordinary(&f, &geo.group)?
            } else {
                log_derivative(&f)?
            };
            (omega, Some(f))
        }
        FormSource::Inline(rows) => {
            let rows = rows.clone();
            let d = geo.group.dim();
            let eval: OrdinaryEvaluator = Arc::new(move |x, v| {
                let xs = x.as_slice();
                let mut c = DVector::zeros(d);
                for (k, r) in rows.iter().enumerate() {
                    if v[k] != 0.0 {
                        c += DVector::from_fn(d, |i, _| r[i].eval(xs)) * v[k];
                    }
                }
                Ok(AlgebraElement::new(c))
            });
            (MCFormField::ordinary(mesh.clone(), geo.clone(), eval)?, None)
        }
        FormSource::Sampled(values) => {
            let values = values
                .iter()
                .map(|node| node.iter().map(|c| AlgebraElement::from_slice(c)).collect())
                .collect();
            (MCFormField::ordinary_sampled(mesh.clone(), geo.clone(), values)?, None)
        }
        FormSource::Frenet(_) => {
            return Err(Error::ValidationError {
                key: "form".into(),
                constraint: "frenet input is only used by the frenet command".into(),
            })
        }
    };
    Ok(Prepared { mesh, geo, omega, map })
}

/// `m0` from the anchors, then `g0`, then the map value at `x0`, then the base point.
fn anchor_point(cfg: &RunConfig, p: &Prepared) -> MPoint {
    if let Some(m) = &cfg.anchors.m0 {
        return m.clone();
    }
    if let (Some(g), ActionKind::LeftRegular) = (&cfg.anchors.g0, p.geo.action) {
        return MPoint::new(linalg::flatten_row_major(&g.mat));
    }
    if let Some(f) = &p.map {
        return f.values[p.mesh.x0].clone();
    }
    p.geo.base_point.clone()
}

fn mesh_options(cfg: &RunConfig) -> MeshOptions {
    let mut o = MeshOptions::with_step(cfg.tolerances.step);
    o.triviality_tol = cfg.tolerances.triviality_tol;
    o.isotropy_tol = cfg.tolerances.isotropy_tol;
    o
}

fn validate(cfg: &RunConfig) -> Result<RunReport> {
    let p = prepare(cfg)?;
    let axioms = axiom_summary(&p.omega, &p.geo, p.mesh.x0)?;
    let res = morphism_residual(&p.omega, &p.geo)?;
    let tol = cfg.tolerances.tol.unwrap_or(VALIDATE_TOL);
    let (status, error) = match axioms.first_violation() {
        Some(e) => (Status::StructuralError, Some(ErrorInfo::from(&e))),
        None if res.max > tol => (Status::QuantitativeFailure, None),
        None => (Status::Pass, None),
    };
    let coord_dim = p.map.as_ref().map(|f| f.geometry.coord_dim).unwrap_or(0);
    let mut cols = columns(p.mesh.sigma(), coord_dim, "residual");
    cols.insert(cols.len() - 1, "rank".into());
    let rows = (0..p.mesh.len())
        .map(|n| {
            let m = p
                .map
                .as_ref()
                .map(|f| f.values[n].coords.clone())
                .unwrap_or(DVector::zeros(0));
            let mut r = row(&p.mesh.nodes[n], &m, res.per_node[n]);
            r.insert(r.len() - 1, p.omega.fibers[n].rank() as f64);
            r
        })
        .collect();
    Ok(RunReport {
        command: Command::Validate,
        status,
        summary: json!({
            "axioms_passed": axioms.passed(),
            "maximal": axioms.maximal,
            "rank_min": axioms.rank_min,
            "rank_max": axioms.rank_max,
            "residual_max": res.max,
            "residual_argmax": res.argmax,
            "anchor_residual_max": res.anchor_max,
            "form_kind": res.kind,
            "tolerance": tol,
        }),
        details: json!({ "axioms": axioms }),
        table: Table {
            columns: cols,
            rows,
            row_break: grid_break(&p.mesh),
        },
        error,
    })
}

fn default_path(mesh: &MeshDomain) -> PathPolyline {
    PathPolyline {
        points: vec![mesh.nodes[0].clone(), mesh.nodes[mesh.len() - 1].clone()],
        samples_per_segment: 33,
    }
}

fn develop(cfg: &RunConfig) -> Result<RunReport> {
    let p = prepare(cfg)?;
    let poly = cfg.path.clone().unwrap_or_else(|| default_path(&p.mesh));
    let path = a_path_from_path(&poly, &p.omega)?;
    let length: f64 = poly.points.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum();
    let mut opts = DevelopOptions::with_step(cfg.tolerances.step);
    opts.tol = cfg.tolerances.tol.unwrap_or(DEVELOP_TOL);
    if length > 0.0 {
        opts.step = (opts.step / length).min(1.0);
    }
    let dev = develop_with(&path, &p.geo.group, &opts)?;
    let m0 = anchor_point(cfg, &p);
    let rows = dev
        .g_samples
        .iter()
        .zip(&path.gamma)
        .map(|(g, x)| {
            Ok(row(
                x,
                &klein::act(g, &m0, &p.geo)?.coords,
                membership_residual(&g.mat, &p.geo.group),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let end = klein::act(&dev.final_element, &m0, &p.geo)?;
    Ok(RunReport {
        command: Command::Develop,
        status: Status::Pass,
        summary: json!({
            "richardson_estimate": dev.err_est,
            "anchor_residual": path.anchor_residual,
            "tolerance": opts.tol,
            "path_length": length,
            "end_point": end.coords.as_slice(),
        }),
        details: json!({
            "final_element": RowMajor::from(&dev.final_element.mat),
            "path": poly,
            "m0": m0.coords.as_slice(),
        }),
        table: Table {
            columns: columns(p.mesh.sigma(), p.geo.coord_dim, "membership_residual"),
            rows,
            row_break: None,
        },
        error: None,
    })
}

fn monodromy(cfg: &RunConfig) -> Result<RunReport> {
    let p = prepare(cfg)?;
    let m0 = anchor_point(cfg, &p);
    let report = pointed_monodromy(&p.omega, &m0, &p.geo, &mesh_options(cfg))?;
    let sigma = p.mesh.sigma();
    let mut cols = vec!["edge".to_string()];
    cols.extend(param_names(sigma).into_iter().map(|n| format!("winding_{n}")));
    cols.extend(image_names(p.geo.coord_dim));
    cols.push("deviation".into());
    let rows = report
        .cycles
        .iter()
        .map(|c| {
            std::iter::once(c.closing_edge as f64)
                .chain(c.winding.iter().copied())
                .chain(c.image.iter().copied())
                .chain([c.deviation])
                .collect()
        })
        .collect();
    Ok(RunReport {
        command: Command::Monodromy,
        status: Status::Pass,
        summary: json!({
            "trivial": report.trivial,
            "max_deviation": report.max_deviation(),
            "cycles": report.cycles.len(),
            "noncontractible_cycles": report.cycles.iter().filter(|c| !c.contractible).count(),
            "tolerance": report.tolerance,
        }),
        details: json!({ "monodromy": report }),
        table: Table {
            columns: cols,
            rows,
            row_break: None,
        },
        error: None,
    })
}

fn primitive_rows(mesh: &MeshDomain, values: &[MPoint], residual: &[f64]) -> Vec<Vec<f64>> {
    (0..mesh.len())
        .map(|n| row(&mesh.nodes[n], &values[n].coords, residual[n]))
        .collect()
}

fn reconstruct_or_report(
    cfg: &RunConfig,
    p: &Prepared,
    m0: &MPoint,
    command: Command,
) -> Result<std::result::Result<crate::reconstruct::PrimitiveField, RunReport>> {
    match reconstruct_primitive(&p.omega, m0, &p.geo, &mesh_options(cfg)) {
        Ok(f) => Ok(Ok(f)),
        Err(Error::NontrivialMonodromy(report)) => {
            let e = Error::NontrivialMonodromy(report.clone());
            let mut r = RunReport::failed(command, &e, json!({ "monodromy": report }));
            r.summary = json!({ "max_deviation": report.max_deviation(), "tolerance": report.tolerance });
            Ok(Err(r))
        }
        Err(e) => Err(e),
    }
}

fn node_residuals(p: &Prepared, f: &crate::reconstruct::PrimitiveField) -> Vec<f64> {
    let mut res = f.isotropy_residuals.clone();
    for &(e, r) in &f.cycle_residuals {
        let b = p.mesh.edges[e].b;
        res[b] = res[b].max(r);
    }
    res
}

fn reconstruct(cfg: &RunConfig) -> Result<RunReport> {
    let p = prepare(cfg)?;
    let m0 = anchor_point(cfg, &p);
    let f = match reconstruct_or_report(cfg, &p, &m0, Command::Reconstruct)? {
        Ok(f) => f,
        Err(report) => return Ok(report),
    };
    let tol = cfg.tolerances.tol.unwrap_or(cfg.tolerances.triviality_tol);
    let status = if f.max_residual > tol {
        Status::QuantitativeFailure
    } else {
        Status::Pass
    };
    Ok(RunReport {
        command: Command::Reconstruct,
        status,
        summary: json!({
            "max_cycle_residual": f.max_residual,
            "max_isotropy_residual": f.max_isotropy_residual(),
            "max_deviation": f.monodromy.max_deviation(),
            "nodes": f.values.len(),
            "tolerance": tol,
        }),
        details: json!({ "monodromy": f.monodromy, "m0": m0.coords.as_slice() }),
        table: Table {
            columns: columns(p.mesh.sigma(), p.geo.coord_dim, "residual"),
            rows: primitive_rows(&p.mesh, &f.values, &node_residuals(&p, &f)),
            row_break: grid_break(&p.mesh),
        },
        error: None,
    })
}

fn roundtrip(cfg: &RunConfig) -> Result<RunReport> {
    if !matches!(cfg.form, Some(FormSource::LogDerivativeOf(_))) {
        return Err(Error::ValidationError {
            key: "form".into(),
            constraint: "roundtrip needs `log-derivative-of` a test map".into(),
        });
    }
    let p = prepare(cfg)?;
    let map = need(p.map.as_ref(), "form")?;
    let m0 = map.values[p.mesh.x0].clone();
    let f = match reconstruct_or_report(cfg, &p, &m0, Command::Roundtrip)? {
        Ok(f) => f,
        Err(report) => return Ok(report),
    };
    let errors: Vec<f64> = f.values.iter().zip(&map.values).map(|(a, b)| a.distance(b)).collect();
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    let tol = cfg.tolerances.tol.unwrap_or(ROUNDTRIP_TOL);
    Ok(RunReport {
        command: Command::Roundtrip,
        status: if max_error > tol {
            Status::QuantitativeFailure
        } else {
            Status::Pass
        },
        summary: json!({
            "max_error": max_error,
            "max_cycle_residual": f.max_residual,
            "max_isotropy_residual": f.max_isotropy_residual(),
            "nodes": f.values.len(),
            "tolerance": tol,
        }),
        details: json!({ "monodromy": f.monodromy, "m0": m0.coords.as_slice() }),
        table: Table {
            columns: columns(p.mesh.sigma(), p.geo.coord_dim, "error"),
            rows: primitive_rows(&p.mesh, &f.values, &errors),
            row_break: grid_break(&p.mesh),
        },
        error: None,
    })
}

fn frenet(cfg: &RunConfig) -> Result<RunReport> {
    let Some(FormSource::Frenet(spec)) = &cfg.form else {
        return Err(Error::ValidationError {
            key: "form".into(),
            constraint: "the frenet command needs a `frenet` form".into(),
        });
    };
    let geo = &cfg.geometry;
    let mut opts = DevelopOptions::with_step(cfg.tolerances.step);
    opts.richardson = false;
    let path = frenet_xi(&spec.input, geo, &opts)?;
    let mut o = opts.clone();
    o.step = (opts.step / spec.input.length).min(1.0);
    let dev = develop_with(&path, &geo.group, &o)?;
    let points = dev
        .g_samples
        .iter()
        .map(|g| klein::act(g, &geo.base_point, geo))
        .collect::<Result<Vec<_>>>()?;
    let closure = points[points.len() - 1].distance(&points[0]);
    let tol = cfg.tolerances.tol.unwrap_or(ROUNDTRIP_TOL);
    let constant = |v: &[f64]| v.windows(2).all(|w| w[0] == w[1]);
    let kappa = &spec.input.kappa;
    let tau = spec.input.tau.clone().unwrap_or_else(|| vec![0.0; kappa.len()]);
    let helix_radius = (constant(kappa) && constant(&tau) && kappa[0] != 0.0)
        .then(|| kappa[0] / (kappa[0] * kappa[0] + tau[0] * tau[0]));
    let rows = dev
        .g_samples
        .iter()
        .zip(&points)
        .zip(&path.t_grid)
        .map(|((g, m), t)| {
            let s = DVector::from_element(1, t * spec.input.length);
            row(&s, &m.coords, membership_residual(&g.mat, &geo.group))
        })
        .collect();
    Ok(RunReport {
        command: Command::Frenet,
        status: if spec.closed && closure > tol {
            Status::QuantitativeFailure
        } else {
            Status::Pass
        },
        summary: json!({
            "closure_error": closure,
            "closed_required": spec.closed,
            "length": spec.input.length,
            "analytic_radius": helix_radius,
            "tolerance": tol,
        }),
        details: json!({ "end_point": points[points.len() - 1].coords.as_slice() }),
        table: Table {
            columns: columns(1, geo.coord_dim, "membership_residual"),
            rows,
            row_break: None,
        },
        error: None,
    })
}

/// Image values stored in the `table` of a JSON report.
pub fn read_result_values(path: &std::path::Path, mesh: &MeshDomain, coord_dim: usize) -> Result<Vec<MPoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))?;
    let table: Table = {
        let columns: Vec<String> = serde_json::from_value(doc["table"]["columns"].clone())
            .map_err(|e| Error::ParseError(format!("{}: table.columns: {e}", path.display())))?;
        let rows: Vec<Vec<f64>> = serde_json::from_value(doc["table"]["rows"].clone())
            .map_err(|e| Error::ParseError(format!("{}: table.rows: {e}", path.display())))?;
        Table {
            columns,
            rows,
            row_break: None,
        }
    };
    let sigma = mesh.sigma();
    let images: Vec<usize> = (0..table.columns.len())
        .filter(|&i| table.columns[i].starts_with("f_"))
        .collect();
    if images.len() != coord_dim || table.rows.len() != mesh.len() {
        return Err(Error::InvalidInput(format!(
            "{} holds {} rows with {} image columns; expected {} and {coord_dim}",
            path.display(),
            table.rows.len(),
            images.len(),
            mesh.len()
        )));
    }
    table
        .rows
        .iter()
        .enumerate()
        .map(|(n, r)| {
            let x = DVector::from_fn(sigma, |k, _| r[k]);
            if (&x - &mesh.nodes[n]).norm() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "{}: row {n} does not sit at mesh node {n}",
                    path.display()
                )));
            }
            Ok(MPoint::new(DVector::from_fn(coord_dim, |i, _| r[images[i]])))
        })
        .collect()
}

fn symmetry(cfg: &RunConfig) -> Result<RunReport> {
    let inputs = need(cfg.symmetry.as_ref(), "symmetry")?;
    let domain = need(cfg.domain.as_ref(), "domain")?;
    let mesh = Arc::new(domain.build(cfg.anchors.x0)?);
    let geo = cfg.form_geometry()?;
    let f1 = MapField::sampled(
        mesh.clone(),
        geo.clone(),
        read_result_values(&inputs.first, &mesh, geo.coord_dim)?,
    )?;
    let f2 = MapField::sampled(
        mesh.clone(),
        geo.clone(),
        read_result_values(&inputs.second, &mesh, geo.coord_dim)?,
    )?;
    let tol = cfg.tolerances.tol.unwrap_or(SYMMETRY_TOL);
    let candidates: Vec<SymmetryPair> = match &inputs.l {
        Some(l) => {
            let r = inputs.r.clone().unwrap_or_else(|| geo.group.identity());
            vec![klein::is_symmetry_pair(l, &r, &geo.base_point, &geo)?]
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            catalog_candidates(&f1, &f2, &geo, &mut rng, inputs.candidates)?
        }
    };
    let mut best: Option<(f64, usize)> = None;
    let mut found = None;
    for (i, c) in candidates.iter().enumerate() {
        match uniqueness_up_to_symmetry(&f1, &f2, &Candidate::Symmetry(c.clone()), &geo, tol) {
            Ok(v) => {
                found = Some((i, v));
                break;
            }
            Err(Error::NotRelated { deviation, node }) => {
                if best.is_none_or(|b| deviation < b.0) {
                    best = Some((deviation, node));
                }
            }
            Err(e) => return Err(e),
        }
    }
    let (status, pair, error) = match &found {
        Some((i, _)) => (Status::Pass, &candidates[*i], None),
        None => {
            let (deviation, node) = best.unwrap_or((f64::INFINITY, 0));
            let e = Error::NotRelated { deviation, node };
            (Status::QuantitativeFailure, &candidates[0], Some(ErrorInfo::from(&e)))
        }
    };
    let residuals = f1
        .values
        .iter()
        .zip(&f2.values)
        .map(|(a, b)| Ok(klein::apply_symmetry(pair, a, &geo)?.distance(b)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RunReport {
        command: Command::Symmetry,
        status,
        summary: json!({
            "related": found.is_some(),
            "deviation": residuals.iter().copied().fold(0.0, f64::max),
            "candidates_tried": candidates.len(),
            "normalizer_residual": pair.normalizer_residual,
            "tolerance": tol,
        }),
        details: json!({
            "l": RowMajor::from(&pair.l.mat),
            "r": RowMajor::from(&pair.r.mat),
        }),
        table: Table {
            columns: columns(mesh.sigma(), geo.coord_dim, "deviation"),
            rows: primitive_rows(&mesh, &f2.values, &residuals),
            row_break: grid_break(&mesh),
        },
        error,
    })
}

/// Runs one command; failures are folded into the report's status.
pub fn run_command(cmd: Command, cfg: &RunConfig) -> RunReport {
    log::info!("running {cmd} on {}", cfg.geometry.name);
    let out = match cmd {
        Command::Validate => validate(cfg),
        Command::Develop => develop(cfg),
        Command::Monodromy => monodromy(cfg),
        Command::Reconstruct => reconstruct(cfg),
        Command::Roundtrip => roundtrip(cfg),
        Command::Frenet => frenet(cfg),
        Command::Symmetry => symmetry(cfg),
    };
    let report = out.unwrap_or_else(|e| RunReport::failed(cmd, &e, json!({})));
    log::info!("{}", report.headline());
    report
}
