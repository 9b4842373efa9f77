//! A-paths on `[0, 1]`, their development into the group, reparameterization
//! and concatenation.
//!
//! An [`APath`] carries sampled values of `xi(t)` in `g` together with the
//! covered domain path. Its parameter interval is split into pieces at
//! `breaks`; `xi` is smooth inside each piece but may jump between pieces
//! (corners of a polyline). Values between samples come from an attached
//! evaluator when one exists, otherwise from cubic interpolation that never
//! crosses a break.

mod integrate;

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::algebroid::MCFormField;
use crate::error::{Error, Result};
use crate::lie_core::{AlgebraElement, GroupSpec};

pub use integrate::{develop, develop_with, DevelopOptions, DevelopmentResult, Integrator};

/// `xi` on piece `k` at parameter `t`.
pub type XiEvaluator = Arc<dyn Fn(usize, f64) -> Result<AlgebraElement> + Send + Sync>;

const COMPOSE_TOL: f64 = 1e-9;

#[derive(Clone)]
pub struct APath {
    pub t_grid: Vec<f64>,
    pub xi: Vec<AlgebraElement>,
    pub gamma: Vec<DVector<f64>>,
    /// Piece boundaries, starting at 0 and ending at 1.
    pub breaks: Vec<f64>,
    pub meta: String,
    /// Max of `|#a(t) - gamma'(t)|` over samples, when built from a form.
    pub anchor_residual: f64,
    evaluator: Option<XiEvaluator>,
}

impl fmt::Debug for APath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("APath")
            .field("samples", &self.t_grid.len())
            .field("pieces", &(self.breaks.len() - 1))
            .field("meta", &self.meta)
            .field("anchor_residual", &self.anchor_residual)
            .field("evaluator", &self.evaluator.is_some())
            .finish()
    }
}

/// A polyline in the parameter domain, traversed at uniform speed per segment.
#[derive(Clone, Debug, Serialize)]
pub struct PathPolyline {
    pub points: Vec<DVector<f64>>,
    /// Samples per segment in the resulting A-path (at least 2).
    pub samples_per_segment: usize,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 2 {
        return Err(Error::InvalidInput("an A-path needs at least two samples".into()));
    }
    if t_grid[0] != 0.0 || t_grid[t_grid.len() - 1] != 1.0 {
        return Err(Error::InvalidInput("t_grid must start at 0 and end at 1".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("t_grid must be strictly increasing".into()));
    }
    Ok(())
}

fn lagrange(ts: &[f64], ys: &[&AlgebraElement], t: f64) -> AlgebraElement {
    let mut out = AlgebraElement::zeros(ys[0].dim());
    for (i, y) in ys.iter().enumerate() {
        let mut w = 1.0;
        for (j, &tj) in ts.iter().enumerate() {
            if i != j {
                w *= (t - tj) / (ts[i] - tj);
            }
        }
        out.coeffs += &y.coeffs * w;
    }
    out
}

impl APath {
    /// A purely sampled path with a single smooth piece.
    pub fn sampled(t_grid: Vec<f64>, xi: Vec<AlgebraElement>, gamma: Vec<DVector<f64>>, meta: &str) -> Result<Self> {
        Self::sampled_with_breaks(t_grid, xi, gamma, vec![0.0, 1.0], meta)
    }

    /// Sampled path whose interior breaks must be sample points.
    pub fn sampled_with_breaks(
        t_grid: Vec<f64>,
        xi: Vec<AlgebraElement>,
        gamma: Vec<DVector<f64>>,
        breaks: Vec<f64>,
        meta: &str,
    ) -> Result<Self> {
        check_grid(&t_grid)?;
        check_grid(&breaks)?;
        if xi.len() != t_grid.len() || gamma.len() != t_grid.len() {
            return Err(Error::InvalidInput("xi and gamma must have one sample per t".into()));
        }
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("xi samples must be finite".into()));
        }
        if breaks
            .iter()
            .any(|b| t_grid.binary_search_by(|t| t.total_cmp(b)).is_err())
        {
            return Err(Error::InvalidInput(
                "breaks of a sampled path must be sample points".into(),
            ));
        }
        Ok(APath {
            t_grid,
            xi,
            gamma,
            breaks,
            meta: meta.to_string(),
            anchor_residual: 0.0,
            evaluator: None,
        })
    }

    /// Path whose samples are filled from `eval`.
    pub fn from_evaluator(
        t_grid: Vec<f64>,
        breaks: Vec<f64>,
        gamma: Vec<DVector<f64>>,
        eval: XiEvaluator,
        meta: &str,
    ) -> Result<Self> {
        check_grid(&t_grid)?;
        check_grid(&breaks)?;
        if gamma.len() != t_grid.len() {
            return Err(Error::InvalidInput("gamma must have one sample per t".into()));
        }
        let mut path = APath {
            xi: Vec::with_capacity(t_grid.len()),
            t_grid,
            gamma,
            breaks,
            meta: meta.to_string(),
            anchor_residual: 0.0,
            evaluator: Some(eval),
        };
        for i in 0..path.t_grid.len() {
            let t = path.t_grid[i];
            let x = path.xi_in_piece(path.piece_of(t), t)?;
            if !x.is_finite() {
                return Err(Error::InvalidInput(format!("xi is not finite at t = {t}")));
            }
            path.xi.push(x);
        }
        Ok(path)
    }

    /// Constant `xi` over a constant domain point.
    pub fn constant(xi: AlgebraElement, x: DVector<f64>, samples: usize) -> Self {
        let samples = samples.max(2);
        let t_grid: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
        let xi_c = xi.clone();
        APath {
            xi: vec![xi; samples],
            gamma: vec![x; samples],
            t_grid,
            breaks: vec![0.0, 1.0],
            meta: "constant".into(),
            anchor_residual: 0.0,
            evaluator: Some(Arc::new(move |_, _| Ok(xi_c.clone()))),
        }
    }

    /// The trivial A-path over the constant path at `x`.
    pub fn zero(d: usize, x: DVector<f64>) -> Self {
        let mut p = Self::constant(AlgebraElement::zeros(d), x, 2);
        p.meta = "zero".into();
        p
    }

    pub fn with_meta(mut self, meta: &str) -> Self {
        self.meta = meta.to_string();
        self
    }

    pub fn has_evaluator(&self) -> bool {
        self.evaluator.is_some()
    }

    pub fn algebra_dim(&self) -> usize {
        self.xi[0].dim()
    }

    pub fn pieces(&self) -> usize {
        self.breaks.len() - 1
    }

    /// Index of the piece containing `t`; the last piece is closed on the right.
    pub fn piece_of(&self, t: f64) -> usize {
        let k = self.breaks.partition_point(|&b| b <= t);
        k.saturating_sub(1).min(self.pieces() - 1)
    }

    /// `xi` at `t`, using the one-sided limit from piece `k`.
    pub fn xi_in_piece(&self, k: usize, t: f64) -> Result<AlgebraElement> {
        if let Some(eval) = &self.evaluator {
            return eval(k, t);
        }
        let lo_t = self.breaks[k];
        let hi_t = self.breaks[k + 1];
        let lo = self.t_grid.partition_point(|&s| s < lo_t);
        let hi = self.t_grid.partition_point(|&s| s <= hi_t) - 1;
        let i = self
            .t_grid
            .partition_point(|&s| s <= t)
            .saturating_sub(1)
            .clamp(lo, hi.max(lo + 1) - 1);
        let width = (hi - lo + 1).min(4);
        let start = (i.saturating_sub(1)).clamp(lo, hi + 1 - width);
        let ts = &self.t_grid[start..start + width];
        let ys: Vec<&AlgebraElement> = self.xi[start..start + width].iter().collect();
        Ok(lagrange(ts, &ys, t))
    }

    pub fn xi_at(&self, t: f64) -> Result<AlgebraElement> {
        self.xi_in_piece(self.piece_of(t), t)
    }

    /// Linear interpolation of the covered path.
    pub fn gamma_at(&self, t: f64) -> DVector<f64> {
        let n = self.t_grid.len();
        let i = self.t_grid.partition_point(|&s| s <= t).clamp(1, n - 1);
        let (t0, t1) = (self.t_grid[i - 1], self.t_grid[i]);
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        &self.gamma[i - 1] * (1.0 - s) + &self.gamma[i] * s
    }

    pub fn start(&self) -> &DVector<f64> {
        &self.gamma[0]
    }

    pub fn end(&self) -> &DVector<f64> {
        &self.gamma[self.gamma.len() - 1]
    }

    fn evaluator_or_interpolant(&self) -> XiEvaluator {
        match &self.evaluator {
            Some(e) => e.clone(),
            None => {
                let copy = self.clone();
                Arc::new(move |k, t| copy.xi_in_piece(k, t))
            }
        }
    }

    /// The same path traversed backwards: `t -> -xi(1 - t)`.
    pub fn reversed(&self) -> APath {
        let inner = self.evaluator_or_interpolant();
        let p = self.pieces();
        let eval: XiEvaluator = Arc::new(move |k, t| Ok(-&inner(p - 1 - k, 1.0 - t)?));
        let t_grid: Vec<f64> = self.t_grid.iter().rev().map(|t| 1.0 - t).collect();
        let breaks: Vec<f64> = self.breaks.iter().rev().map(|b| 1.0 - b).collect();
        let gamma: Vec<DVector<f64>> = self.gamma.iter().rev().cloned().collect();
        let xi: Vec<AlgebraElement> = self.xi.iter().rev().map(|x| -x).collect();
        APath {
            t_grid: fix_ends(t_grid),
            xi,
            gamma,
            breaks: fix_ends(breaks),
            meta: format!("reversed({})", self.meta),
            anchor_residual: self.anchor_residual,
            evaluator: Some(eval),
        }
    }
}

fn fix_ends(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.len();
    v[0] = 0.0;
    v[n - 1] = 1.0;
    v
}

/// Quintic smootherstep: `tau(0) = 0`, `tau(1) = 1`, `tau'` vanishes at both ends.
pub fn smoothstep(t: f64) -> f64 {
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

pub fn smoothstep_derivative(t: f64) -> f64 {
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

fn smoothstep_inverse(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if smoothstep(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `a^tau(t) = tau'(t) a(tau(t))` with the quintic smootherstep `tau`.
pub fn smooth_reparam(path: &APath) -> APath {
    let inner = path.evaluator_or_interpolant();
    let eval: XiEvaluator = Arc::new(move |k, t| Ok(inner(k, smoothstep(t))?.scale(smoothstep_derivative(t))));
    let breaks: Vec<f64> = fix_ends(path.breaks.iter().map(|&b| smoothstep_inverse(b)).collect());
    let gamma: Vec<DVector<f64>> = path.t_grid.iter().map(|&t| path.gamma_at(smoothstep(t))).collect();
    let mut out = APath {
        t_grid: path.t_grid.clone(),
        xi: Vec::with_capacity(path.t_grid.len()),
        gamma,
        breaks,
        meta: format!("smoothed({})", path.meta),
        anchor_residual: path.anchor_residual,
        evaluator: Some(eval),
    };
    for i in 0..out.t_grid.len() {
        let t = out.t_grid[i];
        let k = out.piece_of(t);
        let x = out
            .xi_in_piece(k, t)
            .unwrap_or_else(|_| AlgebraElement::zeros(path.algebra_dim()));
        out.xi.push(x);
    }
    out
}

/// `a1 (.) a0`: `a0` on `[0, 1/2]`, then `a1`, each endpoint-smoothed first.
pub fn concatenate(a1: &APath, a0: &APath) -> Result<APath> {
    let gap = (a0.end() - a1.start()).norm();
    let scale = a0.end().norm().max(a1.start().norm()).max(1.0);
    if gap > COMPOSE_TOL * scale || a0.algebra_dim() != a1.algebra_dim() {
        return Err(Error::NotComposable { gap });
    }
    let s0 = smooth_reparam(a0);
    let s1 = smooth_reparam(a1);
    let p0 = s0.pieces();
    let e0 = s0.evaluator_or_interpolant();
    let e1 = s1.evaluator_or_interpolant();
    let eval: XiEvaluator = Arc::new(move |k, t| {
        if k < p0 {
            Ok(e0(k, 2.0 * t)?.scale(2.0))
        } else {
            Ok(e1(k - p0, 2.0 * t - 1.0)?.scale(2.0))
        }
    });
    let mut breaks: Vec<f64> = s0.breaks.iter().map(|b| 0.5 * b).collect();
    breaks.extend(s1.breaks.iter().skip(1).map(|b| 0.5 + 0.5 * b));
    let mut t_grid: Vec<f64> = s0.t_grid.iter().map(|t| 0.5 * t).collect();
    t_grid.extend(s1.t_grid.iter().skip(1).map(|t| 0.5 + 0.5 * t));
    let mut gamma = s0.gamma.clone();
    gamma.extend(s1.gamma.iter().skip(1).cloned());
    let mut out = APath::from_evaluator(
        fix_ends(t_grid),
        fix_ends(breaks),
        gamma,
        eval,
        &format!("({}) . ({})", a1.meta, a0.meta),
    )?;
    out.anchor_residual = a0.anchor_residual.max(a1.anchor_residual);
    Ok(out)
}

/// Lifts a polyline through the anchor right-inverse of `omega`.
pub fn a_path_from_path(gamma: &PathPolyline, omega: &MCFormField) -> Result<APath> {
    let pts = &gamma.points;
    if pts.is_empty() {
        return Err(Error::InvalidInput("empty polyline".into()));
    }
    let sigma = omega.sigma();
    if pts.iter().any(|p| p.len() != sigma) {
        return Err(Error::InvalidInput(format!(
            "polyline points must have {sigma} coordinates"
        )));
    }
    let d = omega.geometry.group.dim();
    if pts.len() == 1 {
        return Ok(APath::zero(d, pts[0].clone()));
    }
    let m = pts.len() - 1;
    let per = gamma.samples_per_segment.max(2);
    let breaks: Vec<f64> = fix_ends((0..=m).map(|k| k as f64 / m as f64).collect());
    let mut t_grid = vec![0.0];
    let mut gam = vec![pts[0].clone()];
    for k in 0..m {
        for s in 1..per {
            let u = s as f64 / (per - 1) as f64;
            t_grid.push((k as f64 + u) / m as f64);
            gam.push(&pts[k] * (1.0 - u) + &pts[k + 1] * u);
        }
    }
    let t_grid = fix_ends(t_grid);
    let xi = omega.xi_along_fn();
    let points = pts.clone();
    let eval: XiEvaluator = Arc::new(move |k, t| {
        let u = t * m as f64 - k as f64;
        let delta = (&points[k + 1] - &points[k]) * m as f64;
        let x = &points[k] + (&points[k + 1] - &points[k]) * u;
        xi(&x, &delta)
    });
    let mut path = APath::from_evaluator(t_grid, breaks, gam, eval, "lifted polyline")?;
    let mut anchor_res: f64 = 0.0;
    for i in 0..path.t_grid.len() {
        let (_, res) = omega.killing_at(&path.gamma[i])?;
        anchor_res = anchor_res.max(res);
    }
    path.anchor_residual = anchor_res;
    Ok(path)
}

/// Development of a polyline's lifted A-path, stepping in parameter length.
pub fn develop_polyline(
    gamma: &PathPolyline,
    omega: &MCFormField,
    spec: &GroupSpec,
    opts: &DevelopOptions,
) -> Result<DevelopmentResult> {
    let path = a_path_from_path(gamma, omega)?;
    let length: f64 = gamma.points.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum();
    let mut o = opts.clone();
    if length > 0.0 {
        o.step = (opts.step / length).min(1.0);
    }
    develop_with(&path, spec, &o)
}
