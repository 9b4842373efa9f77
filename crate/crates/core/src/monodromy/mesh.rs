//! Graph-discretized parameter domains.

use std::collections::VecDeque;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};

/// Straight segment from `nodes[a]` to `nodes[b] + shift`; a nonzero shift
/// encodes a periodic identification.
#[derive(Clone, Debug, Serialize)]
pub struct MeshEdge {
    pub a: usize,
    pub b: usize,
    pub shift: DVector<f64>,
}

/// Axis-aligned tensor grid metadata.
#[derive(Clone, Debug, Serialize)]
pub struct GridInfo {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
    pub periodic: Vec<bool>,
}

/// A walk through the mesh: a start node and edges with traversal direction.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Route {
    pub start: usize,
    pub steps: Vec<(usize, bool)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Cycle {
    pub closing_edge: usize,
    pub route: Route,
    /// Net periodic shift accumulated along the route; zero for loops that
    /// are contractible in the identified domain.
    pub winding: DVector<f64>,
}

impl Cycle {
    pub fn contractible(&self) -> bool {
        self.winding.iter().all(|&w| w.abs() < 1e-12)
    }
}

/// Mesh over a grid, disk, circle or torus. Fundamental cycles cover the
/// generators of the fundamental group only for these identifications.
#[derive(Clone, Debug, Serialize)]
pub struct MeshDomain {
    pub nodes: Vec<DVector<f64>>,
    pub edges: Vec<MeshEdge>,
    pub x0: usize,
    pub grid: Option<GridInfo>,
    /// Indices of spanning-tree edges.
    pub tree: Vec<usize>,
    /// Tree edge reaching each node and whether it is traversed `a -> b`.
    pub parent: Vec<Option<(usize, bool)>>,
    /// Breadth-first order from `x0`.
    pub order: Vec<usize>,
    pub cycles: Vec<Cycle>,
}

impl GridInfo {
    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn spacing(&self, k: usize) -> f64 {
        let span = self.upper[k] - self.lower[k];
        if self.periodic[k] {
            span / self.counts[k] as f64
        } else {
            span / (self.counts[k] - 1) as f64
        }
    }

    pub fn period(&self, k: usize) -> f64 {
        self.upper[k] - self.lower[k]
    }

    /// Row-major node index, last axis fastest.
    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.counts).fold(0, |acc, (&i, &c)| acc * c + i)
    }

    pub fn multi_index(&self, mut node: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            out[k] = node % self.counts[k];
            node /= self.counts[k];
        }
        out
    }

    pub fn coords(&self, idx: &[usize]) -> DVector<f64> {
        DVector::from_fn(self.dim(), |k, _| self.lower[k] + idx[k] as f64 * self.spacing(k))
    }

    /// Neighbour along axis `k` with offset `delta`, wrapping periodic axes.
    pub fn neighbor(&self, node: usize, k: usize, delta: isize) -> Option<usize> {
        let mut idx = self.multi_index(node);
        let c = self.counts[k] as isize;
        let j = idx[k] as isize + delta;
        if self.periodic[k] {
            idx[k] = j.rem_euclid(c) as usize;
        } else if j < 0 || j >= c {
            return None;
        } else {
            idx[k] = j as usize;
        }
        Some(self.index(&idx))
    }

    /// Multilinear interpolation weights for `x`.
    pub fn locate(&self, x: &DVector<f64>) -> Vec<(usize, f64)> {
        let d = self.dim();
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for k in 0..d {
            let h = self.spacing(k);
            let mut u = (x[k] - self.lower[k]) / h;
            let c = self.counts[k];
            if self.periodic[k] {
                u = u.rem_euclid(c as f64);
                let i = (u.floor() as usize).min(c - 1);
                base[k] = i;
                frac[k] = u - i as f64;
            } else {
                let i = (u.floor().max(0.0) as usize).min(c - 2);
                base[k] = i;
                frac[k] = u - i as f64;
            }
        }
        let mut out = Vec::with_capacity(1 << d);
        for corner in 0..(1usize << d) {
            let mut idx = base.clone();
            let mut w = 1.0;
            for k in 0..d {
                if corner >> k & 1 == 1 {
                    idx[k] = if self.periodic[k] {
                        (idx[k] + 1) % self.counts[k]
                    } else {
                        idx[k] + 1
                    };
                    w *= frac[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                out.push((self.index(&idx), w));
            }
        }
        out
    }

    /// Node nearest to `x`.
    pub fn nearest(&self, x: &DVector<f64>) -> usize {
        let idx: Vec<usize> = (0..self.dim())
            .map(|k| {
                let u = ((x[k] - self.lower[k]) / self.spacing(k)).round();
                let c = self.counts[k] as f64;
                if self.periodic[k] {
                    u.rem_euclid(c) as usize
                } else {
                    u.clamp(0.0, c - 1.0) as usize
                }
            })
            .collect();
        self.index(&idx)
    }
}

impl Route {
    pub fn empty(start: usize) -> Self {
        Route { start, steps: vec![] }
    }

    pub fn reversed(&self, mesh: &MeshDomain) -> Route {
        let end = self.end(mesh);
        Route {
            start: end,
            steps: self.steps.iter().rev().map(|&(e, f)| (e, !f)).collect(),
        }
    }

    pub fn end(&self, mesh: &MeshDomain) -> usize {
        match self.steps.last() {
            Some(&(e, true)) => mesh.edges[e].b,
            Some(&(e, false)) => mesh.edges[e].a,
            None => self.start,
        }
    }

    /// Concatenation: `self` first, then `next`.
    pub fn then(&self, next: &Route) -> Route {
        let mut steps = self.steps.clone();
        steps.extend(next.steps.iter().copied());
        Route {
            start: self.start,
            steps,
        }
    }
}

impl MeshDomain {
    /// Builds a mesh from explicit nodes and edges and computes its cycle basis.
    pub fn from_parts(nodes: Vec<DVector<f64>>, edges: Vec<MeshEdge>, x0: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("mesh has no nodes".into()));
        }
        let sigma = nodes[0].len();
        if sigma == 0 || nodes.iter().any(|n| n.len() != sigma) {
            return Err(Error::InvalidInput("mesh nodes must share a positive dimension".into()));
        }
        if x0 >= nodes.len() {
            return Err(Error::InvalidInput(format!("x0 = {x0} is not a node")));
        }
        for e in &edges {
            if e.a >= nodes.len() || e.b >= nodes.len() || e.shift.len() != sigma {
                return Err(Error::InvalidInput("edge refers to a missing node".into()));
            }
        }
        let mesh = MeshDomain {
            nodes,
            edges,
            x0,
            grid: None,
            tree: vec![],
            parent: vec![],
            order: vec![],
            cycles: vec![],
        };
        cycle_basis(mesh)
    }

    /// Tensor grid over `[lower, upper]` with `counts[k]` nodes per axis;
    /// periodic axes identify `upper` with `lower`.
    pub fn grid(lower: &[f64], upper: &[f64], counts: &[usize], periodic: &[bool]) -> Result<Self> {
        let d = counts.len();
        if d == 0 || lower.len() != d || upper.len() != d || periodic.len() != d {
            return Err(Error::InvalidInput("grid extents must match in length".into()));
        }
        for k in 0..d {
            if counts[k] < 2 || (periodic[k] && counts[k] < 3) {
                return Err(Error::ValidationError {
                    key: "domain.resolution".into(),
                    constraint: format!("axis {k} needs at least {} nodes", if periodic[k] { 3 } else { 2 }),
                });
            }
            if !(upper[k] > lower[k]) {
                return Err(Error::InvalidInput(format!("axis {k} has an empty extent")));
            }
        }
        let info = GridInfo {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            counts: counts.to_vec(),
            periodic: periodic.to_vec(),
        };
        let total: usize = counts.iter().product();
        let nodes: Vec<DVector<f64>> = (0..total).map(|n| info.coords(&info.multi_index(n))).collect();
        let mut edges = Vec::new();
        for n in 0..total {
            let idx = info.multi_index(n);
            for k in 0..d {
                let mut shift = DVector::zeros(d);
                let next = if idx[k] + 1 < counts[k] {
                    idx[k] + 1
                } else if periodic[k] {
                    shift[k] = info.period(k);
                    0
                } else {
                    continue;
                };
                let mut j = idx.clone();
                j[k] = next;
                edges.push(MeshEdge {
                    a: n,
                    b: info.index(&j),
                    shift,
                });
            }
        }
        let mut mesh = MeshDomain::from_parts(nodes, edges, 0)?;
        mesh.grid = Some(info);
        Ok(mesh)
    }

    /// Non-periodic grid on a box (a topological disk).
    pub fn disk(lower: &[f64], upper: &[f64], counts: &[usize]) -> Result<Self> {
        Self::grid(lower, upper, counts, &vec![false; counts.len()])
    }

    /// `[0, circumference)` with the endpoints identified.
    pub fn circle(circumference: f64, nodes: usize) -> Result<Self> {
        Self::grid(&[0.0], &[circumference], &[nodes], &[true])
    }

    pub fn torus(periods: [f64; 2], counts: [usize; 2]) -> Result<Self> {
        Self::grid(&[0.0, 0.0], &periods, &counts, &[true, true])
    }

    pub fn sigma(&self) -> usize {
        self.nodes[0].len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Cycles that wrap around a periodic identification.
    pub fn noncontractible_cycles(&self) -> impl Iterator<Item = &Cycle> {
        self.cycles.iter().filter(|c| !c.contractible())
    }

    /// Same mesh with the tree and cycles rebuilt from a new root.
    pub fn with_root(&self, x0: usize) -> Result<Self> {
        if x0 >= self.nodes.len() {
            return Err(Error::InvalidInput(format!("x0 = {x0} is not a node")));
        }
        let mut m = self.clone();
        m.x0 = x0;
        cycle_basis(m)
    }

    pub fn edge_start(&self, e: usize, forward: bool) -> DVector<f64> {
        let edge = &self.edges[e];
        if forward {
            self.nodes[edge.a].clone()
        } else {
            &self.nodes[edge.b] + &edge.shift
        }
    }

    /// Displacement of edge `e` in the traversal direction.
    pub fn edge_delta(&self, e: usize, forward: bool) -> DVector<f64> {
        let edge = &self.edges[e];
        let d = &self.nodes[edge.b] + &edge.shift - &self.nodes[edge.a];
        if forward {
            d
        } else {
            -d
        }
    }

    /// Tree route from `x0` to `node`.
    pub fn tree_route(&self, node: usize) -> Route {
        let mut steps = Vec::new();
        let mut cur = node;
        while let Some((e, fwd)) = self.parent[cur] {
            steps.push((e, fwd));
            let edge = &self.edges[e];
            cur = if fwd { edge.a } else { edge.b };
        }
        steps.reverse();
        Route { start: self.x0, steps }
    }

    /// Route through consecutive adjacent nodes.
    pub fn route_through(&self, nodes: &[usize]) -> Result<Route> {
        let first = *nodes
            .first()
            .ok_or_else(|| Error::InvalidInput("empty node list".into()))?;
        let mut steps = Vec::new();
        for w in nodes.windows(2) {
            let step = self
                .edges
                .iter()
                .enumerate()
                .find_map(|(i, e)| {
                    if e.a == w[0] && e.b == w[1] {
                        Some((i, true))
                    } else if e.b == w[0] && e.a == w[1] {
                        Some((i, false))
                    } else {
                        None
                    }
                })
                .ok_or_else(|| Error::InvalidInput(format!("nodes {} and {} are not adjacent", w[0], w[1])))?;
            steps.push(step);
        }
        Ok(Route { start: first, steps })
    }
}

/// Breadth-first spanning tree from `x0` and one fundamental cycle per
/// non-tree edge.
pub fn cycle_basis(mut mesh: MeshDomain) -> Result<MeshDomain> {
    let n = mesh.nodes.len();
    let mut adjacency: Vec<Vec<(usize, bool)>> = vec![vec![]; n];
    for (i, e) in mesh.edges.iter().enumerate() {
        adjacency[e.a].push((i, true));
        adjacency[e.b].push((i, false));
    }
    let mut parent: Vec<Option<(usize, bool)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut in_tree = vec![false; mesh.edges.len()];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    seen[mesh.x0] = true;
    queue.push_back(mesh.x0);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &(e, fwd) in &adjacency[u] {
            let edge = &mesh.edges[e];
            let v = if fwd { edge.b } else { edge.a };
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some((e, fwd));
                in_tree[e] = true;
                queue.push_back(v);
            }
        }
    }
    if order.len() != n {
        return Err(Error::Disconnected {
            reached: order.len(),
            total: n,
        });
    }
    mesh.parent = parent;
    mesh.order = order;
    mesh.tree = (0..mesh.edges.len()).filter(|&e| in_tree[e]).collect();
    let mut cycles = Vec::new();
    for (e, edge) in mesh.edges.iter().enumerate() {
        if in_tree[e] {
            continue;
        }
        let to_a = mesh.tree_route(edge.a);
        let back = mesh.tree_route(edge.b).reversed(&mesh);
        let route = to_a
            .then(&Route {
                start: edge.a,
                steps: vec![(e, true)],
            })
            .then(&back);
        let winding = route.steps.iter().fold(DVector::zeros(mesh.sigma()), |acc, &(i, fwd)| {
            if fwd {
                acc + &mesh.edges[i].shift
            } else {
                acc - &mesh.edges[i].shift
            }
        });
        cycles.push(Cycle {
            closing_edge: e,
            route,
            winding,
        });
    }
    mesh.cycles = cycles;
    Ok(mesh)
}
