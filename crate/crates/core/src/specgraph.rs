//! Weighted UE/UAV graphs, Laplacians and algebraic connectivity.
//!
//! Vertices `0..U` are UEs and `U..U+A` are UAVs. RIS panels are not
//! vertices; they only contribute UE-UAV edges.

use std::fmt::Write as _;

use crate::channel::{snr_uav_uav, ChannelSet};
use crate::topology::{distance, ReliabilityMode, SimConfig, Topology, WeightUnit};
use crate::util::db_to_linear;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    UavUav,
    Direct,
    RisAided,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::UavUav => "uav-uav",
            EdgeKind::Direct => "ue-uav",
            EdgeKind::RisAided => "ue-ris-uav",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

/// Undirected weighted graph with its dense Laplacian kept in sync.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    laplacian: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        Self { n, edges: Vec::new(), laplacian: vec![0.0; n * n] }
    }

    /// Builds a graph from an edge list; parallel edges are merged by summing weights.
    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self> {
        let mut g = Self::new(n);
        for e in edges {
            g.insert(*e)?;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Row-major V×V Laplacian.
    pub fn laplacian(&self) -> &[f64] {
        &self.laplacian
    }

    pub fn edge_weight(&self, a: usize, b: usize) -> Option<f64> {
        self.find(a, b).map(|i| self.edges[i].weight)
    }

    fn find(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.iter().position(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
    }

    fn check(&self, a: usize, b: usize, weight: f64) -> Result<()> {
        if a >= self.n || b >= self.n || a == b {
            return Err(Error::domain(format!("invalid edge ({a}, {b}) on {} vertices", self.n)));
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::domain(format!("edge weight must be positive, got {weight}")));
        }
        Ok(())
    }

    fn rank_one(&mut self, a: usize, b: usize, w: f64) {
        let n = self.n;
        self.laplacian[a * n + a] += w;
        self.laplacian[b * n + b] += w;
        self.laplacian[a * n + b] -= w;
        self.laplacian[b * n + a] -= w;
    }

    /// Adds an edge, or increases the weight of an existing one.
    pub fn insert(&mut self, e: Edge) -> Result<()> {
        self.check(e.a, e.b, e.weight)?;
        match self.find(e.a, e.b) {
            Some(i) => self.edges[i].weight += e.weight,
            None => self.edges.push(e),
        }
        self.rank_one(e.a, e.b, e.weight);
        Ok(())
    }

    pub fn fiedler(&self) -> Result<f64> {
        fiedler(&self.laplacian, self.n)
    }

    /// Text export, one `v v' weight kind` line per edge.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {} {}", e.a, e.b, e.weight, e.kind.as_str());
        }
        out
    }
}

/// Dense Laplacian Σ ω (e_a − e_b)(e_a − e_b)ᵀ rebuilt from scratch.
pub fn laplacian_from_edges(n: usize, edges: &[Edge]) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    for e in edges {
        l[e.a * n + e.a] += e.weight;
        l[e.b * n + e.b] += e.weight;
        l[e.a * n + e.b] -= e.weight;
        l[e.b * n + e.a] -= e.weight;
    }
    l
}

/// All eigenvalues of a dense symmetric matrix, ascending, by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize) -> Result<Vec<f64>> {
    if matrix.len() != n * n {
        return Err(Error::domain(format!("expected {n}x{n} matrix, got {} entries", matrix.len())));
    }
    let scale = matrix.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if (matrix[i * n + j] - matrix[j * n + i]).abs() > 1e-9 * scale {
                return Err(Error::domain(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut a = matrix.to_vec();
    let off = |a: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let tol = 1e-10 * scale.max(1.0);
    for _sweep in 0..100 {
        if off(&a) < tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Second-smallest Laplacian eigenvalue, clamped at 0; 0 for fewer than two vertices.
pub fn fiedler(laplacian: &[f64], n: usize) -> Result<f64> {
    if n < 2 {
        return Ok(0.0);
    }
    let eig = symmetric_eigenvalues(laplacian, n)?;
    // Eigenvalues of a connected graph sit well above this; round-off does not.
    let noise = 1e-9 * eig[n - 1].abs().max(1.0);
    Ok(if eig[1] < noise { 0.0 } else { eig[1] })
}

fn weight_of(db: f64, unit: WeightUnit) -> f64 {
    match unit {
        WeightUnit::Db => db,
        WeightUnit::Linear => db_to_linear(db),
    }
}

/// UAV vertex index of UAV `a`.
pub fn uav_vertex(num_ues: usize, a: usize) -> usize {
    num_ues + a
}

/// The graph without RIS links: UAV-UAV edges above the UAV threshold and
/// every realized direct UE-UAV link, weighted by SNR in the configured unit.
pub fn build_original_graph(topology: &Topology, channels: &ChannelSet, config: &SimConfig) -> Result<WeightedGraph> {
    let (nu, na) = (topology.num_ues(), topology.num_uavs());
    let mut g = WeightedGraph::new(nu + na);
    for a in 0..na {
        for b in a + 1..na {
            let d = distance(topology.uav_positions[a], topology.uav_positions[b]);
            let snr = snr_uav_uav(config.uav_power_w, d, config.carrier_hz, config.light_speed, config.n0_dbm)?;
            let w = weight_of(snr, config.weight_unit);
            if snr >= config.gamma_th_uav_db && w > 0.0 {
                g.insert(Edge { a: uav_vertex(nu, a), b: uav_vertex(nu, b), weight: w, kind: EdgeKind::UavUav })?;
            }
        }
    }
    for u in 0..nu {
        for a in 0..na {
            if channels.has_direct(u, a) {
                let w = weight_of(channels.direct_snr_db(u, a), config.weight_unit);
                if w > 0.0 {
                    g.insert(Edge { a: u, b: uav_vertex(nu, a), weight: w, kind: EdgeKind::Direct })?;
                }
            }
        }
    }
    Ok(g)
}

/// Adds a RIS-aided link of weight ω° between vertices `u` and `a`.
///
/// An existing edge keeps the larger of its current weight and ω°; the
/// Laplacian is updated by the rank-one term of the weight change.
pub fn add_ris_link(graph: &WeightedGraph, u: usize, a: usize, weight: f64) -> Result<WeightedGraph> {
    graph.check(u, a, weight)?;
    let mut g = graph.clone();
    match g.find(u, a) {
        Some(i) => {
            let old = g.edges[i].weight;
            if weight > old {
                g.edges[i].weight = weight;
                g.edges[i].kind = EdgeKind::RisAided;
                g.rank_one(u, a, weight - old);
            }
        }
        None => {
            g.edges.push(Edge { a: u, b: a, weight, kind: EdgeKind::RisAided });
            g.rank_one(u, a, weight);
        }
    }
    Ok(g)
}

/// Drops the listed vertices and their edges; survivors keep their relative order.
pub fn remove_vertices(graph: &WeightedGraph, removed: &[usize]) -> WeightedGraph {
    let mut map = vec![usize::MAX; graph.n];
    let mut next = 0;
    for (v, slot) in map.iter_mut().enumerate() {
        if !removed.contains(&v) {
            *slot = next;
            next += 1;
        }
    }
    let edges: Vec<Edge> = graph
        .edges
        .iter()
        .filter(|e| map[e.a] != usize::MAX && map[e.b] != usize::MAX)
        .map(|e| Edge { a: map[e.a], b: map[e.b], ..*e })
        .collect();
    WeightedGraph { n: next, laplacian: laplacian_from_edges(next, &edges), edges }
}

/// Per-UAV reliability: λ₂ of the graph with that UAV removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityScores {
    pub raw: Vec<f64>,
    /// raw / max(raw); all zeros when every raw score is 0.
    pub normalized: Vec<f64>,
}

impl ReliabilityScores {
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let max = raw.iter().cloned().fold(0.0, f64::max);
        let normalized = raw.iter().map(|&c| if max > 0.0 { c / max } else { 0.0 }).collect();
        Self { raw, normalized }
    }

    pub fn get(&self, mode: ReliabilityMode) -> &[f64] {
        match mode {
            ReliabilityMode::Normalized => &self.normalized,
            ReliabilityMode::Raw => &self.raw,
        }
    }
}

pub fn reliability(graph: &WeightedGraph, uav_vertices: &[usize]) -> Result<ReliabilityScores> {
    let raw = uav_vertices
        .iter()
        .map(|&v| remove_vertices(graph, &[v]).fiedler())
        .collect::<Result<Vec<_>>>()?;
    Ok(ReliabilityScores::from_raw(raw))
}
