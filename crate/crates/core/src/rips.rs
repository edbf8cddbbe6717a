//! Rips complexes of graphs below half the girth and the retraction onto the
//! graph that minimizes the weighted sum of squared distances.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::RipsError;
use crate::graph::{DistanceMatrix, FiniteGraph, Girth, Vertex};
use crate::rng::stream;

pub const WEIGHT_TOLERANCE: f64 = 1e-12;
pub const OBJECTIVE_TOLERANCE: f64 = 1e-9;
/// Two minimizers closer than this are treated as the same point. The
/// objective has curvature at least 2, so an objective gap below
/// [`OBJECTIVE_TOLERANCE`] corresponds to a separation of about 3e-5.
pub const MINIMIZER_SEPARATION: f64 = 1e-4;

/// A point of `P_d`: barycentric weights on a simplex, vertices ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RipsPoint {
    simplex: Vec<Vertex>,
    weights: Vec<f64>,
}

impl RipsPoint {
    pub fn simplex(&self) -> &[Vertex] {
        &self.simplex
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_of(&self, v: Vertex) -> f64 {
        self.simplex.binary_search(&v).map_or(0.0, |i| self.weights[i])
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.simplex.iter().copied().zip(self.weights.iter().copied())
    }

    /// Vertices with positive weight.
    pub fn support(&self) -> Vec<Vertex> {
        self.terms().filter(|&(_, t)| t > 0.0).map(|(v, _)| v).collect()
    }

    fn normalized(mut terms: Vec<(Vertex, f64)>) -> Self {
        terms.sort_by_key(|&(v, _)| v);
        let mut simplex: Vec<Vertex> = Vec::with_capacity(terms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(terms.len());
        for (v, t) in terms {
            if simplex.last() == Some(&v) {
                *weights.last_mut().unwrap() += t;
            } else {
                simplex.push(v);
                weights.push(t);
            }
        }
        RipsPoint { simplex, weights }
    }

    /// `t * self + (1 - t) * other` on the union of the two simplices.
    pub fn blend(&self, other: &RipsPoint, t: f64) -> RipsPoint {
        let terms = self
            .terms()
            .map(|(v, w)| (v, t * w))
            .chain(other.terms().map(|(v, w)| (v, (1.0 - t) * w)))
            .collect();
        RipsPoint::normalized(terms)
    }
}

/// A point of the graph: a vertex or an interior point of an edge at
/// distance `s` from `a`, with `a < b` and `0 < s < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TreePoint {
    Vertex(Vertex),
    Edge { a: Vertex, b: Vertex, s: f64 },
}

impl TreePoint {
    /// The point at distance `s` from `a` on the edge `(a, b)`.
    pub fn on_edge(a: Vertex, b: Vertex, s: f64) -> TreePoint {
        let s = s.clamp(0.0, 1.0);
        if s == 0.0 {
            TreePoint::Vertex(a)
        } else if s == 1.0 {
            TreePoint::Vertex(b)
        } else if a < b {
            TreePoint::Edge { a, b, s }
        } else {
            TreePoint::Edge { a: b, b: a, s: 1.0 - s }
        }
    }

    /// `(a, b, s)` with `b == a` for vertices.
    fn parts(self) -> (Vertex, Vertex, f64) {
        match self {
            TreePoint::Vertex(v) => (v, v, 0.0),
            TreePoint::Edge { a, b, s } => (a, b, s),
        }
    }
}

/// Distance between two graph points in the path metric.
pub fn graph_point_distance(dist: &DistanceMatrix, p: TreePoint, q: TreePoint) -> f64 {
    let (a, b, s) = p.parts();
    let (c, e, u) = q.parts();
    if (a, b) == (c, e) && a != b {
        return (s - u).abs();
    }
    let from_p = [(a, s), (b, 1.0 - s)];
    let from_q = [(c, u), (e, 1.0 - u)];
    let mut best = f64::INFINITY;
    for &(x, dx) in &from_p {
        for &(y, dy) in &from_q {
            best = best.min(dx + dist.get(x, y) as f64 + dy);
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct RipsComplex {
    graph: FiniteGraph,
    dist: DistanceMatrix,
    scale: u32,
    maximal: Vec<Vec<Vertex>>,
}

impl RipsComplex {
    /// Requires `2 * scale < girth`.
    pub fn build(graph: &FiniteGraph, scale: u32) -> Result<Self, RipsError> {
        if let Girth::Finite(g) = graph.girth() {
            if 2 * scale >= g {
                return Err(RipsError::ScaleTooLarge { scale, girth: g });
            }
        }
        let dist = graph.distance_matrix();
        let n = graph.vertex_count() as Vertex;
        let near: Vec<Vec<Vertex>> =
            (0..n).map(|u| (0..n).filter(|&v| v != u && dist.get(u, v) <= scale).collect()).collect();
        let mut maximal = Vec::new();
        bron_kerbosch(&near, Vec::new(), (0..n).collect(), Vec::new(), &mut maximal);
        for c in &mut maximal {
            c.sort_unstable();
        }
        maximal.sort();
        Ok(RipsComplex { graph: graph.clone(), dist, scale, maximal })
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dist
    }

    pub fn maximal_simplices(&self) -> &[Vec<Vertex>] {
        &self.maximal
    }

    pub fn is_simplex(&self, vertices: &[Vertex]) -> bool {
        vertices.iter().all(|&u| vertices.iter().all(|&v| self.dist.get(u, v) <= self.scale))
    }

    pub fn point(&self, simplex: Vec<Vertex>, weights: Vec<f64>) -> Result<RipsPoint, RipsError> {
        if simplex.is_empty() || simplex.len() != weights.len() {
            return Err(RipsError::InvalidPoint("simplex and weights must be nonempty and aligned".into()));
        }
        if simplex.iter().any(|&v| v as usize >= self.graph.vertex_count()) {
            return Err(RipsError::InvalidPoint(format!("vertex out of range in {simplex:?}")));
        }
        if weights.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
            return Err(RipsError::InvalidPoint(format!("weights {weights:?} outside [0, 1]")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(RipsError::InvalidPoint(format!("weights sum to {sum}")));
        }
        if !self.is_simplex(&simplex) {
            return Err(RipsError::InvalidPoint(format!("{simplex:?} has diameter above {}", self.scale)));
        }
        Ok(RipsPoint::normalized(simplex.into_iter().zip(weights).collect()))
    }

    pub fn vertex_point(&self, v: Vertex) -> RipsPoint {
        RipsPoint { simplex: vec![v], weights: vec![1.0] }
    }

    /// A random face of a random maximal simplex with uniform barycentric
    /// weights. Returns the point and the maximal simplex it was drawn from.
    pub fn random_point(&self, rng: &mut ChaCha8Rng) -> (RipsPoint, &[Vertex]) {
        let sigma = self.maximal.choose(rng).expect("complex has a vertex");
        let k = rng.gen_range(1..=sigma.len());
        let face: Vec<Vertex> = sigma.choose_multiple(rng, k).copied().collect();
        (random_weights(rng, &face), sigma)
    }

    /// Sum of `t_i d(y, v_i)^2`.
    pub fn objective(&self, x: &RipsPoint, y: TreePoint) -> f64 {
        x.terms()
            .map(|(v, t)| {
                let d = graph_point_distance(&self.dist, TreePoint::Vertex(v), y);
                t * d * d
            })
            .sum()
    }

    /// The closed-form critical parameter on the edge `(a, b)`, measured
    /// from `a` and not clamped. Every vertex of `x` must be strictly
    /// nearer to one endpoint.
    pub fn edge_minimizer(&self, x: &RipsPoint, a: Vertex, b: Vertex) -> Result<f64, RipsError> {
        if !self.graph.has_edge(a, b) {
            return Err(RipsError::InvalidPoint(format!("{a}-{b} is not an edge")));
        }
        let mut s0 = 0.0;
        for (v, t) in x.terms() {
            let (da, db) = (self.dist.get(v, a), self.dist.get(v, b));
            if da < db {
                s0 -= t * da as f64;
            } else if db < da {
                s0 += t * (db as f64 + 1.0);
            } else {
                return Err(RipsError::Geometry(format!(
                    "vertex {v} is equidistant ({da}) from both ends of edge {a}-{b}"
                )));
            }
        }
        Ok(s0)
    }

    /// Minimizer of the objective on one edge and its value. Distances to
    /// vertices equidistant from both endpoints have a kink at the
    /// midpoint, so the edge is split there when needed; without such
    /// vertices this is the closed form of [`Self::edge_minimizer`].
    fn minimize_on_edge(&self, x: &RipsPoint, a: Vertex, b: Vertex) -> (TreePoint, f64) {
        let kinked = x.terms().any(|(v, _)| self.dist.get(v, a) == self.dist.get(v, b));
        let pieces: &[(f64, f64)] = if kinked { &[(0.0, 0.5), (0.5, 1.0)] } else { &[(0.0, 1.0)] };
        let mut best: Option<(TreePoint, f64)> = None;
        for &(lo, hi) in pieces {
            // on this piece every distance is alpha + beta * s with beta = +-1
            let mid = 0.5 * (lo + hi);
            let mut num = 0.0;
            let mut den = 0.0;
            for (v, t) in x.terms() {
                let (da, db) = (self.dist.get(v, a) as f64, self.dist.get(v, b) as f64);
                let (alpha, beta) = if da + mid <= db + 1.0 - mid { (da, 1.0) } else { (db + 1.0, -1.0) };
                num -= t * alpha * beta;
                den += t;
            }
            let s = (num / den).clamp(lo, hi);
            let p = TreePoint::on_edge(a, b, s);
            let f = self.objective(x, p);
            if best.map_or(true, |(_, bf)| f < bf) {
                best = Some((p, f));
            }
        }
        best.unwrap()
    }

    /// The point of the graph minimizing the weighted squared distance.
    pub fn retract(&self, x: &RipsPoint) -> Result<TreePoint, RipsError> {
        if self.graph.edge_count() == 0 {
            return Ok(TreePoint::Vertex(x.simplex[0]));
        }
        let candidates: Vec<(TreePoint, f64)> =
            self.graph.edges().map(|(a, b)| self.minimize_on_edge(x, a, b)).collect();
        let (best, fmin) = candidates
            .iter()
            .copied()
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("at least one edge");
        for &(p, f) in &candidates {
            if f <= fmin + OBJECTIVE_TOLERANCE
                && graph_point_distance(&self.dist, p, best) > MINIMIZER_SEPARATION
            {
                return Err(RipsError::Geometry(format!(
                    "distinct minimizers {best:?} and {p:?} with objective {fmin}"
                )));
            }
        }
        Ok(best)
    }

    /// A graph point as a point of the 1-skeleton.
    pub fn embed(&self, y: TreePoint) -> RipsPoint {
        match y {
            TreePoint::Vertex(v) => self.vertex_point(v),
            TreePoint::Edge { a, b, s } => RipsPoint { simplex: vec![a, b], weights: vec![1.0 - s, s] },
        }
    }

    /// `t * x + (1 - t) * r(x)` in the simplex spanned by `x` and the edge
    /// carrying `r(x)`.
    pub fn homotopy(&self, x: &RipsPoint, t: f64) -> Result<RipsPoint, RipsError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(RipsError::InvalidPoint(format!("time {t} outside [0, 1]")));
        }
        if t == 1.0 {
            return Ok(x.clone());
        }
        let r = self.embed(self.retract(x)?);
        let h = x.blend(&r, t);
        if !self.is_simplex(&h.simplex) {
            return Err(RipsError::Geometry(format!(
                "no common simplex for {:?} and its retraction {:?}",
                x.simplex, r.simplex
            )));
        }
        Ok(h)
    }

    /// Distance on `P_d`: optimal transport between the barycentric
    /// weights with the graph metric as cost.
    pub fn distance(&self, x: &RipsPoint, y: &RipsPoint) -> f64 {
        transport_cost(x, y, |u, v| self.dist.get(u, v) as f64)
    }

    /// Samples pairs and checks `d(r(x), r(y)) <= (d + 1) d(x, y)`.
    ///
    /// Each `x` is a random face point of a random maximal simplex; `y`
    /// moves `x` a uniform fraction of the way toward a random point of the
    /// same maximal simplex. Sample `i` draws from stream `i` of `seed`.
    pub fn check_lipschitz(&self, samples: usize, seed: u64) -> LipschitzReport {
        let bound = self.scale as f64 + 1.0;
        let rows: Vec<Result<(f64, Option<LipschitzWitness>), String>> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, i as u64);
                let (x, sigma) = self.random_point(&mut rng);
                let y = if i == 0 {
                    x.clone()
                } else {
                    let z = random_weights(&mut rng, sigma);
                    let lambda: f64 = 1.0 - rng.gen::<f64>();
                    z.blend(&x, lambda)
                };
                let (rx, ry) = match (self.retract(&x), self.retract(&y)) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(e), _) | (_, Err(e)) => return Err(format!("sample {i}: {e}")),
                };
                let dxy = self.distance(&x, &y);
                let drr = graph_point_distance(&self.dist, rx, ry);
                let ratio = if drr == 0.0 { 0.0 } else { drr / dxy };
                let witness = (drr > bound * dxy + OBJECTIVE_TOLERANCE).then(|| LipschitzWitness {
                    sample: i,
                    x: x.clone(),
                    y: y.clone(),
                    rx,
                    ry,
                    distance: dxy,
                    image_distance: drr,
                });
                Ok((ratio, witness))
            })
            .collect();
        let mut report = LipschitzReport { samples, bound, ..Default::default() };
        for row in rows {
            match row {
                Ok((ratio, w)) => {
                    report.max_ratio = report.max_ratio.max(ratio);
                    report.violations.extend(w);
                }
                Err(e) => report.errors.push(e),
            }
        }
        report
    }
}

impl RipsComplex {
    /// Compares the retraction of seeded random points with a grid search
    /// of the given step over every edge.
    pub fn check_against_grid(&self, samples: usize, step: f64, seed: u64) -> GridReport {
        let k = (1.0 / step).round() as usize;
        let edges: Vec<(Vertex, Vertex)> = self.graph.edges().collect();
        let rows: Vec<Result<SampleRecord, String>> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let (x, _) = self.random_point(&mut stream(seed, i as u64));
                let r = self.retract(&x).map_err(|e| format!("sample {i}: {e}"))?;
                let fr = self.objective(&x, r);
                let mut best = (f64::INFINITY, r);
                let mut second = None;
                for &(a, b) in &edges {
                    for j in 0..=k {
                        let p = TreePoint::on_edge(a, b, j as f64 / k as f64);
                        let f = self.objective(&x, p);
                        if f < best.0 {
                            best = (f, p);
                        }
                        if second.is_none() && f < fr + OBJECTIVE_TOLERANCE
                            && graph_point_distance(&self.dist, p, r) > 2.0 * step
                        {
                            second = Some(p);
                        }
                    }
                }
                Ok(SampleRecord {
                    id: i,
                    simplex: x.simplex.clone(),
                    weights: x.weights.clone(),
                    retraction: r,
                    gap: graph_point_distance(&self.dist, best.1, r),
                    second_minimizer: second,
                })
            })
            .collect();
        let mut report = GridReport { samples, step, ..Default::default() };
        for row in rows {
            match row {
                Ok(rec) => {
                    report.max_gap = report.max_gap.max(rec.gap);
                    if rec.second_minimizer.is_some() {
                        report.non_unique += 1;
                    }
                    report.records.push(rec);
                }
                Err(e) => report.errors.push(e),
            }
        }
        report
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct GridReport {
    pub samples: usize,
    pub step: f64,
    pub max_gap: f64,
    pub non_unique: usize,
    pub records: Vec<SampleRecord>,
    pub errors: Vec<String>,
}

impl GridReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.errors.is_empty() && self.non_unique == 0 && self.max_gap <= tolerance
    }
}

/// One sampled Rips point: its simplex and weights, its retraction and
/// the distance from the best grid point.
#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub id: usize,
    pub simplex: Vec<Vertex>,
    pub weights: Vec<f64>,
    pub retraction: TreePoint,
    pub gap: f64,
    pub second_minimizer: Option<TreePoint>,
}

fn random_weights(rng: &mut ChaCha8Rng, vertices: &[Vertex]) -> RipsPoint {
    let raw: Vec<f64> = vertices.iter().map(|_| rng.sample::<f64, _>(Exp1) + f64::MIN_POSITIVE).collect();
    let total: f64 = raw.iter().sum();
    RipsPoint::normalized(vertices.iter().copied().zip(raw.iter().map(|w| w / total)).collect())
}

fn bron_kerbosch(
    near: &[Vec<Vertex>],
    r: Vec<Vertex>,
    mut p: Vec<Vertex>,
    mut x: Vec<Vertex>,
    out: &mut Vec<Vec<Vertex>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| p.iter().filter(|v| near[u as usize].binary_search(v).is_ok()).count())
        .unwrap();
    let candidates: Vec<Vertex> =
        p.iter().copied().filter(|v| near[pivot as usize].binary_search(v).is_err()).collect();
    for v in candidates {
        let nv = &near[v as usize];
        let mut r2 = r.clone();
        r2.push(v);
        let p2 = p.iter().copied().filter(|u| nv.binary_search(u).is_ok()).collect();
        let x2 = x.iter().copied().filter(|u| nv.binary_search(u).is_ok()).collect();
        bron_kerbosch(near, r2, p2, x2, out);
        p.retain(|&u| u != v);
        x.push(v);
    }
}

/// Minimum-cost transport between two probability vectors, by successive
/// shortest augmenting paths. Mass present in both is left in place.
pub fn transport_cost(x: &RipsPoint, y: &RipsPoint, cost: impl Fn(Vertex, Vertex) -> f64) -> f64 {
    const EPS: f64 = 1e-15;
    let mut supply: Vec<(Vertex, f64)> = Vec::new();
    let mut demand: Vec<(Vertex, f64)> = Vec::new();
    let mut vertices: Vec<Vertex> = x.simplex.iter().chain(&y.simplex).copied().collect();
    vertices.sort_unstable();
    vertices.dedup();
    for v in vertices {
        let diff = x.weight_of(v) - y.weight_of(v);
        if diff > EPS {
            supply.push((v, diff));
        } else if diff < -EPS {
            demand.push((v, -diff));
        }
    }
    let (k, m) = (supply.len(), demand.len());
    let c: Vec<Vec<f64>> = supply.iter().map(|&(u, _)| demand.iter().map(|&(v, _)| cost(u, v)).collect()).collect();
    let mut flow = vec![vec![0.0f64; m]; k];
    let mut total = 0.0;
    loop {
        // Bellman-Ford over sources (0..k) and sinks (k..k+m)
        let mut dist = vec![f64::INFINITY; k + m];
        let mut pred = vec![usize::MAX; k + m];
        for i in 0..k {
            if supply[i].1 > EPS {
                dist[i] = 0.0;
            }
        }
        for _ in 0..k + m {
            let mut changed = false;
            for i in 0..k {
                for j in 0..m {
                    if dist[i] + c[i][j] < dist[k + j] - EPS {
                        dist[k + j] = dist[i] + c[i][j];
                        pred[k + j] = i;
                        changed = true;
                    }
                    if flow[i][j] > EPS && dist[k + j] - c[i][j] < dist[i] - EPS {
                        dist[i] = dist[k + j] - c[i][j];
                        pred[i] = k + j;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let Some(j) = (0..m).filter(|&j| demand[j].1 > EPS).min_by(|&a, &b| dist[k + a].total_cmp(&dist[k + b]))
        else {
            break;
        };
        if !dist[k + j].is_finite() {
            break;
        }
        // trace the path back to a source and find the bottleneck
        let mut path = vec![k + j];
        let mut node = k + j;
        while pred[node] != usize::MAX {
            node = pred[node];
            path.push(node);
        }
        let source = node;
        let mut amount = supply[source].1.min(demand[j].1);
        for w in path.windows(2) {
            let (to, from) = (w[0], w[1]);
            if from >= k {
                amount = amount.min(flow[to][from - k]);
            }
        }
        for w in path.windows(2) {
            let (to, from) = (w[0], w[1]);
            if from < k {
                flow[from][to - k] += amount;
                total += amount * c[from][to - k];
            } else {
                flow[to][from - k] -= amount;
                total -= amount * c[to][from - k];
            }
        }
        supply[source].1 -= amount;
        demand[j].1 -= amount;
    }
    total.max(0.0)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LipschitzReport {
    pub samples: usize,
    pub bound: f64,
    pub max_ratio: f64,
    pub violations: Vec<LipschitzWitness>,
    /// Samples where the retraction itself failed.
    pub errors: Vec<String>,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.errors.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzWitness {
    pub sample: usize,
    pub x: RipsPoint,
    pub y: RipsPoint,
    pub rx: TreePoint,
    pub ry: TreePoint,
    pub distance: f64,
    pub image_distance: f64,
}
