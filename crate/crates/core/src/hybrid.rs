//! The equivariant metric `d_C` on tree vertices times the compactified
//! tree, restricted to finite samples.
//!
//! A step from `(v, xi)` to `(w, zeta)` costs `d(v, w)` plus `C` times the
//! visual distance of `q(w)^-1 . xi` and `q(w)^-1 . zeta` at the base. The
//! deck element is an isometry of the tree, so that distance equals the
//! visual distance of `xi` and `zeta` seen from `q(w) . base`; this is how
//! it is computed, without moving any points.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cover_tree::{gromov_product, CoverWindow, DeckElement, GromovPoint, GromovProduct, TreeWord};
use crate::error::MetricError;
use crate::rng::stream;

pub const METRIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HybridPoint {
    pub v: TreeWord,
    pub xi: GromovPoint,
}

impl HybridPoint {
    pub fn new(v: TreeWord, xi: GromovPoint) -> Self {
        HybridPoint { v, xi }
    }
}

impl fmt::Display for HybridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.v, self.xi)
    }
}

/// Largest integer distance inside the open ball of radius `r`.
pub fn open_ball_radius(r: f64) -> u32 {
    if r <= 0.0 {
        0
    } else {
        (r.ceil() as u32).saturating_sub(1)
    }
}

/// Visual distance of two points seen from `at`; zero on identical points.
/// The flag reports a product clamped by a ray's depth.
fn visual_step(a: &GromovPoint, b: &GromovPoint, at: &TreeWord) -> (f64, bool) {
    if a == b {
        return (0.0, false);
    }
    let p = gromov_product(a, b, at);
    let clamped = matches!(p, GromovProduct::Finite { at_resolution: true, .. });
    ((-p.value()).exp(), clamped)
}

/// Sample-restricted `d_C`, symmetric by construction.
#[derive(Debug, Clone)]
pub struct HybridMetricTable {
    c: f64,
    sample: Vec<HybridPoint>,
    index: HashMap<HybridPoint, usize>,
    dist: Vec<f64>,
    clamped_steps: usize,
}

impl HybridMetricTable {
    /// Shortest paths in the complete directed graph on the sample, then the
    /// entrywise minimum with the transpose. For product samples the two
    /// directions agree mathematically (a path reversed and reindexed is a
    /// path through the same sample); the minimum removes rounding
    /// differences.
    pub fn compute(window: &CoverWindow, sample: Vec<HybridPoint>, c: f64) -> Result<Self, MetricError> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(MetricError::BadConstant(c));
        }
        if sample.is_empty() {
            return Err(MetricError::EmptySample);
        }
        let n = sample.len();
        let mut base_of: HashMap<&TreeWord, TreeWord> = HashMap::new();
        for p in &sample {
            base_of.entry(&p.v).or_insert_with(|| window.q_map(&p.v).act(&window.root()));
        }
        // weight[a * n + b] for the step a -> b
        let rows: Vec<(Vec<f64>, usize)> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut clamped = 0;
                let row = (0..n)
                    .map(|b| {
                        let (pa, pb) = (&sample[a], &sample[b]);
                        let (vis, cl) = visual_step(&pa.xi, &pb.xi, &base_of[&pb.v]);
                        clamped += cl as usize;
                        pa.v.distance(&pb.v) as f64 + c * vis
                    })
                    .collect();
                (row, clamped)
            })
            .collect();
        let clamped_steps = rows.iter().map(|r| r.1).sum();
        let weight: Vec<f64> = rows.into_iter().flat_map(|r| r.0).collect();
        let directed: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dense_dijkstra(&weight, n, s)).collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = directed[i][j].min(directed[j][i]);
            }
        }
        let index = sample.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Ok(HybridMetricTable { c, sample, index, dist, clamped_steps })
    }

    /// The product of a vertex sample and a boundary sample, vertex-major.
    pub fn product_sample(vertices: &[TreeWord], points: &[GromovPoint]) -> Vec<HybridPoint> {
        vertices
            .iter()
            .flat_map(|v| points.iter().map(move |xi| HybridPoint::new(v.clone(), xi.clone())))
            .collect()
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn sample(&self) -> &[HybridPoint] {
        &self.sample
    }

    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.sample.len() + j]
    }

    pub fn index_of(&self, p: &HybridPoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn distance(&self, p: &HybridPoint, q: &HybridPoint) -> Option<f64> {
        Some(self.get(self.index_of(p)?, self.index_of(q)?))
    }

    /// Steps whose visual distance was limited by ray depth.
    pub fn clamped_steps(&self) -> usize {
        self.clamped_steps
    }

    /// Sample indices within distance `< r` of sample `i`.
    pub fn open_ball(&self, i: usize, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.get(i, j) < r).collect()
    }

    /// Dense matrix block with a node manifest; values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn export(&self) -> String {
        let mut out = format!("# hybrid metric table\ntable C={} nodes={}\n", self.c, self.len());
        for (i, p) in self.sample.iter().enumerate() {
            out.push_str(&format!("node {i} {} {}\n", p.v, p.xi));
        }
        for i in 0..self.len() {
            let row: Vec<String> = (0..self.len()).map(|j| self.get(i, j).to_string()).collect();
            out.push_str(&format!("row {i} {}\n", row.join(" ")));
        }
        out
    }

    /// Compares `d(g.p, g.p')` with `d(p, p')` over pairs whose translates
    /// are in the sample.
    pub fn check_invariance(&self, window: &CoverWindow, g: &DeckElement) -> InvarianceReport {
        let depth = self
            .sample
            .iter()
            .filter_map(|p| p.xi.is_boundary().then(|| p.xi.word().depth()))
            .max()
            .unwrap_or(0);
        let image: Vec<Option<usize>> = self
            .sample
            .iter()
            .map(|p| {
                let xi = normalize(window, &g.act_point(&p.xi), depth)?;
                self.index_of(&HybridPoint::new(g.act(&p.v), xi))
            })
            .collect();
        let mut report = InvarianceReport { element: g.to_string(), ..Default::default() };
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let (Some(gi), Some(gj)) = (image[i], image[j]) else {
                    report.skipped += 1;
                    continue;
                };
                report.tested += 1;
                let diff = (self.get(i, j) - self.get(gi, gj)).abs();
                report.max_difference = report.max_difference.max(diff);
                if diff > METRIC_TOLERANCE && report.failures.len() < 10 {
                    report.failures.push(format!("{} / {}: {diff}", self.sample[i], self.sample[j]));
                }
            }
        }
        report
    }

    /// Recomputes the table on the translated sample `g . S` and compares
    /// `d(g.p, g.q)` there with `d(p, q)` here, over all pairs.
    pub fn check_translate(&self, window: &CoverWindow, g: &DeckElement) -> Result<InvarianceReport, MetricError> {
        let moved: Vec<HybridPoint> =
            self.sample.iter().map(|p| HybridPoint::new(g.act(&p.v), g.act_point(&p.xi))).collect();
        let other = HybridMetricTable::compute(window, moved, self.c)?;
        let mut report = InvarianceReport { element: g.to_string(), ..Default::default() };
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                report.tested += 1;
                let diff = (self.get(i, j) - other.get(i, j)).abs();
                report.max_difference = report.max_difference.max(diff);
                if diff > METRIC_TOLERANCE && report.failures.len() < 10 {
                    report.failures.push(format!("{} / {}: {diff}", self.sample[i], self.sample[j]));
                }
            }
        }
        Ok(report)
    }

    /// Symmetry and equal-boundary equality on all pairs, the lower bound
    /// by tree distance on all pairs, and the triangle inequality on
    /// `triples` seeded random triples.
    pub fn check_axioms(&self, triples: usize, seed: u64) -> AxiomReport {
        let n = self.len();
        let mut r = AxiomReport { triangle_tested: triples, ..Default::default() };
        for i in 0..n {
            for j in 0..n {
                let d = self.get(i, j);
                if d != self.get(j, i) {
                    r.symmetry_failures += 1;
                }
                let (p, q) = (&self.sample[i], &self.sample[j]);
                let tree = p.v.distance(&q.v) as f64;
                if d < tree {
                    r.lower_bound_failures += 1;
                }
                if p.xi == q.xi {
                    r.equal_boundary_tested += 1;
                    if d != tree {
                        r.equal_boundary_failures += 1;
                    }
                }
            }
        }
        if n > 0 {
            let mut rng = stream(seed, 0);
            for _ in 0..triples {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                let excess = self.get(a, c) - self.get(a, b) - self.get(b, c);
                r.triangle_max_excess = r.triangle_max_excess.max(excess);
                if excess > METRIC_TOLERANCE {
                    r.triangle_failures += 1;
                    if r.witnesses.len() < 5 {
                        r.witnesses.push(format!("{} {} {}: {excess}", self.sample[a], self.sample[b], self.sample[c]));
                    }
                }
            }
        }
        r
    }

    /// For sampled vertices with equal `q`, checks
    /// `d_v(xi, zeta) <= d_w(xi, zeta) + 4 diam`.
    pub fn check_base_change(&self, window: &CoverWindow) -> BaseChangeReport {
        let bound = 4.0 * window.graph().diameter() as f64;
        let mut by_vertex: HashMap<&TreeWord, Vec<usize>> = HashMap::new();
        for (i, p) in self.sample.iter().enumerate() {
            by_vertex.entry(&p.v).or_default().push(i);
        }
        let mut vertices: Vec<&TreeWord> = by_vertex.keys().copied().collect();
        vertices.sort();
        let q: Vec<DeckElement> = vertices.iter().map(|v| window.q_map(v)).collect();
        let mut report = BaseChangeReport { bound, ..Default::default() };
        for (a, v) in vertices.iter().enumerate() {
            for (b, w) in vertices.iter().enumerate() {
                if a == b || q[a] != q[b] {
                    continue;
                }
                for &i in &by_vertex[v] {
                    for &j in &by_vertex[v] {
                        let (xi, zeta) = (&self.sample[i].xi, &self.sample[j].xi);
                        let wi = self.index_of(&HybridPoint::new((*w).clone(), xi.clone()));
                        let wj = self.index_of(&HybridPoint::new((*w).clone(), zeta.clone()));
                        let (Some(wi), Some(wj)) = (wi, wj) else { continue };
                        report.tested += 1;
                        let excess = self.get(i, j) - self.get(wi, wj);
                        report.max_excess = report.max_excess.max(excess);
                        if excess > bound + METRIC_TOLERANCE {
                            report.failures.push(format!("v={v} w={w} xi={xi} zeta={zeta}"));
                        }
                    }
                }
            }
        }
        report
    }
}

fn dense_dijkstra(weight: &[f64], n: usize, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[source] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        for i in 0..n {
            if !done[i] && (u == usize::MAX || dist[i] < dist[u]) {
                u = i;
            }
        }
        if u == usize::MAX || !dist[u].is_finite() {
            break;
        }
        done[u] = true;
        let row = &weight[u * n..(u + 1) * n];
        for v in 0..n {
            let cand = dist[u] + row[v];
            if cand < dist[v] {
                dist[v] = cand;
            }
        }
    }
    dist
}

/// Brings a translated point back to the sample's ray depth: longer rays are
/// truncated, shorter rays are extended only while the extension is forced
/// (degree-2 vertices). Vertices and midpoints are unchanged.
pub fn normalize(window: &CoverWindow, p: &GromovPoint, depth: u32) -> Option<GromovPoint> {
    let GromovPoint::Ray(w) = p else { return Some(p.clone()) };
    if w.depth() >= depth {
        return Some(GromovPoint::Ray(w.truncate(depth)));
    }
    let mut w = w.clone();
    while w.depth() < depth {
        let options: Vec<TreeWord> =
            window.tree_neighbors(&w).into_iter().filter(|n| n.depth() > w.depth()).collect();
        if options.len() != 1 {
            return None;
        }
        w = options.into_iter().next().unwrap();
    }
    Some(GromovPoint::Ray(w))
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct InvarianceReport {
    pub element: String,
    pub tested: usize,
    pub skipped: usize,
    pub max_difference: f64,
    pub failures: Vec<String>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AxiomReport {
    pub symmetry_failures: usize,
    pub lower_bound_failures: usize,
    pub equal_boundary_tested: usize,
    pub equal_boundary_failures: usize,
    pub triangle_tested: usize,
    pub triangle_failures: usize,
    pub triangle_max_excess: f64,
    pub witnesses: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.symmetry_failures == 0
            && self.lower_bound_failures == 0
            && self.equal_boundary_failures == 0
            && self.triangle_failures == 0
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BaseChangeReport {
    pub bound: f64,
    pub tested: usize,
    pub max_excess: f64,
    pub failures: Vec<String>,
}

/// A cover of tree vertices times the compactified tree with procedural
/// membership.
pub trait HybridCover: Sync {
    fn set_count(&self) -> usize;
    fn contains(&self, set: usize, p: &HybridPoint) -> bool;
    fn describe(&self, set: usize) -> String {
        format!("set {set}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlConstant {
    pub c: f64,
    pub lebesgue: f64,
    pub min_modulus: f64,
    pub elements: usize,
    pub doublings: u32,
    pub verified_points: usize,
    /// The certificate covers only the sampled statement.
    pub note: &'static str,
}

#[derive(Debug, Clone)]
pub struct ControlSearch {
    pub verify_samples: usize,
    pub seed: u64,
    pub max_doublings: u32,
}

impl Default for ControlSearch {
    fn default() -> Self {
        ControlSearch { verify_samples: 200, seed: 0, max_doublings: 40 }
    }
}

/// Index of a set containing `B_alpha(v) x {xi}`, if any.
pub fn slab_container(
    cover: &dyn HybridCover,
    window: &CoverWindow,
    v: &TreeWord,
    xi: &GromovPoint,
    alpha: f64,
) -> Option<usize> {
    let ball = window.ball(v, open_ball_radius(alpha));
    (0..cover.set_count())
        .find(|&u| ball.iter().all(|w| cover.contains(u, &HybridPoint::new(w.clone(), xi.clone()))))
}

/// Search for `C` following the constructive proof: a Lebesgue number of the
/// boundary cover at the base, moduli of continuity of the finitely many
/// relevant deck elements, then `C` with `alpha / C` below every modulus.
/// The `d_C` ball property is verified on the sample and `C` is doubled
/// while verification fails.
pub fn find_control_constant(
    cover: &dyn HybridCover,
    alpha: f64,
    window: &CoverWindow,
    vertices: &[TreeWord],
    points: &[GromovPoint],
    search: &ControlSearch,
) -> Result<(ControlConstant, HybridMetricTable), MetricError> {
    if vertices.is_empty() || points.is_empty() {
        return Err(MetricError::EmptySample);
    }
    for v in vertices {
        for xi in points {
            if slab_container(cover, window, v, xi, alpha).is_none() {
                return Err(MetricError::HypothesisFails { vertex: v.to_string(), point: xi.to_string() });
            }
        }
    }
    let root = window.root();
    let k = window.ball(&root, open_ball_radius(alpha));
    // V_U: boundary sample points whose whole slab over B_alpha(base) lies in U
    let families: Vec<Vec<bool>> = (0..cover.set_count())
        .map(|u| {
            points
                .iter()
                .map(|z| k.iter().all(|w| cover.contains(u, &HybridPoint::new(w.clone(), z.clone()))))
                .collect()
        })
        .collect();
    let d0 = |a: usize, b: usize| visual_step(&points[a], &points[b], &root).0;
    let mut lebesgue = f64::INFINITY;
    for z in 0..points.len() {
        let mut best: f64 = 0.0;
        for fam in &families {
            if fam[z] {
                let gap = (0..points.len()).filter(|&y| !fam[y]).map(|y| d0(z, y)).fold(f64::INFINITY, f64::min);
                best = best.max(gap);
            }
        }
        lebesgue = lebesgue.min(best);
    }
    if lebesgue <= 0.0 {
        return Err(MetricError::HypothesisFails { vertex: root.to_string(), point: "lebesgue number 0".into() });
    }
    // deck elements q(w) for w within alpha of the fundamental domain
    let mut elements: Vec<DeckElement> = window
        .fundamental_domain()
        .iter()
        .flat_map(|f| window.ball(f, open_ball_radius(alpha)))
        .map(|w| window.q_map(&w))
        .collect();
    elements.sort();
    elements.dedup();
    let threshold = lebesgue / alpha;
    let mut min_modulus = f64::INFINITY;
    for g in &elements {
        // d(g.a, g.b) at the base equals d(a, b) seen from g^-1 . base
        let at = g.inverse().act(&root);
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                if visual_step(&points[a], &points[b], &at).0 >= threshold {
                    min_modulus = min_modulus.min(d0(a, b));
                }
            }
        }
    }
    let mut c = if min_modulus.is_finite() { (alpha / min_modulus * (1.0 + 1e-9)).max(1.0 + 1e-6) } else { 1.0 + 1e-6 };
    let sample = HybridMetricTable::product_sample(vertices, points);
    let mut chosen: Vec<usize> = (0..sample.len()).collect();
    if chosen.len() > search.verify_samples {
        chosen.shuffle(&mut stream(search.seed, 0));
        chosen.truncate(search.verify_samples);
        chosen.sort_unstable();
    }
    let mut witness = String::new();
    for doublings in 0..=search.max_doublings {
        let table = HybridMetricTable::compute(window, sample.clone(), c)?;
        let failure = ball_property_failure(cover, &table, alpha, &chosen);
        match failure {
            None => {
                let info = ControlConstant {
                    c,
                    lebesgue,
                    min_modulus,
                    elements: elements.len(),
                    doublings,
                    verified_points: chosen.len(),
                    note: "certified on the finite sample only",
                };
                return Ok((info, table));
            }
            Some(w) => witness = w,
        }
        c *= 2.0;
    }
    Err(MetricError::NoConstant { tried: c / 2.0, witness })
}

/// First sampled point (among `chosen`) whose open `d_C` ball of radius
/// `alpha` lies in no set of the cover, with a description of the nearest
/// set.
pub fn ball_property_failure(
    cover: &dyn HybridCover,
    table: &HybridMetricTable,
    alpha: f64,
    chosen: &[usize],
) -> Option<String> {
    chosen.par_iter().find_map_first(|&i| {
        let ball = table.open_ball(i, alpha);
        let fits = (0..cover.set_count()).any(|u| ball.iter().all(|&j| cover.contains(u, &table.sample()[j])));
        (!fits).then(|| {
            let best = (0..cover.set_count())
                .map(|u| (ball.iter().filter(|&&j| !cover.contains(u, &table.sample()[j])).count(), u))
                .min()
                .unwrap_or((ball.len(), 0));
            format!(
                "{}: ball of {} sample points; nearest set {} misses {}",
                table.sample()[i],
                ball.len(),
                cover.describe(best.1),
                best.0
            )
        })
    })
}

/// Cover given by explicit products: each set is a tree-vertex predicate
/// times a compactification predicate.
pub struct ProductCover<'a> {
    sets: Vec<ProductSet<'a>>,
}

pub struct ProductSet<'a> {
    pub label: String,
    pub tree: Box<dyn Fn(&TreeWord) -> bool + Send + Sync + 'a>,
    pub boundary: Box<dyn Fn(&TreeWord, &GromovPoint) -> bool + Send + Sync + 'a>,
}

impl<'a> ProductCover<'a> {
    pub fn new(sets: Vec<ProductSet<'a>>) -> Self {
        ProductCover { sets }
    }

    /// The single set `everything`.
    pub fn whole_space() -> Self {
        ProductCover::new(vec![ProductSet {
            label: "everything".into(),
            tree: Box::new(|_| true),
            boundary: Box::new(|_, _| true),
        }])
    }
}

impl HybridCover for ProductCover<'_> {
    fn set_count(&self) -> usize {
        self.sets.len()
    }

    fn contains(&self, set: usize, p: &HybridPoint) -> bool {
        let s = &self.sets[set];
        (s.tree)(&p.v) && (s.boundary)(&p.v, &p.xi)
    }

    fn describe(&self, set: usize) -> String {
        self.sets[set].label.clone()
    }
}
