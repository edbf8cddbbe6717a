//! Truncated universal covers of finite graphs.
//!
//! A vertex of the universal cover is a reduced (non-backtracking) walk from
//! the base vertex, stored as its vertex sequence. All geometry is computed
//! on these words, so queries work for any tree vertex; a [`CoverWindow`] is
//! the enumerated ball of a given radius around the base.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::WindowError;
use crate::graph::{DistanceMatrix, FiniteGraph, Girth, Vertex};

/// Reduced walk from the base vertex. The empty walk is the base itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeWord(Vec<Vertex>);

impl TreeWord {
    pub fn root(base: Vertex) -> Self {
        TreeWord(vec![base])
    }

    /// Wraps a vertex sequence, checking that it is non-backtracking.
    /// Adjacency is the caller's responsibility (see [`CoverWindow::word`]).
    pub fn from_vertices(vertices: Vec<Vertex>) -> Result<Self, WindowError> {
        if vertices.is_empty() {
            return Err(WindowError::NotAPath("empty word".into()));
        }
        if vertices.windows(3).any(|w| w[0] == w[2]) || vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(WindowError::NotAPath(format!("{vertices:?} backtracks")));
        }
        Ok(TreeWord(vertices))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    /// Number of edges, i.e. the distance to the base.
    pub fn depth(&self) -> u32 {
        (self.0.len() - 1) as u32
    }

    pub fn base(&self) -> Vertex {
        self.0[0]
    }

    /// Covering-map image.
    pub fn image(&self) -> Vertex {
        *self.0.last().unwrap()
    }

    pub fn parent(&self) -> Option<TreeWord> {
        (self.0.len() > 1).then(|| TreeWord(self.0[..self.0.len() - 1].to_vec()))
    }

    /// The ancestor at the given depth (clamped to this word).
    pub fn truncate(&self, depth: u32) -> TreeWord {
        let keep = (depth as usize + 1).min(self.0.len());
        TreeWord(self.0[..keep].to_vec())
    }

    pub fn child(&self, next: Vertex) -> TreeWord {
        let mut v = self.0.clone();
        v.push(next);
        TreeWord(v)
    }

    /// Edges shared from the base.
    pub fn common_prefix(&self, other: &TreeWord) -> u32 {
        let n = self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count();
        n.saturating_sub(1) as u32
    }

    pub fn is_ancestor_of(&self, other: &TreeWord) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Tree distance.
    pub fn distance(&self, other: &TreeWord) -> u32 {
        self.depth() + other.depth() - 2 * self.common_prefix(other)
    }

    /// Geodesic from `self` to `other`, both ends included.
    pub fn geodesic_to(&self, other: &TreeWord) -> Vec<TreeWord> {
        let c = self.common_prefix(other);
        let mut out = Vec::with_capacity(self.distance(other) as usize + 1);
        for d in (c..=self.depth()).rev() {
            out.push(self.truncate(d));
        }
        for d in c + 1..=other.depth() {
            out.push(other.truncate(d));
        }
        out
    }

    /// The vertex `k` steps from `self` toward `target` (clamped at the
    /// target).
    pub fn step_toward(&self, target: &TreeWord, k: u32) -> TreeWord {
        let c = self.common_prefix(target);
        let up = self.depth() - c;
        if k <= up {
            self.truncate(self.depth() - k)
        } else {
            target.truncate((c + (k - up)).min(target.depth()))
        }
    }

    /// Concatenate a walk ending at this word's base with this word and
    /// reduce: `prefix` must end where `self` starts.
    fn reduce_after(prefix: &[Vertex], word: &[Vertex]) -> Vec<Vertex> {
        debug_assert_eq!(prefix.last(), word.first());
        let mut out = prefix.to_vec();
        let mut rest = &word[1..];
        while out.len() >= 2 && !rest.is_empty() && out[out.len() - 2] == rest[0] {
            out.pop();
            rest = &rest[1..];
        }
        out.extend_from_slice(rest);
        out
    }

    /// Geodesic path from `from` re-expressed as a word based at `from`:
    /// the walk up to the branch point followed by the remainder of
    /// `self`. Used to rebase rays (and vertices) at another tree vertex.
    pub fn rebased_at(&self, from: &TreeWord) -> Vec<Vertex> {
        from.geodesic_to(self).iter().map(TreeWord::image).collect()
    }
}

impl PartialOrd for TreeWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: by depth, then lexicographically.
impl Ord for TreeWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for TreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Element of the fundamental group at the base, as a reduced closed walk.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeckElement(TreeWord);

impl DeckElement {
    pub fn identity(base: Vertex) -> Self {
        DeckElement(TreeWord::root(base))
    }

    /// A reduced closed walk at the base.
    pub fn from_loop(word: TreeWord) -> Result<Self, WindowError> {
        if word.image() != word.base() {
            return Err(WindowError::NotAPath(format!("{word} is not closed")));
        }
        Ok(DeckElement(word))
    }

    /// The deck element carrying `from` to `to`; both must have the same
    /// image.
    pub fn carrying(from: &TreeWord, to: &TreeWord) -> Option<Self> {
        if from.image() != to.image() {
            return None;
        }
        let back: Vec<Vertex> = from.0.iter().rev().copied().collect();
        Some(DeckElement(TreeWord(TreeWord::reduce_after(&to.0, &back))))
    }

    pub fn word(&self) -> &TreeWord {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.depth() == 0
    }

    pub fn len(&self) -> u32 {
        self.0.depth()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn inverse(&self) -> Self {
        let mut v = self.0 .0.clone();
        v.reverse();
        DeckElement(TreeWord(v))
    }

    pub fn compose(&self, other: &DeckElement) -> Self {
        DeckElement(TreeWord(TreeWord::reduce_after(&self.0 .0, &other.0 .0)))
    }

    pub fn act(&self, w: &TreeWord) -> TreeWord {
        TreeWord(TreeWord::reduce_after(&self.0 .0, &w.0))
    }

    pub fn act_point(&self, p: &GromovPoint) -> GromovPoint {
        match p {
            GromovPoint::Vertex(w) => GromovPoint::Vertex(self.act(w)),
            GromovPoint::Ray(w) => GromovPoint::Ray(self.act(w)),
            GromovPoint::Midpoint(w) => {
                let a = self.act(w);
                let b = self.act(&w.parent().expect("midpoint word has depth >= 1"));
                GromovPoint::Midpoint(if a.depth() > b.depth() { a } else { b })
            }
        }
    }
}

impl fmt::Display for DeckElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// A point of the compactified tree: a vertex, the midpoint of an edge, or
/// a boundary point known to a finite depth.
///
/// Rays are cylinders: `Ray(w)` stands for every end whose geodesic from the
/// base starts with `w`. Edge midpoints are named by the endpoint farther
/// from the base.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GromovPoint {
    Vertex(TreeWord),
    Midpoint(TreeWord),
    Ray(TreeWord),
}

impl GromovPoint {
    pub fn is_boundary(&self) -> bool {
        matches!(self, GromovPoint::Ray(_))
    }

    pub fn word(&self) -> &TreeWord {
        match self {
            GromovPoint::Vertex(w) | GromovPoint::Midpoint(w) | GromovPoint::Ray(w) => w,
        }
    }

    /// Geodesic word from `at` that this point's geodesic follows, and the
    /// length of that geodesic in half edges.
    fn anchor(&self, at: &TreeWord) -> (TreeWord, u32) {
        match self {
            GromovPoint::Vertex(w) | GromovPoint::Ray(w) => (w.clone(), 2 * at.distance(w)),
            GromovPoint::Midpoint(w) => {
                let far = if w.is_ancestor_of(at) { w.parent().unwrap() } else { w.clone() };
                let len = 2 * at.distance(&far) - 1;
                (far, len)
            }
        }
    }

    /// The vertex word whose geodesic from `at` this point follows: the
    /// point itself for vertices and rays, the far endpoint for midpoints.
    pub fn far_word(&self, at: &TreeWord) -> TreeWord {
        self.anchor(at).0
    }

    /// Distance from a tree vertex, in half edges. For rays, the known
    /// length of the geodesic.
    pub fn half_distance_from(&self, at: &TreeWord) -> u32 {
        self.anchor(at).1
    }
}

impl fmt::Display for GromovPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GromovPoint::Vertex(w) => write!(f, "v:{w}"),
            GromovPoint::Midpoint(w) => write!(f, "m:{w}"),
            GromovPoint::Ray(w) => write!(f, "r:{w}"),
        }
    }
}

/// Gromov product in half edges, with a flag for values clamped by a ray's
/// finite depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GromovProduct {
    Finite { halves: u32, at_resolution: bool },
    Infinite,
}

impl GromovProduct {
    pub fn value(self) -> f64 {
        match self {
            GromovProduct::Finite { halves, .. } => halves as f64 / 2.0,
            GromovProduct::Infinite => f64::INFINITY,
        }
    }

    /// Whole edges; `None` for half-integral or infinite values.
    pub fn edges(self) -> Option<u32> {
        match self {
            GromovProduct::Finite { halves, .. } if halves % 2 == 0 => Some(halves / 2),
            _ => None,
        }
    }

    pub fn at_least(self, level: u32) -> bool {
        match self {
            GromovProduct::Finite { halves, .. } => halves >= 2 * level,
            GromovProduct::Infinite => true,
        }
    }

    pub fn at_resolution(self) -> bool {
        matches!(self, GromovProduct::Finite { at_resolution: true, .. })
    }
}

/// Edges shared by the geodesics from `at` to `x` and from `at` to `y`.
fn shared_edges(at: &TreeWord, x: &TreeWord, y: &TreeWord) -> u32 {
    let (i, j) = (at.common_prefix(x), at.common_prefix(y));
    if i != j {
        at.depth() - i.max(j)
    } else {
        at.depth() - i + (x.common_prefix(y) - i)
    }
}

/// Gromov product `(p, q)_at`: the length of the common initial segment of
/// the geodesics from `at`. Identical vertices or midpoints give an infinite
/// product; rays are clamped at their known depth.
pub fn gromov_product(p: &GromovPoint, q: &GromovPoint, at: &TreeWord) -> GromovProduct {
    if p == q && !p.is_boundary() {
        return GromovProduct::Infinite;
    }
    let (ap, lp) = p.anchor(at);
    let (aq, lq) = q.anchor(at);
    let halves = (2 * shared_edges(at, &ap, &aq)).min(lp).min(lq);
    let at_resolution = (p.is_boundary() && halves == lp) || (q.is_boundary() && halves == lq);
    GromovProduct::Finite { halves, at_resolution }
}

/// Visual metric `exp(-(p, q)_at)`. Equal rays give the resolution floor
/// `exp(-depth)` rather than zero.
pub fn visual_metric(p: &GromovPoint, q: &GromovPoint, at: &TreeWord) -> f64 {
    (-gromov_product(p, q, at).value()).exp()
}

/// Metric on sampled points of the compactification: zero on identical
/// points, the visual metric otherwise.
pub fn boundary_distance(p: &GromovPoint, q: &GromovPoint, at: &TreeWord) -> f64 {
    if p == q {
        0.0
    } else {
        visual_metric(p, q, at)
    }
}

/// A point of the flow space: `v` on a geodesic from `minus` to `plus`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowPoint {
    pub v: TreeWord,
    pub minus: GromovPoint,
    pub plus: GromovPoint,
}

impl FlowPoint {
    /// Endpoints must be vertices or rays; `v` must lie on the geodesic
    /// between them (the degenerate `minus == v` is allowed).
    pub fn new(v: TreeWord, minus: GromovPoint, plus: GromovPoint) -> Option<Self> {
        if matches!(minus, GromovPoint::Midpoint(_)) || matches!(plus, GromovPoint::Midpoint(_)) {
            return None;
        }
        let on_geodesic = match gromov_product(&minus, &plus, &v) {
            GromovProduct::Finite { halves, .. } => halves == 0,
            GromovProduct::Infinite => minus == GromovPoint::Vertex(v.clone()),
        };
        on_geodesic.then_some(FlowPoint { v, minus, plus })
    }

    /// Moves `v` by `|tau|` steps toward `plus` (positive) or `minus`
    /// (negative), stopping at the endpoint when the geodesic is shorter.
    /// Returns the new point and whether it saturated.
    pub fn flow(&self, tau: i64) -> (FlowPoint, bool) {
        let target = if tau >= 0 { &self.plus } else { &self.minus };
        let steps = tau.unsigned_abs() as u32;
        let remaining = target.half_distance_from(&self.v) / 2;
        let v = self.v.step_toward(target.word(), steps.min(remaining));
        (FlowPoint { v, minus: self.minus.clone(), plus: self.plus.clone() }, steps > remaining)
    }
}

/// Nodes above this count are refused by [`CoverWindow::build`].
pub const DEFAULT_WINDOW_BUDGET: usize = 2_000_000;

/// The radius-`r` ball around the base in the universal cover.
#[derive(Debug, Clone)]
pub struct CoverWindow {
    graph: FiniteGraph,
    distances: DistanceMatrix,
    girth: Girth,
    base: Vertex,
    radius: u32,
    nodes: Vec<TreeWord>,
    index: HashMap<TreeWord, usize>,
    parent: Vec<Option<usize>>,
    spanning: Vec<Vertex>,
}

impl CoverWindow {
    pub fn build(graph: &FiniteGraph, base: Vertex, radius: u32) -> Result<Self, WindowError> {
        Self::build_with_budget(graph, base, radius, DEFAULT_WINDOW_BUDGET)
    }

    pub fn build_with_budget(
        graph: &FiniteGraph,
        base: Vertex,
        radius: u32,
        budget: usize,
    ) -> Result<Self, WindowError> {
        if radius == 0 {
            return Err(WindowError::ZeroRadius);
        }
        if base as usize >= graph.vertex_count() {
            return Err(WindowError::BadBase(base));
        }
        let k = graph.max_degree() as u128;
        let mut estimate: u128 = 1;
        let mut layer: u128 = k;
        for _ in 0..radius {
            estimate = estimate.saturating_add(layer);
            layer = layer.saturating_mul(k.saturating_sub(1).max(1));
        }
        if estimate > budget as u128 {
            return Err(WindowError::TooLarge { estimate, budget });
        }
        let mut nodes = vec![TreeWord::root(base)];
        let mut parent = vec![None];
        let mut start = 0;
        for _ in 0..radius {
            let end = nodes.len();
            for idx in start..end {
                let w = nodes[idx].clone();
                let prev = w.0.len().checked_sub(2).map(|i| w.0[i]);
                for &next in graph.neighbors(w.image()) {
                    if Some(next) == prev {
                        continue;
                    }
                    nodes.push(w.child(next));
                    parent.push(Some(idx));
                }
            }
            start = end;
        }
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]), "canonical order");
        let index = nodes.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(CoverWindow {
            distances: graph.distance_matrix(),
            girth: graph.girth(),
            graph: graph.clone(),
            base,
            radius,
            nodes,
            index,
            parent,
            spanning: graph.bfs_tree(base),
        })
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn graph_distances(&self) -> &DistanceMatrix {
        &self.distances
    }

    pub fn girth(&self) -> Girth {
        self.girth
    }

    pub fn base(&self) -> Vertex {
        self.base
    }

    pub fn root(&self) -> TreeWord {
        TreeWord::root(self.base)
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Window vertices in canonical order.
    pub fn nodes(&self) -> &[TreeWord] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.parent.iter().filter(|p| p.is_some()).count()
    }

    /// Tree edges `(parent, child)` by node index.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().filter_map(|(c, p)| p.map(|p| (p, c)))
    }

    pub fn index_of(&self, w: &TreeWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn contains(&self, w: &TreeWord) -> bool {
        w.depth() <= self.radius && w.base() == self.base
    }

    /// Validates a vertex sequence as a tree vertex of this cover.
    pub fn word(&self, vertices: Vec<Vertex>) -> Result<TreeWord, WindowError> {
        if vertices.first() != Some(&self.base) {
            return Err(WindowError::NotAPath(format!("{vertices:?} does not start at the base")));
        }
        if vertices.windows(2).any(|w| !self.graph.has_edge(w[0], w[1])) {
            return Err(WindowError::NotAPath(format!("{vertices:?} uses a non-edge")));
        }
        TreeWord::from_vertices(vertices)
    }

    /// Tree neighbors of a word (not limited to the window).
    pub fn tree_neighbors(&self, w: &TreeWord) -> Vec<TreeWord> {
        let mut out = Vec::new();
        let prev = w.parent();
        if let Some(p) = &prev {
            out.push(p.clone());
        }
        let back = prev.as_ref().map(TreeWord::image);
        for &next in self.graph.neighbors(w.image()) {
            if Some(next) != back {
                out.push(w.child(next));
            }
        }
        out
    }

    /// Closed ball of integer radius around any tree vertex, in canonical
    /// order. Not limited to the window.
    pub fn ball(&self, center: &TreeWord, radius: u32) -> Vec<TreeWord> {
        let mut out = vec![center.clone()];
        let mut frontier = vec![(center.clone(), None::<TreeWord>)];
        for _ in 0..radius {
            let mut next = Vec::new();
            for (w, from) in frontier {
                for n in self.tree_neighbors(&w) {
                    if Some(&n) != from.as_ref() {
                        out.push(n.clone());
                        next.push((n, Some(w.clone())));
                    }
                }
            }
            frontier = next;
        }
        out.sort();
        out
    }

    /// All non-backtracking walks of exactly `depth` edges from the base,
    /// as rays, in canonical order.
    pub fn rays(&self, depth: u32) -> Vec<GromovPoint> {
        let mut layer = vec![self.root()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for w in &layer {
                let back = w.parent().map(|p| p.image());
                for &n in self.graph.neighbors(w.image()) {
                    if Some(n) != back {
                        next.push(w.child(n));
                    }
                }
            }
            layer = next;
        }
        layer.into_iter().map(GromovPoint::Ray).collect()
    }

    /// Extends a word along the smallest admissible neighbor until it has
    /// `depth` edges.
    pub fn extend_canonically(&self, w: &TreeWord, depth: u32) -> TreeWord {
        let mut out = w.clone();
        while out.depth() < depth {
            let back = out.parent().map(|p| p.image());
            let next = self
                .graph
                .neighbors(out.image())
                .iter()
                .copied()
                .find(|&n| Some(n) != back)
                .expect("graph vertices have degree >= 2 beyond the root");
            out = out.child(next);
        }
        out
    }

    /// Extends a word by uniformly random non-backtracking steps until it
    /// has `depth` edges.
    pub fn random_extension<R: rand::Rng>(&self, w: &TreeWord, depth: u32, rng: &mut R) -> TreeWord {
        let mut out = w.clone();
        while out.depth() < depth {
            let back = out.parent().map(|p| p.image());
            let options: Vec<Vertex> =
                self.graph.neighbors(out.image()).iter().copied().filter(|&n| Some(n) != back).collect();
            out = out.child(options[rng.gen_range(0..options.len())]);
        }
        out
    }

    /// Line-oriented export of the vertex and edge tables.
    pub fn export(&self) -> String {
        let mut out = format!(
            "# cover window\nwindow base={} radius={} vertices={} edges={}\n",
            self.base,
            self.radius,
            self.nodes.len(),
            self.edge_count()
        );
        for (i, w) in self.nodes.iter().enumerate() {
            out.push_str(&format!("v {i} {} {w}\n", w.image()));
        }
        for (p, c) in self.edges() {
            out.push_str(&format!("e {p} {c}\n"));
        }
        out
    }

    // ----- deck group -----

    /// `q(w)`: the deck element carrying the lifted BFS spanning tree at
    /// the base onto the translate containing `w`.
    pub fn q_map(&self, w: &TreeWord) -> DeckElement {
        let parent = self.spanning_parents();
        let mut tail = vec![w.image()];
        let mut x = w.image();
        while x != self.base {
            x = parent[x as usize];
            tail.push(x);
        }
        DeckElement(TreeWord(TreeWord::reduce_after(&w.0, &tail)))
    }

    fn spanning_parents(&self) -> &[Vertex] {
        &self.spanning
    }

    /// Lift of the BFS spanning tree at the base: one vertex per graph
    /// vertex, all with trivial `q`.
    pub fn fundamental_domain(&self) -> Vec<TreeWord> {
        let parent = self.spanning_parents();
        let mut out: Vec<TreeWord> = self
            .graph
            .vertices()
            .map(|v| {
                let mut path = vec![v];
                let mut x = v;
                while x != self.base {
                    x = parent[x as usize];
                    path.push(x);
                }
                path.reverse();
                TreeWord(path)
            })
            .collect();
        out.sort();
        out
    }

    /// Distinct nontrivial deck elements `q(w)` over window vertices, in
    /// canonical order, up to the given word length.
    pub fn deck_elements(&self, max_len: u32) -> Vec<DeckElement> {
        let mut out: Vec<DeckElement> = self
            .nodes
            .iter()
            .map(|w| self.q_map(w))
            .filter(|g| !g.is_identity() && g.len() <= max_len)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Checks the spanning-tree lift: `q` is trivial on the domain, its
    /// diameter is at most `2 diam`, and `q(g.v) = g q(v)` whenever both
    /// `v` and `g.v` are in the window.
    pub fn check_q_map(&self) -> QMapReport {
        let domain = self.fundamental_domain();
        let trivial_on_domain = domain.iter().all(|w| self.q_map(w).is_identity());
        let mut diameter = 0;
        for a in &domain {
            for b in &domain {
                diameter = diameter.max(a.distance(b));
            }
        }
        let bound = 2 * self.graph.diameter();
        let elements = self.deck_elements(2 * self.radius);
        let mut pairs = 0usize;
        let mut failures = Vec::new();
        for g in &elements {
            for v in &self.nodes {
                let gv = g.act(v);
                if !self.contains(&gv) {
                    continue;
                }
                pairs += 1;
                if self.q_map(&gv) != g.compose(&self.q_map(v)) {
                    failures.push(format!("g={g} v={v}"));
                }
            }
        }
        QMapReport { trivial_on_domain, domain_diameter: diameter, bound, pairs_checked: pairs, failures }
    }

    /// Minimal displacement `d(v, g.v)` over nontrivial deck elements and
    /// window vertices whose image stays in the window, with a witness.
    pub fn min_translation(&self) -> Option<(u32, DeckElement, TreeWord)> {
        let mut best: Option<(u32, DeckElement, TreeWord)> = None;
        for g in self.deck_elements(2 * self.radius) {
            for v in &self.nodes {
                let gv = g.act(v);
                if !self.contains(&gv) {
                    continue;
                }
                debug_assert_eq!(gv.image(), v.image(), "deck action commutes with projection");
                let d = v.distance(&gv);
                if best.as_ref().map_or(true, |b| d < b.0) {
                    best = Some((d, g.clone(), v.clone()));
                }
            }
        }
        best
    }

    /// Checks that the covering map is an isometric embedding on every ball
    /// of radius `floor(girth / 4)` (or `forced_radius`) whose center lies
    /// deep enough that the ball fits in the window.
    pub fn check_asymptotic_faithfulness(
        &self,
        forced_radius: Option<u32>,
    ) -> Result<FaithfulnessReport, WindowError> {
        let radius = match forced_radius {
            Some(r) => r,
            None => self.girth.finite().map_or(self.radius, |g| g / 4),
        };
        if self.radius < radius {
            return Err(WindowError::TooSmall { radius: self.radius, required: radius });
        }
        let mut report = FaithfulnessReport { radius, ..Default::default() };
        for center in self.nodes.iter().filter(|w| w.depth() + radius <= self.radius) {
            report.balls_checked += 1;
            let ball = self.ball(center, radius);
            for (i, y) in ball.iter().enumerate() {
                for z in &ball[i + 1..] {
                    report.pairs_checked += 1;
                    let tree = y.distance(z);
                    let graph = self.distances.get(y.image(), z.image());
                    if tree != graph {
                        report.violations.push(FaithfulnessViolation {
                            center: center.to_string(),
                            a: y.to_string(),
                            b: z.to_string(),
                            tree_distance: tree,
                            graph_distance: graph,
                        });
                    }
                }
            }
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QMapReport {
    pub trivial_on_domain: bool,
    pub domain_diameter: u32,
    pub bound: u32,
    pub pairs_checked: usize,
    pub failures: Vec<String>,
}

impl QMapReport {
    pub fn passed(&self) -> bool {
        self.trivial_on_domain && self.domain_diameter <= self.bound && self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FaithfulnessReport {
    pub radius: u32,
    pub balls_checked: usize,
    pub pairs_checked: usize,
    pub violations: Vec<FaithfulnessViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaithfulnessViolation {
    pub center: String,
    pub a: String,
    pub b: String,
    pub tree_distance: u32,
    pub graph_distance: u32,
}

impl FaithfulnessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Parsed form of [`CoverWindow::export`].
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTable {
    pub base: Vertex,
    pub radius: u32,
    pub vertices: Vec<(usize, Vertex, Vec<Vertex>)>,
    pub edges: Vec<(usize, usize)>,
}

impl WindowTable {
    pub fn parse(text: &str) -> Result<Self, WindowError> {
        let bad = |line: usize, l: &str| WindowError::NotAPath(format!("line {line}: {l:?}"));
        let mut table = WindowTable { base: 0, radius: 0, vertices: Vec::new(), edges: Vec::new() };
        for (i, l) in text.lines().enumerate() {
            let line = i + 1;
            let parts: Vec<&str> = l.split_whitespace().collect();
            match parts.as_slice() {
                [] => {}
                [first, ..] if first.starts_with('#') => {}
                ["window", rest @ ..] => {
                    for kv in rest {
                        let (k, v) = kv.split_once('=').ok_or_else(|| bad(line, l))?;
                        let v: u32 = v.parse().map_err(|_| bad(line, l))?;
                        match k {
                            "base" => table.base = v,
                            "radius" => table.radius = v,
                            _ => {}
                        }
                    }
                }
                ["v", idx, image, word] => {
                    let word: Result<Vec<Vertex>, _> = word.split('.').map(str::parse).collect();
                    table.vertices.push((
                        idx.parse().map_err(|_| bad(line, l))?,
                        image.parse().map_err(|_| bad(line, l))?,
                        word.map_err(|_| bad(line, l))?,
                    ));
                }
                ["e", p, c] => table
                    .edges
                    .push((p.parse().map_err(|_| bad(line, l))?, c.parse().map_err(|_| bad(line, l))?)),
                _ => return Err(bad(line, l)),
            }
        }
        Ok(table)
    }
}
