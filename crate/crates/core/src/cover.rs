//! Equivariant covers: the flow-space cover, its pull-back along the flow,
//! the thickening over the compactified tree, and the final cover of tree
//! vertices times the compactification.
//!
//! Every set is described by a small key and tested procedurally. A flow
//! set is keyed by a center `c` and two cones at `c` of level `ceil(6 alpha)`;
//! the sets containing a given point are enumerated directly from the point,
//! so multiplicities are exact on whatever points are sampled.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cover_tree::{gromov_product, CoverWindow, DeckElement, FlowPoint, GromovPoint, TreeWord};
use crate::error::CoverError;
use crate::graph::Vertex;
use crate::hybrid::{open_ball_radius, HybridCover, HybridMetricTable, HybridPoint};
use crate::rng::stream;

/// Scale parameters derived from `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverParams {
    pub alpha: f64,
    /// Cone level `ceil(6 alpha)`.
    pub level: u32,
    /// Largest integer distance in the open `3 alpha` ball.
    pub center_radius: u32,
    /// Largest integer distance in the open `alpha` ball.
    pub slab_radius: u32,
}

impl CoverParams {
    pub fn new(alpha: f64) -> Result<Self, CoverError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(CoverError::Geometry(format!("alpha must be positive, got {alpha}")));
        }
        Ok(CoverParams {
            alpha,
            level: (6.0 * alpha).ceil() as u32,
            center_radius: open_ball_radius(3.0 * alpha),
            slab_radius: open_ball_radius(alpha),
        })
    }

    /// `alpha = girth / 7`.
    pub fn for_girth(girth: u32) -> Self {
        Self::new(girth as f64 / 7.0).expect("positive girth")
    }
}

/// `{p : (p, center)_basepoint >= level}` over the compactified tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GromovBall {
    pub basepoint: TreeWord,
    pub center: TreeWord,
    pub level: u32,
}

impl GromovBall {
    pub fn contains(&self, p: &GromovPoint) -> bool {
        gromov_product(p, &GromovPoint::Vertex(self.center.clone()), &self.basepoint).at_least(self.level)
    }

    fn act(&self, g: &DeckElement) -> Self {
        GromovBall { basepoint: g.act(&self.basepoint), center: g.act(&self.center), level: self.level }
    }

    /// The cut edge: the ball is the half-tree beyond `center` seen from
    /// the vertex before it.
    fn half_tree(&self) -> (TreeWord, TreeWord) {
        (self.basepoint.step_toward(&self.center, self.level - 1), self.center.clone())
    }
}

impl fmt::Display for GromovBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ball[{} -> {} @{}]", self.basepoint, self.center, self.level)
    }
}

/// A level set of the Gromov product at a center: a ball, or a singleton
/// for points closer than the level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Cone {
    Ball(GromovBall),
    Single(GromovPoint),
}

impl Cone {
    pub fn contains(&self, p: &GromovPoint) -> bool {
        match self {
            Cone::Ball(b) => b.contains(p),
            Cone::Single(q) => p == q,
        }
    }

    fn act(&self, g: &DeckElement) -> Self {
        match self {
            Cone::Ball(b) => Cone::Ball(b.act(g)),
            Cone::Single(p) => Cone::Single(g.act_point(p)),
        }
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cone::Ball(b) => write!(f, "{b}"),
            Cone::Single(p) => write!(f, "{{{p}}}"),
        }
    }
}

/// The cone at `c` containing `p`. `None` when `p` is a ray not known far
/// enough past `c` to decide.
pub fn cone_of(c: &TreeWord, p: &GromovPoint, level: u32) -> Option<Cone> {
    let h = p.half_distance_from(c);
    let deep = match p {
        GromovPoint::Vertex(_) => h >= 2 * level,
        GromovPoint::Midpoint(_) => h > 2 * level,
        GromovPoint::Ray(_) if h >= 2 * level => true,
        GromovPoint::Ray(_) => return None,
    };
    Some(if deep {
        let center = c.step_toward(&p.far_word(c), level);
        Cone::Ball(GromovBall { basepoint: c.clone(), center, level })
    } else {
        Cone::Single(p.clone())
    })
}

/// Key of a flow set `B_{3 alpha}(center) x minus x plus`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FlowKey {
    pub center: TreeWord,
    pub minus: Cone,
    pub plus: Cone,
}

impl FlowKey {
    fn act(&self, g: &DeckElement) -> Self {
        FlowKey { center: g.act(&self.center), minus: self.minus.act(g), plus: self.plus.act(g) }
    }
}

impl fmt::Display for FlowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x {} x {}", self.center, self.minus, self.plus)
    }
}

/// Key of a final-cover set: a bulk set `B_R(q(x).base) x B_{2/3}(x)` or a
/// thickened flow set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SetKey {
    Bulk(TreeWord),
    Thick(FlowKey),
}

impl SetKey {
    pub fn act(&self, g: &DeckElement) -> Self {
        match self {
            SetKey::Bulk(x) => SetKey::Bulk(g.act(x)),
            SetKey::Thick(k) => SetKey::Thick(k.act(g)),
        }
    }

    fn anchor(&self) -> &TreeWord {
        match self {
            SetKey::Bulk(x) => x,
            SetKey::Thick(k) => &k.center,
        }
    }
}

impl fmt::Display for SetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetKey::Bulk(x) => write!(f, "bulk {x}"),
            SetKey::Thick(k) => write!(f, "thick {k}"),
        }
    }
}

/// Multiplicity statistics over a sample.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DimensionReport {
    pub points: usize,
    /// Maximal multiplicity minus one; `-1` on an empty sample.
    pub dimension: i64,
    pub witness: String,
    /// Multiplicity -> number of points.
    pub histogram: BTreeMap<usize, usize>,
    /// Points where a ray was too short to decide membership.
    pub unresolved: usize,
    /// Points lying in no set.
    pub uncovered: usize,
}

impl DimensionReport {
    fn from_counts(counts: Vec<(usize, bool, String)>) -> Self {
        let mut r = DimensionReport { points: counts.len(), dimension: -1, ..Default::default() };
        let mut best = 0;
        for (m, unresolved, label) in counts {
            *r.histogram.entry(m).or_default() += 1;
            r.unresolved += unresolved as usize;
            r.uncovered += (m == 0) as usize;
            if m > best || r.witness.is_empty() {
                if m >= best {
                    best = m;
                    r.witness = label;
                }
            }
        }
        r.dimension = best as i64 - 1;
        r
    }
}

/// Outcome of a property checked point by point on a sample.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SampleCheck {
    pub tested: usize,
    pub failures: usize,
    pub witnesses: Vec<String>,
}

impl SampleCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.tested += 1;
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < 5 {
                self.witnesses.push(witness());
            }
        }
    }

    fn merge(mut self, other: SampleCheck) -> SampleCheck {
        self.tested += other.tested;
        self.failures += other.failures;
        for w in other.witnesses {
            if self.witnesses.len() < 5 {
                self.witnesses.push(w);
            }
        }
        self
    }
}

fn par_check<T: Sync>(items: &[T], f: impl Fn(&T) -> Option<String> + Sync) -> SampleCheck {
    items
        .par_iter()
        .map(|t| {
            let mut c = SampleCheck::default();
            let res = f(t);
            c.record(res.is_none(), || res.unwrap_or_default());
            c
        })
        .reduce(SampleCheck::default, SampleCheck::merge)
}

/// Two keys in the same list that are deck translates of each other.
fn translate_pair<K: Clone + PartialEq + fmt::Display>(
    keys: &[K],
    anchor: impl Fn(&K) -> &TreeWord,
    act: impl Fn(&K, &DeckElement) -> K,
) -> Option<String> {
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i + 1..] {
            if let Some(g) = DeckElement::carrying(anchor(a), anchor(b)) {
                if act(a, &g) == *b {
                    return Some(format!("{a} and {g}.({a}) = {b}"));
                }
            }
        }
    }
    None
}

// ----- flow-space cover -----

/// Cover of the flow space by `B_{3 alpha}(c) x U(c, xi-) x U(c, xi+)`,
/// `c` ranging over the lift of a maximal `2 alpha`-separated vertex set.
pub struct FlowCover<'w> {
    window: &'w CoverWindow,
    params: CoverParams,
    centers: Vec<Vertex>,
    is_center: Vec<bool>,
}

impl<'w> FlowCover<'w> {
    /// Greedy maximal `2 alpha`-separated set in vertex order, lifted.
    pub fn build(window: &'w CoverWindow, params: CoverParams) -> Result<Self, CoverError> {
        let g = window.graph();
        if g.vertices().any(|v| g.degree(v) < 2) {
            return Err(CoverError::Geometry("the cover needs minimum degree 2".into()));
        }
        let d = window.graph_distances();
        let mut centers: Vec<Vertex> = Vec::new();
        for v in g.vertices() {
            if centers.iter().all(|&c| d.get(c, v) as f64 >= 2.0 * params.alpha) {
                centers.push(v);
            }
        }
        let mut is_center = vec![false; g.vertex_count()];
        for &c in &centers {
            is_center[c as usize] = true;
        }
        Ok(FlowCover { window, params, centers, is_center })
    }

    pub fn window(&self) -> &'w CoverWindow {
        self.window
    }

    pub fn params(&self) -> CoverParams {
        self.params
    }

    /// Graph vertices whose lifts are centers.
    pub fn centers(&self) -> &[Vertex] {
        &self.centers
    }

    pub fn is_center(&self, w: &TreeWord) -> bool {
        self.is_center[w.image() as usize]
    }

    /// Lifted centers in the open `3 alpha` ball around `y`.
    pub fn centers_near(&self, y: &TreeWord) -> Vec<TreeWord> {
        self.window.ball(y, self.params.center_radius).into_iter().filter(|c| self.is_center(c)).collect()
    }

    pub fn contains(&self, key: &FlowKey, p: &FlowPoint) -> bool {
        p.v.distance(&key.center) <= self.params.center_radius
            && key.minus.contains(&p.minus)
            && key.plus.contains(&p.plus)
    }

    /// Every set containing `p`: one per nearby center. The flag reports an
    /// undecidable ray.
    pub fn sets_containing(&self, p: &FlowPoint) -> (Vec<FlowKey>, bool) {
        let level = self.params.level;
        let mut unresolved = false;
        let mut out = Vec::new();
        for c in self.centers_near(&p.v) {
            match (cone_of(&c, &p.minus, level), cone_of(&c, &p.plus, level)) {
                (Some(minus), Some(plus)) => out.push(FlowKey { center: c, minus, plus }),
                _ => unresolved = true,
            }
        }
        (out, unresolved)
    }

    /// A set containing `B_alpha(v) x {(minus, plus)}` intersected with the
    /// flow space.
    pub fn slab_container(&self, p: &FlowPoint) -> Option<FlowKey> {
        let slab: Vec<FlowPoint> = self
            .window
            .ball(&p.v, self.params.slab_radius)
            .into_iter()
            .filter_map(|w| FlowPoint::new(w, p.minus.clone(), p.plus.clone()))
            .collect();
        self.sets_containing(p).0.into_iter().find(|k| slab.iter().all(|q| self.contains(k, q)))
    }

    pub fn dimension(&self, sample: &[FlowPoint]) -> DimensionReport {
        DimensionReport::from_counts(
            sample
                .par_iter()
                .map(|p| {
                    let (keys, unresolved) = self.sets_containing(p);
                    (keys.len(), unresolved, format!("({}, {}, {})", p.v, p.minus, p.plus))
                })
                .collect(),
        )
    }

    pub fn check_containment(&self, sample: &[FlowPoint]) -> SampleCheck {
        par_check(sample, |p| {
            self.slab_container(p).is_none().then(|| format!("({}, {}, {})", p.v, p.minus, p.plus))
        })
    }

    /// No sampled point lies in both `U` and `g.U` for nontrivial `g`.
    pub fn check_freeness(&self, sample: &[FlowPoint]) -> SampleCheck {
        par_check(sample, |p| translate_pair(&self.sets_containing(p).0, |k| &k.center, FlowKey::act))
    }

    /// Flow-space points through each given vertex: a degenerate geodesic
    /// starting at the vertex and a bi-infinite one through the base.
    pub fn sample_points(&self, vertices: &[TreeWord], ray_depth: u32) -> Vec<FlowPoint> {
        let w = self.window;
        let root = w.root();
        let mut out = Vec::new();
        for v in vertices {
            let plus = w.extend_canonically(v, ray_depth.max(v.depth() + 1));
            let first = plus.vertices()[1];
            out.extend(FlowPoint::new(v.clone(), GromovPoint::Vertex(v.clone()), GromovPoint::Ray(plus.clone())));
            for &n in w.graph().neighbors(w.base()) {
                if n != first {
                    let minus = w.extend_canonically(&root.child(n), ray_depth);
                    out.extend(FlowPoint::new(v.clone(), GromovPoint::Ray(minus), GromovPoint::Ray(plus.clone())));
                }
            }
        }
        out
    }
}

// ----- pull-back and thickening -----

/// Membership of a tree vertex and a compactification point in a thickened
/// (or, for rays, pulled-back) flow set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    In,
    Out,
    Unresolved,
}

/// The flow cover pulled back along `v -> (phi_tau(v), v, xi)` and read over
/// the whole compactification: `(v, xi)` lies in the set of `(c, K-, K+)`
/// when `xi` is at distance at least `tau`, the vertex `tau` steps from `v`
/// toward `xi` is within `3 alpha` of `c`, `v` is in `K-` and `xi` in `K+`.
/// On rays this is exactly the pulled-back set.
pub struct ThickCover<'f, 'w> {
    flow: &'f FlowCover<'w>,
    tau: u32,
}

impl<'f, 'w> ThickCover<'f, 'w> {
    pub fn new(flow: &'f FlowCover<'w>, tau: u32) -> Self {
        ThickCover { flow, tau }
    }

    pub fn tau(&self) -> u32 {
        self.tau
    }

    pub fn flow(&self) -> &'f FlowCover<'w> {
        self.flow
    }

    /// `phi_tau(v)` toward `xi`; `Err` when a ray is too short to tell.
    fn flowed(&self, v: &TreeWord, xi: &GromovPoint) -> Result<Option<TreeWord>, ()> {
        let h = xi.half_distance_from(v);
        if h < 2 * self.tau {
            return if xi.is_boundary() { Err(()) } else { Ok(None) };
        }
        Ok(Some(v.step_toward(&xi.far_word(v), self.tau)))
    }

    pub fn membership(&self, key: &FlowKey, v: &TreeWord, xi: &GromovPoint) -> Membership {
        let y = match self.flowed(v, xi) {
            Err(()) => return Membership::Unresolved,
            Ok(None) => return Membership::Out,
            Ok(Some(y)) => y,
        };
        let plus_ok = match &key.plus {
            Cone::Ball(b) => b.contains(xi),
            Cone::Single(_) => false,
        };
        let inside = y.distance(&key.center) <= self.flow.params.center_radius
            && key.minus.contains(&GromovPoint::Vertex(v.clone()))
            && plus_ok;
        if inside {
            Membership::In
        } else if xi.is_boundary() && cone_of(&key.center, xi, self.flow.params.level).is_none() {
            Membership::Unresolved
        } else {
            Membership::Out
        }
    }

    pub fn contains(&self, key: &FlowKey, v: &TreeWord, xi: &GromovPoint) -> bool {
        self.membership(key, v, xi) == Membership::In
    }

    /// Every set containing `(v, xi)`. Sets whose forward cone is a
    /// singleton are empty over the boundary and are dropped.
    pub fn sets_containing(&self, v: &TreeWord, xi: &GromovPoint) -> (Vec<FlowKey>, bool) {
        let y = match self.flowed(v, xi) {
            Err(()) => return (Vec::new(), true),
            Ok(None) => return (Vec::new(), false),
            Ok(Some(y)) => y,
        };
        let level = self.flow.params.level;
        let mut unresolved = false;
        let mut out = Vec::new();
        for c in self.flow.centers_near(&y) {
            let minus = cone_of(&c, &GromovPoint::Vertex(v.clone()), level).expect("vertex cone");
            match cone_of(&c, xi, level) {
                Some(plus @ Cone::Ball(_)) => out.push(FlowKey { center: c, minus, plus }),
                Some(Cone::Single(_)) => {}
                None => unresolved = true,
            }
        }
        (out, unresolved)
    }

    pub fn slab_container(&self, v: &TreeWord, xi: &GromovPoint) -> Option<FlowKey> {
        let ball = self.flow.window.ball(v, self.flow.params.slab_radius);
        self.sets_containing(v, xi).0.into_iter().find(|k| ball.iter().all(|w| self.contains(k, w, xi)))
    }

    pub fn dimension(&self, vertices: &[TreeWord], points: &[GromovPoint]) -> DimensionReport {
        DimensionReport::from_counts(
            product(vertices, points)
                .par_iter()
                .map(|(v, xi)| {
                    let (keys, unresolved) = self.sets_containing(v, xi);
                    (keys.len(), unresolved, format!("({v}, {xi})"))
                })
                .collect(),
        )
    }

    pub fn check_containment(&self, vertices: &[TreeWord], points: &[GromovPoint]) -> SampleCheck {
        par_check(&product(vertices, points), |(v, xi)| {
            self.slab_container(v, xi).is_none().then(|| format!("({v}, {xi})"))
        })
    }

    /// Tree-vertex projection of a set, over the whole compactification
    /// (`boundary = false`) or over ends only. Exact: a point of either kind
    /// exists iff one is found on the convex hull of the cut edges involved.
    pub fn projection(&self, key: &FlowKey, boundary: bool) -> BTreeSet<TreeWord> {
        let Cone::Ball(plus) = &key.plus else { return BTreeSet::new() };
        let w = self.flow.window;
        let reach = self.flow.params.center_radius + self.tau;
        let mut out = BTreeSet::new();
        for v in w.ball(&key.center, reach) {
            if !key.minus.contains(&GromovPoint::Vertex(v.clone())) {
                continue;
            }
            let hit = w
                .ball(&key.center, self.flow.params.center_radius)
                .into_iter()
                .filter(|y| y.distance(&v) == self.tau)
                .any(|y| {
                    let cuts = [(v.step_toward(&y, self.tau - 1), y.clone()), plus.half_tree()];
                    if boundary {
                        end_in_half_trees(w, &cuts)
                    } else {
                        vertex_in_half_trees(&cuts)
                    }
                });
            if hit {
                out.insert(v);
            }
        }
        out
    }
}

/// `z` is beyond the cut edge `(a, b)`.
fn beyond(z: &TreeWord, cut: &(TreeWord, TreeWord)) -> bool {
    z.distance(&cut.0) == z.distance(&cut.1) + 1
}

fn hull(cuts: &[(TreeWord, TreeWord)]) -> Vec<TreeWord> {
    let ends: Vec<&TreeWord> = cuts.iter().flat_map(|(a, b)| [a, b]).collect();
    let mut out: Vec<TreeWord> = Vec::new();
    for (i, a) in ends.iter().enumerate() {
        for b in &ends[i..] {
            out.extend(a.geodesic_to(b));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// The half-trees meet in a vertex. The intersection of half-trees is
/// convex and contains one of the cut vertices if nonempty.
fn vertex_in_half_trees(cuts: &[(TreeWord, TreeWord)]) -> bool {
    hull(cuts).iter().any(|z| cuts.iter().all(|c| beyond(z, c)))
}

/// The half-trees share an end. A ray in the intersection leaves the hull
/// of the cut edges at some vertex, stepping away from every cut.
fn end_in_half_trees(window: &CoverWindow, cuts: &[(TreeWord, TreeWord)]) -> bool {
    hull(cuts).iter().any(|z| {
        cuts.iter().all(|c| beyond(z, c))
            && window.tree_neighbors(z).iter().any(|n| {
                cuts.iter().all(|(a, _)| n.distance(a) == z.distance(a) + 1)
            })
    })
}

fn product(vertices: &[TreeWord], points: &[GromovPoint]) -> Vec<(TreeWord, GromovPoint)> {
    vertices.iter().flat_map(|v| points.iter().map(move |p| (v.clone(), p.clone()))).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PullbackReport {
    pub tau: u32,
    pub containment: SampleCheck,
    /// Failures at each smaller flow time.
    pub rejected: Vec<(u32, usize)>,
}

/// Smallest flow time for which every sampled `(v, xi)`, `xi` a ray, has a
/// pulled-back set containing `B_alpha(v) x {xi}`.
pub fn pullback_cover<'f, 'w>(
    flow: &'f FlowCover<'w>,
    vertices: &[TreeWord],
    rays: &[GromovPoint],
    max_tau: u32,
) -> Result<(ThickCover<'f, 'w>, PullbackReport), CoverError> {
    let mut rejected = Vec::new();
    for tau in 1..=max_tau {
        let cover = ThickCover::new(flow, tau);
        let containment = cover.check_containment(vertices, rays);
        if containment.passed() {
            return Ok((cover, PullbackReport { tau, containment, rejected }));
        }
        rejected.push((tau, containment.failures));
    }
    Err(CoverError::NoFlowTime { max_tau })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThickeningReport {
    /// Sampled points of the compactification lying in two thickened sets,
    /// checked for a common boundary point of the two sets.
    pub disjointness: SampleCheck,
    /// Sets whose projections were compared.
    pub projections: SampleCheck,
    pub max_projection_diameter: u32,
    /// `6 alpha + 2 tau`.
    pub diameter_bound: f64,
}

/// Checks that thickening preserves disjointness and projections, and the
/// projection diameter bound.
pub fn check_thickening(
    cover: &ThickCover,
    vertices: &[TreeWord],
    points: &[GromovPoint],
    max_sets: usize,
) -> ThickeningReport {
    let w = cover.flow.window;
    let pairs = product(vertices, points);
    let disjointness = par_check(&pairs, |(v, xi)| {
        if xi.is_boundary() {
            return None;
        }
        let keys = cover.sets_containing(v, xi).0;
        let y = v.step_toward(&xi.far_word(v), cover.tau);
        let h = (v.step_toward(&y, cover.tau - 1), y.clone());
        for (i, a) in keys.iter().enumerate() {
            for b in &keys[i + 1..] {
                let (Cone::Ball(pa), Cone::Ball(pb)) = (&a.plus, &b.plus) else { continue };
                if !end_in_half_trees(w, &[h.clone(), pa.half_tree(), pb.half_tree()]) {
                    return Some(format!("({v}, {xi}) in {a} and {b} with no common end"));
                }
            }
        }
        None
    });
    let mut keys: Vec<FlowKey> = pairs.iter().flat_map(|(v, xi)| cover.sets_containing(v, xi).0).collect();
    keys.sort();
    keys.dedup();
    if keys.len() > max_sets {
        keys.shuffle(&mut stream(0x7e1c, 0));
        keys.truncate(max_sets);
    }
    let diameters: Vec<(Option<String>, u32)> = keys
        .par_iter()
        .map(|k| {
            let thick = cover.projection(k, false);
            let thin = cover.projection(k, true);
            let diam = thick.iter().flat_map(|a| thick.iter().map(move |b| a.distance(b))).max().unwrap_or(0);
            let witness = (thick != thin).then(|| {
                let extra: Vec<String> = thick.difference(&thin).take(3).map(|t| t.to_string()).collect();
                format!("{k}: projections differ at {}", extra.join(" "))
            });
            (witness, diam)
        })
        .collect();
    let mut projections = SampleCheck::default();
    let mut max_projection_diameter = 0;
    for (witness, diam) in diameters {
        projections.record(witness.is_none(), || witness.unwrap_or_default());
        max_projection_diameter = max_projection_diameter.max(diam);
    }
    ThickeningReport {
        disjointness,
        projections,
        max_projection_diameter,
        diameter_bound: 6.0 * cover.flow.params.alpha + 2.0 * cover.tau as f64,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DepthReport {
    pub depth: u32,
    pub tested: usize,
    /// Shallow points not covered by a thickened set.
    pub uncovered: usize,
    pub deepest_uncovered: Option<String>,
}

/// Smallest `N` such that every sampled `(v, xi)` with `v` in the domain
/// and `xi` at least `N` deep (some end has product at least `N` with `xi`
/// at the base) has a thickened set containing `B_alpha(v) x {xi}`.
pub fn find_boundary_depth(
    cover: &ThickCover,
    domain: &[TreeWord],
    points: &[GromovPoint],
) -> Result<DepthReport, CoverError> {
    let root = cover.flow.window.root();
    let pairs = product(domain, points);
    let failures: Vec<(u32, String)> = pairs
        .par_iter()
        .filter(|(v, xi)| cover.slab_container(v, xi).is_none())
        .map(|(v, xi)| (xi.half_distance_from(&root), format!("({v}, {xi})")))
        .collect();
    if let Some((_, w)) = failures.iter().find(|(_, w)| w.contains("r:")) {
        return Err(CoverError::Property { check: "boundary depth".into(), witness: w.clone() });
    }
    let worst = failures.iter().max_by_key(|f| f.0);
    let depth = worst.map_or(0, |f| f.0 / 2 + 1);
    let sampled = points
        .iter()
        .filter(|p| !p.is_boundary())
        .map(|p| p.half_distance_from(&root) / 2)
        .max()
        .unwrap_or(0);
    if depth > sampled {
        return Err(CoverError::DepthExhausted { depth });
    }
    Ok(DepthReport {
        depth,
        tested: pairs.len(),
        uncovered: failures.len(),
        deepest_uncovered: worst.map(|f| f.1.clone()),
    })
}

// ----- final cover -----

/// `{B_R(q(x).base) x B_{2/3}(x)}` together with the thickened flow sets.
pub struct FinalCover<'f, 'w> {
    thick: ThickCover<'f, 'w>,
    depth: u32,
    bulk_radius: f64,
}

impl<'f, 'w> FinalCover<'f, 'w> {
    /// `R = N + alpha + 2 diam + 2/3`.
    pub fn assemble(thick: ThickCover<'f, 'w>, depth: u32) -> Self {
        let w = thick.flow.window;
        let bulk_radius = depth as f64 + thick.flow.params.alpha + 2.0 * w.graph().diameter() as f64 + 2.0 / 3.0;
        FinalCover { thick, depth, bulk_radius }
    }

    pub fn thick(&self) -> &ThickCover<'f, 'w> {
        &self.thick
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn bulk_radius(&self) -> f64 {
        self.bulk_radius
    }

    pub fn params(&self) -> CoverParams {
        self.thick.flow.params
    }

    fn window(&self) -> &'w CoverWindow {
        self.thick.flow.window
    }

    /// Tree vertices `x` with `xi` in the open `2/3` ball around `x`.
    fn near_vertices(xi: &GromovPoint) -> Vec<TreeWord> {
        match xi {
            GromovPoint::Vertex(x) => vec![x.clone()],
            GromovPoint::Midpoint(m) => vec![m.parent().expect("midpoint"), m.clone()],
            GromovPoint::Ray(_) => Vec::new(),
        }
    }

    fn bulk_contains(&self, x: &TreeWord, v: &TreeWord) -> bool {
        let center = self.window().q_map(x).act(&self.window().root());
        v.distance(&center) <= open_ball_radius(self.bulk_radius)
    }

    pub fn contains(&self, key: &SetKey, v: &TreeWord, xi: &GromovPoint) -> bool {
        match key {
            SetKey::Bulk(x) => Self::near_vertices(xi).contains(x) && self.bulk_contains(x, v),
            SetKey::Thick(k) => self.thick.contains(k, v, xi),
        }
    }

    pub fn sets_containing(&self, v: &TreeWord, xi: &GromovPoint) -> (Vec<SetKey>, bool) {
        let (thick, unresolved) = self.thick.sets_containing(v, xi);
        let mut out: Vec<SetKey> = Self::near_vertices(xi)
            .into_iter()
            .filter(|x| self.bulk_contains(x, v))
            .map(SetKey::Bulk)
            .collect();
        out.extend(thick.into_iter().map(SetKey::Thick));
        (out, unresolved)
    }

    pub fn slab_container(&self, v: &TreeWord, xi: &GromovPoint) -> Option<SetKey> {
        let ball = self.window().ball(v, self.params().slab_radius);
        self.sets_containing(v, xi).0.into_iter().find(|k| ball.iter().all(|w| self.contains(k, w, xi)))
    }

    pub fn check_containment(&self, vertices: &[TreeWord], points: &[GromovPoint]) -> SampleCheck {
        par_check(&product(vertices, points), |(v, xi)| {
            self.slab_container(v, xi).is_none().then(|| format!("({v}, {xi})"))
        })
    }

    /// Points with no end at product `>= N` from them must be covered by a
    /// bulk set: `d(w, q(x).base) <= d(w, v) + d(v, base) + d(base, xi) + 2/3
    /// + diam < alpha + diam + N + 2/3 + diam = R` for `w` in `B_alpha(v)`.
    pub fn check_bulk_interior(&self, domain: &[TreeWord], points: &[GromovPoint]) -> SampleCheck {
        let root = self.window().root();
        let shallow: Vec<GromovPoint> = points
            .iter()
            .filter(|p| !p.is_boundary() && p.half_distance_from(&root) < 2 * self.depth)
            .cloned()
            .collect();
        let ball_radius = self.params().slab_radius;
        par_check(&product(domain, &shallow), |(v, xi)| {
            let ball = self.window().ball(v, ball_radius);
            let covered = Self::near_vertices(xi)
                .iter()
                .any(|x| ball.iter().all(|w| self.bulk_contains(x, w)));
            (!covered).then(|| format!("({v}, {xi}) at depth {}/2 < N", xi.half_distance_from(&root)))
        })
    }

    /// Dimension of the whole cover, of the bulk part and of the thickened
    /// part.
    pub fn dimension(&self, vertices: &[TreeWord], points: &[GromovPoint]) -> [DimensionReport; 3] {
        let counts: Vec<((usize, usize), bool, String)> = product(vertices, points)
            .par_iter()
            .map(|(v, xi)| {
                let (keys, unresolved) = self.sets_containing(v, xi);
                let bulk = keys.iter().filter(|k| matches!(k, SetKey::Bulk(_))).count();
                ((bulk, keys.len() - bulk), unresolved, format!("({v}, {xi})"))
            })
            .collect();
        let pick = |f: fn((usize, usize)) -> usize| {
            DimensionReport::from_counts(counts.iter().map(|(m, u, l)| (f(*m), *u, l.clone())).collect())
        };
        [pick(|(a, b)| a + b), pick(|(a, _)| a), pick(|(_, b)| b)]
    }

    pub fn check_freeness(&self, vertices: &[TreeWord], points: &[GromovPoint]) -> SampleCheck {
        par_check(&product(vertices, points), |(v, xi)| {
            translate_pair(&self.sets_containing(v, xi).0, SetKey::anchor, SetKey::act)
        })
    }

    /// `p in U` implies `g.p in g.U` for the given deck elements.
    pub fn check_invariance(
        &self,
        vertices: &[TreeWord],
        points: &[GromovPoint],
        elements: &[DeckElement],
    ) -> SampleCheck {
        par_check(&product(vertices, points), |(v, xi)| {
            for key in self.sets_containing(v, xi).0 {
                for g in elements {
                    if !self.contains(&key.act(g), &g.act(v), &g.act_point(xi)) {
                        return Some(format!("({v}, {xi}) in {key} but not translated by {g}"));
                    }
                }
            }
            None
        })
    }

    /// Every set meeting the sample, in canonical order.
    pub fn sets_meeting(&self, sample: &[HybridPoint]) -> Vec<SetKey> {
        let mut keys: Vec<SetKey> = sample.par_iter().flat_map_iter(|p| self.sets_containing(&p.v, &p.xi).0).collect();
        keys.sort();
        keys.dedup();
        keys
    }

    /// One line per set: kind, parameters, and tree-projection bound.
    pub fn manifest(&self, keys: &[SetKey]) -> String {
        let p = self.params();
        let mut out = format!(
            "# cover alpha={} level={} tau={} depth={} bulk_radius={}\n",
            p.alpha, p.level, self.thick.tau, self.depth, self.bulk_radius
        );
        for (i, k) in keys.iter().enumerate() {
            match k {
                SetKey::Bulk(x) => {
                    let c = self.window().q_map(x).act(&self.window().root());
                    out.push_str(&format!("set {i} bulk x={x} tree_center={c} tree_radius={}\n", self.bulk_radius));
                }
                SetKey::Thick(f) => out.push_str(&format!(
                    "set {i} thick center={} minus={} plus={} tau={}\n",
                    f.center, f.minus, f.plus, self.thick.tau
                )),
            }
        }
        out
    }

    /// Tree-projection diameters: analytic for bulk sets, measured for
    /// thickened sets, against `2R` and `6 alpha + 2 tau`.
    pub fn check_properness(&self, keys: &[SetKey], max_sets: usize) -> ProperReport {
        let bulk_diameter = 2 * open_ball_radius(self.bulk_radius);
        let mut thick: Vec<&FlowKey> =
            keys.iter().filter_map(|k| if let SetKey::Thick(f) = k { Some(f) } else { None }).collect();
        thick.truncate(max_sets);
        let thick_diameter = thick
            .par_iter()
            .map(|k| {
                let pr = self.thick.projection(k, true);
                pr.iter().flat_map(|a| pr.iter().map(move |b| a.distance(b))).max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0);
        let bound = (2.0 * self.bulk_radius).max(6.0 * self.params().alpha + 2.0 * self.thick.tau as f64);
        ProperReport {
            bulk_diameter,
            thick_diameter,
            thick_sets: thick.len(),
            bound,
            passed: (bulk_diameter.max(thick_diameter) as f64) <= bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProperReport {
    pub bulk_diameter: u32,
    pub thick_diameter: u32,
    pub thick_sets: usize,
    pub bound: f64,
    pub passed: bool,
}

/// A finite subfamily of the final cover, indexed for the hybrid-metric
/// search.
pub struct FiniteFamily<'c, 'f, 'w> {
    cover: &'c FinalCover<'f, 'w>,
    keys: Vec<SetKey>,
}

impl<'c, 'f, 'w> FiniteFamily<'c, 'f, 'w> {
    pub fn new(cover: &'c FinalCover<'f, 'w>, keys: Vec<SetKey>) -> Self {
        FiniteFamily { cover, keys }
    }

    pub fn keys(&self) -> &[SetKey] {
        &self.keys
    }
}

impl HybridCover for FiniteFamily<'_, '_, '_> {
    fn set_count(&self) -> usize {
        self.keys.len()
    }

    fn contains(&self, set: usize, p: &HybridPoint) -> bool {
        self.cover.contains(&self.keys[set], &p.v, &p.xi)
    }

    fn describe(&self, set: usize) -> String {
        self.keys[set].to_string()
    }
}

// ----- samples -----

/// Finite sample of the compactified tree: vertices, edge midpoints and
/// rays.
#[derive(Debug, Clone, Default)]
pub struct CompactSample {
    pub vertices: Vec<TreeWord>,
    pub midpoints: Vec<TreeWord>,
    pub rays: Vec<TreeWord>,
}

impl CompactSample {
    /// Every vertex and edge midpoint within `exhaustive` of the base, plus
    /// `per_level` random vertices and midpoints at each depth up to
    /// `max_depth`, plus rays of depth `ray_depth`: all of them when there
    /// are at most `ray_count`, otherwise a random choice.
    pub fn build(
        window: &CoverWindow,
        exhaustive: u32,
        per_level: usize,
        max_depth: u32,
        ray_depth: u32,
        ray_count: usize,
        seed: u64,
    ) -> Self {
        let root = window.root();
        let mut vertices = window.ball(&root, exhaustive);
        let mut midpoints: Vec<TreeWord> = vertices.iter().filter(|w| w.depth() > 0).cloned().collect();
        let mut rng = stream(seed, 1);
        for d in exhaustive + 1..=max_depth {
            for _ in 0..per_level {
                vertices.push(window.random_extension(&root, d, &mut rng));
                midpoints.push(window.random_extension(&root, d, &mut rng));
            }
        }
        vertices.sort();
        vertices.dedup();
        midpoints.sort();
        midpoints.dedup();
        let rays = sample_rays(window, ray_depth, ray_count, &mut rng);
        CompactSample { vertices, midpoints, rays }
    }

    pub fn ray_points(&self) -> Vec<GromovPoint> {
        self.rays.iter().cloned().map(GromovPoint::Ray).collect()
    }

    pub fn points(&self) -> Vec<GromovPoint> {
        let mut out: Vec<GromovPoint> = self.vertices.iter().cloned().map(GromovPoint::Vertex).collect();
        out.extend(self.midpoints.iter().cloned().map(GromovPoint::Midpoint));
        out.extend(self.ray_points());
        out
    }
}

/// Rays realizing every prefix of length `prefix`, extended canonically to
/// `depth`. Falls back to random rays when there are more than `cap`.
pub fn cell_rays(window: &CoverWindow, prefix: u32, depth: u32, cap: usize, seed: u64) -> (Vec<GromovPoint>, bool) {
    let k = window.graph().max_degree() as f64;
    let estimate = k * (k - 1.0).max(1.0).powi(prefix.saturating_sub(1) as i32);
    if estimate > cap as f64 {
        let rays = sample_rays(window, depth, cap, &mut stream(seed, 2));
        return (rays.into_iter().map(GromovPoint::Ray).collect(), false);
    }
    let rays = window
        .rays(prefix)
        .into_iter()
        .map(|r| GromovPoint::Ray(window.extend_canonically(r.word(), depth.max(prefix))))
        .collect();
    (rays, true)
}

fn sample_rays<R: Rng>(window: &CoverWindow, depth: u32, count: usize, rng: &mut R) -> Vec<TreeWord> {
    let mut rays: Vec<TreeWord> =
        (0..count).map(|_| window.random_extension(&window.root(), depth, rng)).collect();
    rays.sort();
    rays.dedup();
    rays
}

// ----- nerve -----

/// Barycentric coordinates `f_U(x) = a_U(x) / sum_V a_V(x)` with
/// `a_U(x) = d_C(x, Z \ U)`, the complement taken within the sample `Z`.
pub struct Nerve {
    pub keys: Vec<SetKey>,
    /// Per sample point, `(set index, weight)` with positive weight.
    pub weights: Vec<Vec<(usize, f64)>>,
}

pub fn nerve_map(cover: &FinalCover, table: &HybridMetricTable) -> Result<Nerve, CoverError> {
    let sample = table.sample();
    let keys = cover.sets_meeting(sample);
    let index: BTreeMap<&SetKey, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let member: Vec<Vec<usize>> = sample
        .par_iter()
        .map(|p| {
            let mut m: Vec<usize> = cover.sets_containing(&p.v, &p.xi).0.iter().map(|k| index[k]).collect();
            m.sort_unstable();
            m
        })
        .collect();
    let mut inside = vec![vec![false; sample.len()]; keys.len()];
    for (z, sets) in member.iter().enumerate() {
        for &u in sets {
            inside[u][z] = true;
        }
    }
    let weights = (0..sample.len())
        .into_par_iter()
        .map(|x| {
            let raw: Vec<(usize, f64)> = member[x]
                .iter()
                .map(|&u| {
                    let a = (0..sample.len())
                        .filter(|&z| !inside[u][z])
                        .map(|z| table.get(x, z))
                        .fold(f64::INFINITY, f64::min);
                    (u, a)
                })
                .collect();
            if raw.iter().any(|(_, a)| !a.is_finite()) {
                return Err(CoverError::Geometry(format!("a set contains the whole sample near {}", sample[x])));
            }
            let total: f64 = raw.iter().map(|(_, a)| a).sum();
            if total <= 0.0 {
                return Err(CoverError::Property { check: "nerve".into(), witness: format!("{} is uncovered", sample[x]) });
            }
            Ok(raw.into_iter().map(|(u, a)| (u, a / total)).collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Nerve { keys, weights })
}

impl Nerve {
    pub fn l1(&self, x: usize, y: usize) -> f64 {
        let mut a = self.weights[x].iter().peekable();
        let mut b = self.weights[y].iter().peekable();
        let mut total = 0.0;
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(i, f)), Some(&&(j, g))) if i == j => {
                    total += (f - g).abs();
                    a.next();
                    b.next();
                }
                (Some(&&(i, f)), Some(&&(j, _))) if i < j => {
                    total += f;
                    a.next();
                }
                (Some(_), Some(&&(_, g))) => {
                    total += g;
                    b.next();
                }
                (Some(&&(_, f)), None) => {
                    total += f;
                    a.next();
                }
                (None, Some(&&(_, g))) => {
                    total += g;
                    b.next();
                }
                (None, None) => return total,
            }
        }
    }

    /// Largest deviation of a coordinate sum from 1.
    pub fn max_sum_error(&self) -> f64 {
        self.weights.iter().map(|w| (w.iter().map(|(_, f)| f).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    /// `4 D girth / 7`.
    pub admissible_radius: f64,
    pub admissible: usize,
    pub violations: usize,
    /// Largest `l1 / (7 d_C / girth)`.
    pub worst_ratio: f64,
    pub witnesses: Vec<String>,
}

/// Checks `||f(x) - f(y)||_1 <= 7 d_C(x, y) / girth` on up to `pairs`
/// admissible pairs, `d_C(x, y) <= 4 D girth / 7`.
pub fn check_contraction(
    nerve: &Nerve,
    table: &HybridMetricTable,
    girth: u32,
    dimension: u32,
    pairs: usize,
    seed: u64,
) -> ContractionReport {
    let g = girth as f64;
    let radius = 4.0 * dimension as f64 * g / 7.0;
    let n = table.len();
    let mut candidates: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    candidates.retain(|&(i, j)| table.get(i, j) <= radius);
    if candidates.len() > pairs {
        candidates.shuffle(&mut stream(seed, 3));
        candidates.truncate(pairs);
        candidates.sort_unstable();
    }
    let mut report = ContractionReport {
        admissible_radius: radius,
        admissible: candidates.len(),
        violations: 0,
        worst_ratio: 0.0,
        witnesses: Vec::new(),
    };
    for (i, j) in candidates {
        let d = table.get(i, j);
        let l1 = nerve.l1(i, j);
        let bound = 7.0 * d / g;
        report.worst_ratio = report.worst_ratio.max(l1 / bound);
        if l1 > bound + 1e-9 {
            report.violations += 1;
            if report.witnesses.len() < 5 {
                report.witnesses.push(format!(
                    "{} {}: l1 {l1:.6} > {bound:.6} (d_C {d:.6})",
                    table.sample()[i],
                    table.sample()[j]
                ));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{catalog, CatalogGraph};

    fn window(which: CatalogGraph, radius: u32) -> CoverWindow {
        CoverWindow::build(&catalog(which).unwrap(), 0, radius).unwrap()
    }

    fn path(w: &CoverWindow, v: &[Vertex]) -> TreeWord {
        w.word(v.to_vec()).unwrap()
    }

    #[test]
    fn params_for_heawood() {
        let p = CoverParams::for_girth(6);
        assert_eq!(p.level, 6);
        assert_eq!(p.center_radius, 2);
        assert_eq!(p.slab_radius, 0);
        let q = CoverParams::for_girth(8);
        assert_eq!((q.level, q.center_radius, q.slab_radius), (7, 3, 1));
    }

    #[test]
    fn cones_partition_at_a_center() {
        let w = window(CatalogGraph::Petersen, 4);
        let c = w.root();
        let level = 2;
        let points: Vec<GromovPoint> = w
            .nodes()
            .iter()
            .cloned()
            .map(GromovPoint::Vertex)
            .chain(w.nodes()[1..].iter().cloned().map(GromovPoint::Midpoint))
            .collect();
        for p in &points {
            let k = cone_of(&c, p, level).unwrap();
            for q in &points {
                assert_eq!(k.contains(q), cone_of(&c, q, level).unwrap() == k, "{p} {q}");
            }
        }
    }

    #[test]
    fn c8_flow_cover() {
        let w = window(CatalogGraph::Cycle(8), 4);
        let flow = FlowCover::build(&w, CoverParams::for_girth(8)).unwrap();
        assert_eq!(flow.centers(), &[0, 3]);
        let vertices = w.ball(&w.root(), 4);
        let sample = flow.sample_points(&vertices, 30);
        assert!(flow.dimension(&sample).dimension <= 1);
        assert!(flow.check_containment(&sample).passed());
        assert!(flow.check_freeness(&sample).passed());
    }

    #[test]
    fn half_tree_tests_match_enumeration() {
        let w = window(CatalogGraph::Petersen, 6);
        let ball = w.ball(&w.root(), 6);
        let cuts = [
            (w.root(), path(&w, &[0, 1])),
            (path(&w, &[0, 1, 2]), path(&w, &[0, 1, 2, 3])),
        ];
        let brute = ball.iter().any(|z| cuts.iter().all(|c| beyond(z, c)));
        assert_eq!(vertex_in_half_trees(&cuts), brute);
        assert!(vertex_in_half_trees(&cuts));
        assert!(end_in_half_trees(&w, &cuts));
        let opposite = [(path(&w, &[0, 1]), w.root()), (w.root(), path(&w, &[0, 1]))];
        assert!(!vertex_in_half_trees(&opposite));
    }

    #[test]
    fn c8_pipeline_stages() {
        let w = window(CatalogGraph::Cycle(8), 4);
        let flow = FlowCover::build(&w, CoverParams::for_girth(8)).unwrap();
        let domain = w.fundamental_domain();
        let sample = CompactSample::build(&w, 4, 2, 24, 40, 16, 1);
        let rays = sample.ray_points();
        let (thick, report) = pullback_cover(&flow, &domain, &rays, 40).unwrap();
        assert!(report.tau >= 1 && report.containment.passed());
        let pulled = thick.dimension(&domain, &rays);
        assert!(pulled.dimension <= 1, "{pulled:?}");
        let depth = find_boundary_depth(&thick, &domain, &sample.points()).unwrap();
        let cover = FinalCover::assemble(thick, depth.depth);
        let points = sample.points();
        assert!(cover.check_containment(&domain, &points).passed());
        assert!(cover.check_bulk_interior(&domain, &points).passed());
        let [_, bulk, _] = cover.dimension(&domain, &points);
        assert!(bulk.dimension <= 1);
        assert!(cover.check_freeness(&domain, &points).passed());
        let g = w.deck_elements(8);
        assert!(cover.check_invariance(&domain, &points, &g).passed());
    }

    #[test]
    fn nerve_weights_sum_to_one() {
        let w = window(CatalogGraph::Cycle(8), 4);
        let flow = FlowCover::build(&w, CoverParams::for_girth(8)).unwrap();
        let domain = w.fundamental_domain();
        let sample = CompactSample::build(&w, 3, 1, 32, 40, 8, 2);
        let (thick, _) = pullback_cover(&flow, &domain, &sample.ray_points(), 40).unwrap();
        let depth = find_boundary_depth(&thick, &domain, &sample.points()).unwrap();
        let cover = FinalCover::assemble(thick, depth.depth);
        let vertices = w.ball(&w.root(), 1);
        let points: Vec<GromovPoint> = sample.points().into_iter().step_by(3).collect();
        let table = HybridMetricTable::compute(&w, HybridMetricTable::product_sample(&vertices, &points), 2.0).unwrap();
        let nerve = nerve_map(&cover, &table).unwrap();
        assert!(nerve.max_sum_error() < 1e-12);
        assert_eq!(nerve.l1(0, 0), 0.0);
    }
}
