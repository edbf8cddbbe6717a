//! Finite simple graphs, their path metric, and the catalog of large-girth
//! test graphs.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GraphError;

pub type Vertex = u32;

/// Length of the shortest cycle. Trees have infinite girth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Girth {
    Finite(u32),
    Infinite,
}

impl Girth {
    pub fn finite(self) -> Option<u32> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Infinite => None,
        }
    }

    pub fn is_tree(self) -> bool {
        matches!(self, Girth::Infinite)
    }
}

impl PartialOrd for Girth {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Girth {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Girth::Finite(a), Girth::Finite(b)) => a.cmp(b),
            (Girth::Finite(_), Girth::Infinite) => Less,
            (Girth::Infinite, Girth::Finite(_)) => Greater,
            (Girth::Infinite, Girth::Infinite) => Equal,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => write!(f, "inf"),
        }
    }
}

/// A connected finite simple graph. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    /// Sorted neighbor lists.
    adj: Vec<Vec<Vertex>>,
}

impl FiniteGraph {
    /// Builds a graph on `n` vertices, rejecting loops, repeated edges,
    /// out-of-range ids and disconnected results.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adj = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for (i, &(u, v)) in edges.iter().enumerate() {
            let line = i + 1;
            if u as usize >= n || v as usize >= n {
                return Err(GraphError::VertexOutOfRange { line, vertex: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::Loop { line, vertex: u });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge { line, u, v });
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = FiniteGraph { adj };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// Parses the edge-list text format: one `u v` pair per line, 0-based
    /// ids, `#` starts a comment. The vertex count is one more than the
    /// largest id mentioned.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut seen = BTreeSet::new();
        let mut max_id: Option<Vertex> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut parts = content.split_whitespace();
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(GraphError::Parse { line, text: raw.to_string() });
            };
            let parse = |s: &str| {
                s.parse::<Vertex>()
                    .map_err(|_| GraphError::Parse { line, text: raw.to_string() })
            };
            let (u, v) = (parse(a)?, parse(b)?);
            if u == v {
                return Err(GraphError::Loop { line, vertex: u });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge { line, u, v });
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push((u, v));
        }
        let n = max_id.map_or(0, |m| m as usize + 1);
        Self::from_edges(n, &edges)
    }

    pub fn single_vertex() -> Self {
        FiniteGraph { adj: vec![Vec::new()] }
    }

    /// Writes the edge list in the ingestion format.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# {} vertices, {} edges\n", self.vertex_count(), self.edge_count());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        0..self.adj.len() as Vertex
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as Vertex;
            list.iter().copied().filter(move |&v| u < v).map(move |v| (u, v))
        })
    }

    fn is_connected(&self) -> bool {
        self.bfs(0).iter().all(|d| d.is_some())
    }

    /// Hop distances from `source`; `None` for unreachable vertices.
    pub fn bfs(&self, source: Vertex) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.adj.len()];
        dist[source as usize] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize].unwrap();
            for &w in self.neighbors(u) {
                if dist[w as usize].is_none() {
                    dist[w as usize] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// BFS parent pointers from `root`, visiting neighbors in increasing
    /// order. `parent[root] == root`.
    pub fn bfs_tree(&self, root: Vertex) -> Vec<Vertex> {
        let mut parent = vec![Vertex::MAX; self.adj.len()];
        parent[root as usize] = root;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if parent[w as usize] == Vertex::MAX {
                    parent[w as usize] = u;
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    /// All-pairs hop distances. The graph is connected, so every entry is
    /// finite.
    pub fn distance_matrix(&self) -> DistanceMatrix {
        use rayon::prelude::*;
        let n = self.adj.len();
        let rows: Vec<Vec<u32>> = (0..n as Vertex)
            .into_par_iter()
            .map(|s| self.bfs(s).into_iter().map(|d| d.expect("connected")).collect())
            .collect();
        DistanceMatrix { n, data: rows.concat() }
    }

    pub fn diameter(&self) -> u32 {
        let d = self.distance_matrix();
        d.data.iter().copied().max().unwrap_or(0)
    }

    /// Shortest cycle length. A BFS from every vertex; a non-tree edge
    /// `(u, w)` closes a closed walk of length `d(u) + d(w) + 1`, and the
    /// minimum over all roots is exact. Each BFS stops once its level can no
    /// longer beat the best value.
    pub fn girth(&self) -> Girth {
        let n = self.adj.len();
        let mut best = u32::MAX;
        let mut dist = vec![u32::MAX; n];
        let mut parent = vec![Vertex::MAX; n];
        let mut queue = VecDeque::new();
        for s in 0..n as Vertex {
            dist.fill(u32::MAX);
            parent.fill(Vertex::MAX);
            dist[s as usize] = 0;
            queue.clear();
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let du = dist[u as usize];
                if 2 * du + 1 >= best {
                    break;
                }
                for &w in self.neighbors(u) {
                    if dist[w as usize] == u32::MAX {
                        dist[w as usize] = du + 1;
                        parent[w as usize] = u;
                        queue.push_back(w);
                    } else if parent[u as usize] != w {
                        best = best.min(du + dist[w as usize] + 1);
                    }
                }
            }
        }
        if best == u32::MAX {
            Girth::Infinite
        } else {
            Girth::Finite(best)
        }
    }
}

/// Dense symmetric matrix of hop distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn get(&self, u: Vertex, v: Vertex) -> u32 {
        self.data[u as usize * self.n + v as usize]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Named graphs of the built-in catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CatalogGraph {
    Cycle(u32),
    Path(u32),
    Petersen,
    Heawood,
    McGee,
    TutteCoxeter,
}

/// What to generate: a catalog graph or a random regular graph with a
/// girth floor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphSpec {
    Catalog(CatalogGraph),
    RandomRegular { degree: u32, vertices: u32, min_girth: u32, seed: u64 },
}

impl GraphSpec {
    /// Parses `cycle(8)`, `path(5)`, `petersen`, `heawood`, `mcgee`,
    /// `tutte-coxeter` or `regular(3,30,7,1)` (degree, vertices, girth,
    /// seed).
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let t = text.trim().to_ascii_lowercase();
        let bad = || GraphError::UnknownSpec(text.to_string());
        let args = |prefix: &str| -> Option<Vec<u64>> {
            let inner = t.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            inner.split(',').map(|s| s.trim().parse().ok()).collect()
        };
        let catalog = match t.as_str() {
            "petersen" => Some(CatalogGraph::Petersen),
            "heawood" => Some(CatalogGraph::Heawood),
            "mcgee" => Some(CatalogGraph::McGee),
            "tutte-coxeter" | "tutte_coxeter" => Some(CatalogGraph::TutteCoxeter),
            _ => None,
        };
        if let Some(c) = catalog {
            return Ok(GraphSpec::Catalog(c));
        }
        if let Some(a) = args("cycle") {
            return match a.as_slice() {
                [n] => Ok(GraphSpec::Catalog(CatalogGraph::Cycle(*n as u32))),
                _ => Err(bad()),
            };
        }
        if let Some(a) = args("path") {
            return match a.as_slice() {
                [n] => Ok(GraphSpec::Catalog(CatalogGraph::Path(*n as u32))),
                _ => Err(bad()),
            };
        }
        if let Some(a) = args("regular") {
            return match a.as_slice() {
                [k, n, g, seed] => Ok(GraphSpec::RandomRegular {
                    degree: *k as u32,
                    vertices: *n as u32,
                    min_girth: *g as u32,
                    seed: *seed,
                }),
                _ => Err(bad()),
            };
        }
        Err(bad())
    }

    pub fn label(&self) -> String {
        match self {
            GraphSpec::Catalog(CatalogGraph::Cycle(n)) => format!("cycle({n})"),
            GraphSpec::Catalog(CatalogGraph::Path(n)) => format!("path({n})"),
            GraphSpec::Catalog(CatalogGraph::Petersen) => "petersen".into(),
            GraphSpec::Catalog(CatalogGraph::Heawood) => "heawood".into(),
            GraphSpec::Catalog(CatalogGraph::McGee) => "mcgee".into(),
            GraphSpec::Catalog(CatalogGraph::TutteCoxeter) => "tutte-coxeter".into(),
            GraphSpec::RandomRegular { degree, vertices, min_girth, seed } => {
                format!("regular({degree},{vertices},{min_girth},{seed})")
            }
        }
    }
}

/// Restarts allowed for the random regular generator.
pub const RANDOM_REGULAR_RESTARTS: u32 = 20_000;

pub fn generate(spec: &GraphSpec) -> Result<FiniteGraph, GraphError> {
    match spec {
        GraphSpec::Catalog(c) => catalog(*c),
        GraphSpec::RandomRegular { degree, vertices, min_girth, seed } => {
            random_regular(*degree, *vertices, *min_girth, *seed, RANDOM_REGULAR_RESTARTS)
        }
    }
}

pub fn catalog(which: CatalogGraph) -> Result<FiniteGraph, GraphError> {
    match which {
        CatalogGraph::Cycle(n) => {
            if n < 3 {
                return Err(GraphError::UnknownSpec(format!("cycle({n})")));
            }
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            FiniteGraph::from_edges(n as usize, &edges)
        }
        CatalogGraph::Path(n) => {
            if n == 0 {
                return Err(GraphError::Empty);
            }
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            FiniteGraph::from_edges(n as usize, &edges)
        }
        CatalogGraph::Petersen => {
            let mut edges = Vec::new();
            for i in 0..5 {
                edges.push((i, (i + 1) % 5));
                edges.push((i, i + 5));
                edges.push((i + 5, (i + 2) % 5 + 5));
            }
            FiniteGraph::from_edges(10, &edges)
        }
        CatalogGraph::Heawood => lcf(14, &[5, -5]),
        CatalogGraph::McGee => lcf(24, &[12, 7, -7]),
        CatalogGraph::TutteCoxeter => lcf(30, &[-13, -9, 7, -7, 9, 13]),
    }
}

/// Hamiltonian cycle on `n` vertices plus the chords of an LCF code.
fn lcf(n: u32, pattern: &[i32]) -> Result<FiniteGraph, GraphError> {
    let mut set = BTreeSet::new();
    for i in 0..n {
        set.insert((i.min((i + 1) % n), i.max((i + 1) % n)));
        let j = (i as i32 + pattern[i as usize % pattern.len()]).rem_euclid(n as i32) as u32;
        set.insert((i.min(j), i.max(j)));
    }
    let edges: Vec<_> = set.into_iter().collect();
    FiniteGraph::from_edges(n as usize, &edges)
}

/// Random `degree`-regular graph on `vertices` vertices with girth at least
/// `min_girth`. Edges are added one at a time between vertices with spare
/// degree that are at distance at least `min_girth - 1`; a construction
/// that gets stuck is discarded and restarted. Deterministic in `seed`.
pub fn random_regular(
    degree: u32,
    vertices: u32,
    min_girth: u32,
    seed: u64,
    restarts: u32,
) -> Result<FiniteGraph, GraphError> {
    let (k, n) = (degree as usize, vertices as usize);
    if k == 0 || k >= n || (k * n) % 2 != 0 {
        return Err(GraphError::Infeasible {
            reason: format!("no {k}-regular simple graph on {n} vertices"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        if let Some(adj) = try_regular(k, n, min_girth, &mut rng) {
            let edges: Vec<_> = adj
                .iter()
                .enumerate()
                .flat_map(|(u, l)| {
                    l.iter().filter(move |&&v| (u as Vertex) < v).map(move |&v| (u as Vertex, v))
                })
                .collect();
            if let Ok(g) = FiniteGraph::from_edges(n, &edges) {
                if g.girth() >= Girth::Finite(min_girth) {
                    return Ok(g);
                }
            }
        }
    }
    Err(GraphError::RetryBudget { restarts, degree, vertices, min_girth })
}

fn try_regular(k: usize, n: usize, min_girth: u32, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<Vertex>>> {
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::with_capacity(k); n];
    let far_enough = |adj: &[Vec<Vertex>], u: usize, v: usize| -> bool {
        // a new edge u-v closes cycles of length d(u, v) + 1
        let limit = min_girth.saturating_sub(1);
        let mut dist = vec![u32::MAX; n];
        dist[u] = 0;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x];
            if x == v {
                return dx >= limit;
            }
            if dx + 1 >= limit {
                continue;
            }
            for &y in &adj[x] {
                if dist[y as usize] == u32::MAX {
                    dist[y as usize] = dx + 1;
                    queue.push_back(y as usize);
                }
            }
        }
        true
    };
    loop {
        let open: Vec<usize> = (0..n).filter(|&v| adj[v].len() < k).collect();
        if open.is_empty() {
            return Some(adj);
        }
        // saturate the most constrained vertex first
        let u = *open.iter().min_by_key(|&&v| (k - adj[v].len(), rng.gen::<u32>()))?;
        let mut candidates: Vec<usize> = open
            .iter()
            .copied()
            .filter(|&v| v != u && !adj[u].contains(&(v as Vertex)) && far_enough(&adj, u, v))
            .collect();
        candidates.shuffle(rng);
        let v = candidates.first().copied()?;
        adj[u].push(v as Vertex);
        adj[v].push(u as Vertex);
    }
}

/// Ordered components of a space of graphs, each analysed on its own.
#[derive(Debug, Clone)]
pub struct GraphFamily {
    pub components: Vec<FiniteGraph>,
    pub labels: Vec<String>,
}

impl GraphFamily {
    pub fn new(components: Vec<(String, FiniteGraph)>) -> Self {
        let (labels, components) = components.into_iter().unzip();
        GraphFamily { components, labels }
    }

    pub fn girths(&self) -> Vec<Girth> {
        self.components.iter().map(FiniteGraph::girth).collect()
    }

    /// Large girth on the finite prefix: girths are nondecreasing and the
    /// last exceeds the first (trivially true for fewer than two
    /// components).
    pub fn has_large_girth(&self) -> bool {
        let g = self.girths();
        g.windows(2).all(|w| w[0] <= w[1]) && (g.len() < 2 || g.first() < g.last())
    }

    /// Uniform degree bound across components.
    pub fn degree_bound(&self) -> usize {
        self.components.iter().map(FiniteGraph::max_degree).max().unwrap_or(0)
    }

    /// Distance between vertices of possibly different components;
    /// `None` across components.
    pub fn distance(&self, a: (usize, Vertex), b: (usize, Vertex)) -> Option<u32> {
        if a.0 != b.0 {
            return None;
        }
        self.components[a.0].bfs(a.1)[b.1 as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive cycle enumeration: each simple cycle is found from its
    /// smallest vertex, in both orientations.
    fn brute_force_girth(g: &FiniteGraph, max_len: usize) -> Girth {
        fn dfs(g: &FiniteGraph, start: Vertex, path: &mut Vec<Vertex>, best: &mut usize, max_len: usize) {
            let last = *path.last().unwrap();
            for &w in g.neighbors(last) {
                if w == start && path.len() >= 3 {
                    *best = (*best).min(path.len());
                } else if w > start && !path.contains(&w) && path.len() < max_len {
                    path.push(w);
                    dfs(g, start, path, best, max_len);
                    path.pop();
                }
            }
        }
        let mut best = usize::MAX;
        for s in g.vertices() {
            dfs(g, s, &mut vec![s], &mut best, max_len);
        }
        if best == usize::MAX {
            Girth::Infinite
        } else {
            Girth::Finite(best as u32)
        }
    }

    #[test]
    fn cycle_and_path_girth() {
        assert_eq!(catalog(CatalogGraph::Cycle(6)).unwrap().girth(), Girth::Finite(6));
        assert_eq!(catalog(CatalogGraph::Cycle(9)).unwrap().girth(), Girth::Finite(9));
        assert_eq!(catalog(CatalogGraph::Path(5)).unwrap().girth(), Girth::Infinite);
    }

    #[test]
    fn petersen_girth_matches_enumeration() {
        let g = catalog(CatalogGraph::Petersen).unwrap();
        assert_eq!(brute_force_girth(&g, 6), Girth::Finite(5));
        assert_eq!(g.girth(), Girth::Finite(5));
    }

    #[test]
    fn catalog_invariants() {
        let expected = [
            (CatalogGraph::Heawood, 14, 6, 3),
            (CatalogGraph::McGee, 24, 7, 4),
            (CatalogGraph::TutteCoxeter, 30, 8, 4),
        ];
        for (which, n, girth, diam) in expected {
            let g = catalog(which).unwrap();
            assert_eq!(g.vertex_count(), n);
            assert!(g.vertices().all(|v| g.degree(v) == 3));
            assert_eq!(g.girth(), Girth::Finite(girth), "{which:?}");
            assert_eq!(g.diameter(), diam, "{which:?}");
        }
    }

    #[test]
    fn diameters() {
        assert_eq!(catalog(CatalogGraph::Cycle(6)).unwrap().diameter(), 3);
        assert_eq!(FiniteGraph::single_vertex().diameter(), 0);
        assert_eq!(FiniteGraph::single_vertex().girth(), Girth::Infinite);
    }

    #[test]
    fn random_regular_meets_girth_floor() {
        let g = random_regular(3, 30, 7, 1, RANDOM_REGULAR_RESTARTS).unwrap();
        assert!(g.vertices().all(|v| g.degree(v) == 3));
        assert!(g.girth() >= Girth::Finite(7));
        let again = random_regular(3, 30, 7, 1, RANDOM_REGULAR_RESTARTS).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn random_regular_reports_budget() {
        // the (3,8)-cage has 30 vertices, so 20 vertices cannot reach girth 8
        let err = random_regular(3, 20, 8, 0, 5).unwrap_err();
        assert!(err.to_string().contains("5 restarts"), "{err}");
        assert!(matches!(random_regular(3, 7, 3, 0, 5), Err(GraphError::Infeasible { .. })));
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let dup = "0 1\n# comment\n1 2\n2 1\n";
        match FiniteGraph::parse_edge_list(dup) {
            Err(GraphError::DuplicateEdge { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        match FiniteGraph::parse_edge_list("0 1\n1 1\n") {
            Err(GraphError::Loop { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match FiniteGraph::parse_edge_list("0 1\nx y\n") {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            FiniteGraph::parse_edge_list("0 1\n2 3\n"),
            Err(GraphError::Disconnected)
        ));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = catalog(CatalogGraph::Petersen).unwrap();
        let back = FiniteGraph::parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn spec_strings() {
        assert_eq!(GraphSpec::parse("cycle(8)").unwrap(), GraphSpec::Catalog(CatalogGraph::Cycle(8)));
        assert_eq!(
            GraphSpec::parse("regular(3, 30, 7, 1)").unwrap(),
            GraphSpec::RandomRegular { degree: 3, vertices: 30, min_girth: 7, seed: 1 }
        );
        assert!(GraphSpec::parse("dodecahedron").is_err());
        for s in ["cycle(8)", "heawood", "tutte-coxeter", "regular(3,30,7,1)"] {
            assert_eq!(GraphSpec::parse(s).unwrap().label(), s);
        }
    }

    #[test]
    fn family_queries() {
        let fam = GraphFamily::new(
            [6, 8, 10]
                .iter()
                .map(|&n| (format!("cycle({n})"), catalog(CatalogGraph::Cycle(n)).unwrap()))
                .collect(),
        );
        assert!(fam.has_large_girth());
        assert_eq!(fam.degree_bound(), 2);
        assert_eq!(fam.distance((0, 0), (1, 0)), None);
        assert_eq!(fam.distance((2, 0), (2, 5)), Some(5));
    }
}
