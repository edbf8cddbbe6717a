//! Oracles shared by the integration and acceptance targets. They recompute
//! quantities from definitions, without the library's closed forms.
#![allow(dead_code)]

use std::collections::VecDeque;

use girthlab::graph::{FiniteGraph, Vertex};
use girthlab::rips::{RipsPoint, TreePoint};

/// All-pairs distances by plain BFS.
pub fn bfs_distances(g: &FiniteGraph) -> Vec<Vec<u32>> {
    let n = g.vertex_count();
    (0..n)
        .map(|s| {
            let mut d = vec![u32::MAX; n];
            d[s] = 0;
            let mut q = VecDeque::from([s as Vertex]);
            while let Some(u) = q.pop_front() {
                for &v in g.neighbors(u) {
                    if d[v as usize] == u32::MAX {
                        d[v as usize] = d[u as usize] + 1;
                        q.push_back(v);
                    }
                }
            }
            d
        })
        .collect()
}

/// Shortest cycle by enumerating simple paths from every start vertex.
pub fn girth_by_enumeration(g: &FiniteGraph, cap: u32) -> Option<u32> {
    fn dfs(g: &FiniteGraph, start: Vertex, path: &mut Vec<Vertex>, best: &mut u32) {
        let len = path.len() as u32;
        if len >= *best {
            return;
        }
        let u = *path.last().unwrap();
        for &v in g.neighbors(u) {
            if v == start && len >= 3 {
                *best = (*best).min(len);
            } else if v > start && !path.contains(&v) {
                path.push(v);
                dfs(g, start, path, best);
                path.pop();
            }
        }
    }
    let mut best = cap + 1;
    for s in g.vertices() {
        dfs(g, s, &mut vec![s], &mut best);
    }
    (best <= cap).then_some(best)
}

/// Point on edge `(a, b)` at parameter `s` from `a`.
#[derive(Debug, Clone, Copy)]
pub struct GridPoint {
    pub a: Vertex,
    pub b: Vertex,
    pub s: f64,
    pub value: f64,
}

pub fn objective_at(d: &[Vec<u32>], x: &RipsPoint, a: Vertex, b: Vertex, s: f64) -> f64 {
    x.terms()
        .map(|(v, t)| {
            let da = d[v as usize][a as usize] as f64 + s;
            let db = d[v as usize][b as usize] as f64 + 1.0 - s;
            t * da.min(db).powi(2)
        })
        .sum()
}

/// Objective on a grid of the given step over every edge of the graph.
pub fn grid_objective(g: &FiniteGraph, d: &[Vec<u32>], x: &RipsPoint, step: f64) -> Vec<GridPoint> {
    let k = (1.0 / step).round() as usize;
    let mut out = Vec::new();
    for (a, b) in g.edges() {
        for i in 0..=k {
            let s = i as f64 / k as f64;
            out.push(GridPoint { a, b, s, value: objective_at(d, x, a, b, s) });
        }
    }
    out
}

/// Graph distance between an edge point and a retraction result.
pub fn distance_to(d: &[Vec<u32>], p: &GridPoint, q: TreePoint) -> f64 {
    let (c, e, u) = match q {
        TreePoint::Vertex(v) => (v, v, 0.0),
        TreePoint::Edge { a, b, s } => (a, b, s),
    };
    if (p.a, p.b) == (c, e) {
        return (p.s - u).abs();
    }
    if (p.a, p.b) == (e, c) {
        return (1.0 - p.s - u).abs();
    }
    let mut best = f64::INFINITY;
    for (x, dx) in [(p.a, p.s), (p.b, 1.0 - p.s)] {
        for (y, dy) in [(c, u), (e, 1.0 - u)] {
            best = best.min(dx + d[x as usize][y as usize] as f64 + dy);
        }
    }
    best
}

pub struct GridComparison {
    /// Distance from the retraction to the best grid point.
    pub gap: f64,
    /// A grid point farther than `2 * step` from the retraction whose
    /// objective is within 1e-9 of the retraction's.
    pub second_minimizer: Option<GridPoint>,
}

pub fn compare_with_grid(
    g: &FiniteGraph,
    d: &[Vec<u32>],
    x: &RipsPoint,
    r: TreePoint,
    step: f64,
) -> GridComparison {
    let grid = grid_objective(g, d, x, step);
    let best = grid.iter().min_by(|p, q| p.value.total_cmp(&q.value)).unwrap();
    let rv = {
        let (a, b, s) = match r {
            TreePoint::Vertex(v) => (v, v, 0.0),
            TreePoint::Edge { a, b, s } => (a, b, s),
        };
        objective_at(d, x, a, b, s)
    };
    let second_minimizer = grid
        .iter()
        .find(|p| p.value < rv + 1e-9 && distance_to(d, p, r) > 2.0 * step)
        .copied();
    GridComparison { gap: distance_to(d, best, r), second_minimizer }
}
