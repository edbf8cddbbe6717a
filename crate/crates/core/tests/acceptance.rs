//! Acceptance suite. Prints one line per criterion and exits nonzero when
//! any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use girthlab::algebra::*;
use girthlab::cover::CompactSample;
use girthlab::cover_tree::{gromov_product, CoverWindow, GromovPoint};
use girthlab::graph::{catalog, CatalogGraph, FiniteGraph};
use girthlab::hybrid::{HybridMetricTable, HybridPoint};
use girthlab::report::{run_pipeline, verify_catalog, PipelineConfig, Status, VerificationReport, VerifyOptions};
use girthlab::rips::{graph_point_distance, RipsComplex};
use girthlab::rng::stream;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

const SEED: u64 = 1;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(elapsed: Duration, secs: f64) -> bool {
    elapsed.as_secs_f64() < secs
}

fn catalog_graphs() -> Vec<(String, FiniteGraph)> {
    let mut v: Vec<CatalogGraph> = (3..=12).map(CatalogGraph::Cycle).collect();
    v.extend([CatalogGraph::Petersen, CatalogGraph::Heawood, CatalogGraph::McGee, CatalogGraph::TutteCoxeter]);
    v.into_iter().map(|c| (format!("{c:?}"), catalog(c).unwrap())).collect()
}

fn girth_oracle() -> Outcome {
    let graphs = catalog_graphs();
    let t = Instant::now();
    let mismatches: Vec<String> = graphs
        .iter()
        .filter(|(_, g)| g.girth().finite() != common::girth_by_enumeration(g, 32))
        .map(|(n, _)| n.clone())
        .collect();
    let e = t.elapsed();
    outcome(
        mismatches.is_empty() && within(e, 1.0),
        format!("{} graphs, mismatches {mismatches:?}, {:.3} s (limit 1 s)", graphs.len(), e.as_secs_f64()),
    )
}

fn retraction() -> Outcome {
    let t = Instant::now();
    let g = catalog(CatalogGraph::McGee).unwrap();
    let r = RipsComplex::build(&g, 3).unwrap();
    let d = common::bfs_distances(&g);
    let (mut worst, mut non_unique, mut errors) = (0.0f64, 0, 0);
    for i in 0..500 {
        let (x, _) = r.random_point(&mut stream(SEED, i));
        let Ok(rx) = r.retract(&x) else {
            errors += 1;
            continue;
        };
        let cmp = common::compare_with_grid(&g, &d, &x, rx, 1e-3);
        worst = worst.max(cmp.gap);
        non_unique += cmp.second_minimizer.is_some() as usize;
    }
    let e = t.elapsed();
    outcome(
        worst <= 2e-3 && non_unique == 0 && errors == 0 && within(e, 30.0),
        format!(
            "500 points, max gap {worst:.2e} (tol 2e-3), second minimizers {non_unique}, errors {errors}, {:.1} s",
            e.as_secs_f64()
        ),
    )
}

fn lipschitz() -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut passed = true;
    for (which, scale) in [(CatalogGraph::Cycle(9), 4), (CatalogGraph::McGee, 3)] {
        let r = RipsComplex::build(&catalog(which).unwrap(), scale).unwrap();
        let bound = scale as f64 + 1.0;
        let (mut violations, mut worst) = (0, 0.0f64);
        for i in 0..1000 {
            let mut rng = stream(SEED ^ 0x11, i);
            let (x, sigma) = r.random_point(&mut rng);
            let sigma = sigma.to_vec();
            let raw: Vec<f64> = sigma.iter().map(|_| Exp1.sample(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            let z = r.point(sigma, raw.iter().map(|w| w / total).collect()).unwrap();
            let y = z.blend(&x, rng.gen::<f64>());
            let dxy = r.distance(&x, &y);
            let drr = graph_point_distance(r.distances(), r.retract(&x).unwrap(), r.retract(&y).unwrap());
            if drr > bound * dxy + 1e-9 {
                violations += 1;
                worst = worst.max(drr / dxy);
            }
        }
        passed &= violations == 0;
        parts.push(format!("{which:?} d={scale}: {violations}/1000 violations, worst ratio {worst:.2} (bound {bound})"));
    }
    let e = t.elapsed();
    outcome(passed && within(e, 30.0), format!("{}, {:.1} s", parts.join("; "), e.as_secs_f64()))
}

fn faithfulness() -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut passed = true;
    for which in [CatalogGraph::Heawood, CatalogGraph::McGee] {
        let g = catalog(which).unwrap();
        let girth = g.girth().finite().unwrap();
        let d = common::bfs_distances(&g);
        let w = CoverWindow::build(&g, 0, girth / 2).unwrap();
        let r = girth / 4;
        let (mut balls, mut pairs, mut violations) = (0, 0, 0);
        for c in w.nodes().iter().filter(|c| c.depth() + r <= w.radius()) {
            balls += 1;
            let ball: Vec<_> = w.nodes().iter().filter(|n| n.distance(c) <= r).collect();
            for (i, a) in ball.iter().enumerate() {
                for b in &ball[i + 1..] {
                    pairs += 1;
                    violations += (a.distance(b) != d[a.image() as usize][b.image() as usize]) as usize;
                }
            }
        }
        passed &= violations == 0 && balls > 0;
        parts.push(format!("{which:?} radius {r}: {balls} balls, {pairs} pairs, {violations} violations"));
    }
    let e = t.elapsed();
    outcome(passed && within(e, 60.0), format!("{}, {:.1} s", parts.join("; "), e.as_secs_f64()))
}

struct PipelineRun {
    label: &'static str,
    report: VerificationReport,
    elapsed: Duration,
}

fn pipelines() -> Vec<PipelineRun> {
    [("heawood", "heawood"), ("mcgee", "mcgee")]
        .into_iter()
        .map(|(label, graph)| {
            let cfg = PipelineConfig { graph: graph.into(), seed: SEED, ..PipelineConfig::default() };
            let t = Instant::now();
            let report = run_pipeline(&cfg).unwrap().report;
            PipelineRun { label, report, elapsed: t.elapsed() }
        })
        .collect()
}

fn measured(r: &VerificationReport, check: &str, key: &str) -> String {
    match r.check(check) {
        Some(c) => c.measured.get(key).map_or("-".into(), |v| v.to_string()),
        None => "missing".into(),
    }
}

fn passes(r: &VerificationReport, check: &str) -> bool {
    r.check(check).is_some_and(|c| c.status == Status::Pass)
}

fn dimensions(runs: &[PipelineRun]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for run in runs {
        let r = &run.report;
        let ok = passes(r, "flow.dimension") && passes(r, "final.dimension") && within(run.elapsed, 120.0);
        passed &= ok;
        parts.push(format!(
            "{}: flow {} (<= 5), pulled back {} over {} cells, final {} (<= 7), {:.1} s",
            run.label,
            measured(r, "flow.dimension", "dimension"),
            measured(r, "pullback.dimension", "dimension"),
            measured(r, "pullback.dimension", "cells"),
            measured(r, "final.dimension", "dimension"),
            run.elapsed.as_secs_f64()
        ));
    }
    outcome(passed, parts.join("; "))
}

fn containment(runs: &[PipelineRun]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for run in runs {
        let r = &run.report;
        let names = ["flow.containment", "pullback.containment", "final.containment"];
        passed &= names.iter().all(|n| passes(r, n));
        let counts: Vec<String> = names
            .iter()
            .map(|n| format!("{n} {}/{}", measured(r, n, "failures"), measured(r, n, "tested")))
            .collect();
        parts.push(format!("{}: failures {}", run.label, counts.join(", ")));
    }
    outcome(passed, parts.join("; "))
}

fn contraction(runs: &[PipelineRun]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for run in runs {
        let r = &run.report;
        passed &= passes(r, "nerve.contraction") && within(run.elapsed, 60.0);
        parts.push(format!(
            "{}: {} violations over {} pairs, worst ratio {}",
            run.label,
            measured(r, "nerve.contraction", "violations"),
            measured(r, "nerve.contraction", "admissible"),
            measured(r, "nerve.contraction", "worst_ratio"),
        ));
    }
    outcome(passed, parts.join("; "))
}

/// Step weight from the definition, evaluated at the base of `q(b.v)`.
fn step(w: &CoverWindow, a: &HybridPoint, b: &HybridPoint, c: f64) -> f64 {
    let at = w.q_map(&b.v).act(&w.root());
    let vis = if a.xi == b.xi { 0.0 } else { (-gromov_product(&a.xi, &b.xi, &at).value()).exp() };
    a.v.distance(&b.v) as f64 + c * vis
}

fn three_step_infimum(w: &CoverWindow, pts: &[HybridPoint], c: f64) -> Vec<Vec<f64>> {
    let n = pts.len();
    let mut best = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        best[i][i] = 0.0;
        for a in 0..n {
            let d1 = step(w, &pts[i], &pts[a], c);
            best[i][a] = best[i][a].min(d1);
            for b in 0..n {
                let d2 = d1 + step(w, &pts[a], &pts[b], c);
                best[i][b] = best[i][b].min(d2);
                for z in 0..n {
                    best[i][z] = best[i][z].min(d2 + step(w, &pts[b], &pts[z], c));
                }
            }
        }
    }
    (0..n).map(|i| (0..n).map(|j| best[i][j].min(best[j][i])).collect()).collect()
}

fn metric(runs: &[PipelineRun]) -> Outcome {
    let t = Instant::now();
    let mcgee = runs.iter().find(|r| r.label == "mcgee").unwrap();
    let c = mcgee
        .report
        .check("metric.control_constant")
        .and_then(|r| r.measured.get("constant"))
        .and_then(|v| v["c"].as_f64())
        .unwrap_or(10.0);
    let w = CoverWindow::build(&catalog(CatalogGraph::McGee).unwrap(), 0, 6).unwrap();
    let sample = CompactSample::build(&w, 4, 4, 40, 48, 64, SEED);
    let points: Vec<GromovPoint> = sample.points().into_iter().step_by(sample.points().len() / 40).collect();
    let vertices = w.ball(&w.root(), 1);
    let table = HybridMetricTable::compute(&w, HybridMetricTable::product_sample(&vertices, &points), c).unwrap();
    let s = table.sample();
    let n = s.len();
    let (mut asym, mut below, mut eq_tested, mut eq_fail) = (0, 0, 0, 0);
    for i in 0..n {
        for j in 0..n {
            asym += (table.get(i, j) != table.get(j, i)) as usize;
            let tree = s[i].v.distance(&s[j].v) as f64;
            below += (table.get(i, j) < tree) as usize;
            if s[i].xi == s[j].xi {
                eq_tested += 1;
                eq_fail += (table.get(i, j) != tree) as usize;
            }
        }
    }
    let mut rng = stream(SEED, 0x7a);
    let mut tri_excess = 0.0f64;
    let mut tri_fail = 0;
    for _ in 0..10_000 {
        let (a, b, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        let ex = table.get(a, z) - table.get(a, b) - table.get(b, z);
        tri_excess = tri_excess.max(ex);
        tri_fail += (ex > 1e-9) as usize;
    }
    let mut inv_pairs = 0;
    let mut inv_diff = 0.0f64;
    for g in w.deck_elements(14).iter().take(3) {
        let rep = table.check_translate(&w, g).unwrap();
        inv_pairs += rep.tested;
        inv_diff = inv_diff.max(rep.max_difference);
    }
    let three: Vec<HybridPoint> = [0, n / 2, n - 1].iter().map(|&i| s[i].clone()).collect();
    let small = HybridMetricTable::compute(&w, three.clone(), c).unwrap();
    let brute = three_step_infimum(&w, &three, c);
    let enum_ok = (0..3).all(|i| (0..3).all(|j| small.get(i, j) == brute[i][j]));
    let e = t.elapsed();
    outcome(
        asym == 0
            && below == 0
            && eq_fail == 0
            && eq_tested > 0
            && tri_fail == 0
            && inv_pairs > 0
            && inv_diff <= 1e-9
            && enum_ok
            && within(e, 60.0),
        format!(
            "C={c:.3}, {n} nodes: asymmetric {asym}, below tree {below}, equal-boundary {eq_fail}/{eq_tested}, \
             triangle {tri_fail}/10000 (max excess {tri_excess:.1e}), invariance {inv_pairs} pairs max diff {inv_diff:.1e}, \
             3-node enumeration {}, {:.1} s",
            if enum_ok { "exact" } else { "differs" },
            e.as_secs_f64()
        ),
    )
}

/// The morphism as one dense matrix, summands in index order.
fn dense(f: &ControlledMorphism) -> Vec<Vec<i64>> {
    let offsets = |m: &GeometricModule| {
        let mut o = vec![0];
        for r in &m.ranks {
            o.push(o.last().unwrap() + r);
        }
        o
    };
    let (os, ot) = (offsets(&f.source), offsets(&f.target));
    let mut out = vec![vec![0; *os.last().unwrap()]; *ot.last().unwrap()];
    for (&(s, t), m) in f.blocks() {
        for i in 0..m.rows {
            for j in 0..m.cols {
                out[ot[t] + i][os[s] + j] = m.get(i, j);
            }
        }
    }
    out
}

/// Largest distance between positions of a nonzero block, from the blocks.
fn reach(space: &SupportSpace, f: &ControlledMorphism) -> (u64, u64) {
    f.blocks().fold((0, 0), |(x, y), (&(s, t), _)| {
        let (p, q) = (&f.source.positions[s], &f.target.positions[t]);
        (x.max(space.x.get(p.x, q.x)), y.max(space.y.get(p.y, q.y)))
    })
}

fn algebra() -> Outcome {
    let t = Instant::now();
    let space = SupportSpace::grid(3, 4);
    let (mut fact_bad, mut bounds_bad) = (0, 0);
    for i in 0..500 {
        let inst = random_factorization(&mut stream(SEED, 1_000 + i), &space, 6, 3);
        let g = regain_control(&inst.phi, &inst.psi, &inst.chi).unwrap();
        fact_bad += (dense(&g.compose().unwrap()) != dense(&inst.phi)) as usize;
        let (px, py) = reach(&space, &g.psi);
        let (cx, cy) = reach(&space, &g.chi);
        let (fx, fy) = reach(&space, &g.phi);
        let ok = px == 0
            && cx == 0
            && fy == 0
            && py <= reach(&space, &inst.psi).1
            && cy <= reach(&space, &inst.chi).1
            && fx <= reach(&space, &inst.phi).0;
        bounds_bad += !ok as usize;
    }
    let mut sub_bad = 0;
    for i in 0..500 {
        let mut rng = stream(SEED, 2_000 + i);
        let a = random_module(&mut rng, &space, 5, 3, 2);
        let b = random_module(&mut rng, &space, 6, 3, 2);
        let c = random_module(&mut rng, &space, 5, 3, 2);
        let f = random_morphism(&mut rng, &a, &b, 0.4, |_, _| true);
        let g = random_morphism(&mut rng, &b, &c, 0.4, |_, _| true);
        let gf = g.compose(&f).unwrap();
        let (p, q, r) = (reach(&space, &f), reach(&space, &g), reach(&space, &gf));
        sub_bad += (r.0 > p.0 + q.0 || r.1 > p.1 + q.1) as usize;
    }
    let (mut exc_bad, mut middle) = (0, 0);
    for i in 0..200 {
        let (sp, inst) = random_excision_instance(&mut stream(SEED, 3_000 + i), 8);
        let ab: BTreeSet<usize> = sp.a.as_ref().unwrap().intersection(sp.b.as_ref().unwrap()).copied().collect();
        let r = verify_excision_rewiring(&sp, &inst.phi, &inst.psi, &inst.chi, EXCISION_RADIUS).unwrap();
        let placed = r.middle.iter().all(|&t| ab.contains(&inst.psi.target.positions[t].y));
        middle += r.middle.len();
        exc_bad += !(placed && r.certified()) as usize;
    }
    let e = t.elapsed();
    outcome(
        fact_bad + bounds_bad + sub_bad + exc_bad == 0 && within(e, 30.0),
        format!(
            "factorizations {fact_bad}/500 unequal, bounds {bounds_bad}/500 broken, subadditivity {sub_bad}/500, \
             excision {exc_bad}/200 failed audits ({middle} middle indices), {:.1} s",
            e.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let opts = VerifyOptions::catalog(SEED);
    let a = verify_catalog(&opts).to_json();
    let b = verify_catalog(&opts).to_json();
    let first_diff = a.bytes().zip(b.bytes()).position(|(x, y)| x != y);
    outcome(
        a == b,
        format!("{} bytes, identical: {}, first difference {first_diff:?}", a.len(), a == b),
    )
}

fn main() {
    // cargo passes libtest flags; this target takes none
    let list_only = std::env::args().any(|a| a == "--list");
    if list_only {
        println!("acceptance: test");
        return;
    }
    let runs = pipelines();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("girth oracle equivalence", Box::new(girth_oracle)),
        ("retraction matches grid search", Box::new(retraction)),
        ("retraction Lipschitz bound", Box::new(lipschitz)),
        ("asymptotic faithfulness", Box::new(faithfulness)),
        ("cover dimensions", Box::new(|| dimensions(&runs))),
        ("containment", Box::new(|| containment(&runs))),
        ("nerve contraction", Box::new(|| contraction(&runs))),
        ("d_C invariants", Box::new(|| metric(&runs))),
        ("controlled algebra exactness", Box::new(algebra)),
        ("determinism", Box::new(determinism)),
    ];
    let mut results = BTreeMap::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        println!("criterion {:>2} {:<32} {}  {}", i + 1, name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.insert(i + 1, o.passed);
    }
    let failed: Vec<usize> = results.iter().filter(|(_, p)| !**p).map(|(i, _)| *i).collect();
    println!("acceptance: {} passed, {} failed {failed:?}", results.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
