use girthlab::cover::*;
use girthlab::cover_tree::*;
use girthlab::graph::{catalog, CatalogGraph};
use girthlab::hybrid::HybridMetricTable;
use girthlab::rng::stream;
use proptest::prelude::*;
use rand::Rng;

fn window(which: CatalogGraph, radius: u32) -> CoverWindow {
    CoverWindow::build(&catalog(which).unwrap(), 0, radius).unwrap()
}

/// Membership from the definition: the geodesic from the basepoint toward
/// `p` passes through the center, and `p` is at least `level` away.
fn ball_oracle(ball: &GromovBall, p: &GromovPoint) -> bool {
    let far = p.far_word(&ball.basepoint);
    let path = ball.basepoint.geodesic_to(&far);
    let long_enough = match p {
        GromovPoint::Midpoint(_) => path.len() as u32 > ball.level + 1,
        _ => path.len() as u32 > ball.level,
    };
    long_enough && path[ball.level as usize] == ball.center
}

fn compact_points(w: &CoverWindow, depth: u32) -> Vec<GromovPoint> {
    let mut out: Vec<GromovPoint> = w.nodes().iter().cloned().map(GromovPoint::Vertex).collect();
    out.extend(w.nodes()[1..].iter().cloned().map(GromovPoint::Midpoint));
    out.extend(w.rays(depth));
    out
}

#[test]
fn cones_match_the_geodesic_definition() {
    let w = window(CatalogGraph::Petersen, 5);
    let points = compact_points(&w, 5);
    for c in w.ball(&w.root(), 1) {
        for level in 1..=2 {
            for p in &points {
                let Some(Cone::Ball(b)) = cone_of(&c, p, level) else { continue };
                assert_eq!(b.center.distance(&c), level);
                for q in &points {
                    assert_eq!(b.contains(q), ball_oracle(&b, q), "{b} {q}");
                }
            }
        }
    }
}

#[test]
fn centers_are_maximal_separated() {
    for which in [CatalogGraph::Heawood, CatalogGraph::McGee, CatalogGraph::Cycle(8)] {
        let w = window(which, 3);
        let g = w.graph().clone();
        let d = g.distance_matrix();
        let p = CoverParams::for_girth(g.girth().finite().unwrap());
        let flow = FlowCover::build(&w, p).unwrap();
        let cs = flow.centers();
        for (i, &a) in cs.iter().enumerate() {
            for &b in &cs[i + 1..] {
                assert!(d.get(a, b) as f64 >= 2.0 * p.alpha);
            }
        }
        for v in g.vertices() {
            assert!(cs.iter().any(|&c| (d.get(c, v) as f64) < 2.0 * p.alpha), "{which:?} {v}");
        }
    }
}

#[test]
fn flow_sets_containing_match_enumeration() {
    let w = window(CatalogGraph::McGee, 6);
    let p = CoverParams::for_girth(7);
    let flow = FlowCover::build(&w, p).unwrap();
    let sample = flow.sample_points(&w.ball(&w.root(), 2), 12);
    assert!(!sample.is_empty());
    for fp in &sample {
        let (keys, unresolved) = flow.sets_containing(fp);
        assert!(!unresolved);
        let mut expected: Vec<FlowKey> = w
            .ball(&fp.v, p.center_radius)
            .into_iter()
            .filter(|c| flow.is_center(c))
            .map(|c| FlowKey {
                minus: cone_of(&c, &fp.minus, p.level).unwrap(),
                plus: cone_of(&c, &fp.plus, p.level).unwrap(),
                center: c,
            })
            .collect();
        expected.sort();
        let mut got = keys.clone();
        got.sort();
        assert_eq!(got, expected, "{:?}", fp.v);
        assert!(keys.iter().all(|k| flow.contains(k, fp)));
    }
}

#[test]
fn mcgee_flow_cover_meets_its_dimension_bound() {
    let w = window(CatalogGraph::McGee, 6);
    let flow = FlowCover::build(&w, CoverParams::for_girth(7)).unwrap();
    let sample = flow.sample_points(&w.ball(&w.root(), 3), 24);
    let d = flow.dimension(&sample);
    assert!(d.dimension <= 5, "{d:?}");
    assert_eq!(d.uncovered, 0);
    assert!(flow.check_containment(&sample).passed());
    assert!(flow.check_freeness(&sample).passed());
}

#[test]
fn cycle_eight_final_cover() {
    let w = window(CatalogGraph::Cycle(8), 4);
    let flow = FlowCover::build(&w, CoverParams::for_girth(8)).unwrap();
    let domain = w.fundamental_domain();
    let sample = CompactSample::build(&w, 4, 2, 24, 40, 16, 5);
    let (thick, report) = pullback_cover(&flow, &domain, &sample.ray_points(), 40).unwrap();
    assert!(report.rejected.iter().all(|&(t, f)| t < report.tau && f > 0));
    let th = check_thickening(&thick, &domain, &sample.points(), 16);
    assert!(th.disjointness.passed() && th.projections.passed());
    assert!(th.max_projection_diameter as f64 <= th.diameter_bound);
    let depth = find_boundary_depth(&thick, &domain, &sample.points()).unwrap();
    let cover = FinalCover::assemble(thick, depth.depth);
    let points = sample.points();
    // every sampled point lies in some set, each of which contains it
    for v in &domain {
        for xi in &points {
            let (keys, _) = cover.sets_containing(v, xi);
            assert!(!keys.is_empty(), "({v}, {xi})");
            assert!(keys.iter().all(|k| cover.contains(k, v, xi)));
        }
    }
    let hs = HybridMetricTable::product_sample(&w.ball(&w.root(), 1), &points[..8]);
    let keys = cover.sets_meeting(&hs);
    let manifest = cover.manifest(&keys);
    assert_eq!(manifest.lines().count(), keys.len() + 1);
    assert!(manifest.starts_with("# cover alpha="));
    assert!(cover.check_properness(&keys, 8).passed);
    // translating a set by a deck element gives a set of the cover
    let g = &w.deck_elements(8)[0];
    for k in &keys {
        let moved = k.act(g);
        assert_eq!(moved.act(&g.inverse()), *k);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gromov_balls_are_nested_or_disjoint(seed in any::<u64>()) {
        let w = window(CatalogGraph::Heawood, 6);
        let mut rng = stream(seed, 0);
        let base = w.nodes()[rng.gen_range(0..w.ball(&w.root(), 1).len())].clone();
        let mut ball = || {
            let level = rng.gen_range(1..=3);
            let p = GromovPoint::Ray(w.random_extension(&w.root(), 6, &mut rng));
            match cone_of(&base, &p, level) {
                Some(Cone::Ball(b)) => Some(b),
                _ => None,
            }
        };
        let (Some(a), Some(b)) = (ball(), ball()) else { return Ok(()) };
        let points = compact_points(&w, 6);
        let ina: Vec<bool> = points.iter().map(|p| a.contains(p)).collect();
        let inb: Vec<bool> = points.iter().map(|p| b.contains(p)).collect();
        let a_in_b = ina.iter().zip(&inb).all(|(x, y)| !x || *y);
        let b_in_a = ina.iter().zip(&inb).all(|(x, y)| !y || *x);
        let disjoint = ina.iter().zip(&inb).all(|(x, y)| !(x & y));
        prop_assert!(a_in_b || b_in_a || disjoint);
    }
}
