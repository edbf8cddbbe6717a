mod common;

use girthlab::graph::{catalog, CatalogGraph};
use girthlab::rips::RipsComplex;
use girthlab::rng::stream;
use proptest::prelude::*;

#[test]
fn retraction_matches_grid_on_cycle_nine() {
    let g = catalog(CatalogGraph::Cycle(9)).unwrap();
    let r = RipsComplex::build(&g, 3).unwrap();
    let d = common::bfs_distances(&g);
    let mut rng = stream(11, 0);
    let mut checked = 0;
    for _ in 0..100 {
        let (x, _) = r.random_point(&mut rng);
        let Ok(rx) = r.retract(&x) else { continue };
        let cmp = common::compare_with_grid(&g, &d, &x, rx, 1e-3);
        assert!(cmp.gap <= 2e-3, "{x:?}");
        assert!(cmp.second_minimizer.is_none());
        checked += 1;
    }
    assert!(checked >= 95);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn retraction_is_idempotent(seed in any::<u64>()) {
        let g = catalog(CatalogGraph::Heawood).unwrap();
        let r = RipsComplex::build(&g, 2).unwrap();
        let (x, _) = r.random_point(&mut stream(seed, 0));
        let y = r.retract(&x).unwrap();
        let again = r.retract(&r.embed(y)).unwrap();
        prop_assert!(girthlab::rips::graph_point_distance(r.distances(), y, again) < 1e-9);
    }

    #[test]
    fn transport_distance_is_a_metric(seed in any::<u64>()) {
        let g = catalog(CatalogGraph::Petersen).unwrap();
        let r = RipsComplex::build(&g, 2).unwrap();
        let mut rng = stream(seed, 0);
        let (x, _) = r.random_point(&mut rng);
        let (y, _) = r.random_point(&mut rng);
        let (z, _) = r.random_point(&mut rng);
        let (dxy, dyx) = (r.distance(&x, &y), r.distance(&y, &x));
        prop_assert!((dxy - dyx).abs() < 1e-9);
        prop_assert!(r.distance(&x, &x) < 1e-12);
        prop_assert!(dxy <= r.distance(&x, &z) + r.distance(&z, &y) + 1e-9);
    }
}
