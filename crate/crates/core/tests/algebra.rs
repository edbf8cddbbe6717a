use std::collections::BTreeSet;

use girthlab::algebra::*;
use girthlab::error::AlgebraError;
use girthlab::rng::stream;
use proptest::prelude::*;

/// The whole morphism as one dense integer matrix, summands in index order.
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

fn dense_mul(a: &[Vec<i64>], b: &[Vec<i64>], inner: usize) -> Vec<Vec<i64>> {
    let cols = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![0; cols]; a.len()];
    for i in 0..a.len() {
        for j in 0..cols {
            for k in 0..inner {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn triple(seed: u64) -> (SupportSpace, ControlledMorphism, ControlledMorphism) {
    let space = SupportSpace::grid(3, 4);
    let mut rng = stream(seed, 0);
    let a = random_module(&mut rng, &space, 5, 3, 2);
    let b = random_module(&mut rng, &space, 6, 3, 2);
    let c = random_module(&mut rng, &space, 4, 3, 2);
    let f = random_morphism(&mut rng, &a, &b, 0.4, |_, _| true);
    let g = random_morphism(&mut rng, &b, &c, 0.4, |_, _| true);
    (space, f, g)
}

#[test]
fn composition_matches_dense_products() {
    for seed in 0..100 {
        let (space, f, g) = triple(seed);
        let gf = g.compose(&f).unwrap();
        let inner: usize = f.target.ranks.iter().sum();
        assert_eq!(dense(&gf), dense_mul(&dense(&g), &dense(&f), inner), "seed {seed}");
        assert!(gf.propagation(&space) <= f.propagation(&space) + g.propagation(&space));
        assert!(gf.blocks().all(|(_, m)| !m.is_zero()));
    }
}

#[test]
fn positions_all_in_a0_give_phi00() {
    let space = SupportSpace::grid(2, 6);
    let mut rng = stream(21, 0);
    let mut m = random_module(&mut rng, &space, 6, 2, 1);
    for p in &mut m.positions {
        p.y %= 3;
    }
    let phi = random_morphism(&mut rng, &m, &m, 0.5, |_, _| true);
    let fb = four_block_decompose(&phi, &BTreeSet::from([0, 1, 2]), &BTreeSet::from([3, 4, 5])).unwrap();
    assert_eq!(fb.pieces[0][0], phi);
    assert!(fb.pieces[0][1].is_zero() && fb.pieces[1][0].is_zero() && fb.pieces[1][1].is_zero());
}

#[test]
fn four_block_rejects_positions_outside_a() {
    let m = GeometricModule::new(vec![Position { x: 0, y: 3, level: 0 }], vec![1]).unwrap();
    let phi = ControlledMorphism::identity(&m);
    assert!(matches!(
        four_block_decompose(&phi, &BTreeSet::from([0]), &BTreeSet::from([1])),
        Err(AlgebraError::Shape(_))
    ));
}

#[test]
fn b_containing_a_rewires_into_a() {
    // A is a subset of B, so A n B = A and A \ B is empty
    let space = SupportSpace::grid(2, 8).with_subsets((0..4).collect(), (0..8).collect());
    for seed in 0..20 {
        let mut rng = stream(seed, 7);
        let mut s = random_module(&mut rng, &space, 5, 2, 1);
        let mut t = random_module(&mut rng, &space, 5, 2, 1);
        for p in s.positions.iter_mut().chain(t.positions.iter_mut()) {
            p.y %= 4;
        }
        let psi = random_morphism(&mut rng, &s, &t, 0.5, |_, _| true);
        let chi = random_morphism(&mut rng, &t, &s, 0.5, |_, _| true);
        let phi = chi.compose(&psi).unwrap();
        let r = verify_excision_rewiring(&space, &phi, &psi, &chi, 10).unwrap();
        assert!(r.certified());
        assert!(r.middle.is_empty());
    }
}

#[test]
fn compliant_excision_instances_are_certified() {
    let mut middles = 0;
    for i in 0..200 {
        let (space, inst) = random_excision_instance(&mut stream(99, i), 8);
        let r = verify_excision_rewiring(&space, &inst.phi, &inst.psi, &inst.chi, EXCISION_RADIUS).unwrap();
        assert!(r.certified(), "instance {i}: {r:?}");
        let a1: BTreeSet<usize> = (6..9).collect();
        assert!(r.middle.iter().all(|&t| a1.contains(&inst.psi.target.positions[t].y)));
        middles += r.middle.len();
    }
    assert!(middles > 50);
}

#[test]
fn gaining_control_on_random_factorizations() {
    let space = SupportSpace::grid(3, 4);
    for i in 0..200 {
        let inst = random_factorization(&mut stream(5, i), &space, 6, 3);
        let g = regain_control(&inst.phi, &inst.psi, &inst.chi).unwrap();
        // exact equality checked on dense matrices
        let composed = g.compose().unwrap();
        assert_eq!(dense(&composed), dense(&inst.phi), "instance {i}");
        let b = control_bounds(&space, &inst.phi, &inst.psi, &inst.chi, &g);
        assert!(b.holds, "{b:?}");
        assert_eq!(g.pairs_first.len(), inst.psi.blocks().count());
        assert_eq!(g.pairs_second.len(), inst.chi.blocks().count());
    }
}

#[test]
fn level_profile_and_filtration() {
    let space = SupportSpace::grid(2, 5);
    let morphisms: Vec<ControlledMorphism> = (0..8)
        .map(|i| {
            let mut rng = stream(3, i);
            let m = random_module(&mut rng, &space, 4, 2, 3);
            random_morphism(&mut rng, &m, &m, 0.5, |_, _| true)
        })
        .collect();
    let r = check_filtration(&space, &morphisms);
    assert!(r.holds(), "{r:?}");
    // a morphism whose reach shrinks with the level
    let m = GeometricModule::new(
        (0..5).map(|y| Position { x: 0, y, level: (4 - y) as u32 }).collect(),
        vec![1; 5],
    )
    .unwrap();
    let f = ControlledMorphism::from_blocks(
        m.clone(),
        m,
        [((0, 4), Matrix::identity(1)), ((1, 3), Matrix::identity(1)), ((3, 3), Matrix::identity(1))],
    )
    .unwrap();
    let profile = f.level_profile(&space);
    assert_eq!(profile.get(&4), Some(&4));
    assert_eq!(profile.get(&3), Some(&2));
    assert!(!level_nonincreasing(&profile));
}

fn arb_instance() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 1usize..8)
}

proptest! {
    #[test]
    fn composition_is_associative_and_unital((seed, n) in arb_instance()) {
        let space = SupportSpace::grid(2, 3);
        let mut rng = stream(seed, 0);
        let ms: Vec<GeometricModule> = (0..4).map(|_| random_module(&mut rng, &space, n, 2, 1)).collect();
        let f = random_morphism(&mut rng, &ms[0], &ms[1], 0.5, |_, _| true);
        let g = random_morphism(&mut rng, &ms[1], &ms[2], 0.5, |_, _| true);
        let h = random_morphism(&mut rng, &ms[2], &ms[3], 0.5, |_, _| true);
        prop_assert_eq!(h.compose(&g).unwrap().compose(&f).unwrap(), h.compose(&g.compose(&f).unwrap()).unwrap());
        prop_assert_eq!(ControlledMorphism::identity(&ms[1]).compose(&f).unwrap(), f.clone());
        prop_assert_eq!(f.compose(&ControlledMorphism::identity(&ms[0])).unwrap(), f.clone());
        let f2 = random_morphism(&mut rng, &ms[0], &ms[1], 0.5, |_, _| true);
        // composition distributes over sums
        prop_assert_eq!(g.compose(&f.add(&f2).unwrap()).unwrap(), g.compose(&f).unwrap().add(&g.compose(&f2).unwrap()).unwrap());
    }

    #[test]
    fn split_is_a_biproduct(seed in any::<u64>(), mask in 0u32..16) {
        let space = SupportSpace::grid(2, 4);
        let m = random_module(&mut stream(seed, 1), &space, 7, 3, 1);
        let subset: BTreeSet<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
        let sp = split_over(&m, &subset);
        let whole = sp.incl_part.compose(&sp.proj_part).unwrap().add(&sp.incl_rest.compose(&sp.proj_rest).unwrap()).unwrap();
        prop_assert_eq!(whole, ControlledMorphism::identity(&m));
        prop_assert_eq!(sp.proj_part.compose(&sp.incl_part).unwrap(), ControlledMorphism::identity(&sp.part));
        prop_assert_eq!(sp.proj_rest.compose(&sp.incl_rest).unwrap(), ControlledMorphism::identity(&sp.rest));
        prop_assert!(sp.proj_rest.compose(&sp.incl_part).unwrap().is_zero());
        prop_assert_eq!(sp.incl_part.propagation(&space) + sp.proj_rest.propagation(&space), 0);
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        let mut rng = stream(seed, 2);
        let space = SupportSpace::grid(3, 5).with_subsets(BTreeSet::from([0, 1, 2]), BTreeSet::new());
        let inst = random_factorization(&mut rng, &space, 4, 2);
        let text = Instance {
            space: space.clone(),
            modules: [("s", inst.phi.source.clone()), ("t", inst.psi.target.clone()), ("u", inst.phi.target.clone())]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            morphisms: [("phi", "s", "u", inst.phi), ("psi", "s", "t", inst.psi), ("chi", "t", "u", inst.chi)]
                .into_iter()
                .map(|(k, a, b, f)| (k.to_string(), (a.to_string(), b.to_string(), f)))
                .collect(),
        }
        .render();
        let parsed = Instance::parse(&text).unwrap();
        prop_assert_eq!(parsed.render(), text);
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    let bad_metric = "space x 2\nxd 0 1\nxd 2 0\n";
    assert!(matches!(Instance::parse(bad_metric), Err(AlgebraError::Parse { line: 1, .. })));
    let text = "space x 1\nxd 0\nspace y 1\nyd 0\nmodule m 1\nobj 0 0 0 0 1\nmorphism f m m 1\nblock 0 0 1 1 x\n";
    assert!(matches!(Instance::parse(text), Err(AlgebraError::Parse { line: 8, .. })));
    let ok = text.replace(" x\n", " 7\n");
    let inst = Instance::parse(&ok).unwrap();
    assert_eq!(inst.morphisms["f"].2.block(0, 0), Some(&Matrix::from_rows(1, 1, vec![7]).unwrap()));
}

#[test]
fn metric_axioms_are_enforced() {
    assert!(MetricSpace::new(vec![vec![0, 1], vec![1, 0]]).is_ok());
    assert!(MetricSpace::new(vec![vec![0, 1], vec![2, 0]]).is_err());
    assert!(MetricSpace::new(vec![vec![0, 0], vec![0, 0]]).is_err());
    assert!(MetricSpace::new(vec![vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]]).is_err());
}
