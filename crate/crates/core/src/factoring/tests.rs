use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::pebble::PebbleGame;
use crate::io::{parse_graph, GraphDocument};
use crate::linalg::{rat, ratio};
use crate::rigidity::pure_condition_value;

fn fixture(name: &str) -> GraphDocument {
    let path = format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    parse_graph(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn random_labeling(g: &BicoloredMultigraph, sig: FrameSignature, rng: &mut ChaCha8Rng) -> EdgeLabeling {
    let mut l = EdgeLabeling::new();
    for e in g.edges() {
        let v = (0..sig.k())
            .map(|c| if e.color == Color::Red && c >= sig.a { rat(0) } else { ratio(rng.gen_range(-30..=30), rng.gen_range(1..=7)) })
            .collect();
        l.insert(&e.id, v);
    }
    l
}

fn live_sets(d: &FactorDecomposition) -> Vec<BTreeSet<String>> {
    d.factors.iter().map(|f| f.edge_ids().into_iter().collect()).collect()
}

fn ids(s: &str) -> BTreeSet<String> {
    s.chars().map(|c| c.to_string()).collect()
}

/// prod of factor values / det M_T is one nonzero constant across labelings
fn check_value_factorization(g: &BicoloredMultigraph, sig: FrameSignature, d: &FactorDecomposition, rng: &mut ChaCha8Rng, trials: usize) {
    let td = TieDown::standard(0);
    let mut ratio_seen: Option<Rational> = None;
    let mut checked = 0;
    for _ in 0..trials {
        let l = random_labeling(g, sig, rng);
        let det = pure_condition_value(g, sig, &l, &td).unwrap();
        let prod = d.product(&l).unwrap();
        if det.is_zero() {
            assert!(prod.is_zero());
            continue;
        }
        let r = prod / det;
        assert!(!r.is_zero());
        match &ratio_seen {
            None => ratio_seen = Some(r),
            Some(c) => assert_eq!(&r, c),
        }
        checked += 1;
    }
    assert!(checked > trials / 2);
}

fn check_partition(g: &BicoloredMultigraph, d: &FactorDecomposition) {
    let mut all: Vec<String> = d.factors.iter().flat_map(|f| f.edge_ids()).collect();
    all.sort();
    let mut want: Vec<String> = g.edges().iter().map(|e| e.id.clone()).collect();
    want.sort();
    assert_eq!(all, want);
}

#[test]
fn irreducible_fixtures_are_single_factors() {
    for name in ["doubled_triangle", "quadrupled_triangle", "braced_cycle"] {
        let d = fixture(name);
        let dec = factor(&d.graph, d.sig).unwrap();
        assert_eq!(dec.factors.len(), 1, "{name}");
        assert_eq!(dec.factors[0].graph, d.graph, "{name}");
        assert!(is_irreducible(&d.graph, d.sig));
    }
}

#[test]
fn block_chain_has_three_factors() {
    let d = fixture("block_chain");
    let dec = factor(&d.graph, d.sig).unwrap();
    let sets = live_sets(&dec);
    assert_eq!(sets.len(), 3);
    assert!(sets.contains(&ids("abcdef")));
    assert!(sets.contains(&ids("ghijkl")));
    assert!(sets.contains(&ids("mnopqr")));
    // the residual is a doubled triangle on the two contracted blocks and vertex 7
    let residual = dec.factors.iter().find(|f| f.edge_ids().contains(&"m".to_string())).unwrap();
    assert_eq!(residual.graph.vertex_count(), 3);
    assert_eq!(residual.vertices, vec![vec![0, 1, 2], vec![3, 4, 5], vec![6]]);
    assert!(!is_irreducible(&d.graph, d.sig));
    let levels: BTreeSet<usize> = dec.steps.iter().map(|s| s.depth).collect();
    assert_eq!(levels.len(), 2);
}

#[test]
fn doubled_k4_splits_off_the_red_pair() {
    let d = fixture("doubled_k4");
    assert!(!is_irreducible(&d.graph, d.sig));
    let dec = factor(&d.graph, d.sig).unwrap();
    assert!(dec.factors.len() >= 2);
    assert!(live_sets(&dec).contains(&ids("cd")));
    check_partition(&d.graph, &dec);
    for f in &dec.factors {
        assert!(f.is_irreducible(), "{:?}", f.edge_ids());
    }
}

#[test]
fn value_factorization_on_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for name in ["doubled_triangle", "doubled_k4", "block_chain", "braced_cycle", "quadrupled_triangle"] {
        let d = fixture(name);
        let dec = factor(&d.graph, d.sig).unwrap();
        check_partition(&d.graph, &dec);
        check_value_factorization(&d.graph, d.sig, &dec, &mut rng, 50);
    }
}

#[test]
fn factors_are_irreducible_and_idempotent() {
    for name in ["doubled_k4", "block_chain"] {
        let d = fixture(name);
        for f in factor(&d.graph, d.sig).unwrap().factors {
            assert!(f.is_irreducible());
            let again = factor_body_and_cad(&f).unwrap();
            assert_eq!(again.factors, vec![f.clone()]);
            if f.frozen.is_empty() {
                let plain = factor(&f.graph, f.sig).unwrap();
                assert_eq!(plain.factors.len(), 1);
                assert_eq!(plain.factors[0].graph, f.graph);
            }
        }
    }
}

#[test]
fn rank_and_pebble_circuits_agree_on_plain_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let base = fixture("doubled_k4");
    for _ in 0..30 {
        let mut g = BicoloredMultigraph::new(4).unwrap();
        for e in base.graph.edges() {
            let c = if rng.gen_bool(0.3) { Color::Red } else { Color::Black };
            g.add_edge(&e.id, e.tail, e.head, c).unwrap();
        }
        if pebble::play(&g, base.sig).0.verdict != Verdict::Tight {
            continue;
        }
        let f = FactorGraph::plain(g.clone(), base.sig, (0..4).map(|v| vec![v]).collect());
        let (_, mut game) = pebble::play(&g, base.sig);
        for (i, e) in g.edges().iter().enumerate() {
            let mut by_pebble = game.circuit_with(e.tail, e.head, e.color).unwrap();
            by_pebble.sort_unstable();
            assert_eq!(f.rank_circuit(i), by_pebble);
        }
    }
}

#[test]
fn random_colored_graphs_factor_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut done = 0;
    let mut single = 0;
    while done < 40 {
        let (a, b) = [(1, 2), (2, 2), (2, 1)][rng.gen_range(0..3)];
        let sig = FrameSignature::new(a, b).unwrap();
        let k = a + b;
        let n = rng.gen_range(2..=4);
        let mut g = BicoloredMultigraph::new(n).unwrap();
        let mut game = PebbleGame::colored(n, sig);
        let mut i = 0;
        let mut tries = 0;
        while g.edge_count() < k * n - k && tries < 500 {
            tries += 1;
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let c = if rng.gen_bool(0.4) { Color::Red } else { Color::Black };
            if u != v && game.insert(u, v, c) {
                g.add_edge(&format!("e{i}"), u, v, c).unwrap();
                i += 1;
            }
        }
        if g.edge_count() < k * n - k {
            continue;
        }
        let dec = factor(&g, sig).unwrap();
        check_partition(&g, &dec);
        check_value_factorization(&g, sig, &dec, &mut rng, 6);
        for f in &dec.factors {
            assert!(f.is_irreducible());
        }
        if is_irreducible(&g, sig) {
            assert_eq!(dec.factors.len(), 1);
            single += 1;
        }
        done += 1;
    }
    assert!(single > 0);
}

#[test]
fn not_tight_is_rejected() {
    let d = fixture("doubled_triangle");
    let sub = d.graph.edge_subgraph(&[0, 1, 2, 3, 4]);
    assert!(matches!(factor(&sub, d.sig), Err(Error::NotTight(_))));
    let one = BicoloredMultigraph::new(1).unwrap();
    assert!(factor(&one, d.sig).unwrap().factors.is_empty());
}
