use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::io::parse_graph;

fn fixture(name: &str) -> crate::io::GraphDocument {
    let path = format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    parse_graph(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize, red_p: f64, loops: bool) -> BicoloredMultigraph {
    let mut g = BicoloredMultigraph::new(n).unwrap();
    let mut i = 0;
    while g.edge_count() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v && (!loops || n > 1 && rng.gen_bool(0.8)) {
            continue;
        }
        let c = if rng.gen_bool(red_p) { Color::Red } else { Color::Black };
        g.add_edge(&format!("e{i}"), u, v, c).unwrap();
        i += 1;
    }
    g
}

#[test]
fn fixture_verdicts() {
    let k4 = fixture("doubled_k4");
    assert_eq!(play(&k4.graph, k4.sig).0.verdict, Verdict::Tight);
    for (name, k) in [("doubled_triangle", 3), ("block_chain", 3), ("quadrupled_triangle", 6), ("braced_cycle", 3)] {
        let d = fixture(name);
        assert_eq!(play_uncolored(&d.graph, k).unwrap().0.verdict, Verdict::Tight, "{name}");
    }
    let one = BicoloredMultigraph::new(1).unwrap();
    assert_eq!(play(&one, FrameSignature::new(2, 3).unwrap()).0.verdict, Verdict::Tight);
}

#[test]
fn extra_parallel_edge_is_rejected() {
    let mut g = fixture("doubled_triangle").graph;
    g.add_edge("x", 0, 1, Color::Black).unwrap();
    let (v, mut game) = play_uncolored(&g, 3).unwrap();
    assert_eq!(v.verdict, Verdict::DependentContainsSpanningTight);
    assert_eq!(v.rejected, vec![6]);
    // circuit of the extra edge is the whole doubled triangle
    assert_eq!(game.fundamental_circuit(6).unwrap(), (0..6).collect::<Vec<_>>());
    assert!(game.fundamental_circuit(0).is_err());
}

#[test]
fn simple_k4_is_sparse_and_red_is_refused() {
    let mut g = BicoloredMultigraph::new(4).unwrap();
    let mut i = 0;
    for u in 0..4 {
        for v in u + 1..4 {
            g.add_edge(&format!("e{i}"), u, v, Color::Black).unwrap();
            i += 1;
        }
    }
    assert_eq!(play_uncolored(&g, 3).unwrap().0.verdict, Verdict::Sparse);
    g.add_edge("r", 0, 1, Color::Red).unwrap();
    assert!(matches!(play_uncolored(&g, 3), Err(Error::RedEdge(_))));
}

#[test]
fn copy_of_red_edge_gives_three_parallel_edges() {
    let d = fixture("doubled_k4");
    let (_, mut game) = play(&d.graph, d.sig);
    let c = d.graph.edge(d.graph.edge_index("c").unwrap());
    let circuit = game.circuit_with(c.tail, c.head, Color::Red).unwrap();
    let ids: Vec<&str> = circuit.iter().map(|&e| d.graph.edge(e).id.as_str()).collect();
    assert_eq!(ids, vec!["c", "d"]);
}

#[test]
fn tied_down_loop_circuit_spans_both_loop_sites() {
    let d = fixture("doubled_triangle");
    let (v, mut game) = play_tied(&d.graph, d.sig, &TieDown::standard(0));
    assert_eq!(v.verdict, Verdict::Tight);
    let circuit = game.circuit_with(2, 2, Color::Black).unwrap();
    // all six edges plus the three loops at vertex 0
    assert_eq!(circuit.len(), 9);
    let touches = |x: usize| circuit.iter().any(|&e| {
        let (u, w, _) = game.endpoints(e);
        u == x || w == x
    });
    assert!(touches(0) && touches(2));
}

#[test]
fn agrees_with_oracle_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &(a, b) in &[(1, 2), (2, 2), (1, 1)] {
        let sig = FrameSignature::new(a, b).unwrap();
        let k = a + b;
        for _ in 0..400 {
            let n = rng.gen_range(1..=4);
            let m = rng.gen_range(0..=(k * n - k + 2).min(14));
            let g = random_graph(&mut rng, n, m, 0.4, true);
            let (v, _) = play(&g, sig);
            assert_eq!(v.verdict.is_independent(), sparsity_oracle(&g, sig).unwrap(), "{g:?}");
        }
    }
}

#[test]
fn invariants_hold_after_every_move() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &(a, b) in &[(1, 2), (2, 2), (2, 1)] {
        for _ in 0..60 {
            let n = rng.gen_range(2..=6);
            let m = rng.gen_range(0..=(a + b) * n);
            let g = random_graph(&mut rng, n, m, 0.3, false);
            let mut game = PebbleGame::colored(n, FrameSignature::new(a, b).unwrap());
            game.set_audit(true);
            let moves = std::rc::Rc::new(std::cell::Cell::new(0usize));
            let counter = moves.clone();
            game.set_observer(Some(Box::new(move |_, _| counter.set(counter.get() + 1))));
            let v = game.play_graph(&g);
            let accepted = g.edge_count() - v.rejected.len();
            assert!(moves.get() >= accepted);
        }
    }
}

#[test]
fn circuits_are_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sig = FrameSignature::new(1, 2).unwrap();
    let mut checked = 0;
    while checked < 80 {
        let n = rng.gen_range(2..=4);
        let g = random_graph(&mut rng, n, 3 * n - 1, 0.4, false);
        let (v, mut game) = play(&g, sig);
        for &e in &v.rejected {
            let mut c = game.fundamental_circuit(e).unwrap();
            c.push(e);
            assert!(fundamental_circuit_oracle(&g, sig, &c).unwrap(), "{g:?} {c:?}");
            checked += 1;
        }
    }
}

#[test]
fn uncolored_circuits_are_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let n = rng.gen_range(2..=5);
        let g = random_graph(&mut rng, n, 2 * n, 0.0, false);
        let (v, mut game) = play_counts(&g, 2, 3).unwrap();
        for &e in &v.rejected {
            let mut c = game.fundamental_circuit(e).unwrap();
            c.push(e);
            let ends = |s: &[usize]| s.iter().map(|&i| (g.edge(i).tail, g.edge(i).head)).collect::<Vec<_>>();
            assert!(!count_sparse_oracle(n, &ends(&c), 2, 3).unwrap());
            for skip in 0..c.len() {
                let mut rest = c.clone();
                rest.remove(skip);
                assert!(count_sparse_oracle(n, &ends(&rest), 2, 3).unwrap());
            }
        }
    }
}

#[test]
fn components_reject_inside_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let n = rng.gen_range(2..=7);
        let g = random_graph(&mut rng, n, 3 * n, 0.0, false);
        let (plain, _) = play_uncolored(&g, 2).unwrap();
        let mut game = PebbleGame::uncolored(n, 2, 2);
        game.enable_components();
        let fast = game.play_graph(&g);
        assert_eq!(plain, fast);
    }
}

proptest::proptest! {
    #[test]
    fn insertion_order_does_not_matter(seed in 0u64..10_000, perm_seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = FrameSignature::new(2, 1).unwrap();
        let n = rng.gen_range(1..=5);
        let m = rng.gen_range(0..=3 * n);
        let g = random_graph(&mut rng, n, m, 0.4, true);
        let mut idx: Vec<usize> = (0..g.edge_count()).collect();
        let mut prng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..idx.len()).rev() {
            idx.swap(i, prng.gen_range(0..=i));
        }
        let mut h = BicoloredMultigraph::new(n).unwrap();
        for &i in &idx {
            let e = g.edge(i);
            h.add_edge(&e.id, e.tail, e.head, e.color).unwrap();
        }
        let (v1, _) = play(&g, sig);
        let (v2, _) = play(&h, sig);
        proptest::prop_assert_eq!(v1.verdict, v2.verdict);
        proptest::prop_assert_eq!(v1.rejected.len(), v2.rejected.len());
    }
}
