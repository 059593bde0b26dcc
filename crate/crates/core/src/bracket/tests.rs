use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::TieLoop;
use crate::io::{parse_embedding, parse_graph, GraphDocument};
use crate::linalg::{rat, ratio};
use crate::pebble::{play_uncolored, Verdict};
use crate::rigidity::pure_condition_value;

fn fixture(name: &str) -> GraphDocument {
    let path = format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    parse_graph(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn embedding(name: &str) -> EdgeLabeling {
    let path = format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    parse_embedding(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn random_labeling(g: &BicoloredMultigraph, sig: FrameSignature, rng: &mut ChaCha8Rng) -> EdgeLabeling {
    let mut l = EdgeLabeling::new();
    for e in g.edges() {
        let v = (0..sig.k())
            .map(|c| if e.color == Color::Red && c >= sig.a { rat(0) } else { ratio(rng.gen_range(-20..=20), rng.gen_range(1..=5)) })
            .collect();
        l.insert(&e.id, v);
    }
    l
}

/// Every orientation of the non-loop rows, filtered by out-degree (and the red bound).
fn brute_fans(fg: &FanGraph, ab: bool) -> BTreeSet<FanDiagram> {
    let free: Vec<usize> = (0..fg.rows.len()).filter(|&r| !fg.rows[r].is_loop()).collect();
    assert!(free.len() <= 22);
    let mut out = BTreeSet::new();
    for mask in 0u64..1 << free.len() {
        let mut f = FanDiagram { out_of: fg.rows.iter().map(|r| r.u).collect() };
        for (i, &r) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                f.out_of[r] = fg.rows[r].v;
            }
        }
        if f.validate(fg, ab).is_ok() {
            out.insert(f);
        }
    }
    out
}

fn collect(fg: &FanGraph, ab: bool, limit: Option<usize>) -> Vec<FanDiagram> {
    let seed = seed_fan(fg).unwrap();
    let mut fans = Vec::new();
    let mut sink = |f: &FanDiagram| {
        fans.push(f.clone());
        true
    };
    let n = if ab { enumerate_ab_fans(fg, seed, limit, &mut sink) } else { enumerate_fans(fg, seed, limit, &mut sink) }.unwrap();
    assert_eq!(n, fans.len());
    fans
}

/// Random tight graph for (k, k): add random edges, keep those the pebble game accepts.
fn random_tight(rng: &mut ChaCha8Rng, n: usize, k: usize) -> BicoloredMultigraph {
    let mut g = BicoloredMultigraph::new(n).unwrap();
    let mut game = crate::pebble::PebbleGame::uncolored(n, k, k);
    let mut i = 0;
    while g.edge_count() < k * (n - 1) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && game.insert(u, v, Color::Black) {
            g.add_edge(&format!("e{i}"), u, v, Color::Black).unwrap();
            i += 1;
        }
    }
    g
}

const FIXTURES: [&str; 5] = ["doubled_triangle", "doubled_k4", "braced_cycle", "quadrupled_triangle", "block_chain"];

#[test]
fn fans_match_brute_force_on_fixtures() {
    for name in FIXTURES {
        let d = fixture(name);
        let fg = FanGraph::new(&d.graph, d.sig, &TieDown::standard(0)).unwrap();
        let ab = fg.has_red_edges();
        let fans = collect(&fg, ab, None);
        let set: BTreeSet<FanDiagram> = fans.iter().cloned().collect();
        assert_eq!(set.len(), fans.len(), "{name}: duplicate fans");
        assert_eq!(set, brute_fans(&fg, ab), "{name}");
    }
}

#[test]
fn doubled_triangle_and_braced_cycle_counts() {
    let dt = fixture("doubled_triangle");
    let fg = FanGraph::new(&dt.graph, dt.sig, &TieDown::standard(0)).unwrap();
    assert_eq!(collect(&fg, false, None).len(), brute_fans(&fg, false).len());
    assert_eq!(collect(&fg, false, None).len(), 2);
    let bc = fixture("braced_cycle");
    let fg = FanGraph::new(&bc.graph, bc.sig, &TieDown::standard(0)).unwrap();
    assert_eq!(collect(&fg, false, None).len(), brute_fans(&fg, false).len());
}

#[test]
fn ab_fans_respect_red_bound_on_random_colorings() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let base = fixture("doubled_k4");
    let mut tested = 0;
    while tested < 25 {
        let mut g = BicoloredMultigraph::new(4).unwrap();
        for e in base.graph.edges() {
            let c = if rng.gen_bool(0.35) { Color::Red } else { Color::Black };
            g.add_edge(&e.id, e.tail, e.head, c).unwrap();
        }
        if crate::pebble::play(&g, base.sig).0.verdict != Verdict::Tight {
            continue;
        }
        let fg = FanGraph::new(&g, base.sig, &TieDown::standard(rng.gen_range(0..4))).unwrap();
        let fans: BTreeSet<FanDiagram> = collect(&fg, true, None).into_iter().collect();
        assert_eq!(fans, brute_fans(&fg, true));
        tested += 1;
    }
}

#[test]
fn random_tight_graphs_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let k = rng.gen_range(1..=3);
        let n = rng.gen_range(2..=(1 + 18 / k).min(6));
        let g = random_tight(&mut rng, n, k);
        let sig = FrameSignature::new(1, k - 1).unwrap();
        let td = TieDown::standard(rng.gen_range(0..n));
        let fg = FanGraph::new(&g, sig, &td).unwrap();
        let fans: BTreeSet<FanDiagram> = collect(&fg, false, None).into_iter().collect();
        assert_eq!(fans, brute_fans(&fg, false), "{g:?}");
    }
}

#[test]
fn limit_and_early_stop() {
    let d = fixture("block_chain");
    let fg = FanGraph::new(&d.graph, d.sig, &TieDown::standard(0)).unwrap();
    assert_eq!(collect(&fg, false, Some(5)).len(), 5);
    let mut seen = 0;
    let n = enumerate_fans(&fg, seed_fan(&fg).unwrap(), None, &mut |_| {
        seen += 1;
        seen < 3
    })
    .unwrap();
    assert_eq!((n, seen), (3, 3));
}

#[test]
fn invalid_seed_is_rejected() {
    let d = fixture("doubled_triangle");
    let fg = FanGraph::new(&d.graph, d.sig, &TieDown::standard(0)).unwrap();
    let mut seed = seed_fan(&fg).unwrap();
    seed.out_of[0] = fg.rows[0].other(seed.out_of[0]);
    assert!(matches!(enumerate_fans(&fg, seed, None, &mut |_| true), Err(Error::InvalidFan(_))));
}

#[test]
fn bracket_polynomial_equals_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for name in FIXTURES {
        let d = fixture(name);
        let td = TieDown::standard(0);
        let bp = pure_condition_bracket(&d.graph, d.sig, &td).unwrap();
        let m = d.graph.edge_count();
        assert!(bp.is_multilinear_in(&(0..m).collect::<Vec<_>>()), "{name}");
        for _ in 0..20 {
            let l = random_labeling(&d.graph, d.sig, &mut rng);
            assert_eq!(bp.evaluate(&l).unwrap(), pure_condition_value(&d.graph, d.sig, &l, &td).unwrap(), "{name}");
        }
    }
}

#[test]
fn generalized_tie_down_keeps_loops_in_brackets() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let d = fixture("doubled_triangle");
    let loops = (0..3).map(|i| TieLoop { id: format!("t{i}"), vertex: i, color: Color::Black }).collect();
    let td = TieDown::Generalized { loops };
    let bp = pure_condition_bracket(&d.graph, d.sig, &td).unwrap();
    assert!(bp.is_multilinear_in(&(0..9).collect::<Vec<_>>()));
    for _ in 0..10 {
        let mut l = random_labeling(&d.graph, d.sig, &mut rng);
        for i in 0..3 {
            l.insert(&format!("t{i}"), (0..3).map(|_| rat(rng.gen_range(-4..=4))).collect());
        }
        assert_eq!(bp.evaluate(&l).unwrap(), pure_condition_value(&d.graph, d.sig, &l, &td).unwrap());
    }
}

#[test]
fn random_tight_brackets_equal_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..25 {
        let k = rng.gen_range(2..=3);
        let n = rng.gen_range(2..=4);
        let g = random_tight(&mut rng, n, k);
        let sig = FrameSignature::new(1, k - 1).unwrap();
        let td = TieDown::standard(rng.gen_range(0..n));
        let bp = pure_condition_bracket(&g, sig, &td).unwrap();
        let l = random_labeling(&g, sig, &mut rng);
        assert_eq!(bp.evaluate(&l).unwrap(), pure_condition_value(&g, sig, &l, &td).unwrap());
    }
}

#[test]
fn doubled_triangle_vanishes_at_parallel_position() {
    let d = fixture("doubled_triangle");
    let bp = pure_condition_bracket(&d.graph, d.sig, &TieDown::standard(0)).unwrap();
    assert!(bp.evaluate(&embedding("doubled_triangle_parallel")).unwrap().is_zero());
    assert!(!bp.evaluate(&embedding("doubled_triangle_generic")).unwrap().is_zero());
}

#[test]
fn not_tight_is_an_error() {
    let d = fixture("doubled_triangle");
    let sub = d.graph.edge_subgraph(&[0, 1, 2, 3, 4]);
    assert!(matches!(pure_condition_bracket(&sub, d.sig, &TieDown::standard(0)), Err(Error::NotTight(_))));
}

#[test]
fn text_form_round_trips() {
    let d = fixture("braced_cycle");
    let bp = pure_condition_bracket(&d.graph, d.sig, &TieDown::standard(0)).unwrap();
    let text = bp.to_string();
    let back = BracketPolynomial::parse(&text, 3, &bp.names).unwrap();
    assert_eq!(back.sign_relative_to(&bp), Some(1));
    assert_eq!(bp.negated().sign_relative_to(&bp), Some(-1));
    // a shuffled bracket carries its sign
    let p = BracketPolynomial::parse("+[b a c]", 3, &["a".into(), "b".into(), "c".into()]).unwrap();
    assert_eq!(p.to_string(), "-[a b c]");
    let mut renamed = bp.names.clone();
    renamed.reverse();
    let q = BracketPolynomial::parse(&text, 3, &bp.names).unwrap().renamed(&renamed).unwrap();
    assert_eq!(bp.sign_relative_to(&q), Some(1));
    assert!(BracketPolynomial::parse("+[a b]", 3, &bp.names).is_err());
}

#[test]
fn block_sign_matches_integer_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..300 {
        let n = rng.gen_range(1..=5);
        let rows: Vec<(usize, usize)> = (0..n)
            .map(|_| {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if rng.gen_bool(0.3) {
                    (a, a)
                } else {
                    (a.min(b), a.max(b))
                }
            })
            .collect();
        let dense: Vec<Vec<Rational>> = rows
            .iter()
            .map(|&(u, v)| {
                let mut r = vec![rat(0); n];
                r[u] += rat(1);
                if u != v {
                    r[v] -= rat(1);
                }
                r
            })
            .collect();
        assert_eq!(rat(block_sign(n, &rows) as i64), linalg::determinant(&dense).unwrap(), "{rows:?}");
    }
}

#[test]
fn tree_expansion_equals_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for name in FIXTURES {
        let d = fixture(name);
        let td = TieDown::standard(0);
        let ls: Vec<EdgeLabeling> = (0..8).map(|_| random_labeling(&d.graph, d.sig, &mut rng)).collect();
        let vals = tree_decomposition_expansion_many(&d.graph, d.sig, &td, &ls).unwrap();
        for (l, v) in ls.iter().zip(vals) {
            assert_eq!(v, pure_condition_value(&d.graph, d.sig, l, &td).unwrap(), "{name}");
        }
        assert!(count_tree_decompositions(&d.graph, d.sig, &td).unwrap() > 0);
    }
}

#[test]
fn tree_expansion_handles_large_entries() {
    let d = fixture("doubled_triangle");
    let mut l = EdgeLabeling::new();
    let big = rat(10).pow(30);
    for (i, e) in d.graph.edges().iter().enumerate() {
        l.insert(&e.id, (0..3).map(|c| &big * rat((i * 3 + c) as i64 % 7 + 1) + rat(c as i64)).collect());
    }
    let td = TieDown::standard(0);
    assert_eq!(
        tree_decomposition_expansion(&d.graph, d.sig, &td, &l).unwrap(),
        pure_condition_value(&d.graph, d.sig, &l, &td).unwrap()
    );
}

#[test]
fn tree_expansion_size_limit() {
    let mut g = BicoloredMultigraph::new(9).unwrap();
    for v in 1..9 {
        g.add_edge(&format!("e{v}"), 0, v, Color::Black).unwrap();
    }
    let sig = FrameSignature::new(1, 0).unwrap();
    assert_eq!(play_uncolored(&g, 1).unwrap().0.verdict, Verdict::Tight);
    assert!(matches!(count_tree_decompositions(&g, sig, &TieDown::standard(0)), Err(Error::SizeLimit(_))));
}

proptest::proptest! {
    #[test]
    fn fan_monomials_are_distinct(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=3);
        let n = rng.gen_range(2..=4);
        let g = random_tight(&mut rng, n, k);
        let sig = FrameSignature::new(1, k - 1).unwrap();
        let fg = FanGraph::new(&g, sig, &TieDown::standard(0)).unwrap();
        let fans = collect(&fg, false, None);
        let monomials: BTreeSet<Vec<Vec<usize>>> = fans.iter().map(|f| fan_to_monomial(f, &fg).brackets).collect();
        proptest::prop_assert_eq!(monomials.len(), fans.len());
        for f in &fans {
            proptest::prop_assert!(f.validate(&fg, false).is_ok());
        }
    }
}
