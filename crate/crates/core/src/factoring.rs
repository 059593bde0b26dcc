//! Factor graphs of the pure condition.
//!
//! The body-and-bar path repeatedly finds (k,k+1)-circuits of a (k,k)-tight graph and contracts
//! them. The body-and-cad path then splits each factor that still has a proper colored circuit
//! H into two graphs: one keeps H's complement live, the other keeps H live. Edges that leave a
//! side become frozen rows on that side: a bar with the same endpoints whose label is the basis
//! vector e_c, c being the edge's coordinate in a looped tree decomposition of the factor.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{BicoloredMultigraph, Color, FrameSignature, TieDown};
use crate::linalg::{self, Rational};
use crate::pebble::{self, Verdict};
use crate::rigidity::{basis_vector, build_matrix, EdgeLabeling, RigidityMatrix, Row};

/// A removed edge kept as a constant bar row labelled e_coord.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrozenRow {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub coord: usize,
}

/// One factor: live edges (original ids), frozen rows and a tie-down.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    pub graph: BicoloredMultigraph,
    pub sig: FrameSignature,
    pub tie_down: TieDown,
    pub frozen: Vec<FrozenRow>,
    /// Original vertices merged into each factor vertex.
    pub vertices: Vec<Vec<usize>>,
    /// Coordinate of each live edge in a looped tree decomposition, once one was needed.
    coords: Option<Vec<usize>>,
}

impl FactorGraph {
    /// A plain graph with a standard tie-down at its first vertex.
    pub fn plain(graph: BicoloredMultigraph, sig: FrameSignature, vertices: Vec<Vec<usize>>) -> Self {
        FactorGraph { graph, sig, tie_down: TieDown::standard(0), frozen: Vec::new(), vertices, coords: None }
    }

    pub fn edge_ids(&self) -> Vec<String> {
        self.graph.edges().iter().map(|e| e.id.clone()).collect()
    }

    /// Tied-down matrix: live edges, tie-down loops, frozen rows.
    pub fn matrix(&self, labeling: &EdgeLabeling) -> Result<RigidityMatrix> {
        let mut m = build_matrix(&self.graph, self.sig, labeling, Some(&self.tie_down))?;
        for f in &self.frozen {
            m.rows.push(Row { id: f.id.clone(), tail: f.tail, head: f.head, label: basis_vector(self.sig.k(), f.coord) });
        }
        Ok(m)
    }

    /// Pure-condition value of this factor at the labeling restricted to its live edges.
    pub fn value(&self, labeling: &EdgeLabeling) -> Result<Rational> {
        self.matrix(labeling)?.determinant()
    }

    /// Irreducible when the circuit of a same-colored copy of every live edge contains all live
    /// edges. Plain graphs use the pebble game; graphs with frozen rows use generic rank.
    pub fn is_irreducible(&self) -> bool {
        self.proper_circuit().is_none()
    }

    /// First live edge (base order) whose copy has a proper circuit, with that circuit's live edges.
    fn proper_circuit(&self) -> Option<Vec<usize>> {
        let m = self.graph.edge_count();
        if self.frozen.is_empty() {
            let (_, mut game) = pebble::play(&self.graph, self.sig);
            self.graph.edges().iter().find_map(|e| {
                let c = game.circuit_with(e.tail, e.head, e.color)?;
                (c.len() < m).then_some(c)
            })
        } else {
            (0..m).find_map(|e| {
                let c = self.rank_circuit(e);
                (c.len() < m && !c.is_empty()).then_some(c)
            })
        }
    }

    /// Live edges in the linear circuit of a generic copy of edge `e` (untied rows).
    fn rank_circuit(&self, e: usize) -> Vec<usize> {
        let k = self.sig.k();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ e as u64);
        let mut label = |color: Color| -> Vec<Rational> {
            (0..k)
                .map(|c| {
                    if color == Color::Red && c >= self.sig.a && self.sig.b > 0 {
                        Rational::zero()
                    } else {
                        Rational::from_integer(rng.gen_range(-1_000_000i64..=1_000_000).into())
                    }
                })
                .collect()
        };
        let mut rows: Vec<Row> = self
            .graph
            .edges()
            .iter()
            .map(|ed| Row { id: ed.id.clone(), tail: ed.tail, head: ed.head, label: label(ed.color) })
            .collect();
        for f in &self.frozen {
            rows.push(Row { id: f.id.clone(), tail: f.tail, head: f.head, label: basis_vector(k, f.coord) });
        }
        let ed = self.graph.edge(e);
        rows.push(Row { id: String::new(), tail: ed.tail, head: ed.head, label: label(ed.color) });
        let dense = RigidityMatrix::from_rows(k, self.graph.vertex_count(), rows).dense();
        let null = linalg::left_null_space(&dense);
        let last = dense.len() - 1;
        match null.iter().find(|w| !w[last].is_zero()) {
            Some(w) => (0..self.graph.edge_count()).filter(|&i| !w[i].is_zero()).collect(),
            None => Vec::new(),
        }
    }

    /// Graph document of the live edges plus `frozen` rows and merged original vertices.
    pub fn to_json(&self) -> Value {
        let mut v = crate::io::graph_to_value(&self.graph, self.sig, Some(&self.tie_down));
        let frozen: Vec<Value> = self
            .frozen
            .iter()
            .map(|f| json!({"id": f.id, "tail": f.tail + 1, "head": f.head + 1, "coordinate": f.coord + 1}))
            .collect();
        let vertices: Vec<Vec<usize>> = self.vertices.iter().map(|g| g.iter().map(|v| v + 1).collect()).collect();
        v["frozen"] = json!(frozen);
        v["original_vertices"] = json!(vertices);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepKind {
    /// A (k,k+1)-circuit contracted to a vertex.
    Contract,
    /// A proper colored circuit split off with frozen rows.
    Split,
}

/// One recursion step: what was separated, at which depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub kind: StepKind,
    pub depth: usize,
    pub edges: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorDecomposition {
    pub factors: Vec<FactorGraph>,
    pub steps: Vec<Step>,
}

impl FactorDecomposition {
    pub fn product(&self, labeling: &EdgeLabeling) -> Result<Rational> {
        let mut p = Rational::from_integer(1.into());
        for f in &self.factors {
            p *= f.value(labeling)?;
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "factors": self.factors.iter().map(FactorGraph::to_json).collect::<Vec<_>>(),
            "steps": self.steps.iter().map(|s| json!({
                "kind": match s.kind { StepKind::Contract => "contract", StepKind::Split => "split" },
                "depth": s.depth,
                "edges": s.edges,
            })).collect::<Vec<_>>(),
        })
    }
}

fn require_tight(g: &BicoloredMultigraph, sig: FrameSignature) -> Result<()> {
    let (v, _) = pebble::classify(g, sig);
    if v.verdict != Verdict::Tight {
        return Err(Error::NotTight(v.verdict.as_str().into()));
    }
    Ok(())
}

/// Body-and-bar factoring of a (k,k)-tight graph by contracting (k,k+1)-circuits level by level.
/// Colors are ignored; factor graphs keep the original colors and `sig`.
pub fn factor_body_and_bar(g: &BicoloredMultigraph, sig: FrameSignature) -> Result<FactorDecomposition> {
    let k = sig.k();
    let (v, _) = pebble::play_uncolored(&g.uncolored(), k)?;
    if v.verdict != Verdict::Tight {
        return Err(Error::NotTight(v.verdict.as_str().into()));
    }
    let mut cur = g.clone();
    let mut groups: Vec<Vec<usize>> = (0..g.vertex_count()).map(|v| vec![v]).collect();
    let mut out = FactorDecomposition { factors: Vec::new(), steps: Vec::new() };
    let mut depth = 0;
    while cur.vertex_count() > 1 {
        let (sv, mut game) = pebble::play_counts(&cur.uncolored(), k, k + 1)?;
        let mut circuits: Vec<Vec<usize>> = Vec::new();
        for &e in &sv.rejected {
            let mut c = game.fundamental_circuit(e)?;
            c.push(e);
            c.sort_unstable();
            if !circuits.contains(&c) {
                circuits.push(c);
            }
        }
        // circuits are edge-disjoint; remember them by id across contractions
        let ids: Vec<Vec<String>> = circuits.iter().map(|c| c.iter().map(|&e| cur.edge(e).id.clone()).collect()).collect();
        for c in &circuits {
            let mut vs: Vec<usize> = c.iter().flat_map(|&e| [cur.edge(e).tail, cur.edge(e).head]).collect();
            vs.sort_unstable();
            vs.dedup();
            let (h, old) = cur.induced_subgraph(&vs)?;
            debug_assert_eq!(h.edge_count(), c.len());
            let vgroups = old.iter().map(|&v| groups[v].clone()).collect();
            out.factors.push(FactorGraph::plain(h, sig, vgroups));
        }
        for block in ids {
            let idx: Vec<usize> = block.iter().map(|id| cur.edge_index(id).expect("disjoint circuits survive")).collect();
            out.steps.push(Step { kind: StepKind::Contract, depth, edges: block });
            let (next, map) = cur.contract(&idx)?;
            let mut merged = vec![Vec::new(); next.vertex_count()];
            for (old, &new) in map.vertex_map.iter().enumerate() {
                merged[new].extend(groups[old].iter().copied());
            }
            for g in &mut merged {
                g.sort_unstable();
            }
            groups = merged;
            cur = next;
        }
        depth += 1;
    }
    Ok(out)
}

/// Coordinates of a looped tree decomposition of the tied-down factor: live edges and frozen
/// rows are spread over k forests on the vertices plus ground, standard loop i pinned to forest i,
/// red edges restricted to the first a forests. Matroid partition with shortest augmenting paths.
fn tree_coordinates(f: &FactorGraph) -> Result<Vec<usize>> {
    let n = f.graph.vertex_count();
    let k = f.sig.k();
    let ground = n;
    // elements: live edges, then frozen rows (pinned), then loops (pinned)
    struct El {
        u: usize,
        v: usize,
        pinned: Option<usize>,
        red: bool,
    }
    let mut els: Vec<El> = f
        .graph
        .edges()
        .iter()
        .map(|e| El { u: e.tail, v: e.head, pinned: None, red: e.color == Color::Red && f.sig.b > 0 })
        .collect();
    els.extend(f.frozen.iter().map(|r| El { u: r.tail, v: r.head, pinned: Some(r.coord), red: false }));
    let loops = f.tie_down.loops(f.sig);
    let mut loop_coord = vec![usize::MAX; loops.len()];
    if let TieDown::Standard { .. } = f.tie_down {
        for (i, c) in loop_coord.iter_mut().enumerate() {
            *c = i;
        }
    }
    for (i, l) in loops.iter().enumerate() {
        let pinned = (loop_coord[i] != usize::MAX).then_some(loop_coord[i]);
        els.push(El { u: l.vertex, v: ground, pinned, red: l.color == Color::Red && f.sig.b > 0 });
    }
    let mut forest: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut coord = vec![usize::MAX; els.len()];

    let path = |forest: &[usize], coord_els: &[El], s: usize, t: usize| -> Option<Vec<usize>> {
        // returns element ids on the forest path s..t, or None if disconnected
        if s == t {
            return Some(Vec::new());
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + 1];
        for &x in forest {
            let e = &coord_els[x];
            adj[e.u].push((e.v, x));
            adj[e.v].push((e.u, x));
        }
        let mut prev = vec![(usize::MAX, usize::MAX); n + 1];
        let mut seen = vec![false; n + 1];
        seen[s] = true;
        let mut q = std::collections::VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for &(y, el) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = (x, el);
                    q.push_back(y);
                }
            }
        }
        if !seen[t] {
            return None;
        }
        let mut out = Vec::new();
        let mut z = t;
        while z != s {
            out.push(prev[z].1);
            z = prev[z].0;
        }
        Some(out)
    };

    let order: Vec<usize> = {
        let mut o: Vec<usize> = (0..els.len()).filter(|&i| els[i].pinned.is_some()).collect();
        o.extend((0..els.len()).filter(|&i| els[i].pinned.is_none()));
        o
    };
    for x in order {
        if let Some(c) = els[x].pinned {
            if path(&forest[c], &els, els[x].u, els[x].v).is_some() {
                return Err(Error::NotTight("pinned rows are dependent".into()));
            }
            forest[c].push(x);
            coord[x] = c;
            continue;
        }
        // BFS over elements; label[y] = (predecessor element, forest y must leave for it)
        let mut label: Vec<Option<(usize, usize)>> = vec![None; els.len()];
        let mut q = std::collections::VecDeque::from([x]);
        let mut visited = vec![false; els.len()];
        visited[x] = true;
        let mut done = None;
        'bfs: while let Some(y) = q.pop_front() {
            for c in 0..k {
                if c == coord[y] || (els[y].red && c >= f.sig.a) {
                    continue;
                }
                match path(&forest[c], &els, els[y].u, els[y].v) {
                    None => {
                        done = Some((y, c));
                        break 'bfs;
                    }
                    Some(cycle) => {
                        for z in cycle {
                            if !visited[z] && els[z].pinned.is_none() {
                                visited[z] = true;
                                label[z] = Some((y, c));
                                q.push_back(z);
                            }
                        }
                    }
                }
            }
        }
        let Some((mut y, mut c)) = done else {
            return Err(Error::NotTight("no looped tree decomposition".into()));
        };
        loop {
            if coord[y] != usize::MAX {
                let old = coord[y];
                forest[old].retain(|&z| z != y);
            }
            forest[c].push(y);
            coord[y] = c;
            match label[y] {
                // y left forest `c2` so that `p` can enter it
                Some(_) if y == x => break,
                Some((p, c2)) => {
                    y = p;
                    c = c2;
                }
                None => break,
            }
        }
    }
    Ok(coord[..f.graph.edge_count()].to_vec())
}

fn split_side(f: &FactorGraph, coords: &[usize], keep: &[bool]) -> FactorGraph {
    let keep_idx: Vec<usize> = (0..keep.len()).filter(|&i| keep[i]).collect();
    let mut frozen = f.frozen.clone();
    for (i, e) in f.graph.edges().iter().enumerate() {
        if !keep[i] {
            frozen.push(FrozenRow { id: e.id.clone(), tail: e.tail, head: e.head, coord: coords[i] });
        }
    }
    FactorGraph {
        graph: f.graph.edge_subgraph(&keep_idx),
        sig: f.sig,
        tie_down: f.tie_down.clone(),
        frozen,
        vertices: f.vertices.clone(),
        coords: Some(keep_idx.iter().map(|&i| coords[i]).collect()),
    }
}

/// Body-and-cad splitting of one factor until every piece is irreducible.
pub fn factor_body_and_cad(f: &FactorGraph) -> Result<FactorDecomposition> {
    let mut out = FactorDecomposition { factors: Vec::new(), steps: Vec::new() };
    split_into(f.clone(), 0, &mut out)?;
    Ok(out)
}

fn split_into(mut f: FactorGraph, depth: usize, out: &mut FactorDecomposition) -> Result<()> {
    let Some(h) = f.proper_circuit() else {
        out.factors.push(f);
        return Ok(());
    };
    let coords = match &f.coords {
        Some(c) => c.clone(),
        None => {
            let c = tree_coordinates(&f)?;
            f.coords = Some(c.clone());
            c
        }
    };
    let m = f.graph.edge_count();
    let mut in_h = vec![false; m];
    for &e in &h {
        in_h[e] = true;
    }
    out.steps.push(Step { kind: StepKind::Split, depth, edges: h.iter().map(|&e| f.graph.edge(e).id.clone()).collect() });
    let rest: Vec<bool> = in_h.iter().map(|&b| !b).collect();
    split_into(split_side(&f, &coords, &rest), depth + 1, out)?;
    split_into(split_side(&f, &coords, &in_h), depth + 1, out)
}

/// Full decomposition: body-and-bar contraction, then body-and-cad splitting of colored factors.
pub fn factor(g: &BicoloredMultigraph, sig: FrameSignature) -> Result<FactorDecomposition> {
    require_tight(g, sig)?;
    let bar = factor_body_and_bar(g, sig)?;
    let mut out = FactorDecomposition { factors: Vec::new(), steps: bar.steps };
    let depth = out.steps.iter().map(|s| s.depth + 1).max().unwrap_or(0);
    for f in bar.factors {
        if f.graph.has_red() && sig.b > 0 {
            let sub = factor_body_and_cad(&f)?;
            out.factors.extend(sub.factors);
            out.steps.extend(sub.steps.into_iter().map(|s| Step { depth: s.depth + depth, ..s }));
        } else {
            out.factors.push(f);
        }
    }
    Ok(out)
}

/// True iff every same-colored edge copy has a circuit spanning all edges of the tight graph.
pub fn is_irreducible(g: &BicoloredMultigraph, sig: FrameSignature) -> bool {
    let (v, mut game) = pebble::play(g, sig);
    if v.verdict != Verdict::Tight {
        return false;
    }
    let m = g.edge_count();
    g.edges().iter().all(|e| game.circuit_with(e.tail, e.head, e.color).is_some_and(|c| c.len() == m))
}

#[cfg(test)]
mod tests;
