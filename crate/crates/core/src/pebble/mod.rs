//! Pebble games for (k,l)-sparsity and [a,b]-sparsity.
//!
//! A game is a stack of single-color layers. Each layer is an ordinary (k_L, l_L) pebble game on
//! the edges it covers. The colored [a,b] game has an aqua layer (a pebbles per vertex) that may
//! take any edge and a black layer (b pebbles per vertex) that takes black edges only; an edge that
//! neither layer accepts directly is placed by moving black edges between layers along a shortest
//! exchange path.

mod oracle;

pub use oracle::{count_sparse_oracle, fundamental_circuit_oracle, sparsity_oracle, sparsity_oracle_with};

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{BicoloredMultigraph, Color, FrameSignature, TieDown};

pub const AQUA: usize = 0;
pub const BLACK: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Tight,
    Sparse,
    DependentContainsSpanningTight,
    Dependent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Tight => "tight",
            Verdict::Sparse => "sparse",
            Verdict::DependentContainsSpanningTight => "dependent_contains_spanning_tight",
            Verdict::Dependent => "dependent",
        }
    }

    pub fn is_independent(self) -> bool {
        matches!(self, Verdict::Tight | Verdict::Sparse)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityVerdict {
    pub verdict: Verdict,
    /// Rejected edges, as indices into the played edge list.
    pub rejected: Vec<usize>,
    /// Free pebbles per layer.
    pub free: Vec<usize>,
}

/// State transitions reported to an observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Add { edge: usize, layer: usize },
    Reverse { edge: usize, layer: usize },
    /// A black edge leaves one layer on its way to another (swap/flip family).
    Release { edge: usize, layer: usize },
}

pub type Observer = Box<dyn FnMut(&PebbleGame, Move)>;

#[derive(Debug, Clone)]
struct Layer {
    k: usize,
    l: usize,
    free: Vec<usize>,
    /// out-edges per vertex, sorted by edge index
    out: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy)]
struct EdgeSlot {
    u: usize,
    v: usize,
    color: Color,
}

/// Mutable pebble-game configuration.
pub struct PebbleGame {
    n: usize,
    layers: Vec<Layer>,
    edges: Vec<EdgeSlot>,
    /// current tail of each covered edge
    tail: Vec<usize>,
    /// covering layer of each edge, `None` if rejected or not yet played
    cover: Vec<Option<usize>>,
    stamp: Vec<u32>,
    epoch: u32,
    components: Option<Vec<usize>>,
    observer: Option<Observer>,
    audit: bool,
}

impl std::fmt::Debug for PebbleGame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PebbleGame")
            .field("n", &self.n)
            .field("layers", &self.layers)
            .field("tail", &self.tail)
            .field("cover", &self.cover)
            .finish()
    }
}

const VIRTUAL: usize = usize::MAX;

impl PebbleGame {
    /// Game with the given (k, l) per layer; layer 0 accepts red edges.
    pub fn with_layers(n: usize, params: &[(usize, usize)]) -> Self {
        PebbleGame {
            n,
            layers: params
                .iter()
                .map(|&(k, l)| Layer { k, l, free: vec![k; n], out: vec![Vec::new(); n] })
                .collect(),
            edges: Vec::new(),
            tail: Vec::new(),
            cover: Vec::new(),
            stamp: vec![0; n],
            epoch: 0,
            components: None,
            observer: None,
            audit: false,
        }
    }

    /// [a,b] game deciding the sparsity underlying generic rigidity (l = a, b per color).
    pub fn colored(n: usize, sig: FrameSignature) -> Self {
        Self::with_layers(n, &[(sig.a, sig.a), (sig.b, sig.b)])
    }

    /// [a,b] game with l = 0 per color, for graphs carrying their tie-down loops.
    pub fn colored_tied(n: usize, sig: FrameSignature) -> Self {
        Self::with_layers(n, &[(sig.a, 0), (sig.b, 0)])
    }

    pub fn uncolored(n: usize, k: usize, l: usize) -> Self {
        Self::with_layers(n, &[(k, l)])
    }

    /// Rigid-component tracking for single-layer games with l = k: edges inside a known tight
    /// component are rejected without a search.
    pub fn enable_components(&mut self) {
        if self.layers.len() == 1 && self.layers[0].k == self.layers[0].l {
            self.components = Some((0..self.n).collect());
        }
    }

    /// Check every invariant after each move (exhaustive over vertex subsets; small graphs only).
    pub fn set_audit(&mut self, on: bool) {
        self.audit = on;
    }

    pub fn set_observer(&mut self, obs: Option<Observer>) {
        self.observer = obs;
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn free(&self, layer: usize, v: usize) -> usize {
        self.layers[layer].free[v]
    }

    pub fn layer_params(&self, layer: usize) -> (usize, usize) {
        (self.layers[layer].k, self.layers[layer].l)
    }

    pub fn total_free(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.free.iter().sum()).collect()
    }

    /// Covering layer of an edge, or `None` when rejected.
    pub fn cover(&self, e: usize) -> Option<usize> {
        self.cover[e]
    }

    /// Current orientation (tail, head) of a covered edge.
    pub fn orientation(&self, e: usize) -> Option<(usize, usize)> {
        self.cover[e].map(|_| {
            let s = self.edges[e];
            let t = self.tail[e];
            (t, if t == s.u { s.v } else { s.u })
        })
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize, Color) {
        let s = self.edges[e];
        (s.u, s.v, s.color)
    }

    pub fn out_edges(&self, layer: usize, v: usize) -> &[usize] {
        &self.layers[layer].out[v]
    }

    fn allowed_layers(&self, color: Color) -> &'static [usize] {
        if self.layers.len() == 1 {
            &[0]
        } else if color == Color::Red {
            &[AQUA]
        } else {
            &[BLACK, AQUA]
        }
    }

    fn notify(&mut self, mv: Move) {
        if let Some(mut obs) = self.observer.take() {
            obs(self, mv);
            self.observer = Some(obs);
        }
        if self.audit {
            if let Err(msg) = self.check_invariants() {
                panic!("pebble invariant broken after {mv:?}: {msg}");
            }
        }
    }

    fn head_of(&self, e: usize) -> usize {
        let s = self.edges[e];
        if self.tail[e] == s.u {
            s.v
        } else {
            s.u
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    fn attach(&mut self, layer: usize, e: usize, tail: usize) {
        let out = &mut self.layers[layer].out[tail];
        let pos = out.partition_point(|&x| x < e);
        out.insert(pos, e);
        self.tail[e] = tail;
    }

    fn detach(&mut self, layer: usize, e: usize) {
        let t = self.tail[e];
        let out = &mut self.layers[layer].out[t];
        let pos = out.binary_search(&e).expect("edge in out list");
        out.remove(pos);
    }

    /// Moves one pebble to `v` along a path of out-edges, never taking pebbles from `keep`.
    fn fetch(&mut self, layer: usize, v: usize, keep: [usize; 2]) -> bool {
        let ep = self.next_epoch();
        self.stamp[v] = ep;
        // DFS stack of (vertex, next out-edge position); parent edge recorded per frame
        let mut stack: Vec<(usize, usize, usize)> = vec![(v, 0, VIRTUAL)];
        while let Some(&mut (x, ref mut pos, _)) = stack.last_mut() {
            let out = &self.layers[layer].out[x];
            if *pos >= out.len() {
                stack.pop();
                continue;
            }
            let e = out[*pos];
            *pos += 1;
            let y = self.head_of(e);
            if self.stamp[y] == ep {
                continue;
            }
            self.stamp[y] = ep;
            if self.layers[layer].free[y] > 0 && !keep.contains(&y) {
                // reverse the path v -> ... -> x -> y one edge at a time, starting at y
                let path: Vec<usize> = stack.iter().skip(1).map(|f| f.2).chain(std::iter::once(e)).collect();
                for &pe in path.iter().rev() {
                    let (t, h) = (self.tail[pe], self.head_of(pe));
                    self.layers[layer].free[h] -= 1;
                    self.layers[layer].free[t] += 1;
                    self.detach(layer, pe);
                    self.attach(layer, pe, h);
                    self.notify(Move::Reverse { edge: pe, layer });
                }
                return true;
            }
            stack.push((y, 0, e));
        }
        false
    }

    /// Gathers `need` pebbles on {i, j}: i is filled first, then j.
    fn collect(&mut self, layer: usize, i: usize, j: usize, need: usize) -> bool {
        let k = self.layers[layer].k;
        if i == j {
            if need > k {
                return false;
            }
            while self.layers[layer].free[i] < need {
                if !self.fetch(layer, i, [i, i]) {
                    return false;
                }
            }
            return true;
        }
        if need > 2 * k {
            return false;
        }
        let have = |g: &Self| g.layers[layer].free[i] + g.layers[layer].free[j];
        while have(self) < need && self.layers[layer].free[i] < k {
            if !self.fetch(layer, i, [i, j]) {
                break;
            }
        }
        while have(self) < need && self.layers[layer].free[j] < k {
            if !self.fetch(layer, j, [i, j]) {
                break;
            }
        }
        have(self) >= need
    }

    /// Vertices reachable from {i, j} along out-edges of `layer`.
    fn reach(&mut self, layer: usize, i: usize, j: usize) -> Vec<usize> {
        let ep = self.next_epoch();
        let mut seen = vec![i];
        self.stamp[i] = ep;
        if self.stamp[j] != ep {
            self.stamp[j] = ep;
            seen.push(j);
        }
        let mut q = 0;
        while q < seen.len() {
            let x = seen[q];
            q += 1;
            for idx in 0..self.layers[layer].out[x].len() {
                let y = self.head_of(self.layers[layer].out[x][idx]);
                if self.stamp[y] != ep {
                    self.stamp[y] = ep;
                    seen.push(y);
                }
            }
        }
        seen
    }

    /// Edges of `layer` spanned by the reach set of {i, j}: the fundamental circuit (minus the new
    /// edge) in that layer's count matroid after a failed collection.
    fn layer_circuit(&mut self, layer: usize, i: usize, j: usize) -> Vec<usize> {
        let lay = &self.layers[layer];
        if (i == j && lay.l + 1 > lay.k) || lay.l + 1 > 2 * lay.k {
            // the new edge alone is dependent in this layer
            return Vec::new();
        }
        let r = self.reach(layer, i, j);
        let mut c: Vec<usize> = r.iter().flat_map(|&x| self.layers[layer].out[x].iter().copied()).collect();
        c.sort_unstable();
        c
    }

    fn place(&mut self, layer: usize, e: usize) {
        let EdgeSlot { u, v, .. } = self.edges[e];
        let t = if self.layers[layer].free[u] > 0 { u } else { v };
        self.layers[layer].free[t] -= 1;
        self.cover[e] = Some(layer);
        self.attach(layer, e, t);
        self.notify(Move::Add { edge: e, layer });
    }

    fn release(&mut self, e: usize) {
        let layer = self.cover[e].expect("covered edge");
        self.detach(layer, e);
        self.layers[layer].free[self.tail[e]] += 1;
        self.cover[e] = None;
        self.notify(Move::Release { edge: e, layer });
    }

    fn try_layer(&mut self, layer: usize, u: usize, v: usize) -> bool {
        let need = self.layers[layer].l + 1;
        self.collect(layer, u, v, need)
    }

    /// Registers an edge without playing it.
    fn push_edge(&mut self, u: usize, v: usize, color: Color) -> usize {
        assert!(u < self.n && v < self.n, "vertex out of range");
        self.edges.push(EdgeSlot { u: u.min(v), v: u.max(v), color });
        self.tail.push(u.min(v));
        self.cover.push(None);
        self.edges.len() - 1
    }

    /// Plays one edge; returns true if accepted.
    pub fn insert(&mut self, u: usize, v: usize, color: Color) -> bool {
        let e = self.push_edge(u, v, color);
        let (u, v) = (self.edges[e].u, self.edges[e].v);
        if let Some(comp) = &mut self.components {
            if u == v || find(comp, u) == find(comp, v) {
                return false;
            }
        }
        for &layer in self.allowed_layers(color) {
            if self.try_layer(layer, u, v) {
                self.place(layer, e);
                self.update_components(u, v);
                return true;
            }
        }
        if self.layers.len() == 1 {
            return false;
        }
        match self.exchange_search(u, v, color) {
            Ok(path) => {
                self.apply_path(e, &path);
                true
            }
            Err(_) => false,
        }
    }

    fn update_components(&mut self, u: usize, v: usize) {
        if self.components.is_none() || u == v {
            return;
        }
        let l = self.layers[0].l;
        if !self.collect(0, u, v, l) {
            return;
        }
        let r = self.reach(0, u, v);
        let extra: usize = r.iter().filter(|&&x| x != u && x != v).map(|&x| self.layers[0].free[x]).sum();
        if extra == 0 && self.layers[0].free[u] + self.layers[0].free[v] == l {
            let comp = self.components.as_mut().unwrap();
            let root = find(comp, u);
            for x in r {
                let rx = find(comp, x);
                comp[rx] = root;
            }
        }
    }

    /// Breadth-first search for a shortest exchange path for a new element (u, v, color).
    /// Ok(path): list of (element, target layer), starting with the new element (`VIRTUAL`).
    /// Err(visited): elements reached, which together with the new element form its circuit.
    fn exchange_search(&mut self, u: usize, v: usize, color: Color) -> std::result::Result<Vec<(usize, usize)>, Vec<usize>> {
        // node: (element, target layer, parent node index)
        let mut nodes: Vec<(usize, usize, usize)> = Vec::new();
        let mut visited = vec![false; self.edges.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for &t in self.allowed_layers(color) {
            nodes.push((VIRTUAL, t, VIRTUAL));
            queue.push_back(nodes.len() - 1);
        }
        while let Some(ni) = queue.pop_front() {
            let (x, t, _) = nodes[ni];
            let (xu, xv) = if x == VIRTUAL { (u, v) } else { (self.edges[x].u, self.edges[x].v) };
            // repeat the failed collection so the reach set holds no spare pebbles
            if self.try_layer(t, xu, xv) {
                return Ok(vec![(x, t)]);
            }
            let circuit = self.layer_circuit(t, xu, xv);
            for y in circuit {
                if visited[y] {
                    continue;
                }
                visited[y] = true;
                order.push(y);
                for &t2 in self.allowed_layers(self.edges[y].color) {
                    if Some(t2) == self.cover[y] {
                        continue;
                    }
                    nodes.push((y, t2, ni));
                    let yi = nodes.len() - 1;
                    if self.try_layer(t2, self.edges[y].u, self.edges[y].v) {
                        let mut path = Vec::new();
                        let mut c = yi;
                        while c != VIRTUAL {
                            path.push((nodes[c].0, nodes[c].1));
                            c = nodes[c].2;
                        }
                        path.reverse();
                        return Ok(path);
                    }
                    queue.push_back(yi);
                }
            }
        }
        Err(order)
    }

    fn apply_path(&mut self, e: usize, path: &[(usize, usize)]) {
        for &(x, _) in &path[1..] {
            self.release(x);
        }
        for &(x, t) in path {
            let x = if x == VIRTUAL { e } else { x };
            let (xu, xv) = (self.edges[x].u, self.edges[x].v);
            let ok = self.try_layer(t, xu, xv);
            assert!(ok, "exchange path step failed for edge {x}");
            self.place(t, x);
        }
    }

    /// Circuit formed by a hypothetical new edge with the current independent set, or `None`
    /// when the edge would be accepted. Leaves the covered set unchanged.
    pub fn circuit_with(&mut self, u: usize, v: usize, color: Color) -> Option<Vec<usize>> {
        let (u, v) = (u.min(v), u.max(v));
        if self.layers.len() == 1 {
            if self.try_layer(0, u, v) {
                return None;
            }
            return Some(self.layer_circuit(0, u, v));
        }
        for &layer in self.allowed_layers(color) {
            if self.try_layer(layer, u, v) {
                return None;
            }
        }
        match self.exchange_search(u, v, color) {
            Ok(_) => None,
            Err(mut c) => {
                c.sort_unstable();
                Some(c)
            }
        }
    }

    /// Checks the per-vertex pebble accounting, color restrictions and per-layer sparsity for
    /// every vertex subset (n <= 12).
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (li, layer) in self.layers.iter().enumerate() {
            for v in 0..self.n {
                let out = layer.out[v].len();
                if layer.free[v] + out != layer.k {
                    return Err(format!("layer {li} vertex {v}: {} free + {out} out != {}", layer.free[v], layer.k));
                }
                for &e in &layer.out[v] {
                    if self.cover[e] != Some(li) || self.tail[e] != v {
                        return Err(format!("edge {e} bookkeeping mismatch"));
                    }
                    if li != AQUA && self.edges[e].color == Color::Red {
                        return Err(format!("red edge {e} covered by black pebble"));
                    }
                }
            }
        }
        if self.n > 12 {
            return Ok(());
        }
        for mask in 1u32..(1 << self.n) {
            let size = mask.count_ones() as usize;
            for (li, layer) in self.layers.iter().enumerate() {
                let (mut p, mut span, mut out) = (0, 0, 0);
                for v in (0..self.n).filter(|v| mask >> v & 1 == 1) {
                    p += layer.free[v];
                    for &e in &layer.out[v] {
                        if mask >> self.head_of(e) & 1 == 1 {
                            span += 1;
                        } else {
                            out += 1;
                        }
                    }
                }
                if p + span + out != layer.k * size {
                    return Err(format!("layer {li} subset {mask:b}: count identity fails"));
                }
                if span > 0 && span + layer.l > layer.k * size {
                    return Err(format!("layer {li} subset {mask:b}: {span} spanned edges exceed bound"));
                }
                if span > 0 && p + out < layer.l {
                    return Err(format!("layer {li} subset {mask:b}: fewer than l pebbles and out-edges"));
                }
            }
        }
        Ok(())
    }

    fn verdict(&self, rejected: Vec<usize>) -> SparsityVerdict {
        let free = self.total_free();
        let spare: usize = free.iter().sum();
        let need: usize = self.layers.iter().map(|l| l.l).sum();
        let verdict = match (rejected.is_empty(), spare == need) {
            (true, true) => Verdict::Tight,
            (true, false) => Verdict::Sparse,
            (false, true) => Verdict::DependentContainsSpanningTight,
            (false, false) => Verdict::Dependent,
        };
        SparsityVerdict { verdict, rejected, free }
    }

    /// Plays every edge of `g` in base order.
    pub fn play_graph(&mut self, g: &BicoloredMultigraph) -> SparsityVerdict {
        let mut rejected = Vec::new();
        for (i, e) in g.edges().iter().enumerate() {
            if !self.insert(e.tail, e.head, e.color) {
                rejected.push(i);
            }
        }
        self.verdict(rejected)
    }

    /// Verdict for the edges played so far.
    pub fn current_verdict(&self) -> SparsityVerdict {
        self.verdict((0..self.edges.len()).filter(|&e| self.cover[e].is_none()).collect())
    }

    /// Fundamental circuit of a rejected edge with respect to the current independent set.
    pub fn fundamental_circuit(&mut self, e: usize) -> Result<Vec<usize>> {
        if e >= self.edges.len() || self.cover[e].is_some() {
            return Err(Error::NotRejected(format!("#{e}")));
        }
        let EdgeSlot { u, v, color } = self.edges[e];
        self.circuit_with(u, v, color).ok_or_else(|| Error::NotRejected(format!("#{e}")))
    }
}

fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    let mut y = x;
    while p[y] != r {
        let nx = p[y];
        p[y] = r;
        y = nx;
    }
    r
}

/// [a,b] pebble game (l = a, b per color) on the edges of `g` in base order.
pub fn play(g: &BicoloredMultigraph, sig: FrameSignature) -> (SparsityVerdict, PebbleGame) {
    let mut game = PebbleGame::colored(g.vertex_count(), sig);
    let v = game.play_graph(g);
    (v, game)
}

/// Color-blind (k,k) pebble game.
pub fn play_uncolored(g: &BicoloredMultigraph, k: usize) -> Result<(SparsityVerdict, PebbleGame)> {
    play_counts(g, k, k)
}

/// Single-color (k,l) pebble game.
pub fn play_counts(g: &BicoloredMultigraph, k: usize, l: usize) -> Result<(SparsityVerdict, PebbleGame)> {
    if let Some(e) = g.edges().iter().find(|e| e.color == Color::Red) {
        return Err(Error::RedEdge(e.id.clone()));
    }
    let mut game = PebbleGame::uncolored(g.vertex_count(), k, l);
    let v = game.play_graph(g);
    Ok((v, game))
}

/// Colored game with l = 0 on `g` followed by its tie-down loops. Loop `i` has index
/// `g.edge_count() + i` in the game. Tight iff the tie-down is valid for a tight graph.
pub fn play_tied(g: &BicoloredMultigraph, sig: FrameSignature, tie_down: &TieDown) -> (SparsityVerdict, PebbleGame) {
    let mut game = if g.has_red() || sig.b == 0 {
        PebbleGame::colored_tied(g.vertex_count(), sig)
    } else {
        PebbleGame::uncolored(g.vertex_count(), sig.k(), 0)
    };
    let mut rejected = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        if !game.insert(e.tail, e.head, e.color) {
            rejected.push(i);
        }
    }
    for (i, l) in tie_down.loops(sig).iter().enumerate() {
        let color = if game.layer_count() == 1 { Color::Black } else { l.color };
        if !game.insert(l.vertex, l.vertex, color) {
            rejected.push(g.edge_count() + i);
        }
    }
    (game.verdict(rejected), game)
}

/// Sparsity check choosing the colored game when red edges are present and the color-blind
/// (k,k) game otherwise.
pub fn classify(g: &BicoloredMultigraph, sig: FrameSignature) -> (SparsityVerdict, PebbleGame) {
    if g.has_red() {
        play(g, sig)
    } else {
        play_uncolored(g, sig.k()).expect("no red edges")
    }
}

#[cfg(test)]
mod tests;
