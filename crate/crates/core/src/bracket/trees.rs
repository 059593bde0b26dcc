//! Expansion of det M_T as a signed sum over tree decompositions.
//!
//! Assign every row a coordinate c; the rows of each coordinate must form a spanning tree of
//! the vertices plus a ground node (loops attach to ground). Each such assignment contributes
//! one permutation term per row: the row matched to the vertex it hangs from, read off by
//! orienting each tree towards ground.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::FanGraph;
use crate::error::{Error, Result};
use crate::graph::{BicoloredMultigraph, Color, FrameSignature, TieDown};
use crate::linalg::{self, Rational};
use crate::rigidity::{build_matrix, EdgeLabeling};

pub const MAX_TREE_VERTICES: usize = 8;

fn parity(seq: &[usize]) -> i32 {
    let mut s = 1;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                s = -s;
            }
        }
    }
    s
}

/// For one grounded tree, the vertex each row hangs from (None if the rows are not a tree).
fn children(n: usize, rows: &[(usize, usize)]) -> Option<Vec<usize>> {
    if rows.len() != n {
        return None;
    }
    let ground = n;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + 1];
    for (i, &(u, v)) in rows.iter().enumerate() {
        let w = if u == v { ground } else { v };
        adj[u].push((w, i));
        adj[w].push((u, i));
    }
    let mut child = vec![usize::MAX; rows.len()];
    let mut seen = vec![false; n + 1];
    seen[ground] = true;
    let mut stack = vec![ground];
    while let Some(x) = stack.pop() {
        for &(y, i) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                child[i] = y;
                stack.push(y);
            }
        }
    }
    if seen.iter().all(|&s| s) && child.iter().all(|&c| c != usize::MAX) {
        Some(child)
    } else {
        None
    }
}

/// Determinant of the signed incidence block: rows `(u, v)` with u <= v put +1 at u and -1 at v,
/// loops put +1 at u. Nonzero (and then +-1) exactly for spanning trees of vertices + ground.
pub fn block_sign(n: usize, rows: &[(usize, usize)]) -> i32 {
    let Some(child) = children(n, rows) else { return 0 };
    let flips = rows.iter().zip(&child).filter(|(&(u, v), &c)| u != v && c == v).count();
    let s = if flips % 2 == 0 { 1 } else { -1 };
    s * parity(&child)
}

struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
    log: Vec<(usize, usize)>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect(), size: vec![1; n], log: Vec::new() }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.log.push((a, b));
        true
    }

    fn undo(&mut self) {
        let (a, b) = self.log.pop().expect("nothing to undo");
        self.parent[b] = b;
        self.size[a] -= self.size[b];
    }
}

struct Search<'a> {
    fg: &'a FanGraph,
    allowed: &'a dyn Fn(usize, usize) -> bool,
    dsu: Vec<Dsu>,
    coord: Vec<usize>,
    count: usize,
}

impl Search<'_> {
    fn leaf_sign(&self) -> i32 {
        let (n, k) = (self.fg.n, self.fg.k());
        let mut col = vec![0; self.fg.rows.len()];
        let mut sign = 1;
        for c in 0..k {
            let idx: Vec<usize> = (0..self.fg.rows.len()).filter(|&r| self.coord[r] == c).collect();
            let ends: Vec<(usize, usize)> = idx.iter().map(|&r| (self.fg.rows[r].u, self.fg.rows[r].v)).collect();
            let child = children(n, &ends).expect("leaf classes are trees");
            for ((&r, &(u, v)), &x) in idx.iter().zip(&ends).zip(&child) {
                col[r] = x * k + c;
                if u != v && x == v {
                    sign = -sign;
                }
            }
        }
        sign * parity(&col)
    }

    fn run(&mut self, r: usize, cb: &mut dyn FnMut(&[usize], i32)) {
        if r == self.fg.rows.len() {
            self.count += 1;
            let s = self.leaf_sign();
            cb(&self.coord, s);
            return;
        }
        let row = &self.fg.rows[r];
        let (u, w) = if row.is_loop() { (row.u, self.fg.n) } else { (row.u, row.v) };
        for c in 0..self.fg.k() {
            if !(self.allowed)(r, c) {
                continue;
            }
            if self.dsu[c].union(u, w) {
                self.coord[r] = c;
                self.run(r + 1, cb);
                self.dsu[c].undo();
            }
        }
    }
}

/// Visits every tree decomposition permitted by `allowed(row, coordinate)`, passing the
/// coordinate of each row and the sign of its permutation term. Returns how many were visited.
pub fn for_each_tree_decomposition(
    fg: &FanGraph,
    allowed: &dyn Fn(usize, usize) -> bool,
    cb: &mut dyn FnMut(&[usize], i32),
) -> Result<usize> {
    let (n, k) = (fg.n, fg.k());
    if n > MAX_TREE_VERTICES {
        return Err(Error::SizeLimit(format!("tree expansion needs at most {MAX_TREE_VERTICES} vertices, got {n}")));
    }
    if fg.rows.len() != n * k {
        return Err(Error::NotSquare { rows: fg.rows.len(), cols: n * k });
    }
    let mut s = Search { fg, allowed, dsu: (0..k).map(|_| Dsu::new(n + 1)).collect(), coord: vec![0; fg.rows.len()], count: 0 };
    s.run(0, cb);
    Ok(s.count)
}

fn red_ok(fg: &FanGraph, r: usize, c: usize) -> bool {
    fg.rows[r].color != Color::Red || fg.sig.b == 0 || c < fg.sig.a
}

/// Number of decompositions with red rows in aqua coordinates and standard loop `@i` on coordinate i.
pub fn count_tree_decompositions(g: &BicoloredMultigraph, sig: FrameSignature, tie_down: &TieDown) -> Result<usize> {
    let fg = FanGraph::new(g, sig, tie_down)?;
    let m = g.edge_count();
    let standard = fg.standard_vertex.is_some();
    let allowed = |r: usize, c: usize| red_ok(&fg, r, c) && (!standard || r < m || r - m == c);
    for_each_tree_decomposition(&fg, &allowed, &mut |_, _| {})
}

enum Acc {
    Small(i128),
    Big(BigInt),
}

impl Acc {
    fn add_product<'x>(&mut self, sign: i32, factors: impl Iterator<Item = &'x (Option<i128>, BigInt)> + Clone) {
        if let Acc::Small(s) = self {
            let mut p = Some(sign as i128);
            for (f, _) in factors.clone() {
                p = p.zip(*f).and_then(|(p, f)| p.checked_mul(f));
                if p == Some(0) {
                    return;
                }
            }
            if let Some(t) = p.and_then(|p| s.checked_add(p)) {
                *s = t;
                return;
            }
            *self = Acc::Big(BigInt::from(*s));
        }
        if let Acc::Big(b) = self {
            let mut p = BigInt::from(sign);
            for (_, f) in factors {
                p *= f;
            }
            *b += p;
        }
    }

    fn value(self) -> BigInt {
        match self {
            Acc::Small(s) => BigInt::from(s),
            Acc::Big(b) => b,
        }
    }
}

/// det M_T for each labeling, summed over tree decompositions in exact integer arithmetic.
pub fn tree_decomposition_expansion_many(
    g: &BicoloredMultigraph,
    sig: FrameSignature,
    tie_down: &TieDown,
    labelings: &[EdgeLabeling],
) -> Result<Vec<Rational>> {
    let fg = FanGraph::new(g, sig, tie_down)?;
    // per labeling: integer rows and the product of the row scale factors
    let mut ints: Vec<Vec<Vec<(Option<i128>, BigInt)>>> = Vec::new();
    let mut scales = Vec::new();
    for l in labelings {
        let m = build_matrix(g, sig, l, Some(tie_down))?;
        let mut scale = BigInt::from(1);
        let rows = m
            .rows
            .iter()
            .map(|r| {
                let (row, s) = linalg::integer_row(&r.label);
                scale *= s;
                row.into_iter().map(|x| (x.to_i128(), x)).collect()
            })
            .collect();
        ints.push(rows);
        scales.push(scale);
    }
    let nonzero = |r: usize, c: usize| ints.iter().any(|rows| !rows[r][c].1.is_zero());
    let allowed = |r: usize, c: usize| red_ok(&fg, r, c) && nonzero(r, c);
    let mut acc: Vec<Acc> = labelings.iter().map(|_| Acc::Small(0)).collect();
    let rows = fg.rows.len();
    for_each_tree_decomposition(&fg, &allowed, &mut |coord, sign| {
        for (a, li) in acc.iter_mut().zip(&ints) {
            a.add_product(sign, (0..rows).map(|r| &li[r][coord[r]]));
        }
    })?;
    Ok(acc.into_iter().zip(scales).map(|(a, s)| Rational::new(a.value(), s)).collect())
}

pub fn tree_decomposition_expansion(
    g: &BicoloredMultigraph,
    sig: FrameSignature,
    tie_down: &TieDown,
    labeling: &EdgeLabeling,
) -> Result<Rational> {
    Ok(tree_decomposition_expansion_many(g, sig, tie_down, std::slice::from_ref(labeling))?.remove(0))
}
