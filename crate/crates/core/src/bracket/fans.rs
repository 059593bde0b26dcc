//! Fan-diagram enumeration by polygon reversal.
//!
//! Every fan of G either has the chosen polygon edge pointing one way or the other; fixing it
//! (turning it into a loop at its current tail) splits the fans into two disjoint families, the
//! second reached by reversing the polygon first. Polygons live inside strongly connected
//! components of the free-edge digraph, which only refine as edges get fixed, so the search
//! keeps a stack of pending components.

use std::collections::VecDeque;

use super::{FanDiagram, FanGraph};
use crate::error::{Error, Result};
use crate::graph::Color;
use crate::pebble::PebbleGame;

/// A valid fan from the tied-down pebble game: out-edges of the final configuration.
pub fn seed_fan(fg: &FanGraph) -> Result<FanDiagram> {
    let ab = fg.has_red_edges();
    let mut game = if ab {
        PebbleGame::colored_tied(fg.n, fg.sig)
    } else {
        PebbleGame::uncolored(fg.n, fg.k(), 0)
    };
    for r in &fg.rows {
        let color = if ab { r.color } else { Color::Black };
        if !game.insert(r.u, r.v, color) {
            return Err(Error::NotTight(format!("row `{}` is dependent with its tie-down", r.id)));
        }
    }
    if game.total_free().iter().sum::<usize>() != 0 {
        return Err(Error::NotTight("tied-down graph has spare pebbles".into()));
    }
    let out_of = (0..fg.rows.len()).map(|r| game.orientation(r).expect("accepted").0).collect();
    Ok(FanDiagram { out_of })
}

pub type FanSink<'a> = dyn FnMut(&FanDiagram) -> bool + 'a;

struct Walk<'g, 's, 'a> {
    fg: &'g FanGraph,
    fan: FanDiagram,
    fixed: Vec<bool>,
    inc: Vec<Vec<usize>>,
    mark: Vec<u32>,
    epoch: u32,
    emitted: usize,
    limit: Option<usize>,
    sink: &'s mut FanSink<'a>,
    red_out: Vec<usize>,
}

impl<'g, 's, 'a> Walk<'g, 's, 'a> {
    fn new(fg: &'g FanGraph, seed: FanDiagram, limit: Option<usize>, sink: &'s mut FanSink<'a>) -> Self {
        let mut inc = vec![Vec::new(); fg.n];
        let mut red_out = vec![0; fg.n];
        for (i, r) in fg.rows.iter().enumerate() {
            if !r.is_loop() {
                inc[r.u].push(i);
                inc[r.v].push(i);
            }
            if r.color == Color::Red {
                red_out[seed.out_of[i]] += 1;
            }
        }
        let fixed = fg.rows.iter().map(|r| r.is_loop()).collect();
        Walk { fg, fan: seed, fixed, inc, mark: vec![0; fg.n], epoch: 0, emitted: 0, limit, sink, red_out }
    }

    fn head(&self, r: usize) -> usize {
        self.fg.rows[r].other(self.fan.out_of[r])
    }

    fn free_out(&self, x: usize) -> Vec<usize> {
        self.inc[x].iter().copied().filter(|&r| !self.fixed[r] && self.fan.out_of[r] == x).collect()
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch += 1;
        self.epoch
    }

    fn reverse(&mut self, r: usize) {
        let h = self.head(r);
        if self.fg.rows[r].color == Color::Red {
            self.red_out[self.fan.out_of[r]] -= 1;
            self.red_out[h] += 1;
        }
        self.fan.out_of[r] = h;
    }

    /// false when the caller asked to stop
    fn emit(&mut self) -> bool {
        if self.limit.is_some_and(|l| self.emitted >= l) {
            return false;
        }
        self.emitted += 1;
        (self.sink)(&self.fan) && !self.limit.is_some_and(|l| self.emitted >= l)
    }

    /// Nontrivial strongly connected components of the free-edge digraph on `vs` (iterative Tarjan).
    fn sccs(&mut self, vs: &[usize]) -> Vec<Vec<usize>> {
        let ep = self.next_epoch();
        for &v in vs {
            self.mark[v] = ep;
        }
        let n = self.fg.n;
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comps = Vec::new();
        let mut counter = 0;
        for &root in vs {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&(x, pos)) = call.last() {
                if pos < self.inc[x].len() {
                    call.last_mut().unwrap().1 += 1;
                    let r = self.inc[x][pos];
                    if self.fixed[r] || self.fan.out_of[r] != x {
                        continue;
                    }
                    let y = self.head(r);
                    if self.mark[y] != ep {
                        continue;
                    }
                    if index[y] == usize::MAX {
                        index[y] = counter;
                        low[y] = counter;
                        counter += 1;
                        stack.push(y);
                        on_stack[y] = true;
                        call.push((y, 0));
                    } else if on_stack[y] {
                        low[x] = low[x].min(index[y]);
                    }
                    continue;
                }
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[x]);
                }
                if low[x] == index[x] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == x {
                            break;
                        }
                    }
                    if comp.len() > 1 {
                        comp.sort_unstable();
                        comps.push(comp);
                    }
                }
            }
        }
        comps
    }

    /// Directed cycle through the first vertex of a strongly connected component.
    fn cycle_in(&mut self, comp: &[usize]) -> Vec<usize> {
        let ep = self.next_epoch();
        for &v in comp {
            self.mark[v] = ep;
        }
        let start = comp[0];
        let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); self.fg.n];
        let ep2 = self.next_epoch();
        let mut q = VecDeque::from([start]);
        self.mark[start] = ep2;
        while let Some(x) = q.pop_front() {
            let outs = self.free_out(x);
            for r in outs {
                let y = self.head(r);
                if y == start {
                    let mut cyc = vec![r];
                    let mut z = x;
                    while z != start {
                        let (pr, pz) = parent[z];
                        cyc.push(pr);
                        z = pz;
                    }
                    cyc.reverse();
                    return cyc;
                }
                if self.mark[y] == ep {
                    self.mark[y] = ep2;
                    parent[y] = (r, x);
                    q.push_back(y);
                }
            }
        }
        unreachable!("strongly connected component without a cycle")
    }

    fn branch(&mut self, cycle: &[usize], comp_vertices: &[usize], pending: &mut Vec<Vec<usize>>) -> bool {
        let e = *cycle.iter().min().unwrap();
        for reversed in [false, true] {
            if reversed {
                for &r in cycle {
                    self.reverse(r);
                }
            }
            self.fixed[e] = true;
            let base = pending.len();
            let subs = self.sccs(comp_vertices);
            pending.extend(subs);
            let go_on = self.plain(pending);
            pending.truncate(base);
            self.fixed[e] = false;
            if !go_on {
                if reversed {
                    for &r in cycle {
                        self.reverse(r);
                    }
                }
                return false;
            }
        }
        for &r in cycle {
            self.reverse(r);
        }
        true
    }

    fn plain(&mut self, pending: &mut Vec<Vec<usize>>) -> bool {
        let Some(comp) = pending.pop() else {
            return self.emit();
        };
        let cycle = self.cycle_in(&comp);
        let ok = self.branch(&cycle, &comp, pending);
        pending.push(comp);
        ok
    }

    fn transition_ok(&self, v: usize, in_row: usize, out_row: usize) -> bool {
        let red = |r: usize| self.fg.rows[r].color == Color::Red;
        !(red(in_row) && self.red_out[v] == self.fg.sig.a && !red(out_row))
    }

    /// An admissible polygon: a directed cycle of free rows in which a red row entering a vertex
    /// that already has a red out-rows is followed by a red row.
    fn admissible_cycle(&mut self) -> Option<Vec<usize>> {
        let n = self.fg.n;
        let a = self.fg.sig.a;
        // states: vertex * 2 + (entered by red)
        let mut state = vec![0u8; 2 * n]; // 0 new, 1 on stack, 2 done
        for s0 in 0..2 * n {
            if state[s0] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize, usize)> = vec![(s0, 0, usize::MAX)];
            state[s0] = 1;
            while let Some(&(s, pos, _)) = stack.last() {
                let (x, by_red) = (s / 2, s % 2 == 1);
                if pos >= self.inc[x].len() {
                    state[s] = 2;
                    stack.pop();
                    continue;
                }
                stack.last_mut().unwrap().1 += 1;
                let r = self.inc[x][pos];
                if self.fixed[r] || self.fan.out_of[r] != x {
                    continue;
                }
                let red = self.fg.rows[r].color == Color::Red;
                if by_red && self.red_out[x] == a && !red {
                    continue;
                }
                let t = self.head(r) * 2 + red as usize;
                match state[t] {
                    0 => {
                        state[t] = 1;
                        stack.push((t, 0, r));
                    }
                    1 => {
                        let from = stack.iter().position(|f| f.0 == t).unwrap();
                        let mut walk: Vec<usize> = stack[from + 1..].iter().map(|f| f.2).collect();
                        walk.push(r);
                        return Some(self.simplify(walk));
                    }
                    _ => {}
                }
            }
        }
        None
    }

    /// Splits a closed admissible walk at repeated vertices until it is a simple cycle.
    fn simplify(&self, mut walk: Vec<usize>) -> Vec<usize> {
        loop {
            let tails: Vec<usize> = walk.iter().map(|&r| self.fan.out_of[r]).collect();
            let len = walk.len();
            let mut rep = None;
            'find: for s in 0..len {
                for t in s + 1..len {
                    if tails[s] == tails[t] {
                        rep = Some((s, t));
                        break 'find;
                    }
                }
            }
            let Some((s, t)) = rep else { return walk };
            let v = tails[s];
            let first: Vec<usize> = walk[s..t].to_vec();
            if self.transition_ok(v, walk[t - 1], walk[s]) {
                walk = first;
            } else {
                let mut second: Vec<usize> = walk[t..].to_vec();
                second.extend_from_slice(&walk[..s]);
                walk = second;
            }
        }
    }

    fn admissible(&mut self) -> bool {
        let Some(cycle) = self.admissible_cycle() else {
            return self.emit();
        };
        let e = *cycle.iter().min().unwrap();
        for reversed in [false, true] {
            if reversed {
                for &r in &cycle {
                    self.reverse(r);
                }
            }
            self.fixed[e] = true;
            let go_on = self.admissible();
            self.fixed[e] = false;
            if !go_on {
                if reversed {
                    for &r in &cycle {
                        self.reverse(r);
                    }
                }
                return false;
            }
        }
        for &r in &cycle {
            self.reverse(r);
        }
        true
    }
}

/// Streams every k-fan of the tied-down graph once. `sink` returns false to stop early;
/// `limit` caps the number of fans. Returns the number emitted.
pub fn enumerate_fans(fg: &FanGraph, seed: FanDiagram, limit: Option<usize>, sink: &mut FanSink<'_>) -> Result<usize> {
    seed.validate(fg, false)?;
    let mut w = Walk::new(fg, seed, limit, sink);
    let all: Vec<usize> = (0..fg.n).collect();
    let mut pending = w.sccs(&all);
    pending.reverse();
    w.plain(&mut pending);
    Ok(w.emitted)
}

/// Streams every [a,b]-fan (out-degree k, at most a red out-rows per vertex) once.
pub fn enumerate_ab_fans(fg: &FanGraph, seed: FanDiagram, limit: Option<usize>, sink: &mut FanSink<'_>) -> Result<usize> {
    seed.validate(fg, true)?;
    if !fg.has_red_edges() {
        return enumerate_fans(fg, seed, limit, sink);
    }
    let mut w = Walk::new(fg, seed, limit, sink);
    w.admissible();
    Ok(w.emitted)
}
