//! Exhaustive sparsity checks used as ground truth in tests.

use crate::error::{Error, Result};
use crate::graph::{BicoloredMultigraph, Color, FrameSignature};

const MAX_VERTICES: usize = 12;
const MAX_BLACK: usize = 32;

/// (k,l)-sparsity by counting every vertex subset that spans at least one edge.
pub fn count_sparse_oracle(n: usize, edges: &[(usize, usize)], k: usize, l: usize) -> Result<bool> {
    if n > MAX_VERTICES {
        return Err(Error::SizeLimit(format!("{n} vertices")));
    }
    for mask in 1u32..(1 << n) {
        let span = edges.iter().filter(|&&(u, v)| mask >> u & 1 == 1 && mask >> v & 1 == 1).count();
        if span > 0 && span + l > k * mask.count_ones() as usize {
            return Ok(false);
        }
    }
    Ok(true)
}

/// [a,b]-sparsity: some split of the black edges makes red + B' (a,a)-sparse and the rest (b,b)-sparse.
pub fn sparsity_oracle(g: &BicoloredMultigraph, sig: FrameSignature) -> Result<bool> {
    sparsity_oracle_with(g, sig.a, sig.b, sig.a, sig.b)
}

/// Same search with arbitrary l per color: red + B' must be (a,la)-sparse, B \ B' (b,lb)-sparse.
pub fn sparsity_oracle_with(g: &BicoloredMultigraph, a: usize, b: usize, la: usize, lb: usize) -> Result<bool> {
    let n = g.vertex_count();
    let black: Vec<(usize, usize)> =
        g.edges().iter().filter(|e| e.color == Color::Black).map(|e| (e.tail, e.head)).collect();
    let red: Vec<(usize, usize)> =
        g.edges().iter().filter(|e| e.color == Color::Red).map(|e| (e.tail, e.head)).collect();
    if n > MAX_VERTICES || black.len() > MAX_BLACK {
        return Err(Error::SizeLimit(format!("{n} vertices, {} black edges", black.len())));
    }
    let all: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.tail, e.head)).collect();
    // necessary: the union count, and red alone in the aqua color
    if !count_sparse_oracle(n, &all, a + b, la + lb)? || !count_sparse_oracle(n, &red, a, la)? {
        return Ok(false);
    }
    let masks = 1usize << n;
    let size: Vec<usize> = (0..masks).map(|m| m.count_ones() as usize).collect();
    let supersets = |(u, v): (usize, usize)| -> Vec<usize> {
        (1..masks).filter(|m| m >> u & 1 == 1 && m >> v & 1 == 1).collect()
    };
    let mut cx = vec![0usize; masks];
    for &e in &red {
        for m in supersets(e) {
            cx[m] += 1;
        }
    }
    let mut cy = vec![0usize; masks];
    let sup: Vec<Vec<usize>> = black.iter().map(|&e| supersets(e)).collect();

    struct Search<'s> {
        sup: &'s [Vec<usize>],
        size: &'s [usize],
        k: [usize; 2],
        l: [usize; 2],
    }
    impl Search<'_> {
        fn fits(&self, counts: &[usize], i: usize, c: usize) -> bool {
            self.sup[i].iter().all(|&m| counts[m] + 1 + self.l[c] <= self.k[c] * self.size[m])
        }
        fn go(&self, i: usize, cx: &mut [usize], cy: &mut [usize]) -> bool {
            if i == self.sup.len() {
                return true;
            }
            for c in 0..2 {
                let counts: &mut [usize] = if c == 0 { cx } else { cy };
                if !self.fits(counts, i, c) {
                    continue;
                }
                for &m in &self.sup[i] {
                    counts[m] += 1;
                }
                let ok = self.go(i + 1, cx, cy);
                let counts: &mut [usize] = if c == 0 { cx } else { cy };
                for &m in &self.sup[i] {
                    counts[m] -= 1;
                }
                if ok {
                    return true;
                }
            }
            false
        }
    }
    let s = Search { sup: &sup, size: &size, k: [a, b], l: [la, lb] };
    Ok(s.go(0, &mut cx, &mut cy))
}

/// Minimal dependence check of an edge set under the [a,b] oracle.
pub fn fundamental_circuit_oracle(g: &BicoloredMultigraph, sig: FrameSignature, edges: &[usize]) -> Result<bool> {
    if sparsity_oracle(&g.edge_subgraph(edges), sig)? {
        return Ok(false);
    }
    for skip in 0..edges.len() {
        let rest: Vec<usize> = edges.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &e)| e).collect();
        if !sparsity_oracle(&g.edge_subgraph(&rest), sig)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_examples() {
        let sig = FrameSignature::new(1, 2).unwrap();
        let g = BicoloredMultigraph::new(1).unwrap();
        assert!(sparsity_oracle(&g, sig).unwrap());
        let mut g = BicoloredMultigraph::new(2).unwrap();
        for i in 0..4 {
            g.add_edge(&format!("x{i}"), 0, 1, Color::Black).unwrap();
        }
        assert!(!sparsity_oracle(&g, sig).unwrap());
        let mut g = BicoloredMultigraph::new(2).unwrap();
        g.add_edge("r1", 0, 1, Color::Red).unwrap();
        g.add_edge("r2", 0, 1, Color::Red).unwrap();
        // two red edges cannot both sit in the (1,1)-sparse aqua color
        assert!(!sparsity_oracle(&g, sig).unwrap());
    }

    #[test]
    fn fig2_partition_is_found() {
        let d = crate::io::parse_graph(include_str!("../../../../fixtures/doubled_k4.json")).unwrap();
        assert!(sparsity_oracle(&d.graph, d.sig).unwrap());
    }
}
