//! Bicolored multigraphs, frame signatures, tie-downs and contraction.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Black,
}

impl Color {
    pub fn parse(s: &str) -> Result<Color> {
        match s {
            "red" | "r" => Ok(Color::Red),
            "black" | "b" => Ok(Color::Black),
            _ => Err(Error::Parse(format!("unknown color `{s}`"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Black => "black",
        }
    }
}

/// An edge with 0-based endpoints stored in base orientation (`tail <= head`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub color: Color,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

/// (a, b) with k = a + b; red labels vanish in the last b coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameSignature {
    pub a: usize,
    pub b: usize,
}

impl FrameSignature {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 {
            return Err(Error::InvalidSignature { a, b });
        }
        Ok(FrameSignature { a, b })
    }

    /// Color-blind body-and-bar signature for dimension k.
    pub fn body_bar(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidSignature { a: k, b: 0 });
        }
        Self::new(1, k - 1)
    }

    pub fn k(&self) -> usize {
        self.a + self.b
    }
}

impl fmt::Display for FrameSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.a, self.b)
    }
}

/// Self-loop added to pin trivial motions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieLoop {
    pub id: String,
    pub vertex: usize,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TieDown {
    /// All k loops at one vertex, labelled e_1..e_k.
    Standard { vertex: usize },
    Generalized { loops: Vec<TieLoop> },
}

pub const TIE_PREFIX: &str = "@";

impl TieDown {
    pub fn standard(vertex: usize) -> Self {
        TieDown::Standard { vertex }
    }

    /// Loop rows in base order. Standard loops are red in the first a coordinates.
    pub fn loops(&self, sig: FrameSignature) -> Vec<TieLoop> {
        match self {
            TieDown::Standard { vertex } => (0..sig.k())
                .map(|i| TieLoop {
                    id: format!("{TIE_PREFIX}{}", i + 1),
                    vertex: *vertex,
                    color: if i < sig.a && sig.b > 0 { Color::Red } else { Color::Black },
                })
                .collect(),
            TieDown::Generalized { loops } => loops.clone(),
        }
    }

    pub fn standard_vertex(&self) -> Option<usize> {
        match self {
            TieDown::Standard { vertex } => Some(*vertex),
            TieDown::Generalized { .. } => None,
        }
    }

    pub fn validate(&self, g: &BicoloredMultigraph, sig: FrameSignature) -> Result<()> {
        let loops = self.loops(sig);
        if loops.len() != sig.k() {
            return Err(Error::InvalidTieDown(format!(
                "{} loops for k = {}",
                loops.len(),
                sig.k()
            )));
        }
        for l in &loops {
            if l.vertex >= g.vertex_count() {
                return Err(Error::InvalidTieDown(format!("loop `{}` at missing vertex", l.id)));
            }
            if g.edge_index(&l.id).is_some() {
                return Err(Error::InvalidTieDown(format!("loop id `{}` clashes with an edge", l.id)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BicoloredMultigraph {
    n: usize,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
}

/// Result of contracting a block of vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionMap {
    /// old vertex -> new vertex
    pub vertex_map: Vec<usize>,
    /// old edge -> new edge, `None` for edges inside the block
    pub edge_map: Vec<Option<usize>>,
}

impl BicoloredMultigraph {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoVertices);
        }
        Ok(BicoloredMultigraph { n, edges: Vec::new(), index: HashMap::new() })
    }

    /// Adds an edge with 0-based endpoints; returns its index.
    pub fn add_edge(&mut self, id: &str, u: usize, v: usize, color: Color) -> Result<usize> {
        for w in [u, v] {
            if w >= self.n {
                return Err(Error::VertexOutOfRange { edge: id.to_string(), vertex: w + 1, n: self.n });
            }
        }
        if id.is_empty() || self.index.contains_key(id) {
            return Err(Error::DuplicateEdge(id.to_string()));
        }
        let idx = self.edges.len();
        self.edges.push(Edge { id: id.to_string(), tail: u.min(v), head: u.max(v), color });
        self.index.insert(id.to_string(), idx);
        Ok(idx)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn has_red(&self) -> bool {
        self.edges.iter().any(|e| e.color == Color::Red)
    }

    pub fn color_counts(&self) -> (usize, usize) {
        let r = self.edges.iter().filter(|e| e.color == Color::Red).count();
        (r, self.edges.len() - r)
    }

    /// Same graph with every edge recolored black.
    pub fn uncolored(&self) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.color = Color::Black;
        }
        g
    }

    /// Subgraph spanned by `vertices` (any order); vertices are renumbered by increasing old index.
    /// Returns the graph and the new -> old vertex map.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<(Self, Vec<usize>)> {
        let mut vs: Vec<usize> = vertices.to_vec();
        vs.sort_unstable();
        vs.dedup();
        let mut new_of = vec![usize::MAX; self.n];
        for (i, &v) in vs.iter().enumerate() {
            if v >= self.n {
                return Err(Error::VertexOutOfRange { edge: String::new(), vertex: v + 1, n: self.n });
            }
            new_of[v] = i;
        }
        let mut g = BicoloredMultigraph::new(vs.len())?;
        for e in &self.edges {
            if new_of[e.tail] != usize::MAX && new_of[e.head] != usize::MAX {
                g.add_edge(&e.id, new_of[e.tail], new_of[e.head], e.color)?;
            }
        }
        Ok((g, vs))
    }

    /// Subgraph on all vertices keeping only the listed edges, in base order.
    pub fn edge_subgraph(&self, edges: &[usize]) -> Self {
        let mut keep = vec![false; self.edges.len()];
        for &e in edges {
            keep[e] = true;
        }
        let mut g = BicoloredMultigraph::new(self.n).expect("n > 0");
        for (i, e) in self.edges.iter().enumerate() {
            if keep[i] {
                g.add_edge(&e.id, e.tail, e.head, e.color).expect("ids unique");
            }
        }
        g
    }

    /// Contracts the vertices spanned by `block_edges` to one vertex (the smallest), removing those
    /// edges. Surviving vertices keep their relative order; loops created by the merge are kept.
    pub fn contract(&self, block_edges: &[usize]) -> Result<(Self, ContractionMap)> {
        let mut in_block = vec![false; self.edges.len()];
        let mut parent: Vec<usize> = (0..self.n).collect();
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
        let mut block_vertices = Vec::new();
        for &e in block_edges {
            if e >= self.edges.len() {
                return Err(Error::UnknownEdge(format!("#{e}")));
            }
            in_block[e] = true;
            let ed = &self.edges[e];
            block_vertices.extend([ed.tail, ed.head]);
            let (x, y) = (find(&mut parent, ed.tail), find(&mut parent, ed.head));
            parent[x] = y;
        }
        block_vertices.sort_unstable();
        block_vertices.dedup();
        let Some(&rep) = block_vertices.first() else {
            return Err(Error::BlockNotConnected);
        };
        let root = find(&mut parent, rep);
        if block_vertices.iter().any(|&v| find(&mut parent, v) != root) {
            return Err(Error::BlockNotConnected);
        }
        let mut merged = vec![false; self.n];
        for &v in &block_vertices {
            merged[v] = true;
        }
        let mut vertex_map = vec![0; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if merged[v] && v != rep {
                continue;
            }
            vertex_map[v] = next;
            next += 1;
        }
        for &v in &block_vertices {
            vertex_map[v] = vertex_map[rep];
        }
        let mut g = BicoloredMultigraph::new(next)?;
        let mut edge_map = vec![None; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if in_block[i] {
                continue;
            }
            edge_map[i] = Some(g.add_edge(&e.id, vertex_map[e.tail], vertex_map[e.head], e.color)?);
        }
        Ok((g, ContractionMap { vertex_map, edge_map }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> BicoloredMultigraph {
        let mut g = BicoloredMultigraph::new(3).unwrap();
        for (id, u, v) in [("a", 0, 1), ("b", 1, 0), ("c", 1, 2), ("d", 2, 1), ("e", 0, 2), ("f", 2, 0)] {
            g.add_edge(id, u, v, Color::Black).unwrap();
        }
        g
    }

    #[test]
    fn edges_are_normalized() {
        let g = triangle();
        assert_eq!((g.edge(1).tail, g.edge(1).head), (0, 1));
        assert_eq!(g.edge_index("d"), Some(3));
    }

    #[test]
    fn rejects_bad_edges() {
        let mut g = triangle();
        assert_eq!(g.add_edge("a", 0, 1, Color::Red), Err(Error::DuplicateEdge("a".into())));
        assert!(matches!(g.add_edge("z", 0, 3, Color::Red), Err(Error::VertexOutOfRange { .. })));
        assert_eq!(BicoloredMultigraph::new(0), Err(Error::NoVertices));
    }

    #[test]
    fn contract_merges_to_smallest_vertex() {
        let g = triangle();
        let (h, map) = g.contract(&[2, 3]).unwrap();
        assert_eq!(h.vertex_count(), 2);
        assert_eq!(map.vertex_map, vec![0, 1, 1]);
        assert_eq!(h.edge_count(), 4);
        assert_eq!(map.edge_map[2], None);
        assert_eq!(map.edge_map[4], Some(2));
        let e = h.edge(h.edge_index("e").unwrap());
        assert_eq!((e.tail, e.head), (0, 1));
    }

    #[test]
    fn contract_keeps_loops_and_checks_connectivity() {
        let mut g = BicoloredMultigraph::new(4).unwrap();
        g.add_edge("x", 0, 1, Color::Black).unwrap();
        g.add_edge("y", 2, 3, Color::Black).unwrap();
        g.add_edge("z", 0, 1, Color::Red).unwrap();
        assert_eq!(g.contract(&[0, 1]), Err(Error::BlockNotConnected));
        let (h, _) = g.contract(&[0]).unwrap();
        assert!(h.edge(h.edge_index("z").unwrap()).is_loop());
    }

    #[test]
    fn induced_subgraph_renumbers() {
        let g = triangle();
        let (h, map) = g.induced_subgraph(&[2, 1]).unwrap();
        assert_eq!(map, vec![1, 2]);
        assert_eq!(h.edge_count(), 2);
        assert_eq!(h.edge(0).id, "c");
    }

    #[test]
    fn standard_tie_down_colors() {
        let sig = FrameSignature::new(2, 2).unwrap();
        let loops = TieDown::standard(0).loops(sig);
        let colors: Vec<Color> = loops.iter().map(|l| l.color).collect();
        assert_eq!(colors, vec![Color::Red, Color::Red, Color::Black, Color::Black]);
        assert_eq!(loops[3].id, "@4");
    }
}
