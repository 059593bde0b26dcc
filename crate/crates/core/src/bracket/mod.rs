//! Bracket expansions of the pure condition: fan diagrams, bracket monomials and polynomials,
//! and the tree-decomposition expansion used as an oracle.

mod fans;
mod trees;

pub use fans::{enumerate_ab_fans, enumerate_fans, seed_fan};
pub use trees::{
    block_sign, count_tree_decompositions, for_each_tree_decomposition, tree_decomposition_expansion,
    tree_decomposition_expansion_many,
};

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{BicoloredMultigraph, Color, FrameSignature, TieDown, TIE_PREFIX};
use crate::linalg::{self, Rational};
use crate::pebble;
use crate::rigidity::{basis_vector, EdgeLabeling};

/// One row of a tied-down graph: an edge or a tie-down loop, endpoints with `u <= v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanRow {
    pub id: String,
    pub u: usize,
    pub v: usize,
    pub color: Color,
    pub tie: bool,
}

impl FanRow {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Edges followed by tie-down loops, in base order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanGraph {
    pub n: usize,
    pub sig: FrameSignature,
    pub rows: Vec<FanRow>,
    pub standard_vertex: Option<usize>,
}

impl FanGraph {
    pub fn new(g: &BicoloredMultigraph, sig: FrameSignature, tie_down: &TieDown) -> Result<Self> {
        tie_down.validate(g, sig)?;
        let mut rows: Vec<FanRow> = g
            .edges()
            .iter()
            .map(|e| FanRow { id: e.id.clone(), u: e.tail, v: e.head, color: e.color, tie: false })
            .collect();
        rows.extend(tie_down.loops(sig).into_iter().map(|l| FanRow {
            id: l.id,
            u: l.vertex,
            v: l.vertex,
            color: l.color,
            tie: true,
        }));
        Ok(FanGraph { n: g.vertex_count(), sig, rows, standard_vertex: tie_down.standard_vertex() })
    }

    pub fn k(&self) -> usize {
        self.sig.k()
    }

    pub fn names(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.id.clone()).collect()
    }

    /// True when some non-loop row is red, i.e. the [a,b] restriction can matter.
    pub fn has_red_edges(&self) -> bool {
        self.rows.iter().any(|r| r.color == Color::Red && !r.is_loop())
    }
}

/// Orientation of every row: the vertex each row points out of.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FanDiagram {
    pub out_of: Vec<usize>,
}

impl FanDiagram {
    /// Checks out-degree exactly k; with `ab`, also at most a red out-rows per vertex.
    pub fn validate(&self, fg: &FanGraph, ab: bool) -> Result<()> {
        if self.out_of.len() != fg.rows.len() {
            return Err(Error::InvalidFan("wrong number of rows".into()));
        }
        let mut deg = vec![0usize; fg.n];
        let mut red = vec![0usize; fg.n];
        for (r, &x) in fg.rows.iter().zip(&self.out_of) {
            if x != r.u && x != r.v {
                return Err(Error::InvalidFan(format!("`{}` points out of a non-endpoint", r.id)));
            }
            deg[x] += 1;
            if r.color == Color::Red {
                red[x] += 1;
            }
        }
        if let Some(v) = (0..fg.n).find(|&v| deg[v] != fg.k()) {
            return Err(Error::InvalidFan(format!("vertex {} has out-degree {}", v + 1, deg[v])));
        }
        if ab {
            if let Some(v) = (0..fg.n).find(|&v| red[v] > fg.sig.a) {
                return Err(Error::InvalidFan(format!("vertex {} has {} red out-rows", v + 1, red[v])));
            }
        }
        Ok(())
    }

    /// Rows pointing out of each vertex, in base order.
    pub fn out_sets(&self, n: usize) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); n];
        for (r, &x) in self.out_of.iter().enumerate() {
            sets[x].push(r);
        }
        sets
    }

    /// Aqua/black split of a vertex's out-rows: red rows first, then black rows in base order
    /// until a rows are aqua.
    pub fn partition(&self, fg: &FanGraph, v: usize) -> (Vec<usize>, Vec<usize>) {
        let out = &self.out_sets(fg.n)[v];
        let mut aqua: Vec<usize> = out.iter().copied().filter(|&r| fg.rows[r].color == Color::Red).collect();
        let mut black = Vec::new();
        for &r in out.iter().filter(|&&r| fg.rows[r].color == Color::Black) {
            if aqua.len() < fg.sig.a {
                aqua.push(r);
            } else {
                black.push(r);
            }
        }
        aqua.sort_unstable();
        (aqua, black)
    }
}

/// Signed product of brackets, one per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketMonomial {
    pub sign: i32,
    pub brackets: Vec<Vec<usize>>,
}

fn inversion_parity(seq: &[usize]) -> i32 {
    let mut inv = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// sgn(sigma) * eps(F) * prod_i [F_i].
pub fn fan_to_monomial(f: &FanDiagram, fg: &FanGraph) -> BracketMonomial {
    let brackets = f.out_sets(fg.n);
    let seq: Vec<usize> = brackets.iter().flatten().copied().collect();
    let flipped = fg.rows.iter().zip(&f.out_of).filter(|(r, &x)| !r.is_loop() && x != r.u).count();
    let eps = if flipped % 2 == 0 { 1 } else { -1 };
    BracketMonomial { sign: inversion_parity(&seq) * eps, brackets }
}

/// Integer combination of bracket monomials in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketPolynomial {
    pub k: usize,
    pub names: Vec<String>,
    terms: BTreeMap<Vec<Vec<usize>>, BigInt>,
}

impl BracketPolynomial {
    pub fn new(k: usize, names: Vec<String>) -> Self {
        BracketPolynomial { k, names, terms: BTreeMap::new() }
    }

    /// Adds `coeff * prod brackets`, sorting each bracket (tracking parity) and the product.
    pub fn add_term(&mut self, coeff: BigInt, brackets: &[Vec<usize>]) {
        let mut sign = 1;
        let mut key = Vec::with_capacity(brackets.len());
        for b in brackets {
            let mut s = b.clone();
            sign *= inversion_parity(&s);
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return;
            }
            key.push(s);
        }
        key.sort();
        let c = self.terms.entry(key.clone()).or_insert_with(BigInt::zero);
        *c += coeff * sign;
        if c.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Vec<usize>>, &BigInt)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        for c in p.terms.values_mut() {
            *c = -c.clone();
        }
        p
    }

    /// Every monomial uses each listed row exactly once.
    pub fn is_multilinear_in(&self, rows: &[usize]) -> bool {
        self.terms.keys().all(|m| {
            let mut all: Vec<usize> = m.iter().flatten().copied().collect();
            all.sort_unstable();
            let mut want = rows.to_vec();
            want.sort_unstable();
            all == want
        })
    }

    /// Parses the text form `+[a b d][c e f] -2[a b c][d e f]` over the given names.
    pub fn parse(text: &str, k: usize, names: &[String]) -> Result<Self> {
        let mut p = BracketPolynomial::new(k, names.to_vec());
        let idx = |s: &str| {
            names.iter().position(|n| n == s).ok_or_else(|| Error::UnknownEdge(s.to_string()))
        };
        let mut rest = text.trim();
        while !rest.is_empty() {
            let (neg, body) = match rest.as_bytes()[0] {
                b'+' => (false, &rest[1..]),
                b'-' => (true, &rest[1..]),
                _ => (false, rest),
            };
            let digits = body.find('[').ok_or_else(|| Error::Parse(format!("expected `[` in `{rest}`")))?;
            let mut coeff: BigInt = if body[..digits].trim().is_empty() {
                BigInt::one()
            } else {
                body[..digits].trim().parse().map_err(|_| Error::Parse(format!("bad coefficient in `{rest}`")))?
            };
            if neg {
                coeff = -coeff;
            }
            let mut s = &body[digits..];
            let mut brackets = Vec::new();
            while let Some(tail) = s.strip_prefix('[') {
                let close = tail.find(']').ok_or_else(|| Error::Parse("unclosed bracket".into()))?;
                let b = tail[..close].split_whitespace().map(idx).collect::<Result<Vec<_>>>()?;
                if b.len() != k {
                    return Err(Error::Parse(format!("bracket of size {} in dimension {k}", b.len())));
                }
                brackets.push(b);
                s = tail[close + 1..].trim_start();
            }
            p.add_term(coeff, &brackets);
            rest = s.trim_start();
        }
        Ok(p)
    }

    /// +1 or -1 if `other` equals this polynomial up to that sign.
    pub fn sign_relative_to(&self, other: &Self) -> Option<i32> {
        if self.terms.is_empty() && other.terms.is_empty() {
            return Some(1);
        }
        if self.names != other.names {
            let rename: Option<BracketPolynomial> = other.renamed(&self.names);
            return rename.and_then(|o| self.sign_relative_to(&o));
        }
        if self.terms == other.terms {
            Some(1)
        } else if self.terms == other.negated().terms {
            Some(-1)
        } else {
            None
        }
    }

    fn renamed(&self, names: &[String]) -> Option<Self> {
        let map: Option<Vec<usize>> = self.names.iter().map(|n| names.iter().position(|m| m == n)).collect();
        let map = map?;
        let mut p = BracketPolynomial::new(self.k, names.to_vec());
        for (m, c) in &self.terms {
            let b: Vec<Vec<usize>> = m.iter().map(|br| br.iter().map(|&i| map[i]).collect()).collect();
            p.add_term(c.clone(), &b);
        }
        Some(p)
    }

    /// Label of a row name: from the labeling, or e_i for standard tie-down loop `@i`.
    fn label<'l>(&self, name: &str, labeling: &'l EdgeLabeling) -> Result<std::borrow::Cow<'l, Vec<Rational>>> {
        if let Some(v) = labeling.get(name) {
            if v.len() != self.k {
                return Err(Error::LabelLength { id: name.to_string(), got: v.len(), expected: self.k });
            }
            return Ok(std::borrow::Cow::Borrowed(v));
        }
        if let Some(i) = name.strip_prefix(TIE_PREFIX).and_then(|s| s.parse::<usize>().ok()) {
            if (1..=self.k).contains(&i) {
                return Ok(std::borrow::Cow::Owned(basis_vector(self.k, i - 1)));
            }
        }
        Err(Error::MissingLabel(name.to_string()))
    }

    pub fn evaluate(&self, labeling: &EdgeLabeling) -> Result<Rational> {
        let mut cache: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut prod = Rational::from_integer(c.clone());
            for b in m {
                if !cache.contains_key(b) {
                    let cols = b.iter().map(|&i| self.label(&self.names[i], labeling)).collect::<Result<Vec<_>>>()?;
                    let mat: Vec<Vec<Rational>> =
                        (0..self.k).map(|r| cols.iter().map(|col| col[r].clone()).collect()).collect();
                    cache.insert(b.clone(), linalg::determinant(&mat)?);
                }
                prod *= &cache[b];
                if prod.is_zero() {
                    break;
                }
            }
            total += prod;
        }
        Ok(total)
    }
}

impl fmt::Display for BracketPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", if c.is_negative() { "-" } else { "+" })?;
            if c.abs() != BigInt::one() {
                write!(f, "{}", c.abs())?;
            }
            for b in m {
                let ids: Vec<&str> = b.iter().map(|&i| self.names[i].as_str()).collect();
                write!(f, "[{}]", ids.join(" "))?;
            }
        }
        Ok(())
    }
}

pub fn evaluate_bracket_polynomial(bp: &BracketPolynomial, labeling: &EdgeLabeling) -> Result<Rational> {
    bp.evaluate(labeling)
}

/// Sum of fan monomials. With a standard tie-down the bracket of the tied vertex is det(I) = 1
/// and is dropped; generalized tie-down loops stay in their brackets.
pub fn pure_condition_bracket(g: &BicoloredMultigraph, sig: FrameSignature, tie_down: &TieDown) -> Result<BracketPolynomial> {
    pure_condition_bracket_capped(g, sig, tie_down, None)
}

/// As [`pure_condition_bracket`], failing with a size-limit error past `max_fans` fans.
pub fn pure_condition_bracket_capped(
    g: &BicoloredMultigraph,
    sig: FrameSignature,
    tie_down: &TieDown,
    max_fans: Option<usize>,
) -> Result<BracketPolynomial> {
    let (v, _) = pebble::classify(g, sig);
    if v.verdict != pebble::Verdict::Tight {
        return Err(Error::NotTight(v.verdict.as_str().into()));
    }
    let fg = FanGraph::new(g, sig, tie_down)?;
    let seed = seed_fan(&fg)?;
    let mut bp = BracketPolynomial::new(sig.k(), fg.names());
    let strip = fg.standard_vertex;
    let mut add = |f: &FanDiagram| {
        let m = fan_to_monomial(f, &fg);
        let brackets: Vec<Vec<usize>> = match strip {
            Some(v0) => m.brackets.iter().enumerate().filter(|(v, _)| *v != v0).map(|(_, b)| b.clone()).collect(),
            None => m.brackets,
        };
        bp.add_term(BigInt::from(m.sign), &brackets);
        true
    };
    let cap = max_fans.map(|m| m + 1);
    let count = if fg.has_red_edges() {
        enumerate_ab_fans(&fg, seed, cap, &mut add)?
    } else {
        enumerate_fans(&fg, seed, cap, &mut add)?
    };
    if max_fans.is_some_and(|m| count > m) {
        return Err(Error::SizeLimit(format!("more than {} fans", count - 1)));
    }
    Ok(bp)
}

#[cfg(test)]
mod tests;
