//! Grassmann-Cayley join and meet on extensors in exterior-power coordinates, simple
//! expressions over edge labels, and randomized equivalence against bracket polynomials.

use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::bracket::BracketPolynomial;
use crate::error::{Error, Result};
use crate::linalg::Rational;
use crate::rigidity::EdgeLabeling;

pub const MAX_DIMENSION: usize = 16;

/// Element of the step-s exterior power of Q^k; coefficient of e_S stored at bitmask S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extensor {
    k: usize,
    step: usize,
    coeffs: Vec<Rational>,
}

fn sign_of(odd: bool) -> i32 {
    if odd {
        -1
    } else {
        1
    }
}

/// Parity of pairs (s in S, t in T) with s > t: the sign of e_S ^ e_T against e_{S|T}.
fn merge_sign(s: u32, t: u32) -> i32 {
    let mut odd = false;
    let mut rest = t;
    while rest != 0 {
        let b = rest.trailing_zeros();
        rest &= rest - 1;
        odd ^= (s >> b >> 1).count_ones() % 2 == 1;
    }
    sign_of(odd)
}

impl Extensor {
    pub fn zero(k: usize, step: usize) -> Result<Self> {
        if step > k {
            return Err(Error::StepOverflow { step, k });
        }
        if k > MAX_DIMENSION {
            return Err(Error::SizeLimit(format!("dimension {k} above {MAX_DIMENSION}")));
        }
        Ok(Extensor { k, step, coeffs: vec![Rational::zero(); 1 << k] })
    }

    pub fn scalar(k: usize, x: Rational) -> Self {
        let mut e = Extensor::zero(k, 0).expect("step 0");
        e.coeffs[0] = x;
        e
    }

    pub fn vector(v: &[Rational]) -> Result<Self> {
        let mut e = Extensor::zero(v.len(), 1)?;
        for (i, x) in v.iter().enumerate() {
            e.coeffs[1 << i] = x.clone();
        }
        Ok(e)
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Coefficient on e_{i1} ^ ... ^ e_{is} for increasing 0-based indices.
    pub fn coefficient(&self, indices: &[usize]) -> Rational {
        let mask = indices.iter().fold(0usize, |m, &i| m | 1 << i);
        self.coeffs[mask].clone()
    }

    /// Coefficients in lexicographic order of the basis monomials of this step.
    pub fn coordinates(&self) -> Vec<Rational> {
        let mut masks: Vec<usize> = (0..self.coeffs.len()).filter(|m| m.count_ones() as usize == self.step).collect();
        masks.sort_by_key(|&m| (0..self.k).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>());
        masks.into_iter().map(|m| self.coeffs[m].clone()).collect()
    }

    /// The value of a step-0 extensor.
    pub fn as_scalar(&self) -> Result<Rational> {
        if self.step != 0 {
            return Err(Error::NotScalar(self.step));
        }
        Ok(self.coeffs[0].clone())
    }

    /// The single coefficient of a step-k extensor: the bracket of its factors.
    pub fn bracket(&self) -> Result<Rational> {
        if self.step != self.k {
            return Err(Error::NotScalar(self.step));
        }
        Ok(self.coeffs[(1 << self.k) - 1].clone())
    }

    fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(m, c)| (m as u32, c))
    }

    fn same_space(&self, other: &Extensor) -> Result<()> {
        if self.k != other.k {
            return Err(Error::Parse(format!("extensors of dimensions {} and {}", self.k, other.k)));
        }
        Ok(())
    }

    /// Exterior product.
    pub fn join(&self, other: &Extensor) -> Result<Extensor> {
        self.same_space(other)?;
        let mut out = Extensor::zero(self.k, self.step + other.step)?;
        for (s, x) in self.terms() {
            for (t, y) in other.terms() {
                if s & t == 0 {
                    let v = x * y;
                    let slot = &mut out.coeffs[(s | t) as usize];
                    if merge_sign(s, t) > 0 {
                        *slot += v;
                    } else {
                        *slot -= v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Shuffle-product meet: for basis extensors e_S, e_T with S | T = [k], the factors of e_S
    /// outside T are bracketed with e_T and the common part S & T remains.
    pub fn meet(&self, other: &Extensor) -> Result<Extensor> {
        self.same_space(other)?;
        let (c, d, k) = (self.step, other.step, self.k);
        if c + d < k {
            return Err(Error::MeetUndefined { c, d, k });
        }
        let full: u32 = ((1u64 << k) - 1) as u32;
        let mut out = Extensor::zero(k, c + d - k)?;
        for (s, x) in self.terms() {
            for (t, y) in other.terms() {
                if s | t != full {
                    continue;
                }
                let first = s & !t;
                let common = s & t;
                let sign = merge_sign(first, common) * merge_sign(first, t);
                let v = x * y;
                let slot = &mut out.coeffs[common as usize];
                if sign > 0 {
                    *slot += v;
                } else {
                    *slot -= v;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, x: &Rational) -> Extensor {
        Extensor { k: self.k, step: self.step, coeffs: self.coeffs.iter().map(|c| c * x).collect() }
    }
}

/// Simple Grassmann-Cayley expression over edge atoms; n-ary nodes associate to the left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GCExpression {
    Atom(String),
    Join(Vec<GCExpression>),
    Meet(Vec<GCExpression>),
}

impl GCExpression {
    pub fn atom(id: &str) -> Self {
        GCExpression::Atom(id.to_string())
    }

    /// `"a"`, `{"join": [...]}` or `{"meet": [...]}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Ok(GCExpression::Atom(s.clone())),
            Value::Object(map) if map.len() == 1 => {
                let (op, args) = map.iter().next().expect("one entry");
                let Value::Array(items) = args else {
                    return Err(Error::Parse(format!("`{op}` needs a list of operands")));
                };
                if items.len() < 2 {
                    return Err(Error::Parse(format!("`{op}` needs at least two operands")));
                }
                let kids = items.iter().map(GCExpression::from_json).collect::<Result<Vec<_>>>()?;
                match op.as_str() {
                    "join" => Ok(GCExpression::Join(kids)),
                    "meet" => Ok(GCExpression::Meet(kids)),
                    _ => Err(Error::Parse(format!("unknown operator `{op}`"))),
                }
            }
            _ => Err(Error::Parse(format!("bad expression node {v}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            GCExpression::Atom(s) => Value::String(s.clone()),
            GCExpression::Join(k) => serde_json::json!({"join": k.iter().map(|e| e.to_json()).collect::<Vec<_>>()}),
            GCExpression::Meet(k) => serde_json::json!({"meet": k.iter().map(|e| e.to_json()).collect::<Vec<_>>()}),
        }
    }

    /// Atom ids in first-occurrence order.
    pub fn atoms(&self) -> Vec<String> {
        fn walk(e: &GCExpression, out: &mut Vec<String>) {
            match e {
                GCExpression::Atom(s) => {
                    if !out.contains(s) {
                        out.push(s.clone());
                    }
                }
                GCExpression::Join(k) | GCExpression::Meet(k) => k.iter().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Step of the value in dimension k, checking every node.
    pub fn step(&self, k: usize) -> Result<usize> {
        match self {
            GCExpression::Atom(_) => Ok(1),
            GCExpression::Join(kids) => {
                let mut s = 0;
                for c in kids {
                    s += c.step(k)?;
                    if s > k {
                        return Err(Error::StepOverflow { step: s, k });
                    }
                }
                Ok(s)
            }
            GCExpression::Meet(kids) => {
                let mut s = kids[0].step(k)?;
                for c in &kids[1..] {
                    let d = c.step(k)?;
                    if s + d < k {
                        return Err(Error::MeetUndefined { c: s, d, k });
                    }
                    s = s + d - k;
                }
                Ok(s)
            }
        }
    }
}

impl fmt::Display for GCExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GCExpression::Atom(s) => write!(f, "{s}"),
            GCExpression::Join(kids) => {
                if kids.iter().all(|c| matches!(c, GCExpression::Atom(_))) {
                    kids.iter().try_for_each(|c| write!(f, "{c}"))
                } else {
                    write!(f, "(")?;
                    for (i, c) in kids.iter().enumerate() {
                        if i > 0 {
                            write!(f, " v ")?;
                        }
                        write!(f, "{c}")?;
                    }
                    write!(f, ")")
                }
            }
            GCExpression::Meet(kids) => {
                write!(f, "(")?;
                for (i, c) in kids.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ^ ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Expression in a fixed dimension, as stored in certificate files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub k: usize,
    pub expr: GCExpression,
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let k = v
        .get("k")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("certificate needs an integer `k`".into()))? as usize;
    let expr = GCExpression::from_json(v.get("expr").ok_or_else(|| Error::Parse("certificate needs `expr`".into()))?)?;
    expr.step(k)?;
    Ok(Certificate { k, expr })
}

/// Bottom-up evaluation with atom labels from the labeling.
pub fn evaluate(expr: &GCExpression, labeling: &EdgeLabeling, k: usize) -> Result<Extensor> {
    match expr {
        GCExpression::Atom(id) => {
            let v = labeling.get(id).ok_or_else(|| Error::MissingLabel(id.clone()))?;
            if v.len() != k {
                return Err(Error::LabelLength { id: id.clone(), got: v.len(), expected: k });
            }
            Extensor::vector(v)
        }
        GCExpression::Join(kids) => {
            let mut acc = evaluate(&kids[0], labeling, k)?;
            for c in &kids[1..] {
                acc = acc.join(&evaluate(c, labeling, k)?)?;
            }
            Ok(acc)
        }
        GCExpression::Meet(kids) => {
            let mut acc = evaluate(&kids[0], labeling, k)?;
            for c in &kids[1..] {
                acc = acc.meet(&evaluate(c, labeling, k)?)?;
            }
            Ok(acc)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    /// expr = constant * polynomial at every trial.
    Equivalent { constant: Rational },
    /// Values disagree; `trial` is the first labeling that showed it.
    NotEquivalent { trial: usize },
}

/// Randomized identity test of expr against a multiple of bp over `trials` seeded labelings.
pub fn certify_equivalence(expr: &GCExpression, bp: &BracketPolynomial, trials: usize, seed: u64) -> Result<Equivalence> {
    let k = bp.k;
    let step = expr.step(k)?;
    if step != 0 {
        return Err(Error::NotScalar(step));
    }
    let mut names = expr.atoms();
    for n in &bp.names {
        if !names.contains(n) && !n.starts_with(crate::graph::TIE_PREFIX) {
            names.push(n.clone());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constant: Option<Rational> = None;
    for trial in 0..trials {
        let mut l = EdgeLabeling::new();
        for n in &names {
            l.insert(n, (0..k).map(|_| Rational::from_integer(rng.gen_range(-1_000_000i64..=1_000_000).into())).collect());
        }
        let x = evaluate(expr, &l, k)?.as_scalar()?;
        let y = bp.evaluate(&l)?;
        match (&constant, y.is_zero()) {
            (_, true) => {
                if !x.is_zero() {
                    return Ok(Equivalence::NotEquivalent { trial });
                }
            }
            (None, false) => {
                constant = Some(x / y);
            }
            (Some(c), false) => {
                if x != c * y {
                    return Ok(Equivalence::NotEquivalent { trial });
                }
            }
        }
    }
    let constant = match constant {
        Some(c) if !c.is_zero() => c,
        Some(_) => return Ok(Equivalence::NotEquivalent { trial: 0 }),
        None => Rational::one(),
    };
    Ok(Equivalence::Equivalent { constant })
}
