//! Rigidity matrices, pure-condition values, stresses and bar labels.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{BicoloredMultigraph, Color, FrameSignature, TieDown, TieLoop};
use crate::linalg::{self, Rational};

/// Edge id -> label vector p(e). Tie-down loops may be labelled too; missing loop labels of a
/// standard tie-down default to the standard basis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeLabeling {
    labels: BTreeMap<String, Vec<Rational>>,
    /// Relative tolerance for float-mode evaluation; `None` means exact mode.
    pub float_tolerance: Option<f64>,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

impl EdgeLabeling {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: &str, v: Vec<Rational>) {
        self.labels.insert(id.to_string(), v);
    }

    pub fn get(&self, id: &str) -> Option<&Vec<Rational>> {
        self.labels.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<Rational>)> {
        self.labels.iter()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn vector(&self, id: &str, k: usize) -> Result<&Vec<Rational>> {
        let v = self.labels.get(id).ok_or_else(|| Error::MissingLabel(id.to_string()))?;
        if v.len() != k {
            return Err(Error::LabelLength { id: id.to_string(), got: v.len(), expected: k });
        }
        Ok(v)
    }
}

pub fn basis_vector(k: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); k];
    v[i] = Rational::one();
    v
}

/// Row of the matrix: which vertex blocks it touches and its label.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub label: Vec<Rational>,
}

/// Dense tied-down (or untied) rigidity matrix with named rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidityMatrix {
    pub k: usize,
    pub n: usize,
    pub rows: Vec<Row>,
}

impl RigidityMatrix {
    pub fn from_rows(k: usize, n: usize, rows: Vec<Row>) -> Self {
        RigidityMatrix { k, n, rows }
    }

    pub fn dense(&self) -> Vec<Vec<Rational>> {
        let k = self.k;
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![Rational::zero(); k * self.n];
                for c in 0..k {
                    row[r.tail * k + c] += &r.label[c];
                    if r.head != r.tail {
                        row[r.head * k + c] -= &r.label[c];
                    }
                }
                row
            })
            .collect()
    }

    pub fn determinant(&self) -> Result<Rational> {
        linalg::determinant(&self.dense())
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.dense())
    }

    /// Determinant in floating point with the row-norm-relative zero test.
    pub fn determinant_f64(&self, tol: f64) -> Result<(f64, bool)> {
        let d: Vec<Vec<f64>> = self.dense().iter().map(|r| r.iter().map(linalg::to_f64).collect()).collect();
        let (det, norm) = linalg::determinant_f64(&d)?;
        Ok((det, norm == 0.0 || det.abs() <= tol * norm))
    }
}

/// Labels for the tie-down loops: given labels win, else the standard basis.
pub fn loop_labels(loops: &[TieLoop], labeling: &EdgeLabeling, k: usize) -> Result<Vec<Vec<Rational>>> {
    loops
        .iter()
        .enumerate()
        .map(|(i, l)| match labeling.get(&l.id) {
            Some(_) => labeling.vector(&l.id, k).cloned(),
            None => Ok(basis_vector(k, i % k)),
        })
        .collect()
}

fn check_red(id: &str, color: Color, v: &[Rational], sig: FrameSignature) -> Result<()> {
    if color == Color::Red && v[sig.a..].iter().any(|x| !x.is_zero()) {
        return Err(Error::RedLabel(id.to_string()));
    }
    Ok(())
}

/// M(G(p)) with tie-down rows appended when `tie_down` is given.
pub fn build_matrix(
    g: &BicoloredMultigraph,
    sig: FrameSignature,
    labeling: &EdgeLabeling,
    tie_down: Option<&TieDown>,
) -> Result<RigidityMatrix> {
    let k = sig.k();
    let mut rows = Vec::with_capacity(g.edge_count() + k);
    for e in g.edges() {
        let v = labeling.vector(&e.id, k)?;
        check_red(&e.id, e.color, v, sig)?;
        rows.push(Row { id: e.id.clone(), tail: e.tail, head: e.head, label: v.clone() });
    }
    if let Some(td) = tie_down {
        td.validate(g, sig)?;
        let loops = td.loops(sig);
        for (l, v) in loops.iter().zip(loop_labels(&loops, labeling, k)?) {
            rows.push(Row { id: l.id.clone(), tail: l.vertex, head: l.vertex, label: v });
        }
    }
    Ok(RigidityMatrix { k, n: g.vertex_count(), rows })
}

/// det M_T(G(p)); zero at special positions of tight graphs.
pub fn pure_condition_value(
    g: &BicoloredMultigraph,
    sig: FrameSignature,
    labeling: &EdgeLabeling,
    tie_down: &TieDown,
) -> Result<Rational> {
    build_matrix(g, sig, labeling, Some(tie_down))?.determinant()
}

/// Float evaluation: (value, is_zero under the relative tolerance).
pub fn pure_condition_value_f64(
    g: &BicoloredMultigraph,
    sig: FrameSignature,
    labeling: &EdgeLabeling,
    tie_down: &TieDown,
) -> Result<(f64, bool)> {
    let tol = labeling.float_tolerance.unwrap_or(DEFAULT_TOLERANCE);
    build_matrix(g, sig, labeling, Some(tie_down))?.determinant_f64(tol)
}

/// Left null vector of the rigidity matrix, indexed by its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Stress {
    pub weights: Vec<(String, Rational)>,
}

impl Stress {
    pub fn support(&self) -> Vec<&str> {
        self.weights.iter().filter(|(_, w)| !w.is_zero()).map(|(id, _)| id.as_str()).collect()
    }
}

/// Basis of the left null space of M_T(G(p)) (or M(G(p)) without a tie-down).
pub fn stresses(
    g: &BicoloredMultigraph,
    sig: FrameSignature,
    labeling: &EdgeLabeling,
    tie_down: Option<&TieDown>,
) -> Result<Vec<Stress>> {
    let m = build_matrix(g, sig, labeling, tie_down)?;
    Ok(matrix_stresses(&m))
}

pub fn matrix_stresses(m: &RigidityMatrix) -> Vec<Stress> {
    linalg::left_null_space(&m.dense())
        .into_iter()
        .map(|w| Stress { weights: m.rows.iter().map(|r| r.id.clone()).zip(w).collect() })
        .collect()
}

/// Homogeneous coordinates of the line through two points of the plane.
pub fn bar_label_2d(p1: &[Rational], p2: &[Rational]) -> Result<Vec<Rational>> {
    if p1 == p2 {
        return Err(Error::CoincidentPoints(String::new()));
    }
    let (x1, y1, x2, y2) = (&p1[0], &p1[1], &p2[0], &p2[1]);
    Ok(vec![y1 - y2, x2 - x1, x1 * y2 - x2 * y1])
}

/// Plücker coordinates (direction, moment) of the line through two points of space.
pub fn bar_label_3d(p: &[Rational], q: &[Rational]) -> Result<Vec<Rational>> {
    if p == q {
        return Err(Error::CoincidentPoints(String::new()));
    }
    Ok(vec![
        &q[0] - &p[0],
        &q[1] - &p[1],
        &q[2] - &p[2],
        &p[1] * &q[2] - &p[2] * &q[1],
        &p[2] * &q[0] - &p[0] * &q[2],
        &p[0] * &q[1] - &p[1] * &q[0],
    ])
}
