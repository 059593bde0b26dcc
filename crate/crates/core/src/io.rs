//! JSON interchange formats: graphs, embeddings and certificates use 1-based vertices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{BicoloredMultigraph, Color, FrameSignature, TieDown, TieLoop};
use crate::linalg::{format_rational, parse_rational, Rational};
use crate::rigidity::{bar_label_2d, bar_label_3d, EdgeLabeling};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct EdgeDoc {
    id: String,
    tail: usize,
    head: usize,
    #[serde(default = "black")]
    color: String,
}

fn black() -> String {
    "black".into()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct LoopDoc {
    id: String,
    vertex: usize,
    #[serde(default = "black")]
    color: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum TieDownDoc {
    Standard { vertex: usize },
    Generalized { loops: Vec<LoopDoc> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct GraphDoc {
    vertices: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tie_down: Option<TieDownDoc>,
}

/// A parsed graph file.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDocument {
    pub graph: BicoloredMultigraph,
    pub sig: FrameSignature,
    pub tie_down: Option<TieDown>,
}

impl GraphDocument {
    pub fn tie_down_or_default(&self) -> TieDown {
        self.tie_down.clone().unwrap_or(TieDown::standard(0))
    }
}

fn vertex(v: usize, n: usize, what: &str) -> Result<usize> {
    if v == 0 || v > n {
        return Err(Error::VertexOutOfRange { edge: what.to_string(), vertex: v, n });
    }
    Ok(v - 1)
}

pub fn parse_graph(text: &str) -> Result<GraphDocument> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let sig = match (doc.a, doc.b, doc.k) {
        (Some(a), Some(b), _) => FrameSignature::new(a, b)?,
        (None, None, Some(k)) => FrameSignature::body_bar(k)?,
        _ => return Err(Error::Parse("graph needs `a` and `b`, or `k`".into())),
    };
    let n = doc.vertices;
    let mut g = BicoloredMultigraph::new(n)?;
    for e in &doc.edges {
        let (u, v) = (vertex(e.tail, n, &e.id)?, vertex(e.head, n, &e.id)?);
        g.add_edge(&e.id, u, v, Color::parse(&e.color)?)?;
    }
    let tie_down = match doc.tie_down {
        None => None,
        Some(TieDownDoc::Standard { vertex: v }) => Some(TieDown::standard(vertex(v, n, "tie_down")?)),
        Some(TieDownDoc::Generalized { loops }) => Some(TieDown::Generalized {
            loops: loops
                .iter()
                .map(|l| {
                    Ok(TieLoop { id: l.id.clone(), vertex: vertex(l.vertex, n, &l.id)?, color: Color::parse(&l.color)? })
                })
                .collect::<Result<_>>()?,
        }),
    };
    if let Some(td) = &tie_down {
        td.validate(&g, sig)?;
    }
    Ok(GraphDocument { graph: g, sig, tie_down })
}

pub fn graph_to_value(g: &BicoloredMultigraph, sig: FrameSignature, tie_down: Option<&TieDown>) -> Value {
    let doc = GraphDoc {
        vertices: g.vertex_count(),
        a: Some(sig.a),
        b: Some(sig.b),
        k: None,
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeDoc { id: e.id.clone(), tail: e.tail + 1, head: e.head + 1, color: e.color.as_str().into() })
            .collect(),
        tie_down: tie_down.map(|td| match td {
            TieDown::Standard { vertex } => TieDownDoc::Standard { vertex: vertex + 1 },
            TieDown::Generalized { loops } => TieDownDoc::Generalized {
                loops: loops
                    .iter()
                    .map(|l| LoopDoc { id: l.id.clone(), vertex: l.vertex + 1, color: l.color.as_str().into() })
                    .collect(),
            },
        }),
    };
    serde_json::to_value(doc).expect("graph serializes")
}

pub fn serialize_graph(g: &BicoloredMultigraph, sig: FrameSignature, tie_down: Option<&TieDown>) -> String {
    serde_json::to_string_pretty(&graph_to_value(g, sig, tie_down)).expect("graph serializes")
}

pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        _ => Err(Error::Parse(format!("expected a rational, got {v}"))),
    }
}

fn vector_from_json(v: &Value, what: &str) -> Result<Vec<Rational>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("`{what}`: expected an array")))?
        .iter()
        .map(rational_from_json)
        .collect()
}

/// Parses `{"labels": ...}`, `{"bars_2d": ...}` or `{"bars_3d": ...}` (sections may be combined).
pub fn parse_embedding(text: &str) -> Result<EdgeLabeling> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| Error::Parse("embedding must be a JSON object".into()))?;
    let mut labeling = EdgeLabeling::new();
    if let Some(labels) = obj.get("labels") {
        let m = labels.as_object().ok_or_else(|| Error::Parse("`labels` must be an object".into()))?;
        for (id, vec) in m {
            labeling.insert(id, vector_from_json(vec, id)?);
        }
    }
    for (key, dim) in [("bars_2d", 2), ("bars_3d", 3)] {
        let Some(bars) = obj.get(key) else { continue };
        let m = bars.as_object().ok_or_else(|| Error::Parse(format!("`{key}` must be an object")))?;
        for (id, pts) in m {
            let pts = pts
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse(format!("bar `{id}` needs two points")))?;
            let p1 = vector_from_json(&pts[0], id)?;
            let p2 = vector_from_json(&pts[1], id)?;
            if p1.len() != dim || p2.len() != dim {
                return Err(Error::Parse(format!("bar `{id}` needs {dim}-dimensional points")));
            }
            let label = if dim == 2 { bar_label_2d(&p1, &p2) } else { bar_label_3d(&p1, &p2) };
            labeling.insert(id, label.map_err(|_| Error::CoincidentPoints(id.clone()))?);
        }
    }
    if let Some(tol) = obj.get("float_tolerance") {
        labeling.float_tolerance = tol.as_f64();
    }
    Ok(labeling)
}

pub fn labeling_to_value(l: &EdgeLabeling) -> Value {
    let labels: BTreeMap<&String, Vec<String>> =
        l.iter().map(|(id, v)| (id, v.iter().map(format_rational).collect())).collect();
    serde_json::json!({ "labels": labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: &str = r#"{"vertices": 3, "k": 3, "edges": [
        {"id": "a", "tail": 1, "head": 2}, {"id": "b", "tail": 2, "head": 1},
        {"id": "c", "tail": 2, "head": 3}, {"id": "d", "tail": 2, "head": 3},
        {"id": "e", "tail": 1, "head": 3, "color": "black"}, {"id": "f", "tail": 1, "head": 3}],
        "tie_down": {"kind": "standard", "vertex": 1}}"#;

    #[test]
    fn parses_graph_document() {
        let d = parse_graph(DT).unwrap();
        assert_eq!(d.sig, FrameSignature::new(1, 2).unwrap());
        assert_eq!(d.graph.edge_count(), 6);
        assert_eq!(d.tie_down, Some(TieDown::standard(0)));
        assert_eq!(d.graph.edge(1).tail, 0);
    }

    #[test]
    fn reports_bad_input() {
        assert!(matches!(parse_graph("{"), Err(Error::Parse(_))));
        let bad = DT.replace("\"head\": 3}, {\"id\": \"d\"", "\"head\": 4}, {\"id\": \"d\"");
        assert!(matches!(parse_graph(&bad), Err(Error::VertexOutOfRange { .. })));
        let dup = DT.replace("\"id\": \"b\"", "\"id\": \"a\"");
        assert!(matches!(parse_graph(&dup), Err(Error::DuplicateEdge(_))));
    }

    #[test]
    fn parses_embeddings() {
        let l = parse_embedding(r#"{"labels": {"a": ["0", "1/2", -1]}, "bars_2d": {"b": [[0, 0], [0, 1]]}}"#).unwrap();
        assert_eq!(l.get("a").unwrap()[1], crate::linalg::ratio(1, 2));
        assert_eq!(l.get("b").unwrap().len(), 3);
        assert!(matches!(parse_embedding(r#"{"bars_3d": {"x": [[0,0,0],[0,0,0]]}}"#), Err(Error::CoincidentPoints(_))));
    }

    fn arb_graph() -> impl proptest::strategy::Strategy<Value = (BicoloredMultigraph, FrameSignature)> {
        use proptest::prelude::*;
        (1usize..6, 1usize..4, 0usize..4, proptest::collection::vec((0usize..6, 0usize..6, any::<bool>()), 0..12))
            .prop_map(|(n, a, b, es)| {
                let mut g = BicoloredMultigraph::new(n).unwrap();
                for (i, (u, v, red)) in es.into_iter().enumerate() {
                    let c = if red { Color::Red } else { Color::Black };
                    g.add_edge(&format!("e{i}"), u % n, v % n, c).unwrap();
                }
                (g, FrameSignature::new(a, b).unwrap())
            })
    }

    proptest::proptest! {
        #[test]
        fn graph_round_trip((g, sig) in arb_graph()) {
            let td = TieDown::standard(g.vertex_count() - 1);
            let d = parse_graph(&serialize_graph(&g, sig, Some(&td))).unwrap();
            proptest::prop_assert_eq!(d.graph, g);
            proptest::prop_assert_eq!(d.sig, sig);
            proptest::prop_assert_eq!(d.tie_down, Some(td));
        }
    }
}
