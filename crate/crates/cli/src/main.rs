//! `cadrigid`: rigidity audit of body-and-cad constraint graphs.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cadrigid::bracket::{self, FanDiagram, FanGraph};
use cadrigid::factoring::{self, FactorGraph};
use cadrigid::gc;
use cadrigid::io::{self, GraphDocument};
use cadrigid::linalg::{format_rational, Rational};
use cadrigid::pebble::{self, SparsityVerdict, Verdict};
use cadrigid::rigidity::{self, EdgeLabeling, DEFAULT_TOLERANCE};
use cadrigid::{Error, TieDown};
use clap::{Parser, Subcommand};
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cadrigid", version, about = "Generic rigidity, pure-condition factoring and special positions of body-and-cad frameworks")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Standard tie-down at this vertex (1-based), overriding the file.
    #[arg(long, global = true, value_name = "VERTEX")]
    tie_down: Option<usize>,
    /// Evaluate determinants in floating point.
    #[arg(long, global = true)]
    float: bool,
    /// Relative zero tolerance for --float.
    #[arg(long, global = true, value_name = "EPS")]
    tol: Option<f64>,
    /// Stop fan enumeration after this many fans.
    #[arg(long, global = true, value_name = "N")]
    max_fans: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sparsity verdict and circuits of rejected edges.
    Check { graph: PathBuf },
    /// Factor graphs of the pure condition.
    Factor { graph: PathBuf },
    /// Fan diagrams of the tied-down graph.
    Fans { graph: PathBuf },
    /// Pure condition as a bracket polynomial.
    Bracket { graph: PathBuf },
    /// Pure-condition value at an embedding.
    Evaluate { graph: PathBuf, embedding: PathBuf },
    /// Per-factor special-position report at an embedding.
    CheckSpecial { graph: PathBuf, embedding: PathBuf },
    /// Evaluate a Grassmann-Cayley certificate at an embedding.
    GcEval { certificate: PathBuf, embedding: PathBuf },
    /// Stresses of the tied-down framework at an embedding.
    Stress { graph: PathBuf, embedding: PathBuf },
}

struct Output {
    json: Value,
    text: String,
    flagged: bool,
}

struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

type Run = std::result::Result<Output, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn at<T>(path: &Path, r: cadrigid::Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path, cli: &Cli) -> std::result::Result<(GraphDocument, TieDown), Failure> {
    let doc = at(path, io::parse_graph(&read(path)?))?;
    let td = match cli.tie_down {
        Some(0) => return Err(Failure("--tie-down is 1-based".into())),
        Some(v) => TieDown::standard(v - 1),
        None => doc.tie_down_or_default(),
    };
    at(path, td.validate(&doc.graph, doc.sig))?;
    Ok((doc, td))
}

fn load_embedding(path: &Path, cli: &Cli) -> std::result::Result<EdgeLabeling, Failure> {
    let mut l = at(path, io::parse_embedding(&read(path)?))?;
    if cli.float {
        l.float_tolerance = Some(cli.tol.or(l.float_tolerance).unwrap_or(DEFAULT_TOLERANCE));
    } else {
        l.float_tolerance = None;
    }
    Ok(l)
}

fn rigidity_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Tight => "generically rigid",
        Verdict::Sparse => "flexible",
        _ => "over-constrained",
    }
}

fn ids(g: &cadrigid::BicoloredMultigraph, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| g.edge(i).id.clone()).collect()
}

/// Verdict plus the fundamental circuit of every rejected edge.
fn sparsity(doc: &GraphDocument) -> cadrigid::Result<(SparsityVerdict, Vec<(String, Vec<String>)>)> {
    let (v, mut game) = pebble::classify(&doc.graph, doc.sig);
    let mut circuits = Vec::new();
    for &e in &v.rejected {
        let mut c = game.fundamental_circuit(e)?;
        if !c.contains(&e) {
            c.push(e);
            c.sort_unstable();
        }
        circuits.push((doc.graph.edge(e).id.clone(), ids(&doc.graph, &c)));
    }
    Ok((v, circuits))
}

fn circuits_json(circuits: &[(String, Vec<String>)]) -> Value {
    Value::Array(circuits.iter().map(|(e, c)| json!({"edge": e, "circuit": c})).collect())
}

fn circuits_text(circuits: &[(String, Vec<String>)]) -> String {
    circuits.iter().map(|(e, c)| format!("\n  rejected {e}: circuit {{{}}}", c.join(" "))).collect()
}

fn check(cli: &Cli, path: &Path) -> Run {
    let (doc, _) = load_graph(path, cli)?;
    let (v, circuits) = sparsity(&doc)?;
    Ok(Output {
        json: json!({
            "verdict": v.verdict.as_str(),
            "rigidity": rigidity_word(v.verdict),
            "signature": doc.sig.to_string(),
            "vertices": doc.graph.vertex_count(),
            "edges": doc.graph.edge_count(),
            "circuits": circuits_json(&circuits),
        }),
        text: format!("{} ({}){}", v.verdict.as_str(), doc.sig, circuits_text(&circuits)),
        flagged: !v.verdict.is_independent(),
    })
}

/// Early exit for commands that need a tight graph.
fn require_tight(doc: &GraphDocument) -> std::result::Result<Option<Output>, Failure> {
    let (v, circuits) = sparsity(doc)?;
    match v.verdict {
        Verdict::Tight => Ok(None),
        Verdict::Sparse => Err(Failure(format!("graph is {} ({}), not tight", v.verdict.as_str(), doc.sig))),
        _ => Ok(Some(Output {
            json: json!({
                "verdict": v.verdict.as_str(),
                "rigidity": rigidity_word(v.verdict),
                "circuits": circuits_json(&circuits),
            }),
            text: format!("{} ({}){}", v.verdict.as_str(), doc.sig, circuits_text(&circuits)),
            flagged: true,
        })),
    }
}

fn factor_summary(f: &FactorGraph) -> String {
    let frozen = if f.frozen.is_empty() {
        String::new()
    } else {
        format!(" + {} frozen", f.frozen.len())
    };
    format!("{{{}}} on {} vertices{frozen}", f.edge_ids().join(" "), f.graph.vertex_count())
}

fn factor(cli: &Cli, path: &Path) -> Run {
    let (doc, _) = load_graph(path, cli)?;
    if let Some(out) = require_tight(&doc)? {
        return Ok(out);
    }
    let dec = factoring::factor(&doc.graph, doc.sig)?;
    let mut text = format!("{} factor(s)", dec.factors.len());
    for (i, f) in dec.factors.iter().enumerate() {
        text.push_str(&format!("\n  {}: {}", i + 1, factor_summary(f)));
    }
    Ok(Output { json: dec.to_json(), text, flagged: false })
}

fn fan_json(f: &FanDiagram, fg: &FanGraph) -> Value {
    let sets = f.out_sets(fg.n);
    let m = bracket::fan_to_monomial(f, fg);
    json!({
        "sign": m.sign,
        "out": sets.iter().map(|s| s.iter().map(|&r| fg.rows[r].id.clone()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn fans(cli: &Cli, path: &Path) -> Run {
    let (doc, td) = load_graph(path, cli)?;
    if let Some(out) = require_tight(&doc)? {
        return Ok(out);
    }
    let fg = FanGraph::new(&doc.graph, doc.sig, &td)?;
    let seed = bracket::seed_fan(&fg)?;
    let mut list = Vec::new();
    let mut text = String::new();
    let mut sink = |f: &FanDiagram| {
        let sets = f.out_sets(fg.n);
        let line: Vec<String> = sets
            .iter()
            .enumerate()
            .map(|(v, s)| format!("{}:{}", v + 1, s.iter().map(|&r| fg.rows[r].id.as_str()).collect::<Vec<_>>().join("")))
            .collect();
        text.push_str(&format!("\n  {}", line.join(" ")));
        list.push(fan_json(f, &fg));
        true
    };
    let count = if fg.has_red_edges() {
        bracket::enumerate_ab_fans(&fg, seed, cli.max_fans, &mut sink)?
    } else {
        bracket::enumerate_fans(&fg, seed, cli.max_fans, &mut sink)?
    };
    let capped = cli.max_fans.is_some_and(|m| count >= m);
    let head = format!("{count} fan(s){}", if capped { " (capped)" } else { "" });
    Ok(Output { json: json!({"count": count, "capped": capped, "fans": list}), text: head + &text, flagged: false })
}

fn bracket_cmd(cli: &Cli, path: &Path) -> Run {
    let (doc, td) = load_graph(path, cli)?;
    if let Some(out) = require_tight(&doc)? {
        return Ok(out);
    }
    let bp = bracket::pure_condition_bracket_capped(&doc.graph, doc.sig, &td, cli.max_fans)?;
    let terms: Vec<Value> = bp
        .terms()
        .map(|(m, c)| {
            json!({
                "coefficient": c.to_string(),
                "brackets": m.iter().map(|b| b.iter().map(|&i| bp.names[i].clone()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let text = bp.to_string();
    Ok(Output { json: json!({"k": bp.k, "terms": terms, "polynomial": text}), text, flagged: false })
}

fn value_json(exact: Option<&Rational>, float: Option<(f64, bool)>) -> (Value, bool) {
    match (exact, float) {
        (Some(r), _) => (json!({"value": format_rational(r), "zero": r.is_zero()}), r.is_zero()),
        (None, Some((x, z))) => (json!({"value": x, "zero": z}), z),
        _ => unreachable!(),
    }
}

fn evaluate(cli: &Cli, graph: &Path, emb: &Path) -> Run {
    let (doc, td) = load_graph(graph, cli)?;
    let l = load_embedding(emb, cli)?;
    if let Some(out) = require_tight(&doc)? {
        return Ok(out);
    }
    let (v, zero) = if let Some(tol) = l.float_tolerance {
        let m = rigidity::build_matrix(&doc.graph, doc.sig, &l, Some(&td))?;
        value_json(None, Some(m.determinant_f64(tol)?))
    } else {
        value_json(Some(&rigidity::pure_condition_value(&doc.graph, doc.sig, &l, &td)?), None)
    };
    let text = format!("{}{}", v["value"], if zero { " (special position)" } else { "" });
    Ok(Output { json: v, text: text.replace('"', ""), flagged: zero })
}

fn factor_value(f: &FactorGraph, l: &EdgeLabeling) -> cadrigid::Result<(Value, bool)> {
    let m = f.matrix(l)?;
    Ok(match l.float_tolerance {
        Some(tol) => value_json(None, Some(m.determinant_f64(tol)?)),
        None => value_json(Some(&m.determinant()?), None),
    })
}

fn check_special(cli: &Cli, graph: &Path, emb: &Path) -> Run {
    let (doc, td) = load_graph(graph, cli)?;
    let l = load_embedding(emb, cli)?;
    if let Some(out) = require_tight(&doc)? {
        return Ok(out);
    }
    let dec = factoring::factor(&doc.graph, doc.sig)?;
    let values: Vec<(Value, bool)> =
        dec.factors.par_iter().map(|f| factor_value(f, &l)).collect::<cadrigid::Result<Vec<_>>>()?;
    let special = values.iter().any(|(_, z)| *z);
    let mut factors = Vec::new();
    let mut text = format!("{} ({})", rigidity_word(Verdict::Tight), doc.sig);
    for (i, (f, (v, z))) in dec.factors.iter().zip(&values).enumerate() {
        factors.push(json!({"edges": f.edge_ids(), "value": v["value"], "vanishes": z}));
        text.push_str(&format!(
            "\n  factor {}: {} value {}{}",
            i + 1,
            factor_summary(f),
            v["value"].to_string().replace('"', ""),
            if *z { "  VANISHES" } else { "" }
        ));
    }
    let mut report = json!({
        "verdict": Verdict::Tight.as_str(),
        "rigidity": rigidity_word(Verdict::Tight),
        "signature": doc.sig.to_string(),
        "factors": factors,
        "special_position": special,
    });
    if special {
        let mut exact = l.clone();
        exact.float_tolerance = None;
        let stresses = rigidity::stresses(&doc.graph, doc.sig, &exact, Some(&td))?;
        let mut support: Vec<String> = Vec::new();
        for s in &stresses {
            for id in s.support() {
                if !support.iter().any(|x| x == id) {
                    support.push(id.to_string());
                }
            }
        }
        let order: Vec<String> = doc.graph.edges().iter().map(|e| e.id.clone()).chain(td.loops(doc.sig).into_iter().map(|x| x.id)).collect();
        support.sort_by_key(|id| order.iter().position(|o| o == id));
        text.push_str(&format!("\n  special position: {} stress(es), support {{{}}}", stresses.len(), support.join(" ")));
        report["stress_dimension"] = json!(stresses.len());
        report["stress_support"] = json!(support);
    } else {
        text.push_str("\n  no special position");
    }
    Ok(Output { json: report, text, flagged: special })
}

fn gc_eval(cli: &Cli, cert: &Path, emb: &Path) -> Run {
    let c = at(cert, gc::parse_certificate(&read(cert)?))?;
    let l = load_embedding(emb, cli)?;
    let x = gc::evaluate(&c.expr, &l, c.k)?;
    if x.step() == 0 {
        let s = x.as_scalar()?;
        let zero = s.is_zero();
        let text = format!("{} = {}{}", c.expr, format_rational(&s), if zero { " (special position)" } else { "" });
        return Ok(Output { json: json!({"step": 0, "value": format_rational(&s), "zero": zero}), text, flagged: zero });
    }
    let coords: Vec<String> = x.coordinates().iter().map(format_rational).collect();
    Ok(Output {
        text: format!("{} = step-{} extensor ({})", c.expr, x.step(), coords.join(", ")),
        json: json!({"step": x.step(), "coordinates": coords, "zero": x.is_zero()}),
        flagged: false,
    })
}

fn stress(cli: &Cli, graph: &Path, emb: &Path) -> Run {
    let (doc, td) = load_graph(graph, cli)?;
    let mut l = load_embedding(emb, cli)?;
    l.float_tolerance = None;
    let tie = if doc.graph.edge_count() + doc.sig.k() == doc.sig.k() * doc.graph.vertex_count() { Some(&td) } else { None };
    let s = rigidity::stresses(&doc.graph, doc.sig, &l, tie)?;
    let list: Vec<Value> = s
        .iter()
        .map(|st| {
            Value::Object(
                st.weights.iter().filter(|(_, w)| !w.is_zero()).map(|(id, w)| (id.clone(), json!(format_rational(w)))).collect(),
            )
        })
        .collect();
    let mut text = format!("{} stress(es)", s.len());
    for st in &s {
        let parts: Vec<String> =
            st.weights.iter().filter(|(_, w)| !w.is_zero()).map(|(id, w)| format!("{id}={}", format_rational(w))).collect();
        text.push_str(&format!("\n  {}", parts.join(" ")));
    }
    Ok(Output { json: json!({"dimension": s.len(), "stresses": list}), text, flagged: !s.is_empty() })
}

fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Check { graph } => check(cli, graph),
        Command::Factor { graph } => factor(cli, graph),
        Command::Fans { graph } => fans(cli, graph),
        Command::Bracket { graph } => bracket_cmd(cli, graph),
        Command::Evaluate { graph, embedding } => evaluate(cli, graph, embedding),
        Command::CheckSpecial { graph, embedding } => check_special(cli, graph, embedding),
        Command::GcEval { certificate, embedding } => gc_eval(cli, certificate, embedding),
        Command::Stress { graph, embedding } => stress(cli, graph, embedding),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = std::env::var("CADRIGID_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(out) => {
            let body = if cli.json { serde_json::to_string_pretty(&out.json).expect("json") } else { out.text };
            // ignore EPIPE when piped into head
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            ExitCode::from(if out.flagged { 2 } else { 0 })
        }
        Err(Failure(msg)) => {
            if cli.json {
                println!("{}", json!({"error": msg}));
            }
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
