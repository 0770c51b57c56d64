//! JSON documents for function tables, tensors and partitions, plus DOT
//! export of representation graphs.
//!
//! Function table: `{"L": [...], "R": [...], "T": [...], "table": [[...], ...]}`
//! with `table[i][j]` a label of `T`. Tensor: `{"domain": "L"|"R"|"T", "n": k,
//! "values": [...]}` (dense, row-major) or the same with
//! `"entries": [{"v": [labels], "val": x}, ...]` (sparse). Labels may be JSON
//! strings or integers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domain::{FiniteDomain, FunctionTable, TensorFunction};
use crate::error::{Error, Result};
use crate::partition::{CyclicMinor, CyclicPartition, RepresentationGraph};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum Label {
    Text(String),
    Int(i64),
}

impl Label {
    fn text(&self) -> String {
        match self {
            Label::Text(s) => s.clone(),
            Label::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    #[serde(rename = "L")]
    left: Vec<Label>,
    #[serde(rename = "R")]
    right: Vec<Label>,
    #[serde(rename = "T")]
    target: Vec<Label>,
    table: Vec<Vec<Label>>,
}

#[derive(Debug, Deserialize, Serialize)]
struct Entry {
    v: Vec<Label>,
    val: i128,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TensorDoc {
    domain: String,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<i128>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<Entry>>,
}

#[derive(Debug, Deserialize, Serialize)]
struct MinorDoc {
    #[serde(rename = "A")]
    a: Vec<Label>,
    #[serde(rename = "B")]
    b: Vec<Label>,
    k: usize,
    #[serde(rename = "sigmaA")]
    sigma_a: Vec<usize>,
    #[serde(rename = "sigmaB")]
    sigma_b: Vec<usize>,
    #[serde(rename = "sigmaC")]
    sigma_c: Vec<Label>,
}

#[derive(Debug, Deserialize, Serialize)]
struct PartitionDoc {
    #[serde(default)]
    cost: Option<usize>,
    minors: Vec<MinorDoc>,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
}

fn domain(labels: &[Label], field: &str) -> Result<FiniteDomain> {
    FiniteDomain::new(labels.iter().map(Label::text)).map_err(|e| Error::Parse(format!("field {field:?}: {e}")))
}

fn lookup(dom: &FiniteDomain, label: &Label, path: &str) -> Result<usize> {
    let text = label.text();
    dom.index_of(&text).ok_or_else(|| Error::Parse(format!("{path}: unknown label {text:?}")))
}

pub fn parse_function_table(json: &str) -> Result<FunctionTable> {
    let doc: TableDoc = serde_json::from_str(json).map_err(parse_err)?;
    let left = domain(&doc.left, "L")?;
    let right = domain(&doc.right, "R")?;
    let target = domain(&doc.target, "T")?;
    if doc.table.len() != left.len() {
        return Err(Error::Parse(format!("field \"table\": {} rows, expected |L| = {}", doc.table.len(), left.len())));
    }
    let mut rows = Vec::with_capacity(doc.table.len());
    for (i, row) in doc.table.iter().enumerate() {
        if row.len() != right.len() {
            return Err(Error::Parse(format!("table[{i}]: {} columns, expected |R| = {}", row.len(), right.len())));
        }
        rows.push(row.iter().enumerate().map(|(j, l)| lookup(&target, l, &format!("table[{i}][{j}]"))).collect::<Result<_>>()?);
    }
    FunctionTable::new(left, right, target, rows)
}

pub fn function_table_to_json(f: &FunctionTable) -> String {
    let labels = |d: &FiniteDomain| d.labels().iter().cloned().map(Label::Text).collect::<Vec<_>>();
    let doc = TableDoc {
        left: labels(f.left()),
        right: labels(f.right()),
        target: labels(f.target()),
        table: (0..f.left().len())
            .map(|a| f.row(a).iter().map(|&t| Label::Text(f.target().labels()[t].clone())).collect())
            .collect(),
    };
    serde_json::to_string(&doc).expect("serializable")
}

/// Which domain of `f` a tensor is defined over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainRef {
    L,
    R,
    T,
}

impl DomainRef {
    pub fn resolve(self, f: &FunctionTable) -> &FiniteDomain {
        match self {
            DomainRef::L => f.left(),
            DomainRef::R => f.right(),
            DomainRef::T => f.target(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            DomainRef::L => "L",
            DomainRef::R => "R",
            DomainRef::T => "T",
        }
    }
}

/// Parses a tensor and resolves its domain against `f`. If `expected` is
/// given, the document must name that domain.
pub fn parse_tensor(json: &str, f: &FunctionTable, expected: Option<DomainRef>) -> Result<TensorFunction> {
    parse_tensor_on(json, f, expected).map(|(t, _)| t)
}

/// Like [`parse_tensor`], also returning the domain the document names.
pub fn parse_tensor_on(json: &str, f: &FunctionTable, expected: Option<DomainRef>) -> Result<(TensorFunction, DomainRef)> {
    let doc: TensorDoc = serde_json::from_str(json).map_err(parse_err)?;
    let which = match doc.domain.as_str() {
        "L" => DomainRef::L,
        "R" => DomainRef::R,
        "T" => DomainRef::T,
        other => return Err(Error::Parse(format!("field \"domain\": expected \"L\", \"R\" or \"T\", got {other:?}"))),
    };
    if let Some(e) = expected {
        if e != which {
            return Err(Error::Parse(format!("field \"domain\": expected {:?}, got {:?}", e.name(), which.name())));
        }
    }
    let dom = which.resolve(f).clone();
    let t = match (doc.values, doc.entries) {
        (Some(values), None) => TensorFunction::new(dom, doc.n, values).map_err(|e| Error::Parse(format!("field \"values\": {e}"))),
        (None, Some(entries)) => {
            let mut coords = Vec::with_capacity(entries.len());
            for (i, e) in entries.iter().enumerate() {
                if e.v.len() != doc.n {
                    return Err(Error::Parse(format!("entries[{i}].v: length {}, expected n = {}", e.v.len(), doc.n)));
                }
                let c = e
                    .v
                    .iter()
                    .enumerate()
                    .map(|(j, l)| lookup(&dom, l, &format!("entries[{i}].v[{j}]")))
                    .collect::<Result<Vec<_>>>()?;
                coords.push((c, e.val));
            }
            TensorFunction::from_entries(dom, doc.n, coords)
        }
        _ => Err(Error::Parse("exactly one of \"values\" or \"entries\" is required".into())),
    }?;
    Ok((t, which))
}

pub fn tensor_to_json(t: &TensorFunction, which: DomainRef) -> String {
    let doc = TensorDoc { domain: which.name().into(), n: t.arity(), values: Some(t.values().to_vec()), entries: None };
    serde_json::to_string(&doc).expect("serializable")
}

/// Labels of `v` resolved against `T`; `text` is comma separated.
pub fn parse_vector(text: &str, target: &FiniteDomain) -> Result<Vec<usize>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            let s = s.trim();
            target.index_of(s).ok_or_else(|| Error::Parse(format!("vector entry {s:?} is not a label of T")))
        })
        .collect()
}

pub fn partition_to_json(f: &FunctionTable, p: &CyclicPartition) -> String {
    let lab = |d: &FiniteDomain, xs: &[usize]| xs.iter().map(|&x| Label::Text(d.labels()[x].clone())).collect();
    let doc = PartitionDoc {
        cost: Some(p.cost()),
        minors: p
            .minors
            .iter()
            .map(|m| MinorDoc {
                a: lab(f.left(), &m.a),
                b: lab(f.right(), &m.b),
                k: m.k,
                sigma_a: m.sigma_a.clone(),
                sigma_b: m.sigma_b.clone(),
                sigma_c: lab(f.target(), &m.sigma_c),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

/// Parses a partition document. Labels must exist in `f`; the cyclic
/// identity and cover are not checked here.
pub fn parse_partition(json: &str, f: &FunctionTable) -> Result<CyclicPartition> {
    let doc: PartitionDoc = serde_json::from_str(json).map_err(parse_err)?;
    let mut minors = Vec::with_capacity(doc.minors.len());
    for (i, m) in doc.minors.iter().enumerate() {
        let side = |dom: &FiniteDomain, labels: &[Label], sig: &[usize], name: &str| -> Result<Vec<(usize, usize)>> {
            if labels.len() != sig.len() {
                return Err(Error::Parse(format!("minors[{i}]: {name} and sigma{name} differ in length")));
            }
            labels
                .iter()
                .zip(sig)
                .enumerate()
                .map(|(j, (l, &s))| Ok((lookup(dom, l, &format!("minors[{i}].{name}[{j}]"))?, s)))
                .collect()
        };
        let a = side(f.left(), &m.a, &m.sigma_a, "A")?;
        let b = side(f.right(), &m.b, &m.sigma_b, "B")?;
        let sc = m
            .sigma_c
            .iter()
            .enumerate()
            .map(|(j, l)| lookup(f.target(), l, &format!("minors[{i}].sigmaC[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        if sc.len() != m.k {
            return Err(Error::Parse(format!("minors[{i}]: sigmaC has {} entries, k = {}", sc.len(), m.k)));
        }
        minors.push(CyclicMinor::from_parts(a, b, sc));
    }
    Ok(CyclicPartition::new(minors))
}

/// Graphviz rendering; vertices are labels of `T`, edges carry their `R`
/// preimages.
pub fn graph_to_dot(f: &FunctionTable, g: &RepresentationGraph) -> String {
    let t = f.target().labels();
    let r = f.right().labels();
    let mut out = String::from("digraph G {\n");
    for &v in &g.vertices {
        let _ = writeln!(out, "  v{v} [label={:?}];", t[v]);
    }
    for &e in &g.edges {
        let cols: Vec<&str> = g.preimages_of(e).unwrap_or(&[]).iter().map(|&c| r[c].as_str()).collect();
        let _ = writeln!(out, "  v{} -> v{} [label={:?}];", e.0, e.1, cols.join(","));
    }
    out.push_str("}\n");
    out
}
