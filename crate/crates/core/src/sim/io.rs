//! Dataset files.
//!
//! Newline-delimited JSON: a header record followed by one record per graph.
//!
//! ```text
//! {"record":"header","N":5,"F":2,"S":0,"T":3,"directed":false,"generator":{"kind":"pmlds",...}}
//! {"t":0,"N":5,"F":2,"X":[...],"A":[...]}
//! ...
//! ```
//!
//! `X` is the row-major `N × F` feature matrix, `A` the row-major `N × N`
//! adjacency, and `E` (only when `S > 0`) the row-major `N × N × S` edge
//! attribute tensor. Floats are written in shortest round-trip form.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GeneratorConfig;
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeAttributes, GraphSequence};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    record: String,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "F")]
    f: usize,
    #[serde(rename = "S", default)]
    s: usize,
    #[serde(rename = "T")]
    t: usize,
    directed: bool,
    generator: Option<GeneratorConfig>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    t: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "F")]
    f: usize,
    #[serde(rename = "X")]
    x: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<u8>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    e: Option<Vec<f64>>,
}

pub fn write_sequence<W: Write>(seq: &GraphSequence, mut w: W) -> Result<()> {
    let first = seq.graphs().first();
    let header = Header {
        record: "header".into(),
        n: first.map_or(0, |g| g.n_nodes()),
        f: first.map_or(0, |g| g.n_features()),
        s: first.map_or(0, |g| g.edge_attribute_dim()),
        t: seq.len(),
        directed: first.is_some_and(|g| g.is_directed()),
        generator: seq.origin().cloned(),
    };
    serde_json::to_writer(&mut w, &header).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    for (t, g) in seq.graphs().iter().enumerate() {
        let rec = Record {
            t,
            n: g.n_nodes(),
            f: g.n_features(),
            x: g.features().to_vec(),
            a: g.adjacency().to_vec(),
            e: g.edge_attributes().map(|e| e.data.clone()),
        };
        serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sequence<R: Read>(r: R) -> Result<GraphSequence> {
    let mut lines = BufReader::new(r).lines();
    let header_line = lines.next().ok_or_else(|| Error::parse(1, "missing header record"))??;
    let header: Header = serde_json::from_str(&header_line).map_err(|e| Error::parse(1, e.to_string()))?;
    if header.record != "header" {
        return Err(Error::parse(1, format!("expected header record, found {:?}", header.record)));
    }
    let mut graphs = Vec::with_capacity(header.t);
    for (idx, line) in lines.enumerate() {
        let record_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::parse(record_no, e.to_string()))?;
        if rec.t != graphs.len() {
            return Err(Error::parse(record_no, format!("expected t = {}, found {}", graphs.len(), rec.t)));
        }
        if rec.n != header.n || rec.f != header.f {
            return Err(Error::parse(record_no, "graph dimensions disagree with header"));
        }
        let edge_attributes = match (header.s, rec.e) {
            (0, None) => None,
            (s, Some(data)) if s > 0 => Some(EdgeAttributes { dim: s, data }),
            _ => return Err(Error::parse(record_no, "edge attributes disagree with header")),
        };
        let g = AttributedGraph::with_options(rec.n, rec.f, rec.x, rec.a, edge_attributes, header.directed)
            .map_err(|e| Error::parse(record_no, e.to_string()))?;
        graphs.push(g);
    }
    if graphs.len() != header.t {
        return Err(Error::parse(
            graphs.len() + 2,
            format!("header announces {} graphs, file holds {}", header.t, graphs.len()),
        ));
    }
    GraphSequence::with_origin(graphs, header.generator)
}

pub fn save_sequence(seq: &GraphSequence, path: impl AsRef<Path>) -> Result<()> {
    write_sequence(seq, BufWriter::new(File::create(path)?))
}

pub fn load_sequence(path: impl AsRef<Path>) -> Result<GraphSequence> {
    read_sequence(File::open(path)?)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

/// CSV export with columns `t,N,F,X,A`; matrices are space-separated
/// row-major lists.
pub fn write_csv<W: Write>(seq: &GraphSequence, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "N", "F", "X", "A"])?;
    for (t, g) in seq.graphs().iter().enumerate() {
        out.write_record([
            t.to_string(),
            g.n_nodes().to_string(),
            g.n_features().to_string(),
            join(g.features()),
            join(g.adjacency()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn export_csv(seq: &GraphSequence, path: impl AsRef<Path>) -> Result<()> {
    write_csv(seq, BufWriter::new(File::create(path)?))
}
