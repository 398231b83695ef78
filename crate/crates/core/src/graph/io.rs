//! Edge-list (`src,dst,weight`) and dense matrix CSV files.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{TrustMatrix, UndirectedGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Writes each undirected edge once (`src < dst`, weight 1), then one
/// `(i, i)` row per node when self-loops are on.
pub fn write_graph<W: Write>(g: &UndirectedGraph, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (src, dst) in g.edges() {
        out.serialize(EdgeRecord { src, dst, weight: 1.0 })?;
    }
    if g.has_self_loops() {
        for i in 0..g.n() {
            out.serialize(EdgeRecord { src: i, dst: i, weight: 1.0 })?;
        }
    }
    if g.edge_count() == 0 && !(g.has_self_loops() && g.n() > 0) {
        out.write_record(["src", "dst", "weight"])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an undirected edge list. `n` defaults to the largest index + 1.
/// Reverse duplicates (`u,v` and `v,u`) collapse into one edge; self-loops
/// must be listed for every node or for none.
pub fn read_graph<R: Read>(r: R, n: Option<usize>) -> Result<UndirectedGraph> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut edges = Vec::new();
    let mut loops = Vec::new();
    for rec in rdr.deserialize() {
        let e: EdgeRecord = rec?;
        if !(e.weight > 0.0) {
            return Err(Error::param("weight", format!("edge ({}, {}) has non-positive weight", e.src, e.dst)));
        }
        if e.src == e.dst {
            loops.push(e.src);
        } else {
            edges.push((e.src.min(e.dst), e.src.max(e.dst)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    loops.sort_unstable();
    loops.dedup();
    let max_idx = edges.iter().map(|e| e.1).chain(loops.iter().copied()).max();
    let n = n.unwrap_or(max_idx.map_or(0, |m| m + 1));
    let self_loops = match loops.len() {
        0 => false,
        k if k == n => true,
        k => return Err(Error::param("edges", format!("self-loops on {k} of {n} nodes; expected all or none"))),
    };
    UndirectedGraph::from_edges(n, &edges, self_loops)
}

/// Non-zero entries `A_ij` as `src = i, dst = j`.
pub fn write_trust_edges<W: Write>(a: &TrustMatrix, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for i in 0..a.n() {
        for &(j, weight) in a.row(i) {
            out.serialize(EdgeRecord { src: i, dst: j, weight })?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Dense matrix with a header of column indices.
pub fn write_dense<W: Write>(a: &TrustMatrix, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record((0..a.n()).map(|j| j.to_string()))?;
    for row in a.as_slice().chunks(a.n()) {
        out.write_record(row.iter().map(|x| x.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dense<R: Read>(r: R) -> Result<TrustMatrix> {
    let mut rdr = csv::Reader::from_reader(r);
    let n = rdr.headers()?.len();
    let mut values = Vec::with_capacity(n * n);
    for rec in rdr.records() {
        for field in rec?.iter() {
            values.push(field.trim().parse::<f64>().map_err(|e| Error::param("matrix", e.to_string()))?);
        }
    }
    TrustMatrix::from_dense(n, values)
}
