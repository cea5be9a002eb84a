//! File formats: edge lists, label files, feature CSV, and result writers.
//!
//! * edge list - one `u v` integer pair per line, 0-based, `#` comments
//! * labels - one integer per line
//! * features - plain numeric CSV, row i = node i, no header

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tensor::Tensor;
use crate::train::CurveTable;
use std::fmt::Write as _;
use std::path::Path;

pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let u = parse_id(it.next(), lineno)?;
        let v = parse_id(it.next(), lineno)?;
        if it.next().is_some() {
            return Err(Error::Data(format!(
                "edge list line {}: expected exactly two node ids",
                lineno + 1
            )));
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn parse_id(tok: Option<&str>, lineno: usize) -> Result<usize> {
    tok.ok_or_else(|| Error::Data(format!("edge list line {}: missing node id", lineno + 1)))?
        .parse()
        .map_err(|e| Error::Data(format!("edge list line {}: {e}", lineno + 1)))
}

pub fn load_edge_list(path: &Path) -> Result<Vec<(usize, usize)>> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

pub fn save_edge_list(path: &Path, g: &Graph) -> Result<()> {
    let mut out = String::new();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        labels.push(
            line.parse()
                .map_err(|e| Error::Data(format!("labels line {}: {e}", lineno + 1)))?,
        );
    }
    Ok(labels)
}

pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    parse_labels(&std::fs::read_to_string(path)?)
}

pub fn save_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::new();
    for l in labels {
        writeln!(out, "{l}").expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn parse_features_csv(text: &str) -> Result<Tensor> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::Data(format!("features line {}: {e}", lineno + 1)))?);
    }
    if rows.is_empty() {
        return Err(Error::Data("features file is empty".to_string()));
    }
    Tensor::from_rows(&rows)
}

pub fn load_features_csv(path: &Path) -> Result<Tensor> {
    parse_features_csv(&std::fs::read_to_string(path)?)
}

pub fn save_features_csv(path: &Path, x: &Tensor) -> Result<()> {
    let mut out = String::new();
    for i in 0..x.rows() {
        let parts: Vec<String> = x.row(i).iter().map(|v| format_f64(*v)).collect();
        writeln!(out, "{}", parts.join(",")).expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Shortest representation that round-trips through f64 parsing.
fn format_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains(['.', 'e', 'E', 'n', 'i']) {
        s.push_str(".0");
    }
    s
}

pub fn curve_to_csv(table: &CurveTable) -> String {
    let mut out = String::from("h_edge,h_node,h_class,h_agg_mod,model,acc_mean,acc_std\n");
    for row in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.h_edge, row.h_node, row.h_class, row.h_agg_mod, row.model, row.acc_mean, row.acc_std
        )
        .expect("string write");
    }
    out
}
