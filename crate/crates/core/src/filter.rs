//! Graph filter operators: affinity matrices, Laplacians, and their
//! renormalized variants, all stored row-compressed.
//!
//! Low-pass kinds are the affinity matrices A_rw = D^-1 A, A_sym =
//! D^-1/2 A D^-1/2 and their renormalized versions built from A+I and D+I.
//! High-pass kinds are complements I - op. Complements share the base
//! operator's sparsity pattern (plus the diagonal) and negate its values, so
//! a low/high pair of the same base kind sums to the identity entry-wise
//! exactly - the perfect reconstruction property the channel-mixing layers
//! rely on.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Identity,
    Arw,
    Asym,
    ArwHat,
    AsymHat,
    Lrw,
    Lsym,
    LrwHat,
    LsymHat,
    HighPassOf(Box<FilterKind>),
}

impl FilterKind {
    /// The complementary operator `I - self`, normalized so that taking the
    /// complement twice returns the original kind.
    pub fn complement(&self) -> FilterKind {
        match self {
            FilterKind::HighPassOf(inner) => (**inner).clone(),
            FilterKind::Arw => FilterKind::Lrw,
            FilterKind::Lrw => FilterKind::Arw,
            FilterKind::Asym => FilterKind::Lsym,
            FilterKind::Lsym => FilterKind::Asym,
            FilterKind::ArwHat => FilterKind::LrwHat,
            FilterKind::LrwHat => FilterKind::ArwHat,
            FilterKind::AsymHat => FilterKind::LsymHat,
            FilterKind::LsymHat => FilterKind::AsymHat,
            other => FilterKind::HighPassOf(Box::new(other.clone())),
        }
    }

    /// True for the renormalized kinds that add a self-loop before
    /// normalizing, which keeps isolated nodes well-defined.
    pub fn handles_isolated_nodes(&self) -> bool {
        match self {
            FilterKind::Identity | FilterKind::ArwHat | FilterKind::AsymHat => true,
            FilterKind::LrwHat | FilterKind::LsymHat => true,
            FilterKind::HighPassOf(inner) => inner.handles_isolated_nodes(),
            _ => false,
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterKind::Identity => write!(f, "identity"),
            FilterKind::Arw => write!(f, "arw"),
            FilterKind::Asym => write!(f, "asym"),
            FilterKind::ArwHat => write!(f, "arw_hat"),
            FilterKind::AsymHat => write!(f, "asym_hat"),
            FilterKind::Lrw => write!(f, "lrw"),
            FilterKind::Lsym => write!(f, "lsym"),
            FilterKind::LrwHat => write!(f, "lrw_hat"),
            FilterKind::LsymHat => write!(f, "lsym_hat"),
            FilterKind::HighPassOf(k) => write!(f, "hp:{k}"),
        }
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(base) = s.strip_prefix("hp:") {
            return Ok(FilterKind::HighPassOf(Box::new(base.parse()?)));
        }
        match s {
            "identity" => Ok(FilterKind::Identity),
            "arw" => Ok(FilterKind::Arw),
            "asym" => Ok(FilterKind::Asym),
            "arw_hat" => Ok(FilterKind::ArwHat),
            "asym_hat" => Ok(FilterKind::AsymHat),
            "lrw" => Ok(FilterKind::Lrw),
            "lsym" => Ok(FilterKind::Lsym),
            "lrw_hat" => Ok(FilterKind::LrwHat),
            "lsym_hat" => Ok(FilterKind::LsymHat),
            other => Err(Error::InvalidParameter {
                name: "filter",
                reason: format!("unknown filter kind `{other}`"),
            }),
        }
    }
}

/// Square sparse matrix, row-compressed with sorted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.offsets[i], self.offsets[i + 1]);
        (&self.cols[s..e], &self.vals[s..e])
    }

    /// Raw 0/1 adjacency of `g` (no diagonal). Used by the structure channel.
    pub fn adjacency(g: &Graph) -> CsrMatrix {
        CsrMatrix {
            n: g.num_nodes(),
            offsets: g.row_offsets().to_vec(),
            cols: g.col_indices().to_vec(),
            vals: vec![1.0; g.col_indices().len()],
        }
    }

    /// Sparse-dense product `self @ x`.
    pub fn spmm(&self, x: &Tensor) -> Result<Tensor> {
        if x.rows() != self.n {
            return Err(Error::ShapeMismatch {
                op: "spmm",
                expected: format!("{} rows", self.n),
                got: format!("{}", x.rows()),
            });
        }
        let f = x.cols();
        let mut out = Tensor::zeros(self.n, f);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let orow = out.row_mut(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let xrow = x.row(j);
                for (o, &xv) in orow.iter_mut().zip(xrow) {
                    *o += v * xv;
                }
            }
        }
        Ok(out)
    }

    /// Transposed sparse-dense product `self^T @ x`.
    pub fn spmm_t(&self, x: &Tensor) -> Result<Tensor> {
        if x.rows() != self.n {
            return Err(Error::ShapeMismatch {
                op: "spmm_t",
                expected: format!("{} rows", self.n),
                got: format!("{}", x.rows()),
            });
        }
        let f = x.cols();
        let mut out = Tensor::zeros(self.n, f);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let xrow = x.row(i).to_vec();
            for (&j, &v) in cols.iter().zip(vals) {
                let orow = out.row_mut(j);
                for (o, &xv) in orow.iter_mut().zip(&xrow) {
                    *o += v * xv;
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Tensor {
        let mut out = Tensor::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out.set(i, j, out.get(i, j) + v);
            }
        }
        out
    }

    fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> CsrMatrix {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        CsrMatrix {
            n,
            offsets,
            cols,
            vals,
        }
    }
}

/// A sparse N x N graph filter tagged with its kind.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOperator {
    kind: FilterKind,
    mat: CsrMatrix,
}

impl FilterOperator {
    pub fn kind(&self) -> &FilterKind {
        &self.kind
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.mat
    }

    pub fn n(&self) -> usize {
        self.mat.n
    }

    pub fn spmm(&self, x: &Tensor) -> Result<Tensor> {
        self.mat.spmm(x)
    }

    pub fn to_dense(&self) -> Tensor {
        self.mat.to_dense()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.mat.n)
            .map(|i| self.mat.row(i).1.iter().sum())
            .collect()
    }
}

/// Build the filter operator of the requested kind for `g`.
///
/// Non-renormalized kinds reject isolated nodes (the normalization would
/// divide by zero); the hat kinds give isolated nodes a weight-1 self-loop.
pub fn make_filter(g: &Graph, kind: &FilterKind) -> Result<FilterOperator> {
    let n = g.num_nodes();
    let mat = match kind {
        FilterKind::Identity => identity_csr(n),
        FilterKind::Arw => affinity(g, false, false)?,
        FilterKind::Asym => affinity(g, true, false)?,
        FilterKind::ArwHat => affinity(g, false, true)?,
        FilterKind::AsymHat => affinity(g, true, true)?,
        FilterKind::Lrw => complement_csr(&affinity(g, false, false)?),
        FilterKind::Lsym => complement_csr(&affinity(g, true, false)?),
        FilterKind::LrwHat => complement_csr(&affinity(g, false, true)?),
        FilterKind::LsymHat => complement_csr(&affinity(g, true, true)?),
        FilterKind::HighPassOf(base) => complement_csr(&make_filter(g, base)?.mat),
    };
    Ok(FilterOperator {
        kind: kind.clone(),
        mat,
    })
}

fn identity_csr(n: usize) -> CsrMatrix {
    CsrMatrix {
        n,
        offsets: (0..=n).collect(),
        cols: (0..n).collect(),
        vals: vec![1.0; n],
    }
}

/// Row-normalized or symmetric-normalized affinity. `renormalized` adds the
/// self-loop (A+I, D+I) first.
fn affinity(g: &Graph, symmetric: bool, renormalized: bool) -> Result<CsrMatrix> {
    let n = g.num_nodes();
    let context = match (symmetric, renormalized) {
        (false, false) => "A_rw",
        (true, false) => "A_sym",
        (false, true) => "A_rw_hat",
        (true, true) => "A_sym_hat",
    };
    let mut inv = vec![0.0f64; n];
    for v in 0..n {
        let d = g.degree(v) + usize::from(renormalized);
        if d == 0 {
            return Err(Error::IsolatedNode {
                node: v,
                context: context.to_string(),
            });
        }
        inv[v] = if symmetric {
            1.0 / (d as f64).sqrt()
        } else {
            1.0 / d as f64
        };
    }
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(g.degree(i) + 1);
        let mut pushed_diag = !renormalized;
        for &j in g.neighbors(i) {
            if !pushed_diag && j > i {
                row.push((i, diag_val(inv[i], symmetric)));
                pushed_diag = true;
            }
            let v = if symmetric {
                inv[i] * inv[j]
            } else {
                inv[i]
            };
            row.push((j, v));
        }
        if !pushed_diag {
            row.push((i, diag_val(inv[i], symmetric)));
        }
        rows.push(row);
    }
    Ok(CsrMatrix::from_rows(n, rows))
}

fn diag_val(inv: f64, symmetric: bool) -> f64 {
    if symmetric {
        inv * inv
    } else {
        inv
    }
}

/// `I - m`, sharing m's sparsity pattern plus the diagonal.
fn complement_csr(m: &CsrMatrix) -> CsrMatrix {
    let n = m.n;
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let (cols, vals) = m.row(i);
        let mut row = Vec::with_capacity(cols.len() + 1);
        let mut pushed_diag = false;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                row.push((i, 1.0 - v));
                pushed_diag = true;
            } else {
                if !pushed_diag && j > i {
                    row.push((i, 1.0));
                    pushed_diag = true;
                }
                row.push((j, -v));
            }
        }
        if !pushed_diag {
            row.push((i, 1.0));
        }
        rows.push(row);
    }
    CsrMatrix::from_rows(n, rows)
}
