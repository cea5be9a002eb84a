//! Homophily, similarity and distinguishability metrics on labeled graphs.
//!
//! Besides the classical edge/node/class homophily ratios, this module
//! implements the post-aggregation similarity analysis: the similarity
//! matrix S(f, X) = (fX)(fX)^T, the aggregation similarity score (the
//! fraction of nodes whose mean same-class similarity row dominates the
//! cross-class mean), its [2s-1]_+ rescaling, the aggregation homophily
//! (X := Z), and the diversification distinguishability value computed from
//! the high-pass complement I - f.
//!
//! Scores never materialize the N x N similarity matrix. With G = fX,
//!
//!   Mean_u { S_vu : u in class c } = < G_v , mean of G rows in class c >
//!
//! is an exact algebraic identity, so per-class centroids of G reduce the
//! cost from O(N^2 F) to O(N F C).

use crate::error::{Error, Result};
use crate::filter::{make_filter, FilterKind, FilterOperator};
use crate::graph::Graph;
use crate::labels::LabelEncoding;
use crate::tensor::{dot, Tensor};
use serde::{Deserialize, Serialize};

/// Flat bundle of every metric this module computes for one graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub h_edge: f64,
    pub h_node: f64,
    pub h_class: f64,
    pub h_agg: f64,
    pub h_agg_mod: f64,
    pub s_agg_features: f64,
    pub s_agg_features_mod: f64,
    pub dd_value: f64,
    pub h_node_per_node: Vec<f64>,
    pub dd_flags: Vec<bool>,
}

/// Proportion of edges connecting two same-class nodes, each undirected edge
/// counted once.
pub fn edge_homophily(g: &Graph, z: &LabelEncoding) -> Result<f64> {
    check_nodes(g, z)?;
    if g.num_edges() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let intra = g
        .edges()
        .filter(|&(u, v)| z.class_of(u) == z.class_of(v))
        .count();
    Ok(intra as f64 / g.num_edges() as f64)
}

/// Mean same-label-neighbor fraction, plus the per-node values.
pub fn node_homophily(g: &Graph, z: &LabelEncoding) -> Result<(f64, Vec<f64>)> {
    check_nodes(g, z)?;
    let mut per_node = Vec::with_capacity(g.num_nodes());
    for v in 0..g.num_nodes() {
        let d = g.degree(v);
        if d == 0 {
            return Err(Error::IsolatedNode {
                node: v,
                context: "node homophily".to_string(),
            });
        }
        let same = g
            .neighbors(v)
            .iter()
            .filter(|&&u| z.class_of(u) == z.class_of(v))
            .count();
        per_node.push(same as f64 / d as f64);
    }
    let mean = per_node.iter().sum::<f64>() / per_node.len() as f64;
    Ok((mean, per_node))
}

/// [`node_homophily`] over the non-isolated nodes only; isolated nodes carry
/// NaN in the per-node vector and are skipped by the mean. Generators do not
/// enforce connectivity, so curve experiments use this variant.
pub fn node_homophily_lenient(g: &Graph, z: &LabelEncoding) -> Result<(f64, Vec<f64>)> {
    check_nodes(g, z)?;
    Ok(masked_node_homophily(g, z))
}

/// Class-balanced homophily: (1/(C-1)) sum_k [h_k - N_k/N]_+ where h_k is the
/// same-class edge-endpoint fraction of class k, degree-weighted.
pub fn class_homophily(g: &Graph, z: &LabelEncoding) -> Result<f64> {
    check_nodes(g, z)?;
    z.require_metric_ready()?;
    if g.num_edges() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let c = z.num_classes();
    let n = g.num_nodes() as f64;
    let mut same = vec![0usize; c];
    let mut deg = vec![0usize; c];
    for v in 0..g.num_nodes() {
        let cv = z.class_of(v);
        deg[cv] += g.degree(v);
        same[cv] += g
            .neighbors(v)
            .iter()
            .filter(|&&u| z.class_of(u) == cv)
            .count();
    }
    let mut acc = 0.0;
    for k in 0..c {
        if deg[k] == 0 {
            return Err(Error::ZeroDegreeClass(k));
        }
        let h_k = same[k] as f64 / deg[k] as f64;
        acc += (h_k - z.class_sizes()[k] as f64 / n).max(0.0);
    }
    Ok(acc / (c - 1) as f64)
}

/// Apply the filter of `kind` to `x` without building the sparse operator
/// when a cheaper exact route exists.
///
/// Row-normalized kinds aggregate by summing neighbor rows first and dividing
/// once, and high-pass kinds subtract that result from `x`. This keeps exact
/// cancellations exact: a node whose neighborhood is pure gets a true zero
/// high-pass row, which the distinguishability conditions compare against
/// zero with no tolerance.
pub fn filtered_features(g: &Graph, x: &Tensor, kind: &FilterKind) -> Result<Tensor> {
    if x.rows() != g.num_nodes() {
        return Err(Error::ShapeMismatch {
            op: "filtered_features",
            expected: format!("{} rows", g.num_nodes()),
            got: format!("{}", x.rows()),
        });
    }
    match kind {
        FilterKind::Identity => Ok(x.clone()),
        FilterKind::Arw => mean_aggregate(g, x, false),
        FilterKind::ArwHat => mean_aggregate(g, x, true),
        FilterKind::Lrw => subtract_from(x, &filtered_features(g, x, &FilterKind::Arw)?),
        FilterKind::LrwHat => subtract_from(x, &filtered_features(g, x, &FilterKind::ArwHat)?),
        FilterKind::Lsym => subtract_from(x, &filtered_features(g, x, &FilterKind::Asym)?),
        FilterKind::LsymHat => subtract_from(x, &filtered_features(g, x, &FilterKind::AsymHat)?),
        FilterKind::HighPassOf(base) => subtract_from(x, &filtered_features(g, x, base)?),
        sym => make_filter(g, sym)?.spmm(x),
    }
}

fn mean_aggregate(g: &Graph, x: &Tensor, with_self_loop: bool) -> Result<Tensor> {
    let f = x.cols();
    let mut out = Tensor::zeros(g.num_nodes(), f);
    for v in 0..g.num_nodes() {
        let d = g.degree(v) + usize::from(with_self_loop);
        if d == 0 {
            return Err(Error::IsolatedNode {
                node: v,
                context: "A_rw".to_string(),
            });
        }
        let orow = out.row_mut(v);
        if with_self_loop {
            orow.copy_from_slice(x.row(v));
        }
        for &u in g.neighbors(v) {
            for (o, &xv) in orow.iter_mut().zip(x.row(u)) {
                *o += xv;
            }
        }
        let inv = d as f64;
        for o in orow.iter_mut() {
            *o /= inv;
        }
    }
    Ok(out)
}

fn subtract_from(x: &Tensor, agg: &Tensor) -> Result<Tensor> {
    let mut out = x.clone();
    for (o, a) in out.data_mut().iter_mut().zip(agg.data()) {
        *o -= a;
    }
    Ok(out)
}

/// Per-node same-class and cross-class mean similarity rows of S = G G^T,
/// streamed through class centroids of G.
fn class_mean_similarities(gmat: &Tensor, z: &LabelEncoding) -> Result<(Vec<f64>, Vec<f64>)> {
    z.require_metric_ready()?;
    let n = gmat.rows();
    let f = gmat.cols();
    if f == 0 {
        return Err(Error::InvalidParameter {
            name: "features",
            reason: "feature dimension is zero".to_string(),
        });
    }
    let c = z.num_classes();
    // Class sums of G rows; centroid_c = sums[c] / N_c.
    let mut sums = Tensor::zeros(c, f);
    for v in 0..n {
        let cv = z.class_of(v);
        let srow = sums.row_mut(cv);
        for (s, &gv) in srow.iter_mut().zip(gmat.row(v)) {
            *s += gv;
        }
    }
    let mut total = vec![0.0f64; f];
    for cc in 0..c {
        for (t, &s) in total.iter_mut().zip(sums.row(cc)) {
            *t += s;
        }
    }
    let mut same = Vec::with_capacity(n);
    let mut cross = Vec::with_capacity(n);
    for v in 0..n {
        let cv = z.class_of(v);
        let n_same = z.class_sizes()[cv] as f64;
        let n_cross = (n - z.class_sizes()[cv]) as f64;
        let grow = gmat.row(v);
        let dot_same = dot(grow, sums.row(cv));
        let dot_total = dot(grow, &total);
        same.push(dot_same / n_same);
        cross.push((dot_total - dot_same) / n_cross);
    }
    Ok((same, cross))
}

/// Aggregation similarity score of S(f, X): the fraction of nodes whose mean
/// same-class similarity (including the node itself) is >= the cross-class
/// mean. Exact ties count toward the score.
pub fn agg_similarity_score(
    f: &FilterOperator,
    x: &Tensor,
    z: &LabelEncoding,
) -> Result<f64> {
    let gmat = f.spmm(x)?;
    score_from_filtered(&gmat, z)
}

pub(crate) fn score_from_filtered(gmat: &Tensor, z: &LabelEncoding) -> Result<f64> {
    let (same, cross) = class_mean_similarities(gmat, z)?;
    let hits = same.iter().zip(&cross).filter(|(s, c)| s >= c).count();
    Ok(hits as f64 / gmat.rows() as f64)
}

/// Rescale a similarity score to [0,1]: [2s - 1]_+.
pub fn modified_score(s: f64) -> f64 {
    (2.0 * s - 1.0).max(0.0)
}

/// Graph aggregation homophily (the similarity score with X := Z) and its
/// modified version. Both are always reported together.
pub fn aggregation_homophily(
    g: &Graph,
    z: &LabelEncoding,
    kind: &FilterKind,
) -> Result<(f64, f64)> {
    check_nodes(g, z)?;
    let gmat = filtered_features(g, &z.one_hot(), kind)?;
    let h_agg = score_from_filtered(&gmat, z)?;
    Ok((h_agg, modified_score(h_agg)))
}

/// Diversification distinguishability under S(I - f, X): node v is flagged
/// iff its same-class mean is >= 0 and its cross-class mean is <= 0, both
/// inequalities taken literally (a node with both means exactly zero counts).
/// `kind` names the aggregation operator; its high-pass complement is used.
pub fn diversification_distinguishability(
    g: &Graph,
    x: &Tensor,
    z: &LabelEncoding,
    kind: &FilterKind,
) -> Result<(f64, Vec<bool>)> {
    check_nodes(g, z)?;
    let hp = kind.complement_of_low_pass();
    let hmat = filtered_features(g, x, &hp)?;
    dd_from_filtered(&hmat, z)
}

pub(crate) fn dd_from_filtered(hmat: &Tensor, z: &LabelEncoding) -> Result<(f64, Vec<bool>)> {
    let (same, cross) = class_mean_similarities(hmat, z)?;
    let flags: Vec<bool> = same
        .iter()
        .zip(&cross)
        .map(|(s, c)| *s >= 0.0 && *c <= 0.0)
        .collect();
    let dd = flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64;
    Ok((dd, flags))
}

impl FilterKind {
    /// High-pass complement used by the diversification metrics: `I - self`,
    /// unless `self` already is a high-pass kind, in which case it is kept.
    fn complement_of_low_pass(&self) -> FilterKind {
        match self {
            FilterKind::HighPassOf(_)
            | FilterKind::Lrw
            | FilterKind::Lsym
            | FilterKind::LrwHat
            | FilterKind::LsymHat => self.clone(),
            lp => lp.complement(),
        }
    }
}

/// Expected same-class minus cross-class similarity gap in the random
/// d-regular model with C classes, as a function of the intra-edge
/// probability h:
///
///   g(h) = ((C-1)(hd+1) - (1-h)d)^2 / ((C-1)(d+1))^2
pub fn g_of_h(h: f64, d: usize, c: usize) -> f64 {
    debug_assert!(d >= 1 && c >= 2 && (0.0..=1.0).contains(&h));
    let d = d as f64;
    let cm1 = (c - 1) as f64;
    let num = cm1 * (h * d + 1.0) - (1.0 - h) * d;
    let den = cm1 * (d + 1.0);
    (num / den) * (num / den)
}

/// The homophily level where g(h) vanishes when each node keeps `d_intra`
/// expected same-class neighbors: h = d_intra / (C d_intra + C - 1).
pub fn optimal_h(d_intra: usize, c: usize) -> f64 {
    debug_assert!(d_intra >= 1 && c >= 2);
    d_intra as f64 / (c * d_intra + c - 1) as f64
}

/// Full metric bundle. `x` defaults to the one-hot labels when absent, which
/// makes the feature-similarity fields coincide with the aggregation
/// homophily.
pub fn metric_report(
    g: &Graph,
    z: &LabelEncoding,
    x: Option<&Tensor>,
    kind: &FilterKind,
) -> Result<MetricReport> {
    check_nodes(g, z)?;
    z.require_metric_ready()?;
    let one_hot;
    let x = match x {
        Some(x) => x,
        None => {
            one_hot = z.one_hot();
            &one_hot
        }
    };
    let h_edge = edge_homophily(g, z)?;
    let (h_node, h_node_per_node) = node_homophily(g, z)?;
    let h_class = class_homophily(g, z)?;
    let (h_agg, h_agg_mod) = aggregation_homophily(g, z, kind)?;
    let s_agg_features = score_from_filtered(&filtered_features(g, x, kind)?, z)?;
    let (dd_value, dd_flags) = diversification_distinguishability(g, x, z, kind)?;
    Ok(MetricReport {
        h_edge,
        h_node,
        h_class,
        h_agg,
        h_agg_mod,
        s_agg_features,
        s_agg_features_mod: modified_score(s_agg_features),
        dd_value,
        h_node_per_node,
        dd_flags,
    })
}

/// Metric estimation from a label subset: every formula is restricted to the
/// subgraph induced by `mask` (only masked labels are consulted). Classes
/// absent from the mask are dropped; nodes isolated inside the mask are
/// skipped by the node-homophily mean.
pub fn estimate_metrics_masked(
    g: &Graph,
    z: &LabelEncoding,
    x: &Tensor,
    mask: &[usize],
    kind: &FilterKind,
) -> Result<MetricReport> {
    check_nodes(g, z)?;
    let (sub, kept) = g.induced_subgraph(mask)?;
    let (z_sub, _) = z.restricted(&kept)?;
    z_sub.require_metric_ready()?;
    let mut x_rows = Vec::with_capacity(kept.len());
    for &v in &kept {
        x_rows.push(x.row(v).to_vec());
    }
    let x_sub = Tensor::from_rows(&x_rows)?;

    let h_edge = edge_homophily(&sub, &z_sub)?;
    let (h_node, h_node_per_node) = masked_node_homophily(&sub, &z_sub);
    let h_class = class_homophily(&sub, &z_sub)?;
    let (h_agg, h_agg_mod) = aggregation_homophily(&sub, &z_sub, kind)?;
    let s_agg_features = score_from_filtered(&filtered_features(&sub, &x_sub, kind)?, &z_sub)?;
    let (dd_value, dd_flags) = diversification_distinguishability(&sub, &x_sub, &z_sub, kind)?;
    Ok(MetricReport {
        h_edge,
        h_node,
        h_class,
        h_agg,
        h_agg_mod,
        s_agg_features,
        s_agg_features_mod: modified_score(s_agg_features),
        dd_value,
        h_node_per_node,
        dd_flags,
    })
}

/// Node homophily over the masked subgraph, skipping nodes the mask isolated.
fn masked_node_homophily(g: &Graph, z: &LabelEncoding) -> (f64, Vec<f64>) {
    let mut per_node = Vec::with_capacity(g.num_nodes());
    let mut sum = 0.0;
    let mut counted = 0usize;
    for v in 0..g.num_nodes() {
        let d = g.degree(v);
        if d == 0 {
            per_node.push(f64::NAN);
            continue;
        }
        let same = g
            .neighbors(v)
            .iter()
            .filter(|&&u| z.class_of(u) == z.class_of(v))
            .count();
        let h = same as f64 / d as f64;
        per_node.push(h);
        sum += h;
        counted += 1;
    }
    if counted == 0 {
        (0.0, per_node)
    } else {
        (sum / counted as f64, per_node)
    }
}

fn check_nodes(g: &Graph, z: &LabelEncoding) -> Result<()> {
    if z.num_nodes() != g.num_nodes() {
        return Err(Error::ShapeMismatch {
            op: "metrics",
            expected: format!("{} labels", g.num_nodes()),
            got: format!("{}", z.num_nodes()),
        });
    }
    Ok(())
}
