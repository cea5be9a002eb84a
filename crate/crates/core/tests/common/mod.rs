//! Shared test oracles: brute-force similarity evaluation, a dense Jacobi
//! eigensolver, random graph/label generators, rank correlation, and the
//! regular-random-graph sampling model. Everything here is independent of
//! the streaming implementations it is used to check.

#![allow(dead_code)]

use acmix::graph::Graph;
use acmix::labels::LabelEncoding;
use acmix::tensor::Tensor;
use rand::Rng;

/// Materialize S = G G^T.
pub fn materialize_similarity(gmat: &Tensor) -> Vec<Vec<f64>> {
    let n = gmat.rows();
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            s[i][j] = gmat
                .row(i)
                .iter()
                .zip(gmat.row(j))
                .map(|(a, b)| a * b)
                .sum();
        }
    }
    s
}

/// Per-node same-class / cross-class mean similarity straight from the
/// materialized matrix (the definition, summed row-wise).
pub fn brute_class_means(s: &[Vec<f64>], z: &LabelEncoding) -> (Vec<f64>, Vec<f64>) {
    let n = s.len();
    let mut same = vec![0.0; n];
    let mut cross = vec![0.0; n];
    for v in 0..n {
        let cv = z.class_of(v);
        let (mut s_sum, mut s_cnt, mut c_sum, mut c_cnt) = (0.0, 0usize, 0.0, 0usize);
        for u in 0..n {
            if z.class_of(u) == cv {
                s_sum += s[v][u];
                s_cnt += 1;
            } else {
                c_sum += s[v][u];
                c_cnt += 1;
            }
        }
        same[v] = s_sum / s_cnt as f64;
        cross[v] = c_sum / c_cnt.max(1) as f64;
    }
    (same, cross)
}

/// Brute-force aggregation similarity score from the materialized matrix.
pub fn brute_agg_score(gmat: &Tensor, z: &LabelEncoding) -> f64 {
    let s = materialize_similarity(gmat);
    let (same, cross) = brute_class_means(&s, z);
    let hits = same.iter().zip(&cross).filter(|(a, b)| a >= b).count();
    hits as f64 / gmat.rows() as f64
}

/// Brute-force distinguishability flags from the materialized matrix.
pub fn brute_dd_flags(hmat: &Tensor, z: &LabelEncoding) -> Vec<bool> {
    let s = materialize_similarity(hmat);
    let (same, cross) = brute_class_means(&s, z);
    same.iter()
        .zip(&cross)
        .map(|(a, b)| *a >= 0.0 && *b <= 0.0)
        .collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() < 1e-13 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Connected graph: random spanning tree plus `extra` random edges.
pub fn random_connected_graph<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Graph {
    let mut edges = Vec::with_capacity(n - 1 + extra);
    for i in 1..n {
        edges.push((i, rng.gen_range(0..i)));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u, v));
        }
    }
    Graph::from_edges(&edges, n).expect("valid edges")
}

/// Random labels over `c` classes with every class guaranteed nonempty.
pub fn random_labels<R: Rng>(n: usize, c: usize, rng: &mut R) -> LabelEncoding {
    assert!(n >= c);
    let mut classes: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
    for k in 0..c {
        classes[k] = k;
    }
    LabelEncoding::with_num_classes(classes, c).expect("nonempty")
}

pub fn random_features<R: Rng>(n: usize, f: usize, rng: &mut R) -> Tensor {
    let data = (0..n * f).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor::from_vec(n, f, data).expect("shape")
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite"));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

/// One row of the mean-aggregated one-hot labels in the random d-regular
/// model: each of the node's d edges independently lands in the node's own
/// class with probability h, otherwise uniformly in one of the other c-1
/// classes. The returned row includes the renormalization self-loop.
pub fn regular_model_row<R: Rng>(cls: usize, h: f64, d: usize, c: usize, rng: &mut R) -> Vec<f64> {
    let mut counts = vec![0usize; c];
    counts[cls] += 1; // self-loop
    for _ in 0..d {
        if rng.gen::<f64>() < h {
            counts[cls] += 1;
        } else {
            let mut k = rng.gen_range(0..c - 1);
            if k >= cls {
                k += 1;
            }
            counts[k] += 1;
        }
    }
    counts
        .into_iter()
        .map(|n| n as f64 / (d + 1) as f64)
        .collect()
}

/// Monte-Carlo estimate of E[S_{v,u1} - S_{v,u2}] in the regular model,
/// with u1 sharing v's class and u2 not. Returns (mean, standard error).
pub fn regular_model_similarity_gap<R: Rng>(
    h: f64,
    d: usize,
    c: usize,
    samples: usize,
    rng: &mut R,
) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        let v = regular_model_row(0, h, d, c, rng);
        let u1 = regular_model_row(0, h, d, c, rng);
        let u2 = regular_model_row(1, h, d, c, rng);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let gap = dot(&v, &u1) - dot(&v, &u2);
        sum += gap;
        sumsq += gap * gap;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}
