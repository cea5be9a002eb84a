//! Model forwards checked against an independent dense implementation, and
//! gradient checks for every model family.

#![allow(clippy::needless_range_loop)]

mod common;

use acmix::autodiff::{grad_check, Tape, Var};
use acmix::filter::{make_filter, FilterKind};
use acmix::graph::Graph;
use acmix::labels::LabelEncoding;
use acmix::models::{
    eval_logits, forward, init_params, GraphOps, ModelFamily, ModelSpec, ParamSet,
};
use acmix::tensor::Tensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

// ---- plain nested-vec matrix helpers (the oracle side) ----

type Mat = Vec<Vec<f64>>;

fn to_mat(t: &Tensor) -> Mat {
    (0..t.rows()).map(|i| t.row(i).to_vec()).collect()
}

fn from_dense(t: &Tensor) -> Mat {
    to_mat(t)
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = 0.0;
            for x in 0..k {
                acc += a[i][x] * b[x][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

fn mat_relu(a: &Mat) -> Mat {
    a.iter()
        .map(|r| r.iter().map(|&v| v.max(0.0)).collect())
        .collect()
}

fn mat_sigmoid(a: &Mat) -> Mat {
    a.iter()
        .map(|r| r.iter().map(|&v| 1.0 / (1.0 + (-v).exp())).collect())
        .collect()
}

fn mat_add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

fn row_softmax(a: &Mat) -> Mat {
    a.iter()
        .map(|r| {
            let m = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = r.iter().map(|&v| (v - m).exp()).collect();
            let s: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / s).collect()
        })
        .collect()
}

fn layer_norm(a: &Mat, gamma: &[f64], beta: &[f64]) -> Mat {
    let eps = 1e-5;
    a.iter()
        .map(|r| {
            let n = r.len() as f64;
            let mu = r.iter().sum::<f64>() / n;
            let var = r.iter().map(|&v| (v - mu) * (v - mu)).sum::<f64>() / n;
            let inv = 1.0 / (var + eps).sqrt();
            r.iter()
                .enumerate()
                .map(|(j, &v)| gamma[j] * (v - mu) * inv + beta[j])
                .collect()
        })
        .collect()
}

fn max_diff(a: &Mat, b: &Tensor) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            worst = worst.max((a[i][j] - b.get(i, j)).abs());
        }
    }
    worst
}

fn fixture() -> (Graph, Tensor, LabelEncoding) {
    let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)], 6)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let x = Tensor::glorot_uniform(6, 7, &mut rng);
    let z = LabelEncoding::from_classes(vec![0, 1, 2, 0, 1, 2]).unwrap();
    (g, x, z)
}

/// Independent dense forward of a three-channel mixing layer, option 1 or 2.
#[allow(clippy::too_many_arguments)]
fn oracle_acm_layer(
    h: &Mat,
    lp: &Mat,
    hp: &Mat,
    ps: &ParamSet,
    layer: usize,
    variant: u8,
    temperature: f64,
    is_output: bool,
    with_ln: bool,
    adj: Option<&Mat>,
) -> Mat {
    let w = |name: &str| from_dense(ps.get(name).unwrap());
    let tags: Vec<&str> = if adj.is_some() {
        vec!["lp", "hp", "id", "struct"]
    } else {
        vec!["lp", "hp", "id"]
    };
    let mut channels: Vec<Mat> = Vec::new();
    for tag in &tags {
        let wc = w(&format!("l{layer}.w_{tag}"));
        let hc = match *tag {
            "lp" | "hp" => {
                let filt = if *tag == "lp" { lp } else { hp };
                match variant {
                    1 => {
                        let t = mat_mul(filt, &mat_mul(h, &wc));
                        if is_output { t } else { mat_relu(&t) }
                    }
                    _ => {
                        let t = mat_mul(h, &wc);
                        let t = if is_output { t } else { mat_relu(&t) };
                        mat_mul(filt, &t)
                    }
                }
            }
            "id" => {
                let t = mat_mul(h, &wc);
                if is_output { t } else { mat_relu(&t) }
            }
            _ => {
                let t = mat_mul(adj.unwrap(), &wc);
                if is_output { t } else { mat_relu(&t) }
            }
        };
        channels.push(hc);
    }
    // Step 2.
    let mut score_cols: Vec<Vec<f64>> = Vec::new();
    for (tag, hc) in tags.iter().zip(&channels) {
        let gated = if with_ln {
            let gamma = w(&format!("l{layer}.ln_g_{tag}"))[0].clone();
            let beta = w(&format!("l{layer}.ln_b_{tag}"))[0].clone();
            layer_norm(hc, &gamma, &beta)
        } else {
            hc.clone()
        };
        let wg = w(&format!("l{layer}.wg_{tag}"));
        let logit = mat_mul(&gated, &wg);
        score_cols.push(mat_sigmoid(&logit).iter().map(|r| r[0]).collect());
    }
    let n = h.len();
    let k = tags.len();
    let mut stacked = vec![vec![0.0; k]; n];
    for i in 0..n {
        for (c, col) in score_cols.iter().enumerate() {
            stacked[i][c] = col[i] / temperature;
        }
    }
    let mixed = mat_mul(&stacked, &w(&format!("l{layer}.w_mix")));
    let alpha = row_softmax(&mixed);
    // Step 3.
    let cols = channels[0][0].len();
    let mut out = vec![vec![0.0; cols]; n];
    for (c, hc) in channels.iter().enumerate() {
        for i in 0..n {
            for j in 0..cols {
                out[i][j] += alpha[i][c] * hc[i][j];
            }
        }
    }
    if is_output {
        out
    } else {
        mat_relu(&out)
    }
}

#[test]
fn acm_gcn_forward_matches_dense_oracle() {
    let (g, x, _) = fixture();
    for variant in [1u8, 2u8] {
        let mut spec = ModelSpec::new(if variant == 1 {
            ModelFamily::AcmGcn
        } else {
            ModelFamily::AcmiiGcn
        });
        spec.hidden = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(variant as u64);
        let ps = init_params(&spec, 7, 3, 6, &mut rng).unwrap();
        let ops = GraphOps::build(&g, &spec.filter).unwrap();
        let logits = eval_logits(&spec, &ps, &ops, &x, 0).unwrap();

        let lp = from_dense(&make_filter(&g, &FilterKind::ArwHat).unwrap().to_dense());
        let hp = from_dense(
            &make_filter(&g, &FilterKind::HighPassOf(Box::new(FilterKind::ArwHat)))
                .unwrap()
                .to_dense(),
        );
        let h0 = to_mat(&x);
        let h1 = oracle_acm_layer(&h0, &lp, &hp, &ps, 0, variant, 3.0, false, false, None);
        let h2 = oracle_acm_layer(&h1, &lp, &hp, &ps, 1, variant, 3.0, true, false, None);
        assert!(
            max_diff(&h2, &logits) < 1e-12,
            "variant {variant}: diff {}",
            max_diff(&h2, &logits)
        );
    }
}

#[test]
fn acm_gcn_plus_forward_matches_dense_oracle() {
    let (g, x, _) = fixture();
    let mut spec = ModelSpec::new(ModelFamily::AcmGcnPlus);
    spec.hidden = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ps = init_params(&spec, 7, 3, 6, &mut rng).unwrap();
    let ops = GraphOps::build(&g, &spec.filter).unwrap();
    let logits = eval_logits(&spec, &ps, &ops, &x, 0).unwrap();

    let lp = from_dense(&make_filter(&g, &FilterKind::ArwHat).unwrap().to_dense());
    let hp = from_dense(
        &make_filter(&g, &FilterKind::HighPassOf(Box::new(FilterKind::ArwHat)))
            .unwrap()
            .to_dense(),
    );
    // Raw adjacency rows as the structure-channel input.
    let mut adj = vec![vec![0.0; 6]; 6];
    for v in 0..6 {
        for &u in g.neighbors(v) {
            adj[v][u] = 1.0;
        }
    }
    let h0 = to_mat(&x);
    let h1 = oracle_acm_layer(&h0, &lp, &hp, &ps, 0, 1, 4.0, false, true, Some(&adj));
    let h2 = oracle_acm_layer(&h1, &lp, &hp, &ps, 1, 1, 4.0, true, true, Some(&adj));
    assert!(max_diff(&h2, &logits) < 1e-12, "diff {}", max_diff(&h2, &logits));
}

#[test]
fn acm_gcn_plus_plus_residual_matches_dense_oracle() {
    let (g, x, _) = fixture();
    let mut spec = ModelSpec::new(ModelFamily::AcmGcnPlusPlus);
    spec.hidden = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let ps = init_params(&spec, 7, 3, 6, &mut rng).unwrap();
    let ops = GraphOps::build(&g, &spec.filter).unwrap();
    let logits = eval_logits(&spec, &ps, &ops, &x, 0).unwrap();

    let lp = from_dense(&make_filter(&g, &FilterKind::ArwHat).unwrap().to_dense());
    let hp = from_dense(
        &make_filter(&g, &FilterKind::HighPassOf(Box::new(FilterKind::ArwHat)))
            .unwrap()
            .to_dense(),
    );
    let mut adj = vec![vec![0.0; 6]; 6];
    for v in 0..6 {
        for &u in g.neighbors(v) {
            adj[v][u] = 1.0;
        }
    }
    let h0 = to_mat(&x);
    let hx = mat_relu(&mat_mul(&h0, &from_dense(ps.get("w_res").unwrap())));
    let h1 = oracle_acm_layer(&h0, &lp, &hp, &ps, 0, 1, 4.0, false, true, Some(&adj));
    let h1 = mat_add(&h1, &hx);
    let h2 = oracle_acm_layer(&h1, &lp, &hp, &ps, 1, 1, 4.0, true, true, Some(&adj));
    assert!(max_diff(&h2, &logits) < 1e-12, "diff {}", max_diff(&h2, &logits));
}

#[test]
fn gcn_forward_matches_dense_oracle() {
    let (g, x, _) = fixture();
    let spec = ModelSpec::new(ModelFamily::Gcn);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ps = init_params(&spec, 7, 3, 6, &mut rng).unwrap();
    let ops = GraphOps::build(&g, &spec.filter).unwrap();
    let logits = eval_logits(&spec, &ps, &ops, &x, 0).unwrap();

    let lp = from_dense(&make_filter(&g, &FilterKind::ArwHat).unwrap().to_dense());
    let h0 = to_mat(&x);
    let h1 = mat_relu(&mat_mul(&lp, &mat_mul(&h0, &from_dense(ps.get("w0").unwrap()))));
    let h2 = mat_mul(&lp, &mat_mul(&h1, &from_dense(ps.get("w1").unwrap())));
    assert!(max_diff(&h2, &logits) < 1e-12);
}

#[test]
fn snowball_forward_matches_dense_oracle() {
    let (g, x, _) = fixture();
    let mut spec = ModelSpec::new(ModelFamily::Snowball);
    spec.layers = 3;
    spec.hidden = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ps = init_params(&spec, 7, 3, 6, &mut rng).unwrap();
    let ops = GraphOps::build(&g, &spec.filter).unwrap();
    let logits = eval_logits(&spec, &ps, &ops, &x, 0).unwrap();

    let lp = from_dense(&make_filter(&g, &FilterKind::ArwHat).unwrap().to_dense());
    let concat = |mats: &[&Mat]| -> Mat {
        (0..mats[0].len())
            .map(|i| mats.iter().flat_map(|m| m[i].iter().copied()).collect())
            .collect()
    };
    let h0 = to_mat(&x);
    let h1 = mat_relu(&mat_mul(&lp, &mat_mul(&h0, &from_dense(ps.get("w0").unwrap()))));
    let h2 = mat_relu(&mat_mul(
        &lp,
        &mat_mul(&concat(&[&h0, &h1]), &from_dense(ps.get("w1").unwrap())),
    ));
    let out = mat_mul(
        &lp,
        &mat_mul(&concat(&[&h0, &h1, &h2]), &from_dense(ps.get("w2").unwrap())),
    );
    assert!(max_diff(&out, &logits) < 1e-12);
}

#[test]
fn sgc_k1_on_k22_mixes_classes_as_expected() {
    // Logits are the (1/3, 2/3) / (2/3, 1/3) class mixtures times W.
    let g = Graph::from_edges(&[(0, 2), (0, 3), (1, 2), (1, 3)], 4).unwrap();
    let z = LabelEncoding::from_classes(vec![0, 0, 1, 1]).unwrap();
    let x = z.one_hot();
    let mut spec = ModelSpec::new(ModelFamily::Sgc);
    spec.layers = 1;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let ps = init_params(&spec, 2, 2, 4, &mut rng).unwrap();
    let ops = GraphOps::build(&g, &spec.filter).unwrap();
    let logits = eval_logits(&spec, &ps, &ops, &x, 0).unwrap();

    let w = ps.get("w").unwrap();
    let mix = [
        [1.0 / 3.0, 2.0 / 3.0],
        [1.0 / 3.0, 2.0 / 3.0],
        [2.0 / 3.0, 1.0 / 3.0],
        [2.0 / 3.0, 1.0 / 3.0],
    ];
    for (i, row) in mix.iter().enumerate() {
        for j in 0..2 {
            let expect = row[0] * w.get(0, j) + row[1] * w.get(1, j);
            assert!((logits.get(i, j) - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn every_model_family_passes_grad_check() {
    let (g, x, z) = fixture();
    let specs: Vec<ModelSpec> = vec![
        {
            let mut s = ModelSpec::new(ModelFamily::Mlp);
            s.layers = 1;
            s
        },
        ModelSpec::new(ModelFamily::Mlp),
        {
            let mut s = ModelSpec::new(ModelFamily::Sgc);
            s.layers = 1;
            s
        },
        {
            let mut s = ModelSpec::new(ModelFamily::Sgc);
            s.layers = 2;
            s
        },
        ModelSpec::new(ModelFamily::Gcn),
        ModelSpec::new(ModelFamily::Snowball),
        {
            let mut s = ModelSpec::new(ModelFamily::Snowball);
            s.layers = 3;
            s
        },
        ModelSpec::new(ModelFamily::AcmGcn),
        ModelSpec::new(ModelFamily::AcmiiGcn),
        {
            let mut s = ModelSpec::new(ModelFamily::AcmSgc);
            s.layers = 1;
            s
        },
        ModelSpec::new(ModelFamily::AcmGcnPlus),
        ModelSpec::new(ModelFamily::AcmGcnPlusPlus),
    ];
    for mut spec in specs {
        spec.hidden = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ps = init_params(&spec, 7, 3, 6, &mut rng).unwrap();
        let ops = GraphOps::build(&g, &spec.filter).unwrap();
        let targets = Arc::new(z.classes().to_vec());
        let mask = Arc::new(vec![0usize, 1, 2, 4, 5]);
        let name = spec.name();
        let spec_c = spec.clone();
        let ps_c = ps.clone();
        let x_c = x.clone();
        let report = grad_check(
            move |tape: &mut Tape, vars: &[Var]| {
                let xv = tape.leaf(x_c.clone())?;
                let logits = forward(tape, &spec_c, &ps_c, vars, &ops, xv)?;
                tape.cross_entropy(logits, &targets, &mask)
            },
            ps.tensors(),
            1e-5,
            12,
            99,
        )
        .unwrap();
        assert!(
            report.max_rel_err <= 1e-4,
            "{name}: rel err {}",
            report.max_rel_err
        );
    }
}
