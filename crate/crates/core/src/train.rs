//! Full-batch training: Adam, early stopping on validation accuracy, the
//! repeated-run protocol, and the synthetic homophily-curve experiment.
//!
//! Runs are independent jobs keyed by (config, seed); the repeated and curve
//! runners fan them out over a rayon pool and merge results in key order, so
//! outputs do not depend on scheduling.

use crate::autodiff::Tape;
use crate::error::{Error, Result};
use crate::filter::FilterKind;
use crate::graph::Graph;
use crate::labels::LabelEncoding;
use crate::metrics;
use crate::models::{eval_logits, forward, init_params, GraphOps, ModelSpec, ParamSet};
use crate::synth::{self, random_split, SplitMasks, SynthMode, SynthSpec};
use crate::tensor::Tensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default)]
    pub weight_decay: f64,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_split")]
    pub split: (f64, f64, f64),
}

fn default_lr() -> f64 {
    0.05
}
fn default_max_epochs() -> usize {
    1000
}
fn default_patience() -> usize {
    100
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_split() -> (f64, f64, f64) {
    (0.6, 0.2, 0.2)
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: default_lr(),
            weight_decay: 0.0,
            max_epochs: default_max_epochs(),
            patience: default_patience(),
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
            seed: 0,
            split: default_split(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lr",
                reason: format!("{} must be positive", self.lr),
            });
        }
        if self.patience > self.max_epochs {
            return Err(Error::InvalidParameter {
                name: "patience",
                reason: format!("{} exceeds max_epochs {}", self.patience, self.max_epochs),
            });
        }
        Ok(())
    }
}

/// Adam moment estimates, one pair per parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    t: usize,
}

impl AdamState {
    pub fn new(params: &[Tensor]) -> Self {
        AdamState {
            m: params.iter().map(|p| Tensor::zeros(p.rows(), p.cols())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.rows(), p.cols())).collect(),
            t: 0,
        }
    }

    pub fn step(&self) -> usize {
        self.t
    }
}

/// Textbook Adam update with bias correction. Weight decay enters as an L2
/// term added to the gradient.
pub fn adam_step(
    params: &mut [Tensor],
    grads: &[Tensor],
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::ShapeMismatch {
            op: "adam_step",
            expected: format!("{} tensors", params.len()),
            got: format!("{}", grads.len()),
        });
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        if !g.is_finite() {
            return Err(Error::NonFinite { op: "adam_step" });
        }
        let pm = p.data_mut();
        let gm = g.data();
        let mm = m.data_mut();
        let vm = v.data_mut();
        for i in 0..pm.len() {
            let grad = gm[i] + cfg.weight_decay * pm[i];
            mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * grad;
            vm[i] = cfg.beta2 * vm[i] + (1.0 - cfg.beta2) * grad * grad;
            let m_hat = mm[i] / bc1;
            let v_hat = vm[i] / bc2;
            pm[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

/// One dataset instance: graph, features, labels and fixed split masks.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Arc<Graph>,
    pub x: Arc<Tensor>,
    pub labels: Arc<LabelEncoding>,
    pub masks: SplitMasks,
}

impl Dataset {
    pub fn new(graph: Graph, x: Tensor, labels: LabelEncoding, masks: SplitMasks) -> Self {
        Dataset {
            graph: Arc::new(graph),
            x: Arc::new(x),
            labels: Arc::new(labels),
            masks,
        }
    }
}

/// Outcome of one training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub test_accuracy: f64,
    pub val_accuracy_curve: Vec<f64>,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub best_val_loss: f64,
    pub final_train_loss: f64,
    /// Wall time, excluded from serialized output to keep result files
    /// byte-stable across reruns.
    #[serde(skip)]
    pub wall_ms_per_epoch: f64,
}

/// Fraction of masked nodes whose argmax logit hits the label.
pub fn accuracy(logits: &Tensor, labels: &LabelEncoding, mask: &[usize]) -> f64 {
    if mask.is_empty() {
        return 0.0;
    }
    let mut correct = 0usize;
    for &r in mask {
        let row = logits.row(r);
        let mut best = 0usize;
        for j in 1..row.len() {
            if row[j] > row[best] {
                best = j;
            }
        }
        if best == labels.class_of(r) {
            correct += 1;
        }
    }
    correct as f64 / mask.len() as f64
}

fn masked_loss(logits: &Tensor, labels: &LabelEncoding, mask: &[usize]) -> f64 {
    let mut total = 0.0;
    for &r in mask {
        let row = logits.row(r);
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|&x| (x - m).exp()).sum();
        total += m + sum.ln() - row[labels.class_of(r)];
    }
    total / mask.len().max(1) as f64
}

/// Artifacts of a finished training run beyond the bare result.
pub struct TrainedModel {
    pub result: RunResult,
    pub params: ParamSet,
    pub ops: GraphOps,
    /// Effective spec and inputs actually trained (the SGC fast path rewrites
    /// both; see `prepare_inputs`).
    pub spec: ModelSpec,
    pub x: Tensor,
}

/// Pre-apply the SGC hop filter so each epoch reduces to one dense product.
/// The rewritten spec has zero hops and pairs with identity operators.
fn prepare_inputs(
    spec: &ModelSpec,
    data: &Dataset,
) -> Result<(ModelSpec, Tensor, GraphOps)> {
    let ops = GraphOps::build(&data.graph, &spec.filter)?;
    if spec.family == crate::models::ModelFamily::Sgc {
        let mut eff = (*data.x).clone();
        for _ in 0..spec.layers {
            eff = ops.lp.spmm(&eff)?;
        }
        let mut prefiltered = spec.clone();
        prefiltered.layers = 0;
        Ok((prefiltered, eff, ops))
    } else {
        Ok((spec.clone(), (*data.x).clone(), ops))
    }
}

/// Train one model on one dataset. Full batch, Adam, early stopping on
/// validation accuracy with the lower validation loss breaking ties; the
/// best checkpoint is restored before the test evaluation.
pub fn train_one(spec: &ModelSpec, data: &Dataset, cfg: &TrainConfig) -> Result<RunResult> {
    Ok(train_model(spec, data, cfg)?.result)
}

/// Like [`train_one`] but keeps the restored parameters and operators.
pub fn train_model(spec: &ModelSpec, data: &Dataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    spec.validate()?;
    cfg.validate()?;
    let (eff_spec, eff_x, ops) = prepare_inputs(spec, data)?;
    let out_dim = data.labels.num_classes();
    let in_dim = eff_x.cols();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = init_params(&eff_spec, in_dim, out_dim, ops.num_nodes, &mut rng)?;
    let mut adam = AdamState::new(params.tensors());
    let targets = Arc::new(data.labels.classes().to_vec());
    let train_mask = Arc::new(data.masks.train.clone());

    let mut best: Option<(f64, f64, usize, Vec<Tensor>)> = None; // (acc, loss, epoch, params)
    let mut val_curve = Vec::new();
    let mut since_best = 0usize;
    let mut final_train_loss = f64::NAN;
    let started = Instant::now();
    let mut epochs_run = 0usize;

    for epoch in 0..cfg.max_epochs {
        epochs_run = epoch + 1;
        // Deterministic per-epoch dropout stream.
        let mut tape = Tape::training(cfg.seed ^ (epoch as u64).wrapping_mul(0x9e37_79b9));
        let vars = params.mount(&mut tape)?;
        let xv = tape.leaf(eff_x.clone())?;
        let logits = forward(&mut tape, &eff_spec, &params, &vars, &ops, xv)?;
        let loss = tape.cross_entropy(logits, &targets, &train_mask)?;
        let loss_val = tape.scalar(loss);
        if !loss_val.is_finite() {
            return Err(Error::Diverged(epoch));
        }
        final_train_loss = loss_val;
        tape.backward(loss)?;
        let grads: Vec<Tensor> = vars
            .iter()
            .zip(params.tensors())
            .map(|(&v, p)| {
                tape.grad(v)
                    .cloned()
                    .unwrap_or_else(|| Tensor::zeros(p.rows(), p.cols()))
            })
            .collect();
        adam_step(params.tensors_mut(), &grads, &mut adam, cfg)?;

        // Validation in eval mode.
        let val_logits = eval_logits(&eff_spec, &params, &ops, &eff_x, 0)?;
        let val_acc = accuracy(&val_logits, &data.labels, &data.masks.val);
        let val_loss = masked_loss(&val_logits, &data.labels, &data.masks.val);
        val_curve.push(val_acc);

        let improved = match &best {
            None => true,
            Some((acc, loss, _, _)) => val_acc > *acc || (val_acc == *acc && val_loss < *loss),
        };
        if improved {
            best = Some((val_acc, val_loss, epoch, params.tensors().to_vec()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }

    let (best_val_accuracy, best_val_loss, best_epoch, best_params) =
        best.ok_or(Error::Diverged(0))?;
    for (slot, saved) in params.tensors_mut().iter_mut().zip(best_params) {
        *slot = saved;
    }
    let test_logits = eval_logits(&eff_spec, &params, &ops, &eff_x, 0)?;
    let test_accuracy = accuracy(&test_logits, &data.labels, &data.masks.test);
    let wall_ms_per_epoch = started.elapsed().as_secs_f64() * 1000.0 / epochs_run.max(1) as f64;

    Ok(TrainedModel {
        result: RunResult {
            test_accuracy,
            val_accuracy_curve: val_curve,
            epochs_run,
            best_epoch,
            best_val_accuracy,
            best_val_loss,
            final_train_loss,
            wall_ms_per_epoch,
        },
        params,
        ops,
        spec: eff_spec,
        x: eff_x,
    })
}

/// Mean and standard deviation (population) over repeated runs with derived
/// per-run seeds. Run order does not matter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub runs: Vec<RunResult>,
}

pub fn summarize(accs: &[f64]) -> (f64, f64) {
    let n = accs.len().max(1) as f64;
    let mean = accs.iter().sum::<f64>() / n;
    let var = accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Derive statistically independent per-run seeds from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 round.
    let mut z = master
        .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn run_repeated(
    spec: &ModelSpec,
    data: &Dataset,
    cfg: &TrainConfig,
    n_runs: usize,
) -> Result<RepeatSummary> {
    let runs: Vec<Result<RunResult>> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let run_cfg = TrainConfig {
                seed: derive_seed(cfg.seed, i as u64),
                ..cfg.clone()
            };
            train_one(spec, data, &run_cfg)
        })
        .collect();
    let runs: Vec<RunResult> = runs.into_iter().collect::<Result<_>>()?;
    let accs: Vec<f64> = runs.iter().map(|r| r.test_accuracy).collect();
    let (mean_accuracy, std_accuracy) = summarize(&accs);
    Ok(RepeatSummary {
        mean_accuracy,
        std_accuracy,
        runs,
    })
}

/// Specification of the homophily-curve experiment: a grid of target edge
/// homophily levels, several graphs per level, one dataset per graph with
/// features drawn from the built-in class-conditional base.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSpec {
    pub mode: SynthMode,
    pub h_levels: Vec<f64>,
    #[serde(default = "default_graphs_per_level")]
    pub graphs_per_level: usize,
    #[serde(default = "synth_default_classes")]
    pub num_classes: usize,
    #[serde(default = "synth_default_npc")]
    pub nodes_per_class: usize,
    #[serde(default = "synth_default_intra")]
    pub intra_edges_per_class: usize,
    #[serde(default = "synth_default_d_intra")]
    pub d_intra: usize,
    #[serde(default = "default_feature_dim")]
    pub feature_dim: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_graphs_per_level() -> usize {
    10
}
fn synth_default_classes() -> usize {
    5
}
fn synth_default_npc() -> usize {
    400
}
fn synth_default_intra() -> usize {
    800
}
fn synth_default_d_intra() -> usize {
    10
}
fn default_feature_dim() -> usize {
    64
}

/// One curve row: metrics and accuracy for a (level, model) pair, averaged
/// over the level's graphs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveRow {
    pub h_target: f64,
    pub h_edge: f64,
    pub h_node: f64,
    pub h_class: f64,
    pub h_agg_mod: f64,
    pub model: String,
    pub acc_mean: f64,
    pub acc_std: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
}

impl CurveTable {
    /// Rows for one model, in grid order.
    pub fn model_rows(&self, model: &str) -> Vec<&CurveRow> {
        self.rows.iter().filter(|r| r.model == model).collect()
    }
}

struct GraphJob {
    level_idx: usize,
    metrics: (f64, f64, f64, f64),
    accs: Vec<f64>, // one per model
}

/// Run the curve experiment: per level and graph, generate, measure, train
/// every model once, then aggregate per (level, model).
pub fn run_synthetic_curve(
    curve: &CurveSpec,
    model_specs: &[ModelSpec],
    cfg: &TrainConfig,
) -> Result<CurveTable> {
    if curve.h_levels.is_empty() {
        return Err(Error::InvalidParameter {
            name: "h_levels",
            reason: "grid must be nonempty".to_string(),
        });
    }
    let jobs: Vec<(usize, usize)> = (0..curve.h_levels.len())
        .flat_map(|li| (0..curve.graphs_per_level).map(move |gi| (li, gi)))
        .collect();

    let results: Vec<Result<GraphJob>> = jobs
        .into_par_iter()
        .map(|(li, gi)| run_graph_job(curve, model_specs, cfg, li, gi))
        .collect();
    let mut done = Vec::with_capacity(results.len());
    for r in results {
        done.push(r?);
    }

    let mut rows = Vec::new();
    for (li, &h) in curve.h_levels.iter().enumerate() {
        let level_jobs: Vec<&GraphJob> = done.iter().filter(|j| j.level_idx == li).collect();
        let mean_of = |f: &dyn Fn(&GraphJob) -> f64| {
            level_jobs.iter().map(|j| f(j)).sum::<f64>() / level_jobs.len().max(1) as f64
        };
        let h_edge = mean_of(&|j| j.metrics.0);
        let h_node = mean_of(&|j| j.metrics.1);
        let h_class = mean_of(&|j| j.metrics.2);
        let h_agg_mod = mean_of(&|j| j.metrics.3);
        for (mi, spec) in model_specs.iter().enumerate() {
            let accs: Vec<f64> = level_jobs.iter().map(|j| j.accs[mi]).collect();
            let (acc_mean, acc_std) = summarize(&accs);
            rows.push(CurveRow {
                h_target: h,
                h_edge,
                h_node,
                h_class,
                h_agg_mod,
                model: spec.name(),
                acc_mean,
                acc_std,
            });
        }
    }
    Ok(CurveTable { rows })
}

fn run_graph_job(
    curve: &CurveSpec,
    model_specs: &[ModelSpec],
    cfg: &TrainConfig,
    li: usize,
    gi: usize,
) -> Result<GraphJob> {
    let h = curve.h_levels[li];
    let seed = derive_seed(curve.seed, (li * curve.graphs_per_level + gi) as u64);
    let spec = SynthSpec {
        mode: curve.mode,
        h_edge_target: h,
        num_classes: curve.num_classes,
        nodes_per_class: curve.nodes_per_class,
        intra_edges_per_class: curve.intra_edges_per_class,
        d_intra: curve.d_intra,
        seed,
    };
    let graph = synth::generate(&spec)?;
    let labels = spec.labels();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    let (base_x, base_z) =
        synth::synthetic_feature_base(curve.num_classes, curve.feature_dim, 100, 0.1, &mut rng)?;
    let x = synth::sample_features(&base_x, &base_z, &labels, &mut rng)?;
    let masks = random_split(graph.num_nodes(), cfg.split, &mut rng)?;

    let h_edge = metrics::edge_homophily(&graph, &labels)?;
    let (h_node, _) = metrics::node_homophily_lenient(&graph, &labels)?;
    let h_class = metrics::class_homophily(&graph, &labels)?;
    let (_, h_agg_mod) = metrics::aggregation_homophily(&graph, &labels, &FilterKind::ArwHat)?;

    let data = Dataset::new(graph, x, labels, masks);
    let mut accs = Vec::with_capacity(model_specs.len());
    for spec in model_specs {
        let run_cfg = TrainConfig {
            seed: derive_seed(seed, 2),
            ..cfg.clone()
        };
        accs.push(train_one(spec, &data, &run_cfg)?.test_accuracy);
    }
    Ok(GraphJob {
        level_idx: li,
        metrics: (h_edge, h_node, h_class, h_agg_mod),
        accs,
    })
}
