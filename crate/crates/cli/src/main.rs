//! Command-line front end: metric audits, synthetic graph generation,
//! training runs, homophily-curve experiments, and hyperparameter sweeps.
//!
//! Every command is deterministic given `--seed`; result files contain no
//! timestamps or timing, so reruns are byte-stable.

use acmix::filter::FilterKind;
use acmix::graph::Graph;
use acmix::labels::LabelEncoding;
use acmix::metrics;
use acmix::models::{ModelFamily, ModelSpec};
use acmix::synth::{self, SynthSpec};
use acmix::train::{self, CurveSpec, Dataset, TrainConfig};
use acmix::{io as fio, Error as CoreError};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "acmix", about = "Graph heterophily metrics, generators and channel-mixing GNNs", version)]
struct Cli {
    /// Worker threads for parallel runs (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the metric report for a labeled graph.
    Metrics(MetricsArgs),
    /// Generate a synthetic dataset into a directory.
    Gen(GenArgs),
    /// Train a model from an experiment config file.
    Train(TrainArgs),
    /// Run the synthetic homophily-curve experiment.
    Curve(CurveArgs),
    /// Grid-search hyperparameters from a sweep config file.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    features: Option<PathBuf>,
    /// Aggregation filter kind (identity|arw|asym|arw_hat|asym_hat|...).
    #[arg(long, default_value = "arw_hat")]
    filter: String,
    /// Estimate from a random label subset of this fraction instead of the
    /// full label set.
    #[arg(long)]
    mask_fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// general | regular
    #[arg(long)]
    mode: String,
    /// Target edge homophily in (0, 1].
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = 5)]
    classes: usize,
    #[arg(long, default_value_t = 400)]
    nodes_per_class: usize,
    /// Intra-class edges per class (general mode).
    #[arg(long, default_value_t = 800)]
    intra_edges: usize,
    /// Intra-class stubs per node (regular mode).
    #[arg(long, default_value_t = 10)]
    d_intra: usize,
    #[arg(long, default_value_t = 64)]
    feature_dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for edges.txt, labels.txt, features.csv, spec.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Save the trained parameters (manifest + blob) under this path stem.
    #[arg(long)]
    save_params: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    /// general | regular
    #[arg(long)]
    mode: String,
    /// Comma-separated model names (mlp1, mlp2, sgc1, sgc2, gcn, snowball2,
    /// snowball3, acm_gcn, acmii_gcn, acm_sgc1, acm_gcn_plus, acm_gcn_plus_plus).
    #[arg(long, default_value = "sgc1")]
    models: String,
    /// Comma-separated homophily levels.
    #[arg(long)]
    levels: String,
    #[arg(long, default_value_t = 10)]
    graphs_per_level: usize,
    #[arg(long, default_value_t = 5)]
    classes: usize,
    #[arg(long, default_value_t = 400)]
    nodes_per_class: usize,
    #[arg(long, default_value_t = 800)]
    intra_edges: usize,
    #[arg(long, default_value_t = 10)]
    d_intra: usize,
    #[arg(long, default_value_t = 64)]
    feature_dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Training config JSON; defaults apply when omitted.
    #[arg(long)]
    train_config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Dataset paths or a synthetic spec - exactly one.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DataConfig {
    #[serde(default)]
    edges: Option<PathBuf>,
    #[serde(default)]
    labels: Option<PathBuf>,
    #[serde(default)]
    features: Option<PathBuf>,
    #[serde(default)]
    synth: Option<SynthSpec>,
    /// Feature dimension of the built-in base when running synthetic.
    #[serde(default = "default_feature_dim")]
    feature_dim: usize,
}

fn default_feature_dim() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ExperimentConfig {
    data: DataConfig,
    model: ModelSpec,
    #[serde(default)]
    train: TrainConfig,
    #[serde(default = "default_runs")]
    runs: usize,
    #[serde(default)]
    seed: u64,
}

fn default_runs() -> usize {
    1
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), CoreError> {
        let has_files = self.data.edges.is_some() || self.data.labels.is_some();
        let has_synth = self.data.synth.is_some();
        if has_files == has_synth {
            return Err(CoreError::Config {
                path: "data".to_string(),
                reason: "provide either file paths (edges + labels) or a synth spec, not both"
                    .to_string(),
            });
        }
        if has_files && (self.data.edges.is_none() || self.data.labels.is_none()) {
            return Err(CoreError::Config {
                path: "data.edges/data.labels".to_string(),
                reason: "both edges and labels paths are required".to_string(),
            });
        }
        if self.runs == 0 {
            return Err(CoreError::Config {
                path: "runs".to_string(),
                reason: "must be >= 1".to_string(),
            });
        }
        self.model.validate().map_err(|e| CoreError::Config {
            path: "model".to_string(),
            reason: e.to_string(),
        })?;
        self.train.validate().map_err(|e| CoreError::Config {
            path: "train".to_string(),
            reason: e.to_string(),
        })?;
        if let Some(s) = &self.data.synth {
            s.validate().map_err(|e| CoreError::Config {
                path: "data.synth".to_string(),
                reason: e.to_string(),
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SweepGrid {
    #[serde(default)]
    lr: Vec<f64>,
    #[serde(default)]
    weight_decay: Vec<f64>,
    #[serde(default)]
    dropout: Vec<f64>,
    #[serde(default)]
    hidden: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SweepConfig {
    base: ExperimentConfig,
    grid: SweepGrid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SweepEntry {
    lr: f64,
    weight_decay: f64,
    dropout: f64,
    hidden: usize,
    val_accuracy_mean: f64,
    test_accuracy_mean: f64,
    test_accuracy_std: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    let result = match cli.command {
        Command::Metrics(args) => cmd_metrics(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Train(args) => cmd_train(args),
        Command::Curve(args) => cmd_curve(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &CoreError) -> u8 {
    match err {
        CoreError::Config { .. } | CoreError::InvalidParameter { .. } => 2,
        CoreError::Diverged(_) | CoreError::NonFinite { .. } => 4,
        _ => 3,
    }
}

fn parse_filter(s: &str) -> Result<FilterKind, CoreError> {
    s.parse().map_err(|_| CoreError::Config {
        path: "filter".to_string(),
        reason: format!("unknown filter kind `{s}`"),
    })
}

fn load_graph_labels(
    edges: &Path,
    labels: &Path,
) -> Result<(Graph, LabelEncoding), CoreError> {
    let edge_list = fio::load_edge_list(edges)?;
    let classes = fio::load_labels(labels)?;
    if classes.is_empty() {
        return Err(CoreError::Data("labels file is empty".to_string()));
    }
    let n = classes.len();
    let graph = Graph::from_edges(&edge_list, n)?;
    let enc = LabelEncoding::from_classes(classes)?;
    Ok((graph, enc))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CoreError> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), CoreError> {
    let kind = parse_filter(&args.filter)?;
    let (graph, labels) = load_graph_labels(&args.edges, &args.labels)?;
    let features = match &args.features {
        Some(p) => {
            let x = fio::load_features_csv(p)?;
            if x.rows() != graph.num_nodes() {
                return Err(CoreError::Data(format!(
                    "features have {} rows but graph has {} nodes",
                    x.rows(),
                    graph.num_nodes()
                )));
            }
            Some(x)
        }
        None => None,
    };
    let x_default;
    let x = match &features {
        Some(x) => x,
        None => {
            x_default = labels.one_hot();
            &x_default
        }
    };
    let report = match args.mask_fraction {
        None => metrics::metric_report(&graph, &labels, Some(x), &kind)?,
        Some(frac) => {
            if !(0.0 < frac && frac <= 1.0) {
                return Err(CoreError::Config {
                    path: "mask-fraction".to_string(),
                    reason: format!("{frac} not in (0, 1]"),
                });
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            let rest = 1.0 - frac;
            let split = synth::random_split(
                graph.num_nodes(),
                (frac, rest / 2.0, rest / 2.0),
                &mut rng,
            )?;
            metrics::estimate_metrics_masked(&graph, &labels, x, &split.train, &kind)?
        }
    };
    emit(&args.out, &serde_json::to_string_pretty(&report)?)
}

fn cmd_gen(args: GenArgs) -> Result<(), CoreError> {
    let mode = match args.mode.as_str() {
        "general" => synth::SynthMode::General,
        "regular" => synth::SynthMode::Regular,
        other => {
            return Err(CoreError::Config {
                path: "mode".to_string(),
                reason: format!("unknown mode `{other}`"),
            })
        }
    };
    let spec = SynthSpec {
        mode,
        h_edge_target: args.h,
        num_classes: args.classes,
        nodes_per_class: args.nodes_per_class,
        intra_edges_per_class: args.intra_edges,
        d_intra: args.d_intra,
        seed: args.seed,
    };
    spec.validate().map_err(|e| CoreError::Config {
        path: "spec".to_string(),
        reason: e.to_string(),
    })?;
    let graph = synth::generate(&spec)?;
    let labels = spec.labels();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(train::derive_seed(args.seed, 1));
    let (base_x, base_z) =
        synth::synthetic_feature_base(spec.num_classes, args.feature_dim, 100, 0.1, &mut rng)?;
    let x = synth::sample_features(&base_x, &base_z, &labels, &mut rng)?;

    std::fs::create_dir_all(&args.out)?;
    fio::save_edge_list(&args.out.join("edges.txt"), &graph)?;
    fio::save_labels(&args.out.join("labels.txt"), labels.classes())?;
    fio::save_features_csv(&args.out.join("features.csv"), &x)?;
    std::fs::write(
        args.out.join("spec.json"),
        serde_json::to_string_pretty(&spec)?,
    )?;
    eprintln!(
        "generated {} nodes / {} edges into {}",
        graph.num_nodes(),
        graph.num_edges(),
        args.out.display()
    );
    Ok(())
}

fn build_dataset(cfg: &ExperimentConfig) -> Result<Dataset, CoreError> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(train::derive_seed(cfg.seed, 17));
    if let Some(spec) = &cfg.data.synth {
        let spec = SynthSpec {
            seed: train::derive_seed(cfg.seed, 29) ^ spec.seed,
            ..spec.clone()
        };
        let graph = synth::generate(&spec)?;
        let labels = spec.labels();
        let (base_x, base_z) = synth::synthetic_feature_base(
            spec.num_classes,
            cfg.data.feature_dim,
            100,
            0.1,
            &mut rng,
        )?;
        let x = synth::sample_features(&base_x, &base_z, &labels, &mut rng)?;
        let masks = synth::random_split(graph.num_nodes(), cfg.train.split, &mut rng)?;
        Ok(Dataset::new(graph, x, labels, masks))
    } else {
        let (graph, labels) = load_graph_labels(
            cfg.data.edges.as_ref().expect("validated"),
            cfg.data.labels.as_ref().expect("validated"),
        )?;
        let x = match &cfg.data.features {
            Some(p) => fio::load_features_csv(p)?,
            None => labels.one_hot(),
        };
        if x.rows() != graph.num_nodes() {
            return Err(CoreError::Data(format!(
                "features have {} rows but graph has {} nodes",
                x.rows(),
                graph.num_nodes()
            )));
        }
        let masks = synth::random_split(graph.num_nodes(), cfg.train.split, &mut rng)?;
        Ok(Dataset::new(graph, x, labels, masks))
    }
}

fn load_experiment(path: &Path) -> Result<ExperimentConfig, CoreError> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| CoreError::Config {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_train(args: TrainArgs) -> Result<(), CoreError> {
    let mut cfg = load_experiment(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let data = build_dataset(&cfg)?;
    let train_cfg = TrainConfig {
        seed: train::derive_seed(cfg.seed, 0) ^ cfg.train.seed,
        ..cfg.train.clone()
    };
    if cfg.runs == 1 {
        let trained = train::train_model(&cfg.model, &data, &train_cfg)?;
        if let Some(stem) = &args.save_params {
            trained.params.save(stem)?;
        }
        eprintln!(
            "test accuracy {:.4} ({} epochs, {:.2} ms/epoch)",
            trained.result.test_accuracy, trained.result.epochs_run, trained.result.wall_ms_per_epoch
        );
        emit(&args.out, &serde_json::to_string_pretty(&trained.result)?)
    } else {
        let summary = train::run_repeated(&cfg.model, &data, &train_cfg, cfg.runs)?;
        eprintln!(
            "test accuracy {:.4} +- {:.4} over {} runs",
            summary.mean_accuracy, summary.std_accuracy, cfg.runs
        );
        emit(&args.out, &serde_json::to_string_pretty(&summary)?)
    }
}

fn parse_model(name: &str) -> Result<ModelSpec, CoreError> {
    let bad = || CoreError::Config {
        path: "models".to_string(),
        reason: format!("unknown model `{name}`"),
    };
    let spec = match name {
        "mlp1" => {
            let mut s = ModelSpec::new(ModelFamily::Mlp);
            s.layers = 1;
            s
        }
        "mlp2" => ModelSpec::new(ModelFamily::Mlp),
        "sgc1" => ModelSpec::new(ModelFamily::Sgc),
        "sgc2" => {
            let mut s = ModelSpec::new(ModelFamily::Sgc);
            s.layers = 2;
            s
        }
        "gcn" => ModelSpec::new(ModelFamily::Gcn),
        "snowball2" => ModelSpec::new(ModelFamily::Snowball),
        "snowball3" => {
            let mut s = ModelSpec::new(ModelFamily::Snowball);
            s.layers = 3;
            s
        }
        "acm_gcn" => ModelSpec::new(ModelFamily::AcmGcn),
        "acmii_gcn" => ModelSpec::new(ModelFamily::AcmiiGcn),
        "acm_sgc1" => {
            let mut s = ModelSpec::new(ModelFamily::AcmSgc);
            s.layers = 1;
            s
        }
        "acm_gcn_plus" => ModelSpec::new(ModelFamily::AcmGcnPlus),
        "acm_gcn_plus_plus" => ModelSpec::new(ModelFamily::AcmGcnPlusPlus),
        _ => return Err(bad()),
    };
    spec.validate().map_err(|_| bad())?;
    Ok(spec)
}

fn cmd_curve(args: CurveArgs) -> Result<(), CoreError> {
    let mode = match args.mode.as_str() {
        "general" => synth::SynthMode::General,
        "regular" => synth::SynthMode::Regular,
        other => {
            return Err(CoreError::Config {
                path: "mode".to_string(),
                reason: format!("unknown mode `{other}`"),
            })
        }
    };
    let levels: Result<Vec<f64>, _> = args
        .levels
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect();
    let levels = levels.map_err(|e| CoreError::Config {
        path: "levels".to_string(),
        reason: e.to_string(),
    })?;
    let models: Result<Vec<ModelSpec>, CoreError> =
        args.models.split(',').map(|m| parse_model(m.trim())).collect();
    let models = models?;
    let train_cfg = match &args.train_config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?).map_err(|e| {
            CoreError::Config {
                path: p.display().to_string(),
                reason: e.to_string(),
            }
        })?,
        None => TrainConfig {
            lr: 0.05,
            weight_decay: 5e-4,
            ..TrainConfig::default()
        },
    };
    let curve = CurveSpec {
        mode,
        h_levels: levels,
        graphs_per_level: args.graphs_per_level,
        num_classes: args.classes,
        nodes_per_class: args.nodes_per_class,
        intra_edges_per_class: args.intra_edges,
        d_intra: args.d_intra,
        feature_dim: args.feature_dim,
        seed: args.seed,
    };
    let table = train::run_synthetic_curve(&curve, &models, &train_cfg)?;
    std::fs::write(&args.out, fio::curve_to_csv(&table))?;
    eprintln!("wrote {} rows to {}", table.rows.len(), args.out.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CoreError> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg: SweepConfig = serde_json::from_str(&text).map_err(|e| CoreError::Config {
        path: args.config.display().to_string(),
        reason: e.to_string(),
    })?;
    if let Some(seed) = args.seed {
        cfg.base.seed = seed;
    }
    cfg.base.validate()?;
    let data = build_dataset(&cfg.base)?;
    let or_default = |v: &[f64], d: f64| if v.is_empty() { vec![d] } else { v.to_vec() };
    let lrs = or_default(&cfg.grid.lr, cfg.base.train.lr);
    let wds = or_default(&cfg.grid.weight_decay, cfg.base.train.weight_decay);
    let drops = or_default(&cfg.grid.dropout, cfg.base.model.dropout);
    let hiddens = if cfg.grid.hidden.is_empty() {
        vec![cfg.base.model.hidden]
    } else {
        cfg.grid.hidden.clone()
    };

    let mut entries = Vec::new();
    for &lr in &lrs {
        for &wd in &wds {
            for &dropout in &drops {
                for &hidden in &hiddens {
                    let mut model = cfg.base.model.clone();
                    model.dropout = dropout;
                    model.hidden = hidden;
                    let tc = TrainConfig {
                        lr,
                        weight_decay: wd,
                        seed: train::derive_seed(cfg.base.seed, 0) ^ cfg.base.train.seed,
                        ..cfg.base.train.clone()
                    };
                    let summary = train::run_repeated(&model, &data, &tc, cfg.base.runs)?;
                    let val_mean = summary
                        .runs
                        .iter()
                        .map(|r| r.best_val_accuracy)
                        .sum::<f64>()
                        / summary.runs.len().max(1) as f64;
                    entries.push(SweepEntry {
                        lr,
                        weight_decay: wd,
                        dropout,
                        hidden,
                        val_accuracy_mean: val_mean,
                        test_accuracy_mean: summary.mean_accuracy,
                        test_accuracy_std: summary.std_accuracy,
                    });
                }
            }
        }
    }
    let best = entries
        .iter()
        .cloned()
        .max_by(|a, b| {
            a.val_accuracy_mean
                .partial_cmp(&b.val_accuracy_mean)
                .expect("finite accuracies")
        })
        .ok_or_else(|| CoreError::Config {
            path: "grid".to_string(),
            reason: "empty grid".to_string(),
        })?;
    let report = serde_json::json!({ "best": best, "entries": entries });
    emit(&args.out, &serde_json::to_string_pretty(&report)?)
}
