//! Model definitions on autodiff tapes: MLP, SGC, GCN, snowball stacks, and
//! the adaptive channel-mixing family.
//!
//! A channel-mixing layer runs a low-pass/high-pass/identity filterbank with
//! the perfect-reconstruction pair LP + HP = I:
//!
//! * Step 1 extracts one feature block per enabled channel. Variant 1 applies
//!   the filter before the ReLU, variant 2 after.
//! * Step 2 learns row-wise weights: per-channel sigmoid scores, concatenated,
//!   divided by the temperature, optionally mixed by a small square matrix,
//!   then row-softmaxed.
//! * Step 3 sums the channels scaled node-wise by the learned weights.
//!
//! The `plus` variants add layer normalization in step 2, an optional fourth
//! channel built from raw adjacency rows, and (for `plus_plus`) a residual
//! feature branch added to every hidden layer.
//!
//! The output layer omits both ReLUs so logits stay unbounded; with only the
//! LP channel enabled the whole stack reduces to a plain GCN bit for bit.

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::filter::{make_filter, CsrMatrix, FilterKind};
use crate::graph::Graph;
use crate::tensor::Tensor;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Mlp,
    Sgc,
    Gcn,
    Snowball,
    AcmGcn,
    AcmiiGcn,
    AcmSgc,
    AcmGcnPlus,
    AcmGcnPlusPlus,
}

impl ModelFamily {
    pub fn is_acm(&self) -> bool {
        matches!(
            self,
            ModelFamily::AcmGcn
                | ModelFamily::AcmiiGcn
                | ModelFamily::AcmSgc
                | ModelFamily::AcmGcnPlus
                | ModelFamily::AcmGcnPlusPlus
        )
    }

    pub fn is_plus(&self) -> bool {
        matches!(
            self,
            ModelFamily::AcmGcnPlus | ModelFamily::AcmGcnPlusPlus
        )
    }
}

/// Channel-mask ablation knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub lp: bool,
    pub hp: bool,
    pub identity: bool,
    #[serde(default)]
    pub structure: bool,
}

impl Default for ChannelSet {
    fn default() -> Self {
        ChannelSet {
            lp: true,
            hp: true,
            identity: true,
            structure: false,
        }
    }
}

impl ChannelSet {
    pub fn lp_only() -> Self {
        ChannelSet {
            lp: true,
            hp: false,
            identity: false,
            structure: false,
        }
    }

    pub fn count(&self) -> usize {
        usize::from(self.lp)
            + usize::from(self.hp)
            + usize::from(self.identity)
            + usize::from(self.structure)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    /// Layer count for stacked families, hop count for SGC.
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    #[serde(default)]
    pub dropout: f64,
    /// Step-1 option: 1 filters before the nonlinearity, 2 after.
    #[serde(default = "default_variant")]
    pub variant: u8,
    #[serde(default)]
    pub channels: ChannelSet,
    #[serde(default = "default_true")]
    pub use_mixing: bool,
    /// Softmax temperature; defaults to the number of enabled channels.
    #[serde(default)]
    pub temperature: Option<f64>,
    /// Residual feature branch (`plus_plus` only).
    #[serde(default)]
    pub use_residual: bool,
    #[serde(default = "default_filter")]
    pub filter: FilterKind,
    /// Diagnostic: replace every ReLU with the identity.
    #[serde(default)]
    pub linear_act: bool,
}

fn default_layers() -> usize {
    2
}
fn default_hidden() -> usize {
    64
}
fn default_variant() -> u8 {
    1
}
fn default_true() -> bool {
    true
}
fn default_filter() -> FilterKind {
    FilterKind::ArwHat
}

impl ModelSpec {
    pub fn new(family: ModelFamily) -> Self {
        let mut spec = ModelSpec {
            family,
            layers: default_layers(),
            hidden: default_hidden(),
            dropout: 0.0,
            variant: default_variant(),
            channels: ChannelSet::default(),
            use_mixing: true,
            temperature: None,
            use_residual: false,
            filter: default_filter(),
            linear_act: false,
        };
        match family {
            ModelFamily::Sgc | ModelFamily::AcmSgc => spec.layers = 1,
            ModelFamily::AcmiiGcn => spec.variant = 2,
            ModelFamily::AcmGcnPlus => spec.channels.structure = true,
            ModelFamily::AcmGcnPlusPlus => {
                spec.channels.structure = true;
                spec.use_residual = true;
            }
            _ => {}
        }
        spec
    }

    pub fn name(&self) -> String {
        let base = match self.family {
            ModelFamily::Mlp => "mlp",
            ModelFamily::Sgc => "sgc",
            ModelFamily::Gcn => return "gcn".to_string(),
            ModelFamily::Snowball => "snowball",
            ModelFamily::AcmGcn => return "acm_gcn".to_string(),
            ModelFamily::AcmiiGcn => return "acmii_gcn".to_string(),
            ModelFamily::AcmSgc => "acm_sgc",
            ModelFamily::AcmGcnPlus => return "acm_gcn_plus".to_string(),
            ModelFamily::AcmGcnPlusPlus => return "acm_gcn_plus_plus".to_string(),
        };
        format!("{base}{}", self.layers)
    }

    /// Temperature actually used: explicit value or enabled-channel count.
    pub fn effective_temperature(&self) -> f64 {
        self.temperature
            .unwrap_or_else(|| self.channels.count() as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidParameter {
            name: "model",
            reason,
        };
        if self.layers == 0 && self.family != ModelFamily::Sgc {
            return Err(bad("layers must be >= 1".to_string()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(bad(format!("dropout {} not in [0, 1)", self.dropout)));
        }
        if !matches!(self.variant, 1 | 2) {
            return Err(bad(format!("variant {} must be 1 or 2", self.variant)));
        }
        if let Some(t) = self.temperature {
            if !(t > 0.0) {
                return Err(bad(format!("temperature {t} must be positive")));
            }
        }
        if self.family.is_acm() {
            if !self.channels.lp {
                return Err(bad("channel-mixing models require the LP channel".to_string()));
            }
            if self.channels.count() == 0 {
                return Err(bad("no channel enabled".to_string()));
            }
            if self.channels.structure && !self.family.is_plus() {
                return Err(bad(
                    "structure channel is only available in the plus families".to_string(),
                ));
            }
        }
        if self.use_residual && self.family != ModelFamily::AcmGcnPlusPlus {
            return Err(bad("residual branch is a plus_plus feature".to_string()));
        }
        if self.family == ModelFamily::Snowball && !(1..=3).contains(&self.layers) {
            return Err(bad("snowball supports 1..=3 layers".to_string()));
        }
        Ok(())
    }
}

/// Sparse operators a model needs for one graph, built once and shared.
#[derive(Debug, Clone)]
pub struct GraphOps {
    pub lp: Arc<CsrMatrix>,
    pub hp: Arc<CsrMatrix>,
    pub adj: Arc<CsrMatrix>,
    pub num_nodes: usize,
}

impl GraphOps {
    pub fn build(g: &Graph, kind: &FilterKind) -> Result<GraphOps> {
        let lp = make_filter(g, kind)?;
        let hp = make_filter(g, &FilterKind::HighPassOf(Box::new(kind.clone())))?;
        Ok(GraphOps {
            lp: Arc::new(lp.matrix().clone()),
            hp: Arc::new(hp.matrix().clone()),
            adj: Arc::new(CsrMatrix::adjacency(g)),
            num_nodes: g.num_nodes(),
        })
    }
}

/// Named parameter tensors in deterministic (insertion) order.
#[derive(Debug, Clone, Default)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(|t| t.rows() * t.cols()).sum()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.tensors[i])
    }

    pub fn set(&mut self, name: &str, t: Tensor) -> Result<()> {
        match self.names.iter().position(|n| n == name) {
            Some(i) => {
                self.tensors[i] = t;
                Ok(())
            }
            None => Err(Error::InvalidParameter {
                name: "param",
                reason: format!("unknown parameter `{name}`"),
            }),
        }
    }

    fn push(&mut self, name: String, t: Tensor) {
        self.names.push(name);
        self.tensors.push(t);
    }

    /// Insert every parameter into a tape as a leaf, in order.
    pub fn mount(&self, tape: &mut Tape) -> Result<Vec<Var>> {
        self.tensors.iter().map(|t| tape.leaf(t.clone())).collect()
    }

    /// Flat binary blob plus a JSON manifest describing each tensor.
    pub fn save(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Entry<'a> {
            name: &'a str,
            rows: usize,
            cols: usize,
            offset: usize,
        }
        let mut entries = Vec::new();
        let mut blob: Vec<u8> = Vec::new();
        for (name, t) in self.names.iter().zip(&self.tensors) {
            entries.push(Entry {
                name,
                rows: t.rows(),
                cols: t.cols(),
                offset: blob.len(),
            });
            for v in t.data() {
                blob.extend_from_slice(&v.to_le_bytes());
            }
        }
        let manifest = serde_json::to_string_pretty(&serde_json::json!({ "tensors": entries }))?;
        std::fs::write(path.with_extension("json"), manifest)?;
        let mut f = std::fs::File::create(path.with_extension("bin"))?;
        f.write_all(&blob)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ParamSet> {
        #[derive(Deserialize)]
        struct Entry {
            name: String,
            rows: usize,
            cols: usize,
            offset: usize,
        }
        #[derive(Deserialize)]
        struct Manifest {
            tensors: Vec<Entry>,
        }
        let manifest: Manifest =
            serde_json::from_str(&std::fs::read_to_string(path.with_extension("json"))?)?;
        let mut blob = Vec::new();
        std::fs::File::open(path.with_extension("bin"))?.read_to_end(&mut blob)?;
        let mut out = ParamSet::default();
        for e in manifest.tensors {
            let count = e.rows * e.cols;
            let end = e.offset + count * 8;
            if end > blob.len() {
                return Err(Error::Data(format!(
                    "checkpoint blob too short for tensor `{}`",
                    e.name
                )));
            }
            let data: Vec<f64> = blob[e.offset..end]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            out.push(e.name, Tensor::from_vec(e.rows, e.cols, data)?);
        }
        Ok(out)
    }
}

const CHANNEL_TAGS: [(&str, usize); 4] = [("lp", 0), ("hp", 1), ("id", 2), ("struct", 3)];

fn enabled_channels(spec: &ModelSpec) -> Vec<usize> {
    let mut out = Vec::new();
    if spec.channels.lp {
        out.push(0);
    }
    if spec.channels.hp {
        out.push(1);
    }
    if spec.channels.identity {
        out.push(2);
    }
    if spec.channels.structure && spec.family.is_plus() {
        out.push(3);
    }
    out
}

/// Per-layer feature widths, input to output.
fn layer_dims(spec: &ModelSpec, in_dim: usize, out_dim: usize) -> Vec<(usize, usize)> {
    let mut dims = Vec::with_capacity(spec.layers);
    let mut prev = in_dim;
    for l in 0..spec.layers {
        let next = if l + 1 == spec.layers { out_dim } else { spec.hidden };
        dims.push((prev, next));
        prev = next;
    }
    dims
}

/// Allocate all parameters for a spec with Glorot-uniform init.
pub fn init_params<R: Rng>(
    spec: &ModelSpec,
    in_dim: usize,
    out_dim: usize,
    num_nodes: usize,
    rng: &mut R,
) -> Result<ParamSet> {
    spec.validate()?;
    let mut ps = ParamSet::default();
    match spec.family {
        ModelFamily::Sgc => {
            ps.push("w".to_string(), Tensor::glorot_uniform(in_dim, out_dim, rng));
        }
        ModelFamily::Mlp | ModelFamily::Gcn => {
            for (l, (fi, fo)) in layer_dims(spec, in_dim, out_dim).into_iter().enumerate() {
                ps.push(format!("w{l}"), Tensor::glorot_uniform(fi, fo, rng));
            }
        }
        ModelFamily::Snowball => {
            let mut widths = vec![in_dim];
            for l in 0..spec.layers {
                let concat: usize = widths.iter().sum();
                let fo = if l + 1 == spec.layers { out_dim } else { spec.hidden };
                ps.push(format!("w{l}"), Tensor::glorot_uniform(concat, fo, rng));
                widths.push(fo);
            }
        }
        _ => {
            let channels = enabled_channels(spec);
            let k = channels.len();
            for (l, (fi, fo)) in layer_dims(spec, in_dim, out_dim).into_iter().enumerate() {
                for &c in &channels {
                    let tag = CHANNEL_TAGS[c].0;
                    let rows = if c == 3 { num_nodes } else { fi };
                    ps.push(
                        format!("l{l}.w_{tag}"),
                        Tensor::glorot_uniform(rows, fo, rng),
                    );
                    ps.push(
                        format!("l{l}.wg_{tag}"),
                        Tensor::glorot_uniform(fo, 1, rng),
                    );
                    if spec.family.is_plus() {
                        ps.push(format!("l{l}.ln_g_{tag}"), ones(1, fo));
                        ps.push(format!("l{l}.ln_b_{tag}"), Tensor::zeros(1, fo));
                    }
                }
                if spec.use_mixing && k > 1 {
                    ps.push(format!("l{l}.w_mix"), Tensor::glorot_uniform(k, k, rng));
                }
            }
            if spec.use_residual {
                ps.push(
                    "w_res".to_string(),
                    Tensor::glorot_uniform(in_dim, spec.hidden, rng),
                );
            }
        }
    }
    Ok(ps)
}

fn ones(rows: usize, cols: usize) -> Tensor {
    Tensor::from_vec(rows, cols, vec![1.0; rows * cols]).expect("shape")
}

/// Exact learnable-parameter count of a three-channel mixing layer:
/// `3 F_in (F_out + 1) + 9`.
pub fn acm_layer_param_count(f_in: usize, f_out: usize) -> usize {
    3 * f_in * (f_out + 1) + 9
}

/// Learnable parameters of one GCN layer.
pub fn gcn_layer_param_count(f_in: usize, f_out: usize) -> usize {
    f_in * f_out
}

/// Total scalar parameter count for a spec, matching `init_params` exactly.
pub fn param_count(spec: &ModelSpec, in_dim: usize, out_dim: usize, num_nodes: usize) -> usize {
    // Cheap and always in sync with the allocation logic.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    init_params(spec, in_dim, out_dim, num_nodes, &mut rng)
        .map(|p| p.num_scalars())
        .unwrap_or(0)
}

/// Mounted parameters resolved by name.
struct Mounted<'a> {
    by_name: BTreeMap<&'a str, Var>,
}

impl<'a> Mounted<'a> {
    fn new(ps: &'a ParamSet, vars: &[Var]) -> Self {
        let by_name = ps
            .names()
            .iter()
            .map(|n| n.as_str())
            .zip(vars.iter().copied())
            .collect();
        Mounted { by_name }
    }

    fn get(&self, name: &str) -> Result<Var> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidParameter {
                name: "param",
                reason: format!("missing parameter `{name}`"),
            })
    }
}

/// Build the forward graph for `spec` on `tape` and return the logits node.
/// Dropout is active only when the tape is in training mode.
pub fn forward(
    tape: &mut Tape,
    spec: &ModelSpec,
    params: &ParamSet,
    param_vars: &[Var],
    ops: &GraphOps,
    x: Var,
) -> Result<Var> {
    spec.validate()?;
    let m = Mounted::new(params, param_vars);
    match spec.family {
        ModelFamily::Sgc => {
            let mut h = x;
            for _ in 0..spec.layers {
                h = tape.spmm(&ops.lp, h)?;
            }
            tape.matmul(h, m.get("w")?)
        }
        ModelFamily::Mlp => {
            let mut h = x;
            for l in 0..spec.layers {
                h = tape.dropout(h, spec.dropout)?;
                h = tape.matmul(h, m.get(&format!("w{l}"))?)?;
                if l + 1 < spec.layers {
                    h = maybe_relu(tape, spec, h)?;
                }
            }
            Ok(h)
        }
        ModelFamily::Gcn => {
            let mut h = x;
            for l in 0..spec.layers {
                h = tape.dropout(h, spec.dropout)?;
                h = tape.matmul(h, m.get(&format!("w{l}"))?)?;
                h = tape.spmm(&ops.lp, h)?;
                if l + 1 < spec.layers {
                    h = maybe_relu(tape, spec, h)?;
                }
            }
            Ok(h)
        }
        ModelFamily::Snowball => {
            let mut acc = vec![x];
            for l in 0..spec.layers {
                let cat = if acc.len() == 1 {
                    acc[0]
                } else {
                    tape.concat_cols(&acc)?
                };
                let dropped = tape.dropout(cat, spec.dropout)?;
                let mut h = tape.matmul(dropped, m.get(&format!("w{l}"))?)?;
                h = tape.spmm(&ops.lp, h)?;
                if l + 1 < spec.layers {
                    h = maybe_relu(tape, spec, h)?;
                    acc.push(h);
                } else {
                    return Ok(h);
                }
            }
            unreachable!("layers >= 1")
        }
        _ => forward_acm(tape, spec, &m, ops, x),
    }
}

fn maybe_relu(tape: &mut Tape, spec: &ModelSpec, h: Var) -> Result<Var> {
    if spec.linear_act {
        Ok(h)
    } else {
        tape.relu(h)
    }
}

fn forward_acm(
    tape: &mut Tape,
    spec: &ModelSpec,
    m: &Mounted,
    ops: &GraphOps,
    x: Var,
) -> Result<Var> {
    let residual = if spec.use_residual {
        let dropped = tape.dropout(x, spec.dropout)?;
        let pre = tape.matmul(dropped, m.get("w_res")?)?;
        Some(maybe_relu(tape, spec, pre)?)
    } else {
        None
    };
    let mut h = x;
    for l in 0..spec.layers {
        let is_output = l + 1 == spec.layers;
        h = acm_layer(tape, spec, m, ops, h, l, is_output)?.0;
        if !is_output {
            if let Some(r) = residual {
                h = tape.add(h, r)?;
            }
        }
    }
    Ok(h)
}

/// One adaptive channel-mixing layer. `is_output` drops both ReLUs so the
/// result can serve as logits. Returns the layer output and, when more than
/// one channel is enabled, the N x k mixing-weight node.
fn acm_layer(
    tape: &mut Tape,
    spec: &ModelSpec,
    m: &Mounted,
    ops: &GraphOps,
    h_prev: Var,
    l: usize,
    is_output: bool,
) -> Result<(Var, Option<Var>)> {
    let channels = enabled_channels(spec);
    let h_in = tape.dropout(h_prev, spec.dropout)?;

    // Step 1: per-channel feature extraction.
    let mut extracted = Vec::with_capacity(channels.len());
    for &c in &channels {
        let tag = CHANNEL_TAGS[c].0;
        let w = m.get(&format!("l{l}.w_{tag}"))?;
        let filt: Option<&Arc<CsrMatrix>> = match c {
            0 => Some(&ops.lp),
            1 => Some(&ops.hp),
            2 => None,
            _ => Some(&ops.adj),
        };
        let hc = if c == 3 {
            // Structure channel consumes adjacency rows, not features.
            let pre = tape.spmm(&ops.adj, w)?;
            if is_output { pre } else { maybe_relu(tape, spec, pre)? }
        } else {
            match (spec.variant, filt) {
                (1, Some(f)) => {
                    let t = tape.matmul(h_in, w)?;
                    let t = tape.spmm(f, t)?;
                    if is_output { t } else { maybe_relu(tape, spec, t)? }
                }
                (1, None) => {
                    let t = tape.matmul(h_in, w)?;
                    if is_output { t } else { maybe_relu(tape, spec, t)? }
                }
                (2, Some(f)) => {
                    let t = tape.matmul(h_in, w)?;
                    let t = if is_output { t } else { maybe_relu(tape, spec, t)? };
                    tape.spmm(f, t)?
                }
                (2, None) => {
                    let t = tape.matmul(h_in, w)?;
                    if is_output { t } else { maybe_relu(tape, spec, t)? }
                }
                _ => unreachable!("variant validated"),
            }
        };
        extracted.push(hc);
    }

    // Single channel: the softmax weight is identically one, skip steps 2-3.
    if extracted.len() == 1 {
        let out = extracted[0];
        let out = if is_output { out } else { maybe_relu(tape, spec, out)? };
        return Ok((out, None));
    }

    // Step 2: row-wise weight learning.
    let mut scores = Vec::with_capacity(extracted.len());
    for (&c, &hc) in channels.iter().zip(&extracted) {
        let tag = CHANNEL_TAGS[c].0;
        let gated = if spec.family.is_plus() {
            let gamma = m.get(&format!("l{l}.ln_g_{tag}"))?;
            let beta = m.get(&format!("l{l}.ln_b_{tag}"))?;
            tape.layer_norm(hc, gamma, beta)?
        } else {
            hc
        };
        let wg = m.get(&format!("l{l}.wg_{tag}"))?;
        let logit = tape.matmul(gated, wg)?;
        scores.push(tape.sigmoid(logit)?);
    }
    let stacked = tape.concat_cols(&scores)?;
    let tempered = tape.scale(stacked, 1.0 / spec.effective_temperature())?;
    let mixed = if spec.use_mixing {
        tape.matmul(tempered, m.get(&format!("l{l}.w_mix"))?)?
    } else {
        tempered
    };
    let alpha = tape.row_softmax(mixed, 1.0)?;

    // Step 3: node-wise mixing.
    let mut out: Option<Var> = None;
    for (idx, &hc) in extracted.iter().enumerate() {
        let a = tape.col(alpha, idx)?;
        let scaled = tape.row_scale(hc, a)?;
        out = Some(match out {
            Some(acc) => tape.add(acc, scaled)?,
            None => scaled,
        });
    }
    let out = out.expect("at least one channel");
    let out = if is_output { out } else { maybe_relu(tape, spec, out)? };
    Ok((out, Some(alpha)))
}

/// Forward pass on a fresh tape, returning logits as a plain tensor.
/// Convenience for evaluation.
pub fn eval_logits(
    spec: &ModelSpec,
    params: &ParamSet,
    ops: &GraphOps,
    x: &Tensor,
    seed: u64,
) -> Result<Tensor> {
    let mut tape = Tape::new(seed);
    let vars = params.mount(&mut tape)?;
    let xv = tape.leaf(x.clone())?;
    let logits = forward(&mut tape, spec, params, &vars, ops, xv)?;
    Ok(tape.value(logits).clone())
}

/// Mixing weights (alpha rows) of each channel-mixing layer in eval mode.
/// Layers are returned input to output; each tensor is N x k.
pub fn mixing_weights(
    spec: &ModelSpec,
    params: &ParamSet,
    ops: &GraphOps,
    x: &Tensor,
) -> Result<Vec<Tensor>> {
    spec.validate()?;
    if !spec.family.is_acm() {
        return Ok(Vec::new());
    }
    let channels = enabled_channels(spec);
    if channels.len() < 2 {
        return Ok(Vec::new());
    }
    let mut tape = Tape::new(0);
    let vars = params.mount(&mut tape)?;
    let m = Mounted::new(params, &vars);
    let mut h = tape.leaf(x.clone())?;
    let mut alphas = Vec::new();
    for l in 0..spec.layers {
        let is_output = l + 1 == spec.layers;
        let (next, alpha) = acm_layer(&mut tape, spec, &m, ops, h, l, is_output)?;
        if let Some(a) = alpha {
            alphas.push(tape.value(a).clone());
        }
        h = next;
    }
    Ok(alphas)
}
