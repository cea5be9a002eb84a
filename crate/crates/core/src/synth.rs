//! Synthetic graph generation with a target edge homophily level, plus
//! feature sampling from a base corpus and random split generation.
//!
//! Two modes:
//!
//! * `General` - per class, a total degree budget of `intra_edges / h` is
//!   spread over the class nodes multinomially; each node then splits its
//!   budget h : (1-h) between uniform same-class and uniform other-class
//!   targets. Realized edge homophily tracks `h` up to sampling noise.
//! * `Regular` - every node gets exactly `d_intra` intra-class stubs and
//!   `round(d_intra/h - d_intra)` inter-class stubs, matched into a simple
//!   graph configuration-model style with rejection of self and duplicate
//!   pairs.
//!
//! Generators validate by realized homophily rather than by matching any
//! particular reference sampling stream.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::LabelEncoding;
use crate::tensor::Tensor;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthMode {
    General,
    Regular,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub mode: SynthMode,
    pub h_edge_target: f64,
    #[serde(default = "default_classes")]
    pub num_classes: usize,
    #[serde(default = "default_nodes_per_class")]
    pub nodes_per_class: usize,
    /// Intra-class edges per class (General mode).
    #[serde(default = "default_intra_edges")]
    pub intra_edges_per_class: usize,
    /// Intra-class stubs per node (Regular mode).
    #[serde(default = "default_d_intra")]
    pub d_intra: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_classes() -> usize {
    5
}
fn default_nodes_per_class() -> usize {
    400
}
fn default_intra_edges() -> usize {
    800
}
fn default_d_intra() -> usize {
    10
}

impl SynthSpec {
    pub fn general(h: f64, seed: u64) -> Self {
        SynthSpec {
            mode: SynthMode::General,
            h_edge_target: h,
            num_classes: default_classes(),
            nodes_per_class: default_nodes_per_class(),
            intra_edges_per_class: default_intra_edges(),
            d_intra: default_d_intra(),
            seed,
        }
    }

    pub fn regular(h: f64, seed: u64) -> Self {
        SynthSpec {
            mode: SynthMode::Regular,
            ..Self::general(h, seed)
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_classes * self.nodes_per_class
    }

    /// Ground-truth labels: nodes are laid out class-contiguously.
    pub fn labels(&self) -> LabelEncoding {
        let classes = (0..self.num_nodes())
            .map(|v| v / self.nodes_per_class)
            .collect();
        LabelEncoding::with_num_classes(classes, self.num_classes).expect("nonempty")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_edge_target > 0.0 && self.h_edge_target <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "h_edge_target",
                reason: format!("{} not in (0, 1]", self.h_edge_target),
            });
        }
        if self.num_classes < 2 || self.nodes_per_class < 2 {
            return Err(Error::InvalidParameter {
                name: "num_classes/nodes_per_class",
                reason: "need at least 2 classes and 2 nodes per class".to_string(),
            });
        }
        match self.mode {
            SynthMode::General => {
                if self.intra_edges_per_class == 0 {
                    return Err(Error::InvalidParameter {
                        name: "intra_edges_per_class",
                        reason: "must be >= 1".to_string(),
                    });
                }
                // Average inter-degree per node must leave room in the
                // other-class pool for a simple graph.
                let budget = self.intra_edges_per_class as f64 / self.h_edge_target;
                let per_node_inter = (1.0 - self.h_edge_target) * budget / self.nodes_per_class as f64;
                let capacity = ((self.num_classes - 1) * self.nodes_per_class) as f64;
                if per_node_inter > 0.8 * capacity {
                    return Err(Error::Infeasible(format!(
                        "expected inter-class degree {per_node_inter:.1} exceeds 80% of the \
                         {capacity:.0}-node other-class pool"
                    )));
                }
            }
            SynthMode::Regular => {
                if self.d_intra == 0 {
                    return Err(Error::InvalidParameter {
                        name: "d_intra",
                        reason: "must be >= 1".to_string(),
                    });
                }
                if self.d_intra >= self.nodes_per_class {
                    return Err(Error::Infeasible(
                        "d_intra must be below nodes_per_class".to_string(),
                    ));
                }
                let inter = inter_stubs(self.d_intra, self.h_edge_target);
                let capacity = (self.num_classes - 1) * self.nodes_per_class;
                if inter as f64 > 0.8 * capacity as f64 {
                    return Err(Error::Infeasible(format!(
                        "inter-class stub count {inter} exceeds 80% of the \
                         {capacity}-node other-class pool"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Round half to even, the convention used for every bracketed count.
pub fn round_half_even(x: f64) -> usize {
    let floor = x.floor();
    let frac = x - floor;
    let f = floor as usize;
    if frac > 0.5 || (frac == 0.5 && f % 2 == 1) {
        f + 1
    } else {
        f
    }
}

fn inter_stubs(d_intra: usize, h: f64) -> usize {
    round_half_even(d_intra as f64 / h - d_intra as f64)
}

/// Generate with the mode recorded in the spec, seeding an internal RNG from
/// `spec.seed`. Identical specs give bit-identical graphs.
pub fn generate(spec: &SynthSpec) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.mode {
        SynthMode::General => generate_general(spec, &mut rng),
        SynthMode::Regular => generate_regular(spec, &mut rng),
    }
}

/// General-mode generator: multinomial degree budgets, uniform target draws,
/// collisions resampled up to 100 times then dropped.
pub fn generate_general<R: Rng>(spec: &SynthSpec, rng: &mut R) -> Result<Graph> {
    spec.validate()?;
    if spec.mode != SynthMode::General {
        return Err(Error::InvalidParameter {
            name: "mode",
            reason: "generate_general requires General mode".to_string(),
        });
    }
    let h = spec.h_edge_target;
    let npc = spec.nodes_per_class;
    let n = spec.num_nodes();
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    let mut edge_list = Vec::new();

    for class in 0..spec.num_classes {
        let class_start = class * npc;
        // Total degree budget for the class, spread multinomially.
        let budget = round_half_even(spec.intra_edges_per_class as f64 / h);
        let mut degree = vec![0usize; npc];
        for _ in 0..budget {
            degree[rng.gen_range(0..npc)] += 1;
        }
        for (i, &d_v) in degree.iter().enumerate() {
            let v = class_start + i;
            // Two-category multinomial split of the budget, h : (1-h).
            let n_intra = (0..d_v).filter(|_| rng.gen::<f64>() < h).count();
            let n_inter = d_v - n_intra;
            draw_targets(
                rng,
                v,
                n_intra,
                &mut edges,
                &mut edge_list,
                |rng| class_start + rng.gen_range(0..npc),
            );
            draw_targets(rng, v, n_inter, &mut edges, &mut edge_list, |rng| {
                let mut u = rng.gen_range(0..n - npc);
                if u >= class_start {
                    u += npc;
                }
                u
            });
        }
    }
    Graph::from_edges(&edge_list, n)
}

/// Draw `count` targets for `v`, retrying self-loops and existing edges up to
/// 100 times each before dropping the draw.
fn draw_targets<R: Rng>(
    rng: &mut R,
    v: usize,
    count: usize,
    edges: &mut HashSet<(usize, usize)>,
    edge_list: &mut Vec<(usize, usize)>,
    mut pick: impl FnMut(&mut R) -> usize,
) {
    for _ in 0..count {
        for _attempt in 0..100 {
            let u = pick(rng);
            if u == v {
                continue;
            }
            let key = (v.min(u), v.max(u));
            if edges.insert(key) {
                edge_list.push(key);
                break;
            }
        }
    }
}

/// Regular-mode generator: exact intra/inter stub counts per node matched via
/// shuffled pairing with rejection. Leftover stubs are dropped, at most a
/// couple per node, keeping the degree spread within the matching slack.
pub fn generate_regular<R: Rng>(spec: &SynthSpec, rng: &mut R) -> Result<Graph> {
    spec.validate()?;
    if spec.mode != SynthMode::Regular {
        return Err(Error::InvalidParameter {
            name: "mode",
            reason: "generate_regular requires Regular mode".to_string(),
        });
    }
    let npc = spec.nodes_per_class;
    let n = spec.num_nodes();
    let n_inter = inter_stubs(spec.d_intra, spec.h_edge_target);
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    let mut edge_list = Vec::new();
    let mut dropped_per_node = vec![0usize; n];

    let class_of = move |v: usize| v / npc;
    for class in 0..spec.num_classes {
        let start = class * npc;
        let mut stubs = Vec::with_capacity(npc * spec.d_intra);
        for v in start..start + npc {
            stubs.extend(std::iter::repeat_n(v, spec.d_intra));
        }
        match_stubs(
            rng,
            stubs,
            &mut edges,
            &mut edge_list,
            &mut dropped_per_node,
            move |u, v| class_of(u) == class_of(v),
        );
    }
    if n_inter > 0 {
        let mut stubs = Vec::with_capacity(n * n_inter);
        for v in 0..n {
            stubs.extend(std::iter::repeat_n(v, n_inter));
        }
        match_stubs(
            rng,
            stubs,
            &mut edges,
            &mut edge_list,
            &mut dropped_per_node,
            move |u, v| class_of(u) != class_of(v),
        );
    }
    if let Some((v, &d)) = dropped_per_node.iter().enumerate().max_by_key(|(_, &d)| d) {
        if d > 2 {
            return Err(Error::MatchingFailed(format!(
                "node {v} lost {d} stubs; degree slack exceeded"
            )));
        }
    }
    Graph::from_edges(&edge_list, n)
}

const MAX_STALLED_PASSES: usize = 20;
const REWIRE_ATTEMPTS: usize = 400;

/// Configuration-model pairing: repeatedly shuffle the stub pool and match
/// adjacent stubs, rejecting self-pairs, invalid pairs and duplicate edges.
/// Stubborn leftovers are resolved by double-edge swaps against edges created
/// in this phase; anything still unmatched is dropped and counted.
fn match_stubs<R: Rng>(
    rng: &mut R,
    mut pool: Vec<usize>,
    edges: &mut HashSet<(usize, usize)>,
    edge_list: &mut Vec<(usize, usize)>,
    dropped_per_node: &mut [usize],
    valid: impl Fn(usize, usize) -> bool,
) {
    let phase_start = edge_list.len();
    let mut stalled = 0;
    while pool.len() >= 2 && stalled < MAX_STALLED_PASSES {
        pool.shuffle(rng);
        let mut leftover = Vec::new();
        let mut matched_any = false;
        let mut it = pool.chunks_exact(2);
        for pair in &mut it {
            let (u, v) = (pair[0], pair[1]);
            let key = (u.min(v), u.max(v));
            if u != v && valid(u, v) && !edges.contains(&key) {
                edges.insert(key);
                edge_list.push(key);
                matched_any = true;
            } else {
                leftover.push(u);
                leftover.push(v);
            }
        }
        leftover.extend_from_slice(it.remainder());
        pool = leftover;
        stalled = if matched_any { 0 } else { stalled + 1 };
    }
    // Swap endgame: give stub pair (u, v) an existing phase edge (a, b) and
    // rewire to (u, a), (v, b), which preserves the degrees of a and b.
    while pool.len() >= 2 {
        let v = pool.pop().expect("len checked");
        let u = pool.pop().expect("len checked");
        let mut placed = false;
        if edge_list.len() > phase_start {
            for _ in 0..REWIRE_ATTEMPTS {
                let e = rng.gen_range(phase_start..edge_list.len());
                let (a, b) = edge_list[e];
                for (x, y) in [(a, b), (b, a)] {
                    if u == x || v == y || !valid(u, x) || !valid(v, y) {
                        continue;
                    }
                    let k1 = (u.min(x), u.max(x));
                    let k2 = (v.min(y), v.max(y));
                    if k1 == k2 || edges.contains(&k1) || edges.contains(&k2) {
                        continue;
                    }
                    edges.remove(&(a.min(b), a.max(b)));
                    edge_list.swap_remove(e);
                    for k in [k1, k2] {
                        edges.insert(k);
                        edge_list.push(k);
                    }
                    placed = true;
                    break;
                }
                if placed {
                    break;
                }
            }
        }
        if !placed {
            dropped_per_node[u] += 1;
            dropped_per_node[v] += 1;
        }
    }
    for v in pool {
        dropped_per_node[v] += 1;
    }
}

/// Draw each target node's feature row uniformly with replacement from base
/// rows of the same class index.
pub fn sample_features<R: Rng>(
    base_x: &Tensor,
    base_labels: &LabelEncoding,
    target_labels: &LabelEncoding,
    rng: &mut R,
) -> Result<Tensor> {
    if base_x.rows() != base_labels.num_nodes() {
        return Err(Error::ShapeMismatch {
            op: "sample_features",
            expected: format!("{} base rows", base_labels.num_nodes()),
            got: format!("{}", base_x.rows()),
        });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); base_labels.num_classes()];
    for v in 0..base_labels.num_nodes() {
        by_class[base_labels.class_of(v)].push(v);
    }
    let mut out = Tensor::zeros(target_labels.num_nodes(), base_x.cols());
    for v in 0..target_labels.num_nodes() {
        let c = target_labels.class_of(v);
        let pool = by_class.get(c).filter(|p| !p.is_empty()).ok_or(
            Error::EmptyClass(c),
        )?;
        let pick = pool[rng.gen_range(0..pool.len())];
        out.row_mut(v).copy_from_slice(base_x.row(pick));
    }
    Ok(out)
}

/// Built-in base-feature fixture for dataset-free runs: per class, rows are
/// the one-hot class prototype of dimension `dim` plus Gaussian noise.
pub fn synthetic_feature_base<R: Rng>(
    num_classes: usize,
    dim: usize,
    rows_per_class: usize,
    noise_sigma: f64,
    rng: &mut R,
) -> Result<(Tensor, LabelEncoding)> {
    if num_classes > dim {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: format!("need dim >= num_classes, got {dim} < {num_classes}"),
        });
    }
    let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidParameter {
        name: "noise_sigma",
        reason: e.to_string(),
    })?;
    let n = num_classes * rows_per_class;
    let mut x = Tensor::zeros(n, dim);
    let mut classes = Vec::with_capacity(n);
    for c in 0..num_classes {
        for r in 0..rows_per_class {
            let v = c * rows_per_class + r;
            classes.push(c);
            let row = x.row_mut(v);
            for item in row.iter_mut() {
                *item = normal.sample(rng);
            }
            row[c] += 1.0;
        }
    }
    let labels = LabelEncoding::with_num_classes(classes, num_classes)?;
    Ok((x, labels))
}

/// Disjoint train/validation/test node sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMasks {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Uniformly random partition with sizes within one node of the requested
/// fractions. Deterministic under the rng state.
pub fn random_split<R: Rng>(n: usize, fractions: (f64, f64, f64), rng: &mut R) -> Result<SplitMasks> {
    let (ft, fv, fs) = fractions;
    if (ft + fv + fs - 1.0).abs() > 1e-9 || ft <= 0.0 || fv < 0.0 || fs <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "fractions",
            reason: format!("({ft}, {fv}, {fs}) must be positive and sum to 1"),
        });
    }
    if n < 3 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least 3 nodes to split".to_string(),
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let n_train = (ft * n as f64).round() as usize;
    let n_val = (fv * n as f64).round() as usize;
    let n_train = n_train.min(n - 2).max(1);
    let n_val = n_val.min(n - n_train - 1);
    let mut train: Vec<usize> = perm[..n_train].to_vec();
    let mut val: Vec<usize> = perm[n_train..n_train + n_val].to_vec();
    let mut test: Vec<usize> = perm[n_train + n_val..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(SplitMasks { train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::edge_homophily;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_half_even_brackets() {
        assert_eq!(round_half_even(1.5), 2);
        assert_eq!(round_half_even(2.5), 2);
        assert_eq!(round_half_even(2.4), 2);
        assert_eq!(round_half_even(2.6), 3);
        assert_eq!(round_half_even(10.0), 10);
    }

    #[test]
    fn regular_mode_degrees_at_half() {
        let spec = SynthSpec {
            nodes_per_class: 50,
            ..SynthSpec::regular(0.5, 3)
        };
        let g = generate(&spec).unwrap();
        let (min, max) = g.degree_vector().min_max();
        assert!(min >= 19 && max <= 21, "degrees {min}..{max}");
        assert!(max - min <= 2);
    }

    #[test]
    fn regular_mode_limiting_h_is_intra_only() {
        let spec = SynthSpec {
            nodes_per_class: 40,
            ..SynthSpec::regular(1.0, 5)
        };
        let g = generate(&spec).unwrap();
        let z = spec.labels();
        assert_eq!(edge_homophily(&g, &z).unwrap(), 1.0);
        let (min, max) = g.degree_vector().min_max();
        assert!(min >= 9 && max <= 10);
    }

    #[test]
    fn general_mode_limiting_h_is_intra_only() {
        let spec = SynthSpec {
            nodes_per_class: 50,
            intra_edges_per_class: 100,
            ..SynthSpec::general(1.0, 11)
        };
        let g = generate(&spec).unwrap();
        assert_eq!(edge_homophily(&g, &spec.labels()).unwrap(), 1.0);
    }

    #[test]
    fn general_mode_default_shape_at_h03() {
        let spec = SynthSpec::general(0.3, 1);
        let g = generate(&spec).unwrap();
        assert_eq!(g.num_nodes(), 2000);
        let z = spec.labels();
        // Intra edges per class should land near the configured 800.
        let mut intra = vec![0usize; 5];
        for (u, v) in g.edges() {
            if z.class_of(u) == z.class_of(v) {
                intra[z.class_of(u)] += 1;
            }
        }
        for count in intra {
            assert!((700..=880).contains(&count), "intra per class {count}");
        }
    }

    #[test]
    fn determinism_same_seed_same_graph() {
        let spec = SynthSpec {
            nodes_per_class: 60,
            ..SynthSpec::general(0.4, 42)
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        let other = generate(&SynthSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn sample_features_identity_base() {
        // Base with one row per class: every target row equals its prototype.
        let base_x = Tensor::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let base_z = LabelEncoding::from_classes(vec![0, 1]).unwrap();
        let target = LabelEncoding::from_classes(vec![1, 0, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = sample_features(&base_x, &base_z, &target, &mut rng).unwrap();
        assert_eq!(x.row(0), &[0.0, 1.0]);
        assert_eq!(x.row(1), &[1.0, 0.0]);
        assert_eq!(x.row(2), &[0.0, 1.0]);
    }

    #[test]
    fn sample_features_missing_class_errors() {
        let base_x = Tensor::from_rows(&[vec![1.0]]).unwrap();
        let base_z = LabelEncoding::with_num_classes(vec![0], 1).unwrap();
        let target = LabelEncoding::from_classes(vec![0, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_features(&base_x, &base_z, &target, &mut rng).is_err());
    }

    #[test]
    fn synthetic_base_is_class_conditional() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (x, z) = synthetic_feature_base(3, 8, 20, 0.1, &mut rng).unwrap();
        for v in 0..z.num_nodes() {
            let c = z.class_of(v);
            let row = x.row(v);
            // The prototype coordinate dominates everything else.
            for (j, &val) in row.iter().enumerate() {
                if j == c {
                    assert!(val > 0.5);
                } else {
                    assert!(val.abs() < 0.5);
                }
            }
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_split(10, (0.6, 0.2, 0.2), &mut rng).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (6, 2, 2));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s2 = random_split(10, (0.6, 0.2, 0.2), &mut rng).unwrap();
        assert_eq!(s, s2);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let big = random_split(2000, (0.6, 0.2, 0.2), &mut rng).unwrap();
        assert_eq!(
            (big.train.len(), big.val.len(), big.test.len()),
            (1200, 400, 400)
        );
        let mut all: Vec<usize> = big
            .train
            .iter()
            .chain(&big.val)
            .chain(&big.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..2000).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_tiny_inputs_and_bad_fractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(random_split(2, (0.6, 0.2, 0.2), &mut rng).is_err());
        assert!(random_split(10, (0.5, 0.2, 0.2), &mut rng).is_err());
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        let spec = SynthSpec {
            nodes_per_class: 20,
            ..SynthSpec::regular(0.05, 1)
        };
        // 190 inter stubs against an 80-node pool.
        assert!(matches!(generate(&spec), Err(Error::Infeasible(_))));
    }
}
