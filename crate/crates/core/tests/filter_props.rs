//! Property tests for graph construction and filter operators.

#![allow(clippy::needless_range_loop)]

mod common;

use acmix::filter::{make_filter, FilterKind};
use acmix::graph::Graph;
use acmix::tensor::{matmul, Tensor};
use proptest::prelude::*;

/// Random simple graph with minimum degree 1 (ring skeleton plus extras).
fn graph_strategy() -> impl Strategy<Value = Graph> {
    (3usize..40).prop_flat_map(|n| {
        let extras = proptest::collection::vec((0..n, 0..n), 0..3 * n);
        extras.prop_map(move |mut edges| {
            for i in 0..n {
                edges.push((i, (i + 1) % n));
            }
            Graph::from_edges(&edges, n).expect("in range")
        })
    })
}

fn low_pass_kinds() -> Vec<FilterKind> {
    vec![
        FilterKind::Identity,
        FilterKind::Arw,
        FilterKind::Asym,
        FilterKind::ArwHat,
        FilterKind::AsymHat,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn row_stochastic_filters_sum_to_one(g in graph_strategy()) {
        for kind in [FilterKind::Arw, FilterKind::ArwHat] {
            let f = make_filter(&g, &kind).unwrap();
            for s in f.row_sums() {
                prop_assert!((s - 1.0).abs() <= 1e-12);
            }
            let hp = make_filter(&g, &FilterKind::HighPassOf(Box::new(kind))).unwrap();
            for s in hp.row_sums() {
                prop_assert!(s.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_filters_are_symmetric(g in graph_strategy()) {
        for kind in [FilterKind::Asym, FilterKind::AsymHat, FilterKind::Lsym, FilterKind::LsymHat] {
            let d = make_filter(&g, &kind).unwrap().to_dense();
            for i in 0..g.num_nodes() {
                for j in 0..g.num_nodes() {
                    prop_assert_eq!(d.get(i, j), d.get(j, i));
                }
            }
        }
    }

    #[test]
    fn perfect_reconstruction_is_exact(g in graph_strategy()) {
        // LP + HP of the same base kind equals the identity entry-wise,
        // with no tolerance.
        for kind in low_pass_kinds() {
            let lp = make_filter(&g, &kind).unwrap().to_dense();
            let hp = make_filter(&g, &FilterKind::HighPassOf(Box::new(kind))).unwrap().to_dense();
            let n = g.num_nodes();
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert_eq!(lp.get(i, j) + hp.get(i, j), expect);
                }
            }
        }
    }

    #[test]
    fn spmm_agrees_with_dense_product(g in graph_strategy(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = common::random_features(g.num_nodes(), 5, &mut rng);
        for kind in [FilterKind::ArwHat, FilterKind::LrwHat, FilterKind::AsymHat, FilterKind::Lrw] {
            let f = make_filter(&g, &kind).unwrap();
            let sparse = f.spmm(&x).unwrap();
            let dense = matmul(&f.to_dense(), &x).unwrap();
            prop_assert!(sparse.max_abs_diff(&dense) <= 1e-12);
        }
    }

    #[test]
    fn filters_are_permutation_equivariant(g in graph_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let n = g.num_nodes();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let pg = g.permuted(&perm).unwrap();
        for kind in [FilterKind::ArwHat, FilterKind::Lsym] {
            let orig = make_filter(&g, &kind).unwrap().to_dense();
            let permuted = make_filter(&pg, &kind).unwrap().to_dense();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(permuted.get(perm[i], perm[j]), orig.get(i, j));
                }
            }
        }
    }

    #[test]
    fn degrees_match_row_lengths(g in graph_strategy()) {
        let degs = g.degree_vector();
        prop_assert_eq!(degs.sum(), 2 * g.num_edges());
        for v in 0..g.num_nodes() {
            prop_assert_eq!(degs.0[v], g.neighbors(v).len());
        }
    }
}

#[test]
fn identity_times_anything_is_exact() {
    let g = Graph::from_edges(&[(0, 1), (1, 2)], 3).unwrap();
    let f = make_filter(&g, &FilterKind::Identity).unwrap();
    let x = Tensor::from_rows(&[vec![1.0, -2.5], vec![0.0, 3.25], vec![1e-9, 7.0]]).unwrap();
    assert_eq!(f.spmm(&x).unwrap(), x);
}
