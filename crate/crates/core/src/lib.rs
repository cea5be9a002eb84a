//! A self-contained laboratory for node classification under heterophily:
//! sparse graph filters, homophily and post-aggregation similarity metrics,
//! synthetic graph generators, and the adaptive channel-mixing GNN family on
//! a built-in reverse-mode autodiff kernel.
//!
//! Everything runs on plain f64 CPU kernels with seeded RNG; identical seeds
//! give identical results.

// Indexed loops are the house style for the numeric kernels; negated
// comparisons reject NaN where `<=` would let it through.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod error;
pub mod filter;
pub mod graph;
pub mod io;
pub mod labels;
pub mod metrics;
pub mod models;
pub mod synth;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use filter::{make_filter, FilterKind, FilterOperator};
pub use graph::Graph;
pub use labels::LabelEncoding;
pub use metrics::MetricReport;
pub use tensor::Tensor;
