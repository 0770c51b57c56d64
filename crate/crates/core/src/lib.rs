//! Generalized f-convolution over finite domains.
//!
//! For `f : L x R -> T`, `g : L^n -> Z` and `h : R^n -> Z`,
//! `(g ⊛_f h)(v) = Σ_{u ⊕_f w = v} g(u) h(w)` where `⊕_f` applies `f`
//! coordinate-wise. [`engine::convolve`] computes all of `T^n` from a cyclic
//! partition of `f` ([`partition::build_partition`]); [`query::query`]
//! computes a single entry through a matrix trace.

pub mod cli;
pub mod cyclicconv;
pub mod domain;
pub mod engine;
pub mod error;
pub mod io;
pub mod oracle;
pub mod partition;
pub mod query;

pub use domain::{FiniteDomain, FunctionTable, TensorFunction};
pub use engine::{convolve, work_count};
pub use error::{Error, Result};
pub use partition::{build_partition, validate_partition, CyclicMinor, CyclicPartition, PartitionOptions};
