//! Block-based empirical process toolkit for extreme values of
//! stationary time series.
//!
//! The pipeline: simulate or load a series ([`processes`],
//! [`standardize`]), turn it into a sparse row of standardized excesses
//! ([`standardize`]), split the row into blocks and evaluate cluster
//! functionals ([`blocks`]), form normalized empirical processes and
//! estimators ([`empirical`], [`resample`]), and compare them against
//! tail-chain oracles under a replication harness ([`harness`]).

pub mod blocks;
pub mod empirical;
pub mod error;
pub mod harness;
pub mod processes;
pub mod resample;
pub mod standardize;
pub mod stats;

pub use blocks::{
    Block, Blocking, ClusterFunctional, CoreSpan, TailArraySum, extract_core, segment_blocks,
};
pub use error::{Error, Result};
pub use processes::{Family, GeneratorSpec, TailChainModel, TailScale, replication_rng, simulate};
pub use standardize::{ExcessArray, ExcessMode, RawSeries, ScaleConvention};
