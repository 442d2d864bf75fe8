//! Toric-code decoding with neural belief-matching.
//!
//! First stage: quaternary belief propagation (optionally with trained
//! multiplicative message weights) on the standard or overcomplete check
//! matrix. Second stage, only when BP does not reproduce the syndrome:
//! exact minimum-weight perfect matching on detection graphs weighted by
//! the BP posteriors. Convolutional weights are tied across lattice
//! translations, so a set trained at one distance binds to any other.

pub mod bp;
pub mod config;
pub mod decoder;
pub mod error;
pub mod matching;
pub mod nbp;
pub mod noise;
pub mod pauli;
pub mod scalar;
pub mod sim;
pub mod toric;

pub use config::RunConfig;
pub use decoder::{Pipeline, Variant};
pub use error::{Error, Result};
pub use matching::{belief_match, mwpm_baseline, BeliefMatcher};
pub use nbp::{WeightKind, WeightSet};
pub use noise::{DepolarizingChannel, Quaternary, ShotSeed};
pub use pauli::{Gf4, Pauli, PauliVector, SparseCheckMatrix, Syndrome};
pub use scalar::Real;
pub use sim::{negbin_ci, run_point, sweep, PointConfig, RunStats, StopRule, SweepConfig};
pub use toric::{build_toric, MatrixKind, ToricCode};

pub type BpDecoderF64 = bp::BpDecoder<f64>;
pub type BpDecoderF32 = bp::BpDecoder<f32>;
pub type WeightSetF64 = nbp::WeightSet<f64>;
pub type WeightSetF32 = nbp::WeightSet<f32>;

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}
