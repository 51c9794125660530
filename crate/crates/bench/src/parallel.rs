//! Thread-parallel Monte Carlo with results identical to the sequential
//! driver of `peres_core::mc` for any thread count.

use peres_core::budget::{FluctuationMc, PhaseFluctuationModel, PowerFluctuationModel};
use peres_core::forward::SourceSpec;
use peres_core::mc::{chunk_count, reduce_chunks, run_chunk, McSummary, MonteCarloModel};
use peres_core::PhasePoint;
use rayon::prelude::*;

use crate::error::{BenchError, Result};

/// Caps the worker threads; `0` or unset lets rayon decide.
pub const THREADS_ENV: &str = "PERES_BENCH_THREADS";

/// Thread count requested through [`THREADS_ENV`], `0` meaning automatic.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map_err(|_| {
            BenchError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))
        }),
        _ => Ok(0),
    }
}

/// Runs `n` samples of `model` on `threads` workers (`0` = automatic).
pub fn run_parallel<M: MonteCarloModel + Sync>(model: &M, n: u64, threads: usize) -> Result<McSummary> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let chunks: Vec<_> = pool.install(|| {
        (0..chunk_count(n))
            .into_par_iter()
            .map(|c| run_chunk(model, c, n))
            .collect()
    });
    Ok(reduce_chunks(chunks).summary())
}

fn require_samples(n: u64) -> Result<()> {
    if n < 2 {
        return Err(peres_core::Error::InsufficientData {
            needed: 2,
            got: n as usize,
        }
        .into());
    }
    Ok(())
}

/// Parallel counterpart of `peres_core::budget::mc_power_fluctuations`.
pub fn power_fluctuations(
    phases: &PhasePoint,
    source: &SourceSpec,
    sigma_rel: f64,
    n_samples: u64,
    seed: u64,
    threads: usize,
) -> Result<FluctuationMc> {
    require_samples(n_samples)?;
    let model = PowerFluctuationModel::new(phases, source, sigma_rel, seed)?;
    Ok(run_parallel(&model, n_samples, threads)?.into())
}

/// Parallel counterpart of `peres_core::budget::mc_phase_fluctuations`.
pub fn phase_fluctuations(
    phases: &PhasePoint,
    source: &SourceSpec,
    sigma_phase: f64,
    n_samples: u64,
    seed: u64,
    threads: usize,
) -> Result<FluctuationMc> {
    require_samples(n_samples)?;
    let model = PhaseFluctuationModel::new(phases, source, sigma_phase, seed)?;
    Ok(run_parallel(&model, n_samples, threads)?.into())
}
