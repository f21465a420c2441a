//! Rayon drivers. Work is split by seed substream, never by thread, so every
//! result is independent of the worker count.

use gluskin_core::measure::{chunk_count, chunk_scales, count_within, estimate_from_count, validate_mc_arguments, MeasureEstimate};
use gluskin_core::polytope::SymmetricBody;
use gluskin_core::{Result, Seed};
use rayon::prelude::*;

/// Parallel `γ_n(ρ·P)`; same counts as the sequential estimator.
pub fn gaussian_measure_par<B: SymmetricBody + Sync + ?Sized>(body: &B, rho: f64, samples: u64, seed: Seed) -> Result<MeasureEstimate> {
    validate_mc_arguments(samples, rho)?;
    if body.is_degenerate() {
        return estimate_from_count(body, 0, samples, seed);
    }
    let hits = (0..chunk_count(samples))
        .into_par_iter()
        .map(|c| chunk_scales(body, samples, seed, c).map(|s| count_within(&s, rho)))
        .collect::<Result<Vec<u64>>>()?;
    estimate_from_count(body, hits.iter().sum(), samples, seed)
}

/// Membership scale of every sample, in draw order.
pub fn membership_scales_par<B: SymmetricBody + Sync + ?Sized>(body: &B, samples: u64, seed: Seed) -> Result<Vec<f64>> {
    let chunks = (0..chunk_count(samples))
        .into_par_iter()
        .map(|c| chunk_scales(body, samples, seed, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.concat())
}

/// Runs trial `i` on `seed.split(i)`; results come back in trial order.
pub fn par_trials<T, F>(trials: u64, seed: Seed, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, Seed) -> Result<T> + Sync,
{
    (0..trials).into_par_iter().map(|i| f(i, seed.split(i))).collect()
}

/// Runs `f` on a pool of `threads` workers (`None`: rayon's default).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => Ok(rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build()?.install(f)),
    }
}
