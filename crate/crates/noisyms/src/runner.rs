//! Parallel execution with scheduling-independent results.
//!
//! Grid points are mapped in parallel and collected by index. Monte-Carlo
//! frames are computed in parallel batches and folded in frame order through
//! [`McAccumulator`], so statistics are identical for any thread count.

use anyhow::{Context, Result};
use rayon::prelude::*;

use noisyms_core::montecarlo::{run_frame, FrameResult, McAccumulator};
use noisyms_core::{ChannelModel, Decoder, DecoderConfig, McStats, StopRule, TannerGraph};

/// Run `f` on a pool of `jobs` threads (all cores when `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        anyhow::ensure!(j >= 1, "--jobs must be at least 1");
        builder = builder.num_threads(j);
    }
    let pool = builder.build().context("building thread pool")?;
    Ok(pool.install(f))
}

/// Parallel map preserving input order; the first error wins by index.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    items.par_iter().map(&f).collect::<Vec<_>>().into_iter().collect()
}

/// Seed of the `k`-th point of a campaign.
pub fn point_seed(seed: u64, k: usize) -> u64 {
    // SplitMix64 finalizer of (seed, k) so neighbouring points and
    // neighbouring seeds get unrelated streams.
    let mut z = seed ^ (k as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Monte-Carlo campaign with frames decoded in parallel.
pub fn simulate_point(
    graph: &TannerGraph,
    cfg: DecoderConfig,
    channel: &ChannelModel,
    rule: StopRule,
    seed: u64,
) -> Result<McStats> {
    // Surface configuration errors before entering the pool.
    Decoder::new(graph, cfg)?;
    let mut acc = McAccumulator::new(graph.n(), seed, rule);
    let batch = (rayon::current_num_threads() as u64 * 32).max(64);
    let mut next = 0u64;
    while !acc.done() {
        let size = batch.min(rule.max_frames() - next);
        let results: Vec<Result<FrameResult, _>> = (next..next + size)
            .into_par_iter()
            .map_init(
                || (Decoder::new(graph, cfg).expect("validated above"), Vec::new()),
                |(dec, scratch), frame| run_frame(dec, channel, seed, frame, scratch),
            )
            .collect();
        for r in results {
            if !acc.push(r?) {
                break;
            }
        }
        next += size;
    }
    Ok(acc.stats())
}
