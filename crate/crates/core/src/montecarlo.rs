//! Monte-Carlo BER/FER estimation over the all-`+1` codeword.
//!
//! Frame `k` of a campaign with seed `s` draws every random number from
//! ChaCha8 seeded with `s` on stream `k`. Results are folded in frame order,
//! so a campaign gives identical statistics however its frames are
//! scheduled. The std companion crate runs frames on a thread pool and feeds
//! them back through [`McAccumulator`].

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::Sign;
use crate::channel::ChannelModel;
use crate::decoder::{Decoder, DecoderError};

/// When to stop a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Exactly this many frames.
    Frames(u64),
    /// Stop at the frame that brings the frame-error count to `target`, or
    /// after `max_frames`, whichever comes first.
    FrameErrors { target: u64, max_frames: u64 },
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::FrameErrors { target: 100, max_frames: 1_000_000 }
    }
}

impl StopRule {
    pub fn max_frames(&self) -> u64 {
        match *self {
            StopRule::Frames(n) => n,
            StopRule::FrameErrors { max_frames, .. } => max_frames,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameResult {
    pub bit_errors: u64,
    pub iterations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct McStats {
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub iterations: u64,
    /// Code length.
    pub n: usize,
    pub seed: u64,
}

impl McStats {
    pub fn ber(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        self.bit_errors as f64 / (self.frames as f64 * self.n as f64)
    }

    pub fn fer(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        self.frame_errors as f64 / self.frames as f64
    }

    pub fn avg_iters(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        self.iterations as f64 / self.frames as f64
    }
}

/// In-order fold of frame results under a [`StopRule`].
#[derive(Debug, Clone)]
pub struct McAccumulator {
    stats: McStats,
    rule: StopRule,
}

impl McAccumulator {
    pub fn new(n: usize, seed: u64, rule: StopRule) -> Self {
        Self { stats: McStats { n, seed, ..McStats::default() }, rule }
    }

    pub fn done(&self) -> bool {
        match self.rule {
            StopRule::Frames(f) => self.stats.frames >= f,
            StopRule::FrameErrors { target, max_frames } => {
                self.stats.frame_errors >= target || self.stats.frames >= max_frames
            }
        }
    }

    /// Fold the next frame. Returns `false` once the campaign is complete;
    /// results pushed after that are ignored.
    pub fn push(&mut self, r: FrameResult) -> bool {
        if self.done() {
            return false;
        }
        self.stats.frames += 1;
        self.stats.bit_errors += r.bit_errors;
        self.stats.frame_errors += u64::from(r.bit_errors > 0);
        self.stats.iterations += r.iterations;
        !self.done()
    }

    pub fn stats(&self) -> McStats {
        self.stats
    }
}

/// Random stream of frame `frame` in a campaign seeded with `seed`.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

/// Transmit, quantize and decode one frame. `scratch` holds the prior.
pub fn run_frame(
    decoder: &mut Decoder<'_>,
    channel: &ChannelModel,
    seed: u64,
    frame: u64,
    scratch: &mut Vec<i32>,
) -> Result<FrameResult, DecoderError> {
    let mut rng = frame_rng(seed, frame);
    let quant = decoder.config().quant()?;
    quant.check_for(channel)?;
    scratch.clear();
    for _ in 0..decoder.graph().n() {
        scratch.push(quant.quantize(channel.sample(1.0, &mut rng)));
    }
    let out = decoder.decode(scratch, &mut rng)?;
    let bit_errors = decoder.x_hat().iter().filter(|&&s| s == Sign::Minus).count() as u64;
    Ok(FrameResult { bit_errors, iterations: out.iterations as u64 })
}

/// Single-threaded campaign.
pub fn run_monte_carlo(
    decoder: &mut Decoder<'_>,
    channel: &ChannelModel,
    rule: StopRule,
    seed: u64,
) -> Result<McStats, DecoderError> {
    let mut acc = McAccumulator::new(decoder.graph().n(), seed, rule);
    let mut scratch = Vec::new();
    let mut frame = 0;
    while !acc.done() {
        let r = run_frame(decoder, channel, seed, frame, &mut scratch)?;
        acc.push(r);
        frame += 1;
    }
    Ok(acc.stats())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::DecoderConfig;
    use crate::graph::{random_regular_graph, EnsembleSpec};

    #[test]
    fn accumulator_stops_exactly_at_target() {
        let mut acc = McAccumulator::new(10, 0, StopRule::FrameErrors { target: 2, max_frames: 100 });
        assert!(acc.push(FrameResult { bit_errors: 0, iterations: 3 }));
        assert!(acc.push(FrameResult { bit_errors: 4, iterations: 5 }));
        assert!(!acc.push(FrameResult { bit_errors: 1, iterations: 5 }));
        assert!(!acc.push(FrameResult { bit_errors: 7, iterations: 5 }));
        let s = acc.stats();
        assert_eq!((s.frames, s.bit_errors, s.frame_errors, s.iterations), (3, 5, 2, 13));
        assert!((s.ber() - 5.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn clean_channel_has_no_errors() {
        let mut rng = frame_rng(9, 0);
        let g = random_regular_graph(&EnsembleSpec::new(3, 6, 96).unwrap(), &mut rng, 100).unwrap();
        let cfg = DecoderConfig { mu: 1.0, ..DecoderConfig::default() };
        let mut dec = Decoder::new(&g, cfg).unwrap();
        let ch = ChannelModel::bsc(0.0).unwrap();
        let s = run_monte_carlo(&mut dec, &ch, StopRule::Frames(20), 5).unwrap();
        assert_eq!(s.ber(), 0.0);
        assert_eq!(s.avg_iters(), 1.0);
    }

    #[test]
    fn identical_seeds_identical_stats() {
        let mut rng = frame_rng(9, 1);
        let g = random_regular_graph(&EnsembleSpec::new(3, 6, 96).unwrap(), &mut rng, 100).unwrap();
        let cfg = DecoderConfig { mu: 1.0, ..DecoderConfig::default() };
        let ch = ChannelModel::bsc(0.06).unwrap();
        let run = || {
            let mut dec = Decoder::new(&g, cfg).unwrap();
            run_monte_carlo(&mut dec, &ch, StopRule::Frames(30), 77).unwrap()
        };
        assert_eq!(run(), run());
    }
}
