//! Noisy finite-precision Min-Sum decoding of LDPC codes.
//!
//! The crate is `no_std` (it only needs `alloc`) and contains the pure
//! algorithmic pieces:
//!
//! * [`arith`]: saturating fixed-point operators with probabilistic error
//!   injection (noisy adder, comparator, XOR gate).
//! * [`channel`]: BSC / BI-AWGN channels, the channel scale-factor
//!   quantizer and the exact a-priori message distributions.
//! * [`de`]: density evolution of the noisy Min-Sum decoder on regular
//!   ensembles and classification of the resulting error-probability traces.
//! * [`threshold`]: useful region, target-error-rate thresholds and the
//!   functional threshold.
//! * [`graph`]: Tanner graphs, alist text format and random regular graphs.
//! * [`decoder`] and [`montecarlo`]: finite-length noisy MS / SCMS decoders
//!   and a deterministic Monte-Carlo driver.
//!
//! File IO, parallel runners and the command line live in the `noisyms`
//! companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod arith;
pub mod channel;
pub mod de;
pub mod decoder;
pub mod graph;
pub mod montecarlo;
pub mod pmf;
pub mod threshold;

pub use arith::{AdderModel, Alphabet, ErrorInjector, ErrorModel, FaultClock, NoiseParams, Sign, SignedRepr};
pub use channel::{ChannelModel, QuantConfig};
pub use de::{DeConfig, DeTrace, TraceClass};
pub use decoder::{Decoder, DecoderConfig, Variant};
pub use graph::TannerGraph;
pub use montecarlo::{McStats, StopRule};
pub use pmf::Pmf;
