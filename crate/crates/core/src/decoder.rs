//! Finite-length noisy Min-Sum and Self-Corrected Min-Sum decoders.
//!
//! Three variants share the check-node step:
//!
//! * [`Variant::MsDeStyle`]: each variable-to-check message is the noisy sum
//!   of the prior and the other incoming messages, and the a-posteriori value
//!   is a separate noisy sum over all of them. This is the schedule density
//!   evolution analyses.
//! * [`Variant::MsPractical`]: the a-posteriori value is computed first and
//!   each outgoing message is obtained by one noisy subtraction.
//! * [`Variant::Scms`]: the practical variant plus the (noisy) self-correction
//!   unit, which erases messages whose sign flipped since the last iteration
//!   unless they were erased then.
//!
//! Additions start from the prior `γ` and fold the check messages in a fresh
//! random order each time. Fault decisions come from [`FaultClock`]s re-armed
//! at the start of every frame.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::arith::{saturate, Alphabet, ArithError, ErrorInjector, FaultClock, NoiseParams, Sign, SignedRepr};
use crate::channel::{ChannelError, QuantConfig};
use crate::graph::TannerGraph;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecoderError {
    #[error("a-posteriori width q̃={q_tilde} must exceed message width q={q}")]
    InvalidWidths { q: u32, q_tilde: u32 },
    #[error("max_iters must be at least 1")]
    NoIterations,
    #[error("prior has length {got}, code length is {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("prior value {value} outside the message alphabet ±{bound}")]
    PriorOutOfRange { value: i32, bound: i32 },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    MsDeStyle,
    MsPractical,
    Scms,
}

/// Resolution of `sgn(0)` in the hard decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Fair coin, matching the density-evolution convention.
    #[default]
    Random,
    /// Always `+1`. Deterministic, for regression tests only.
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub variant: Variant,
    pub q: u32,
    pub q_tilde: u32,
    pub mu: f64,
    pub noise: NoiseParams,
    pub repr: SignedRepr,
    pub max_iters: usize,
    pub early_stopping: bool,
    pub tie_break: TieBreak,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            variant: Variant::default(),
            q: 4,
            q_tilde: 5,
            mu: 1.0,
            noise: NoiseParams::noiseless(),
            repr: SignedRepr::default(),
            max_iters: 100,
            early_stopping: true,
            tie_break: TieBreak::default(),
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<(), DecoderError> {
        if self.q_tilde <= self.q {
            return Err(DecoderError::InvalidWidths { q: self.q, q_tilde: self.q_tilde });
        }
        if self.max_iters == 0 {
            return Err(DecoderError::NoIterations);
        }
        Alphabet::new(self.q_tilde)?;
        self.noise.validate()?;
        QuantConfig::new(self.mu, self.q)?;
        Ok(())
    }

    pub fn quant(&self) -> Result<QuantConfig, DecoderError> {
        Ok(QuantConfig::new(self.mu, self.q)?)
    }
}

/// Result of decoding one frame. The estimate itself is available through
/// [`Decoder::x_hat`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Iterations performed.
    pub iterations: usize,
    /// The final hard decision satisfies every parity check.
    pub codeword: bool,
}

/// Per-iteration view of the decoder passed to observers.
pub struct IterationView<'a> {
    pub iteration: usize,
    /// Variable-to-check messages, check-major edge order.
    pub alpha: &'a [i32],
    /// Check-to-variable messages, check-major edge order.
    pub beta: &'a [i32],
    pub gamma_tilde: &'a [i32],
    pub x_hat: &'a [Sign],
    pub syndrome_ok: bool,
}

/// Decoder bound to one Tanner graph. Reuse it across frames: all buffers
/// are allocated once.
#[derive(Debug, Clone)]
pub struct Decoder<'g> {
    graph: &'g TannerGraph,
    cfg: DecoderConfig,
    q_bound: i32,
    qt_bound: i32,
    adder: ErrorInjector,
    adder_clock: FaultClock,
    cmp_clock: FaultClock,
    xor_clock: FaultClock,
    scu_clock: FaultClock,
    /// Edges are numbered check-major; `edge_var[e]` is the variable end.
    edge_var: Vec<usize>,
    chk_start: Vec<usize>,
    var_edges: Vec<usize>,
    var_start: Vec<usize>,
    gamma: Vec<i32>,
    alpha: Vec<i32>,
    beta: Vec<i32>,
    gamma_tilde: Vec<i32>,
    stored_sign: Vec<Sign>,
    erased: Vec<bool>,
    x_hat: Vec<Sign>,
    signs: Vec<Sign>,
    buf: Vec<i32>,
}

impl<'g> Decoder<'g> {
    pub fn new(graph: &'g TannerGraph, cfg: DecoderConfig) -> Result<Self, DecoderError> {
        cfg.validate()?;
        let q_tilde = Alphabet::new(cfg.q_tilde)?;
        let adder = cfg.noise.adder_injector(q_tilde, cfg.repr)?;
        let mut edge_var = Vec::with_capacity(graph.edges());
        let mut chk_start = Vec::with_capacity(graph.m() + 1);
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); graph.n()];
        for c in 0..graph.m() {
            chk_start.push(edge_var.len());
            for &v in graph.chk_neighbors(c) {
                per_var[v].push(edge_var.len());
                edge_var.push(v);
            }
        }
        chk_start.push(edge_var.len());
        let mut var_edges = Vec::with_capacity(edge_var.len());
        let mut var_start = Vec::with_capacity(graph.n() + 1);
        for edges in per_var {
            var_start.push(var_edges.len());
            var_edges.extend(edges);
        }
        var_start.push(var_edges.len());
        let e = edge_var.len();
        let n = graph.n();
        Ok(Self {
            graph,
            cfg,
            q_bound: Alphabet::new(cfg.q)?.bound(),
            qt_bound: q_tilde.bound(),
            adder_clock: FaultClock::new(cfg.noise.p_a),
            cmp_clock: FaultClock::new(cfg.noise.p_c),
            xor_clock: FaultClock::new(cfg.noise.p_x),
            scu_clock: FaultClock::new(cfg.noise.p_scu),
            adder,
            edge_var,
            chk_start,
            var_edges,
            var_start,
            gamma: vec![0; n],
            alpha: vec![0; e],
            beta: vec![0; e],
            gamma_tilde: vec![0; n],
            stored_sign: vec![Sign::Plus; e],
            erased: vec![false; e],
            x_hat: vec![Sign::Plus; n],
            signs: Vec::new(),
            buf: Vec::new(),
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &'g TannerGraph {
        self.graph
    }

    /// Hard decision of the last decoded frame.
    pub fn x_hat(&self) -> &[Sign] {
        &self.x_hat
    }

    pub fn gamma_tilde(&self) -> &[i32] {
        &self.gamma_tilde
    }

    /// Variable-to-check messages, check-major edge order.
    pub fn alpha(&self) -> &[i32] {
        &self.alpha
    }

    /// Check-to-variable messages, check-major edge order.
    pub fn beta(&self) -> &[i32] {
        &self.beta
    }

    /// Quantize a received word with the decoder's `q_μ`.
    pub fn quantize(&self, y: &[f64]) -> Result<Vec<i32>, DecoderError> {
        let quant = self.cfg.quant()?;
        Ok(y.iter().map(|&v| quant.quantize(v)).collect())
    }

    pub fn decode<R: Rng + ?Sized>(&mut self, gamma: &[i32], rng: &mut R) -> Result<DecodeOutcome, DecoderError> {
        self.decode_observed(gamma, rng, |_| {})
    }

    /// Decode the quantized prior `gamma`, calling `observe` after every
    /// iteration's hard decision.
    pub fn decode_observed<R, F>(&mut self, gamma: &[i32], rng: &mut R, mut observe: F) -> Result<DecodeOutcome, DecoderError>
    where
        R: Rng + ?Sized,
        F: FnMut(&IterationView<'_>),
    {
        let n = self.graph.n();
        if gamma.len() != n {
            return Err(DecoderError::LengthMismatch { expected: n, got: gamma.len() });
        }
        if let Some(&value) = gamma.iter().find(|g| g.abs() > self.q_bound) {
            return Err(DecoderError::PriorOutOfRange { value, bound: self.q_bound });
        }
        self.gamma.copy_from_slice(gamma);
        for (e, &v) in self.edge_var.iter().enumerate() {
            self.alpha[e] = gamma[v];
            self.stored_sign[e] = Sign::of(gamma[v]);
            self.erased[e] = false;
        }
        for clock in [&mut self.adder_clock, &mut self.cmp_clock, &mut self.xor_clock, &mut self.scu_clock] {
            clock.arm(rng);
        }

        let mut codeword = false;
        let mut iterations = 0;
        for it in 1..=self.cfg.max_iters {
            iterations = it;
            self.check_step(rng);
            match self.cfg.variant {
                Variant::MsDeStyle => {
                    self.variable_step_de(rng);
                    self.ap_update(rng);
                }
                Variant::MsPractical | Variant::Scms => {
                    self.ap_update(rng);
                    self.variable_step_practical(rng);
                }
            }
            self.hard_decision(rng);
            codeword = self.syndrome_ok();
            observe(&IterationView {
                iteration: it,
                alpha: &self.alpha,
                beta: &self.beta,
                gamma_tilde: &self.gamma_tilde,
                x_hat: &self.x_hat,
                syndrome_ok: codeword,
            });
            if self.cfg.early_stopping && codeword {
                break;
            }
        }
        Ok(DecodeOutcome { iterations, codeword })
    }

    fn check_step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let noisy_cmp = self.cmp_clock.p() > 0.0;
        let noisy_xor = self.xor_clock.p() > 0.0;
        for c in 0..self.graph.m() {
            let (lo, hi) = (self.chk_start[c], self.chk_start[c + 1]);
            if hi - lo < 2 {
                // A degree-1 check sends no information.
                for e in lo..hi {
                    self.beta[e] = 0;
                }
                continue;
            }
            // A zero input only reaches an output through a faulty
            // comparator; its sign is then a fair coin, as in the analysis.
            self.signs.clear();
            for e in lo..hi {
                let a = self.alpha[e];
                let s = if a == 0 && noisy_cmp && rng.random::<bool>() { Sign::Minus } else { Sign::of(a) };
                self.signs.push(s);
            }
            let parity = self.signs.iter().fold(Sign::Plus, |p, &s| p.xor(s));
            if !noisy_cmp {
                let (mut m1, mut m2, mut arg) = (i32::MAX, i32::MAX, lo);
                for e in lo..hi {
                    let a = self.alpha[e].abs();
                    if a < m1 {
                        m2 = m1;
                        m1 = a;
                        arg = e;
                    } else if a < m2 {
                        m2 = a;
                    }
                }
                for e in lo..hi {
                    let mag = if e == arg { m2 } else { m1 };
                    let sign = self.extrinsic_sign(parity, e, lo, hi - lo, noisy_xor, rng);
                    self.beta[e] = sign.apply(mag);
                }
            } else {
                for e in lo..hi {
                    self.buf.clear();
                    self.buf.extend((lo..hi).filter(|&k| k != e).map(|k| self.alpha[k].abs()));
                    self.buf.shuffle(rng);
                    let mut acc = self.buf[0];
                    for i in 1..self.buf.len() {
                        let x = self.buf[i];
                        let lt = acc < x;
                        let lt = if self.cmp_clock.fire(rng) { !lt } else { lt };
                        acc = if lt { acc } else { x };
                    }
                    let sign = self.extrinsic_sign(parity, e, lo, hi - lo, noisy_xor, rng);
                    self.beta[e] = sign.apply(acc);
                }
            }
        }
    }

    /// Sign product of the other `d - 1` inputs through `d - 2` noisy XOR
    /// gates. Flips commute with the XOR, so only their parity matters and
    /// the fold order is irrelevant.
    #[inline]
    fn extrinsic_sign<R: Rng + ?Sized>(&mut self, parity: Sign, e: usize, lo: usize, d: usize, noisy: bool, rng: &mut R) -> Sign {
        let mut s = parity.xor(self.signs[e - lo]);
        if noisy {
            for _ in 0..d - 2 {
                if self.xor_clock.fire(rng) {
                    s = s.flip();
                }
            }
        }
        s
    }

    #[inline]
    fn add<R: Rng + ?Sized>(&mut self, x: i32, y: i32, rng: &mut R) -> i32 {
        let v = saturate(x + y, self.qt_bound);
        if self.adder_clock.fire(rng) {
            self.adder.corrupt_forced(v, rng)
        } else {
            v
        }
    }

    /// `γ` followed by the shuffled contents of `buf`, through noisy adders.
    fn fold_from_gamma<R: Rng + ?Sized>(&mut self, gamma: i32, rng: &mut R) -> i32 {
        if self.buf.len() > 1 {
            self.buf.shuffle(rng);
        }
        let mut acc = gamma;
        for i in 0..self.buf.len() {
            let b = self.buf[i];
            acc = self.add(acc, b, rng);
        }
        acc
    }

    fn variable_step_de<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for v in 0..self.graph.n() {
            let (lo, hi) = (self.var_start[v], self.var_start[v + 1]);
            for k in lo..hi {
                let target = self.var_edges[k];
                self.buf.clear();
                for j in lo..hi {
                    if j != k {
                        self.buf.push(self.beta[self.var_edges[j]]);
                    }
                }
                let acc = self.fold_from_gamma(self.gamma[v], rng);
                self.alpha[target] = saturate(acc, self.q_bound);
            }
        }
    }

    fn ap_update<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for v in 0..self.graph.n() {
            let (lo, hi) = (self.var_start[v], self.var_start[v + 1]);
            self.buf.clear();
            for j in lo..hi {
                self.buf.push(self.beta[self.var_edges[j]]);
            }
            self.gamma_tilde[v] = self.fold_from_gamma(self.gamma[v], rng);
        }
    }

    fn variable_step_practical<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let scms = self.cfg.variant == Variant::Scms;
        for v in 0..self.graph.n() {
            let gt = self.gamma_tilde[v];
            for k in self.var_start[v]..self.var_start[v + 1] {
                let e = self.var_edges[k];
                let mut a = saturate(self.add(gt, -self.beta[e], rng), self.q_bound);
                if scms {
                    let sign = Sign::of(a);
                    let fire = sign != self.stored_sign[e] && !self.erased[e];
                    let fire = if self.scu_clock.fire(rng) { !fire } else { fire };
                    self.erased[e] = fire;
                    self.stored_sign[e] = sign;
                    if fire {
                        a = 0;
                    }
                }
                self.alpha[e] = a;
            }
        }
    }

    fn hard_decision<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for v in 0..self.graph.n() {
            self.x_hat[v] = hard_decision(self.gamma_tilde[v], self.cfg.tie_break, rng);
        }
    }

    /// Noiseless parity check of the current hard decision.
    pub fn syndrome_ok(&self) -> bool {
        (0..self.graph.m()).all(|c| {
            self.graph.chk_neighbors(c).iter().fold(Sign::Plus, |s, &v| s.xor(self.x_hat[v])) == Sign::Plus
        })
    }
}

/// `sgn(γ̃)`, with `γ̃ = 0` resolved by `tie`.
#[inline]
pub fn hard_decision<R: Rng + ?Sized>(gamma_tilde: i32, tie: TieBreak, rng: &mut R) -> Sign {
    match gamma_tilde.signum() {
        1 => Sign::Plus,
        -1 => Sign::Minus,
        _ => match tie {
            TieBreak::Plus => Sign::Plus,
            TieBreak::Random => {
                if rng.random::<bool>() {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            }
        },
    }
}
