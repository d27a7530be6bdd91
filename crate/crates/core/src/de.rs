//! Density evolution of the noisy finite-precision Min-Sum decoder on
//! regular `(d_v, d_c)` ensembles.
//!
//! Messages live on the `q`-bit alphabet `M = {-Q..Q}` and the a-posteriori
//! information on the `q̃`-bit alphabet `M̃ = {-Q̃..Q̃}`. One iteration maps
//! the variable-to-check PMF `A` to the check-to-variable PMF `B`
//! ([`cn_update`]) and then `(B, C)` to the next `A` and the a-posteriori
//! PMF `C̃` ([`vn_update`]). The error probability is read off `C̃`.

use alloc::vec;
use alloc::vec::Vec;

use crate::arith::{AdderModel, Alphabet, ArithError, ErrorInjector, ErrorModel, NoiseParams, SignedRepr};
use crate::channel::{prior_pmf, ChannelError, ChannelModel, QuantConfig};
use crate::pmf::Pmf;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeError {
    #[error("degrees must satisfy dv >= 2 and dc >= 2 (got dv={dv}, dc={dc})")]
    InvalidDegrees { dv: usize, dc: usize },
    #[error("a-posteriori width q̃={q_tilde} must exceed message width q={q}")]
    InvalidWidths { q: u32, q_tilde: u32 },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// How the adder's error injection is propagated through a PMF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InjectionPath {
    /// Closed forms for the sign-preserving and full-depth adders.
    #[default]
    ClosedForm,
    /// Generic `(2Q̃+1)²` transition matrix built from the injection map.
    Matrix,
}

/// Rules used to classify a `P_e^(ℓ)` sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRules {
    pub max_iters: usize,
    /// Trailing window (iterations) for the convergence test.
    pub window: usize,
    /// Absolute bound on `max - min` of `P_e` over the window.
    pub pe_tol: f64,
    /// Relative bound on `(max - min) / max` of `P_e` over the window.
    pub rel_tol: f64,
    /// Bound on the L∞ change of the a-posteriori PMF in the last iteration.
    pub pmf_tol: f64,
    /// Probabilities below this are treated as exact zero.
    pub zero_floor: f64,
    /// Iterations before the periodicity search starts.
    pub burn_in: usize,
    pub max_period: usize,
    /// Number of consecutive iterations that must repeat with period `T`.
    pub period_window: usize,
    pub period_tol: f64,
    /// The periodicity search runs every this many iterations after burn-in.
    pub period_check_every: usize,
}

impl TraceRules {
    /// Short runs used for grid sweeps.
    pub fn sweep() -> Self {
        Self { max_iters: 200, ..Self::threshold_grade() }
    }

    /// Long runs able to separate slow convergence from periodic behaviour.
    pub fn threshold_grade() -> Self {
        Self {
            max_iters: 50_000,
            window: 100,
            pe_tol: 1e-10,
            rel_tol: 1e-6,
            pmf_tol: 1e-12,
            zero_floor: 1e-300,
            burn_in: 1_000,
            max_period: 1_000,
            period_window: 2_000,
            period_tol: 1e-10,
            period_check_every: 1_000,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

impl Default for TraceRules {
    fn default() -> Self {
        Self::threshold_grade()
    }
}

/// Complete configuration of one density-evolution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeConfig {
    pub dv: usize,
    pub dc: usize,
    pub q: u32,
    pub q_tilde: u32,
    pub noise: NoiseParams,
    pub repr: SignedRepr,
    pub channel: ChannelModel,
    /// Channel scale factor `μ`.
    pub mu: f64,
    pub injection: InjectionPath,
    pub rules: TraceRules,
}

impl DeConfig {
    /// `(3,6)` ensemble, `q = 4`, `q̃ = 5`, noiseless hardware.
    pub fn regular_3_6(channel: ChannelModel, mu: f64) -> Self {
        Self {
            dv: 3,
            dc: 6,
            q: 4,
            q_tilde: 5,
            noise: NoiseParams::noiseless(),
            repr: SignedRepr::default(),
            channel,
            mu,
            injection: InjectionPath::default(),
            rules: TraceRules::default(),
        }
    }

    pub fn with_noise(mut self, noise: NoiseParams) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_channel(mut self, channel: ChannelModel) -> Self {
        self.channel = channel;
        self
    }

    pub fn with_rules(mut self, rules: TraceRules) -> Self {
        self.rules = rules;
        self
    }

    pub fn quant(&self) -> Result<QuantConfig, DeError> {
        let quant = QuantConfig::new(self.mu, self.q)?;
        quant.check_for(&self.channel)?;
        Ok(quant)
    }

    pub fn validate(&self) -> Result<(), DeError> {
        if self.dv < 2 || self.dc < 2 {
            return Err(DeError::InvalidDegrees { dv: self.dv, dc: self.dc });
        }
        if self.q_tilde <= self.q {
            return Err(DeError::InvalidWidths { q: self.q, q_tilde: self.q_tilde });
        }
        Alphabet::new(self.q_tilde)?;
        self.noise.validate()?;
        self.quant()?;
        Ok(())
    }

    pub fn q_bound(&self) -> i32 {
        (1 << (self.q - 1)) - 1
    }

    pub fn q_tilde_bound(&self) -> i32 {
        (1 << (self.q_tilde - 1)) - 1
    }
}

/// Check-node update: PMF `B` of the check-to-variable message given the PMF
/// `A` of the incoming variable-to-check messages.
pub fn cn_update(a: &Pmf, dc: usize, p_c: f64, p_x: f64) -> Pmf {
    let mut b = a.clone();
    for _ in 2..dc {
        b = cn_step(&b, a, p_c, p_x);
    }
    b
}

/// Sign-split tail sums of one operand of the noisy min/XOR pair.
///
/// With `h = D(0)/2` (a zero has either sign with probability ½):
/// `ge_pos[z] = D_[z,Q]`, `ge_neg[z] = D_[-Q,-z]`,
/// `lt_pos[z] = D_[0⁺,z-1]`, `lt_neg[z] = D_[1-z,0⁻]`, for `z = 1..=Q`.
struct Tails {
    ge_pos: Vec<f64>,
    ge_neg: Vec<f64>,
    lt_pos: Vec<f64>,
    lt_neg: Vec<f64>,
}

impl Tails {
    fn new(d: &Pmf) -> Self {
        let q = d.bound() as usize;
        let mut t = Tails {
            ge_pos: vec![0.0; q + 2],
            ge_neg: vec![0.0; q + 2],
            lt_pos: vec![0.0; q + 2],
            lt_neg: vec![0.0; q + 2],
        };
        for z in (1..=q).rev() {
            t.ge_pos[z] = t.ge_pos[z + 1] + d[z as i32];
            t.ge_neg[z] = t.ge_neg[z + 1] + d[-(z as i32)];
        }
        let half = 0.5 * d[0];
        t.lt_pos[1] = half;
        t.lt_neg[1] = half;
        for z in 2..=q {
            t.lt_pos[z] = t.lt_pos[z - 1] + d[z as i32 - 1];
            t.lt_neg[z] = t.lt_neg[z - 1] + d[1 - z as i32];
        }
        t
    }
}

/// One step of the check-node recursion: PMF of
/// `x_pr(sgn β, sgn α) · m_pr(|β|, |α|)` for independent `β ~ prev`, `α ~ a`.
fn cn_step(prev: &Pmf, a: &Pmf, p_c: f64, p_x: f64) -> Pmf {
    let q = a.bound();
    let qs = q as usize;
    let tb = Tails::new(prev);
    let ta = Tails::new(a);

    // F'(z) = Pr(β_i >= z | p_x = 0) and G'(-z) = Pr(β_i <= -z | p_x = 0),
    // z = 1..=Q. Tail sums run up to ±Q.
    let mut f_pos = vec![0.0; qs + 2];
    let mut g_neg = vec![0.0; qs + 2];
    for z in 1..=qs {
        let same_sign = tb.ge_pos[z] * ta.ge_pos[z] + tb.ge_neg[z] * ta.ge_neg[z];
        let same_sign_switched = tb.lt_pos[z] * ta.ge_pos[z]
            + ta.lt_pos[z] * tb.ge_pos[z]
            + tb.lt_neg[z] * ta.ge_neg[z]
            + ta.lt_neg[z] * tb.ge_neg[z];
        f_pos[z] = same_sign + p_c * same_sign_switched;

        let opposite = tb.ge_pos[z] * ta.ge_neg[z] + ta.ge_pos[z] * tb.ge_neg[z];
        let opposite_switched = tb.lt_pos[z] * ta.ge_neg[z]
            + ta.lt_pos[z] * tb.ge_neg[z]
            + tb.ge_pos[z] * ta.lt_neg[z]
            + ta.ge_pos[z] * tb.lt_neg[z];
        g_neg[z] = opposite + p_c * opposite_switched;
    }

    let mut out = Pmf::zeros(q);
    let (a0, b0) = (a[0], prev[0]);
    out[0] = a0 * b0 + (b0 * (1.0 - a0) + a0 * (1.0 - b0)) * (1.0 - p_c);
    // With the XOR fault, F(z) = Pr(β >= z) and G(z) = Pr(β <= -z).
    let tail_pos = |z: usize| (1.0 - p_x) * f_pos[z] + p_x * g_neg[z];
    let tail_neg = |z: usize| (1.0 - p_x) * g_neg[z] + p_x * f_pos[z];
    for z in 1..=qs {
        let zi = z as i32;
        out[zi] = (tail_pos(z) - tail_pos(z + 1)).max(0.0);
        out[-zi] = (tail_neg(z) - tail_neg(z + 1)).max(0.0);
    }
    out
}

/// Adder error injection applied to a PMF on `M̃`.
#[derive(Debug, Clone, PartialEq)]
pub enum InjectionKernel {
    Identity,
    SignPreserving { p_a: f64, bound: i32 },
    FullDepth { p_a: f64, bound: i32 },
    Matrix { matrix: Vec<f64>, bound: i32 },
}

impl InjectionKernel {
    pub fn new(injector: &ErrorInjector, path: InjectionPath) -> Self {
        let bound = injector.alphabet().bound();
        let p_a = injector.p0();
        match (path, injector.model()) {
            (InjectionPath::ClosedForm, _) if p_a == 0.0 => InjectionKernel::Identity,
            (InjectionPath::ClosedForm, ErrorModel::SignPreserving) => {
                InjectionKernel::SignPreserving { p_a, bound }
            }
            (InjectionPath::ClosedForm, ErrorModel::FullDepth) => InjectionKernel::FullDepth { p_a, bound },
            _ => InjectionKernel::Matrix { matrix: injector.transition_matrix(), bound },
        }
    }

    pub fn apply(&self, c: &Pmf) -> Pmf {
        match *self {
            InjectionKernel::Identity => c.clone(),
            InjectionKernel::SignPreserving { p_a, bound } => {
                debug_assert_eq!(c.bound(), bound);
                let qt = bound as f64;
                let b = bound as usize;
                let s = c.as_slice();
                let half = 0.5 * s[b];
                let neg: f64 = s[..b].iter().sum::<f64>() + half;
                let pos: f64 = s[b + 1..].iter().sum::<f64>() + half;
                let nonzero = s[..b].iter().sum::<f64>() + s[b + 1..].iter().sum::<f64>();
                let mut out = Pmf::zeros(bound);
                let o = out.as_mut_slice();
                for i in 0..b {
                    o[i] = (1.0 - p_a) * s[i] + p_a / qt * (neg - s[i]);
                }
                o[b] = (1.0 - p_a) * s[b] + p_a / qt * nonzero;
                for i in b + 1..s.len() {
                    o[i] = (1.0 - p_a) * s[i] + p_a / qt * (pos - s[i]);
                }
                out
            }
            InjectionKernel::FullDepth { p_a, bound } => {
                debug_assert_eq!(c.bound(), bound);
                let w = p_a / (2.0 * bound as f64);
                let s = c.as_slice();
                // 1 - c(z), accumulated without cancellation.
                let total_below: Vec<f64> = s
                    .iter()
                    .scan(0.0, |acc, &p| {
                        let before = *acc;
                        *acc += p;
                        Some(before)
                    })
                    .collect();
                let mut above = 0.0;
                let mut out = Pmf::zeros(bound);
                for i in (0..s.len()).rev() {
                    let others = total_below[i] + above;
                    out.as_mut_slice()[i] = (1.0 - p_a) * s[i] + w * others;
                    above += s[i];
                }
                out
            }
            InjectionKernel::Matrix { ref matrix, bound } => {
                debug_assert_eq!(c.bound(), bound);
                let n = c.as_slice().len();
                let mut out = Pmf::zeros(bound);
                for (row, &p) in c.as_slice().iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let t = &matrix[row * n..(row + 1) * n];
                    for (o, &tw) in out.as_mut_slice().iter_mut().zip(t) {
                        *o += p * tw;
                    }
                }
                out
            }
        }
    }
}

/// Exact distribution of `s_M̃(Ω + β)` for independent `Ω ~ acc` and `β ~ b`.
fn add_saturate(acc: &Pmf, b: &Pmf) -> Pmf {
    let bound = acc.bound();
    let mut out = Pmf::zeros(bound);
    for (u, pu) in acc.iter() {
        if pu == 0.0 {
            continue;
        }
        for (w, pw) in b.iter() {
            out[(u + w).clamp(-bound, bound)] += pu * pw;
        }
    }
    out
}

/// Variable-node update. Returns `(A, C̃)`: the variable-to-check PMF on `M`
/// (after `d_v - 1` noisy additions and `q`-bit saturation) and the
/// a-posteriori PMF on `M̃` (after all `d_v` additions).
pub fn vn_update(b: &Pmf, c: &Pmf, dv: usize, kernel: &InjectionKernel, q_tilde_bound: i32) -> (Pmf, Pmf) {
    let mut acc = c.widen_to(q_tilde_bound);
    let mut a = None;
    for i in 1..=dv {
        acc = kernel.apply(&add_saturate(&acc, b));
        if i == dv - 1 {
            a = Some(acc.saturate_to(c.bound()));
        }
    }
    (a.expect("dv >= 2"), acc)
}

/// Error probability `Σ_{z̃<0} C̃(z̃) + C̃(0)/2`.
pub fn error_probability(c_tilde: &Pmf) -> f64 {
    c_tilde.error_probability()
}

/// Lower bound on `P_e^(ℓ)`, `ℓ >= 1`, implied by the last noisy addition.
pub fn de_lower_bound(noise: &NoiseParams, q_tilde_bound: i32) -> f64 {
    let qt = q_tilde_bound as f64;
    match noise.adder {
        AdderModel::SignPreserving => noise.p_a / (2.0 * qt),
        AdderModel::FullDepth => noise.p_a / 2.0 + noise.p_a / (4.0 * qt),
    }
}

/// Iterating density-evolution state.
#[derive(Debug, Clone)]
pub struct DeState {
    prior: Pmf,
    a: Pmf,
    b: Pmf,
    c_tilde: Pmf,
    kernel: InjectionKernel,
    dv: usize,
    dc: usize,
    p_c: f64,
    p_x: f64,
    q_tilde_bound: i32,
    iteration: usize,
}

impl DeState {
    pub fn new(cfg: &DeConfig) -> Result<Self, DeError> {
        cfg.validate()?;
        let quant = cfg.quant()?;
        let prior = prior_pmf(&cfg.channel, &quant);
        let adder = cfg.noise.adder_injector(Alphabet::new(cfg.q_tilde)?, cfg.repr)?;
        let kernel = InjectionKernel::new(&adder, cfg.injection);
        let q_tilde_bound = cfg.q_tilde_bound();
        Ok(Self {
            a: prior.clone(),
            b: Pmf::zeros(prior.bound()),
            c_tilde: prior.widen_to(q_tilde_bound),
            prior,
            kernel,
            dv: cfg.dv,
            dc: cfg.dc,
            p_c: cfg.noise.p_c,
            p_x: cfg.noise.p_x,
            q_tilde_bound,
            iteration: 0,
        })
    }

    /// Run one decoding iteration; returns the new `P_e`.
    pub fn step(&mut self) -> f64 {
        self.b = cn_update(&self.a, self.dc, self.p_c, self.p_x);
        self.b.normalize();
        let (mut a, mut c_tilde) = vn_update(&self.b, &self.prior, self.dv, &self.kernel, self.q_tilde_bound);
        a.normalize();
        c_tilde.normalize();
        self.a = a;
        self.c_tilde = c_tilde;
        self.iteration += 1;
        self.error_probability()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn prior(&self) -> &Pmf {
        &self.prior
    }

    /// Variable-to-check PMF `A^(ℓ)`.
    pub fn a(&self) -> &Pmf {
        &self.a
    }

    /// Check-to-variable PMF `B^(ℓ)`.
    pub fn b(&self) -> &Pmf {
        &self.b
    }

    /// A-posteriori PMF `C̃^(ℓ)`.
    pub fn c_tilde(&self) -> &Pmf {
        &self.c_tilde
    }

    pub fn error_probability(&self) -> f64 {
        self.c_tilde.error_probability()
    }
}

/// Long-run behaviour of a `P_e^(ℓ)` sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceClass {
    Converged { limit: f64 },
    /// Oscillating trace; `period` is set when an exact period was found.
    Periodic { period: Option<usize>, inf: f64, sup: f64 },
    MaxedOut,
}

/// Result of [`de_run`]. `pe[ℓ]` is `P_e^(ℓ)`, starting at `ℓ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeTrace {
    pub pe: Vec<f64>,
    pub class: TraceClass,
}

impl DeTrace {
    pub fn iterations(&self) -> usize {
        self.pe.len() - 1
    }

    pub fn limit(&self) -> Option<f64> {
        match self.class {
            TraceClass::Converged { limit } => Some(limit),
            _ => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self.class, TraceClass::Converged { .. })
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.class, TraceClass::Periodic { .. })
    }
}

fn floor_zero(p: f64, floor: f64) -> f64 {
    if p < floor {
        0.0
    } else {
        p
    }
}

/// Convergence test on the trailing window of `pe`.
pub fn converged_limit(pe: &[f64], last_pmf_change: f64, rules: &TraceRules) -> Option<f64> {
    if pe.len() <= rules.window {
        return None;
    }
    let tail = &pe[pe.len() - rules.window..];
    let (lo, hi) = tail
        .iter()
        .map(|&p| floor_zero(p, rules.zero_floor))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)));
    if hi == 0.0 {
        return Some(0.0);
    }
    let spread = hi - lo;
    let stable = spread < rules.pe_tol && spread <= rules.rel_tol * hi && last_pmf_change < rules.pmf_tol;
    stable.then(|| floor_zero(*pe.last().unwrap(), rules.zero_floor))
}

/// Non-convergent oscillation detection.
///
/// First looks for an exact period `T in 2..=max_period` (the last
/// `period_window` values repeat with lag `T` within `period_tol`). Limit
/// cycles whose rotation number is not a small rational never repeat
/// exactly, so as a fallback the trace is also accepted when the running
/// inf/sup envelope is stationary: the last `2 * period_window` values are
/// cut into 8 blocks whose minima and maxima agree to 1% of the amplitude.
pub fn detect_period(pe: &[f64], rules: &TraceRules) -> Option<TraceClass> {
    let window = rules.period_window;
    if window == 0 || pe.len() <= window + 2 {
        return None;
    }
    let tail = &pe[pe.len() - window..];
    let (inf, sup) = min_max(tail);
    if sup - inf <= 10.0 * rules.period_tol.max(1e-3 * sup) {
        return None;
    }
    let max_period = rules.max_period.min((pe.len() - window) / 2);
    let start = pe.len() - window;
    let exact = (2..=max_period).find(|&t| (start..pe.len()).all(|l| (pe[l] - pe[l - t]).abs() < rules.period_tol));
    if let Some(period) = exact {
        return Some(TraceClass::Periodic { period: Some(period), inf, sup });
    }
    let span = 2 * window;
    if pe.len() < span {
        return None;
    }
    let blocks: Vec<(f64, f64)> = pe[pe.len() - span..].chunks(span / 8).map(min_max).collect();
    let (lo_min, lo_max) = min_max(&blocks.iter().map(|b| b.0).collect::<Vec<_>>());
    let (hi_min, hi_max) = min_max(&blocks.iter().map(|b| b.1).collect::<Vec<_>>());
    let (inf, sup) = (lo_min, hi_max);
    let tol = 0.01 * (sup - inf);
    (lo_max - lo_min <= tol && hi_max - hi_min <= tol).then_some(TraceClass::Periodic { period: None, inf, sup })
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)))
}

/// Run density evolution until the trace converges, is found periodic, or
/// the iteration budget is exhausted.
pub fn de_run(cfg: &DeConfig) -> Result<DeTrace, DeError> {
    de_run_observed(cfg, |_| {})
}

/// [`de_run`] with a callback invoked after every iteration.
pub fn de_run_observed<F: FnMut(&DeState)>(cfg: &DeConfig, mut observe: F) -> Result<DeTrace, DeError> {
    let rules = &cfg.rules;
    let mut state = DeState::new(cfg)?;
    let mut pe = Vec::with_capacity(rules.max_iters.min(10_000) + 1);
    pe.push(state.error_probability());
    observe(&state);
    let mut class = TraceClass::MaxedOut;
    while state.iteration() < rules.max_iters {
        let before = state.c_tilde().clone();
        pe.push(state.step());
        observe(&state);
        let change = before.max_abs_diff(state.c_tilde());
        if let Some(limit) = converged_limit(&pe, change, rules) {
            class = TraceClass::Converged { limit };
            break;
        }
        let l = state.iteration();
        let check_now = l >= rules.burn_in
            && (l % rules.period_check_every == 0 || l == rules.max_iters)
            && pe.len() > rules.period_window;
        if check_now {
            if let Some(periodic) = detect_period(&pe, rules) {
                class = periodic;
                break;
            }
        }
    }
    Ok(DeTrace { pe, class })
}
