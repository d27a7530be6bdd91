//! Useful region, target-error-rate (η) thresholds, local Lipschitz
//! estimates and the functional threshold.
//!
//! Channel parameters are handled through a *degradation coordinate* `t`
//! that grows as the channel gets worse: `t = ε` on the BSC and
//! `t = -SNR(dB)` on the BI-AWGN channel. Reported values are always in the
//! channel's native unit (`ε`, or SNR in dB).

use alloc::vec::Vec;

use crate::channel::{ChannelError, ChannelModel};
use crate::de::{de_run, DeConfig, DeError, DeTrace, TraceClass};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThresholdError {
    #[error("not enough curve samples around {at} for a Lipschitz estimate")]
    InsufficientSamples { at: f64 },
    #[error("invalid search grid: {0}")]
    InvalidGrid(&'static str),
    #[error("target error probability {0} outside (0, 1)")]
    InvalidEta(f64),
    #[error(transparent)]
    De(#[from] DeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Which channel parameter is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelAxis {
    /// Crossover probability `ε`, increasing.
    Bsc,
    /// SNR in dB, decreasing.
    AwgnSnrDb,
}

impl ChannelAxis {
    pub fn channel(self, value: f64) -> Result<ChannelModel, ChannelError> {
        match self {
            ChannelAxis::Bsc => ChannelModel::bsc(value),
            ChannelAxis::AwgnSnrDb => ChannelModel::awgn_snr_db(value),
        }
    }

    /// Native value to degradation coordinate.
    pub fn to_t(self, value: f64) -> f64 {
        match self {
            ChannelAxis::Bsc => value,
            ChannelAxis::AwgnSnrDb => -value,
        }
    }

    pub fn from_t(self, t: f64) -> f64 {
        match self {
            ChannelAxis::Bsc => t,
            ChannelAxis::AwgnSnrDb => -t,
        }
    }

    /// Value reported when no channel parameter satisfies the predicate.
    pub fn unreachable(self) -> f64 {
        match self {
            ChannelAxis::Bsc => 0.0,
            ChannelAxis::AwgnSnrDb => f64::INFINITY,
        }
    }
}

/// Grid scan followed by bisection. `start`, `stop` and `step` are in the
/// axis' native unit; `step` and `resolution` are positive magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Search {
    pub axis: ChannelAxis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub resolution: f64,
}

impl Search {
    /// `ε` from 0.001 to 0.2, step 1e-3, refined to 1e-4.
    pub fn bsc() -> Self {
        Self { axis: ChannelAxis::Bsc, start: 0.001, stop: 0.2, step: 1e-3, resolution: 1e-4 }
    }

    /// SNR from 8 dB down to -2 dB, step 0.1 dB, refined to 0.01 dB.
    pub fn awgn() -> Self {
        Self { axis: ChannelAxis::AwgnSnrDb, start: 8.0, stop: -2.0, step: 0.1, resolution: 0.01 }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_range(mut self, start: f64, stop: f64) -> Self {
        self.start = start;
        self.stop = stop;
        self
    }

    fn validate(&self) -> Result<(), ThresholdError> {
        if !(self.step > 0.0 && self.resolution > 0.0) {
            return Err(ThresholdError::InvalidGrid("step and resolution must be positive"));
        }
        if self.axis.to_t(self.stop) < self.axis.to_t(self.start) {
            return Err(ThresholdError::InvalidGrid("stop must be a worse channel than start"));
        }
        Ok(())
    }

    /// Grid in the degradation coordinate.
    pub fn grid_t(&self) -> Vec<f64> {
        let t0 = self.axis.to_t(self.start);
        let t1 = self.axis.to_t(self.stop);
        let n = libm::floor((t1 - t0) / self.step + 1e-9) as usize;
        (0..=n).map(|k| t0 + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionClass {
    Useful,
    NotUseful,
    /// Periodic, or no convergence within the iteration budget.
    NonConvergent,
}

/// Slow early plateau followed by a large drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    /// First iteration of the plateau window.
    pub start: usize,
    pub level: f64,
    /// First iteration where `P_e` is below `level / 10`.
    pub drop_at: usize,
}

/// Tag an early plateau: a window of at least `window` iterations whose
/// spread is within `rel_spread` of its maximum, later followed by a drop by
/// at least 10x.
pub fn detect_plateau(pe: &[f64], window: usize, rel_spread: f64) -> Option<Plateau> {
    if window == 0 || pe.len() <= window + 1 {
        return None;
    }
    for start in 1..pe.len() - window {
        let w = &pe[start..start + window];
        let hi = w.iter().copied().fold(0.0, f64::max);
        let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
        if hi <= 0.0 || hi - lo > rel_spread * hi {
            continue;
        }
        let level = pe[start + window - 1];
        let drop_at = (start + window..pe.len()).find(|&l| pe[l] < level / 10.0)?;
        return Some(Plateau { start, level, drop_at });
    }
    None
}

/// One classified point of the (hardware, channel) plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    pub config: DeConfig,
    /// Channel parameter in native units (`ε` or `σ²`).
    pub chi: f64,
    pub class: RegionClass,
    pub trace_class: TraceClass,
    pub pe0: f64,
    pub pe_inf: Option<f64>,
    pub iterations: usize,
    pub plateau: Option<Plateau>,
}

/// Run density evolution at `cfg` and apply the useful-region predicate
/// (converged and `P_e^∞ < P_e^(0)`).
pub fn classify_point(cfg: &DeConfig) -> Result<RegionPoint, DeError> {
    let trace = de_run(cfg)?;
    Ok(region_point(cfg, &trace))
}

pub fn region_point(cfg: &DeConfig, trace: &DeTrace) -> RegionPoint {
    let pe0 = trace.pe[0];
    let class = match trace.class {
        TraceClass::Converged { limit } if limit < pe0 => RegionClass::Useful,
        TraceClass::Converged { .. } => RegionClass::NotUseful,
        _ => RegionClass::NonConvergent,
    };
    RegionPoint {
        config: *cfg,
        chi: cfg.channel.parameter(),
        class,
        trace_class: trace.class,
        pe0,
        pe_inf: trace.limit(),
        iterations: trace.iterations(),
        plateau: detect_plateau(&trace.pe, 100, 0.25),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdKind {
    Eta(f64),
    Classical,
    Functional,
}

/// Outcome of a threshold search. `value` is in the axis' native unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub kind: ThresholdKind,
    pub value: f64,
    /// Final `(last passing, first failing)` pair in native units; `None`
    /// when no grid point passed. Equal ends mean the whole grid passed.
    pub bracket: Option<(f64, f64)>,
    /// Sampled `(χ, local Lipschitz estimate)` pairs (functional threshold).
    pub lipschitz_profile: Vec<(f64, f64)>,
    /// Sampled `(χ, P_e^∞)` curve in native units.
    pub curve: Vec<(f64, f64)>,
    /// For the functional threshold: the transition is a discontinuity.
    pub admissible: Option<bool>,
}

fn config_at(base: &DeConfig, axis: ChannelAxis, t: f64) -> Result<DeConfig, ThresholdError> {
    Ok(base.with_channel(axis.channel(axis.from_t(t))?))
}

/// Channel parameter value in native units for a config (`ε`, or SNR dB).
fn native(axis: ChannelAxis, t: f64) -> f64 {
    axis.from_t(t)
}

fn scan_threshold<P>(
    base: &DeConfig,
    search: &Search,
    kind: ThresholdKind,
    pass: P,
) -> Result<ThresholdResult, ThresholdError>
where
    P: Fn(&DeTrace) -> bool,
{
    search.validate()?;
    let axis = search.axis;
    let mut curve = Vec::new();
    let eval = |t: f64, curve: &mut Vec<(f64, f64)>| -> Result<bool, ThresholdError> {
        let trace = de_run(&config_at(base, axis, t)?)?;
        if let Some(limit) = trace.limit() {
            curve.push((native(axis, t), limit));
        }
        Ok(pass(&trace))
    };
    let mut last_pass = None;
    let mut first_fail = None;
    for t in search.grid_t() {
        if eval(t, &mut curve)? {
            last_pass = Some(t);
        } else {
            first_fail = Some(t);
            break;
        }
    }
    let Some(mut lo) = last_pass else {
        return Ok(ThresholdResult {
            kind,
            value: axis.unreachable(),
            bracket: None,
            lipschitz_profile: Vec::new(),
            curve,
            admissible: None,
        });
    };
    let Some(mut hi) = first_fail else {
        let v = native(axis, lo);
        return Ok(ThresholdResult {
            kind,
            value: v,
            bracket: Some((v, v)),
            lipschitz_profile: Vec::new(),
            curve,
            admissible: None,
        });
    };
    while hi - lo > search.resolution {
        let mid = 0.5 * (lo + hi);
        if eval(mid, &mut curve)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    sort_curve(&mut curve, axis);
    Ok(ThresholdResult {
        kind,
        value: native(axis, lo),
        bracket: Some((native(axis, lo), native(axis, hi))),
        lipschitz_profile: Vec::new(),
        curve,
        admissible: None,
    })
}

fn sort_curve(curve: &mut [(f64, f64)], axis: ChannelAxis) {
    curve.sort_by(|a, b| axis.to_t(a.0).total_cmp(&axis.to_t(b.0)));
}

/// η-threshold: largest channel degradation `χ` such that `P_e^∞` exists and
/// is below `eta` for every `χ' <= χ` on the scanned grid, refined by
/// bisection between the last passing and first failing grid points.
pub fn eta_threshold(base: &DeConfig, search: &Search, eta: f64) -> Result<ThresholdResult, ThresholdError> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(ThresholdError::InvalidEta(eta));
    }
    scan_threshold(base, search, ThresholdKind::Eta(eta), |tr| tr.limit().is_some_and(|p| p < eta))
}

/// Classical threshold: `P_e^∞ = 0` (below the zero floor) for all better
/// channels.
pub fn classical_threshold(base: &DeConfig, search: &Search) -> Result<ThresholdResult, ThresholdError> {
    scan_threshold(base, search, ThresholdKind::Classical, |tr| tr.limit() == Some(0.0))
}

/// Local Lipschitz estimate of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lipschitz {
    Finite(f64),
    Infinite,
}

impl Lipschitz {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Lipschitz::Infinite)
    }

    /// `f64::INFINITY` for the infinite flag.
    pub fn value(&self) -> f64 {
        match *self {
            Lipschitz::Finite(v) => v,
            Lipschitz::Infinite => f64::INFINITY,
        }
    }
}

pub const LIPSCHITZ_CAP: f64 = 1e6;

/// Largest adjacent divided difference over nested windows centred at `at`,
/// each half the width of the previous one, for as long as a window still
/// holds at least two samples. Returns the estimate on the narrowest such
/// window, or the infinite flag when the two narrowest windows both exceed
/// `cap`. `curve` must be sorted by abscissa.
pub fn lipschitz_estimate(curve: &[(f64, f64)], at: f64, cap: f64) -> Result<Lipschitz, ThresholdError> {
    let slopes = lipschitz_windows(curve, at)?;
    let n = slopes.len();
    if n >= 2 && slopes[n - 1] > cap && slopes[n - 2] > cap {
        return Ok(Lipschitz::Infinite);
    }
    Ok(Lipschitz::Finite(slopes[n - 1]))
}

/// Per-window slope estimates, widest window first.
pub fn lipschitz_windows(curve: &[(f64, f64)], at: f64) -> Result<Vec<f64>, ThresholdError> {
    if curve.len() < 2 {
        return Err(ThresholdError::InsufficientSamples { at });
    }
    let span = curve.iter().map(|&(x, _)| libm::fabs(x - at)).fold(0.0, f64::max);
    let mut half = span;
    let mut out = Vec::new();
    loop {
        let inside: Vec<(f64, f64)> =
            curve.iter().copied().filter(|&(x, _)| libm::fabs(x - at) <= half * (1.0 + 1e-12)).collect();
        if inside.len() < 2 {
            break;
        }
        let slope = inside
            .windows(2)
            .filter(|w| w[1].0 != w[0].0)
            .map(|w| libm::fabs((w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
            .fold(0.0, f64::max);
        out.push(slope);
        if half == 0.0 {
            break;
        }
        half *= 0.5;
    }
    if out.is_empty() {
        Err(ThresholdError::InsufficientSamples { at })
    } else {
        Ok(out)
    }
}

/// Options of the functional-threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalOptions {
    /// Lipschitz cap for the infinite flag.
    pub cap: f64,
    /// Relative tolerance of the nondecreasing-slope test.
    pub slope_rel_tol: f64,
    /// Absolute slack of the nondecreasing-slope test.
    pub slope_abs_tol: f64,
    /// Smallest bracket width of the jump refinement.
    pub min_width: f64,
}

impl Default for FunctionalOptions {
    fn default() -> Self {
        Self { cap: LIPSCHITZ_CAP, slope_rel_tol: 0.01, slope_abs_tol: 1e-6, min_width: 1e-11 }
    }
}

struct Sample {
    t: f64,
    pe: Option<f64>,
}

fn sample(base: &DeConfig, axis: ChannelAxis, t: f64) -> Result<Sample, ThresholdError> {
    let trace = de_run(&config_at(base, axis, t)?)?;
    Ok(Sample { t, pe: trace.limit() })
}

/// Whether two converged neighbours look like the two sides of a jump.
fn jump_candidate(a: f64, b: f64) -> bool {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    hi > 0.0 && hi > 2.0 * lo
}

enum Refined {
    /// Bracket narrowed with the slope above the cap twice in a row.
    Jump { lo: f64, hi: f64 },
    /// The bracket hit a point without a limit (non-convergence).
    Diverged { lo: f64, hi: f64 },
    /// Refinement showed a steep but continuous change.
    Continuous,
}

/// Bisect `[lo, hi]` keeping the half with the larger change of `P_e^∞`.
fn refine_jump(
    base: &DeConfig,
    axis: ChannelAxis,
    mut lo: Sample,
    mut hi: Sample,
    opts: &FunctionalOptions,
    curve: &mut Vec<(f64, f64)>,
) -> Result<Refined, ThresholdError> {
    let mut over_cap = 0;
    loop {
        let (Some(plo), Some(phi)) = (lo.pe, hi.pe) else {
            return Ok(Refined::Diverged { lo: lo.t, hi: hi.t });
        };
        let width = hi.t - lo.t;
        let slope = libm::fabs(phi - plo) / width;
        over_cap = if slope > opts.cap { over_cap + 1 } else { 0 };
        if over_cap >= 2 {
            return Ok(Refined::Jump { lo: lo.t, hi: hi.t });
        }
        if width <= opts.min_width {
            return Ok(Refined::Continuous);
        }
        let mid = sample(base, axis, 0.5 * (lo.t + hi.t))?;
        let Some(pm) = mid.pe else {
            // Escape times from a plateau diverge next to a discontinuity,
            // so a maxed-out midpoint inside an already steep bracket still
            // marks a jump. Otherwise the transition is not a clean jump.
            if over_cap >= 1 {
                return Ok(Refined::Jump { lo: lo.t, hi: hi.t });
            }
            return Ok(Refined::Diverged { lo: lo.t, hi: mid.t });
        };
        curve.push((native(axis, mid.t), pm));
        if libm::fabs(pm - plo) >= libm::fabs(phi - pm) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Functional threshold.
///
/// Scans the grid while (a) every trace converges, (b) no refined interval
/// carries an infinite Lipschitz flag, and (c) the adjacent slopes of
/// `P_e^∞` stay nondecreasing within tolerance. Intervals whose end values
/// differ by more than 2x are refined by bisection; if the refined slope
/// exceeds the cap twice in a row the transition is a discontinuity and the
/// hardware parameters are reported admissible.
pub fn functional_threshold(
    base: &DeConfig,
    search: &Search,
    opts: &FunctionalOptions,
) -> Result<ThresholdResult, ThresholdError> {
    search.validate()?;
    let axis = search.axis;
    let grid = search.grid_t();
    let mut curve: Vec<(f64, f64)> = Vec::new();
    let mut profile: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<Sample> = None;
    let mut prev_slope: Option<f64> = None;

    let finish = |value_t: f64,
                  bracket: Option<(f64, f64)>,
                  admissible: bool,
                  mut curve: Vec<(f64, f64)>,
                  profile: Vec<(f64, f64)>| {
        sort_curve(&mut curve, axis);
        ThresholdResult {
            kind: ThresholdKind::Functional,
            value: native(axis, value_t),
            bracket: bracket.map(|(a, b)| (native(axis, a), native(axis, b))),
            lipschitz_profile: profile,
            curve,
            admissible: Some(admissible),
        }
    };

    for &t in &grid {
        let cur = sample(base, axis, t)?;
        let Some(p) = cur.pe else {
            // Condition (a) fails on the grid.
            return Ok(match prev {
                None => ThresholdResult {
                    kind: ThresholdKind::Functional,
                    value: axis.unreachable(),
                    bracket: None,
                    lipschitz_profile: profile,
                    curve,
                    admissible: Some(false),
                },
                Some(prev) => {
                    let lo_t = prev.t;
                    match refine_jump(base, axis, prev, cur, opts, &mut curve)? {
                        Refined::Jump { lo, hi } => finish(lo, Some((lo, hi)), true, curve, profile),
                        Refined::Diverged { lo, hi } => finish(lo, Some((lo, hi)), false, curve, profile),
                        Refined::Continuous => finish(lo_t, Some((lo_t, t)), false, curve, profile),
                    }
                }
            });
        };
        curve.push((native(axis, t), p));
        if let Some(prev_s) = prev.take() {
            let p_prev = prev_s.pe.expect("only converged samples are kept");
            let prev_t = prev_s.t;
            if jump_candidate(p_prev, p) {
                let cur_copy = Sample { t, pe: Some(p) };
                match refine_jump(base, axis, prev_s, cur_copy, opts, &mut curve)? {
                    Refined::Jump { lo, hi } => {
                        profile.push((native(axis, 0.5 * (lo + hi)), f64::INFINITY));
                        return Ok(finish(lo, Some((lo, hi)), true, curve, profile));
                    }
                    Refined::Diverged { lo, hi } => {
                        return Ok(finish(lo, Some((lo, hi)), false, curve, profile));
                    }
                    Refined::Continuous => {}
                }
            }
            let slope = libm::fabs(p - p_prev) / (t - prev_t);
            profile.push((native(axis, 0.5 * (t + prev_t)), slope));
            if let Some(s0) = prev_slope {
                if slope < (1.0 - opts.slope_rel_tol) * s0 - opts.slope_abs_tol {
                    // Condition (c) fails: the Lipschitz constant stops
                    // increasing on a continuous curve.
                    return Ok(finish(prev_t, Some((prev_t, t)), false, curve, profile));
                }
            }
            prev_slope = Some(slope);
        }
        prev = Some(Sample { t, pe: Some(p) });
    }
    let last = grid.last().copied().unwrap_or(axis.to_t(search.start));
    Ok(finish(last, Some((last, last)), false, curve, profile))
}
