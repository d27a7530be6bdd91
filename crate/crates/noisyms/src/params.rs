//! Resolved parameter sets of every subcommand.
//!
//! Each struct is the single source of truth for one command: it is
//! deserialized from the config file, overlaid with command-line flags and
//! echoed verbatim into the run manifest. Replaying a manifest deserializes
//! the same struct again.

use anyhow::{bail, ensure, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use noisyms_core::de::{InjectionPath, TraceRules};
use noisyms_core::decoder::TieBreak;
use noisyms_core::montecarlo::StopRule;
use noisyms_core::threshold::{ChannelAxis, FunctionalOptions, Search};
use noisyms_core::{AdderModel, ChannelModel, DeConfig, DecoderConfig, NoiseParams, SignedRepr, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Repr {
    SignMagnitude,
    OnesComplement,
    #[default]
    TwosComplement,
}

impl From<Repr> for SignedRepr {
    fn from(r: Repr) -> Self {
        match r {
            Repr::SignMagnitude => SignedRepr::SignMagnitude,
            Repr::OnesComplement => SignedRepr::OnesComplement,
            Repr::TwosComplement => SignedRepr::TwosComplement,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Adder {
    FullDepth,
    #[default]
    SignPreserving,
}

impl From<Adder> for AdderModel {
    fn from(a: Adder) -> Self {
        match a {
            Adder::FullDepth => AdderModel::FullDepth,
            Adder::SignPreserving => AdderModel::SignPreserving,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    /// Binary symmetric channel; `chi` is the crossover probability.
    #[default]
    Bsc,
    /// BI-AWGN channel; `chi` is the SNR in dB.
    Awgn,
}

impl Channel {
    pub fn axis(self) -> ChannelAxis {
        match self {
            Channel::Bsc => ChannelAxis::Bsc,
            Channel::Awgn => ChannelAxis::AwgnSnrDb,
        }
    }

    pub fn model(self, chi: f64) -> Result<ChannelModel> {
        Ok(self.axis().channel(chi)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Rules {
    /// Up to 50000 iterations, periodicity search enabled.
    #[default]
    Threshold,
    /// Up to 200 iterations, for coarse sweeps.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Injection {
    #[default]
    ClosedForm,
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderVariant {
    #[default]
    MsDeStyle,
    MsPractical,
    Scms,
}

impl From<DecoderVariant> for Variant {
    fn from(v: DecoderVariant) -> Self {
        match v {
            DecoderVariant::MsDeStyle => Variant::MsDeStyle,
            DecoderVariant::MsPractical => Variant::MsPractical,
            DecoderVariant::Scms => Variant::Scms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Tie {
    #[default]
    Random,
    Plus,
}

impl From<Tie> for TieBreak {
    fn from(t: Tie) -> Self {
        match t {
            Tie::Random => TieBreak::Random,
            Tie::Plus => TieBreak::Plus,
        }
    }
}

/// Hardware parameter swept along the noise axis of grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HwAxis {
    #[default]
    #[value(name = "p-a")]
    PA,
    #[value(name = "p-c")]
    PC,
    #[value(name = "p-x")]
    PX,
}

impl HwAxis {
    pub fn name(self) -> &'static str {
        match self {
            HwAxis::PA => "p_a",
            HwAxis::PC => "p_c",
            HwAxis::PX => "p_x",
        }
    }

    pub fn apply(self, noise: &mut NoiseParams, value: f64) {
        match self {
            HwAxis::PA => noise.p_a = value,
            HwAxis::PC => noise.p_c = value,
            HwAxis::PX => noise.p_x = value,
        }
    }
}

/// Decoder widths, ensemble and hardware faults shared by the DE commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeParams {
    pub dv: usize,
    pub dc: usize,
    pub q: u32,
    pub q_tilde: u32,
    pub mu: f64,
    pub repr: Repr,
    pub adder: Adder,
    pub p_a: f64,
    pub p_c: f64,
    pub p_x: f64,
    pub channel: Channel,
    /// Crossover probability (BSC) or SNR in dB (AWGN).
    pub chi: f64,
    pub rules: Rules,
    /// Overrides the iteration budget of the rule preset.
    pub max_iters: Option<usize>,
    pub injection: Injection,
}

impl Default for DeParams {
    fn default() -> Self {
        Self {
            dv: 3,
            dc: 6,
            q: 4,
            q_tilde: 5,
            mu: 1.0,
            repr: Repr::default(),
            adder: Adder::default(),
            p_a: 0.0,
            p_c: 0.0,
            p_x: 0.0,
            channel: Channel::Bsc,
            chi: 0.03,
            rules: Rules::default(),
            max_iters: None,
            injection: Injection::default(),
        }
    }
}

impl DeParams {
    pub fn noise(&self) -> NoiseParams {
        NoiseParams { p_a: self.p_a, adder: self.adder.into(), p_c: self.p_c, p_x: self.p_x, p_scu: 0.0 }
    }

    pub fn trace_rules(&self) -> TraceRules {
        let rules = match self.rules {
            Rules::Threshold => TraceRules::threshold_grade(),
            Rules::Sweep => TraceRules::sweep(),
        };
        match self.max_iters {
            Some(n) => rules.with_max_iters(n),
            None => rules,
        }
    }

    /// Core configuration at channel parameter `chi`.
    pub fn de_config_at(&self, chi: f64) -> Result<DeConfig> {
        let cfg = DeConfig {
            dv: self.dv,
            dc: self.dc,
            q: self.q,
            q_tilde: self.q_tilde,
            noise: self.noise(),
            repr: self.repr.into(),
            channel: self.channel.model(chi)?,
            mu: self.mu,
            injection: match self.injection {
                Injection::ClosedForm => InjectionPath::ClosedForm,
                Injection::Matrix => InjectionPath::Matrix,
            },
            rules: self.trace_rules(),
        };
        cfg.validate().context("invalid density-evolution configuration")?;
        Ok(cfg)
    }

    pub fn de_config(&self) -> Result<DeConfig> {
        self.de_config_at(self.chi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PmfDumpParams {
    #[serde(flatten)]
    pub de: DeParams,
    /// Iterations to dump; 0 is the a-priori distribution.
    pub at: Vec<usize>,
}

impl Default for PmfDumpParams {
    fn default() -> Self {
        Self { de: DeParams { rules: Rules::Sweep, ..DeParams::default() }, at: vec![0, 1, 2, 5, 10, 20, 50] }
    }
}

/// Channel grid in native units; `step` and `resolution` are positive
/// magnitudes. Unset fields take the defaults of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelGrid {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
    pub resolution: Option<f64>,
}

impl ChannelGrid {
    /// Fill unset fields from the channel's defaults.
    pub fn resolved(&self, channel: Channel) -> Self {
        let s = match channel {
            Channel::Bsc => Search::bsc(),
            Channel::Awgn => Search::awgn(),
        };
        Self {
            start: Some(self.start.unwrap_or(s.start)),
            stop: Some(self.stop.unwrap_or(s.stop)),
            step: Some(self.step.unwrap_or(s.step)),
            resolution: Some(self.resolution.unwrap_or(s.resolution)),
        }
    }

    pub fn search(&self, channel: Channel) -> Search {
        let r = self.resolved(channel);
        Search {
            axis: channel.axis(),
            start: r.start.unwrap(),
            stop: r.stop.unwrap(),
            step: r.step.unwrap(),
            resolution: r.resolution.unwrap(),
        }
    }
}

/// Explicit hardware values, or a logarithmic grid when `values` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HwGrid {
    pub axis: HwAxis,
    pub values: Vec<f64>,
    pub log_min: f64,
    pub log_max: f64,
    pub points: usize,
    /// Prepend the noiseless value 0 to a logarithmic grid.
    pub include_zero: bool,
}

impl Default for HwGrid {
    fn default() -> Self {
        Self { axis: HwAxis::PA, values: Vec::new(), log_min: 1e-8, log_max: 1e-1, points: 15, include_zero: true }
    }
}

impl HwGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !self.values.is_empty() {
            for &v in &self.values {
                ensure!((0.0..=1.0).contains(&v), "hardware value {v} is not a probability");
            }
            return Ok(self.values.clone());
        }
        ensure!(
            self.log_min > 0.0 && self.log_max <= 1.0 && self.log_min <= self.log_max,
            "logarithmic hardware grid needs 0 < log_min <= log_max <= 1"
        );
        ensure!(self.points >= 1, "hardware grid needs at least one point");
        let (a, b) = (self.log_min.log10(), self.log_max.log10());
        let mut out = Vec::with_capacity(self.points + 1);
        if self.include_zero {
            out.push(0.0);
        }
        for k in 0..self.points {
            let f = if self.points == 1 { 0.0 } else { k as f64 / (self.points - 1) as f64 };
            out.push(10f64.powf(a + f * (b - a)));
        }
        Ok(out)
    }
}

/// Which thresholds to compute per hardware value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSet {
    pub classical: bool,
    /// Targets for η-thresholds.
    pub eta: Vec<f64>,
    pub functional: bool,
}

impl Default for ThresholdSet {
    fn default() -> Self {
        Self { classical: true, eta: Vec::new(), functional: false }
    }
}

impl ThresholdSet {
    pub fn is_empty(&self) -> bool {
        !self.classical && self.eta.is_empty() && !self.functional
    }

    pub fn functional_options(&self) -> FunctionalOptions {
        FunctionalOptions::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionParams {
    #[serde(flatten)]
    pub de: DeParams,
    pub grid: ChannelGrid,
    pub hw: HwGrid,
    pub thresholds: ThresholdSet,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            de: DeParams { rules: Rules::Sweep, ..DeParams::default() },
            grid: ChannelGrid::default(),
            hw: HwGrid::default(),
            thresholds: ThresholdSet { classical: false, ..ThresholdSet::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdSweepParams {
    #[serde(flatten)]
    pub de: DeParams,
    pub mus: Vec<f64>,
    pub grid: ChannelGrid,
    pub hw: HwGrid,
    pub thresholds: ThresholdSet,
}

impl Default for ThresholdSweepParams {
    fn default() -> Self {
        Self {
            de: DeParams::default(),
            mus: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
            grid: ChannelGrid::default(),
            hw: HwGrid { values: vec![0.0], ..HwGrid::default() },
            thresholds: ThresholdSet { classical: false, eta: vec![1e-5], functional: false },
        }
    }
}

/// Where the Tanner graph of a simulation comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSource {
    /// alist file; when unset a random regular graph is generated.
    pub alist: Option<String>,
    pub dv: usize,
    pub dc: usize,
    pub n: usize,
    /// Raise the girth of the generated graph to at least this value.
    pub girth: Option<usize>,
    pub graph_seed: u64,
}

impl Default for GraphSource {
    fn default() -> Self {
        Self { alist: None, dv: 3, dc: 6, n: 1008, girth: None, graph_seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Stop {
    Frames { frames: u64 },
    FrameErrors { target: u64, max_frames: u64 },
}

impl Default for Stop {
    fn default() -> Self {
        match StopRule::default() {
            StopRule::FrameErrors { target, max_frames } => Stop::FrameErrors { target, max_frames },
            StopRule::Frames(frames) => Stop::Frames { frames },
        }
    }
}

impl From<Stop> for StopRule {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Frames { frames } => StopRule::Frames(frames),
            Stop::FrameErrors { target, max_frames } => StopRule::FrameErrors { target, max_frames },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub graph: GraphSource,
    pub variant: DecoderVariant,
    pub q: u32,
    pub q_tilde: u32,
    pub mu: f64,
    pub repr: Repr,
    pub adder: Adder,
    pub p_a: f64,
    pub p_c: f64,
    pub p_x: f64,
    pub p_scu: f64,
    pub max_iters: usize,
    pub early_stopping: bool,
    pub tie_break: Tie,
    pub channel: Channel,
    /// Channel points (crossover probability or SNR in dB).
    pub chi: Vec<f64>,
    pub stop: Stop,
    pub seed: Option<u64>,
}

impl Default for SimulateParams {
    fn default() -> Self {
        let d = DecoderConfig::default();
        Self {
            graph: GraphSource::default(),
            variant: DecoderVariant::default(),
            q: d.q,
            q_tilde: d.q_tilde,
            mu: d.mu,
            repr: Repr::default(),
            adder: Adder::default(),
            p_a: 0.0,
            p_c: 0.0,
            p_x: 0.0,
            p_scu: 0.0,
            max_iters: d.max_iters,
            early_stopping: d.early_stopping,
            tie_break: Tie::default(),
            channel: Channel::Bsc,
            chi: vec![0.04],
            stop: Stop::default(),
            seed: None,
        }
    }
}

impl SimulateParams {
    pub fn decoder_config(&self) -> Result<DecoderConfig> {
        let cfg = DecoderConfig {
            variant: self.variant.into(),
            q: self.q,
            q_tilde: self.q_tilde,
            mu: self.mu,
            noise: NoiseParams {
                p_a: self.p_a,
                adder: self.adder.into(),
                p_c: self.p_c,
                p_x: self.p_x,
                p_scu: self.p_scu,
            },
            repr: self.repr.into(),
            max_iters: self.max_iters,
            early_stopping: self.early_stopping,
            tie_break: self.tie_break.into(),
        };
        cfg.validate().context("invalid decoder configuration")?;
        Ok(cfg)
    }

    pub fn seed(&self) -> Result<u64> {
        match self.seed {
            Some(s) => Ok(s),
            None => bail!("a seed is required: pass --seed <u64> or --seed auto"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateParams {
    pub dv: usize,
    pub dc: usize,
    pub n: usize,
    pub girth: Option<usize>,
    pub seed: Option<u64>,
    /// Attempts of the configuration model before giving up.
    pub attempts: usize,
    /// Budget of edge swaps for girth conditioning.
    pub max_swaps: usize,
}

impl Default for GenerateParams {
    fn default() -> Self {
        Self { dv: 3, dc: 6, n: 1008, girth: None, seed: None, attempts: 100, max_swaps: 10_000_000 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_has_requested_points() {
        let g = HwGrid { log_min: 1e-6, log_max: 1e-2, points: 5, ..HwGrid::default() };
        let v = g.values().unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(v[0], 0.0);
        assert!((v[3] / 1e-4 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_values_are_checked() {
        let g = HwGrid { values: vec![0.1, 1.5], ..HwGrid::default() };
        assert!(g.values().is_err());
    }

    #[test]
    fn widths_are_validated() {
        let p = DeParams { q: 5, q_tilde: 5, ..DeParams::default() };
        assert!(p.de_config().is_err());
        let s = SimulateParams { q: 5, q_tilde: 4, ..SimulateParams::default() };
        assert!(s.decoder_config().is_err());
    }

    #[test]
    fn params_round_trip_through_json() {
        let p = SimulateParams { seed: Some(4), chi: vec![0.01, 0.02], ..SimulateParams::default() };
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(serde_json::from_value::<SimulateParams>(v).unwrap(), p);
        let r = RegionParams::default();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(serde_json::from_value::<RegionParams>(v).unwrap(), r);
    }
}
