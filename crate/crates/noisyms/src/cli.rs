//! Command-line interface.
//!
//! Flags override the config file, which overrides built-in defaults. Every
//! command writes its outputs and a `manifest.json` into `--out`; `rerun`
//! regenerates the outputs of a manifest and checks them byte for byte.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::commands::{self, Output};
use crate::config::ConfigFile;
use crate::graphio;
use crate::output::{read_manifest, sha256_hex};
use crate::params::*;
use crate::runner::with_jobs;

#[derive(Debug, Parser)]
#[command(name = "noisyms", version, about = "Noisy fixed-point Min-Sum / SCMS decoding lab")]
pub struct Cli {
    /// TOML file with one table per subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "noisyms-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density-evolution error-probability trace of one configuration.
    DeTrace(DeTraceArgs),
    /// Density-evolution message PMF snapshots.
    PmfDump(PmfDumpArgs),
    /// Useful / non-convergence classification over a (hardware, channel) grid.
    Region(RegionArgs),
    /// Thresholds versus the channel scale factor.
    ThresholdSweep(ThresholdSweepArgs),
    /// Finite-length Monte-Carlo BER/FER.
    Simulate(SimulateArgs),
    /// Inspect or generate alist files.
    #[command(subcommand)]
    Alist(AlistCommand),
    /// Regenerate the outputs recorded in a manifest and verify checksums.
    Rerun {
        manifest: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum AlistCommand {
    /// Print a structural summary (degrees, girth) as JSON.
    Inspect { file: PathBuf },
    /// Generate a random regular graph.
    Generate(GenerateArgs),
}

/// `u64` or `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Auto,
}

impl FromStr for SeedArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(SeedArg::Auto);
        }
        s.parse().map(SeedArg::Fixed).map_err(|_| format!("expected an unsigned integer or `auto`, got `{s}`"))
    }
}

impl SeedArg {
    fn resolve(self) -> u64 {
        match self {
            SeedArg::Fixed(s) => s,
            SeedArg::Auto => rand::random(),
        }
    }
}

macro_rules! overlay {
    ($dst:expr, $src:expr; $($f:ident),* $(,)?) => {
        $( if let Some(v) = $src.$f.clone() { $dst.$f = v; } )*
    };
}

#[derive(Debug, Args, Default)]
pub struct DeArgs {
    /// Variable-node degree.
    #[arg(long)]
    pub dv: Option<usize>,
    /// Check-node degree.
    #[arg(long)]
    pub dc: Option<usize>,
    /// Message bit-width.
    #[arg(long)]
    pub q: Option<u32>,
    /// A-posteriori bit-width (must exceed q).
    #[arg(long)]
    pub q_tilde: Option<u32>,
    /// Channel scale factor.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, value_enum)]
    pub repr: Option<Repr>,
    #[arg(long, value_enum)]
    pub adder: Option<Adder>,
    /// Adder error probability.
    #[arg(long)]
    pub p_a: Option<f64>,
    /// Comparator flip probability.
    #[arg(long)]
    pub p_c: Option<f64>,
    /// XOR flip probability.
    #[arg(long)]
    pub p_x: Option<f64>,
    #[arg(long, value_enum)]
    pub channel: Option<Channel>,
    /// Crossover probability (bsc) or SNR in dB (awgn).
    #[arg(long, alias = "p0")]
    pub chi: Option<f64>,
    #[arg(long, value_enum)]
    pub rules: Option<Rules>,
    /// Iteration cap (overrides the rules preset).
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub injection: Option<Injection>,
}

impl DeArgs {
    fn apply(&self, p: &mut DeParams) {
        overlay!(p, self; dv, dc, q, q_tilde, mu, repr, adder, p_a, p_c, p_x, channel, chi, rules, injection);
        if self.max_iters.is_some() {
            p.max_iters = self.max_iters;
        }
    }
}

#[derive(Debug, Args)]
pub struct DeTraceArgs {
    #[command(flatten)]
    pub de: DeArgs,
}

#[derive(Debug, Args)]
pub struct PmfDumpArgs {
    #[command(flatten)]
    pub de: DeArgs,
    /// Iterations to dump, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub at: Option<Vec<usize>>,
}

#[derive(Debug, Args, Default)]
pub struct GridArgs {
    /// Best channel of the scan (native units).
    #[arg(long)]
    pub start: Option<f64>,
    /// Worst channel of the scan.
    #[arg(long)]
    pub stop: Option<f64>,
    /// Grid spacing (native units).
    #[arg(long)]
    pub step: Option<f64>,
    /// Bisection resolution of thresholds.
    #[arg(long)]
    pub resolution: Option<f64>,
}

impl GridArgs {
    fn apply(&self, g: &mut ChannelGrid, channel: Channel) {
        if self.start.is_some() {
            g.start = self.start;
        }
        if self.stop.is_some() {
            g.stop = self.stop;
        }
        if self.step.is_some() {
            g.step = self.step;
        }
        if self.resolution.is_some() {
            g.resolution = self.resolution;
        }
        *g = g.resolved(channel);
    }
}

#[derive(Debug, Args, Default)]
pub struct HwArgs {
    /// Hardware parameter on the noise axis.
    #[arg(long, value_enum)]
    pub hw_axis: Option<HwAxis>,
    /// Explicit hardware values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hw_values: Option<Vec<f64>>,
    /// Without explicit values: smallest value of the log-spaced axis.
    #[arg(long)]
    pub hw_log_min: Option<f64>,
    #[arg(long)]
    pub hw_log_max: Option<f64>,
    #[arg(long)]
    pub hw_points: Option<usize>,
    /// Prepend the noiseless value 0 to the log-spaced axis.
    #[arg(long)]
    pub hw_include_zero: Option<bool>,
}

impl HwArgs {
    fn apply(&self, h: &mut HwGrid) {
        if let Some(a) = self.hw_axis {
            h.axis = a;
        }
        if let Some(v) = &self.hw_values {
            h.values = v.clone();
        }
        if let Some(v) = self.hw_log_min {
            h.log_min = v;
        }
        if let Some(v) = self.hw_log_max {
            h.log_max = v;
        }
        if let Some(v) = self.hw_points {
            h.points = v;
        }
        if let Some(v) = self.hw_include_zero {
            h.include_zero = v;
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct ThresholdArgs {
    /// Compute the classical threshold (P_e limit exactly zero).
    #[arg(long)]
    pub classical: Option<bool>,
    /// Target error probabilities for η-thresholds, comma separated; give
    /// the flag without values to disable them.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub eta: Option<Vec<f64>>,
    /// Compute the functional threshold.
    #[arg(long)]
    pub functional: Option<bool>,
}

impl ThresholdArgs {
    fn apply(&self, t: &mut ThresholdSet) {
        overlay!(t, self; classical, eta, functional);
    }
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub de: DeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub hw: HwArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdSweepArgs {
    #[command(flatten)]
    pub de: DeArgs,
    /// Channel scale factors, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub mus: Option<Vec<f64>>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub hw: HwArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Decode this alist code instead of a generated graph.
    #[arg(long)]
    pub alist: Option<String>,
    /// Variable-node degree.
    #[arg(long)]
    pub dv: Option<usize>,
    /// Check-node degree.
    #[arg(long)]
    pub dc: Option<usize>,
    /// Length of the generated code.
    #[arg(long)]
    pub n: Option<usize>,
    /// Minimum girth of the generated code.
    #[arg(long)]
    pub girth: Option<usize>,
    /// Seed of the generated code.
    #[arg(long)]
    pub graph_seed: Option<u64>,
    /// Decoder variant.
    #[arg(long, value_enum)]
    pub variant: Option<DecoderVariant>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub q_tilde: Option<u32>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, value_enum)]
    pub repr: Option<Repr>,
    #[arg(long, value_enum)]
    pub adder: Option<Adder>,
    #[arg(long)]
    pub p_a: Option<f64>,
    #[arg(long)]
    pub p_c: Option<f64>,
    #[arg(long)]
    pub p_x: Option<f64>,
    /// Self-correction unit flip probability.
    #[arg(long)]
    pub p_scu: Option<f64>,
    /// Decoding iterations per frame.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop at the first noiseless syndrome check that passes.
    #[arg(long)]
    pub early_stopping: Option<bool>,
    /// Hard decision on a zero a-posteriori value.
    #[arg(long, value_enum)]
    pub tie_break: Option<Tie>,
    #[arg(long, value_enum)]
    pub channel: Option<Channel>,
    /// Channel points, comma separated.
    #[arg(long, alias = "p0", value_delimiter = ',')]
    pub chi: Option<Vec<f64>>,
    /// Simulate exactly this many frames per point.
    #[arg(long, conflicts_with_all = ["frame_errors", "max_frames"])]
    pub frames: Option<u64>,
    /// Stop a point after this many frame errors.
    #[arg(long)]
    pub frame_errors: Option<u64>,
    /// Frame budget per point when stopping on frame errors.
    #[arg(long)]
    pub max_frames: Option<u64>,
    /// Campaign seed, or `auto` to draw one and record it.
    #[arg(long)]
    pub seed: Option<SeedArg>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Variable-node degree.
    #[arg(long)]
    pub dv: Option<usize>,
    /// Check-node degree.
    #[arg(long)]
    pub dc: Option<usize>,
    /// Code length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Raise the girth to at least this value by degree-preserving swaps.
    #[arg(long)]
    pub girth: Option<usize>,
    /// Construction seed, or `auto`.
    #[arg(long)]
    pub seed: Option<SeedArg>,
}

fn config(cli: &Cli) -> Result<ConfigFile> {
    match &cli.config {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn resolve_de(cfg: &ConfigFile, name: &str, args: &DeArgs) -> Result<DeParams> {
    let mut p: DeParams = cfg.params(name)?;
    args.apply(&mut p);
    Ok(p)
}

fn resolve_simulate(cfg: &ConfigFile, a: &SimulateArgs) -> Result<SimulateParams> {
    let mut p: SimulateParams = cfg.params("simulate")?;
    if a.alist.is_some() {
        p.graph.alist = a.alist.clone();
    }
    overlay!(p.graph, a; dv, dc, n, graph_seed);
    if a.girth.is_some() {
        p.graph.girth = a.girth;
    }
    overlay!(p, a; variant, q, q_tilde, mu, repr, adder, p_a, p_c, p_x, p_scu, max_iters, early_stopping,
        tie_break, channel, chi);
    if let Some(frames) = a.frames {
        p.stop = Stop::Frames { frames };
    } else if a.frame_errors.is_some() || a.max_frames.is_some() {
        let (t0, m0) = match p.stop {
            Stop::FrameErrors { target, max_frames } => (target, max_frames),
            Stop::Frames { .. } => match Stop::default() {
                Stop::FrameErrors { target, max_frames } => (target, max_frames),
                Stop::Frames { frames } => (0, frames),
            },
        };
        p.stop = Stop::FrameErrors { target: a.frame_errors.unwrap_or(t0), max_frames: a.max_frames.unwrap_or(m0) };
    }
    if let Some(s) = a.seed {
        p.seed = Some(s.resolve());
    }
    Ok(p)
}

fn resolve_generate(cfg: &ConfigFile, a: &GenerateArgs) -> Result<GenerateParams> {
    let mut p: GenerateParams = cfg.params("alist-generate")?;
    overlay!(p, a; dv, dc, n);
    if a.girth.is_some() {
        p.girth = a.girth;
    }
    if let Some(s) = a.seed {
        p.seed = Some(s.resolve());
    }
    Ok(p)
}

/// Execute a command given by name and resolved parameters.
fn execute(command: &str, params: &serde_json::Value) -> Result<(Output, Option<u64>)> {
    fn p<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Result<T> {
        Ok(serde_json::from_value(v.clone())?)
    }
    Ok(match command {
        "de-trace" => (commands::de_trace(&p(params)?)?, None),
        "pmf-dump" => (commands::pmf_dump(&p(params)?)?, None),
        "region" => (commands::region(&p(params)?)?, None),
        "threshold-sweep" => (commands::threshold_sweep(&p(params)?)?, None),
        "simulate" => {
            let sp: SimulateParams = p(params)?;
            (commands::simulate(&sp)?, sp.seed)
        }
        "alist-generate" => {
            let gp: GenerateParams = p(params)?;
            (commands::alist_generate(&gp)?, gp.seed)
        }
        other => bail!("unknown command `{other}` in manifest"),
    })
}

fn run_and_write(out: &Path, command: &str, params: serde_json::Value) -> Result<String> {
    let (output, seed) = execute(command, &params)?;
    output.artifacts.write(out, command, &params, seed)?;
    Ok(output.summary)
}

/// Parse `argv` and run. Returns the text printed on success.
pub fn run(argv: impl IntoIterator<Item = std::ffi::OsString>) -> Result<String> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => return Ok(e.to_string()),
        Err(e) => {
            let msg = e.to_string();
            bail!("{}", msg.trim_start_matches("error: ").trim_end());
        }
    };
    let cfg = config(&cli)?;
    let (name, params) = match &cli.command {
        Command::DeTrace(a) => ("de-trace", serde_json::to_value(resolve_de(&cfg, "de-trace", &a.de)?)?),
        Command::PmfDump(a) => {
            let mut p: PmfDumpParams = cfg.params("pmf-dump")?;
            a.de.apply(&mut p.de);
            if let Some(at) = &a.at {
                p.at = at.clone();
            }
            ("pmf-dump", serde_json::to_value(p)?)
        }
        Command::Region(a) => {
            let mut p: RegionParams = cfg.params("region")?;
            a.de.apply(&mut p.de);
            a.grid.apply(&mut p.grid, p.de.channel);
            a.hw.apply(&mut p.hw);
            a.thresholds.apply(&mut p.thresholds);
            ("region", serde_json::to_value(p)?)
        }
        Command::ThresholdSweep(a) => {
            let mut p: ThresholdSweepParams = cfg.params("threshold-sweep")?;
            a.de.apply(&mut p.de);
            if let Some(m) = &a.mus {
                p.mus = m.clone();
            }
            a.grid.apply(&mut p.grid, p.de.channel);
            a.hw.apply(&mut p.hw);
            a.thresholds.apply(&mut p.thresholds);
            ("threshold-sweep", serde_json::to_value(p)?)
        }
        Command::Simulate(a) => {
            let p = resolve_simulate(&cfg, a)?;
            p.seed()?;
            ("simulate", serde_json::to_value(p)?)
        }
        Command::Alist(AlistCommand::Inspect { file }) => {
            let g = graphio::read_alist(file)?;
            return Ok(serde_json::to_string_pretty(&graphio::summarize(&g))?);
        }
        Command::Alist(AlistCommand::Generate(a)) => {
            let p = resolve_generate(&cfg, a)?;
            if p.seed.is_none() {
                bail!("a seed is required: pass --seed <u64> or --seed auto");
            }
            ("alist-generate", serde_json::to_value(p)?)
        }
        Command::Rerun { manifest } => {
            let m = read_manifest(manifest)?;
            let (output, _) = with_jobs(cli.jobs, || execute(&m.command, &m.params))??;
            let mut mismatches = Vec::new();
            for f in &m.outputs {
                match output.artifacts.get(&f.path) {
                    Some(b) if sha256_hex(b) == f.sha256 => {}
                    _ => mismatches.push(f.path.clone()),
                }
            }
            output.artifacts.write(&cli.out, &m.command, &m.params, m.seed)?;
            if !mismatches.is_empty() {
                bail!("outputs differ from the manifest: {}", mismatches.join(", "));
            }
            return Ok(format!("{} outputs reproduced byte-identically into {}", m.outputs.len(), cli.out.display()));
        }
    };
    let summary = with_jobs(cli.jobs, || run_and_write(&cli.out, name, params))?
        .with_context(|| format!("{name} failed"))?;
    Ok(format!("{summary}\noutputs written to {}", cli.out.display()))
}
