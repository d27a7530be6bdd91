//! Subcommand bodies. Each takes fully resolved parameters and returns its
//! output files in memory together with a one-screen summary.

use anyhow::{ensure, Result};
use serde::Serialize;

use noisyms_core::de::{de_lower_bound, de_run, DeState};
use noisyms_core::graph::to_alist;
use noisyms_core::threshold::{
    classical_threshold, eta_threshold, functional_threshold, region_point, RegionClass, ThresholdKind,
    ThresholdResult,
};
use noisyms_core::{DeTrace, TraceClass};

use crate::graphio;
use crate::output::Artifacts;
use crate::params::{
    ChannelGrid, DeParams, GenerateParams, HwGrid, PmfDumpParams, RegionParams, SimulateParams, ThresholdSet,
    ThresholdSweepParams,
};
use crate::runner::{par_map, point_seed, simulate_point};

pub struct Output {
    pub artifacts: Artifacts,
    pub summary: String,
}

fn class_name(c: &TraceClass) -> &'static str {
    match c {
        TraceClass::Converged { .. } => "converged",
        TraceClass::Periodic { .. } => "periodic",
        TraceClass::MaxedOut => "maxed-out",
    }
}

fn region_name(c: RegionClass) -> &'static str {
    match c {
        RegionClass::Useful => "useful",
        RegionClass::NotUseful => "not-useful",
        RegionClass::NonConvergent => "non-convergent",
    }
}

#[derive(Debug, Serialize)]
struct TraceRow {
    iteration: usize,
    pe: f64,
}

#[derive(Debug, Serialize)]
pub struct TraceSummary {
    pub class: &'static str,
    pub region: &'static str,
    pub pe0: f64,
    pub pe_inf: Option<f64>,
    pub period: Option<usize>,
    pub inf: Option<f64>,
    pub sup: Option<f64>,
    pub iterations: usize,
    pub final_pe: f64,
    pub lower_bound: f64,
    pub plateau_level: Option<f64>,
    pub plateau_drop_at: Option<usize>,
}

pub fn trace_summary(p: &DeParams, trace: &DeTrace) -> Result<TraceSummary> {
    let cfg = p.de_config()?;
    let point = region_point(&cfg, trace);
    let (period, inf, sup) = match trace.class {
        TraceClass::Periodic { period, inf, sup } => (period, Some(inf), Some(sup)),
        _ => (None, None, None),
    };
    Ok(TraceSummary {
        class: class_name(&trace.class),
        region: region_name(point.class),
        pe0: trace.pe[0],
        pe_inf: trace.limit(),
        period,
        inf,
        sup,
        iterations: trace.iterations(),
        final_pe: *trace.pe.last().unwrap(),
        lower_bound: de_lower_bound(&cfg.noise, cfg.q_tilde_bound()),
        plateau_level: point.plateau.map(|pl| pl.level),
        plateau_drop_at: point.plateau.map(|pl| pl.drop_at),
    })
}

/// `P_e^(ℓ)` sequence of one configuration.
pub fn de_trace(p: &DeParams) -> Result<Output> {
    let trace = de_run(&p.de_config()?)?;
    let rows: Vec<TraceRow> = trace.pe.iter().enumerate().map(|(iteration, &pe)| TraceRow { iteration, pe }).collect();
    let s = trace_summary(p, &trace)?;
    let summary = format!(
        "{} after {} iterations ({}): P_e(0) = {:.4e}, final P_e = {:.4e}, lower bound = {:.4e}",
        s.class, s.iterations, s.region, s.pe0, s.final_pe, s.lower_bound
    );
    let mut artifacts = Artifacts::new();
    artifacts.add_csv("de_trace.csv", &rows)?;
    artifacts.add_json("de_trace.json", &s)?;
    Ok(Output { artifacts, summary })
}

#[derive(Debug, Serialize)]
struct PmfRow {
    iteration: usize,
    message: &'static str,
    z: i32,
    p: f64,
}

/// Snapshots of `A`, `B` and `C̃` at the requested iterations.
pub fn pmf_dump(p: &PmfDumpParams) -> Result<Output> {
    ensure!(!p.at.is_empty(), "no iterations requested");
    let mut at = p.at.clone();
    at.sort_unstable();
    at.dedup();
    let mut state = DeState::new(&p.de.de_config()?)?;
    let mut rows = Vec::new();
    for &target in &at {
        while state.iteration() < target {
            state.step();
        }
        let l = state.iteration();
        let mut push = |name: &'static str, pmf: &noisyms_core::Pmf| {
            rows.extend(pmf.iter().map(|(z, prob)| PmfRow { iteration: l, message: name, z, p: prob }));
        };
        if l > 0 {
            push("b", state.b());
        }
        push("a", state.a());
        push("c_tilde", state.c_tilde());
    }
    let mut artifacts = Artifacts::new();
    artifacts.add_csv("pmf_dump.csv", &rows)?;
    let summary = format!("{} PMF rows for iterations {:?}", rows.len(), at);
    Ok(Output { artifacts, summary })
}

#[derive(Debug, Serialize)]
struct RegionRow {
    hw_param: &'static str,
    hw_value: f64,
    chi: f64,
    class: &'static str,
    trace: &'static str,
    pe0: f64,
    pe_inf: Option<f64>,
    lower_bound: f64,
    iterations: usize,
    period: Option<usize>,
    plateau_level: Option<f64>,
    plateau_drop_at: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRow {
    pub mu: f64,
    pub hw_param: &'static str,
    pub hw_value: f64,
    pub kind: &'static str,
    pub eta: Option<f64>,
    pub value: f64,
    pub bracket_lo: Option<f64>,
    pub bracket_hi: Option<f64>,
    pub admissible: Option<bool>,
}

fn threshold_row(mu: f64, hw: &HwGrid, hw_value: f64, r: &ThresholdResult) -> ThresholdRow {
    let (kind, eta) = match r.kind {
        ThresholdKind::Eta(e) => ("eta", Some(e)),
        ThresholdKind::Classical => ("classical", None),
        ThresholdKind::Functional => ("functional", None),
    };
    ThresholdRow {
        mu,
        hw_param: hw.axis.name(),
        hw_value,
        kind,
        eta,
        value: r.value,
        bracket_lo: r.bracket.map(|b| b.0),
        bracket_hi: r.bracket.map(|b| b.1),
        admissible: r.admissible,
    }
}

#[derive(Clone, Copy)]
enum Job {
    Classical,
    Eta(f64),
    Functional,
}

/// Thresholds for every `(μ, hardware value, kind)` combination, in that
/// nesting order.
pub fn threshold_rows(
    de: &DeParams,
    mus: &[f64],
    hw: &HwGrid,
    set: &ThresholdSet,
    grid: &ChannelGrid,
) -> Result<Vec<ThresholdRow>> {
    let mut kinds = Vec::new();
    if set.classical {
        kinds.push(Job::Classical);
    }
    kinds.extend(set.eta.iter().map(|&e| Job::Eta(e)));
    if set.functional {
        kinds.push(Job::Functional);
    }
    let search = grid.search(de.channel);
    let mut jobs = Vec::new();
    for &mu in mus {
        for v in hw.values()? {
            for &k in &kinds {
                jobs.push((mu, v, k));
            }
        }
    }
    par_map(&jobs, |&(mu, v, kind)| {
        let mut base = de.de_config_at(de.chi)?;
        base.mu = mu;
        hw.axis.apply(&mut base.noise, v);
        base.validate()?;
        let r = match kind {
            Job::Classical => classical_threshold(&base, &search)?,
            Job::Eta(e) => eta_threshold(&base, &search, e)?,
            Job::Functional => functional_threshold(&base, &search, &set.functional_options())?,
        };
        Ok(threshold_row(mu, hw, v, &r))
    })
}

/// Classification of every `(hardware value, channel value)` grid point,
/// plus optional thresholds per hardware value.
pub fn region(p: &RegionParams) -> Result<Output> {
    let search = p.grid.search(p.de.channel);
    let axis = p.de.channel.axis();
    let chis: Vec<f64> = search.grid_t().into_iter().map(|t| axis.from_t(t)).collect();
    let hws = p.hw.values()?;
    let points: Vec<(f64, f64)> = hws.iter().flat_map(|&h| chis.iter().map(move |&c| (h, c))).collect();
    let rows = par_map(&points, |&(h, chi)| {
        let mut cfg = p.de.de_config_at(chi)?;
        p.hw.axis.apply(&mut cfg.noise, h);
        cfg.validate()?;
        let trace = de_run(&cfg)?;
        let pt = region_point(&cfg, &trace);
        Ok(RegionRow {
            hw_param: p.hw.axis.name(),
            hw_value: h,
            chi,
            class: region_name(pt.class),
            trace: class_name(&trace.class),
            pe0: pt.pe0,
            pe_inf: pt.pe_inf,
            lower_bound: de_lower_bound(&cfg.noise, cfg.q_tilde_bound()),
            iterations: pt.iterations,
            period: match trace.class {
                TraceClass::Periodic { period, .. } => period,
                _ => None,
            },
            plateau_level: pt.plateau.map(|x| x.level),
            plateau_drop_at: pt.plateau.map(|x| x.drop_at),
        })
    })?;
    let useful = rows.iter().filter(|r| r.class == "useful").count();
    let mut artifacts = Artifacts::new();
    artifacts.add_csv("region.csv", &rows)?;
    let mut summary = format!("{} grid points, {} useful", rows.len(), useful);
    if !p.thresholds.is_empty() {
        let th = threshold_rows(&p.de, &[p.de.mu], &p.hw, &p.thresholds, &p.grid)?;
        summary.push_str(&format!(", {} thresholds", th.len()));
        artifacts.add_csv("region_thresholds.csv", &th)?;
    }
    Ok(Output { artifacts, summary })
}

pub fn threshold_sweep(p: &ThresholdSweepParams) -> Result<Output> {
    ensure!(!p.mus.is_empty(), "no channel scale factors given");
    ensure!(!p.thresholds.is_empty(), "no threshold kind selected");
    let rows = threshold_rows(&p.de, &p.mus, &p.hw, &p.thresholds, &p.grid)?;
    let summary = rows
        .iter()
        .map(|r| {
            let eta = r.eta.map(|e| format!("({e:e})")).unwrap_or_default();
            format!("mu={} {}={:e} {}{}: {:.5}", r.mu, r.hw_param, r.hw_value, r.kind, eta, r.value)
        })
        .collect::<Vec<_>>()
        .join("\n");
    let mut artifacts = Artifacts::new();
    artifacts.add_csv("thresholds.csv", &rows)?;
    Ok(Output { artifacts, summary })
}

#[derive(Debug, Serialize)]
pub struct SimRow {
    pub chi: f64,
    pub ber: f64,
    pub fer: f64,
    pub avg_iters: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub seed: u64,
}

/// Finite-length BER/FER per channel point. Points run one after another,
/// frames of a point in parallel.
pub fn simulate(p: &SimulateParams) -> Result<Output> {
    ensure!(!p.chi.is_empty(), "no channel points given");
    let seed = p.seed()?;
    let cfg = p.decoder_config()?;
    let graph = graphio::load(&p.graph)?;
    let mut rows = Vec::with_capacity(p.chi.len());
    for (k, &chi) in p.chi.iter().enumerate() {
        let s = point_seed(seed, k);
        let st = simulate_point(&graph, cfg, &p.channel.model(chi)?, p.stop.into(), s)?;
        rows.push(SimRow {
            chi,
            ber: st.ber(),
            fer: st.fer(),
            avg_iters: st.avg_iters(),
            frames: st.frames,
            bit_errors: st.bit_errors,
            frame_errors: st.frame_errors,
            seed: s,
        });
    }
    let summary = rows
        .iter()
        .map(|r| format!("chi={}: BER {:.3e}  FER {:.3e}  avg iters {:.2}  ({} frames)", r.chi, r.ber, r.fer, r.avg_iters, r.frames))
        .collect::<Vec<_>>()
        .join("\n");
    let mut artifacts = Artifacts::new();
    artifacts.add_csv("simulate.csv", &rows)?;
    artifacts.add_json("graph.json", &graphio::summarize(&graph))?;
    Ok(Output { artifacts, summary })
}

pub fn alist_generate(p: &GenerateParams) -> Result<Output> {
    let seed = p.seed.ok_or_else(|| anyhow::anyhow!("a seed is required: pass --seed <u64> or --seed auto"))?;
    let g = graphio::generate(p.dv, p.dc, p.n, p.girth, seed, p.attempts, p.max_swaps)?;
    let summary = graphio::summarize(&g);
    let text = format!(
        "generated N={} M={} graph, girth {}",
        summary.n,
        summary.m,
        summary.girth.map_or("infinite".to_string(), |g| g.to_string())
    );
    let mut artifacts = Artifacts::new();
    artifacts.add("graph.alist", to_alist(&g).into_bytes());
    Ok(Output { artifacts, summary: text })
}
