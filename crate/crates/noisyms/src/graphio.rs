//! alist files and graph construction for simulations.

use std::path::Path;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use noisyms_core::graph::{condition_girth, parse_alist, random_regular_graph, to_alist, EnsembleSpec};
use noisyms_core::TannerGraph;

use crate::output::sha256_hex;
use crate::params::GraphSource;

pub fn read_alist(path: &Path) -> Result<TannerGraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading alist {}", path.display()))?;
    parse_alist(&text).with_context(|| format!("parsing alist {}", path.display()))
}

/// Random `(dv, dc)`-regular graph, optionally conditioned to a minimum
/// girth. The same arguments always give the same graph.
pub fn generate(
    dv: usize,
    dc: usize,
    n: usize,
    girth: Option<usize>,
    seed: u64,
    attempts: usize,
    max_swaps: usize,
) -> Result<TannerGraph> {
    let spec = EnsembleSpec::new(dv, dc, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_regular_graph(&spec, &mut rng, attempts)?;
    match girth {
        Some(target) if target > 4 => Ok(condition_girth(&g, target, &mut rng, max_swaps)
            .with_context(|| format!("raising the girth to {target}"))?),
        _ => Ok(g),
    }
}

pub fn load(src: &GraphSource) -> Result<TannerGraph> {
    match &src.alist {
        Some(path) => read_alist(Path::new(path)),
        None => generate(src.dv, src.dc, src.n, src.girth, src.graph_seed, 100, 10_000_000),
    }
}

/// Structural summary printed by `alist inspect`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub n: usize,
    pub m: usize,
    pub edges: usize,
    /// `(dv, dc)` when the graph is regular.
    pub regular: Option<(usize, usize)>,
    /// `(degree, count)` pairs.
    pub var_degrees: Vec<(usize, usize)>,
    pub chk_degrees: Vec<(usize, usize)>,
    pub girth: Option<usize>,
    pub alist_sha256: String,
}

fn histogram(degrees: impl Iterator<Item = usize>) -> Vec<(usize, usize)> {
    let mut h = std::collections::BTreeMap::new();
    for d in degrees {
        *h.entry(d).or_insert(0) += 1;
    }
    h.into_iter().collect()
}

pub fn summarize(g: &TannerGraph) -> GraphSummary {
    GraphSummary {
        n: g.n(),
        m: g.m(),
        edges: g.edges(),
        regular: g.regular_degrees(),
        var_degrees: histogram(g.var_degrees()),
        chk_degrees: histogram(g.chk_degrees()),
        girth: g.girth(),
        alist_sha256: sha256_hex(to_alist(g).as_bytes()),
    }
}
