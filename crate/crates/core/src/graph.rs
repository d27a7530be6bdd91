//! Tanner graphs, the alist text format and random regular graphs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::arith::Sign;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Alist { line: usize, msg: String },
    #[error("N*dv = {edges_v} is not divisible by dc = {dc}")]
    Divisibility { edges_v: usize, dc: usize },
    #[error("degrees must be at least 1 (dv={dv}, dc={dc})")]
    InvalidDegrees { dv: usize, dc: usize },
    #[error("dv = {dv} exceeds the number of checks {m}")]
    TooFewChecks { dv: usize, m: usize },
    #[error("no simple graph found after {0} attempts")]
    ConstructionFailed(usize),
    #[error("word length {got} does not match code length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("inconsistent adjacency: {0}")]
    Inconsistent(String),
}

fn alist_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Alist { line, msg: msg.into() }
}

/// Bipartite graph between `n` variable nodes and `m` check nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n: usize,
    m: usize,
    var_adj: Vec<Vec<usize>>,
    chk_adj: Vec<Vec<usize>>,
}

impl TannerGraph {
    /// Build from per-check variable lists; variable lists follow.
    pub fn from_check_lists(n: usize, chk_adj: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let m = chk_adj.len();
        let mut var_adj = vec![Vec::new(); n];
        for (c, vars) in chk_adj.iter().enumerate() {
            for &v in vars {
                if v >= n {
                    return Err(GraphError::Inconsistent(format!("check {c} lists variable {v} >= N = {n}")));
                }
                if var_adj[v].contains(&c) {
                    return Err(GraphError::Inconsistent(format!("parallel edge between variable {v} and check {c}")));
                }
                var_adj[v].push(c);
            }
        }
        Ok(Self { n, m, var_adj, chk_adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> usize {
        self.chk_adj.iter().map(Vec::len).sum()
    }

    /// Checks adjacent to variable `v`.
    pub fn var_neighbors(&self, v: usize) -> &[usize] {
        &self.var_adj[v]
    }

    /// Variables adjacent to check `c`.
    pub fn chk_neighbors(&self, c: usize) -> &[usize] {
        &self.chk_adj[c]
    }

    pub fn var_degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.var_adj.iter().map(Vec::len)
    }

    pub fn chk_degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.chk_adj.iter().map(Vec::len)
    }

    /// `Some((dv, dc))` when every degree is the same on each side.
    pub fn regular_degrees(&self) -> Option<(usize, usize)> {
        let dv = self.var_adj.first()?.len();
        let dc = self.chk_adj.first()?.len();
        (self.var_degrees().all(|d| d == dv) && self.chk_degrees().all(|d| d == dc)).then_some((dv, dc))
    }

    /// Dense parity-check matrix, one row per check.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut h = vec![vec![0u8; self.n]; self.m];
        for (c, vars) in self.chk_adj.iter().enumerate() {
            for &v in vars {
                h[c][v] = 1;
            }
        }
        h
    }

    /// Length of the shortest cycle, or `None` for a forest.
    pub fn girth(&self) -> Option<usize> {
        // BFS from every variable node over the bipartite graph; nodes are
        // numbered variables first, then checks.
        let total = self.n + self.m;
        let neighbors = |u: usize| -> &[usize] {
            if u < self.n {
                &self.var_adj[u]
            } else {
                &self.chk_adj[u - self.n]
            }
        };
        let offset = |u: usize, w: usize| if u < self.n { w + self.n } else { w };
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        let mut queue = Vec::with_capacity(total);
        for root in 0..self.n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            queue.clear();
            dist[root] = 0;
            parent[root] = usize::MAX;
            queue.push(root);
            let mut head = 0;
            while head < queue.len() {
                let u = queue[head];
                head += 1;
                if best.is_some_and(|b| 2 * dist[u] >= b) {
                    break;
                }
                for &w in neighbors(u) {
                    let w = offset(u, w);
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push(w);
                    } else if parent[u] != w {
                        let cycle = dist[u] + dist[w] + 1;
                        best = Some(best.map_or(cycle, |b| b.min(cycle)));
                    }
                }
            }
        }
        best
    }
}

/// Regular `(dv, dc)` ensemble of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub dv: usize,
    pub dc: usize,
    pub n: usize,
}

impl EnsembleSpec {
    pub fn new(dv: usize, dc: usize, n: usize) -> Result<Self, GraphError> {
        if dv == 0 || dc == 0 {
            return Err(GraphError::InvalidDegrees { dv, dc });
        }
        if (n * dv) % dc != 0 {
            return Err(GraphError::Divisibility { edges_v: n * dv, dc });
        }
        let spec = Self { dv, dc, n };
        if dv > spec.m() {
            return Err(GraphError::TooFewChecks { dv, m: spec.m() });
        }
        Ok(spec)
    }

    pub fn m(&self) -> usize {
        self.n * self.dv / self.dc
    }
}

/// Configuration-model graph without parallel edges.
///
/// Check sockets are shuffled against variable sockets; every parallel edge
/// is repaired by swapping its check end with a random other edge when the
/// swap creates no new parallel edge. A pairing that cannot be repaired
/// within a bounded number of swaps is discarded and redrawn, up to
/// `max_attempts` times. No girth conditioning is attempted.
pub fn random_regular_graph<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    rng: &mut R,
    max_attempts: usize,
) -> Result<TannerGraph, GraphError> {
    let EnsembleSpec { dv, dc, n } = *spec;
    let m = spec.m();
    let e = n * dv;
    let edge_var: Vec<usize> = (0..e).map(|i| i / dv).collect();
    let mut edge_chk: Vec<usize> = (0..e).map(|i| i / dc).collect();
    'attempt: for _ in 0..max_attempts.max(1) {
        edge_chk.shuffle(rng);
        let has = |edge_chk: &[usize], v: usize, c: usize, skip: usize| {
            (v * dv..(v + 1) * dv).any(|i| i != skip && edge_chk[i] == c)
        };
        let budget = 100 * e;
        let mut swaps = 0;
        let mut i = 0;
        while i < e {
            let v = edge_var[i];
            if !has(&edge_chk, v, edge_chk[i], i) {
                i += 1;
                continue;
            }
            loop {
                swaps += 1;
                if swaps > budget {
                    continue 'attempt;
                }
                let j = rng.random_range(0..e);
                let w = edge_var[j];
                if w == v {
                    continue;
                }
                let (ci, cj) = (edge_chk[i], edge_chk[j]);
                if !has(&edge_chk, v, cj, i) && !has(&edge_chk, w, ci, j) {
                    edge_chk.swap(i, j);
                    break;
                }
            }
            // Swapping may have touched an earlier variable; rescan it.
            i = 0;
        }
        let mut chk_adj = vec![Vec::with_capacity(dc); m];
        for (i, &c) in edge_chk.iter().enumerate() {
            chk_adj[c].push(edge_var[i]);
        }
        chk_adj.iter_mut().for_each(|vars| vars.sort_unstable());
        return TannerGraph::from_check_lists(n, chk_adj);
    }
    Err(GraphError::ConstructionFailed(max_attempts))
}

/// Raise the girth to at least `girth` by edge swaps, keeping all degrees.
///
/// An edge on a cycle shorter than `girth` has its check end swapped with
/// that of a random other edge; the swap is kept only if neither new edge
/// lies on a short cycle or duplicates an existing edge. A new short cycle
/// would have to run through a new edge, so each kept swap strictly lowers
/// the number of short cycles. Gives up with `ConstructionFailed` after
/// `max_swaps` rejected tries.
pub fn condition_girth<R: Rng + ?Sized>(
    graph: &TannerGraph,
    girth: usize,
    rng: &mut R,
    max_swaps: usize,
) -> Result<TannerGraph, GraphError> {
    let mut var = graph.var_adj.clone();
    let mut chk = graph.chk_adj.clone();
    let mut edges: Vec<(usize, usize)> =
        chk.iter().enumerate().flat_map(|(c, vs)| vs.iter().map(move |&v| (v, c))).collect();
    if edges.len() < 2 || girth <= 4 {
        return Ok(graph.clone());
    }
    let mut short = ShortCycleProbe::new(graph.n, graph.m, girth);
    let relink = |var: &mut [Vec<usize>], chk: &mut [Vec<usize>], v: usize, from: usize, to: usize| {
        let k = var[v].iter().position(|&x| x == from).expect("edge present");
        var[v][k] = to;
        let k = chk[from].iter().position(|&x| x == v).expect("edge present");
        chk[from].swap_remove(k);
        chk[to].push(v);
    };
    let mut rejected = 0;
    let mut i = 0;
    while i < edges.len() {
        let (v, c) = edges[i];
        if !short.on_short_cycle(&var, &chk, v, c) {
            i += 1;
            continue;
        }
        loop {
            if rejected >= max_swaps {
                return Err(GraphError::ConstructionFailed(max_swaps));
            }
            let j = rng.random_range(0..edges.len());
            let (w, d) = edges[j];
            if w == v || d == c || var[v].contains(&d) || var[w].contains(&c) {
                rejected += 1;
                continue;
            }
            relink(&mut var, &mut chk, v, c, d);
            relink(&mut var, &mut chk, w, d, c);
            if short.on_short_cycle(&var, &chk, v, d) || short.on_short_cycle(&var, &chk, w, c) {
                relink(&mut var, &mut chk, w, c, d);
                relink(&mut var, &mut chk, v, d, c);
                rejected += 1;
                continue;
            }
            edges[i] = (v, d);
            edges[j] = (w, c);
            break;
        }
        // Edge j moved, possibly to an index already passed.
        i = 0;
    }
    chk.iter_mut().for_each(|vs| vs.sort_unstable());
    TannerGraph::from_check_lists(graph.n, chk)
}

/// Depth-limited BFS with reusable visit stamps.
struct ShortCycleProbe {
    var_seen: Vec<u32>,
    chk_seen: Vec<u32>,
    stamp: u32,
    girth: usize,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl ShortCycleProbe {
    fn new(n: usize, m: usize, girth: usize) -> Self {
        Self { var_seen: vec![0; n], chk_seen: vec![0; m], stamp: 0, girth, frontier: Vec::new(), next: Vec::new() }
    }

    /// Whether edge `(v, c)` lies on a cycle shorter than the target, i.e.
    /// `c` is reachable from `v` in at most `girth - 3` hops avoiding it.
    fn on_short_cycle(&mut self, var: &[Vec<usize>], chk: &[Vec<usize>], v: usize, c: usize) -> bool {
        self.stamp += 1;
        let stamp = self.stamp;
        self.var_seen[v] = stamp;
        self.frontier.clear();
        self.frontier.push(v);
        let max_hops = self.girth - 3;
        // Odd hops land on checks, even hops on variables.
        for hop in 1..=max_hops {
            self.next.clear();
            for &x in &self.frontier {
                if hop % 2 == 1 {
                    for &d in &var[x] {
                        if hop == 1 && d == c {
                            continue;
                        }
                        if d == c {
                            return true;
                        }
                        if self.chk_seen[d] != stamp {
                            self.chk_seen[d] = stamp;
                            self.next.push(d);
                        }
                    }
                } else {
                    for &w in &chk[x] {
                        if self.var_seen[w] != stamp {
                            self.var_seen[w] = stamp;
                            self.next.push(w);
                        }
                    }
                }
            }
            core::mem::swap(&mut self.frontier, &mut self.next);
        }
        false
    }
}

/// `true` iff every check sees an even number of `-1` signs.
pub fn syndrome_ok(graph: &TannerGraph, x_hat: &[Sign]) -> Result<bool, GraphError> {
    if x_hat.len() != graph.n {
        return Err(GraphError::LengthMismatch { expected: graph.n, got: x_hat.len() });
    }
    Ok(graph
        .chk_adj
        .iter()
        .all(|vars| vars.iter().fold(Sign::Plus, |s, &v| s.xor(x_hat[v])) == Sign::Plus))
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| line.split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        let last_line = text.lines().count().max(1);
        Self { items, pos: 0, last_line }
    }

    fn remaining(&self) -> usize {
        self.items.len() - self.pos
    }

    fn next(&mut self, what: &str) -> Result<(usize, usize), GraphError> {
        let Some(&(line, tok)) = self.items.get(self.pos) else {
            return Err(alist_err(self.last_line, format!("unexpected end of file while reading {what}")));
        };
        self.pos += 1;
        tok.parse::<usize>()
            .map(|v| (line, v))
            .map_err(|_| alist_err(line, format!("expected a non-negative integer for {what}, found `{tok}`")))
    }
}

/// Parse an alist file. Both the padded dialect (every adjacency row has
/// exactly the maximum degree, filled with zeros) and the unpadded one are
/// accepted; which one is in use is decided by the number of tokens left
/// after the degree lists.
pub fn parse_alist(text: &str) -> Result<TannerGraph, GraphError> {
    let mut tok = Tokens::new(text);
    let (hline, n) = tok.next("N")?;
    let (_, m) = tok.next("M")?;
    if n == 0 || m == 0 {
        return Err(alist_err(hline, "N and M must be positive"));
    }
    let (dline, max_dv) = tok.next("max variable degree")?;
    let (_, max_dc) = tok.next("max check degree")?;
    let mut dv = Vec::with_capacity(n);
    for i in 0..n {
        let (line, d) = tok.next("variable degree")?;
        if d > max_dv || d > m {
            return Err(alist_err(line, format!("variable {} has degree {d} above the maximum {max_dv}", i + 1)));
        }
        dv.push(d);
    }
    let mut dc = Vec::with_capacity(m);
    for i in 0..m {
        let (line, d) = tok.next("check degree")?;
        if d > max_dc || d > n {
            return Err(alist_err(line, format!("check {} has degree {d} above the maximum {max_dc}", i + 1)));
        }
        dc.push(d);
    }
    if dv.iter().max() != Some(&max_dv) || dc.iter().max() != Some(&max_dc) {
        return Err(alist_err(dline, "maximum degrees do not match the degree lists"));
    }
    let sum_v: usize = dv.iter().sum();
    let sum_c: usize = dc.iter().sum();
    if sum_v != sum_c {
        return Err(alist_err(dline, format!("variable degrees sum to {sum_v} but check degrees to {sum_c}")));
    }
    let padded = match tok.remaining() {
        r if r == n * max_dv + m * max_dc => true,
        r if r == sum_v + sum_c => false,
        r => {
            return Err(alist_err(
                tok.last_line,
                format!(
                    "found {r} adjacency entries; expected {} (padded) or {} (unpadded)",
                    n * max_dv + m * max_dc,
                    sum_v + sum_c
                ),
            ))
        }
    };

    let mut read_rows = |count: usize,
                         degs: &[usize],
                         width: usize,
                         bound: usize,
                         kind: &str,
                         other: &str|
     -> Result<Vec<Vec<(usize, usize)>>, GraphError> {
        let mut rows = Vec::with_capacity(count);
        for (i, &d) in degs.iter().enumerate() {
            let entries = if padded { width } else { d };
            let mut row = Vec::with_capacity(d);
            for k in 0..entries {
                let (line, idx) = tok.next(kind)?;
                if k >= d {
                    if idx != 0 {
                        return Err(alist_err(
                            line,
                            format!("{kind} {} has degree {d} but lists extra {other} {idx}", i + 1),
                        ));
                    }
                    continue;
                }
                if idx == 0 || idx > bound {
                    return Err(alist_err(
                        line,
                        format!("{kind} {} lists {other} {idx}, outside 1..={bound}", i + 1),
                    ));
                }
                if row.iter().any(|&(_, j)| j == idx - 1) {
                    return Err(alist_err(line, format!("{kind} {} lists {other} {idx} twice", i + 1)));
                }
                row.push((line, idx - 1));
            }
            rows.push(row);
        }
        Ok(rows)
    };
    let var_rows = read_rows(n, &dv, max_dv, m, "variable", "check")?;
    let chk_rows = read_rows(m, &dc, max_dc, n, "check", "variable")?;

    let chk_adj: Vec<Vec<usize>> = chk_rows.iter().map(|r| r.iter().map(|&(_, v)| v).collect()).collect();
    for (v, row) in var_rows.iter().enumerate() {
        for &(line, c) in row {
            if !chk_adj[c].contains(&v) {
                return Err(alist_err(
                    line,
                    format!("variable {} lists check {} but that check does not list it", v + 1, c + 1),
                ));
            }
        }
    }
    // Degrees agree and every variable entry is mirrored, so the check lists
    // cannot hold anything extra.
    let graph = TannerGraph::from_check_lists(n, chk_adj)?;
    let mut var_adj = Vec::with_capacity(n);
    for row in var_rows {
        var_adj.push(row.into_iter().map(|(_, c)| c).collect());
    }
    Ok(TannerGraph { var_adj, ..graph })
}

/// Serialize in the padded alist dialect.
pub fn to_alist(graph: &TannerGraph) -> String {
    let max_dv = graph.var_degrees().max().unwrap_or(0);
    let max_dc = graph.chk_degrees().max().unwrap_or(0);
    let mut out = String::new();
    let join = |xs: &mut dyn Iterator<Item = usize>| {
        let v: Vec<String> = xs.map(|x| format!("{x}")).collect();
        v.join(" ")
    };
    let _ = writeln!(out, "{} {}", graph.n, graph.m);
    let _ = writeln!(out, "{max_dv} {max_dc}");
    let _ = writeln!(out, "{}", join(&mut graph.var_degrees()));
    let _ = writeln!(out, "{}", join(&mut graph.chk_degrees()));
    for (adj, width) in [(&graph.var_adj, max_dv), (&graph.chk_adj, max_dc)] {
        for row in adj.iter() {
            let mut cells = row.iter().map(|&x| x + 1).chain(core::iter::repeat(0)).take(width);
            let _ = writeln!(out, "{}", join(&mut cells));
        }
    }
    out
}
