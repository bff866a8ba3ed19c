//! Text formats: edge lists, DSL matrices, JSON run results and CSV traces.

use std::fs;
use std::io::Write;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::apps::{DslChannel, DslData, Network};
use crate::error::{IpldError, Result};
use crate::path::{Certificate, Trace};

fn io_err(path: &Path, source: std::io::Error) -> IpldError {
    IpldError::Io { path: path.display().to_string(), source }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Parses whitespace-separated `u v` lines. Lines starting with `%` or `#`
/// and blank lines are skipped; indices are 1-based when the smallest index
/// is 1 and 0-based otherwise. Extra columns (weights) are ignored.
pub fn parse_edge_list_str(text: &str) -> Result<Network> {
    let mut raw = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut next = || -> Result<usize> {
            let tok = it.next().ok_or_else(|| IpldError::Parse { line: no + 1, msg: format!("expected two node ids in {line:?}") })?;
            tok.parse().map_err(|_| IpldError::Parse { line: no + 1, msg: format!("bad node id {tok:?}") })
        };
        let u = next()?;
        let v = next()?;
        if u == v {
            warn!("line {}: dropping self-loop at node {u}", no + 1);
            continue;
        }
        raw.push((u, v));
    }
    let Some(min) = raw.iter().map(|&(u, v)| u.min(v)).min() else {
        return Network::new(0, []);
    };
    let shift = usize::from(min >= 1);
    let n = raw.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0) + 1 - shift;
    Network::new(n, raw.into_iter().map(|(u, v)| (u - shift, v - shift)))
}

pub fn parse_edge_list(path: &Path) -> Result<Network> {
    parse_edge_list_str(&read(path)?)
}

/// Number stream with line positions for error reporting.
struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim_start().starts_with('#'))
            .flat_map(|(no, l)| l.split_whitespace().map(move |t| (no + 1, t)))
            .collect();
        Self { items, pos: 0 }
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).or(self.items.last()).map_or(1, |x| x.0)
    }

    fn next<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let Some(&(line, tok)) = self.items.get(self.pos) else {
            return Err(IpldError::Parse { line: self.line(), msg: format!("unexpected end of input, expected {what}") });
        };
        self.pos += 1;
        tok.parse().map_err(|_| IpldError::Parse { line, msg: format!("bad {what}: {tok:?}") })
    }

    fn vec(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        (0..n).map(|_| self.next(what)).collect()
    }
}

/// Reads DSL data: a header `m M`, then for each of the `M` channels the
/// vectors `a`, `c`, `g` (m numbers each) and `H` (m·m numbers, row-major),
/// then the budget `b` (m numbers) and the per-channel cap `L`. Lines
/// starting with `#` are comments.
pub fn parse_dsl_str(text: &str) -> Result<DslData> {
    let mut tk = Tokens::new(text);
    let users: usize = tk.next("user count m")?;
    let n_ch: usize = tk.next("channel count M")?;
    let mut channels = Vec::with_capacity(n_ch);
    for i in 0..n_ch {
        let a = tk.vec(users, &format!("a of channel {}", i + 1))?;
        let c = tk.vec(users, &format!("c of channel {}", i + 1))?;
        let g = tk.vec(users, &format!("g of channel {}", i + 1))?;
        let h = tk.vec(users * users, &format!("H of channel {}", i + 1))?;
        channels.push(DslChannel { a, c, g, h });
    }
    let b = tk.vec(users, "budget b")?;
    let cap = tk.next("cap L")?;
    if tk.pos < tk.items.len() {
        return Err(IpldError::Parse { line: tk.line(), msg: "trailing data after cap L".into() });
    }
    let data = DslData { users, channels, b, cap };
    data.validate()?;
    Ok(data)
}

pub fn parse_dsl(path: &Path) -> Result<DslData> {
    parse_dsl_str(&read(path)?)
}

pub fn format_dsl(data: &DslData) -> String {
    fn line(v: &[f64]) -> String {
        v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ")
    }
    let m = data.users;
    let mut s = format!("{} {}\n", m, data.channels.len());
    for (i, ch) in data.channels.iter().enumerate() {
        s.push_str(&format!("# channel {}\n", i + 1));
        for v in [&ch.a, &ch.c, &ch.g] {
            s.push_str(&line(v));
            s.push('\n');
        }
        for row in ch.h.chunks(m) {
            s.push_str(&line(row));
            s.push('\n');
        }
    }
    s.push_str("# budget b and cap L\n");
    s.push_str(&line(&data.b));
    s.push('\n');
    s.push_str(&format!("{:.16e}\n", data.cap));
    s
}

/// Echo of the settings that produced a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: String,
    pub source: String,
    pub seed: u64,
    pub t0: f64,
    pub beta: f64,
    pub eps: f64,
    pub delta: f64,
    pub eps_master: f64,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub solver: String,
    pub converged: bool,
    /// Absent when the solver stopped without an iterate to report.
    pub objective: Option<f64>,
    pub feasibility: Option<f64>,
    pub iterations: usize,
    pub wall_ms: f64,
    pub certificate: Option<Certificate>,
    /// Outcome of the neighborhood checks when diagnostics were recorded.
    pub diagnostics_passed: Option<bool>,
    /// CP step sizes and operator norm estimate.
    pub cp_steps: Option<CpSteps>,
    pub config: RunConfig,
    pub trace: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpSteps {
    pub tau: f64,
    pub sigma: f64,
    pub k_norm: f64,
}

impl RunResult {
    /// JSON value with wall-clock fields removed, for determinism checks.
    pub fn without_timing(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        v.as_object_mut().map(|o| o.remove("wall_ms"));
        v
    }
}

pub fn write_results(results: &[RunResult], path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(results).map_err(|e| IpldError::Serde(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<RunResult>> {
    serde_json::from_str(&read(path)?).map_err(|e| IpldError::Serde(format!("{}: {e}", path.display())))
}

pub const TRACE_HEADER: &str = "k,t,lambda,slave_resid,inner_iters,primal_opt,dual_resid,wall_ms";

/// One CSV row per main-loop iteration; `dual_resid` is the larger of the two
/// dual residual norms.
pub fn write_trace(trace: &Trace, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_trace_to(trace, &mut f).map_err(|e| io_err(path, e))
}

pub fn write_trace_to(trace: &Trace, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.records {
        let c = &r.certificate;
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
            r.k,
            r.t,
            r.lambda,
            r.slave_resid,
            r.inner_iters,
            c.primal_opt,
            c.dual_resid_e.max(c.dual_resid_r),
            r.wall_ms
        )?;
    }
    Ok(())
}
