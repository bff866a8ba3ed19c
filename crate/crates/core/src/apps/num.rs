//! Network utility maximization with fixed shortest-path routing.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::network::{shortest_paths, Network};
use super::rng::{stream, STREAM_DEMAND, STREAM_LOWER, STREAM_OFFSET, STREAM_RATE, STREAM_UPPER};
use crate::error::{IpldError, Result};
use crate::linalg::psd_rank;
use crate::model::{Block, BlockCoupling, BlockSmooth, CompositeTerm, CoordinateBarrier, ProblemInstance};

pub const NUM_RATE_CAP: f64 = 1.0;
pub const NUM_PENALTY: f64 = 0.01;

/// One flow variable `x_ij` with its routing path (row indices of `A`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub source: usize,
    pub target: usize,
    pub rows: Vec<usize>,
}

/// Data of a NUM instance, restricted to flows with positive weight and to
/// edges that carry at least one flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumData {
    pub n_nodes: usize,
    /// `d_ij`, zero on the diagonal.
    pub d: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub r: Vec<Vec<f64>>,
    pub flows: Vec<Flow>,
    /// Network edge index of each constraint row.
    pub edges: Vec<usize>,
    pub b_bar: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rate_cap: f64,
    pub rho: f64,
}

impl NumData {
    pub fn n_vars(&self) -> usize {
        self.flows.len()
    }

    pub fn n_rows(&self) -> usize {
        self.edges.len()
    }

    /// Flow indices grouped by source node, in flow order.
    pub fn flows_by_source(&self) -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); self.n_nodes];
        for (k, f) in self.flows.iter().enumerate() {
            g[f.source].push(k);
        }
        g
    }

    /// Objective of the original maximization, `Σ ln(dᵢᵀxᵢ + μᵢ) − (ρ/2)‖xᵢ − rᵢ‖²`,
    /// for flows in flow order.
    pub fn utility(&self, x: &[f64]) -> f64 {
        let mut s = vec![0.0; self.n_nodes];
        let mut pen = 0.0;
        for (k, f) in self.flows.iter().enumerate() {
            s[f.source] += self.d[f.source][f.target] * x[k];
            let dv = x[k] - self.r[f.source][f.target];
            pen += dv * dv;
        }
        let groups = self.flows_by_source();
        let logs: f64 = (0..self.n_nodes).filter(|&i| !groups[i].is_empty()).map(|i| (s[i] + self.mu[i]).ln()).sum();
        logs - 0.5 * self.rho * pen
    }
}

/// Draws NUM data on a network following the benchmark recipe: `r, d, μ`
/// uniform on (0,1), `L_e = (1 − U(0,½)) b̄_e`, `U_e = (1 + U(0,½)) b̄_e` with
/// `b̄ = A r`, `M = 1`, `ρ = 0.01`.
pub fn generate_num(network: &Network, seed: u64) -> Result<NumData> {
    generate_num_with(network, seed, None)
}

/// As [`generate_num`], but when `destinations` is set each source keeps only
/// that many destinations, those with the largest weights `d_ij`. The random
/// draws are identical to the full model.
pub fn generate_num_with(network: &Network, seed: u64, destinations: Option<usize>) -> Result<NumData> {
    let n = network.n_nodes();
    let mut rr = stream(seed, STREAM_RATE);
    let mut rd = stream(seed, STREAM_DEMAND);
    let mut rm = stream(seed, STREAM_OFFSET);
    let mut rl = stream(seed, STREAM_LOWER);
    let mut ru = stream(seed, STREAM_UPPER);
    // full N×N order so the draws do not depend on routing or pruning
    let r: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rr.random::<f64>()).collect()).collect();
    let mut d: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rd.random::<f64>()).collect()).collect();
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    let mu: Vec<f64> = (0..n).map(|_| rm.random::<f64>()).collect();
    let lower_draw: Vec<f64> = (0..network.edges().len()).map(|_| rl.random_range(0.0..0.5)).collect();
    let upper_draw: Vec<f64> = (0..network.edges().len()).map(|_| ru.random_range(0.0..0.5)).collect();

    let dist: Vec<Vec<usize>> = (0..n).map(|i| network.bfs(i)).collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && d[i][j] > 0.0 && dist[i][j] != usize::MAX)
        .collect();
    let pairs = match destinations {
        Some(k) => keep_heaviest(pairs, &d, k),
        None => pairs,
    };
    let routing = shortest_paths(network, &pairs)?;

    let mut b_edge = vec![0.0; network.edges().len()];
    let mut used = vec![false; network.edges().len()];
    for &(i, j) in &pairs {
        for &e in routing.path(i, j).expect("routed") {
            b_edge[e] += r[i][j];
            used[e] = true;
        }
    }
    let dropped = used.iter().filter(|u| !**u).count();
    if dropped > 0 {
        warn!("dropping {dropped} edges that carry no flow");
    }
    let edges: Vec<usize> = (0..used.len()).filter(|&e| used[e]).collect();
    let mut row_of = vec![usize::MAX; used.len()];
    for (row, &e) in edges.iter().enumerate() {
        row_of[e] = row;
    }
    let flows = pairs
        .iter()
        .map(|&(i, j)| {
            let mut rows: Vec<usize> = routing.path(i, j).expect("routed").iter().map(|&e| row_of[e]).collect();
            rows.sort_unstable();
            Flow { source: i, target: j, rows }
        })
        .collect();
    let b_bar: Vec<f64> = edges.iter().map(|&e| b_edge[e]).collect();
    let lower = edges.iter().map(|&e| (1.0 - lower_draw[e]) * b_edge[e]).collect();
    let upper = edges.iter().map(|&e| (1.0 + upper_draw[e]) * b_edge[e]).collect();
    Ok(NumData { n_nodes: n, d, mu, r, flows, edges, b_bar, lower, upper, rate_cap: NUM_RATE_CAP, rho: NUM_PENALTY })
}

fn keep_heaviest(pairs: Vec<(usize, usize)>, d: &[Vec<f64>], k: usize) -> Vec<(usize, usize)> {
    let mut kept = Vec::with_capacity(pairs.len());
    for chunk in pairs.chunk_by(|a, b| a.0 == b.0) {
        let mut order: Vec<&(usize, usize)> = chunk.iter().collect();
        order.sort_by(|a, b| d[b.0][b.1].total_cmp(&d[a.0][a.1]).then(a.1.cmp(&b.1)));
        let mut top: Vec<(usize, usize)> = order.into_iter().take(k).copied().collect();
        top.sort_unstable();
        kept.extend(top);
    }
    kept
}

/// `g(x) = −ln(dᵀx + μ) + (ρ/2)‖x − r‖²`.
#[derive(Debug, Clone)]
pub struct LogUtility {
    pub d: DVector<f64>,
    pub mu: f64,
    pub r: DVector<f64>,
    pub rho: f64,
}

impl LogUtility {
    fn arg(&self, x: &DVector<f64>) -> f64 {
        self.d.dot(x) + self.mu
    }
}

impl BlockSmooth for LogUtility {
    fn dim(&self) -> usize {
        self.d.len()
    }

    fn in_domain(&self, x: &DVector<f64>) -> bool {
        self.arg(x) > 0.0
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let s = self.arg(x);
        if s <= 0.0 {
            return f64::INFINITY;
        }
        -s.ln() + 0.5 * self.rho * (x - &self.r).norm_squared()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let s = self.arg(x);
        &self.d * (-1.0 / s) + (x - &self.r) * self.rho
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let s = self.arg(x);
        let mut h = &self.d * self.d.transpose() / (s * s);
        for j in 0..h.nrows() {
            h[(j, j)] += self.rho;
        }
        h
    }
}

/// Maps NUM data onto the separable form: one block per source node, box
/// barriers on `[0, M]`, interval composite `[L, U]` on edge loads.
pub fn build_num_instance(data: &NumData) -> Result<ProblemInstance> {
    let n_rows = data.n_rows();
    if n_rows == 0 {
        return Err(IpldError::InvalidArgument("NUM instance has no loaded edges".into()));
    }
    let mut blocks = Vec::new();
    for (i, group) in data.flows_by_source().iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        let p = group.len();
        let d = DVector::from_iterator(p, group.iter().map(|&k| data.d[i][data.flows[k].target]));
        let r = DVector::from_iterator(p, group.iter().map(|&k| data.r[i][data.flows[k].target]));
        let triplets: Vec<(usize, usize, f64)> = group
            .iter()
            .enumerate()
            .flat_map(|(c, &k)| data.flows[k].rows.iter().map(move |&row| (row, c, 1.0)))
            .collect();
        blocks.push(Block::new(
            Box::new(LogUtility { d, mu: data.mu[i], r, rho: data.rho }),
            CoordinateBarrier::uniform_box(p, 0.0, data.rate_cap)?,
            BlockCoupling::from_triplets(n_rows, p, &triplets)?,
        )?);
    }
    let inst = ProblemInstance::new(n_rows, blocks, CompositeTerm::interval(data.lower.clone(), data.upper.clone())?)?;
    if n_rows <= RANK_CHECK_LIMIT {
        let a = inst.dense_a();
        let rank = psd_rank(&(&a * a.transpose()), 1e-10);
        if rank < n_rows {
            return Err(IpldError::RankDeficient { rank, rows: n_rows });
        }
    }
    Ok(inst)
}

const RANK_CHECK_LIMIT: usize = 1000;

/// Synthetic NUM instance data on a connected random graph with `n_nodes`
/// nodes and `n_nodes / 2` extra edges.
pub fn synthetic_num(n_nodes: usize, seed: u64) -> Result<NumData> {
    synthetic_num_with(n_nodes, seed, None)
}

pub fn synthetic_num_with(n_nodes: usize, seed: u64, destinations: Option<usize>) -> Result<NumData> {
    let net = Network::synthetic(n_nodes, n_nodes / 2, seed)?;
    generate_num_with(&net, seed, destinations)
}
