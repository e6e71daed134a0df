//! Binary syndrome belief propagation on the Tanner graph of `H1`.
//!
//! Flooding schedule. One iteration computes every check-to-variable message
//! from the current variable-to-check messages, refreshes the biases, then
//! recomputes every variable-to-check message. Variable-to-check messages and
//! biases are clipped to `[-K, K]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// Clamp for the `atanh` argument.
const ATANH_GUARD: f64 = 1.0 - 1e-15;

/// `tanh(m/2)` with a single `exp`.
#[inline]
fn half_tanh(m: f64) -> f64 {
    let e = (-m.abs()).exp();
    ((1.0 - e) / (1.0 + e)).copysign(m)
}

/// `2·atanh(t)` with a single `ln`, `t` clamped to the guard.
#[inline]
fn two_atanh(t: f64) -> f64 {
    let a = t.abs().min(ATANH_GUARD);
    ((1.0 + a) / (1.0 - a)).ln().copysign(t)
}

/// Immutable adjacency of a check matrix. Edges are numbered check-major, so
/// the edges of check `j` are `check_ptr[j]..check_ptr[j + 1]`.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    n: usize,
    m: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    edge_check: Vec<usize>,
    // Edge ids touching each variable, ascending by check index.
    var_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn new(h: &BitMatrix) -> Self {
        let (m, n) = (h.rows(), h.cols());
        let mut check_ptr = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::new();
        let mut edge_check = Vec::new();
        let mut var_edges = vec![Vec::new(); n];
        check_ptr.push(0);
        for j in 0..m {
            for i in h.row(j).iter_ones() {
                var_edges[i].push(edge_var.len());
                edge_var.push(i);
                edge_check.push(j);
            }
            check_ptr.push(edge_var.len());
        }
        Self {
            n,
            m,
            check_ptr,
            edge_var,
            edge_check,
            var_edges,
        }
    }

    /// Number of variable nodes.
    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// Number of check nodes.
    pub fn num_checks(&self) -> usize {
        self.m
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    pub fn check_edges(&self, j: usize) -> std::ops::Range<usize> {
        self.check_ptr[j]..self.check_ptr[j + 1]
    }

    pub fn var_edges(&self, i: usize) -> &[usize] {
        &self.var_edges[i]
    }

    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e]
    }

    pub fn edge_check(&self, e: usize) -> usize {
        self.edge_check[e]
    }

    /// Variables adjacent to check `j`, ascending.
    pub fn check_neighbors(&self, j: usize) -> &[usize] {
        &self.edge_var[self.check_edges(j)]
    }

    /// `H · xᵀ` using the adjacency lists.
    pub fn syndrome(&self, x: &BitVector) -> BitVector {
        BitVector::from_bools(
            (0..self.m).map(|j| self.check_neighbors(j).iter().filter(|&&i| x.get(i)).count() % 2 == 1),
        )
    }

    fn satisfies(&self, hard: &[bool], syndrome: &[bool]) -> bool {
        (0..self.m).all(|j| {
            let parity = self
                .check_neighbors(j)
                .iter()
                .fold(false, |acc, &i| acc ^ hard[i]);
            parity == syndrome[j]
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BpVariant {
    SumProduct,
    /// Normalized min-sum with scaling factor `alpha`.
    MinSum { alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    pub variant: BpVariant,
    /// Saturation bound for messages and biases.
    pub clip: f64,
    /// Maximum number of iterations.
    pub max_iter: usize,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            variant: BpVariant::SumProduct,
            clip: 25.0,
            max_iter: 100,
        }
    }
}

impl BpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip > 0.0) {
            return Err(Error::config("saturation bound K must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("iteration count T must be at least 1"));
        }
        if let BpVariant::MinSum { alpha } = self.variant {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::config("min-sum alpha must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

/// `log((1 − p)/p)`.
pub fn channel_llr(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability {
            value: p,
            range: "(0, 1)",
        });
    }
    Ok(((1.0 - p) / p).ln())
}

/// Sum-product check update `(−1)^s · 2·atanh(∏ tanh(mₖ/2))`, or the
/// normalized min-sum rule. An empty product saturates to `±clip`.
pub fn check_update(incoming: &[f64], syndrome_bit: bool, variant: BpVariant, clip: f64) -> f64 {
    let sign = if syndrome_bit { -1.0 } else { 1.0 };
    let raw = match variant {
        BpVariant::SumProduct => {
            two_atanh(incoming.iter().map(|&m| half_tanh(m)).product())
        }
        BpVariant::MinSum { alpha } => {
            if incoming.is_empty() {
                f64::INFINITY
            } else {
                let s: f64 = incoming.iter().map(|m| if *m < 0.0 { -1.0 } else { 1.0 }).product();
                let min = incoming.iter().fold(f64::INFINITY, |a, m| a.min(m.abs()));
                alpha * s * min
            }
        }
    };
    (sign * raw).clamp(-clip, clip)
}

/// Recomputes every check-to-variable message from the variable-to-check
/// messages. Shared with the quaternary decoder.
pub(crate) fn check_pass(
    g: &TannerGraph,
    syndrome: &[bool],
    v2c: &[f64],
    c2v: &mut [f64],
    variant: BpVariant,
    clip: f64,
    scratch: &mut Vec<f64>,
) {
    for j in 0..g.num_checks() {
        let edges = g.check_edges(j);
        let sign = if syndrome[j] { -1.0 } else { 1.0 };
        match variant {
            BpVariant::SumProduct => {
                // Leave-one-out products via prefix/suffix sweeps.
                let d = edges.len();
                scratch.clear();
                scratch.extend(v2c[edges.clone()].iter().map(|&m| half_tanh(m)));
                let mut prefix = 1.0;
                for k in 0..d {
                    c2v[edges.start + k] = prefix;
                    prefix *= scratch[k];
                }
                let mut suffix = 1.0;
                for k in (0..d).rev() {
                    let p = c2v[edges.start + k] * suffix;
                    suffix *= scratch[k];
                    c2v[edges.start + k] =
                        (sign * two_atanh(p)).clamp(-clip, clip);
                }
            }
            BpVariant::MinSum { alpha } => {
                let (mut min1, mut min2, mut argmin) = (f64::INFINITY, f64::INFINITY, usize::MAX);
                let mut neg = false;
                for e in edges.clone() {
                    let m = v2c[e];
                    neg ^= m < 0.0;
                    let a = m.abs();
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        argmin = e;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for e in edges.clone() {
                    let m = v2c[e];
                    let s = if neg ^ (m < 0.0) { -1.0 } else { 1.0 };
                    let mag = if e == argmin { min2 } else { min1 };
                    c2v[e] = (sign * s * alpha * mag).clamp(-clip, clip);
                }
            }
        }
    }
}

/// `prior + Σ incoming`, clipped to `[-clip, clip]`.
pub fn variable_update(prior: f64, incoming: &[f64], clip: f64) -> f64 {
    (prior + incoming.iter().sum::<f64>()).clamp(-clip, clip)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpRunResult {
    pub converged: bool,
    pub hard: BitVector,
    pub biases: Vec<f64>,
    pub iterations_used: usize,
}

/// Message state of one decode. Owns everything that changes while decoding;
/// the graph is borrowed.
///
/// Sum-product decodes keep messages as likelihood ratios `e^LLR`, which
/// needs no transcendental functions per edge. That is only done when
/// `K·(max variable degree + 2) < 700`, so any overflowed or underflowed
/// partial product ends up clamped to `e^±K` exactly as its LLR would be.
/// Everything public is reported as LLRs.
#[derive(Clone, Debug)]
pub struct BpDecoder<'g> {
    graph: &'g TannerGraph,
    cfg: BpConfig,
    ratio_domain: bool,
    syndrome: Vec<bool>,
    priors: Vec<f64>,
    // Priors in the message domain.
    prior_msgs: Vec<f64>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    biases: Vec<f64>,
    iterations: usize,
    scratch: Vec<f64>,
}

impl<'g> BpDecoder<'g> {
    pub fn new(graph: &'g TannerGraph, syndrome: &BitVector, priors: &[f64], cfg: BpConfig) -> Result<Self> {
        cfg.validate()?;
        if syndrome.len() != graph.num_checks() {
            return Err(Error::dims("syndrome length", graph.num_checks(), syndrome.len()));
        }
        if priors.len() != graph.num_vars() {
            return Err(Error::dims("prior count", graph.num_vars(), priors.len()));
        }
        let max_degree = (0..graph.num_vars()).map(|i| graph.var_edges(i).len()).max().unwrap_or(0);
        let ratio_domain =
            cfg.variant == BpVariant::SumProduct && cfg.clip * (max_degree as f64 + 2.0) < 700.0;
        let to_msg = |llr: f64| if ratio_domain { llr.exp() } else { llr };
        let v2c = (0..graph.num_edges())
            .map(|e| to_msg(priors[graph.edge_var(e)].clamp(-cfg.clip, cfg.clip)))
            .collect();
        let prior_msgs: Vec<f64> = priors.iter().map(|&p| to_msg(p)).collect();
        Ok(Self {
            graph,
            cfg,
            ratio_domain,
            syndrome: syndrome.iter().collect(),
            priors: priors.to_vec(),
            biases: prior_msgs.clone(),
            prior_msgs,
            v2c,
            c2v: vec![to_msg(0.0); graph.num_edges()],
            iterations: 0,
            scratch: Vec::new(),
        })
    }

    pub fn graph(&self) -> &'g TannerGraph {
        self.graph
    }

    fn to_llrs(&self, v: &[f64]) -> Vec<f64> {
        if self.ratio_domain {
            v.iter().map(|r| r.ln()).collect()
        } else {
            v.to_vec()
        }
    }

    /// Per-variable LLRs; before the first iteration these are the priors.
    pub fn biases(&self) -> Vec<f64> {
        if self.iterations == 0 {
            self.priors.clone()
        } else {
            self.to_llrs(&self.biases)
        }
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn v2c(&self) -> Vec<f64> {
        self.to_llrs(&self.v2c)
    }

    pub fn c2v(&self) -> Vec<f64> {
        self.to_llrs(&self.c2v)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Replaces the prior of variable `i`; takes effect from the next
    /// iteration, messages are kept.
    pub fn set_prior(&mut self, i: usize, llr: f64) {
        self.priors[i] = llr;
        self.prior_msgs[i] = if self.ratio_domain { llr.exp() } else { llr };
    }

    fn hard_bits(&self) -> Vec<bool> {
        if self.iterations == 0 {
            self.priors.iter().map(|&b| b <= 0.0).collect()
        } else {
            let zero = if self.ratio_domain { 1.0 } else { 0.0 };
            self.biases.iter().map(|&b| b <= zero).collect()
        }
    }

    /// `x̂ᵢ = 0` iff bias > 0.
    pub fn hard_decision(&self) -> BitVector {
        BitVector::from_bools(self.hard_bits())
    }

    pub fn satisfies_syndrome(&self) -> bool {
        self.graph.satisfies(&self.hard_bits(), &self.syndrome)
    }

    /// One flooding iteration.
    pub fn iterate(&mut self) {
        if self.ratio_domain {
            self.iterate_ratio();
        } else {
            self.iterate_llr();
        }
        self.iterations += 1;
    }

    fn iterate_llr(&mut self) {
        let g = self.graph;
        let clip = self.cfg.clip;
        check_pass(g, &self.syndrome, &self.v2c, &mut self.c2v, self.cfg.variant, clip, &mut self.scratch);
        for i in 0..g.num_vars() {
            let edges = g.var_edges(i);
            let total = self.prior_msgs[i] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
            self.biases[i] = total.clamp(-clip, clip);
            for &e in edges {
                self.v2c[e] = (total - self.c2v[e]).clamp(-clip, clip);
            }
        }
    }

    fn iterate_ratio(&mut self) {
        let g = self.graph;
        let clip = self.cfg.clip;
        let (lo, hi) = ((-clip).exp(), clip.exp());
        // Clamping the product to ±tanh(K/2) clamps the outgoing LLR to ±K.
        let t_max = (clip / 2.0).tanh().min(ATANH_GUARD);
        for j in 0..g.num_checks() {
            let edges = g.check_edges(j);
            let d = edges.len();
            self.scratch.clear();
            self.scratch.extend(self.v2c[edges.clone()].iter().map(|&r| (r - 1.0) / (r + 1.0)));
            let mut prefix = 1.0;
            for k in 0..d {
                self.c2v[edges.start + k] = prefix;
                prefix *= self.scratch[k];
            }
            let sign = if self.syndrome[j] { -1.0 } else { 1.0 };
            let mut suffix = 1.0;
            for k in (0..d).rev() {
                let t = (sign * self.c2v[edges.start + k] * suffix).clamp(-t_max, t_max);
                suffix *= self.scratch[k];
                self.c2v[edges.start + k] = (1.0 + t) / (1.0 - t);
            }
        }
        for i in 0..g.num_vars() {
            let edges = g.var_edges(i);
            let total = edges.iter().fold(self.prior_msgs[i], |acc, &e| acc * self.c2v[e]);
            self.biases[i] = total.clamp(lo, hi);
            for &e in edges {
                self.v2c[e] = (total / self.c2v[e]).clamp(lo, hi);
            }
        }
    }

    /// Runs up to `iterations` more iterations, stopping as soon as the hard
    /// decision satisfies the syndrome. Returns whether it does.
    pub fn run(&mut self, iterations: usize) -> bool {
        for _ in 0..iterations {
            self.iterate();
            if self.satisfies_syndrome() {
                return true;
            }
        }
        false
    }

    fn result(&self, converged: bool) -> BpRunResult {
        BpRunResult {
            converged,
            hard: self.hard_decision(),
            biases: self.biases(),
            iterations_used: self.iterations,
        }
    }
}

/// Flooding BP for at most `cfg.max_iter` iterations with early stopping.
/// The hard decision of the priors is checked before the first iteration.
pub fn bp_run(graph: &TannerGraph, syndrome: &BitVector, priors: &[f64], cfg: &BpConfig) -> Result<BpRunResult> {
    let mut dec = BpDecoder::new(graph, syndrome, priors, *cfg)?;
    let converged = dec.satisfies_syndrome() || dec.run(cfg.max_iter);
    Ok(dec.result(converged))
}

/// Exactly `iterations` flooding iterations without early stopping; returns
/// the final biases.
pub fn bp_biases(graph: &TannerGraph, syndrome: &BitVector, priors: &[f64], cfg: &BpConfig, iterations: usize) -> Result<Vec<f64>> {
    let mut dec = BpDecoder::new(graph, syndrome, priors, *cfg)?;
    for _ in 0..iterations {
        dec.iterate();
    }
    Ok(dec.biases())
}
