//! BP guided decimation (BPGD) and its randomized variant (BPGD-rd).
//!
//! Each round runs `T` BP iterations on warm messages. If the hard decision
//! does not satisfy the syndrome, one undecimated variable is pinned by
//! replacing its prior with `±llr_max`, and the next round starts.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bp::{channel_llr, BpConfig, BpDecoder, TannerGraph};
use crate::css::{CssCode, DecodeOutcome};
use crate::error::{Error, Result};
use crate::gf2::BitVector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    /// Per-round BP settings; `bp.max_iter` is the iteration count `T`.
    pub bp: BpConfig,
    /// Round limit `R`; `None` means the block length.
    pub max_rounds: Option<usize>,
    /// Magnitude of a decimated prior.
    pub llr_max: f64,
    /// Reliability gap `γ′` for BPGD-rd.
    pub gamma_gap: f64,
    /// Seed of the BPGD-rd selection stream.
    pub seed: u64,
}

impl Default for GdConfig {
    fn default() -> Self {
        Self {
            bp: BpConfig {
                max_iter: 10,
                ..BpConfig::default()
            },
            max_rounds: None,
            llr_max: 25.0,
            gamma_gap: 1.0,
            seed: 0,
        }
    }
}

impl GdConfig {
    /// Effective `R` for block length `n`, validated against `1 ≤ R ≤ n`.
    pub fn rounds(&self, n: usize) -> Result<usize> {
        let r = self.max_rounds.unwrap_or(n);
        if r == 0 || r > n {
            return Err(Error::config(format!("round limit R = {r} must satisfy 1 <= R <= n = {n}")));
        }
        Ok(r)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.bp.validate()?;
        self.rounds(n)?;
        if !(self.llr_max > 0.0) {
            return Err(Error::config("llr_max must be positive"));
        }
        if !(self.gamma_gap >= 0.0) {
            return Err(Error::config("gamma' must be non-negative"));
        }
        Ok(())
    }
}

/// One decimation step: variable `var` pinned to symbol `value` (a bit for
/// binary decoders, a Pauli index for quaternary ones).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decimation {
    pub var: usize,
    pub value: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GdResult<E> {
    /// `None` on non-convergence.
    pub estimate: Option<E>,
    pub rounds_used: usize,
    pub trace: Vec<Decimation>,
}

impl<E> GdResult<E> {
    pub fn converged(&self) -> bool {
        self.estimate.is_some()
    }

    /// Checks the trace invariants: no variable decimated twice, at most `R`
    /// decimations, and exactly `rounds_used − 1` of them on convergence.
    pub fn trace_is_consistent(&self, max_rounds: usize) -> bool {
        let mut seen = std::collections::HashSet::new();
        let distinct = self.trace.iter().all(|d| seen.insert(d.var));
        let len_ok = if self.converged() {
            self.trace.len() + 1 == self.rounds_used
        } else {
            self.trace.len() == self.rounds_used
        };
        distinct && len_ok && self.rounds_used <= max_rounds && self.trace.len() <= max_rounds
    }
}

impl GdResult<BitVector> {
    /// Whether a convergent estimate reproduces `syndrome` on `graph`.
    pub fn estimate_matches(&self, graph: &TannerGraph, syndrome: &BitVector) -> bool {
        self.estimate.as_ref().is_none_or(|e| graph.syndrome(e) == *syndrome)
    }
}

fn guided_decimation(
    graph: &TannerGraph,
    syndrome: &BitVector,
    p_x: f64,
    cfg: &GdConfig,
    mut select: impl FnMut(&[f64], &[bool]) -> usize,
) -> Result<GdResult<BitVector>> {
    let n = graph.num_vars();
    cfg.validate(n)?;
    let rounds = cfg.rounds(n)?;
    let llr = channel_llr(p_x)?;
    let mut dec = BpDecoder::new(graph, syndrome, &vec![llr; n], cfg.bp)?;
    let mut trace = Vec::new();
    if dec.satisfies_syndrome() {
        return Ok(GdResult {
            estimate: Some(dec.hard_decision()),
            rounds_used: 1,
            trace,
        });
    }
    let mut undecimated = vec![true; n];
    for round in 1..=rounds {
        if dec.run(cfg.bp.max_iter) {
            return Ok(GdResult {
                estimate: Some(dec.hard_decision()),
                rounds_used: round,
                trace,
            });
        }
        let biases = dec.biases();
        let v = select(&biases, &undecimated);
        debug_assert!(undecimated[v]);
        let bias = biases[v];
        let (prior, bit) = if bias > 0.0 { (cfg.llr_max, 0) } else { (-cfg.llr_max, 1) };
        dec.set_prior(v, prior);
        undecimated[v] = false;
        trace.push(Decimation { var: v, value: bit });
    }
    Ok(GdResult {
        estimate: None,
        rounds_used: rounds,
        trace,
    })
}

/// BPGD: decimates the most reliable undecimated variable each
/// round, ties broken by lowest index.
pub fn bpgd_decode(graph: &TannerGraph, syndrome: &BitVector, p_x: f64, cfg: &GdConfig) -> Result<GdResult<BitVector>> {
    guided_decimation(graph, syndrome, p_x, cfg, |biases, undecimated| {
        let mut best = usize::MAX;
        let mut best_rel = f64::NEG_INFINITY;
        for (i, b) in biases.iter().enumerate() {
            if undecimated[i] && b.abs() > best_rel {
                best = i;
                best_rel = b.abs();
            }
        }
        best
    })
}

/// BPGD-rd: decimates a uniformly random variable among those whose
/// reliability is within `γ′` of the most reliable one.
pub fn bpgd_rd_decode(graph: &TannerGraph, syndrome: &BitVector, p_x: f64, cfg: &GdConfig) -> Result<GdResult<BitVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gap = cfg.gamma_gap;
    let mut pool = Vec::new();
    guided_decimation(graph, syndrome, p_x, cfg, |biases, undecimated| {
        let gamma_max = biases
            .iter()
            .zip(undecimated)
            .filter(|(_, &u)| u)
            .fold(f64::NEG_INFINITY, |a, (b, _)| a.max(b.abs()));
        pool.clear();
        pool.extend((0..biases.len()).filter(|&i| undecimated[i] && biases[i].abs() >= gamma_max - gap));
        pool[rng.random_range(0..pool.len())]
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyEntry {
    pub estimate: BitVector,
    pub frequency: usize,
    pub weight: usize,
    /// Hamming distance to the true error, i.e. the residual weight.
    pub distance: usize,
    pub class: DecodeOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub runs: usize,
    pub converged: usize,
    /// Distinct convergent estimates, most frequent first.
    pub entries: Vec<DegeneracyEntry>,
    /// Distinct estimates whose residual is a stabilizer (including zero).
    pub stabilizer_residuals: usize,
    pub logical_residuals: usize,
}

impl DegeneracyReport {
    pub fn convergence_fraction(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.converged as f64 / self.runs as f64
        }
    }
}

/// Decodes the syndrome of `truth` with BPGD-rd `runs` times, using seeds
/// `cfg.seed, cfg.seed + 1, …`, and tallies the distinct convergent estimates.
pub fn degeneracy_experiment(
    code: &CssCode,
    truth: &BitVector,
    runs: usize,
    p_x: f64,
    cfg: &GdConfig,
) -> Result<DegeneracyReport> {
    let graph = TannerGraph::new(code.h1());
    let syndrome = code.syndrome_x(truth)?;
    cfg.validate(code.n())?;
    let results: Vec<GdResult<BitVector>> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let run_cfg = GdConfig {
                seed: cfg.seed.wrapping_add(i as u64),
                ..*cfg
            };
            bpgd_rd_decode(&graph, &syndrome, p_x, &run_cfg)
        })
        .collect::<Result<_>>()?;

    let mut counts: HashMap<BitVector, usize> = HashMap::new();
    let mut converged = 0;
    for r in results {
        if let Some(est) = r.estimate {
            converged += 1;
            *counts.entry(est).or_default() += 1;
        }
    }
    let mut entries = counts
        .into_iter()
        .map(|(estimate, frequency)| {
            let class = code.classify_x_outcome(truth, Some(&estimate))?;
            Ok(DegeneracyEntry {
                weight: estimate.weight(),
                distance: estimate.hamming_distance(truth),
                estimate,
                frequency,
                class,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.estimate.cmp(&b.estimate)));
    let logical_residuals = entries
        .iter()
        .filter(|e| e.class == DecodeOutcome::FailureLogical)
        .count();
    Ok(DegeneracyReport {
        runs,
        converged,
        stabilizer_residuals: entries.len() - logical_residuals,
        logical_residuals,
        entries,
    })
}
