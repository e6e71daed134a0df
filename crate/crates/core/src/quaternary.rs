//! Quaternary BP (Q-BP) and Q-BPGD for depolarizing noise.
//!
//! The graph has one check per row of `H1` (Z type) followed by one per row of
//! `G2` (X type). Edge messages are scalar LLRs of "commutes with the edge's
//! Pauli" versus "anticommutes"; beliefs at the qubits stay 4-ary.

use serde::{Deserialize, Serialize};

use crate::bp::{check_pass, BpConfig, TannerGraph};
use crate::css::{CssCode, DecodeOutcome, Pauli, PauliVector};
use crate::decimation::{Decimation, GdResult};
use crate::error::{Error, Result};
use crate::gf2::BitVector;

/// Per-component probability floor.
const BELIEF_FLOOR: f64 = 1e-300;

pub type QuatBelief = [f64; 4];

#[derive(Clone, Debug)]
pub struct QuatGraph {
    tanner: TannerGraph,
    z_checks: usize,
}

impl QuatGraph {
    pub fn new(code: &CssCode) -> Result<Self> {
        let stacked = code.h1().vstack(code.g2())?;
        Ok(Self {
            tanner: TannerGraph::new(&stacked),
            z_checks: code.h1().rows(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.tanner.num_vars()
    }

    pub fn num_checks(&self) -> usize {
        self.tanner.num_checks()
    }

    /// Pauli component of check `j` on each of its qubits.
    pub fn check_pauli(&self, j: usize) -> Pauli {
        if j < self.z_checks {
            Pauli::Z
        } else {
            Pauli::X
        }
    }

    pub fn tanner(&self) -> &TannerGraph {
        &self.tanner
    }

    /// Full syndrome `(s_x ‖ s_z)` of a Pauli error.
    pub fn syndrome(&self, e: &[Pauli]) -> BitVector {
        BitVector::from_bools((0..self.num_checks()).map(|j| {
            let p = self.check_pauli(j);
            self.tanner
                .check_neighbors(j)
                .iter()
                .fold(false, |acc, &i| acc ^ !e[i].commutes_with(p))
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QGdConfig {
    /// `bp.max_iter` is the per-round iteration count `T`.
    pub bp: BpConfig,
    /// `None` means the block length.
    pub max_rounds: Option<usize>,
    /// Residual probability of a decimated prior.
    pub epsilon: f64,
}

impl Default for QGdConfig {
    fn default() -> Self {
        Self {
            bp: BpConfig {
                max_iter: 10,
                ..BpConfig::default()
            },
            max_rounds: None,
            epsilon: 1e-10,
        }
    }
}

impl QGdConfig {
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
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return Err(Error::config("epsilon must lie in (0, 1/4)"));
        }
        Ok(())
    }
}

/// `(1 − p, p/3, p/3, p/3)`.
pub fn depolarizing_prior(p: f64) -> Result<QuatBelief> {
    if !(p > 0.0 && p < 0.75) {
        return Err(Error::InvalidProbability {
            value: p,
            range: "(0, 3/4)",
        });
    }
    Ok([1.0 - p, p / 3.0, p / 3.0, p / 3.0])
}

/// Prior concentrated on `symbol` with `epsilon` on every other symbol.
pub fn concentrated_prior(symbol: Pauli, epsilon: f64) -> QuatBelief {
    let mut b = [epsilon; 4];
    b[symbol.index()] = 1.0 - 3.0 * epsilon;
    b
}

/// Index of the largest entry; ties go to the lower symbol.
fn argmax(b: &QuatBelief) -> usize {
    (1..4).fold(0, |best, j| if b[j] > b[best] { j } else { best })
}

#[derive(Clone, Debug)]
pub struct QbpDecoder<'g> {
    graph: &'g QuatGraph,
    cfg: BpConfig,
    syndrome: Vec<bool>,
    log_priors: Vec<QuatBelief>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    beliefs: Vec<QuatBelief>,
    iterations: usize,
    scratch: Vec<f64>,
}

impl<'g> QbpDecoder<'g> {
    pub fn new(graph: &'g QuatGraph, syndrome: &BitVector, priors: &[QuatBelief], cfg: BpConfig) -> Result<Self> {
        cfg.validate()?;
        if syndrome.len() != graph.num_checks() {
            return Err(Error::dims("full syndrome length", graph.num_checks(), syndrome.len()));
        }
        if priors.len() != graph.num_qubits() {
            return Err(Error::dims("prior count", graph.num_qubits(), priors.len()));
        }
        let edges = graph.tanner.num_edges();
        let mut dec = Self {
            graph,
            cfg,
            syndrome: syndrome.iter().collect(),
            log_priors: vec![[0.0; 4]; priors.len()],
            v2c: vec![0.0; edges],
            c2v: vec![0.0; edges],
            beliefs: vec![[0.0; 4]; priors.len()],
            iterations: 0,
            scratch: Vec::new(),
        };
        for (i, p) in priors.iter().enumerate() {
            dec.set_prior(i, *p);
        }
        dec.variable_pass();
        Ok(dec)
    }

    pub fn beliefs(&self) -> &[QuatBelief] {
        &self.beliefs
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Takes effect from the next iteration; messages are kept.
    pub fn set_prior(&mut self, i: usize, prior: QuatBelief) {
        self.log_priors[i] = prior.map(|p| p.max(BELIEF_FLOOR).ln());
    }

    pub fn hard_decision(&self) -> Vec<Pauli> {
        self.beliefs.iter().map(|b| Pauli::from_index(argmax(b))).collect()
    }

    pub fn hard_pauli_vector(&self) -> PauliVector {
        PauliVector::from_paulis(&self.hard_decision())
    }

    pub fn satisfies_syndrome(&self) -> bool {
        let hard = self.hard_decision();
        self.graph.syndrome(&hard).iter().eq(self.syndrome.iter().copied())
    }

    /// Beliefs and variable-to-check messages from the priors and the current
    /// check-to-variable messages.
    fn variable_pass(&mut self) {
        let g = &self.graph.tanner;
        let clip = self.cfg.clip;
        for i in 0..g.num_vars() {
            // Log-likelihood of each symbol given all incoming messages;
            // a message m contributes +m/2 if the symbol commutes, -m/2 if not.
            let mut total = self.log_priors[i];
            for &e in g.var_edges(i) {
                let p = self.graph.check_pauli(g.edge_check(e));
                let half = self.c2v[e] / 2.0;
                for (q, t) in total.iter_mut().enumerate() {
                    *t += if Pauli::from_index(q).commutes_with(p) { half } else { -half };
                }
            }
            self.beliefs[i] = normalize(&total);
            for &e in g.var_edges(i) {
                let p = self.graph.check_pauli(g.edge_check(e));
                let half = self.c2v[e] / 2.0;
                let (mut comm, mut anti) = (Vec::with_capacity(2), Vec::with_capacity(2));
                for (q, t) in total.iter().enumerate() {
                    if Pauli::from_index(q).commutes_with(p) {
                        comm.push(t - half);
                    } else {
                        anti.push(t + half);
                    }
                }
                self.v2c[e] = (log_sum_exp(&comm) - log_sum_exp(&anti)).clamp(-clip, clip);
            }
        }
    }

    pub fn iterate(&mut self) {
        check_pass(
            &self.graph.tanner,
            &self.syndrome,
            &self.v2c,
            &mut self.c2v,
            self.cfg.variant,
            self.cfg.clip,
            &mut self.scratch,
        );
        self.variable_pass();
        self.iterations += 1;
    }

    pub fn run(&mut self, iterations: usize) -> bool {
        for _ in 0..iterations {
            self.iterate();
            if self.satisfies_syndrome() {
                return true;
            }
        }
        false
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn normalize(log_b: &[f64; 4]) -> QuatBelief {
    let m = log_b.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut b = log_b.map(|x| ((x - m).exp()).max(BELIEF_FLOOR));
    let s: f64 = b.iter().sum();
    for x in &mut b {
        *x /= s;
    }
    b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QbpRunResult {
    pub converged: bool,
    pub hard: PauliVector,
    pub beliefs: Vec<QuatBelief>,
    pub iterations_used: usize,
}

/// Q-BP with early stopping; the priors' hard decision is checked first.
pub fn qbp_run(graph: &QuatGraph, syndrome: &BitVector, p: f64, cfg: &BpConfig) -> Result<QbpRunResult> {
    let prior = depolarizing_prior(p)?;
    let mut dec = QbpDecoder::new(graph, syndrome, &vec![prior; graph.num_qubits()], *cfg)?;
    let converged = dec.satisfies_syndrome() || dec.run(cfg.max_iter);
    Ok(QbpRunResult {
        converged,
        hard: dec.hard_pauli_vector(),
        beliefs: dec.beliefs.clone(),
        iterations_used: dec.iterations,
    })
}

/// Q-BPGD: after each `T`-iteration round without convergence, the
/// undecimated qubit with the largest maximum belief (lowest index on ties)
/// gets a prior concentrated on its most likely symbol.
pub fn qbpgd_decode(graph: &QuatGraph, syndrome: &BitVector, p: f64, cfg: &QGdConfig) -> Result<GdResult<PauliVector>> {
    let n = graph.num_qubits();
    cfg.validate(n)?;
    let rounds = cfg.rounds(n)?;
    let prior = depolarizing_prior(p)?;
    let mut dec = QbpDecoder::new(graph, syndrome, &vec![prior; n], cfg.bp)?;
    let mut trace = Vec::new();
    if dec.satisfies_syndrome() {
        return Ok(GdResult {
            estimate: Some(dec.hard_pauli_vector()),
            rounds_used: 1,
            trace,
        });
    }
    let mut undecimated = vec![true; n];
    for round in 1..=rounds {
        if dec.run(cfg.bp.max_iter) {
            return Ok(GdResult {
                estimate: Some(dec.hard_pauli_vector()),
                rounds_used: round,
                trace,
            });
        }
        let mut best = usize::MAX;
        let mut best_rel = f64::NEG_INFINITY;
        for (i, b) in dec.beliefs().iter().enumerate() {
            let rel = b[argmax(b)];
            if undecimated[i] && rel > best_rel {
                best = i;
                best_rel = rel;
            }
        }
        let symbol = argmax(&dec.beliefs()[best]);
        dec.set_prior(best, concentrated_prior(Pauli::from_index(symbol), cfg.epsilon));
        undecimated[best] = false;
        trace.push(Decimation {
            var: best,
            value: symbol as u8,
        });
    }
    Ok(GdResult {
        estimate: None,
        rounds_used: rounds,
        trace,
    })
}

/// Classifies a Pauli decode: the residual's X part must lie in rowspace(G2)
/// and its Z part in rowspace(H1) for a degenerate success.
pub fn classify_quaternary_outcome(
    code: &CssCode,
    truth: &PauliVector,
    estimate: Option<&PauliVector>,
) -> Result<DecodeOutcome> {
    if truth.len() != code.n() {
        return Err(Error::dims("true error length", code.n(), truth.len()));
    }
    let Some(est) = estimate else {
        return Ok(DecodeOutcome::FailureNonConvergence);
    };
    if est.len() != code.n() {
        return Err(Error::dims("estimate length", code.n(), est.len()));
    }
    if code.syndrome_full(truth)? != code.syndrome_full(est)? {
        return Err(Error::SyndromeMismatch);
    }
    let r = truth.mul(est);
    Ok(if r.is_identity() {
        DecodeOutcome::SuccessExactMatch
    } else if code.is_x_stabilizer(r.x())? && code.is_z_stabilizer(r.z())? {
        DecodeOutcome::SuccessDegenerate
    } else {
        DecodeOutcome::FailureLogical
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::{bp_biases, channel_llr};
    use crate::css::{hypergraph_product, steane, validate_css};
    use crate::gf2::BitMatrix;
    use crate::oracle::exact_quaternary_marginals;
    use proptest::prelude::*;

    fn cfg(t: usize) -> BpConfig {
        BpConfig {
            max_iter: t,
            ..BpConfig::default()
        }
    }

    #[test]
    fn zero_syndrome_is_identity() {
        let code = steane();
        let g = QuatGraph::new(&code).unwrap();
        let r = qbp_run(&g, &BitVector::zeros(6), 0.1, &cfg(10)).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations_used, 0);
        assert!(r.hard.is_identity());
        let d = qbpgd_decode(&g, &BitVector::zeros(6), 0.1, &QGdConfig::default()).unwrap();
        assert_eq!(d.rounds_used, 1);
        assert!(d.estimate.unwrap().is_identity());
    }

    #[test]
    fn single_qubit_y() {
        // One Z check and one X check on a single qubit anticommute, so this
        // is not a CSS code; the graph is built directly.
        let g = QuatGraph {
            tanner: TannerGraph::new(&BitMatrix::from_dense(&[[1u8], [1]]).unwrap()),
            z_checks: 1,
        };
        let s = BitVector::parse_bits("11").unwrap();
        let prior = depolarizing_prior(0.1).unwrap();
        let mut dec = QbpDecoder::new(&g, &s, &[prior], cfg(5)).unwrap();
        assert!(!dec.satisfies_syndrome());
        assert!(dec.run(5));
        assert_eq!(dec.hard_decision(), vec![Pauli::Y]);
    }

    #[test]
    fn steane_single_x_error() {
        let code = steane();
        let g = QuatGraph::new(&code).unwrap();
        let e = PauliVector::parse("IIXIIII").unwrap();
        let s = code.syndrome_full(&e).unwrap();
        let r = qbp_run(&g, &s, 0.05, &cfg(100)).unwrap();
        // The exact posterior puts X on qubit 3, but Q-BP converges after one
        // iteration to a weight-4 solution of the same syndrome, as binary BP
        // does on this H1.
        let exact = exact_quaternary_marginals(&code, &s, 0.05).unwrap();
        assert_eq!(argmax(&exact[2]), Pauli::X.index());
        assert!(r.converged);
        assert_eq!(r.iterations_used, 1);
        assert_eq!(r.hard, PauliVector::parse("IXXIXXI").unwrap());
        assert_eq!(
            classify_quaternary_outcome(&code, &e, Some(&r.hard)).unwrap(),
            DecodeOutcome::FailureLogical
        );
    }

    #[test]
    fn steane_other_single_errors_decode_exactly() {
        let code = steane();
        let g = QuatGraph::new(&code).unwrap();
        for q in [0usize, 1, 3, 4, 5, 6] {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let mut e = PauliVector::identity(7);
                e.set(q, p);
                let s = code.syndrome_full(&e).unwrap();
                let r = qbp_run(&g, &s, 0.05, &cfg(100)).unwrap();
                assert!(r.converged, "{q} {p:?}");
                assert_eq!(r.hard, e, "{q} {p:?}");
            }
        }
    }

    #[test]
    fn default_epsilon_can_be_overridden_by_messages() {
        // One saturated message moves a symbol's log-belief by up to K = 25,
        // more than ln(1/ε) ≈ 23 at ε = 1e-10.
        let one = BitMatrix::from_dense(&[[1u8]]).unwrap();
        let code = validate_css("z1", one, BitMatrix::zeros(0, 1)).unwrap();
        let g = QuatGraph::new(&code).unwrap();
        let s = BitVector::parse_bits("1").unwrap();
        let mut dec = QbpDecoder::new(&g, &s, &[concentrated_prior(Pauli::I, 1e-10)], cfg(1)).unwrap();
        dec.iterate();
        assert_ne!(dec.hard_decision()[0], Pauli::I);
    }

    #[test]
    fn rejects_bad_input() {
        let code = steane();
        let g = QuatGraph::new(&code).unwrap();
        assert!(matches!(
            qbp_run(&g, &BitVector::zeros(3), 0.1, &cfg(5)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            qbp_run(&g, &BitVector::zeros(6), 0.8, &cfg(5)),
            Err(Error::InvalidProbability { .. })
        ));
        let bad = QGdConfig { epsilon: 0.3, ..QGdConfig::default() };
        assert!(qbpgd_decode(&g, &BitVector::zeros(6), 0.1, &bad).is_err());
    }

    #[test]
    fn classification_examples() {
        let code = steane();
        let e = PauliVector::parse("IXIIZII").unwrap();
        assert_eq!(classify_quaternary_outcome(&code, &e, Some(&e)).unwrap(), DecodeOutcome::SuccessExactMatch);
        assert_eq!(classify_quaternary_outcome(&code, &e, None).unwrap(), DecodeOutcome::FailureNonConvergence);
        let stab = PauliVector::new(code.g2().row(0), BitVector::zeros(7)).unwrap();
        assert_eq!(
            classify_quaternary_outcome(&code, &e, Some(&e.mul(&stab))).unwrap(),
            DecodeOutcome::SuccessDegenerate
        );
        // A weight-3 X logical: in ker H1 but not rowspace(G2).
        let logical = (0u32..128)
            .map(|m| BitVector::from_bools((0..7).map(|i| m >> i & 1 == 1)))
            .find(|x| x.weight() == 3 && code.syndrome_x(x).unwrap().is_zero() && !code.is_x_stabilizer(x).unwrap())
            .unwrap();
        let l = PauliVector::new(logical, BitVector::zeros(7)).unwrap();
        assert_eq!(
            classify_quaternary_outcome(&code, &e, Some(&e.mul(&l))).unwrap(),
            DecodeOutcome::FailureLogical
        );
        let other = PauliVector::parse("XIIIIII").unwrap();
        assert!(matches!(
            classify_quaternary_outcome(&code, &e, Some(&other)),
            Err(Error::SyndromeMismatch)
        ));
    }

    #[test]
    fn matches_binary_bp_on_trees() {
        // Only Z checks: commute/anticommute is X-vs-I, and the depolarizing
        // prior reduces to a bit flip with probability 2p/3.
        let h = BitMatrix::from_dense(&[
            [1u8, 1, 1, 0, 0, 0, 0],
            [0, 0, 1, 1, 1, 0, 0],
            [0, 0, 0, 0, 1, 1, 1],
        ])
        .unwrap();
        let code = validate_css("tree", h.clone(), BitMatrix::zeros(0, 7)).unwrap();
        let qg = QuatGraph::new(&code).unwrap();
        let bg = TannerGraph::new(&h);
        let p = 0.06;
        let llr = channel_llr(2.0 * p / 3.0).unwrap();
        for sm in 0u32..8 {
            let s = BitVector::from_bools((0..3).map(|j| sm >> j & 1 == 1));
            for iters in 1..5 {
                let bin = bp_biases(&bg, &s, &[llr; 7], &cfg(iters), iters).unwrap();
                let mut dec = QbpDecoder::new(&qg, &s, &[depolarizing_prior(p).unwrap(); 7], cfg(iters)).unwrap();
                for _ in 0..iters {
                    dec.iterate();
                }
                for (b, q) in bin.iter().zip(dec.beliefs()) {
                    let ratio = ((q[0] + q[3]) / (q[1] + q[2])).ln();
                    assert!((ratio - b).abs() < 1e-6, "{ratio} vs {b}");
                }
            }
        }
    }

    #[test]
    fn tree_beliefs_match_exact_posterior() {
        // Qubits 0..4 under one Z check and one X check that overlap on two
        // qubits; the factor graph is a tree only if the overlap is 1, so use
        // a chain where each pair of checks shares one qubit.
        let h1 = BitMatrix::from_dense(&[[1u8, 1, 0, 0, 0]]).unwrap();
        let g2 = BitMatrix::from_dense(&[[0u8, 0, 1, 1, 0]]).unwrap();
        let code = validate_css("chain", h1, g2).unwrap();
        let g = QuatGraph::new(&code).unwrap();
        let p = 0.1;
        for sm in 0u32..4 {
            let s = BitVector::from_bools((0..2).map(|j| sm >> j & 1 == 1));
            let mut dec = QbpDecoder::new(&g, &s, &[depolarizing_prior(p).unwrap(); 5], cfg(3)).unwrap();
            for _ in 0..3 {
                dec.iterate();
            }
            let exact = exact_quaternary_marginals(&code, &s, p).unwrap();
            for (a, b) in dec.beliefs().iter().zip(&exact) {
                for k in 0..4 {
                    assert!((a[k] - b[k]).abs() < 1e-9, "{a:?} vs {b:?}");
                }
            }
        }
    }

    fn hgp_cycle() -> CssCode {
        let c = BitMatrix::from_supports(4, &[vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]]).unwrap();
        hypergraph_product(&c, &c).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn beliefs_stay_normalized(seed in any::<u64>(), p in 0.01f64..0.3) {
            let code = hgp_cycle();
            let g = QuatGraph::new(&code).unwrap();
            let paulis: Vec<Pauli> = (0..code.n()).map(|i| Pauli::from_index((seed >> (2 * (i % 32)) & 3) as usize)).collect();
            let s = code.syndrome_full(&PauliVector::from_paulis(&paulis)).unwrap();
            let mut dec = QbpDecoder::new(&g, &s, &vec![depolarizing_prior(p).unwrap(); code.n()], cfg(10)).unwrap();
            for _ in 0..10 {
                dec.iterate();
                for b in dec.beliefs() {
                    prop_assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                    prop_assert!(b.iter().all(|x| (0.0..=1.0).contains(x)));
                }
            }
        }

        #[test]
        fn x_and_z_beliefs_agree_under_symmetry(sm in any::<u8>(), p in 0.01f64..0.3) {
            let code = steane();
            let g = QuatGraph::new(&code).unwrap();
            let sigma = BitVector::from_bools((0..3).map(|j| sm >> j & 1 == 1));
            let s = sigma.concat(&sigma);
            let mut dec = QbpDecoder::new(&g, &s, &[depolarizing_prior(p).unwrap(); 7], cfg(10)).unwrap();
            for _ in 0..10 {
                dec.iterate();
                for b in dec.beliefs() {
                    prop_assert!((b[1] - b[3]).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn qbpgd_postconditions(seed in any::<u64>(), p in 0.02f64..0.15) {
            let code = hgp_cycle();
            let n = code.n();
            let g = QuatGraph::new(&code).unwrap();
            let paulis: Vec<Pauli> = (0..n)
                .map(|i| {
                    let r = seed.rotate_left(i as u32 * 7) % 16;
                    if r < 12 { Pauli::I } else { Pauli::from_index((r - 12) as usize % 3 + 1) }
                })
                .collect();
            let truth = PauliVector::from_paulis(&paulis);
            let s = code.syndrome_full(&truth).unwrap();
            let r = qbpgd_decode(&g, &s, p, &QGdConfig::default()).unwrap();
            prop_assert!(r.trace_is_consistent(n));
            if let Some(est) = &r.estimate {
                prop_assert_eq!(code.syndrome_full(est).unwrap(), s.clone());
            }
            classify_quaternary_outcome(&code, &truth, r.estimate.as_ref()).unwrap();

            // A pinned symbol survives once ln(1/ε) exceeds the largest
            // possible sum of incoming messages on a qubit.
            let strong = QGdConfig { epsilon: 1e-200, ..QGdConfig::default() };
            let r = qbpgd_decode(&g, &s, p, &strong).unwrap();
            if let Some(est) = &r.estimate {
                for d in &r.trace {
                    prop_assert_eq!(est.get(d.var).index(), d.value as usize);
                }
            }
        }
    }
}
