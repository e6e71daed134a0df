//! Noise sampling and the seeded, parallel trial runner.
//!
//! Trial `i` draws everything it needs from `trial_rng(master_seed, i)`, and
//! trials are evaluated in fixed-size batches and folded in index order, so
//! the statistics do not depend on the number of workers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bp::{bp_run, channel_llr, BpConfig, BpVariant, TannerGraph};
use crate::css::{CssCode, DecodeOutcome, Pauli, PauliVector};
use crate::decimation::{bpgd_decode, bpgd_rd_decode, GdConfig, GdResult};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::quaternary::{classify_quaternary_outcome, qbp_run, qbpgd_decode, QGdConfig, QuatGraph};

/// Trials evaluated per parallel batch.
const BATCH: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    BitFlip(f64),
    Depolarizing(f64),
}

impl NoiseModel {
    pub fn probability(self) -> f64 {
        match self {
            NoiseModel::BitFlip(p) | NoiseModel::Depolarizing(p) => p,
        }
    }

    pub fn validate(self) -> Result<()> {
        let (p, upper, range) = match self {
            NoiseModel::BitFlip(p) => (p, 1.0, "(0, 1)"),
            NoiseModel::Depolarizing(p) => (p, 0.75, "(0, 3/4)"),
        };
        if p > 0.0 && p < upper {
            Ok(())
        } else {
            Err(Error::InvalidProbability { value: p, range })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SampledError {
    Bits(BitVector),
    Pauli(PauliVector),
}

pub fn sample_bit_flips<R: Rng + ?Sized>(p_x: f64, n: usize, rng: &mut R) -> BitVector {
    BitVector::from_bools((0..n).map(|_| rng.random::<f64>() < p_x))
}

pub fn sample_depolarizing<R: Rng + ?Sized>(p: f64, n: usize, rng: &mut R) -> PauliVector {
    let paulis: Vec<Pauli> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < p {
                Pauli::from_index(rng.random_range(1..4))
            } else {
                Pauli::I
            }
        })
        .collect();
    PauliVector::from_paulis(&paulis)
}

pub fn sample_error<R: Rng + ?Sized>(model: NoiseModel, n: usize, rng: &mut R) -> SampledError {
    match model {
        NoiseModel::BitFlip(p) => SampledError::Bits(sample_bit_flips(p, n, rng)),
        NoiseModel::Depolarizing(p) => SampledError::Pauli(sample_depolarizing(p, n, rng)),
    }
}

/// Independent stream `trial_index` of the master seed.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoderKind {
    Bp,
    Bpgd,
    BpgdRd,
    Qbp,
    Qbpgd,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 5] = [
        DecoderKind::Bp,
        DecoderKind::Bpgd,
        DecoderKind::BpgdRd,
        DecoderKind::Qbp,
        DecoderKind::Qbpgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Bp => "bp",
            DecoderKind::Bpgd => "bpgd",
            DecoderKind::BpgdRd => "bpgd-rd",
            DecoderKind::Qbp => "qbp",
            DecoderKind::Qbpgd => "qbpgd",
        }
    }

    pub fn is_quaternary(self) -> bool {
        matches!(self, DecoderKind::Qbp | DecoderKind::Qbpgd)
    }

    pub fn decimates(self) -> bool {
        matches!(self, DecoderKind::Bpgd | DecoderKind::BpgdRd | DecoderKind::Qbpgd)
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DecoderKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config(format!("unknown decoder `{s}` (expected bp, bpgd, bpgd-rd, qbp or qbpgd)")))
    }
}

/// A configured decoder. `bp.max_iter` is `T` (per round for decimating
/// decoders).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderSpec {
    pub kind: DecoderKind,
    pub bp: BpConfig,
    pub max_rounds: Option<usize>,
    pub llr_max: f64,
    pub gamma_gap: f64,
    pub epsilon: f64,
}

impl DecoderSpec {
    pub fn new(kind: DecoderKind) -> Self {
        let gd = GdConfig::default();
        Self {
            kind,
            bp: gd.bp,
            max_rounds: None,
            llr_max: gd.llr_max,
            gamma_gap: gd.gamma_gap,
            epsilon: QGdConfig::default().epsilon,
        }
    }

    pub fn with_iterations(mut self, t: usize) -> Self {
        self.bp.max_iter = t;
        self
    }

    fn gd_config(&self, seed: u64) -> GdConfig {
        GdConfig {
            bp: self.bp,
            max_rounds: self.max_rounds,
            llr_max: self.llr_max,
            gamma_gap: self.gamma_gap,
            seed,
        }
    }

    fn qgd_config(&self) -> QGdConfig {
        QGdConfig {
            bp: self.bp,
            max_rounds: self.max_rounds,
            epsilon: self.epsilon,
        }
    }

    pub fn variant_label(&self) -> &'static str {
        match self.bp.variant {
            BpVariant::SumProduct => "sum-product",
            BpVariant::MinSum { .. } => "min-sum",
        }
    }

    /// Checks the decoder against the noise model and block length.
    pub fn validate(&self, model: NoiseModel, n: usize) -> Result<()> {
        model.validate()?;
        match (self.kind.is_quaternary(), model) {
            (true, NoiseModel::BitFlip(_)) => {
                return Err(Error::config(format!("decoder {} requires depolarizing noise", self.kind)))
            }
            (false, NoiseModel::Depolarizing(_)) => {
                return Err(Error::config(format!("decoder {} requires bit-flip noise", self.kind)))
            }
            _ => {}
        }
        match self.kind {
            DecoderKind::Bp | DecoderKind::Qbp => self.bp.validate(),
            DecoderKind::Bpgd | DecoderKind::BpgdRd => self.gd_config(0).validate(n),
            DecoderKind::Qbpgd => self.qgd_config().validate(n),
        }
    }
}

/// Immutable per-code decoding context shared by all trials.
#[derive(Clone, Debug)]
pub struct DecodingContext<'c> {
    code: &'c CssCode,
    x_graph: TannerGraph,
    quat_graph: Option<QuatGraph>,
}

impl<'c> DecodingContext<'c> {
    pub fn new(code: &'c CssCode, kind: DecoderKind) -> Result<Self> {
        Ok(Self {
            code,
            x_graph: TannerGraph::new(code.h1()),
            quat_graph: if kind.is_quaternary() { Some(QuatGraph::new(code)?) } else { None },
        })
    }

    pub fn code(&self) -> &CssCode {
        self.code
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub error_weight: usize,
    pub outcome: DecodeOutcome,
    /// Rounds counted toward `r_avg`: `rounds_used` on convergence, `n`
    /// otherwise. `None` for non-decimating decoders.
    pub rounds: Option<usize>,
    /// Number of violated postconditions (0, 1 or 2).
    pub violations: u32,
}

fn gd_violations<E>(r: &GdResult<E>, max_rounds: usize, matches: bool) -> u32 {
    u32::from(!r.trace_is_consistent(max_rounds)) + u32::from(r.converged() && !matches)
}

/// Runs trial `trial_index` end to end.
pub fn run_trial(
    ctx: &DecodingContext<'_>,
    model: NoiseModel,
    spec: &DecoderSpec,
    master_seed: u64,
    trial_index: u64,
) -> Result<TrialRecord> {
    let code = ctx.code;
    let n = code.n();
    let mut rng = trial_rng(master_seed, trial_index);
    let error = sample_error(model, n, &mut rng);
    // Drawn after the error so the error sequence is decoder-independent.
    let decoder_seed: u64 = rng.random();
    let p = model.probability();
    let classify_x = |truth: &BitVector, est: Option<&BitVector>| match code.classify_x_outcome(truth, est) {
        Ok(o) => (o, 0),
        Err(Error::SyndromeMismatch) => (DecodeOutcome::FailureLogical, 1),
        Err(e) => panic!("classification failed: {e}"),
    };
    let record = match (spec.kind, &error) {
        (DecoderKind::Bp, SampledError::Bits(x)) => {
            let s = code.syndrome_x(x)?;
            let llr = channel_llr(p)?;
            let r = bp_run(&ctx.x_graph, &s, &vec![llr; n], &spec.bp)?;
            let (outcome, v) = classify_x(x, r.converged.then_some(&r.hard));
            TrialRecord {
                error_weight: x.weight(),
                outcome,
                rounds: None,
                violations: v,
            }
        }
        (DecoderKind::Bpgd | DecoderKind::BpgdRd, SampledError::Bits(x)) => {
            let s = code.syndrome_x(x)?;
            let cfg = spec.gd_config(decoder_seed);
            let r = if spec.kind == DecoderKind::Bpgd {
                bpgd_decode(&ctx.x_graph, &s, p, &cfg)?
            } else {
                bpgd_rd_decode(&ctx.x_graph, &s, p, &cfg)?
            };
            let rounds_limit = cfg.rounds(n)?;
            let mut v = gd_violations(&r, rounds_limit, r.estimate_matches(&ctx.x_graph, &s));
            let (outcome, cv) = classify_x(x, r.estimate.as_ref());
            v = v.max(cv);
            TrialRecord {
                error_weight: x.weight(),
                outcome,
                rounds: Some(if r.converged() { r.rounds_used } else { n }),
                violations: v,
            }
        }
        (DecoderKind::Qbp | DecoderKind::Qbpgd, SampledError::Pauli(e)) => {
            let graph = ctx.quat_graph.as_ref().expect("context built for a quaternary decoder");
            let s = code.syndrome_full(e)?;
            let (estimate, rounds, mut v) = if spec.kind == DecoderKind::Qbp {
                let r = qbp_run(graph, &s, p, &spec.bp)?;
                (r.converged.then_some(r.hard), None, 0)
            } else {
                let cfg = spec.qgd_config();
                let r = qbpgd_decode(graph, &s, p, &cfg)?;
                let matches = r.estimate.as_ref().is_none_or(|est| code.syndrome_full(est).is_ok_and(|t| t == s));
                let v = gd_violations(&r, cfg.rounds(n)?, matches);
                let rounds = if r.converged() { r.rounds_used } else { n };
                (r.estimate, Some(rounds), v)
            };
            let outcome = match classify_quaternary_outcome(code, e, estimate.as_ref()) {
                Ok(o) => o,
                Err(Error::SyndromeMismatch) => {
                    v = v.max(1);
                    DecodeOutcome::FailureLogical
                }
                Err(err) => return Err(err),
            };
            TrialRecord {
                error_weight: e.weight(),
                outcome,
                rounds,
                violations: v,
            }
        }
        _ => unreachable!("decoder and noise model checked by DecoderSpec::validate"),
    };
    Ok(record)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub max_trials: u64,
    pub target_errors: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            max_trials: 1_000_000,
            target_errors: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub nonconvergence: u64,
    pub exact: u64,
    pub degenerate: u64,
    pub logical: u64,
}

impl OutcomeCounts {
    pub fn add(&mut self, o: DecodeOutcome) {
        match o {
            DecodeOutcome::FailureNonConvergence => self.nonconvergence += 1,
            DecodeOutcome::SuccessExactMatch => self.exact += 1,
            DecodeOutcome::SuccessDegenerate => self.degenerate += 1,
            DecodeOutcome::FailureLogical => self.logical += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.nonconvergence + self.exact + self.degenerate + self.logical
    }

    pub fn failures(&self) -> u64 {
        self.nonconvergence + self.logical
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub counts: OutcomeCounts,
    /// Sum of per-trial rounds; `None` for non-decimating decoders.
    pub rounds_total: Option<u64>,
    pub postcondition_violations: u64,
    pub wall_s: f64,
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

impl TrialStats {
    pub fn block_errors(&self) -> u64 {
        self.counts.failures()
    }

    pub fn bler(&self) -> f64 {
        ratio(self.block_errors(), self.trials)
    }

    pub fn bler_ci(&self) -> (f64, f64) {
        wilson_interval(self.block_errors(), self.trials, Z_95)
    }

    pub fn nonconv_frac(&self) -> f64 {
        ratio(self.counts.nonconvergence, self.trials)
    }

    pub fn nonconv_ci(&self) -> (f64, f64) {
        wilson_interval(self.counts.nonconvergence, self.trials, Z_95)
    }

    /// Mean decimation rounds, non-convergent trials counted as `n`.
    pub fn r_avg(&self) -> Option<f64> {
        self.rounds_total.map(|r| ratio(r, self.trials))
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Runs seeded trials until `target_errors` block errors or `max_trials`.
/// `workers = 0` uses rayon's default pool size.
pub fn run_trials(
    code: &CssCode,
    model: NoiseModel,
    spec: &DecoderSpec,
    stop: StoppingRule,
    master_seed: u64,
    workers: usize,
) -> Result<TrialStats> {
    spec.validate(model, code.n())?;
    let ctx = DecodingContext::new(code, spec.kind)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?;
    let start = Instant::now();
    let mut stats = TrialStats {
        trials: 0,
        counts: OutcomeCounts::default(),
        rounds_total: spec.kind.decimates().then_some(0),
        postcondition_violations: 0,
        wall_s: 0.0,
    };
    'outer: while stats.trials < stop.max_trials && stats.block_errors() < stop.target_errors {
        let lo = stats.trials;
        let hi = (lo + BATCH).min(stop.max_trials);
        let records: Vec<TrialRecord> = pool.install(|| {
            (lo..hi)
                .into_par_iter()
                .map(|i| run_trial(&ctx, model, spec, master_seed, i))
                .collect::<Result<_>>()
        })?;
        for r in records {
            stats.trials += 1;
            stats.counts.add(r.outcome);
            stats.postcondition_violations += u64::from(r.violations);
            if let (Some(total), Some(rounds)) = (stats.rounds_total.as_mut(), r.rounds) {
                *total += rounds as u64;
            }
            if stats.block_errors() >= stop.target_errors {
                break 'outer;
            }
        }
    }
    stats.wall_s = start.elapsed().as_secs_f64();
    Ok(stats)
}

/// One output row; the field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub code: String,
    pub decoder: String,
    pub variant: String,
    pub p: f64,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "R")]
    pub r: Option<usize>,
    pub gamma_prime: Option<f64>,
    pub seed: u64,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub bler_ci_lo: f64,
    pub bler_ci_hi: f64,
    pub nonconv_frac: f64,
    pub r_avg: Option<f64>,
    /// Left empty unless timing is requested, so rows stay reproducible.
    pub wall_s: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 16] = [
    "code",
    "decoder",
    "variant",
    "p",
    "T",
    "R",
    "gamma_prime",
    "seed",
    "trials",
    "block_errors",
    "bler",
    "bler_ci_lo",
    "bler_ci_hi",
    "nonconv_frac",
    "r_avg",
    "wall_s",
];

impl SweepRow {
    pub fn new(code: &CssCode, spec: &DecoderSpec, p: f64, seed: u64, stats: &TrialStats, timing: bool) -> Self {
        let (lo, hi) = stats.bler_ci();
        Self {
            code: code.name().to_string(),
            decoder: spec.kind.name().to_string(),
            variant: spec.variant_label().to_string(),
            p,
            t: spec.bp.max_iter,
            r: spec.kind.decimates().then(|| spec.max_rounds.unwrap_or(code.n())),
            gamma_prime: (spec.kind == DecoderKind::BpgdRd).then_some(spec.gamma_gap),
            seed,
            trials: stats.trials,
            block_errors: stats.block_errors(),
            bler: stats.bler(),
            bler_ci_lo: lo,
            bler_ci_hi: hi,
            nonconv_frac: stats.nonconv_frac(),
            r_avg: stats.r_avg(),
            wall_s: timing.then_some(stats.wall_s),
        }
    }
}
