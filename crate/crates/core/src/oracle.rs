//! Exhaustive-enumeration oracles for small codes.
//!
//! Everything here enumerates an affine solution space `x₀ + ker H1` (or all
//! `2ⁿ`/`4ⁿ` patterns) and is only meant for codes with a handful of qubits.
//! Error patterns are weighted by the i.i.d. bit-flip or depolarizing law.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::css::{CssCode, Pauli, PauliVector};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// Largest kernel dimension enumerated per syndrome.
pub const MAX_KERNEL_DIM: usize = 24;
/// Largest block length for the all-syndromes error-rate sums.
pub const MAX_RATE_N: usize = 16;
/// Largest block length for the `4ⁿ` quaternary enumeration.
pub const MAX_QUATERNARY_N: usize = 7;

fn check_p(p: f64, upper: f64, range: &'static str) -> Result<()> {
    if p > 0.0 && p < upper {
        Ok(())
    } else {
        Err(Error::InvalidProbability { value: p, range })
    }
}

/// Lexicographic order on bit strings read from position 0.
pub fn lex_cmp(a: &BitVector, b: &BitVector) -> Ordering {
    match a.xor(b).iter_ones().next() {
        None => Ordering::Equal,
        Some(i) if a.get(i) => Ordering::Greater,
        Some(_) => Ordering::Less,
    }
}

/// `log Pr(x)` under i.i.d. bit flips with probability `p`.
fn log_weight(weight: usize, n: usize, ln_p: f64, ln_q: f64) -> f64 {
    weight as f64 * ln_p + (n - weight) as f64 * ln_q
}

/// Iterates `x₀ + span(basis)` in Gray-code order.
fn for_each_affine(x0: &BitVector, basis: &BitMatrix, mut f: impl FnMut(&BitVector)) {
    let rows = basis.row_vectors();
    let mut x = x0.clone();
    f(&x);
    for k in 1u64..(1u64 << rows.len()) {
        x.xor_assign(&rows[k.trailing_zeros() as usize]);
        f(&x);
    }
}

fn affine_solutions(h1: &BitMatrix, s: &BitVector) -> Result<(BitVector, BitMatrix)> {
    let x0 = h1.solve(s)?;
    let kernel = h1.nullspace_basis();
    if kernel.rows() > MAX_KERNEL_DIM {
        return Err(Error::TooLarge {
            what: "kernel dimension",
            value: kernel.rows(),
            limit: MAX_KERNEL_DIM,
        });
    }
    Ok((x0, kernel))
}

/// Exact per-bit posterior LLRs `log P(xᵢ=0|s)/P(xᵢ=1|s)`. Bits fixed by the
/// syndrome get infinite LLRs.
pub fn exact_marginals(h1: &BitMatrix, s: &BitVector, p_x: f64) -> Result<Vec<f64>> {
    check_p(p_x, 1.0, "(0, 1)")?;
    let n = h1.cols();
    let (x0, kernel) = affine_solutions(h1, s)?;
    let (ln_p, ln_q) = (p_x.ln(), (1.0 - p_x).ln());
    // Shift by the weight-0 log mass so terms stay representable.
    let shift = log_weight(0, n, ln_p, ln_q).max(log_weight(n, n, ln_p, ln_q));
    let mut zero = vec![0.0; n];
    let mut one = vec![0.0; n];
    for_each_affine(&x0, &kernel, |x| {
        let w = (log_weight(x.weight(), n, ln_p, ln_q) - shift).exp();
        for i in 0..n {
            if x.get(i) {
                one[i] += w;
            } else {
                zero[i] += w;
            }
        }
    });
    Ok(zero.iter().zip(&one).map(|(z, o)| z.ln() - o.ln()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coset {
    /// Lexicographically smallest member.
    pub representative: BitVector,
    /// Posterior mass given the syndrome.
    pub mass: f64,
}

/// Cosets of rowspace(G2) inside `{x : H1 x = s}` with posterior masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosetTable {
    pub syndrome: BitVector,
    /// Unnormalized probability `Pr(S = s)`.
    pub syndrome_probability: f64,
    /// Sorted by representative.
    pub cosets: Vec<Coset>,
}

impl CosetTable {
    pub fn build(code: &CssCode, s: &BitVector, p_x: f64) -> Result<Self> {
        check_p(p_x, 1.0, "(0, 1)")?;
        let n = code.n();
        let (x0, kernel) = affine_solutions(code.h1(), s)?;
        let (ln_p, ln_q) = (p_x.ln(), (1.0 - p_x).ln());
        let mut groups: HashMap<BitVector, Coset> = HashMap::new();
        let mut total = 0.0;
        for_each_affine(&x0, &kernel, |x| {
            let w = log_weight(x.weight(), n, ln_p, ln_q).exp();
            total += w;
            let label = code.g2_space().reduce(x).expect("length checked by solve");
            let entry = groups.entry(label).or_insert_with(|| Coset {
                representative: x.clone(),
                mass: 0.0,
            });
            entry.mass += w;
            if lex_cmp(x, &entry.representative) == Ordering::Less {
                entry.representative = x.clone();
            }
        });
        let mut cosets: Vec<Coset> = groups
            .into_values()
            .map(|c| Coset {
                mass: c.mass / total,
                ..c
            })
            .collect();
        cosets.sort_by(|a, b| lex_cmp(&a.representative, &b.representative));
        Ok(Self {
            syndrome: s.clone(),
            syndrome_probability: total,
            cosets,
        })
    }

    /// Most probable coset; near-ties (relative 1e-12) go to the
    /// lexicographically smallest representative.
    pub fn most_probable(&self) -> &Coset {
        let max = self.cosets.iter().fold(0.0f64, |a, c| a.max(c.mass));
        self.cosets
            .iter()
            .find(|c| c.mass >= max * (1.0 - 1e-12))
            .expect("at least one coset")
    }
}

/// Degenerate maximum-likelihood decoding by exhaustive coset enumeration.
pub fn dqml_decode(code: &CssCode, s: &BitVector, p_x: f64) -> Result<BitVector> {
    Ok(CosetTable::build(code, s, p_x)?.most_probable().representative.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingRates {
    /// Block error probability of the degenerate ML decoder.
    pub p_dqml: f64,
    /// Block error probability of the posterior-sampling decoder.
    pub p_sampling: f64,
}

impl SamplingRates {
    /// `P_S / P_DQML`, defined as 1 when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.p_dqml == 0.0 && self.p_sampling == 0.0 {
            1.0
        } else {
            self.p_sampling / self.p_dqml
        }
    }

    /// `P_DQML ≤ P_S ≤ 2·P_DQML`, each side with slack `tol`.
    pub fn satisfies_bounds(&self, tol: f64) -> bool {
        self.p_dqml <= self.p_sampling + tol && self.p_sampling <= 2.0 * self.p_dqml + tol
    }
}

/// Exact DQML and sampling-decoder error probabilities, summing over all
/// `2ⁿ` bit-flip patterns grouped by (syndrome, coset).
pub fn sampling_error_rates(code: &CssCode, p_x: f64) -> Result<SamplingRates> {
    check_p(p_x, 1.0, "(0, 1)")?;
    let n = code.n();
    if n > MAX_RATE_N {
        return Err(Error::TooLarge {
            what: "block length",
            value: n,
            limit: MAX_RATE_N,
        });
    }
    let (ln_p, ln_q) = (p_x.ln(), (1.0 - p_x).ln());
    let mut by_syndrome: HashMap<BitVector, HashMap<BitVector, f64>> = HashMap::new();
    for bits in 0u64..(1u64 << n) {
        let x = BitVector::from_bools((0..n).map(|i| bits >> i & 1 == 1));
        let w = log_weight(x.weight(), n, ln_p, ln_q).exp();
        let s = code.syndrome_x(&x)?;
        let label = code.g2_space().reduce(&x)?;
        *by_syndrome.entry(s).or_default().entry(label).or_default() += w;
    }
    // Sum the per-syndrome losses directly so a single-coset syndrome
    // contributes exactly zero.
    let (mut p_dqml, mut p_sampling) = (0.0, 0.0);
    let mut syndromes: Vec<_> = by_syndrome.into_iter().collect();
    syndromes.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, cosets) in syndromes {
        let mut masses: Vec<f64> = cosets.into_values().collect();
        masses.sort_by(f64::total_cmp);
        let ps: f64 = masses.iter().sum();
        let max = masses.last().copied().unwrap_or(0.0);
        p_dqml += masses[..masses.len() - 1].iter().sum::<f64>();
        debug_assert!((ps - max - masses[..masses.len() - 1].iter().sum::<f64>()).abs() < 1e-15);
        p_sampling += masses.iter().map(|m| m * (ps - m) / ps).sum::<f64>();
    }
    Ok(SamplingRates { p_dqml, p_sampling })
}

/// Draws from `Pr(x | H1 x = s)` by inverse-CDF over the enumerated table.
#[derive(Clone, Debug)]
pub struct TableSampler {
    solutions: Vec<BitVector>,
    cdf: Vec<f64>,
}

impl TableSampler {
    pub fn new(h1: &BitMatrix, s: &BitVector, p_x: f64) -> Result<Self> {
        check_p(p_x, 1.0, "(0, 1)")?;
        let n = h1.cols();
        let (x0, kernel) = affine_solutions(h1, s)?;
        let (ln_p, ln_q) = (p_x.ln(), (1.0 - p_x).ln());
        let mut solutions = Vec::new();
        let mut weights = Vec::new();
        for_each_affine(&x0, &kernel, |x| {
            solutions.push(x.clone());
            weights.push(log_weight(x.weight(), n, ln_p, ln_q).exp());
        });
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Ok(Self { solutions, cdf })
    }

    /// `(solution, probability)` pairs.
    pub fn table(&self) -> impl Iterator<Item = (&BitVector, f64)> {
        let mut prev = 0.0;
        self.solutions.iter().zip(&self.cdf).map(move |(x, &c)| {
            let p = c - prev;
            prev = c;
            (x, p)
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVector {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.solutions.len() - 1);
        self.solutions[idx].clone()
    }
}

/// Draws from `Pr(x | H1 x = s)` bit by bit: `xᵢ` is sampled from its exact
/// marginal given `x₁…xᵢ₋₁` and `s`. The marginal of bit `i` depends on the
/// prefix only through the residual syndrome, so marginals are memoized on
/// `(i, residual syndrome)`.
#[derive(Clone, Debug)]
pub struct ChainSampler {
    h1: BitMatrix,
    syndrome: BitVector,
    p_x: f64,
    suffixes: Vec<BitMatrix>,
    cache: HashMap<(usize, BitVector), f64>,
}

impl ChainSampler {
    pub fn new(h1: &BitMatrix, s: &BitVector, p_x: f64) -> Result<Self> {
        check_p(p_x, 1.0, "(0, 1)")?;
        // Fail early on unsolvable syndromes.
        h1.solve(s)?;
        let n = h1.cols();
        Ok(Self {
            suffixes: (0..n).map(|i| h1.select_columns(i..n)).collect(),
            h1: h1.clone(),
            syndrome: s.clone(),
            p_x,
            cache: HashMap::new(),
        })
    }

    /// `P(xᵢ = 1 | prefix, s)` where the prefix has been folded into
    /// `residual`.
    fn conditional_one(&mut self, i: usize, residual: &BitVector) -> Result<f64> {
        if let Some(&p) = self.cache.get(&(i, residual.clone())) {
            return Ok(p);
        }
        let llr = exact_marginals(&self.suffixes[i], residual, self.p_x)?[0];
        let p = 1.0 / (1.0 + llr.exp());
        self.cache.insert((i, residual.clone()), p);
        Ok(p)
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<BitVector> {
        let n = self.h1.cols();
        let mut x = BitVector::zeros(n);
        let mut residual = self.syndrome.clone();
        for i in 0..n {
            let p1 = self.conditional_one(i, &residual)?;
            if rng.random::<f64>() < p1 {
                x.set(i, true);
                residual.xor_assign(&self.h1.column(i));
            }
        }
        Ok(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMethod {
    Table,
    ChainRule,
}

/// Posterior-sampling decoder for bit-flip noise.
pub fn sampling_decode<R: Rng + ?Sized>(
    code: &CssCode,
    s: &BitVector,
    p_x: f64,
    method: SamplingMethod,
    rng: &mut R,
) -> Result<BitVector> {
    match method {
        SamplingMethod::Table => Ok(TableSampler::new(code.h1(), s, p_x)?.sample(rng)),
        SamplingMethod::ChainRule => ChainSampler::new(code.h1(), s, p_x)?.sample(rng),
    }
}

/// Exact per-qubit posteriors `Pr(Qᵢ = j | S = s)` under depolarizing noise,
/// by enumerating all `4ⁿ` Pauli patterns.
pub fn exact_quaternary_marginals(code: &CssCode, s: &BitVector, p: f64) -> Result<Vec<[f64; 4]>> {
    check_p(p, 0.75, "(0, 3/4)")?;
    let n = code.n();
    if n > MAX_QUATERNARY_N {
        return Err(Error::TooLarge {
            what: "block length",
            value: n,
            limit: MAX_QUATERNARY_N,
        });
    }
    if s.len() != code.h1().rows() + code.g2().rows() {
        return Err(Error::dims("full syndrome length", code.h1().rows() + code.g2().rows(), s.len()));
    }
    let mut marg = vec![[0.0; 4]; n];
    let mut total = 0.0;
    let mut paulis = vec![Pauli::I; n];
    for code_word in 0u64..(1u64 << (2 * n)) {
        for (i, q) in paulis.iter_mut().enumerate() {
            *q = Pauli::from_index((code_word >> (2 * i) & 3) as usize);
        }
        let e = PauliVector::from_paulis(&paulis);
        if code.syndrome_full(&e)? != *s {
            continue;
        }
        let w = e.weight();
        let mass = (p / 3.0).powi(w as i32) * (1.0 - p).powi((n - w) as i32);
        total += mass;
        for (i, q) in paulis.iter().enumerate() {
            marg[i][q.index()] += mass;
        }
    }
    if total == 0.0 {
        return Err(Error::NoSolution);
    }
    for m in &mut marg {
        for v in m.iter_mut() {
            *v /= total;
        }
    }
    Ok(marg)
}

/// One line of a golden-value file: `code p_x P_DQML P_S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenRecord {
    pub code: String,
    pub p_x: f64,
    pub p_dqml: f64,
    pub p_sampling: f64,
}

impl fmt::Display for GoldenRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {:.17e} {:.17e}", self.code, self.p_x, self.p_dqml, self.p_sampling)
    }
}

impl GoldenRecord {
    pub fn parse_file(text: &str) -> std::result::Result<Vec<GoldenRecord>, String> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|(i, l)| {
                let t: Vec<&str> = l.split_whitespace().collect();
                let num = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 1));
                if t.len() != 4 {
                    return Err(format!("line {}: expected 4 fields", i + 1));
                }
                Ok(GoldenRecord {
                    code: t[0].to_string(),
                    p_x: num(t[1])?,
                    p_dqml: num(t[2])?,
                    p_sampling: num(t[3])?,
                })
            })
            .collect()
    }
}
