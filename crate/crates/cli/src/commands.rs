use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use bpgd_core::alist::read_alist;
use bpgd_core::bp::{bp_run, channel_llr, TannerGraph};
use bpgd_core::css::{hypergraph_product, parse_code_file, CssCode, PauliVector};
use bpgd_core::decimation::{bpgd_decode, bpgd_rd_decode, degeneracy_experiment, Decimation, GdConfig};
use bpgd_core::montecarlo::{run_trials, DecoderKind, NoiseModel, SweepRow};
use bpgd_core::oracle::{sampling_error_rates, SamplingRates};
use bpgd_core::quaternary::{classify_quaternary_outcome, qbp_run, qbpgd_decode, QGdConfig, QuatGraph};
use bpgd_core::{BitVector, Pauli};

use crate::settings::{CodeSource, OutputFormat, Settings};

/// How a completed command ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Completed,
    /// Some probability violated `P_DQML ≤ P_S ≤ 2·P_DQML`.
    BoundViolation,
}

pub fn load_code(source: &CodeSource) -> Result<CssCode> {
    match source {
        CodeSource::File(path) => Ok(parse_code_file(path)?),
        CodeSource::Hgp(a, b) => {
            let ha = read_alist(a)?;
            let hb = read_alist(b)?;
            Ok(hypergraph_product(&ha, &hb)?)
        }
    }
}

fn require_code(s: &Settings) -> Result<CssCode> {
    let source = s.code.as_ref().ok_or_else(|| anyhow!("no code given: pass --code PATH or --hgp A B"))?;
    load_code(source)
}

fn single_p(s: &Settings) -> Result<f64> {
    match s.p[..] {
        [p] => Ok(p),
        [] => bail!("--p is required"),
        _ => bail!("this command takes a single --p value"),
    }
}

fn noise_for(kind: DecoderKind, p: f64) -> NoiseModel {
    if kind.is_quaternary() {
        NoiseModel::Depolarizing(p)
    } else {
        NoiseModel::BitFlip(p)
    }
}

/// Runs `body` against `--out` or stdout.
fn with_output(s: &Settings, out: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &s.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(out),
    }
}

pub fn cmd_validate(s: &Settings, out: &mut dyn Write) -> Result<Status> {
    let code = require_code(s)?;
    writeln!(
        out,
        "{}: n={} k1={} k2={} k={} valid",
        code.name(),
        code.n(),
        code.k1(),
        code.k2(),
        code.k()
    )?;
    Ok(Status::Completed)
}

pub fn cmd_construct_hgp(s: &Settings, out: &mut dyn Write) -> Result<Status> {
    if !matches!(s.code, Some(CodeSource::Hgp(..))) {
        bail!("construct-hgp needs --hgp A.alist B.alist");
    }
    let code = require_code(s)?;
    with_output(s, out, |w| Ok(w.write_all(code.to_code_file().as_bytes())?))?;
    Ok(Status::Completed)
}

#[derive(Serialize)]
struct TraceStep {
    qubit: usize,
    value: String,
}

#[derive(Serialize)]
struct DecodeReport {
    code: String,
    decoder: &'static str,
    p: f64,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcome: Option<&'static str>,
    /// 0/1 string or IXYZ string; absent on non-convergence.
    estimate: Option<String>,
    /// 1-indexed qubits where the estimate is not the identity.
    support: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    trace: Vec<TraceStep>,
}

fn one_indexed(v: impl IntoIterator<Item = usize>) -> Vec<usize> {
    v.into_iter().map(|i| i + 1).collect()
}

fn parse_bits_exact(text: &str, len: usize, what: &str) -> Result<BitVector> {
    let v = BitVector::parse_bits(text).ok_or_else(|| anyhow!("{what} must be a 0/1 string"))?;
    if v.len() != len {
        bail!("{what} has length {}, expected {len}", v.len());
    }
    Ok(v)
}

fn trace_steps(trace: &[Decimation], quaternary: bool) -> Vec<TraceStep> {
    trace
        .iter()
        .map(|d| TraceStep {
            qubit: d.var + 1,
            value: if quaternary {
                Pauli::from_index(d.value as usize).as_char().to_string()
            } else {
                d.value.to_string()
            },
        })
        .collect()
}

pub fn cmd_decode(s: &Settings, out: &mut dyn Write) -> Result<Status> {
    let code = require_code(s)?;
    let p = single_p(s)?;
    let kind = s.decoder;
    s.spec.validate(noise_for(kind, p), code.n())?;
    let n = code.n();
    let mut report = DecodeReport {
        code: code.name().to_string(),
        decoder: kind.name(),
        p,
        converged: false,
        outcome: None,
        estimate: None,
        support: None,
        rounds: None,
        iterations: None,
        trace: Vec::new(),
    };
    if kind.is_quaternary() {
        let m = code.h1().rows() + code.g2().rows();
        let truth = match (&s.error, &s.syndrome) {
            (Some(e), _) => {
                let e = PauliVector::parse(e).ok_or_else(|| anyhow!("--error must be an IXYZ string"))?;
                if e.len() != n {
                    bail!("--error has length {}, expected {n}", e.len());
                }
                Some(e)
            }
            (None, Some(_)) => None,
            (None, None) => bail!("decode needs --syndrome or --error"),
        };
        let syndrome = match &truth {
            Some(e) => code.syndrome_full(e)?,
            None => parse_bits_exact(s.syndrome.as_deref().unwrap_or(""), m, "--syndrome")?,
        };
        let graph = QuatGraph::new(&code)?;
        let estimate = if kind == DecoderKind::Qbp {
            let r = qbp_run(&graph, &syndrome, p, &s.spec.bp)?;
            report.iterations = Some(r.iterations_used);
            r.converged.then_some(r.hard)
        } else {
            let cfg = QGdConfig {
                bp: s.spec.bp,
                max_rounds: s.spec.max_rounds,
                epsilon: s.spec.epsilon,
            };
            let r = qbpgd_decode(&graph, &syndrome, p, &cfg)?;
            report.rounds = Some(r.rounds_used);
            report.trace = trace_steps(&r.trace, true);
            r.estimate
        };
        if let Some(e) = &truth {
            report.outcome = Some(classify_quaternary_outcome(&code, e, estimate.as_ref())?.label());
        }
        report.converged = estimate.is_some();
        report.support = estimate
            .as_ref()
            .map(|e| one_indexed((0..n).filter(|&i| e.get(i) != Pauli::I)));
        report.estimate = estimate.map(|e| e.to_string());
    } else {
        let m = code.h1().rows();
        let truth = match (&s.error, &s.syndrome) {
            (Some(e), _) => Some(parse_bits_exact(e, n, "--error")?),
            (None, Some(_)) => None,
            (None, None) => bail!("decode needs --syndrome or --error"),
        };
        let syndrome = match &truth {
            Some(e) => code.syndrome_x(e)?,
            None => parse_bits_exact(s.syndrome.as_deref().unwrap_or(""), m, "--syndrome")?,
        };
        let graph = TannerGraph::new(code.h1());
        let estimate = if kind == DecoderKind::Bp {
            let r = bp_run(&graph, &syndrome, &vec![channel_llr(p)?; n], &s.spec.bp)?;
            report.iterations = Some(r.iterations_used);
            r.converged.then_some(r.hard)
        } else {
            let cfg = GdConfig {
                bp: s.spec.bp,
                max_rounds: s.spec.max_rounds,
                llr_max: s.spec.llr_max,
                gamma_gap: s.spec.gamma_gap,
                seed: s.seed,
            };
            let r = if kind == DecoderKind::Bpgd {
                bpgd_decode(&graph, &syndrome, p, &cfg)?
            } else {
                bpgd_rd_decode(&graph, &syndrome, p, &cfg)?
            };
            report.rounds = Some(r.rounds_used);
            report.trace = trace_steps(&r.trace, false);
            r.estimate
        };
        if let Some(e) = &truth {
            report.outcome = Some(code.classify_x_outcome(e, estimate.as_ref())?.label());
        }
        report.converged = estimate.is_some();
        report.support = estimate.as_ref().map(|e| one_indexed(e.iter_ones()));
        report.estimate = estimate.map(|e| e.to_string());
    }
    with_output(s, out, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })?;
    Ok(Status::Completed)
}

pub fn sweep_rows(s: &Settings, code: &CssCode) -> Result<Vec<SweepRow>> {
    if s.p.is_empty() {
        bail!("--p is required");
    }
    if s.p.windows(2).any(|w| w[0] >= w[1]) {
        bail!("sweep probabilities must be strictly increasing");
    }
    s.p.iter()
        .map(|&p| {
            let stats = run_trials(code, noise_for(s.decoder, p), &s.spec, s.stop, s.seed, s.workers)?;
            Ok(SweepRow::new(code, &s.spec, p, s.seed, &stats, s.timing))
        })
        .collect()
}

pub fn write_rows(rows: &[SweepRow], format: OutputFormat, w: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            for r in rows {
                csv.serialize(r)?;
            }
            if rows.is_empty() {
                csv.write_record(bpgd_core::montecarlo::CSV_COLUMNS)?;
            }
            csv.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, rows)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn cmd_sweep(s: &Settings, out: &mut dyn Write) -> Result<Status> {
    let code = require_code(s)?;
    let rows = sweep_rows(s, &code)?;
    with_output(s, out, |w| write_rows(&rows, s.format, w))?;
    Ok(Status::Completed)
}

/// Reads a true error from a file or inline text: either exactly `n`
/// characters of 0/1, or a list of 1-indexed positions.
pub fn parse_truth(spec: &str, n: usize) -> Result<BitVector> {
    let text = if Path::new(spec).is_file() {
        std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?
    } else {
        spec.to_string()
    };
    let compact: String = text.split_whitespace().collect();
    if compact.len() == n && compact.chars().all(|c| c == '0' || c == '1') {
        return Ok(BitVector::parse_bits(&compact).expect("checked 0/1"));
    }
    let positions = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
            _ => Err(anyhow!("truth entry `{t}` is not a position in 1..={n}")),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BitVector::from_support(n, &positions)?)
}

pub fn cmd_degeneracy(s: &Settings, out: &mut dyn Write) -> Result<Status> {
    if s.decoder_explicit && s.decoder != DecoderKind::BpgdRd {
        bail!("degeneracy runs bpgd-rd; got --decoder {}", s.decoder);
    }
    let code = require_code(s)?;
    let p = single_p(s)?;
    let truth = parse_truth(s.truth.as_deref().ok_or_else(|| anyhow!("degeneracy needs --truth"))?, code.n())?;
    let cfg = GdConfig {
        bp: s.spec.bp,
        max_rounds: s.spec.max_rounds,
        llr_max: s.spec.llr_max,
        gamma_gap: s.spec.gamma_gap,
        seed: s.seed,
    };
    let report = degeneracy_experiment(&code, &truth, s.runs, p, &cfg)?;
    with_output(s, out, |w| {
        match s.format {
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut *w, &report)?;
                writeln!(w)?;
            }
            OutputFormat::Csv => {
                writeln!(
                    w,
                    "# runs={} converged={} distinct={} degenerate_or_exact={} logical={}",
                    report.runs,
                    report.converged,
                    report.entries.len(),
                    report.stabilizer_residuals,
                    report.logical_residuals
                )?;
                writeln!(w, "index,frequency,weight,distance,class,support")?;
                for (i, e) in report.entries.iter().enumerate() {
                    let support: Vec<String> = one_indexed(e.estimate.iter_ones()).iter().map(usize::to_string).collect();
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        i + 1,
                        e.frequency,
                        e.weight,
                        e.distance,
                        e.class.label(),
                        support.join(" ")
                    )?;
                }
            }
        }
        Ok(())
    })?;
    Ok(Status::Completed)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingBoundRow {
    pub p: f64,
    pub p_dqml: f64,
    pub p_s: f64,
    pub ratio: f64,
    pub holds: bool,
}

/// Slack allowed on each side of the double inequality.
pub const BOUND_TOL: f64 = 1e-12;

pub fn sampling_bound_rows(code: &CssCode, ps: &[f64]) -> Result<Vec<SamplingBoundRow>> {
    ps.iter()
        .map(|&p| {
            let r: SamplingRates = sampling_error_rates(code, p)?;
            Ok(SamplingBoundRow {
                p,
                p_dqml: r.p_dqml,
                p_s: r.p_sampling,
                ratio: r.ratio(),
                holds: r.satisfies_bounds(BOUND_TOL),
            })
        })
        .collect()
}

pub fn cmd_sampling_bound(s: &Settings, out: &mut dyn Write) -> Result<Status> {
    let code = require_code(s)?;
    if s.p.is_empty() {
        bail!("--p is required");
    }
    let rows = sampling_bound_rows(&code, &s.p)?;
    with_output(s, out, |w| {
        match s.format {
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut *w, &rows)?;
                writeln!(w)?;
            }
            OutputFormat::Csv => {
                writeln!(w, "p,P_DQML,P_S,ratio,holds")?;
                for r in &rows {
                    writeln!(w, "{},{:.12e},{:.12e},{:.9},{}", r.p, r.p_dqml, r.p_s, r.ratio, r.holds)?;
                }
            }
        }
        Ok(())
    })?;
    Ok(if rows.iter().all(|r| r.holds) {
        Status::Completed
    } else {
        Status::BoundViolation
    })
}
