//! Flag values merged with an optional `key = value` config file.
//! Precedence: command-line flag (or env var), then config file, then default.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

use bpgd_core::bp::BpVariant;
use bpgd_core::montecarlo::{DecoderKind, DecoderSpec, StoppingRule};

#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// Code file (`css` format)
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "hgp")]
    pub code: Option<PathBuf>,
    /// Build the hypergraph product of two alist matrices
    #[arg(long, global = true, num_args = 2, value_names = ["A.alist", "B.alist"])]
    pub hgp: Option<Vec<PathBuf>>,
    /// bp, bpgd, bpgd-rd, qbp or qbpgd
    #[arg(long, global = true)]
    pub decoder: Option<String>,
    /// Comma-separated physical error probabilities
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    pub p: Option<Vec<f64>>,
    /// BP iterations (per round for decimating decoders) [default: 10]
    #[arg(long = "T", global = true)]
    pub t: Option<usize>,
    /// Decimation round limit [default: n]
    #[arg(long = "R", global = true)]
    pub r: Option<usize>,
    /// Message saturation bound [default: 25]
    #[arg(long = "K", global = true)]
    pub k: Option<f64>,
    /// Magnitude of a decimated prior LLR [default: 25]
    #[arg(long, global = true)]
    pub llr_max: Option<f64>,
    /// Reliability gap for bpgd-rd [default: 1.0]
    #[arg(long, global = true)]
    pub gamma_prime: Option<f64>,
    /// Residual probability of a decimated quaternary prior [default: 1e-10]
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// sum-product or min-sum [default: sum-product]
    #[arg(long, global = true)]
    pub variant: Option<String>,
    /// Min-sum scaling factor [default: 0.625]
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Master seed [default: 0]
    #[arg(long, global = true, env = "QBPGD_SEED")]
    pub seed: Option<u64>,
    /// Worker threads, 0 for all cores [default: 0]
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Trial cap per point [default: 1000000]
    #[arg(long, global = true)]
    pub max_trials: Option<u64>,
    /// Stop a point after this many block errors [default: 100]
    #[arg(long, global = true)]
    pub target_errors: Option<u64>,
    /// Output file [default: stdout]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv or json [default: csv]
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Flat `key = value` settings file; flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Fill the wall_s column
    #[arg(long, global = true)]
    pub timing: bool,
    /// Syndrome bits for `decode`
    #[arg(long, global = true)]
    pub syndrome: Option<String>,
    /// Error pattern for `decode` (0/1 bits or IXYZ)
    #[arg(long, global = true)]
    pub error: Option<String>,
    /// True error for `degeneracy`: file or inline, as bits or 1-indexed support
    #[arg(long, global = true)]
    pub truth: Option<String>,
    /// Decodes per `degeneracy` experiment [default: 10000]
    #[arg(long, global = true)]
    pub runs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CodeSource {
    File(PathBuf),
    Hgp(PathBuf, PathBuf),
}

/// Fully resolved settings.
#[derive(Clone, Debug)]
pub struct Settings {
    pub code: Option<CodeSource>,
    pub decoder: DecoderKind,
    pub decoder_explicit: bool,
    pub p: Vec<f64>,
    pub spec: DecoderSpec,
    pub seed: u64,
    pub workers: usize,
    pub stop: StoppingRule,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub timing: bool,
    pub syndrome: Option<String>,
    pub error: Option<String>,
    pub truth: Option<String>,
    pub runs: usize,
}

const KEYS: [&str; 23] = [
    "code",
    "hgp",
    "decoder",
    "p",
    "T",
    "R",
    "K",
    "llr-max",
    "gamma-prime",
    "epsilon",
    "variant",
    "alpha",
    "seed",
    "workers",
    "max-trials",
    "target-errors",
    "out",
    "format",
    "timing",
    "syndrome",
    "error",
    "truth",
    "runs",
];

/// Parses a flat `key = value` file; `#` starts a comment.
pub fn parse_config(text: &str, path: &Path) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), i + 1))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            bail!("{}:{}: unknown key `{k}`", path.display(), i + 1);
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn pick<T: FromStr>(flag: Option<T>, file: &HashMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|e| anyhow!("config key `{key}`: {e}")))
        .transpose()
}

pub fn parse_probability_list(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("invalid probability `{t}`")))
        .collect()
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_config(&text, path)?
            }
            None => HashMap::new(),
        };

        let code = match (&args.code, &args.hgp) {
            (Some(c), _) => Some(CodeSource::File(c.clone())),
            (None, Some(v)) => Some(CodeSource::Hgp(v[0].clone(), v[1].clone())),
            (None, None) => match (file.get("code"), file.get("hgp")) {
                (Some(_), Some(_)) => bail!("config sets both `code` and `hgp`"),
                (Some(c), None) => Some(CodeSource::File(PathBuf::from(c))),
                (None, Some(h)) => {
                    let parts: Vec<&str> = h.split_whitespace().collect();
                    let [a, b] = parts[..] else {
                        bail!("config key `hgp` needs two alist paths");
                    };
                    Some(CodeSource::Hgp(a.into(), b.into()))
                }
                (None, None) => None,
            },
        };

        let decoder_name = pick(args.decoder.clone(), &file, "decoder")?;
        let decoder_explicit = decoder_name.is_some();
        let decoder: DecoderKind = decoder_name.as_deref().unwrap_or("bpgd").parse()?;

        let p = match &args.p {
            Some(v) => v.clone(),
            None => file.get("p").map(|s| parse_probability_list(s)).transpose()?.unwrap_or_default(),
        };

        let variant_name = pick(args.variant.clone(), &file, "variant")?.unwrap_or_else(|| "sum-product".into());
        let alpha = pick(args.alpha, &file, "alpha")?;
        let variant = match variant_name.as_str() {
            "sum-product" => {
                if alpha.is_some() {
                    bail!("--alpha only applies to --variant min-sum");
                }
                BpVariant::SumProduct
            }
            "min-sum" => BpVariant::MinSum {
                alpha: alpha.unwrap_or(0.625),
            },
            other => bail!("unknown BP variant `{other}` (expected sum-product or min-sum)"),
        };

        let mut spec = DecoderSpec::new(decoder);
        spec.bp.variant = variant;
        spec.bp.max_iter = pick(args.t, &file, "T")?.unwrap_or(10);
        spec.bp.clip = pick(args.k, &file, "K")?.unwrap_or(25.0);
        spec.max_rounds = pick(args.r, &file, "R")?;
        spec.llr_max = pick(args.llr_max, &file, "llr-max")?.unwrap_or(25.0);
        spec.gamma_gap = pick(args.gamma_prime, &file, "gamma-prime")?.unwrap_or(1.0);
        spec.epsilon = pick(args.epsilon, &file, "epsilon")?.unwrap_or(1e-10);

        let format = match pick(args.format.clone(), &file, "format")?.as_deref().unwrap_or("csv") {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => bail!("unknown format `{other}` (expected csv or json)"),
        };

        let timing = args.timing || pick::<bool>(None, &file, "timing")?.unwrap_or(false);

        Ok(Self {
            code,
            decoder,
            decoder_explicit,
            p,
            spec,
            seed: pick(args.seed, &file, "seed")?.unwrap_or(0),
            workers: pick(args.workers, &file, "workers")?.unwrap_or(0),
            stop: StoppingRule {
                max_trials: pick(args.max_trials, &file, "max-trials")?.unwrap_or(1_000_000),
                target_errors: pick(args.target_errors, &file, "target-errors")?.unwrap_or(100),
            },
            out: pick(args.out.clone(), &file, "out")?,
            format,
            timing,
            syndrome: pick(args.syndrome.clone(), &file, "syndrome")?,
            error: pick(args.error.clone(), &file, "error")?,
            truth: pick(args.truth.clone(), &file, "truth")?,
            runs: pick(args.runs, &file, "runs")?.unwrap_or(10_000),
        })
    }
}
