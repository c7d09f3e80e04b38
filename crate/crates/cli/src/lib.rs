//! The `siegel` command line: one subcommand per family of operations,
//! JSON or CSV on stdout (or `--output`), exit code 2 when a checked property fails.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Complex;
use serde_json::{json, Value};

use siegel_core::brjuno::{
    brjuno_eval, brjuno_periodic, functional_residual, y_gap, TailAssumption,
};
use siegel_core::cf::{decimal_string, draw_stream, sample_classical, HighTypeSampler};
use siegel_core::holder::{
    beta_diff_check, default_pair_sampler, dlog_holder_fit, holder_scan, limit_at_zero,
    sum_lemma_pair_sampler, sum_lemma_scan, HolderScanConfig, BETA_DIFF_SLACK,
};
use siegel_core::intervals::{
    children, interval_of, intervals_csv, length_ratio, measure_distortion, split_generation,
};
use siegel_core::numeric::{nearest_residue, refine};
use siegel_core::siegel::{
    covering_tau, estimate_radius, linearize, linearize_checked, sigma_fixed_point, upsilon,
    write_coeff_dump, Family, UpsilonConfig,
};
use siegel_core::{
    classical_expand, d_log, fundamental_interval, is_high_type, mcf_expand, parse_alpha,
    reconstruct_signed, sample_high_type, McfSymbol, PrecisionCtx, RealValue, Sign,
};

/// Environment variable holding the default working precision in bits.
pub const BITS_ENV: &str = "SIEGEL_BITS";

/// Which subcommand owns each core operation. Each operation appears exactly once.
pub const DISPATCH: &[(&str, &[&str])] = &[
    ("expand", &["mcf_expand", "classical_expand"]),
    ("reconstruct", &["reconstruct"]),
    ("refine", &["refine", "nearest_residue"]),
    ("dlog", &["d_log"]),
    ("sample", &["sample_high_type"]),
    ("interval", &["fundamental_interval", "length_ratio"]),
    ("split", &["split_generation"]),
    ("brjuno", &["brjuno_eval", "brjuno_periodic"]),
    ("radius", &["linearize", "estimate_radius"]),
    ("tau", &["sigma_fixed_point", "covering_tau"]),
    ("upsilon", &["upsilon"]),
    ("holder-scan", &["holder_scan"]),
    (
        "verify",
        &[
            "measure_distortion",
            "sum_lemma_check",
            "beta_diff_check",
            "functional_residual",
            "y_gap",
            "limit_at_zero",
            "is_high_type",
        ],
    ),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Alg {
    Modified,
    Classical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    P,
    Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    Distortion,
    SumLemma,
    BetaDiff,
    Dlog,
    FunctionalEq,
    LimitZero,
    SubsetHt,
}

#[derive(Debug, Parser)]
#[command(
    name = "siegel",
    version,
    about = "Continued fractions, Brjuno sums and Siegel disk radii"
)]
pub struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = BITS_ENV, default_value_t = 256)]
    pub bits: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct SeriesArgs {
    /// Number of series coefficients.
    #[arg(long = "series-n", default_value_t = 1024)]
    pub series_n: usize,
    /// Continued-fraction depth for the Brjuno sum.
    #[arg(long, default_value_t = 60)]
    pub depth: usize,
    /// Entry bound used for the Brjuno tail; omitted means unbounded (or read off a periodic stream).
    #[arg(long = "a-max")]
    pub a_max: Option<u64>,
    #[arg(long, value_enum, default_value_t = FamilyArg::P)]
    pub family: FamilyArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Modified or classical continued-fraction expansion.
    Expand {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Alg::Modified)]
        algorithm: Alg,
        #[arg(long, default_value_t = 30)]
        digits: usize,
    },
    /// The real `a0 + s0 * alpha_0` coded by a finite symbol list and a tail.
    Reconstruct {
        #[arg(long, allow_hyphen_values = true)]
        a0: i64,
        #[arg(long, default_value = "+")]
        s0: String,
        /// Comma-separated `(a,s)` symbols.
        #[arg(long, default_value = "")]
        symbols: String,
        #[arg(long, default_value = "rat:0")]
        tail: String,
        #[arg(long, default_value_t = 30)]
        digits: usize,
    },
    /// Ball enclosure at `--bits` and the nearest-integer split.
    Refine {
        #[arg(long)]
        alpha: String,
    },
    /// The path metric `d_log(x, y)` on `[-1/2, 1/2]`.
    Dlog {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Seeded high-type samples.
    Sample {
        #[arg(long = "n-min", default_value_t = 3)]
        n_min: u64,
        #[arg(long = "a-max", default_value_t = 10)]
        a_max: u64,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Fundamental interval of a generation, from a real or from explicit symbols.
    Interval {
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 1)]
        generation: usize,
        #[arg(long, allow_hyphen_values = true)]
        a0: Option<i64>,
        #[arg(long, default_value = "+")]
        s0: String,
        #[arg(long)]
        symbols: Option<String>,
        #[arg(long)]
        extended: bool,
        /// Also list the children with entries up to this bound.
        #[arg(long)]
        children: Option<u64>,
    },
    /// First differing generation of two reals and the separation bounds.
    Split {
        #[arg(long)]
        alpha: String,
        #[arg(long = "alpha2")]
        alpha2: String,
        #[arg(long, default_value_t = 60)]
        maxdepth: usize,
    },
    /// Brjuno sum with a certified truncation bound.
    Brjuno {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Alg::Modified)]
        algorithm: Alg,
        #[arg(long = "a-max")]
        a_max: Option<u64>,
    },
    /// Linearization series and the radius estimate.
    Radius {
        #[arg(long)]
        alpha: String,
        #[arg(long = "series-n", default_value_t = 1024)]
        series_n: usize,
        /// Add a half-precision shadow run.
        #[arg(long)]
        checked: bool,
        /// Binary coefficient dump (JSON header line, then f80 pairs).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// `sigma` and the covering map `tau(w)`.
    Tau {
        #[arg(long)]
        alpha: String,
        /// `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        w: String,
    },
    /// `log r + Y` for `P` or `Q`.
    Upsilon {
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Measured Hölder constant of `Upsilon` over seeded pairs.
    HolderScan {
        #[arg(long = "n-min", default_value_t = 3)]
        n_min: u64,
        #[arg(long = "pair-a-max", default_value_t = 6)]
        pair_a_max: u64,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        exponent: f64,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Runs one property check; exit code 2 if it fails.
    Verify {
        #[arg(long, value_enum)]
        lemma: Lemma,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Pair or sample count (lemma-specific default).
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        /// Exponent `a` for sum-lemma and dlog.
        #[arg(long, default_value_t = 0.75)]
        a: f64,
        #[arg(long = "n-min", default_value_t = 3)]
        n_min: u64,
        #[arg(long = "a-max")]
        a_max: Option<u64>,
        /// Exponents `k` for limit-zero.
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3])]
        k: Vec<u32>,
        #[arg(long = "series-n", default_value_t = 4096)]
        series_n: usize,
        #[arg(long)]
        alpha: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Expand { .. } => "expand",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Refine { .. } => "refine",
            Command::Dlog { .. } => "dlog",
            Command::Sample { .. } => "sample",
            Command::Interval { .. } => "interval",
            Command::Split { .. } => "split",
            Command::Brjuno { .. } => "brjuno",
            Command::Radius { .. } => "radius",
            Command::Tau { .. } => "tau",
            Command::Upsilon { .. } => "upsilon",
            Command::HolderScan { .. } => "holder-scan",
            Command::Verify { .. } => "verify",
        }
    }
}

/// A finished command: JSON always, a native CSV when the data is tabular.
#[derive(Debug)]
pub struct Report {
    pub json: Value,
    pub csv: Option<String>,
    /// False when a checked mathematical property failed.
    pub holds: bool,
}

impl Report {
    fn ok(json: Value) -> Self {
        Report {
            json,
            csv: None,
            holds: true,
        }
    }

    pub fn render(&self, command: &str, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => {
                let body = self.csv.clone().unwrap_or_else(|| flat_csv(&self.json));
                format!("# siegel {command} v1\n{body}")
            }
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One header row of dotted keys and one value row.
fn flat_csv(v: &Value) -> String {
    let mut cells = Vec::new();
    flatten("", v, &mut cells);
    let head: Vec<String> = cells.iter().map(|(k, _)| csv_field(k)).collect();
    let row: Vec<String> = cells.iter().map(|(_, x)| csv_field(x)).collect();
    format!("{}\n{}\n", head.join(","), row.join(","))
}

fn alpha(spec: &str) -> anyhow::Result<RealValue> {
    parse_alpha(spec).with_context(|| format!("alpha `{spec}`"))
}

fn ctx(bits: u32) -> anyhow::Result<PrecisionCtx> {
    Ok(PrecisionCtx::new(bits)?)
}

fn sign(s: &str) -> anyhow::Result<Sign> {
    match s {
        "+" | "+1" | "1" => Ok(Sign::Plus),
        "-" | "-1" => Ok(Sign::Minus),
        other => bail!("sign must be + or -, got `{other}`"),
    }
}

fn symbols(text: &str) -> anyhow::Result<Vec<McfSymbol>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    match parse_alpha(&format!("sym:0;[{text}]"))? {
        RealValue::SymbolDefined(s) => Ok(s.preperiod),
        _ => unreachable!("sym spec parses to a stream"),
    }
}

fn tail_for(x: &RealValue, a_max: Option<u64>) -> anyhow::Result<TailAssumption> {
    Ok(match (a_max, x) {
        (Some(m), _) => TailAssumption::bounded(m)?,
        (None, RealValue::SymbolDefined(s)) => TailAssumption::for_stream(s),
        (None, _) => TailAssumption::Unbounded,
    })
}

fn upsilon_cfg(s: &SeriesArgs, x: Option<&RealValue>, bits: u32) -> anyhow::Result<UpsilonConfig> {
    let tail = match x {
        Some(x) => tail_for(x, s.a_max)?,
        None => TailAssumption::bounded(s.a_max.unwrap_or(6))?,
    };
    Ok(UpsilonConfig {
        series_n: s.series_n,
        depth: s.depth,
        tail,
        ctx: ctx(bits)?,
        family: match s.family {
            FamilyArg::P => Family::P,
            FamilyArg::Q => Family::Q,
        },
    })
}

fn complex_json(z: &Complex) -> Value {
    json!([z.real().to_f64(), z.imag().to_f64()])
}

pub fn run(cli: &Cli) -> anyhow::Result<Report> {
    let bits = cli.bits;
    match &cli.command {
        Command::Expand {
            alpha: spec,
            depth,
            algorithm,
            digits,
        } => {
            let x = alpha(spec)?;
            let c = ctx(bits)?;
            let mut csv = String::new();
            let json = match algorithm {
                Alg::Modified => {
                    let e = mcf_expand(&x, *depth, c)?;
                    csv.push_str("n,a,s,alpha\n");
                    for (i, s) in e.symbols.iter().enumerate() {
                        let _ = writeln!(
                            csv,
                            "{},{},{},{}",
                            i + 1,
                            s.a(),
                            s.s().as_char(),
                            decimal_string(&e.alphas[i + 1], *digits)
                        );
                    }
                    e.to_json(*digits)
                }
                Alg::Classical => {
                    let e = classical_expand(&x, *depth, c)?;
                    csv.push_str("n,a,alpha\n");
                    for (i, a) in e.entries.iter().enumerate() {
                        let alpha_n = e
                            .alphas
                            .get(i + 1)
                            .map(|v| decimal_string(v, *digits))
                            .unwrap_or_default();
                        let _ = writeln!(csv, "{},{},{}", i + 1, a, alpha_n);
                    }
                    e.to_json(*digits)
                }
            };
            Ok(Report {
                json,
                csv: Some(csv),
                holds: true,
            })
        }
        Command::Reconstruct {
            a0,
            s0,
            symbols: syms,
            tail,
            digits,
        } => {
            let v = reconstruct_signed(*a0, sign(s0)?, &symbols(syms)?, &alpha(tail)?)?;
            Ok(Report::ok(json!({
                "value": v.to_spec(),
                "decimal": decimal_string(&v, *digits),
            })))
        }
        Command::Refine { alpha: spec } => {
            let x = alpha(spec)?;
            let r = refine(&x, ctx(bits)?)?;
            let (a0, res) = nearest_residue(&r)?;
            Ok(Report::ok(json!({
                "input": x.to_spec(),
                "refined": r.to_spec(),
                "bits": bits,
                "a0": a0.to_string(),
                "residue": res.to_spec(),
            })))
        }
        Command::Dlog { x, y } => {
            let d = d_log(&alpha(x)?, &alpha(y)?)?;
            Ok(Report::ok(json!({ "x": x, "y": y, "d_log": d.value() })))
        }
        Command::Sample {
            n_min,
            a_max,
            depth,
            seed,
            count,
        } => {
            let mut rows = Vec::new();
            let mut csv = String::from("seed,alpha,symbols\n");
            for i in 0..*count as u64 {
                let s = seed + i;
                let (x, e) = sample_high_type(*n_min, *a_max, *depth, s)?;
                let syms: Vec<String> = e
                    .symbols
                    .iter()
                    .map(|m| format!("({},{})", m.a(), m.s().as_char()))
                    .collect();
                let _ = writeln!(csv, "{s},{},\"{}\"", csv_field(&x.to_spec()), syms.join(""));
                rows.push(json!({ "seed": s, "alpha": x.to_spec(), "symbols": e.symbols }));
            }
            Ok(Report {
                json: json!({ "samples": rows }),
                csv: Some(csv),
                holds: true,
            })
        }
        Command::Interval {
            alpha: spec,
            generation,
            a0,
            s0,
            symbols: syms,
            extended,
            children: kids,
        } => {
            let (iv, ratio) = match (spec, syms) {
                (Some(spec), None) => {
                    let x = alpha(spec)?;
                    let e = mcf_expand(&x, generation + 1, ctx(bits)?)?;
                    let iv = interval_of(&e, *generation, *extended)?;
                    let r = length_ratio(&iv, e.beta(*generation as isize - 1));
                    (iv, Some(r))
                }
                (None, Some(syms)) => {
                    let a0 = a0.ok_or_else(|| anyhow!("--symbols needs --a0"))?;
                    (
                        fundamental_interval(a0, sign(s0)?, &symbols(syms)?, *extended)?,
                        None,
                    )
                }
                _ => bail!("give exactly one of --alpha or --symbols"),
            };
            let mut list = vec![iv.clone()];
            if let Some(m) = kids {
                list.extend(children(&iv, *m)?);
            }
            let json = json!({
                "generation": iv.generation,
                "symbols": iv.symbol_string(),
                "extended": iv.extended,
                "lo": iv.lo().to_string(),
                "hi": iv.hi().to_string(),
                "length": iv.length().to_string(),
                "length_f64": iv.length().to_f64(),
                "length_ratio": ratio,
                "children": list[1..].iter().map(|c| json!({
                    "symbols": c.symbol_string(), "lo": c.lo().to_string(), "hi": c.hi().to_string()
                })).collect::<Vec<_>>(),
            });
            Ok(Report {
                json,
                csv: Some(intervals_csv(&list)),
                holds: true,
            })
        }
        Command::Split {
            alpha: a,
            alpha2: b,
            maxdepth,
        } => {
            let r = split_generation(&alpha(a)?, &alpha(b)?, *maxdepth)?;
            let holds = r.bounds_hold();
            let mut json = serde_json::to_value(&r)?;
            json["bounds_hold"] = json!(holds);
            Ok(Report {
                json,
                csv: None,
                holds,
            })
        }
        Command::Brjuno {
            alpha: spec,
            depth,
            algorithm,
            a_max,
        } => {
            let x = alpha(spec)?;
            let tail = tail_for(&x, *a_max)?;
            let c = ctx(bits)?;
            let r = match algorithm {
                Alg::Modified => brjuno_eval(&mcf_expand(&x, *depth, c)?, tail)?,
                Alg::Classical => brjuno_eval(&classical_expand(&x, *depth, c)?, tail)?,
            };
            let mut json = r.to_json();
            if let (Alg::Modified, RealValue::SymbolDefined(s)) = (algorithm, &x) {
                if s.is_periodic() {
                    let closed = brjuno_periodic(s.a0, &s.preperiod, &s.period, 192)?.to_f64();
                    json["closed_form"] = json!(closed);
                }
            }
            Ok(Report::ok(json))
        }
        Command::Radius {
            alpha: spec,
            series_n,
            checked,
            dump,
        } => {
            let x = alpha(spec)?;
            let c = ctx(bits)?;
            let series = if *checked {
                linearize_checked(&x, *series_n, c)?
            } else {
                linearize(&x, *series_n, c)?
            };
            let r = estimate_radius(&series)?;
            if let Some(path) = dump {
                let mut f = std::fs::File::create(path)
                    .with_context(|| format!("create {}", path.display()))?;
                write_coeff_dump(&series, &mut f)?;
            }
            let mut csv = String::from("n,log_abs_b\n");
            for n in 1..=series.n {
                let b = series.b(n);
                let m = rug::Float::with_val(64, b.abs_ref());
                let _ = writeln!(csv, "{n},{}", m.ln().to_f64());
            }
            let json = json!({
                "alpha": x.to_spec(),
                "series_n": series.n,
                "bits": series.bits,
                "min_divisor": series.min_divisor,
                "rel_error": series.rel_error,
                "achieved_bits": series.achieved_bits(),
                "radius": r,
                "log_r": r.log_r(),
            });
            Ok(Report {
                json,
                csv: Some(csv),
                holds: true,
            })
        }
        Command::Tau { alpha: spec, w } => {
            let x = alpha(spec)?;
            let (re, im) = w
                .split_once(',')
                .ok_or_else(|| anyhow!("--w must be `re,im`"))?;
            let (re, im): (f64, f64) = (re.trim().parse()?, im.trim().parse()?);
            let wz = Complex::with_val(bits, (re, im));
            let sigma = sigma_fixed_point(&x, bits);
            let t = covering_tau(&x, &wz, bits)?;
            Ok(Report::ok(json!({
                "alpha": x.to_spec(),
                "w": [re, im],
                "sigma": complex_json(&sigma),
                "tau": complex_json(&t),
            })))
        }
        Command::Upsilon {
            alpha: spec,
            series,
        } => {
            let x = alpha(spec)?;
            let cfg = upsilon_cfg(series, Some(&x), bits)?;
            Ok(Report::ok(upsilon(&x, &cfg)?.to_json()))
        }
        Command::HolderScan {
            n_min,
            pair_a_max,
            pairs,
            seed,
            exponent,
            series,
        } => {
            let cfg = HolderScanConfig {
                sampler: default_pair_sampler(*n_min, *pair_a_max)?,
                pairs: *pairs,
                seed: *seed,
                exponent: *exponent,
                upsilon: upsilon_cfg(series, None, bits)?,
            };
            let r = holder_scan(&cfg)?;
            let mut json = r.to_json();
            json["trend"] = serde_json::to_value(r.trend(8).ok())?;
            Ok(Report {
                json,
                csv: Some(r.to_csv()),
                holds: true,
            })
        }
        Command::Verify {
            lemma,
            seed,
            pairs,
            depth,
            a,
            n_min,
            a_max,
            k,
            series_n,
            alpha: spec,
        } => verify(
            *lemma,
            &VerifyArgs {
                seed: *seed,
                pairs: *pairs,
                depth: *depth,
                a: *a,
                n_min: *n_min,
                a_max: *a_max,
                k: k.clone(),
                series_n: *series_n,
                alpha: spec.clone(),
                bits,
            },
        ),
    }
}

struct VerifyArgs {
    seed: u64,
    pairs: Option<usize>,
    depth: Option<usize>,
    a: f64,
    n_min: u64,
    a_max: Option<u64>,
    k: Vec<u32>,
    series_n: usize,
    alpha: Option<String>,
    bits: u32,
}

fn verify(lemma: Lemma, v: &VerifyArgs) -> anyhow::Result<Report> {
    match lemma {
        Lemma::Distortion => {
            let count = v.pairs.unwrap_or(200);
            let gens = v.depth.unwrap_or(15);
            let sampler = HighTypeSampler::new(v.n_min, v.a_max.unwrap_or(12), gens + 1)?;
            let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
            let (mut checked, mut violations, mut c_max) = (0usize, 0usize, 0.0f64);
            for _ in 0..count {
                let x = RealValue::SymbolDefined(draw_stream(&sampler, &mut rng));
                let e = mcf_expand(&x, gens + 1, ctx(256)?)?;
                for n in 0..=gens {
                    let iv = interval_of(&e, n, false)?;
                    let c =
                        measure_distortion(e.a0, e.s0.unwrap_or(Sign::Plus), &e.symbols[..n], 2)?
                            .implied_c;
                    c_max = c_max.max(c);
                    let r = length_ratio(&iv, e.beta(n as isize - 1));
                    if r < (-c).exp() * (1.0 - 1e-12) || r > c.exp() * (1.0 + 1e-12) {
                        violations += 1;
                    }
                    checked += 1;
                }
            }
            Ok(Report {
                json: json!({ "lemma": "distortion", "intervals": checked, "violations": violations, "c_max": c_max }),
                csv: None,
                holds: violations == 0,
            })
        }
        Lemma::SumLemma => {
            let count = v.pairs.unwrap_or(1000);
            let depth = v.depth.unwrap_or(40);
            let pairs =
                sum_lemma_pair_sampler(v.n_min, v.a_max.unwrap_or(6))?.draw_many(count, v.seed);
            let lo = sum_lemma_scan(&pairs, v.a, depth, 10)?;
            let hi = sum_lemma_scan(&pairs, v.a, 2 * depth, 10)?;
            let change = (hi.max_ratio - lo.max_ratio).abs() / lo.max_ratio;
            let holds =
                lo.max_ratio.is_finite() && change < 0.05 && lo.asymptotic_trend.flat_within(2.0);
            let mut csv = String::from("index,x_distance,ratio\n");
            for (i, (d, r)) in lo.points.iter().enumerate() {
                let _ = writeln!(csv, "{i},{d:e},{r}");
            }
            Ok(Report {
                json: json!({
                    "lemma": "sum-lemma",
                    "pairs": count,
                    "a": v.a,
                    "depth": depth,
                    "max_ratio": lo.max_ratio,
                    "max_ratio_double_depth": hi.max_ratio,
                    "relative_change": change,
                    "case_a": lo.case_a,
                    "case_b": lo.case_b,
                    "near": lo.near,
                    "trend": lo.trend,
                    "asymptotic_trend": lo.asymptotic_trend,
                }),
                csv: Some(csv),
                holds,
            })
        }
        Lemma::BetaDiff => {
            let count = v.pairs.unwrap_or(10_000);
            let depth = v.depth.unwrap_or(40);
            let pairs =
                sum_lemma_pair_sampler(v.n_min, v.a_max.unwrap_or(6))?.draw_many(count, v.seed);
            let (mut violations, mut worst) = (0usize, 0.0f64);
            for p in &pairs {
                let (l, r) = beta_diff_check(&p.x, &p.y, depth)?;
                if l > r * (1.0 + BETA_DIFF_SLACK) {
                    violations += 1;
                }
                worst = worst.max(l / r);
            }
            Ok(Report {
                json: json!({ "lemma": "beta-diff", "pairs": count, "depth": depth, "violations": violations, "max_lhs_over_rhs": worst }),
                csv: None,
                holds: violations == 0,
            })
        }
        Lemma::Dlog => {
            let count = v.pairs.unwrap_or(10_000);
            let fit = dlog_holder_fit(v.a, count, v.seed)?;
            let half = RealValue::rational(1, 2)?;
            let norm = d_log(&half, &half.neg())?.value();
            let norm_err = (norm - (1.0 + std::f64::consts::LN_2)).abs();
            let holds = fit.violations == 0 && norm_err < 1e-12;
            let mut json = serde_json::to_value(&fit)?;
            json["lemma"] = json!("dlog");
            json["fitted_with_margin"] = json!(fit.fitted * 1.0001);
            json["normalization"] = json!(norm);
            json["normalization_error"] = json!(norm_err);
            Ok(Report {
                json,
                csv: None,
                holds,
            })
        }
        Lemma::FunctionalEq => {
            let depth = v.depth.unwrap_or(40);
            let inputs: Vec<RealValue> = match &v.alpha {
                Some(s) => vec![alpha(s)?],
                None => {
                    let sampler = HighTypeSampler::new(v.n_min, v.a_max.unwrap_or(10), 30)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
                    (0..v.pairs.unwrap_or(50))
                        .map(|_| {
                            let mut x = RealValue::SymbolDefined(draw_stream(&sampler, &mut rng));
                            if rng.gen_bool(0.5) {
                                x = x.neg();
                            }
                            x
                        })
                        .collect()
                }
            };
            let mut rows = Vec::new();
            let mut holds = true;
            for x in &inputs {
                let tail = tail_for(x, v.a_max)?;
                let f = functional_residual(x, depth, tail)?;
                let g = y_gap(x, depth, tail)?;
                let ok = f.residual <= f.combined_tail_bound + 1e-14;
                holds &= ok;
                rows.push(json!({
                    "alpha": x.to_spec(),
                    "residual": f.residual,
                    "combined_tail_bound": f.combined_tail_bound,
                    "y_one": g.y_one.value,
                    "y_half": g.y_half.value,
                    "gap": g.gap,
                    "gap_tail_bound": g.tail_bound,
                    "holds": ok,
                }));
            }
            Ok(Report {
                json: json!({ "lemma": "functional-eq", "depth": depth, "rows": rows }),
                csv: None,
                holds,
            })
        }
        Lemma::LimitZero => {
            let cfg = UpsilonConfig {
                series_n: v.series_n,
                depth: v.depth.unwrap_or(60),
                tail: TailAssumption::bounded(v.a_max.unwrap_or(3))?,
                ctx: ctx(v.bits)?,
                family: Family::P,
            };
            let rows = limit_at_zero(&v.k, &cfg)?;
            let holds = rows
                .windows(2)
                .all(|w| w[1].target_gap.abs() < w[0].target_gap.abs());
            let mut csv = String::from("k,alpha,upsilon,upsilon_mirror,error_bar,target_gap\n");
            for r in &rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{:e},{}",
                    r.k,
                    csv_field(&r.alpha.to_spec()),
                    r.upsilon.upsilon,
                    r.mirror.upsilon,
                    r.upsilon.error_bar,
                    r.target_gap
                );
            }
            Ok(Report {
                json: json!({
                    "lemma": "limit-zero",
                    "target": siegel_core::holder::limit_target(),
                    "series_n": v.series_n,
                    "rows": rows.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
                    "monotone": holds,
                }),
                csv: Some(csv),
                holds,
            })
        }
        Lemma::SubsetHt => {
            let count = v.pairs.unwrap_or(500);
            let depth = v.depth.unwrap_or(20);
            let span = v.a_max.unwrap_or(v.n_min + 20);
            let mut violations = 0usize;
            for seed in v.seed..v.seed + count as u64 {
                let (x, c) = sample_classical(v.n_min, span, depth, seed)?;
                let m = mcf_expand(&x, depth, ctx(256)?)?;
                let same = c.entries.len() == m.symbols.len()
                    && c.entries
                        .iter()
                        .zip(&m.symbols)
                        .all(|(&a, s)| McfSymbol::plus(a).is_ok_and(|p| p == *s));
                let ht = is_high_type(&c, v.n_min).high_type && is_high_type(&m, v.n_min).high_type;
                if !(same && ht) {
                    violations += 1;
                }
            }
            Ok(Report {
                json: json!({ "lemma": "subset-ht", "samples": count, "n_min": v.n_min, "violations": violations }),
                csv: None,
                holds: violations == 0,
            })
        }
    }
}

/// Parses, runs and writes; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(report) => {
            let text = report.render(cli.command.name(), cli.format);
            let written = match &cli.output {
                Some(p) => {
                    std::fs::write(p, &text).with_context(|| format!("write {}", p.display()))
                }
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return 1;
            }
            if report.holds {
                0
            } else {
                eprintln!("property violated; report written");
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
