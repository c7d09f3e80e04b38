//! Empirical checks of the arithmetic estimates behind the Hölder modulus of
//! `Upsilon`, and the scans that measure the modulus itself.
//!
//! Pair sampling mixes independent streams with pairs that share a prefix and
//! then diverge, so that both split cases show up in every corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::Serialize;
use serde_json::json;

use crate::brjuno::TailAssumption;
use crate::cf::{draw_stream, HighTypeSampler};
use crate::cf::{mcf_expand, McfSymbol, Sign, SymbolStream};
use crate::error::{Error, Result};
use crate::intervals::{split_generation, SplitCase, SplitReport};
use crate::numeric::{PrecisionCtx, RealValue};
use crate::siegel::{linear_fit, upsilon, UpsilonConfig, UpsilonSample};

const WORK_PREC: u32 = 320;

/// `alpha_0 ..= alpha_depth` as floats.
fn alpha_seq(x: &RealValue, depth: usize) -> Result<Vec<Float>> {
    if let RealValue::SymbolDefined(s) = x {
        if s.is_periodic() {
            return s.alphas_float(depth, WORK_PREC);
        }
    }
    let e = mcf_expand(x, depth, PrecisionCtx::new(WORK_PREC)?)?;
    Ok(e.alphas.iter().map(|a| a.to_float(WORK_PREC)).collect())
}

/// `beta_{-1} ..= beta_depth`, so `out[k + 1] = beta_k`.
fn beta_seq(alphas: &[Float]) -> Vec<Float> {
    let mut out = Vec::with_capacity(alphas.len() + 1);
    let mut b = Float::with_val(WORK_PREC, 1u32);
    out.push(b.clone());
    for a in alphas {
        b *= a;
        out.push(b.clone());
    }
    out
}

fn distance(x: &RealValue, y: &RealValue) -> Float {
    let d = Float::with_val(WORK_PREC, x.to_float(WORK_PREC) - y.to_float(WORK_PREC));
    d.abs()
}

fn same_value(x: &RealValue, y: &RealValue) -> bool {
    match (x.exact(), y.exact()) {
        (Some(a), Some(b)) => a == b,
        _ => distance(x, y).is_zero(),
    }
}

/// Both sequences up to `depth`; a rational input simply contributes zeros past its end.
fn paired(x: &RealValue, y: &RealValue, depth: usize) -> Result<(Vec<Float>, Vec<Float>)> {
    let mut ax = alpha_seq(x, depth)?;
    let mut ay = alpha_seq(y, depth)?;
    ax.resize(depth + 1, Float::new(WORK_PREC));
    ay.resize(depth + 1, Float::new(WORK_PREC));
    Ok((ax, ay))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumLemmaReport {
    pub a_exponent: f64,
    pub lhs: f64,
    /// `|alpha - alpha'|^{1/2}`.
    pub rhs_base: f64,
    pub ratio: f64,
    pub truncation_depth: usize,
    /// `2 beta_depth (1/2)^a`.
    pub truncation_error_bound: f64,
}

/// `sum_{j=1}^{depth} beta_{j-1}(alpha) |alpha_j - alpha'_j|^a` against `|alpha - alpha'|^{1/2}`.
pub fn sum_lemma_check(
    alpha: &RealValue,
    alpha_p: &RealValue,
    a: f64,
    depth: usize,
) -> Result<SumLemmaReport> {
    if !(a > 0.5 && a < 1.0) {
        return Err(Error::BadParams(format!("exponent {a} outside (1/2, 1)")));
    }
    if depth == 0 {
        return Err(Error::BadParams("depth must be positive".into()));
    }
    if same_value(alpha, alpha_p) {
        return Err(Error::Equal);
    }
    let (ax, ay) = paired(alpha, alpha_p, depth)?;
    let betas = beta_seq(&ax);
    let mut lhs = Float::new(WORK_PREC);
    for j in 1..=depth {
        let d = Float::with_val(WORK_PREC, &ax[j] - &ay[j]).abs();
        if d.is_zero() {
            continue;
        }
        let term = d.ln() * a;
        lhs += term.exp() * &betas[j];
    }
    let rhs = distance(alpha, alpha_p).sqrt();
    let ratio = Float::with_val(WORK_PREC, &lhs / &rhs).to_f64();
    Ok(SumLemmaReport {
        a_exponent: a,
        lhs: lhs.to_f64(),
        rhs_base: rhs.to_f64(),
        ratio,
        truncation_depth: depth,
        truncation_error_bound: 2.0 * betas[depth + 1].to_f64() * 0.5f64.powf(a),
    })
}

/// `(sum_k |beta_{k-1} - beta'_{k-1}|, 2 sum_j beta_{j-1} |alpha_j - alpha'_j|)` for `k, j <= depth`.
///
/// The truncated sums already satisfy `lhs <= rhs`; the only slack is rounding.
pub fn beta_diff_check(alpha: &RealValue, alpha_p: &RealValue, depth: usize) -> Result<(f64, f64)> {
    if same_value(alpha, alpha_p) {
        return Err(Error::Equal);
    }
    let (ax, ay) = paired(alpha, alpha_p, depth)?;
    let bx = beta_seq(&ax);
    let by = beta_seq(&ay);
    let mut lhs = Float::new(WORK_PREC);
    let mut rhs = Float::new(WORK_PREC);
    for k in 0..=depth {
        lhs += Float::with_val(WORK_PREC, &bx[k] - &by[k]).abs();
        let d = Float::with_val(WORK_PREC, &ax[k] - &ay[k]).abs();
        rhs += d * &bx[k];
    }
    rhs *= 2u32;
    Ok((lhs.to_f64(), rhs.to_f64()))
}

/// Relative rounding slack allowed by callers comparing the two sides of [`beta_diff_check`].
pub const BETA_DIFF_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Far,
    Near,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairSampler {
    pub base: HighTypeSampler,
    /// Probability that a pair shares a prefix.
    pub near_fraction: f64,
    /// Longest shared prefix (in symbols after `a0`).
    pub max_prefix: usize,
    /// Probability that a near pair diverges by flipping the sign of one symbol.
    pub flip_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePair {
    pub index: usize,
    pub x: RealValue,
    pub y: RealValue,
    pub kind: PairKind,
    pub prefix: usize,
}

impl PairSampler {
    pub fn new(base: HighTypeSampler, max_prefix: usize) -> Self {
        PairSampler {
            base,
            near_fraction: 0.5,
            max_prefix,
            flip_fraction: 0.5,
        }
    }

    fn tail<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> (Vec<McfSymbol>, McfSymbol) {
        let cfg = HighTypeSampler {
            depth: len.max(1),
            ..self.base
        };
        let s = draw_stream(&cfg, rng);
        (s.preperiod, s.period[0])
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, index: usize) -> SamplePair {
        let wrap = |pre: Vec<McfSymbol>, per: McfSymbol| {
            RealValue::SymbolDefined(SymbolStream::new(0, Sign::Plus, pre, vec![per]))
        };
        let depth = self.base.depth;
        if !rng.gen_bool(self.near_fraction) {
            let (p, q) = self.tail(rng, depth);
            let (r, s) = self.tail(rng, depth);
            let pair = SamplePair {
                index,
                x: wrap(p, q),
                y: wrap(r, s),
                kind: PairKind::Far,
                prefix: 0,
            };
            if same_value(&pair.x, &pair.y) {
                return self.draw(rng, index);
            }
            return pair;
        }
        let n = rng.gen_range(0..=self.max_prefix);
        let shared: Vec<McfSymbol> = (0..n).map(|_| self.base.draw_symbol(rng)).collect();
        let flip_floor = self.base.n_min.max(3);
        let (u, v) = if flip_floor <= self.base.a_max && rng.gen_bool(self.flip_fraction) {
            let a = rng.gen_range(flip_floor..=self.base.a_max);
            (McfSymbol::plus(a).unwrap(), McfSymbol::minus(a).unwrap())
        } else {
            let u = self.base.draw_symbol(rng);
            let mut v = self.base.draw_symbol(rng);
            while v == u {
                v = self.base.draw_symbol(rng);
            }
            (u, v)
        };
        let rest = depth.saturating_sub(n + 1).max(1);
        let build = |head: McfSymbol, rng: &mut R| {
            let (t, per) = self.tail(rng, rest);
            let mut pre = shared.clone();
            pre.push(head);
            pre.extend(t);
            wrap(pre, per)
        };
        let x = build(u, rng);
        let y = build(v, rng);
        SamplePair {
            index,
            x,
            y,
            kind: PairKind::Near,
            prefix: n,
        }
    }

    pub fn draw_many(&self, count: usize, seed: u64) -> Vec<SamplePair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|i| self.draw(&mut rng, i)).collect()
    }
}

/// Runs [`split_generation`] on a sampled pair; the search depth covers the shared prefix.
pub fn label_pair(p: &SamplePair) -> Result<SplitReport> {
    split_generation(&p.x, &p.y, p.prefix + 8)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trend {
    pub windows: usize,
    /// Slope of the window maxima against `-log|alpha - alpha'|`.
    pub slope: f64,
    pub slope_stderr: f64,
}

impl Trend {
    /// No upward trend beyond `k` standard errors.
    pub fn flat_within(&self, k: f64) -> bool {
        self.slope <= k * self.slope_stderr
    }
}

/// Splits `(distance, ratio)` points into `windows` equal-count groups by
/// distance and regresses each group's maximum ratio on the group's mean `-log distance`.
pub fn windowed_max_trend(points: &[(f64, f64)], windows: usize) -> Result<Trend> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(d, r)| *d > 0.0 && r.is_finite())
        .collect();
    if windows < 3 || pts.len() < windows {
        return Err(Error::BadParams(format!(
            "need at least {windows} points and 3 windows (got {})",
            pts.len()
        )));
    }
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for w in 0..windows {
        let lo = w * pts.len() / windows;
        let hi = (w + 1) * pts.len() / windows;
        let chunk = &pts[lo..hi];
        xs.push(chunk.iter().map(|(d, _)| -d.ln()).sum::<f64>() / chunk.len() as f64);
        ys.push(chunk.iter().map(|p| p.1).fold(f64::MIN, f64::max));
    }
    let fit = linear_fit(&xs, &ys);
    Ok(Trend {
        windows,
        slope: fit.slope,
        slope_stderr: fit.slope_stderr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumLemmaScan {
    pub pairs: usize,
    pub a_exponent: f64,
    pub depth: usize,
    pub max_ratio: f64,
    pub case_a: usize,
    pub case_b: usize,
    pub near: usize,
    /// Over the whole corpus; rises while far pairs dominate.
    pub trend: Trend,
    /// Over near pairs sharing at least [`ASYMPTOTIC_PREFIX`] symbols.
    pub asymptotic_trend: Trend,
    /// `(distance, ratio)` per pair, in pair order.
    pub points: Vec<(f64, f64)>,
}

/// Shared-prefix length from which the partial sums over `j < n0` have settled.
pub const ASYMPTOTIC_PREFIX: usize = 4;

/// [`sum_lemma_check`] over a sampled corpus, with split-case coverage counts.
pub fn sum_lemma_scan(
    pairs: &[SamplePair],
    a: f64,
    depth: usize,
    windows: usize,
) -> Result<SumLemmaScan> {
    let mut points = Vec::with_capacity(pairs.len());
    let (mut case_a, mut case_b, mut near) = (0, 0, 0);
    for p in pairs {
        let r = sum_lemma_check(&p.x, &p.y, a, depth)?;
        points.push((r.rhs_base * r.rhs_base, r.ratio));
        if p.kind == PairKind::Near {
            near += 1;
        }
        match label_pair(p)?.case {
            SplitCase::A => case_a += 1,
            SplitCase::B => case_b += 1,
        }
    }
    let max_ratio = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let trend = windowed_max_trend(&points, windows)?;
    let deep: Vec<(f64, f64)> = points
        .iter()
        .zip(pairs)
        .filter(|(_, p)| p.kind == PairKind::Near && p.prefix >= ASYMPTOTIC_PREFIX)
        .map(|(x, _)| *x)
        .collect();
    let asymptotic_trend = windowed_max_trend(&deep, windows)?;
    Ok(SumLemmaScan {
        pairs: pairs.len(),
        a_exponent: a,
        depth,
        max_ratio,
        case_a,
        case_b,
        near,
        trend,
        asymptotic_trend,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRow {
    pub index: usize,
    pub kind: PairKind,
    pub prefix: usize,
    pub alpha: String,
    pub alpha_p: String,
    pub distance: f64,
    pub upsilon: f64,
    pub upsilon_p: f64,
    pub delta: f64,
    pub error_bar: f64,
    /// Absent for excluded pairs.
    pub ratio: Option<f64>,
}

impl PairRow {
    pub fn excluded(&self) -> bool {
        self.ratio.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderReport {
    pub pairs_evaluated: usize,
    pub excluded: usize,
    pub max_ratio: f64,
    pub quantiles: Vec<(f64, f64)>,
    pub worst_pair: (String, String),
    pub exponent: f64,
    pub rows: Vec<PairRow>,
}

pub const QUANTILES: [f64; 4] = [0.5, 0.9, 0.95, 0.99];

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[idx]
}

impl HolderReport {
    /// Recomputes ratios for another exponent from the stored rows.
    pub fn rescore(&self, exponent: f64) -> Result<HolderReport> {
        build_report(self.rows.clone(), exponent)
    }

    pub fn trend(&self, windows: usize) -> Result<Trend> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter_map(|r| r.ratio.map(|q| (r.distance, q)))
            .collect();
        windowed_max_trend(&pts, windows)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "pairs_evaluated": self.pairs_evaluated,
            "excluded": self.excluded,
            "max_ratio": self.max_ratio,
            "quantiles": self.quantiles,
            "worst_pair": [self.worst_pair.0, self.worst_pair.1],
            "exponent": self.exponent,
        })
    }

    pub const CSV_HEADER: &'static str =
        "# holder-scan v1\nindex,kind,prefix,alpha,alpha_p,x_distance,y_delta,upsilon,upsilon_p,error_bar,ratio";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let kind = match r.kind {
                PairKind::Far => "far",
                PairKind::Near => "near",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{:e},{:e},{},{},{:e},{}\n",
                r.index,
                kind,
                r.prefix,
                r.alpha,
                r.alpha_p,
                r.distance,
                r.delta,
                r.upsilon,
                r.upsilon_p,
                r.error_bar,
                r.ratio.map_or(String::from("excluded"), |q| format!("{q}")),
            ));
        }
        out
    }
}

fn build_report(mut rows: Vec<PairRow>, exponent: f64) -> Result<HolderReport> {
    for r in rows.iter_mut() {
        let keep = r.distance > 0.0 && r.delta > r.error_bar;
        r.ratio = keep.then(|| r.delta / r.distance.powf(exponent));
    }
    let kept: Vec<&PairRow> = rows.iter().filter(|r| !r.excluded()).collect();
    if kept.is_empty() {
        return Err(Error::InsufficientPrecision);
    }
    let worst = kept
        .iter()
        .max_by(|a, b| a.ratio.unwrap().total_cmp(&b.ratio.unwrap()))
        .expect("nonempty");
    let mut sorted: Vec<f64> = kept.iter().map(|r| r.ratio.unwrap()).collect();
    sorted.sort_by(f64::total_cmp);
    Ok(HolderReport {
        pairs_evaluated: kept.len(),
        excluded: rows.len() - kept.len(),
        max_ratio: worst.ratio.unwrap(),
        quantiles: QUANTILES
            .iter()
            .map(|&p| (p, quantile(&sorted, p)))
            .collect(),
        worst_pair: (worst.alpha.clone(), worst.alpha_p.clone()),
        exponent,
        rows,
    })
}

/// Everything needed to replay one Hölder scan.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderScanConfig {
    pub sampler: PairSampler,
    pub pairs: usize,
    pub seed: u64,
    pub exponent: f64,
    pub upsilon: UpsilonConfig,
}

/// Evaluates `Upsilon` on both members of a pair.
pub fn evaluate_pair(
    p: &SamplePair,
    cfg: &UpsilonConfig,
) -> Result<(UpsilonSample, UpsilonSample)> {
    Ok((upsilon(&p.x, cfg)?, upsilon(&p.y, cfg)?))
}

fn pair_row(p: &SamplePair, cfg: &UpsilonConfig) -> Result<PairRow> {
    let (ux, uy) = evaluate_pair(p, cfg)?;
    Ok(PairRow {
        index: p.index,
        kind: p.kind,
        prefix: p.prefix,
        alpha: p.x.to_spec(),
        alpha_p: p.y.to_spec(),
        distance: distance(&p.x, &p.y).to_f64(),
        upsilon: ux.upsilon,
        upsilon_p: uy.upsilon,
        delta: (ux.upsilon - uy.upsilon).abs(),
        error_bar: ux.error_bar + uy.error_bar,
        ratio: None,
    })
}

/// `max |Upsilon(alpha) - Upsilon(alpha')| / |alpha - alpha'|^exponent` over a sampled corpus.
///
/// Pairs whose `|Delta Upsilon|` does not clear the combined error bar are excluded.
pub fn holder_scan(cfg: &HolderScanConfig) -> Result<HolderReport> {
    let pairs = cfg.sampler.draw_many(cfg.pairs, cfg.seed);
    let rows = pairs
        .iter()
        .map(|p| pair_row(p, &cfg.upsilon))
        .collect::<Result<Vec<_>>>()?;
    build_report(rows, cfg.exponent)
}

/// Standard Hölder-scan corpus: `HT_N` pairs with entries up to `a_max`.
pub fn default_pair_sampler(n_min: u64, a_max: u64) -> Result<PairSampler> {
    Ok(PairSampler::new(HighTypeSampler::new(n_min, a_max, 24)?, 4))
}

/// Corpus for the arithmetic checks: near pairs reach twelve shared symbols.
pub fn sum_lemma_pair_sampler(n_min: u64, a_max: u64) -> Result<PairSampler> {
    Ok(PairSampler::new(
        HighTypeSampler::new(n_min, a_max, 24)?,
        12,
    ))
}

/// `log(2 pi)`, the limit of `Upsilon(P_alpha)` as `alpha -> 0`.
pub fn limit_target() -> f64 {
    (2.0 * std::f64::consts::PI).ln()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitRow {
    pub k: u32,
    pub alpha: RealValue,
    pub upsilon: UpsilonSample,
    /// `Upsilon(P_{-alpha})`.
    pub mirror: UpsilonSample,
    pub target_gap: f64,
}

impl LimitRow {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "k": self.k,
            "alpha": self.alpha.to_spec(),
            "alpha_f64": self.alpha.to_f64(),
            "upsilon": self.upsilon.upsilon,
            "upsilon_mirror": self.mirror.upsilon,
            "error_bar": self.upsilon.error_bar,
            "target_gap": self.target_gap,
        })
    }
}

/// `[(10^k, +)]` followed by the periodic `(3, -)` tail.
pub fn limit_alpha(k: u32) -> Result<RealValue> {
    let a = 10u64.checked_pow(k).ok_or(Error::EntryOverflow)?;
    let stream = SymbolStream::new(
        0,
        Sign::Plus,
        vec![McfSymbol::plus(a)?],
        vec![McfSymbol::minus(3)?],
    );
    Ok(RealValue::from_quadratic(stream.to_quadratic()?))
}

/// `Upsilon(P_{alpha_k}) - log(2 pi)` for each `k`; the first entry `10^k`
/// enters the tail assumption so the Brjuno bound stays honest.
pub fn limit_at_zero(ks: &[u32], cfg: &UpsilonConfig) -> Result<Vec<LimitRow>> {
    ks.iter()
        .map(|&k| {
            let alpha = limit_alpha(k)?;
            let local = UpsilonConfig {
                tail: match cfg.tail {
                    TailAssumption::Bounded(m) => TailAssumption::Bounded(m.max(10u64.pow(k))),
                    TailAssumption::Unbounded => TailAssumption::Unbounded,
                },
                ..cfg.clone()
            };
            let u = upsilon(&alpha, &local)?;
            let m = upsilon(&alpha.neg(), &local)?;
            Ok(LimitRow {
                k,
                target_gap: u.upsilon - limit_target(),
                alpha,
                upsilon: u,
                mirror: m,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundScan {
    pub samples: usize,
    pub min_upsilon: f64,
    pub max_upsilon: f64,
    /// `max(0, -min Upsilon)`: the constant `C` in `log r >= -Y - C` seen on the corpus.
    pub c_measured: f64,
    pub worst: String,
}

/// `Upsilon` over independent high-type samples.
pub fn upsilon_scan(
    sampler: &HighTypeSampler,
    count: usize,
    seed: u64,
    cfg: &UpsilonConfig,
) -> Result<(LowerBoundScan, Vec<UpsilonSample>)> {
    if count == 0 {
        return Err(Error::BadParams("empty scan".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let s = draw_stream(sampler, &mut rng);
        out.push(upsilon(&RealValue::SymbolDefined(s), cfg)?);
    }
    let worst = out
        .iter()
        .min_by(|a, b| a.upsilon.total_cmp(&b.upsilon))
        .unwrap();
    let min = worst.upsilon;
    let max = out.iter().map(|u| u.upsilon).fold(f64::MIN, f64::max);
    Ok((
        LowerBoundScan {
            samples: count,
            min_upsilon: min,
            max_upsilon: max,
            c_measured: (-min).max(0.0),
            worst: worst.alpha.to_spec(),
        },
        out,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DlogFit {
    pub exponent: f64,
    pub pairs: usize,
    /// Largest observed `d_log(x, y) / |x - y|^a`.
    pub fitted: f64,
    pub closed_form: f64,
    /// Pairs exceeding `closed_form * (1 + 1e-9)`.
    pub violations: usize,
}

/// Fits the constant in `d_log(x, y) <= M |x - y|^a` from uniform pairs in `[-1/2, 1/2]`.
pub fn dlog_holder_fit(a: f64, pairs: usize, seed: u64) -> Result<DlogFit> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::BadParams(format!("exponent {a} outside (0, 1)")));
    }
    let closed = crate::numeric::dlog_holder_constant(a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut fitted, mut violations) = (0.0f64, 0usize);
    for _ in 0..pairs {
        let x = Float::with_val(128, rng.gen_range(-0.5..=0.5f64));
        let y = Float::with_val(128, rng.gen_range(-0.5..=0.5f64));
        let h = Float::with_val(128, &x - &y).abs().to_f64();
        if h == 0.0 {
            continue;
        }
        let r = crate::numeric::d_log_float(&x, &y).to_f64() / h.powf(a);
        fitted = fitted.max(r);
        if r > closed * (1.0 + 1e-9) {
            violations += 1;
        }
    }
    Ok(DlogFit {
        exponent: a,
        pairs,
        fitted,
        closed_form: closed,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn silver() -> RealValue {
        RealValue::surd(-1, 1, 1, 2).unwrap()
    }

    fn golden_small() -> RealValue {
        // (sqrt 5 - 1)/2 reduced into [-1/2, 1/2]
        RealValue::surd(-3, 1, 2, 5).unwrap()
    }

    #[test]
    fn equal_inputs_rejected() {
        assert_eq!(
            sum_lemma_check(&silver(), &silver(), 0.75, 20),
            Err(Error::Equal)
        );
        assert_eq!(beta_diff_check(&silver(), &silver(), 20), Err(Error::Equal));
    }

    #[test]
    fn sum_lemma_brute_force() {
        // alpha_j are constant for both: sqrt2-1 and its golden counterpart 1/phi^2 ... direct sum.
        let x = silver();
        let y = RealValue::surd(-1, 1, 2, 5).unwrap();
        let r = sum_lemma_check(&x, &y, 0.75, 60).unwrap();
        let ex = mcf_expand(&x, 60, PrecisionCtx::new(256).unwrap()).unwrap();
        let ey = mcf_expand(&y, 60, PrecisionCtx::new(256).unwrap()).unwrap();
        let mut s = 0.0;
        for j in 1..=60 {
            let d = (ex.alphas[j].to_f64() - ey.alphas[j].to_f64()).abs();
            s += ex.betas[j].to_f64() * d.powf(0.75);
        }
        let base = (x.to_f64() - y.to_f64()).abs().sqrt();
        assert!((r.lhs - s).abs() < 1e-13, "{} {}", r.lhs, s);
        assert!((r.ratio - s / base).abs() < 1e-12);
        assert!(r.truncation_error_bound < 1e-20);
    }

    #[test]
    fn beta_diff_direct() {
        let (lhs, rhs) = beta_diff_check(&silver(), &golden_small(), 40).unwrap();
        let ex = mcf_expand(&silver(), 40, PrecisionCtx::new(256).unwrap()).unwrap();
        let ey = mcf_expand(&golden_small(), 40, PrecisionCtx::new(256).unwrap()).unwrap();
        let mut l = 0.0;
        let mut r = 0.0;
        for k in 0..=40 {
            l += (ex.betas[k].to_f64() - ey.betas[k].to_f64()).abs();
            r += 2.0 * ex.betas[k].to_f64() * (ex.alphas[k].to_f64() - ey.alphas[k].to_f64()).abs();
        }
        assert!((lhs - l).abs() < 1e-12 && (rhs - r).abs() < 1e-12);
        assert!(lhs <= rhs);
    }

    #[test]
    fn stream_and_exact_paths_agree() {
        let cfg = default_pair_sampler(3, 6).unwrap();
        let p = &cfg.draw_many(1, 3)[0];
        let exact_x = RealValue::from_quadratic(p.x.exact().unwrap());
        let exact_y = RealValue::from_quadratic(p.y.exact().unwrap());
        let a = sum_lemma_check(&p.x, &p.y, 0.75, 30).unwrap();
        let b = sum_lemma_check(&exact_x, &exact_y, 0.75, 30).unwrap();
        assert!((a.lhs - b.lhs).abs() <= 1e-14 * a.lhs.max(1e-300));
    }

    #[test]
    fn sampler_covers_both_cases() {
        let cfg = default_pair_sampler(3, 6).unwrap();
        let pairs = cfg.draw_many(60, 11);
        let labels: Vec<SplitReport> = pairs.iter().map(|p| label_pair(p).unwrap()).collect();
        assert!(labels.iter().any(|l| l.case == SplitCase::A));
        assert!(labels.iter().any(|l| l.case == SplitCase::B));
        assert!(pairs
            .iter()
            .any(|p| p.kind == PairKind::Near && p.prefix >= 2));
        for (p, l) in pairs.iter().zip(&labels) {
            assert!(l.bounds_hold(), "pair {} {:?}", p.index, l);
            if p.kind == PairKind::Near {
                assert_eq!(l.n0, p.prefix + 1);
            }
        }
        assert_eq!(pairs, cfg.draw_many(60, 11));
    }

    #[test]
    fn trend_detects_slopes() {
        let up: Vec<(f64, f64)> = (1..200)
            .map(|i| (10f64.powf(-(i as f64) / 20.0), i as f64))
            .collect();
        let t = windowed_max_trend(&up, 10).unwrap();
        assert!(t.slope > 0.0 && !t.flat_within(2.0));
        let flat: Vec<(f64, f64)> = (1..200)
            .map(|i| (10f64.powf(-(i as f64) / 20.0), 1.0))
            .collect();
        assert!(windowed_max_trend(&flat, 10).unwrap().flat_within(2.0));
    }

    fn row(distance: f64, delta: f64, err: f64) -> PairRow {
        PairRow {
            index: 0,
            kind: PairKind::Far,
            prefix: 0,
            alpha: "a".into(),
            alpha_p: "b".into(),
            distance,
            upsilon: 0.0,
            upsilon_p: delta,
            delta,
            error_bar: err,
            ratio: None,
        }
    }

    #[test]
    fn report_exclusion_and_quantiles() {
        let rows = vec![
            row(0.0, 0.0, 0.0),
            row(0.25, 0.1, 1e-3),
            row(0.01, 0.05, 1e-3),
            row(0.01, 1e-4, 1e-3),
        ];
        let r = build_report(rows.clone(), 0.5).unwrap();
        assert_eq!(r.excluded, 2);
        assert_eq!(r.pairs_evaluated, 2);
        assert!((r.max_ratio - 0.5).abs() < 1e-15);
        assert!(r.quantiles.iter().all(|q| q.1 <= r.max_ratio));
        let all_bad = vec![row(0.0, 0.0, 0.0), row(0.01, 1e-4, 1e-3)];
        assert_eq!(
            build_report(all_bad, 0.5),
            Err(Error::InsufficientPrecision)
        );
        let r75 = r.rescore(0.75).unwrap();
        assert!((r75.max_ratio - 0.05 / 0.01f64.powf(0.75)).abs() < 1e-12);
        assert!(r.to_csv().lines().nth(1).unwrap().starts_with("index,kind"));
    }

    #[test]
    fn limit_alpha_shape() {
        let a = limit_alpha(1).unwrap();
        let e = mcf_expand(&a, 5, PrecisionCtx::default()).unwrap();
        assert_eq!(e.symbols[0], McfSymbol::plus(10).unwrap());
        assert!(e.symbols[1..]
            .iter()
            .all(|s| *s == McfSymbol::minus(3).unwrap()));
        assert!((a.to_f64() - 1.0 / (10.0 + 0.0)).abs() < 0.05);
        assert!((limit_target() - 1.837877).abs() < 1e-6);
    }

    #[test]
    fn dlog_fit_under_closed_form() {
        let f = dlog_holder_fit(0.5, 2000, 1).unwrap();
        assert_eq!(f.violations, 0);
        assert!(f.fitted <= f.closed_form && f.fitted > 0.5 * f.closed_form);
    }
}
