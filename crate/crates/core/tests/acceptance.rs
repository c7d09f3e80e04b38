//! The twelve acceptance criteria, one line each.
//!
//! Runs without the libtest harness so the summary is always printed.
//! Pass criterion numbers as arguments to run a subset.

use std::time::{Duration, Instant};

use rug::{Complex, Float};

use siegel_core::brjuno::{
    brjuno_eval, brjuno_periodic, brjuno_periodic_classical, TailAssumption,
};
use siegel_core::cf::{sample_classical, HighTypeSampler};
use siegel_core::holder::{
    beta_diff_check, default_pair_sampler, holder_scan, label_pair, limit_at_zero, limit_target,
    sum_lemma_pair_sampler, sum_lemma_scan, upsilon_scan, HolderReport, HolderScanConfig,
    PairSampler, BETA_DIFF_SLACK,
};
use siegel_core::intervals::{interval_of, length_ratio, measure_distortion};
use siegel_core::siegel::{
    estimate_radius, linearize, recurrence_residual, upsilon, Family, UpsilonConfig,
};
use siegel_core::{
    classical_expand, d_log, mcf_expand, reconstruct_signed, McfSymbol, PrecisionCtx, RealValue,
    Sign,
};

struct Outcome {
    pass: bool,
    detail: String,
    /// A sub-check that cannot be met by any correct implementation, reported but not fatal.
    unattainable: Option<String>,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        detail,
        unattainable: None,
    }
}

fn ctx(bits: u32) -> PrecisionCtx {
    PrecisionCtx::new(bits).unwrap()
}

fn silver() -> RealValue {
    RealValue::surd(-1, 1, 1, 2).unwrap()
}

fn golden() -> RealValue {
    RealValue::surd(-1, 1, 2, 5).unwrap()
}

fn cfg(series_n: usize, bits: u32, tail: u64) -> UpsilonConfig {
    UpsilonConfig {
        series_n,
        depth: 60,
        tail: TailAssumption::Bounded(tail),
        ctx: ctx(bits),
        family: Family::P,
    }
}

fn c01() -> Outcome {
    let t = Instant::now();
    let a = silver();
    let e = mcf_expand(&a, 64, ctx(256)).unwrap();
    let two = McfSymbol::plus(2).unwrap();
    let symbols_ok = e.symbols.len() == 64 && e.symbols.iter().all(|s| *s == two);
    let alphas_ok = e.alphas.len() == 65 && e.alphas.iter().all(|x| *x == a);
    let dt = t.elapsed();
    outcome(
        symbols_ok && alphas_ok && dt < Duration::from_secs(1),
        format!(
            "64 symbols (2,+): {symbols_ok}, alpha_n == sqrt2-1 exactly: {alphas_ok}, {dt:.2?}"
        ),
    )
}

fn c02() -> Outcome {
    let prec = 192;
    let s_exp = mcf_expand(&silver(), 40, ctx(256)).unwrap();
    let s = brjuno_eval(&s_exp, TailAssumption::Bounded(2)).unwrap();
    let s_closed = brjuno_periodic(0, &[], &[McfSymbol::plus(2).unwrap()], prec)
        .unwrap()
        .to_f64();
    let s_oracle = (1.0 + 2f64.sqrt()).ln() / (2.0 - 2f64.sqrt());

    let g_exp = mcf_expand(&golden(), 40, ctx(256)).unwrap();
    let g = brjuno_eval(&g_exp, TailAssumption::Bounded(3)).unwrap();
    let g_closed = brjuno_periodic(1, &[], &[McfSymbol::minus(3).unwrap()], prec)
        .unwrap()
        .to_f64();
    let r5 = 5f64.sqrt();
    let g_oracle = ((3.0 + r5) / 2.0).ln() / (1.0 - (3.0 - r5) / 2.0);

    let c_exp = classical_expand(&golden(), 40, ctx(256)).unwrap();
    let c = brjuno_eval(&c_exp, TailAssumption::Bounded(1)).unwrap();
    let c_closed = brjuno_periodic_classical(&[], &[1], prec).unwrap().to_f64();
    let gm = (r5 - 1.0) / 2.0;
    let c_oracle = (1.0 / gm).ln() / (1.0 - gm);

    let within = |r: &siegel_core::brjuno::BrjunoResult, closed: f64| {
        (r.value - closed).abs() <= r.tail_bound
    };
    let oracles = (s_closed - s_oracle).abs() < 1e-13
        && (g_closed - g_oracle).abs() < 1e-13
        && (c_closed - c_oracle).abs() < 1e-13
        && (s_closed - 1.504599).abs() < 1e-6
        && (g_closed - 1.55723).abs() < 1e-5
        && (c_closed - 1.259829).abs() < 1e-6;
    let enclosed = within(&s, s_closed) && within(&g, g_closed) && within(&c, c_closed);
    let tails_mod = s.tail_bound < 1e-12 && g.tail_bound < 1e-12;
    let unattainable = (c.tail_bound >= 1e-12).then(|| {
        format!(
            "classical golden tail bound {:.2e} >= 1e-12 at depth 40: the remainder itself is g^40 log(1/g)/(1-g) ~ 5.7e-9",
            c.tail_bound
        )
    });
    outcome(
        oracles && enclosed && tails_mod,
        format!(
            "silver {s_closed:.9} golden {g_closed:.9} classical {c_closed:.9}; |eval-closed| {:.1e}/{:.1e}/{:.1e}; tails {:.1e}/{:.1e}/{:.1e}",
            (s.value - s_closed).abs(),
            (g.value - g_closed).abs(),
            (c.value - c_closed).abs(),
            s.tail_bound,
            g.tail_bound,
            c.tail_bound
        ),
    )
    .with_unattainable(unattainable)
}

impl Outcome {
    fn with_unattainable(mut self, u: Option<String>) -> Self {
        self.unattainable = u;
        self
    }
}

/// `int_0^b -log t dt` via `t = b u^4`, composite Simpson in `u`.
fn quad_from_zero(b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let n = 20_000;
    let h = 1.0 / n as f64;
    let f = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            -(b * u.powi(4)).ln() * 4.0 * b * u.powi(3)
        }
    };
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn quad_dlog(x: f64, y: f64) -> f64 {
    if x.signum() * y.signum() < 0.0 {
        quad_from_zero(x.abs()) + quad_from_zero(y.abs())
    } else {
        (quad_from_zero(x.abs()) - quad_from_zero(y.abs())).abs()
    }
}

fn c03() -> Outcome {
    let half = RealValue::rational(1, 2).unwrap();
    let v = d_log(&half, &half.neg()).unwrap().value();
    let norm = (v - (1.0 + 2f64.ln())).abs();
    let mut worst: f64 = (quad_dlog(0.5, -0.5) - v).abs();
    for (p, q) in [
        (1, 7),
        (-3, 11),
        (2, 9),
        (-1, 2),
        (5, 13),
        (-2, 5),
        (1, 1000),
    ] {
        for (r, s) in [(1, 3), (-1, 4), (3, 8), (-7, 20)] {
            let x = RealValue::rational(p, q).unwrap();
            let y = RealValue::rational(r, s).unwrap();
            let d = d_log(&x, &y).unwrap().value();
            worst = worst.max((d - quad_dlog(p as f64 / q as f64, r as f64 / s as f64)).abs());
        }
    }
    outcome(
        norm < 1e-12 && worst < 1e-8,
        format!("|d_log(1/2,-1/2) - (1+log 2)| = {norm:.1e}, quadrature gap {worst:.1e}"),
    )
}

fn c04() -> Outcome {
    let t = Instant::now();
    let sampler = HighTypeSampler::new(3, 12, 16).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
    let (mut checked, mut violations, mut nesting, mut endpoints) = (0, 0, 0, 0);
    let mut c_max: f64 = 0.0;
    for _ in 0..200 {
        let stream = siegel_core::cf::draw_stream(&sampler, &mut rng);
        let x = RealValue::SymbolDefined(stream);
        let e = mcf_expand(&x, 16, ctx(256)).unwrap();
        let mut prev = None;
        for n in 0..=15 {
            let iv = interval_of(&e, n, false).unwrap();
            let c = measure_distortion(e.a0, e.s0.unwrap(), &e.symbols[..n], 2)
                .unwrap()
                .implied_c;
            c_max = c_max.max(c);
            let r = length_ratio(&iv, e.beta(n as isize - 1));
            let tol = 1e-12;
            if r < (-c).exp() * (1.0 - tol)
                || r > c.exp() * (1.0 + tol)
                || iv.contains(&x) != Some(true)
            {
                violations += 1;
            }
            let zero = RealValue::rational(0, 1).unwrap();
            let half = RealValue::rational(1, 2).unwrap();
            let s0 = e.s0.unwrap();
            let p0 = reconstruct_signed(e.a0, s0, &e.symbols[..n], &zero).unwrap();
            let p1 = reconstruct_signed(e.a0, s0, &e.symbols[..n], &half).unwrap();
            let is = |p: &RealValue, q: &rug::Rational| {
                p.cmp_rational(q) == Some(std::cmp::Ordering::Equal)
            };
            let exact =
                (is(&p0, iv.lo()) && is(&p1, iv.hi())) || (is(&p1, iv.lo()) && is(&p0, iv.hi()));
            if !exact {
                endpoints += 1;
            }
            if let Some(p) = &prev {
                if !siegel_core::FundInterval::encloses(p, &iv) {
                    nesting += 1;
                }
            }
            prev = Some(iv);
            checked += 1;
        }
    }
    let dt = t.elapsed();
    outcome(
        violations == 0 && nesting == 0 && endpoints == 0 && dt < Duration::from_secs(60),
        format!(
            "{checked} intervals, ratio violations {violations}, nesting {nesting}, endpoint {endpoints}, max C {c_max:.3}, {dt:.1?}"
        ),
    )
}

fn sum_lemma_pairs() -> PairSampler {
    sum_lemma_pair_sampler(3, 6).unwrap()
}

fn c05() -> Outcome {
    let t = Instant::now();
    let pairs = sum_lemma_pairs().draw_many(1000, 5);
    let s40 = sum_lemma_scan(&pairs, 0.75, 40, 10).unwrap();
    let s80 = sum_lemma_scan(&pairs, 0.75, 80, 10).unwrap();
    let change = (s80.max_ratio - s40.max_ratio).abs() / s40.max_ratio;
    let dt = t.elapsed();
    let pass = s40.max_ratio.is_finite()
        && change < 0.05
        && s40.case_a > 0
        && s40.case_b > 0
        && s40.near > 0
        && s40.near < s40.pairs
        && s40.asymptotic_trend.flat_within(2.0)
        && s80.asymptotic_trend.flat_within(2.0)
        && dt < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "max ratio {:.6} (depth 40) / {:.6} (depth 80), change {:.1e}; case A {} B {}, near {}; window-max slope {:.3e} +- {:.3e} (prefix >= 4), {:.3e} +- {:.3e} (all); {dt:.1?}",
            s40.max_ratio,
            s80.max_ratio,
            change,
            s40.case_a,
            s40.case_b,
            s40.near,
            s40.asymptotic_trend.slope,
            s40.asymptotic_trend.slope_stderr,
            s40.trend.slope,
            s40.trend.slope_stderr
        ),
    )
}

fn c06() -> Outcome {
    let t = Instant::now();
    let pairs = sum_lemma_pairs().draw_many(10_000, 6);
    let mut violations = 0;
    let mut tightest: f64 = 0.0;
    for p in &pairs {
        let (lhs, rhs) = beta_diff_check(&p.x, &p.y, 40).unwrap();
        if lhs > rhs * (1.0 + BETA_DIFF_SLACK) {
            violations += 1;
        }
        tightest = tightest.max(lhs / rhs);
    }
    let dt = t.elapsed();
    outcome(
        violations == 0 && dt < Duration::from_secs(60),
        format!("10000 pairs, violations {violations}, max lhs/rhs {tightest:.4}, {dt:.1?}"),
    )
}

fn c07() -> Outcome {
    let t = Instant::now();
    let bits = 256;
    let a = golden();
    let s = linearize(&a, 512, ctx(bits)).unwrap();
    let m = linearize(&a.neg(), 512, ctx(bits)).unwrap();
    let l = s.lambda.clone();
    let l2 = Complex::with_val(bits, &l * &l);
    let l3 = Complex::with_val(bits, &l2 * &l);
    let d2 = Complex::with_val(bits, &l2 - &l);
    let d3 = Complex::with_val(bits, &l3 - &l);
    let b2 = Complex::with_val(bits, 1u32) / &d2;
    let b3 = Complex::with_val(bits, 2u32) / Complex::with_val(bits, &d2 * &d3);
    let abs = |z: &Complex| Float::with_val(bits, z.abs_ref()).to_f64();
    let rel = |x: &Complex, y: &Complex| abs(&Complex::with_val(bits, x - y)) / abs(y);
    let e2 = rel(s.b(2), &b2);
    let e3 = rel(s.b(3), &b3);
    let mut conj_err: f64 = 0.0;
    for n in 1..=512 {
        let c = Complex::with_val(bits, s.b(n).conj_ref());
        conj_err = conj_err.max(rel(m.b(n), &c));
    }
    let res = recurrence_residual(&s);
    let tol = 2f64.powi(-(bits as i32) + 10);
    let half = 2f64.powi(-(bits as i32) / 2);
    let dt = t.elapsed();
    outcome(
        e2 < tol && e3 < tol && conj_err < tol && res < half && dt < Duration::from_secs(10),
        format!("b2 {e2:.1e}, b3 {e3:.1e}, conjugation {conj_err:.1e}, residual {res:.1e} < {half:.1e}; {dt:.1?}"),
    )
}

fn c08() -> Outcome {
    let t = Instant::now();
    let a = golden();
    let r1 = estimate_radius(&linearize(&a, 1024, ctx(512)).unwrap()).unwrap();
    let r2 = estimate_radius(&linearize(&a, 2048, ctx(1024)).unwrap()).unwrap();
    let agree = (r1.r_hat - r2.r_hat).abs() / r2.r_hat;
    let h1 = r1.estimator_gap();
    let h2 = r2.estimator_gap();
    let dt = t.elapsed();
    outcome(
        agree < 0.01 && h1 < 0.05 && h2 < 0.05 && r1.r_hat <= 2.1 && r2.r_hat <= 2.1 && dt < Duration::from_secs(300),
        format!(
            "r(1024,512b) {:.6}, r(2048,1024b) {:.6}, rel diff {agree:.2e}; Hadamard gap {h1:.2e}/{h2:.2e}; {dt:.1?}",
            r1.r_hat, r2.r_hat
        ),
    )
}

fn c09() -> Outcome {
    let t = Instant::now();
    let sampler = HighTypeSampler::new(3, 6, 24).unwrap();
    let c = cfg(1024, 128, 6);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
    let mut sym_fail = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = RealValue::SymbolDefined(siegel_core::cf::draw_stream(&sampler, &mut rng));
        let u = upsilon(&x, &c).unwrap();
        let v = upsilon(&x.neg(), &c).unwrap();
        let d = (u.upsilon - v.upsilon).abs();
        worst = worst.max(d);
        if d > u.error_bar + v.error_bar {
            sym_fail += 1;
        }
    }
    let (scan, _) = upsilon_scan(&sampler, 100, 90, &c).unwrap();
    let dt = t.elapsed();
    outcome(
        sym_fail == 0 && scan.min_upsilon.is_finite() && scan.c_measured.is_finite() && dt < Duration::from_secs(600),
        format!(
            "symmetry failures {sym_fail}/20 (max |diff| {worst:.1e}); HT_3 scan min {:.4} max {:.4}, measured C {:.4}; {dt:.1?}",
            scan.min_upsilon, scan.max_upsilon, scan.c_measured
        ),
    )
}

fn c10() -> Outcome {
    let t = Instant::now();
    let rows = limit_at_zero(&[1, 2, 3], &cfg(4096, 128, 3)).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| r.target_gap).collect();
    let monotone = gaps.windows(2).all(|w| w[1].abs() < w[0].abs());
    let symmetric = rows.iter().all(|r| {
        (r.upsilon.upsilon - r.mirror.upsilon).abs() <= r.upsilon.error_bar + r.mirror.error_bar
    });
    let dt = t.elapsed();
    outcome(
        monotone && symmetric && dt < Duration::from_secs(900),
        format!(
            "target log 2pi = {:.6}; gaps {}; symmetric {symmetric}; {dt:.1?}",
            limit_target(),
            gaps.iter()
                .enumerate()
                .map(|(i, g)| format!("k={}: {g:+.5}", i + 1))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn scan(seed: u64, series_n: usize) -> HolderReport {
    holder_scan(&HolderScanConfig {
        sampler: default_pair_sampler(3, 6).unwrap(),
        pairs: 100,
        seed,
        exponent: 0.5,
        upsilon: cfg(series_n, 128, 6),
    })
    .unwrap()
}

fn c11() -> Outcome {
    let t = Instant::now();
    let runs = [(1, 1024), (2, 1024), (1, 2048), (2, 2048)];
    let reports: Vec<HolderReport> = runs.iter().map(|&(s, n)| scan(s, n)).collect();
    let maxes: Vec<f64> = reports.iter().map(|r| r.max_ratio).collect();
    let hi = maxes.iter().cloned().fold(f64::MIN, f64::max);
    let lo = maxes.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (hi - lo) / hi;
    let pairs = default_pair_sampler(3, 6).unwrap().draw_many(100, 1);
    let split_ok = pairs
        .iter()
        .all(|p| label_pair(p).map(|l| l.bounds_hold()).unwrap_or(false));
    let r75 = reports[0].rescore(0.75).unwrap();
    let trend75 = r75.trend(8).unwrap();
    let trend50 = reports[0].trend(8).unwrap();
    let dt = t.elapsed();
    outcome(
        hi.is_finite() && spread <= 0.15 && split_ok && trend75.slope > 0.0 && dt < Duration::from_secs(1800),
        format!(
            "max ratio {} (spread {:.1}%), excluded {}; split bounds hold {split_ok}; window-max slope 1/2: {:.3}+-{:.3}, 3/4: {:.3}+-{:.3} (max {:.2}); {dt:.1?}",
            maxes.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join("/"),
            100.0 * spread,
            reports.iter().map(|r| r.excluded.to_string()).collect::<Vec<_>>().join("/"),
            trend50.slope,
            trend50.slope_stderr,
            trend75.slope,
            trend75.slope_stderr,
            r75.max_ratio
        ),
    )
}

fn c12() -> Outcome {
    let t = Instant::now();
    let (mut n_checked, mut violations) = (0, 0);
    for n_min in [2u64, 3, 5] {
        for seed in 0..500u64 {
            let (x, c) = sample_classical(n_min, n_min + 20, 20, seed).unwrap();
            let m = mcf_expand(&x, 20, ctx(256)).unwrap();
            let same = m.a0 == 0
                && m.s0 == Some(Sign::Plus)
                && c.entries
                    .iter()
                    .zip(&m.symbols)
                    .all(|(&a, s)| *s == McfSymbol::plus(a).unwrap())
                && m.symbols.len() == c.entries.len();
            if !same {
                violations += 1;
            }
            n_checked += 1;
        }
    }
    let dt = t.elapsed();
    outcome(
        violations == 0 && dt < Duration::from_secs(30),
        format!("{n_checked} classical samples (N = 2, 3, 5), violations {violations}; {dt:.1?}"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "exact periodic expansion", c01),
        (2, "Brjuno closed forms", c02),
        (3, "metric normalization", c03),
        (4, "distortion and interval laws", c04),
        (5, "sum lemma", c05),
        (6, "beta-difference bound", c06),
        (7, "linearization sanity", c07),
        (8, "radius stability", c08),
        (9, "Upsilon properties", c09),
        (10, "limit at zero", c10),
        (11, "Hölder modulus", c11),
        (12, "high-type inclusion", c12),
    ];
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (k, name, f) in criteria {
        if !wanted.is_empty() && !wanted.contains(&k) {
            continue;
        }
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[acceptance {k:02}] {tag} {name}: {}", o.detail);
        if let Some(u) = o.unattainable {
            println!("[acceptance {k:02}] UNATTAINABLE sub-check: {u}");
        }
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
