//! Fundamental and extended fundamental intervals, distortion, and the
//! split-generation analysis of a pair of reals.
//!
//! A generation-`n` interval is the set of reals whose expansion starts with
//! `(a0, s0), (a1, s1), ..., (an, sn)`. Its endpoints are the images of the
//! tails `0` and `1/2` under the symbol Möbius map, hence exact rationals.

use std::fmt::Write as _;

use rug::{Float, Rational};

use crate::cf::{mcf_expand, McfExpansion, McfSymbol, Mobius, Sign};
use crate::error::{Error, Result};
use crate::numeric::{PrecisionCtx, RealValue};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundInterval {
    pub generation: usize,
    pub a0: i64,
    pub s0: Sign,
    pub symbols: Vec<McfSymbol>,
    lo: Rational,
    hi: Rational,
    pub extended: bool,
}

impl FundInterval {
    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn length(&self) -> Rational {
        Rational::from(&self.hi - &self.lo)
    }

    /// Open-interval membership; `None` when a ball cannot decide.
    pub fn contains(&self, x: &RealValue) -> Option<bool> {
        use std::cmp::Ordering::*;
        let above = x.cmp_rational(&self.lo)?;
        let below = x.cmp_rational(&self.hi)?;
        Some(above == Greater && below == Less)
    }

    /// `lo <= other.lo` and `other.hi <= hi`.
    pub fn encloses(&self, other: &FundInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn touches(&self, other: &FundInterval) -> bool {
        self.hi == other.lo || other.hi == self.lo
    }

    pub fn symbol_string(&self) -> String {
        let mut out = format!("({},{})", self.a0, self.s0.as_char());
        for s in &self.symbols {
            out.push_str(&s.to_string());
        }
        out
    }
}

fn signed_shift(a0: i64, s0: Sign, x: Rational) -> Rational {
    let x = if s0 == Sign::Plus { x } else { -x };
    x + a0
}

fn ordered(a0: i64, s0: Sign, x: Rational, y: Rational) -> (Rational, Rational) {
    let (x, y) = (signed_shift(a0, s0, x), signed_shift(a0, s0, y));
    if x < y {
        (x, y)
    } else {
        (y, x)
    }
}

/// The generation-`symbols.len()` interval coded by `(a0, s0), symbols`.
///
/// When `extended` is set, the last symbol `(a, s)` is widened to the union of
/// `(b, +)` and `(b + 1, -)` with `b = a` for `+` and `b = a - 1` for `-`,
/// i.e. `alpha_{n-1} in (1/(b+1), 1/b)`. At generation 0 this is the unit
/// interval with integer part `a0` (for `s0 = +`) or `a0 - 1` (for `s0 = -`).
pub fn fundamental_interval(
    a0: i64,
    s0: Sign,
    symbols: &[McfSymbol],
    extended: bool,
) -> Result<FundInterval> {
    for s in symbols {
        McfSymbol::new(s.a(), s.s())?;
    }
    let n = symbols.len();
    let (lo, hi) = if !extended {
        let m = Mobius::from_symbols(symbols);
        let x = m.apply_rational(&Rational::new())?;
        let y = m.apply_rational(&Rational::from((1, 2)))?;
        ordered(a0, s0, x, y)
    } else if n == 0 {
        ordered(a0, s0, Rational::new(), Rational::from(1))
    } else {
        let b = symbols[n - 1].floor_entry();
        let m = Mobius::from_symbols(&symbols[..n - 1]);
        let x = m.apply_rational(&Rational::from((1, b + 1)))?;
        let y = m.apply_rational(&Rational::from((1, b)))?;
        ordered(a0, s0, x, y)
    };
    Ok(FundInterval {
        generation: n,
        a0,
        s0,
        symbols: symbols.to_vec(),
        lo,
        hi,
        extended,
    })
}

/// The generation-`n` interval containing the expanded real.
pub fn interval_of(exp: &McfExpansion, n: usize, extended: bool) -> Result<FundInterval> {
    if n > exp.symbols.len() {
        return Err(Error::BadParams(format!(
            "expansion has {} symbols, generation {n} requested",
            exp.symbols.len()
        )));
    }
    let s0 = exp.s0.ok_or(Error::TerminatedInput)?;
    fundamental_interval(exp.a0, s0, &exp.symbols[..n], extended)
}

/// All children of `parent` with entries up to `a_max`, in increasing position.
pub fn children(parent: &FundInterval, a_max: u64) -> Result<Vec<FundInterval>> {
    let mut out = Vec::new();
    let mut symbols = parent.symbols.clone();
    symbols.push(McfSymbol::plus(2)?);
    for a in 2..=a_max {
        for s in [Sign::Plus, Sign::Minus] {
            let Ok(sym) = McfSymbol::new(a, s) else {
                continue;
            };
            *symbols.last_mut().unwrap() = sym;
            out.push(fundamental_interval(parent.a0, parent.s0, &symbols, false)?);
        }
    }
    out.sort_by(|x, y| x.lo.cmp(&y.lo));
    Ok(out)
}

/// `|I| / (beta_{n-1}^2 / 2)`.
pub fn length_ratio(iv: &FundInterval, beta_prev: &RealValue) -> f64 {
    const PREC: u32 = 128;
    let len = Float::with_val(PREC, &iv.length());
    let b = beta_prev.to_float(PREC);
    let denom = Float::with_val(PREC, b.square_ref()) / 2u32;
    (len / denom).to_f64()
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DistortionReport {
    pub generation: usize,
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    pub implied_c: f64,
}

/// Extremes of `|H_n'(x) / H_n'(y)| = (beta_{n-1}(y) / beta_{n-1}(x))^2` over
/// the grid `t_k = k / (2 (grid - 1))` of tails, endpoints included.
///
/// `beta_{n-1}` along the interval equals `1/|r t + s|`, which is monotone in
/// `t`, so the closed grid already attains the supremum.
pub fn measure_distortion(
    a0: i64,
    s0: Sign,
    symbols: &[McfSymbol],
    grid: usize,
) -> Result<DistortionReport> {
    if grid < 2 {
        return Err(Error::BadParams(
            "distortion grid needs at least 2 points".into(),
        ));
    }
    let _ = (a0, s0); // translation and reflection do not change |H_n'|
    let m = Mobius::from_symbols(symbols);
    let step = Rational::from((1, 2 * (grid as u64 - 1)));
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for k in 0..grid {
        let t = Rational::from(&step * k as u64);
        let d = m.denominator_at(&t);
        if lo.as_ref().is_none_or(|l| d < *l) {
            lo = Some(d.clone());
        }
        if hi.as_ref().is_none_or(|h| d > *h) {
            hi = Some(d);
        }
    }
    let (lo, hi) = (lo.unwrap(), hi.unwrap());
    let ratio = Rational::from(&hi / &lo).square();
    let f = Float::with_val(128, &ratio);
    let implied = Float::with_val(128, f.ln_ref()).to_f64();
    Ok(DistortionReport {
        generation: symbols.len(),
        sup_ratio: f.to_f64(),
        inf_ratio: Float::with_val(128, f.recip_ref()).to_f64(),
        implied_c: implied,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SplitCase {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SplitReport {
    pub n0: usize,
    pub n1: usize,
    pub case: SplitCase,
    /// The pair was exchanged so that `alpha_{n0} > alpha'_{n0}`.
    pub swapped: bool,
    /// Largest distortion exponent seen on the generation `<= n1` intervals of both reals.
    pub c_hat: f64,
    /// `|I~_{n0-1}|`, absent when `n0 = 0`.
    pub upper_bound_witness: Option<String>,
    pub upper_bound: Option<f64>,
    /// `2 e^{-4 C} beta_{n1}^2`.
    pub lower_bound_witness: f64,
    /// `e^{-2 C} beta_{n1-1}^2 / 12`.
    pub lemma_lower_bound: f64,
    pub distance: f64,
}

impl SplitReport {
    pub fn bounds_hold(&self) -> bool {
        self.lower_bound_witness <= self.distance
            && self.upper_bound.is_none_or(|u| self.distance <= u)
    }
}

const SPLIT_PREC: u32 = 256;
const SPLIT_GRID: usize = 2;

fn first_difference(x: &McfExpansion, y: &McfExpansion, maxdepth: usize) -> Result<usize> {
    if (x.a0, x.s0) != (y.a0, y.s0) {
        return Ok(0);
    }
    for k in 0..maxdepth {
        match (x.symbols.get(k), y.symbols.get(k)) {
            (Some(a), Some(b)) if a == b => continue,
            (Some(_), Some(_)) => return Ok(k + 1),
            _ => return Err(Error::TerminatedInput),
        }
    }
    Err(Error::Undecided(maxdepth))
}

/// Locates `n0` (first generation whose intervals differ), classifies the
/// pair and evaluates the separation witnesses.
pub fn split_generation(
    alpha: &RealValue,
    alpha_p: &RealValue,
    maxdepth: usize,
) -> Result<SplitReport> {
    if let (Some(x), Some(y)) = (alpha.exact(), alpha_p.exact()) {
        if x == y {
            return Err(Error::Equal);
        }
    }
    let ctx = PrecisionCtx::new(SPLIT_PREC)?;
    let ex = mcf_expand(alpha, maxdepth + 2, ctx)?;
    let ey = mcf_expand(alpha_p, maxdepth + 2, ctx)?;
    if ex.terminated || ey.terminated {
        return Err(Error::TerminatedInput);
    }
    let n0 = first_difference(&ex, &ey, maxdepth)?;
    split_from_expansions(alpha, alpha_p, &ex, &ey, n0)
}

fn split_from_expansions(
    alpha: &RealValue,
    alpha_p: &RealValue,
    ex: &McfExpansion,
    ey: &McfExpansion,
    n0: usize,
) -> Result<SplitReport> {
    let ix = interval_of(ex, n0, false)?;
    let iy = interval_of(ey, n0, false)?;
    let last = |e: &McfExpansion| -> (u64, Sign) {
        if n0 == 0 {
            (e.a0.unsigned_abs(), e.s0.unwrap())
        } else {
            let s = e.symbols[n0 - 1];
            (s.a(), s.s())
        }
    };
    let (ax, sx) = last(ex);
    let (ay, sy) = last(ey);
    let case_a = ix.touches(&iy) && ax == ay && sx != sy;
    let case = if case_a { SplitCase::A } else { SplitCase::B };
    let n1 = if case_a { n0 + 2 } else { n0 + 1 };

    let ax_n0 = ex.alphas[n0].to_float(SPLIT_PREC);
    let ay_n0 = ey.alphas[n0].to_float(SPLIT_PREC);
    let swapped = ax_n0 < ay_n0;
    let (e, _e_other) = if swapped { (ey, ex) } else { (ex, ey) };

    let mut c_hat = 0.0f64;
    for exp in [ex, ey] {
        let s0 = exp.s0.unwrap();
        for g in 0..=n1.min(exp.symbols.len()) {
            let d = measure_distortion(exp.a0, s0, &exp.symbols[..g], SPLIT_GRID)?;
            c_hat = c_hat.max(d.implied_c);
        }
    }

    let (upper_bound_witness, upper_bound) = if n0 > 0 {
        let ext = interval_of(ex, n0 - 1, true)?;
        let len = ext.length();
        let f = Float::with_val(SPLIT_PREC, &len).to_f64();
        (Some(len.to_string()), Some(f))
    } else {
        (None, None)
    };

    let beta = |n: usize| e.betas[n + 1].to_float(SPLIT_PREC).to_f64();
    let lower_bound_witness = 2.0 * (-4.0 * c_hat).exp() * beta(n1).powi(2);
    let lemma_lower_bound = (-2.0 * c_hat).exp() * beta(n1 - 1).powi(2) / 12.0;

    let diff = Float::with_val(
        SPLIT_PREC,
        alpha.to_float(SPLIT_PREC) - alpha_p.to_float(SPLIT_PREC),
    );
    Ok(SplitReport {
        n0,
        n1,
        case,
        swapped,
        c_hat,
        upper_bound_witness,
        upper_bound,
        lower_bound_witness,
        lemma_lower_bound,
        distance: diff.abs().to_f64(),
    })
}

/// CSV rows `generation,symbols,lo,hi,length` with exact fractions.
pub fn intervals_csv(ivs: &[FundInterval]) -> String {
    let mut out = String::from("generation,symbols,lo,hi,length\n");
    for iv in ivs {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            iv.generation,
            iv.symbol_string(),
            iv.lo,
            iv.hi,
            iv.length()
        );
    }
    out
}
