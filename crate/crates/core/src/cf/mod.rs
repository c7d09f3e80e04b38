//! Modified (nearest-integer) and classical continued fractions.
//!
//! The modified algorithm iterates `G(x) = d(1/x, Z)` on `(0, 1/2]`, recording
//! `1/alpha_{n-1} = a_n + s_n alpha_n`. The classical one iterates the Gauss
//! map `x -> {1/x}`. Both run exactly on rational and quadratic-surd inputs
//! and on balls until the ball can no longer decide a digit.

mod mobius;
mod sample;
mod symbol;

pub use mobius::Mobius;
pub use sample::{
    draw_stream, sample_classical, sample_high_type, sample_high_type_with, HighTypeSampler,
    SignMode,
};
pub use symbol::{periodic_fixed_point, McfSymbol, Sign, SymbolStream};

use std::cmp::Ordering;

use rug::{Integer, Rational};
use serde_json::json;

use crate::error::{Error, Result};
use crate::numeric::{Ball, PrecisionCtx, Quadratic, RealValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Modified,
    Classical,
}

/// Shared view over both expansion kinds.
pub trait ContinuedFraction {
    fn algorithm(&self) -> Algorithm;
    /// Entries `a_1, a_2, ...` (the modified algorithm's `a_n`, ignoring signs).
    fn entries(&self) -> Vec<u64>;
    /// `alpha_0, alpha_1, ...`.
    fn alphas(&self) -> &[RealValue];
    /// `beta_{-1} = 1, beta_0, beta_1, ...`.
    fn betas(&self) -> &[RealValue];
    fn is_terminated(&self) -> bool;
    /// Number of generated steps.
    fn depth(&self) -> usize;
}

/// Modified continued-fraction data of a real number.
#[derive(Clone, Debug, PartialEq)]
pub struct McfExpansion {
    pub a0: i64,
    /// `None` when `alpha - a0` is 0.
    pub s0: Option<Sign>,
    pub symbols: Vec<McfSymbol>,
    /// `alpha_0 ..= alpha_depth`.
    pub alphas: Vec<RealValue>,
    /// `beta_{-1} = 1, beta_0 ..= beta_depth`.
    pub betas: Vec<RealValue>,
    pub terminated: bool,
    /// Last entry when the final residue was exactly 0 (rational input).
    pub terminal_entry: Option<u64>,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalExpansion {
    pub a0: i64,
    pub entries: Vec<u64>,
    pub alphas: Vec<RealValue>,
    pub betas: Vec<RealValue>,
    pub terminated: bool,
    pub depth: usize,
}

impl ContinuedFraction for McfExpansion {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Modified
    }
    fn entries(&self) -> Vec<u64> {
        self.symbols.iter().map(|s| s.a()).collect()
    }
    fn alphas(&self) -> &[RealValue] {
        &self.alphas
    }
    fn betas(&self) -> &[RealValue] {
        &self.betas
    }
    fn is_terminated(&self) -> bool {
        self.terminated
    }
    fn depth(&self) -> usize {
        self.depth
    }
}

impl ContinuedFraction for ClassicalExpansion {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Classical
    }
    fn entries(&self) -> Vec<u64> {
        self.entries.clone()
    }
    fn alphas(&self) -> &[RealValue] {
        &self.alphas
    }
    fn betas(&self) -> &[RealValue] {
        &self.betas
    }
    fn is_terminated(&self) -> bool {
        self.terminated
    }
    fn depth(&self) -> usize {
        self.depth
    }
}

impl McfExpansion {
    /// `beta_n` for `n >= -1`.
    pub fn beta(&self, n: isize) -> &RealValue {
        &self.betas[(n + 1) as usize]
    }

    /// The prefix `(a0, s0), (a1, s1), ...` as a symbol stream without period.
    pub fn stream_prefix(&self, n: usize) -> SymbolStream {
        SymbolStream::new(
            self.a0,
            self.s0.unwrap_or(Sign::Plus),
            self.symbols[..n.min(self.symbols.len())].to_vec(),
            Vec::new(),
        )
    }

    /// JSON shape `{a0, s0, symbols: [[a, s], ...], alphas, betas, terminated}`.
    pub fn to_json(&self, digits: usize) -> serde_json::Value {
        json!({
            "a0": self.a0,
            "s0": self.s0.map(Sign::as_i32),
            "symbols": self.symbols,
            "alphas": decimal_strings(&self.alphas, digits),
            "betas": decimal_strings(&self.betas, digits),
            "terminated": self.terminated,
        })
    }
}

impl ClassicalExpansion {
    pub fn to_json(&self, digits: usize) -> serde_json::Value {
        json!({
            "a0": self.a0,
            "entries": self.entries,
            "alphas": decimal_strings(&self.alphas, digits),
            "betas": decimal_strings(&self.betas, digits),
            "terminated": self.terminated,
        })
    }
}

/// Decimal rendering with `digits` significant digits.
pub fn decimal_string(x: &RealValue, digits: usize) -> String {
    let bits = ((digits as f64) / std::f64::consts::LOG10_2).ceil() as u32 + 16;
    let f = x.to_float(bits.max(64));
    if f.is_zero() {
        return "0".into();
    }
    f.to_string_radix(10, Some(digits))
}

fn decimal_strings(xs: &[RealValue], digits: usize) -> Vec<String> {
    xs.iter().map(|x| decimal_string(x, digits)).collect()
}

fn to_entry(k: &Integer) -> Result<u64> {
    k.to_u64().ok_or(Error::EntryOverflow)
}

fn to_i64(k: &Integer) -> Result<i64> {
    k.to_i64().ok_or(Error::EntryOverflow)
}

fn half() -> Rational {
    Rational::from((1, 2))
}

/// Exact or ball-valued working number for the expansion loops.
enum Work {
    Exact(Quadratic),
    Ball(Ball),
}

fn mul_values(x: &RealValue, y: &RealValue, prec: u32) -> RealValue {
    match (x.exact(), y.exact()) {
        (Some(a), Some(b)) => match a.mul(&b) {
            Ok(p) => RealValue::from_quadratic(p),
            Err(_) => RealValue::BigBall(x.to_ball(prec).mul(&y.to_ball(prec))),
        },
        _ => RealValue::BigBall(x.to_ball(prec).mul(&y.to_ball(prec))),
    }
}

fn push_beta(betas: &mut Vec<RealValue>, alpha: &RealValue, prec: u32) {
    let last = betas.last().expect("beta_{-1} present");
    let next = mul_values(last, alpha, prec);
    betas.push(next);
}

/// Modified continued-fraction expansion up to `depth` symbols.
pub fn mcf_expand(alpha: &RealValue, depth: usize, ctx: PrecisionCtx) -> Result<McfExpansion> {
    let prec = ctx.bits();
    let start = match alpha {
        RealValue::BigBall(b) => Work::Ball(b.clone()),
        other => Work::Exact(
            other
                .exact()
                .ok_or_else(|| Error::BadParams("symbol stream has no exact value".into()))?,
        ),
    };
    let mut exp = McfExpansion {
        a0: 0,
        s0: None,
        symbols: Vec::new(),
        alphas: Vec::new(),
        betas: vec![RealValue::Rational(Rational::from(1))],
        terminated: false,
        terminal_entry: None,
        depth: 0,
    };

    // generation 0
    let (k, residue) = nearest_split(&start, 0)?;
    exp.a0 = to_i64(&k)?;
    match residue_sign(&residue, 0)? {
        None => {
            exp.terminated = true;
            return Ok(exp);
        }
        Some(s) => exp.s0 = Some(s),
    }
    let mut current = abs_work(residue);
    exp.alphas.push(current_value(&current));
    push_beta(&mut exp.betas, exp.alphas.last().unwrap(), prec);

    for n in 1..=depth {
        let inv = recip_work(&current, n)?;
        let (k, residue) = nearest_split(&inv, n)?;
        let a = to_entry(&k)?;
        match residue_sign(&residue, n)? {
            None => {
                exp.terminated = true;
                exp.terminal_entry = Some(a);
                break;
            }
            Some(s) => {
                exp.symbols.push(McfSymbol::new(a, s)?);
                current = abs_work(residue);
                exp.alphas.push(current_value(&current));
                push_beta(&mut exp.betas, exp.alphas.last().unwrap(), prec);
                exp.depth = n;
            }
        }
    }
    Ok(exp)
}

fn current_value(w: &Work) -> RealValue {
    match w {
        Work::Exact(q) => RealValue::from_quadratic(q.clone()),
        Work::Ball(b) => RealValue::BigBall(b.clone()),
    }
}

fn nearest_split(x: &Work, generation: usize) -> Result<(Integer, Work)> {
    match x {
        Work::Exact(q) => {
            let k = q.nearest();
            let r = q.sub_int(&k);
            Ok((k, Work::Exact(r)))
        }
        Work::Ball(b) => {
            let k = b
                .nearest()
                .map_err(|_| Error::PrecisionExhausted { generation })?;
            let r = b.sub_int(&k);
            Ok((k, Work::Ball(r)))
        }
    }
}

/// `None` for a zero residue (termination); errors for `-1/2` or undecidable balls.
fn residue_sign(r: &Work, generation: usize) -> Result<Option<Sign>> {
    match r {
        Work::Exact(q) => {
            if q.is_zero() {
                return Ok(None);
            }
            if q.cmp_rational(&Rational::from((-1, 2))) == Ordering::Equal {
                return Err(Error::BoundaryUndefined { generation });
            }
            Ok(Some(if q.signum() > 0 {
                Sign::Plus
            } else {
                Sign::Minus
            }))
        }
        Work::Ball(b) => {
            let lo_edge = Rational::from((-1, 2));
            if b.lo() <= lo_edge {
                return Err(Error::PrecisionExhausted { generation });
            }
            match b.sign() {
                Some(Ordering::Greater) => Ok(Some(Sign::Plus)),
                Some(Ordering::Less) => Ok(Some(Sign::Minus)),
                Some(Ordering::Equal) => Ok(None),
                None => Err(Error::PrecisionExhausted { generation }),
            }
        }
    }
}

fn abs_work(w: Work) -> Work {
    match w {
        Work::Exact(q) => Work::Exact(q.abs()),
        Work::Ball(b) => Work::Ball(b.abs()),
    }
}

fn recip_work(w: &Work, generation: usize) -> Result<Work> {
    match w {
        Work::Exact(q) => Ok(Work::Exact(q.recip()?)),
        Work::Ball(b) => b
            .recip()
            .map(Work::Ball)
            .ok_or(Error::PrecisionExhausted { generation }),
    }
}

fn floor_split(x: &Work, generation: usize) -> Result<(Integer, Work)> {
    match x {
        Work::Exact(q) => {
            let k = q.floor();
            Ok((k.clone(), Work::Exact(q.sub_int(&k))))
        }
        Work::Ball(b) => {
            let lo = b.lo().floor();
            let hi = b.hi().floor();
            if lo != hi {
                return Err(Error::PrecisionExhausted { generation });
            }
            let k = lo
                .to_integer()
                .ok_or(Error::PrecisionExhausted { generation })?;
            let r = b.sub_int(&k);
            Ok((k, Work::Ball(r)))
        }
    }
}

fn is_zero_work(w: &Work, generation: usize) -> Result<bool> {
    match w {
        Work::Exact(q) => Ok(q.is_zero()),
        Work::Ball(b) => match b.sign() {
            Some(Ordering::Equal) => Ok(true),
            Some(_) => Ok(false),
            None => Err(Error::PrecisionExhausted { generation }),
        },
    }
}

/// Classical (floor) continued-fraction expansion up to `depth` entries.
pub fn classical_expand(
    alpha: &RealValue,
    depth: usize,
    ctx: PrecisionCtx,
) -> Result<ClassicalExpansion> {
    let prec = ctx.bits();
    let start = match alpha {
        RealValue::BigBall(b) => Work::Ball(b.clone()),
        other => Work::Exact(
            other
                .exact()
                .ok_or_else(|| Error::BadParams("symbol stream has no exact value".into()))?,
        ),
    };
    let (k, frac) = floor_split(&start, 0)?;
    let mut exp = ClassicalExpansion {
        a0: to_i64(&k)?,
        entries: Vec::new(),
        alphas: Vec::new(),
        betas: vec![RealValue::Rational(Rational::from(1))],
        terminated: false,
        depth: 0,
    };
    if is_zero_work(&frac, 0)? {
        exp.terminated = true;
        return Ok(exp);
    }
    let mut current = frac;
    exp.alphas.push(current_value(&current));
    push_beta(&mut exp.betas, exp.alphas.last().unwrap(), prec);
    for n in 1..=depth {
        let inv = recip_work(&current, n)?;
        let (k, frac) = floor_split(&inv, n)?;
        exp.entries.push(to_entry(&k)?);
        exp.depth = n;
        if is_zero_work(&frac, n)? {
            exp.terminated = true;
            break;
        }
        current = frac;
        exp.alphas.push(current_value(&current));
        push_beta(&mut exp.betas, exp.alphas.last().unwrap(), prec);
    }
    Ok(exp)
}

fn check_tail(tail: &RealValue) -> Result<()> {
    let nonneg = matches!(
        tail.cmp_rational(&Rational::new()),
        Some(Ordering::Greater | Ordering::Equal)
    );
    let below = matches!(
        tail.cmp_rational(&half()),
        Some(Ordering::Less | Ordering::Equal)
    );
    if nonneg && below {
        Ok(())
    } else {
        Err(Error::InvalidTail(tail.to_spec()))
    }
}

/// `a0 + alpha_0` where `alpha_0` is coded by `symbols` followed by `tail`.
///
/// The tail may be any value in `[0, 1/2]`; the closed end lets interval
/// endpoints be reproduced.
pub fn reconstruct(a0: i64, symbols: &[McfSymbol], tail: &RealValue) -> Result<RealValue> {
    reconstruct_signed(a0, Sign::Plus, symbols, tail)
}

/// `a0 + s0 * alpha_0`.
pub fn reconstruct_signed(
    a0: i64,
    s0: Sign,
    symbols: &[McfSymbol],
    tail: &RealValue,
) -> Result<RealValue> {
    check_tail(tail)?;
    let signed = |x: RealValue| if s0 == Sign::Plus { x } else { x.neg() };
    match tail.exact() {
        Some(t) => {
            let alpha0 = Mobius::from_symbols(symbols).apply_quadratic(&t)?;
            Ok(signed(RealValue::from_quadratic(alpha0)).add_int(a0))
        }
        None => {
            let mut t = tail.to_ball(64);
            for sym in symbols.iter().rev() {
                let st = if sym.s() == Sign::Plus { t } else { t.neg() };
                let denom = st.sub_int(&Integer::from(-(sym.a() as i64)));
                t = denom.recip().ok_or(Error::DivisionByZero)?;
            }
            Ok(signed(RealValue::BigBall(t)).add_int(a0))
        }
    }
}

/// Result of a high-type test; `depth_checked` entries were inspected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HighTypeCheck {
    pub high_type: bool,
    pub depth_checked: usize,
}

/// True iff every computed entry `a_n`, `n >= 1`, is at least `n_min`.
/// Terminated (rational) expansions are never high type.
pub fn is_high_type(exp: &dyn ContinuedFraction, n_min: u64) -> HighTypeCheck {
    let entries = exp.entries();
    HighTypeCheck {
        high_type: !exp.is_terminated() && entries.iter().all(|&a| a >= n_min),
        depth_checked: entries.len(),
    }
}
