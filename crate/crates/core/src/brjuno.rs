//! Brjuno sums `Y(alpha) = sum_{n >= 0} beta_{n-1} log(1/alpha_n)` over the
//! modified (`Y_{1/2}`) or classical (`Y_1`) expansion.

use rug::Float;
use serde_json::json;

use crate::cf::{
    classical_expand, mcf_expand, Algorithm, ContinuedFraction, McfSymbol, Mobius, Sign,
    SymbolStream,
};
use crate::error::{Error, Result};
use crate::numeric::{PrecisionCtx, Quadratic, RealValue};

const SUM_PREC: u32 = 192;

/// What the caller promises about the entries beyond the computed prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailAssumption {
    /// Every later entry is at most this value.
    Bounded(u64),
    Unbounded,
}

impl TailAssumption {
    pub fn bounded(a_max: u64) -> Result<Self> {
        if a_max < 2 {
            return Err(Error::BadParams("tail assumption needs a_max >= 2".into()));
        }
        Ok(TailAssumption::Bounded(a_max))
    }

    /// The exact bound for a symbol stream: its largest entry.
    pub fn for_stream(s: &SymbolStream) -> Self {
        let a = s
            .preperiod
            .iter()
            .chain(&s.period)
            .map(|x| x.a())
            .max()
            .unwrap_or(2);
        TailAssumption::Bounded(a.max(2))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrjunoResult {
    pub value: f64,
    /// `Y` lies in `[value, value + tail_bound]` when the tail assumption holds.
    pub tail_bound: f64,
    pub depth: usize,
    pub algorithm: Algorithm,
    pub terminated: bool,
}

impl BrjunoResult {
    pub fn is_brjuno(&self) -> bool {
        !self.terminated && self.tail_bound.is_finite()
    }

    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "algorithm": self.algorithm,
            "depth": self.depth,
            "value": self.value,
            "tail_bound": if self.tail_bound.is_finite() { json!(self.tail_bound) } else { json!("inf") },
            "terminated": self.terminated,
        })
    }
}

/// `sum_{n < depth} beta_{n-1} log(1/alpha_n)` at `prec` bits.
pub fn partial_sum(exp: &dyn ContinuedFraction, depth: usize, prec: u32) -> Float {
    let alphas = exp.alphas();
    let betas = exp.betas();
    let mut acc = Float::new(prec);
    for n in 0..depth.min(alphas.len()) {
        let a = alphas[n].to_float(prec);
        let w = betas[n].to_float(prec);
        let log_inv = -Float::with_val(prec, a.ln_ref());
        acc += w * log_inv;
    }
    acc
}

/// The part of the sum carried by generations with `beta_{n-1} < scale`, tail excluded.
///
/// A series of length `N` cannot resolve generations finer than about `1/N`,
/// so this is the share of `Y` a radius fit on `N` coefficients cannot see.
pub fn fine_scale_part(exp: &dyn ContinuedFraction, scale: f64) -> f64 {
    let alphas = exp.alphas();
    let betas = exp.betas();
    let mut acc = 0.0;
    for n in 0..exp.depth().min(alphas.len()) {
        let w = betas[n].to_f64();
        if w < scale {
            acc += w * -alphas[n].to_f64().ln();
        }
    }
    acc
}

fn tail_factor(alg: Algorithm) -> f64 {
    match alg {
        // sum_{k >= n} beta_{k-1} / beta_{n-1} <= 2 when every alpha <= 1/2
        Algorithm::Modified => 2.0,
        // alpha_k alpha_{k+1} < 1/2 for the Gauss map
        Algorithm::Classical => 4.0,
    }
}

pub fn brjuno_eval(exp: &dyn ContinuedFraction, tail: TailAssumption) -> Result<BrjunoResult> {
    let terminated = exp.is_terminated();
    let depth = exp.depth();
    if terminated {
        let value = partial_sum(exp, exp.alphas().len(), SUM_PREC).to_f64();
        return Ok(BrjunoResult {
            value,
            tail_bound: 0.0,
            depth,
            algorithm: exp.algorithm(),
            terminated,
        });
    }
    if depth == 0 {
        return Err(Error::BadParams(
            "Brjuno evaluation needs depth >= 1".into(),
        ));
    }
    let value = partial_sum(exp, depth, SUM_PREC).to_f64();
    let tail_bound = match tail {
        TailAssumption::Unbounded => f64::INFINITY,
        TailAssumption::Bounded(a_max) => {
            let beta = exp.betas()[depth].to_float(SUM_PREC).to_f64();
            tail_factor(exp.algorithm()) * beta * ((a_max + 1) as f64).ln()
        }
    };
    Ok(BrjunoResult {
        value,
        tail_bound,
        depth,
        algorithm: exp.algorithm(),
        terminated,
    })
}

/// Exact-to-precision sum for an eventually periodic alpha stream:
/// `Y(alpha_m) = S_p / (1 - B_p)`, then `Y(x) = log(1/x) + x Y(next)` back to `alpha_0`.
fn periodic_sum(pre: &[Float], period: &[Float], prec: u32) -> Float {
    let mut s = Float::new(prec);
    let mut b = Float::with_val(prec, 1u32);
    for a in period {
        let log_inv = -Float::with_val(prec, a.ln_ref());
        s += Float::with_val(prec, &b * &log_inv);
        b *= a;
    }
    let one_minus = Float::with_val(prec, 1u32) - &b;
    let mut y = s / one_minus;
    for a in pre.iter().rev() {
        let log_inv = -Float::with_val(prec, a.ln_ref());
        y = log_inv + Float::with_val(prec, a * &y);
    }
    y
}

/// `Y_{1/2}` of the real coded by `preperiod` then `period` repeated, at `prec` bits.
///
/// `a0` does not enter: `Y` is 1-periodic and even.
pub fn brjuno_periodic(
    _a0: i64,
    preperiod: &[McfSymbol],
    period: &[McfSymbol],
    prec: u32,
) -> Result<Float> {
    for s in preperiod.iter().chain(period) {
        McfSymbol::new(s.a(), s.s())?;
    }
    if period.is_empty() {
        return Err(Error::BadParams(
            "periodic evaluation needs a nonempty period".into(),
        ));
    }
    let stream = SymbolStream::new(0, Sign::Plus, preperiod.to_vec(), period.to_vec());
    let value = RealValue::from_quadratic(stream.to_quadratic()?);
    let m = preperiod.len();
    let exp = mcf_expand(&value, m + period.len(), PrecisionCtx::new(prec.max(64))?)?;
    let alphas: Vec<Float> = exp.alphas.iter().map(|a| a.to_float(prec)).collect();
    Ok(periodic_sum(
        &alphas[..m],
        &alphas[m..m + period.len()],
        prec,
    ))
}

/// `Y_1` of `[0; pre..., (period...)^inf]`.
pub fn brjuno_periodic_classical(pre: &[u64], period: &[u64], prec: u32) -> Result<Float> {
    if period.is_empty() || pre.iter().chain(period).any(|&c| c == 0) {
        return Err(Error::BadParams(
            "classical entries must be >= 1, period nonempty".into(),
        ));
    }
    let step = |c: u64| Mobius::new(0.into(), 1.into(), 1.into(), c.into());
    let mp = period
        .iter()
        .fold(Mobius::identity(), |acc, &c| acc.compose(&step(c)));
    let t = classical_fixed_point(&mp)?;
    let m = pre
        .iter()
        .fold(Mobius::identity(), |acc, &c| acc.compose(&step(c)));
    let value = RealValue::from_quadratic(m.apply_quadratic(&t)?);
    let exp = classical_expand(
        &value,
        pre.len() + period.len(),
        PrecisionCtx::new(prec.max(64))?,
    )?;
    let alphas: Vec<Float> = exp.alphas.iter().map(|a| a.to_float(prec)).collect();
    Ok(periodic_sum(
        &alphas[..pre.len()],
        &alphas[pre.len()..pre.len() + period.len()],
        prec,
    ))
}

/// Fixed point in `(0, 1)` of a product of `t -> 1/(c + t)` maps.
fn classical_fixed_point(m: &Mobius) -> Result<Quadratic> {
    use rug::Integer;
    let (p, q, r, s) = m.entries();
    let lin = Integer::from(s - p);
    let disc = Integer::from(&lin * &lin) + Integer::from(q * r) * 4u32;
    let root = Quadratic::new(
        Integer::from(-&lin),
        1.into(),
        Integer::from(r * 2u32),
        disc,
    )?;
    if root.signum() > 0 && root.cmp_rational(&rug::Rational::from(1)) == std::cmp::Ordering::Less {
        Ok(root)
    } else {
        Err(Error::InvalidTail(
            "no attracting fixed point in (0, 1)".into(),
        ))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalResidual {
    pub residual: f64,
    /// Sum of the two truncation bounds (`Y(alpha)` at depth `D`, `Y(alpha_1)` at `D - 1`).
    pub combined_tail_bound: f64,
}

/// `|Y(alpha) - log(1/alpha_0) - alpha_0 Y(alpha_1)|` at matched depths.
pub fn functional_residual(
    alpha: &RealValue,
    depth: usize,
    tail: TailAssumption,
) -> Result<FunctionalResidual> {
    if depth < 2 {
        return Err(Error::BadParams(
            "functional residual needs depth >= 2".into(),
        ));
    }
    let ctx = PrecisionCtx::new(256)?;
    let e = mcf_expand(alpha, depth, ctx)?;
    if e.terminated {
        return Err(Error::TerminatedInput);
    }
    let e1 = mcf_expand(&e.alphas[1], depth - 1, ctx)?;
    let prec = SUM_PREC;
    let y = partial_sum(&e, depth, prec);
    let y1 = partial_sum(&e1, depth - 1, prec);
    let a0 = e.alphas[0].to_float(prec);
    let log_inv = -Float::with_val(prec, a0.ln_ref());
    let rhs = log_inv + Float::with_val(prec, &a0 * &y1);
    let residual = Float::with_val(prec, &y - &rhs).abs().to_f64();
    let b = brjuno_eval(&e, tail)?.tail_bound + brjuno_eval(&e1, tail)?.tail_bound;
    Ok(FunctionalResidual {
        residual,
        combined_tail_bound: b,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct YGap {
    pub y_one: BrjunoResult,
    pub y_half: BrjunoResult,
    pub gap: f64,
    pub tail_bound: f64,
}

/// `Y_1(alpha) - Y_{1/2}(alpha)` from the two expansions of the same real.
pub fn y_gap(alpha: &RealValue, depth: usize, tail: TailAssumption) -> Result<YGap> {
    let ctx = PrecisionCtx::new(256)?;
    let m = mcf_expand(alpha, depth, ctx)?;
    let c = classical_expand(alpha, depth, ctx)?;
    if m.terminated || c.terminated {
        return Err(Error::TerminatedInput);
    }
    // a modified entry a bounds the classical entries it splits into by a
    let y_half = brjuno_eval(&m, tail)?;
    let y_one = brjuno_eval(&c, tail)?;
    Ok(YGap {
        gap: y_one.value - y_half.value,
        tail_bound: y_one.tail_bound + y_half.tail_bound,
        y_one,
        y_half,
    })
}
