//! Real-number backends and the logarithmic metric on `[-1/2, 1/2]`.

mod ball;
mod spec;
mod surd;

pub use ball::Ball;
pub use spec::parse_alpha;
pub use surd::Quadratic;

use std::cmp::Ordering;

use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::cf::SymbolStream;
use crate::error::{Error, Result};

/// Working mantissa precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionCtx {
    bits: u32,
}

impl PrecisionCtx {
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::BadParams(format!(
                "precision {bits} below the minimum of {} bits",
                Self::MIN_BITS
            )));
        }
        Ok(PrecisionCtx { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }
}

impl Default for PrecisionCtx {
    fn default() -> Self {
        PrecisionCtx { bits: 256 }
    }
}

/// A real number under one of four backends.
#[derive(Clone, Debug, PartialEq)]
pub enum RealValue {
    Rational(Rational),
    QuadSurd(Quadratic),
    BigBall(Ball),
    SymbolDefined(SymbolStream),
}

impl RealValue {
    /// Puts an exact value in the canonical backend (rational when `b = 0`).
    pub fn from_quadratic(q: Quadratic) -> Self {
        match q.to_rational() {
            Some(r) => RealValue::Rational(r),
            None => RealValue::QuadSurd(q),
        }
    }

    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(RealValue::Rational(Rational::from((p, q))))
    }

    /// `(a + b*sqrt(d)) / c`.
    pub fn surd(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Ok(Self::from_quadratic(Quadratic::new(
            a.into(),
            b.into(),
            c.into(),
            d.into(),
        )?))
    }

    /// The exact value, if this backend has one.
    pub fn exact(&self) -> Option<Quadratic> {
        match self {
            RealValue::Rational(r) => Some(Quadratic::from_rational(r)),
            RealValue::QuadSurd(q) => Some(q.clone()),
            RealValue::SymbolDefined(s) => s.to_quadratic().ok(),
            RealValue::BigBall(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, RealValue::BigBall(_))
    }

    /// `Some(true)` for exact rationals, `Some(false)` for exact irrationals.
    pub fn is_rational(&self) -> Option<bool> {
        match self {
            RealValue::SymbolDefined(s) => Some(!s.is_periodic()),
            _ => self.exact().map(|q| q.is_rational()),
        }
    }

    /// Center value rounded to `prec` bits.
    pub fn to_float(&self, prec: u32) -> Float {
        match self {
            RealValue::BigBall(b) => Float::with_val(prec, b.center()),
            other => other
                .exact()
                .map(|q| q.to_float(prec))
                .unwrap_or_else(|| Float::new(prec)),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(64).to_f64()
    }

    pub fn neg(&self) -> Self {
        match self {
            RealValue::Rational(r) => RealValue::Rational(Rational::from(-r)),
            RealValue::QuadSurd(q) => RealValue::QuadSurd(q.neg()),
            RealValue::BigBall(b) => RealValue::BigBall(b.neg()),
            RealValue::SymbolDefined(s) => RealValue::SymbolDefined(SymbolStream {
                a0: -s.a0,
                s0: s.s0.flip(),
                preperiod: s.preperiod.clone(),
                period: s.period.clone(),
            }),
        }
    }

    pub fn add_int(&self, k: i64) -> Self {
        let k = Integer::from(k);
        match self {
            RealValue::Rational(r) => RealValue::Rational(Rational::from(r + &k)),
            RealValue::QuadSurd(q) => RealValue::QuadSurd(q.add_int(&k)),
            RealValue::BigBall(b) => RealValue::BigBall(b.sub_int(&Integer::from(-&k))),
            RealValue::SymbolDefined(s) => RealValue::SymbolDefined(SymbolStream {
                a0: s.a0 + k.to_i64().unwrap_or(0),
                ..s.clone()
            }),
        }
    }

    /// `1/x - k` on exact backends.
    pub fn gauss_step(&self, k: &Integer) -> Result<Self> {
        let q = self
            .exact()
            .ok_or_else(|| Error::BadParams("gauss_step needs an exact backend".into()))?;
        Ok(Self::from_quadratic(q.recip()?.sub_int(k)))
    }

    /// Ball view of the value at `prec` bits.
    pub fn to_ball(&self, prec: u32) -> Ball {
        match self {
            RealValue::BigBall(b) => b.clone(),
            RealValue::Rational(r) => Ball::from_rational(r, prec),
            other => Ball::from_quadratic(&other.exact().expect("exact backend"), prec),
        }
    }

    /// Exact comparison with a rational; `None` for balls containing `q`.
    pub fn cmp_rational(&self, q: &Rational) -> Option<Ordering> {
        match self {
            RealValue::BigBall(b) => {
                if b.hi() < *q {
                    Some(Ordering::Less)
                } else if b.lo() > *q {
                    Some(Ordering::Greater)
                } else {
                    None
                }
            }
            other => other.exact().map(|x| x.cmp_rational(q)),
        }
    }

    /// Renders as a parseable alpha-spec.
    pub fn to_spec(&self) -> String {
        spec::format_alpha(self)
    }
}

/// `x = a + r` with `r ∈ [-1/2, 1/2)`; intervals are left-closed.
pub fn nearest_residue(x: &RealValue) -> Result<(Integer, RealValue)> {
    match x {
        RealValue::BigBall(b) => {
            let k = b.nearest()?;
            Ok((k.clone(), RealValue::BigBall(b.sub_int(&k))))
        }
        other => {
            let q = other
                .exact()
                .ok_or_else(|| Error::BadParams("no exact value".into()))?;
            let k = q.nearest();
            let r = q.sub_int(&k);
            Ok((k, RealValue::from_quadratic(r)))
        }
    }
}

/// The path metric `ds = |log|t|| dt`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogDistance(pub f64);

impl LogDistance {
    pub fn value(self) -> f64 {
        self.0
    }
}

const DLOG_PREC: u32 = 128;

/// Antiderivative `F(t) = t (1 - log t)` of `-log t` on `[0, 1/2]`, `F(0) = 0`.
fn dlog_primitive(t: &Float) -> Float {
    if t.is_zero() {
        return Float::new(t.prec());
    }
    let one_minus_log = Float::with_val(t.prec(), 1u32) - Float::with_val(t.prec(), t.ln_ref());
    Float::with_val(t.prec(), t * &one_minus_log)
}

fn check_half_range(x: &RealValue) -> Result<()> {
    let half = Rational::from((1, 2));
    let neg_half = Rational::from((-1, 2));
    let inside = matches!(
        x.cmp_rational(&half),
        Some(Ordering::Less | Ordering::Equal)
    ) && matches!(
        x.cmp_rational(&neg_half),
        Some(Ordering::Greater | Ordering::Equal)
    );
    if inside {
        Ok(())
    } else {
        Err(Error::OutOfRange(x.to_spec()))
    }
}

/// `d_log(x, y)` for `x, y ∈ [-1/2, 1/2]`.
pub fn d_log(x: &RealValue, y: &RealValue) -> Result<LogDistance> {
    check_half_range(x)?;
    check_half_range(y)?;
    let fx = x.to_float(DLOG_PREC);
    let fy = y.to_float(DLOG_PREC);
    Ok(LogDistance(d_log_float(&fx, &fy).to_f64()))
}

/// Float version of [`d_log`]; no range check.
pub fn d_log_float(x: &Float, y: &Float) -> Float {
    let prec = x.prec().max(y.prec());
    let ax = Float::with_val(prec, x.abs_ref());
    let ay = Float::with_val(prec, y.abs_ref());
    let same_side = x.is_zero() || y.is_zero() || x.is_sign_negative() == y.is_sign_negative();
    let (fx, fy) = (dlog_primitive(&ax), dlog_primitive(&ay));
    if same_side {
        Float::with_val(prec, &fx - &fy).abs()
    } else {
        Float::with_val(prec, &fx + &fy)
    }
}

/// `sup_{x,y} d_log(x, y) / |x - y|^a` over `[-1/2, 1/2]`, in closed form.
///
/// For a fixed gap `h` the supremum of `d_log` is `h (1 + log 2 - log h)`,
/// attained by the symmetric pair `±h/2`.
pub fn dlog_holder_constant(a: f64) -> f64 {
    assert!(a > 0.0 && a < 1.0, "exponent must lie in (0, 1)");
    let c = 1.0 + std::f64::consts::LN_2;
    let g = |h: f64| h.powf(1.0 - a) * (c - h.ln());
    let h_star = (c - 1.0 / (1.0 - a)).exp();
    if h_star < 1.0 {
        g(h_star)
    } else {
        g(1.0)
    }
}

/// Encloses `x` in a ball with radius at most `2^(2 - bits) * max(1, |x|)`.
pub fn refine(x: &RealValue, ctx: PrecisionCtx) -> Result<RealValue> {
    let bits = ctx.bits();
    let target = |mag: &Float| {
        let one = Float::with_val(64, 1u32);
        let m = if *mag > one {
            Float::with_val(64, mag)
        } else {
            one
        };
        m << (2 - bits as i32)
    };
    match x {
        RealValue::BigBall(b) => {
            let mag = Float::with_val(64, b.center().abs_ref());
            if *b.radius() > target(&mag) {
                return Err(Error::NotRefinable);
            }
            Ok(x.clone())
        }
        RealValue::Rational(r) => Ok(RealValue::BigBall(Ball::from_rational(r, bits + 2))),
        RealValue::QuadSurd(q) => Ok(RealValue::BigBall(Ball::from_quadratic(q, bits + 2))),
        RealValue::SymbolDefined(s) => refine_stream(s, bits, target),
    }
}

/// Narrows the fundamental interval of the stream until it fits the target radius.
fn refine_stream(
    s: &SymbolStream,
    bits: u32,
    target: impl Fn(&Float) -> Float,
) -> Result<RealValue> {
    if !s.is_periodic() {
        let q = s.to_quadratic()?;
        return Ok(RealValue::BigBall(Ball::from_quadratic(&q, bits + 2)));
    }
    let prec = bits + 16;
    let mut depth = 1usize;
    loop {
        let iv = crate::intervals::fundamental_interval(s.a0, s.s0, &s.prefix(depth), false)?;
        let lo = Float::with_val(prec, iv.lo());
        let hi = Float::with_val(prec, iv.hi());
        let center = Float::with_val_round(prec, &lo + &hi, Round::Nearest).0 / 2u32;
        let half = Float::with_val_round(64, Float::with_val(prec, &hi - &lo), Round::Up).0 / 2u32;
        let radius = Float::with_val_round(64, &half + &ball_ulp(&center), Round::Up).0;
        let mag = Float::with_val(64, center.abs_ref());
        if radius <= target(&mag) {
            return Ok(RealValue::BigBall(Ball::new(center, radius)?));
        }
        depth += 1;
    }
}

fn ball_ulp(x: &Float) -> Float {
    match x.get_exp() {
        Some(e) => Float::with_val(64, 1u32) << (e - x.prec() as i32),
        None => Float::with_val(64, 0u32),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> RealValue {
        RealValue::rational(p, q).unwrap()
    }

    #[test]
    fn residue_examples() {
        let (a, res) = nearest_residue(&r(3, 4)).unwrap();
        assert_eq!(a, 1);
        assert_eq!(res, r(-1, 4));
        let (a, res) = nearest_residue(&r(1, 2)).unwrap();
        assert_eq!(a, 1);
        assert_eq!(res, r(-1, 2));
        let s = RealValue::surd(-1, 1, 1, 2).unwrap();
        let (a, res) = nearest_residue(&s).unwrap();
        assert_eq!(a, 0);
        assert_eq!(res, s);
    }

    #[test]
    fn residue_ball_straddle() {
        let b = RealValue::BigBall(
            Ball::new(Float::with_val(64, 1.5), Float::with_val(64, 1e-3)).unwrap(),
        );
        assert!(matches!(
            nearest_residue(&b),
            Err(Error::AmbiguousBall { .. })
        ));
    }

    #[test]
    fn dlog_values() {
        let d = d_log(&r(1, 2), &r(-1, 2)).unwrap().value();
        assert!((d - (1.0 + std::f64::consts::LN_2)).abs() < 1e-14);
        assert_eq!(d_log(&r(1, 7), &r(1, 7)).unwrap().value(), 0.0);
        assert!(matches!(
            d_log(&r(3, 5), &r(0, 1)),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn holder_constant_is_a_supremum() {
        let a = 0.75;
        let m = dlog_holder_constant(a);
        let h = (1.0 + std::f64::consts::LN_2 - 4.0f64).exp();
        let x = Float::with_val(128, h / 2.0);
        let y = Float::with_val(128, -h / 2.0);
        let ratio = d_log_float(&x, &y).to_f64() / h.powf(a);
        assert!((ratio - m).abs() < 1e-12);
    }

    #[test]
    fn precision_floor() {
        assert!(PrecisionCtx::new(63).is_err());
        assert_eq!(PrecisionCtx::new(64).unwrap().bits(), 64);
    }

    #[test]
    fn refine_exact_backends() {
        let ctx = PrecisionCtx::new(128).unwrap();
        let RealValue::BigBall(b) = refine(&r(1, 3), ctx).unwrap() else {
            panic!()
        };
        assert!(*b.radius() <= Float::with_val(64, Float::u_exp(1, -126)));
        assert!(b.contains_rational(&Rational::from((1, 3))));
        let ctx = PrecisionCtx::new(256).unwrap();
        let s = RealValue::surd(-1, 1, 1, 2).unwrap();
        let RealValue::BigBall(b) = refine(&s, ctx).unwrap() else {
            panic!()
        };
        let exact = Float::with_val(400, 2u32).sqrt() - 1u32;
        assert!(b.contains(&exact));
        assert!(*b.radius() <= Float::with_val(64, Float::u_exp(1, -254)));
    }

    #[test]
    fn refine_rejects_wide_ball() {
        let wide = RealValue::BigBall(
            Ball::new(Float::with_val(64, 0.3), Float::with_val(64, 1e-5)).unwrap(),
        );
        assert_eq!(
            refine(&wide, PrecisionCtx::new(128).unwrap()),
            Err(Error::NotRefinable)
        );
    }
}
