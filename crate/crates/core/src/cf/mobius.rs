//! Integer Möbius maps `t -> (p t + q) / (r t + s)`.

use rug::{Float, Integer, Rational};

use super::symbol::McfSymbol;
use crate::error::{Error, Result};
use crate::numeric::Quadratic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mobius {
    p: Integer,
    q: Integer,
    r: Integer,
    s: Integer,
}

impl Mobius {
    pub fn new(p: Integer, q: Integer, r: Integer, s: Integer) -> Self {
        Mobius { p, q, r, s }
    }

    pub fn identity() -> Self {
        Mobius::new(
            Integer::from(1),
            Integer::new(),
            Integer::new(),
            Integer::from(1),
        )
    }

    /// `M_1 ∘ M_2 ∘ ... ∘ M_n`, mapping `alpha_n` back to `alpha_0`.
    pub fn from_symbols(symbols: &[McfSymbol]) -> Self {
        symbols
            .iter()
            .fold(Mobius::identity(), |acc, sym| acc.compose(&sym.mobius()))
    }

    pub fn entries(&self) -> (&Integer, &Integer, &Integer, &Integer) {
        (&self.p, &self.q, &self.r, &self.s)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            p: Integer::from(&self.p * &other.p) + Integer::from(&self.q * &other.r),
            q: Integer::from(&self.p * &other.q) + Integer::from(&self.q * &other.s),
            r: Integer::from(&self.r * &other.p) + Integer::from(&self.s * &other.r),
            s: Integer::from(&self.r * &other.q) + Integer::from(&self.s * &other.s),
        }
    }

    pub fn det(&self) -> Integer {
        Integer::from(&self.p * &self.s) - Integer::from(&self.q * &self.r)
    }

    pub fn apply_rational(&self, t: &Rational) -> Result<Rational> {
        let num = Integer::from(&self.p * t.numer()) + Integer::from(&self.q * t.denom());
        let den = Integer::from(&self.r * t.numer()) + Integer::from(&self.s * t.denom());
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational::from((num, den)))
    }

    pub fn apply_quadratic(&self, t: &Quadratic) -> Result<Quadratic> {
        let p = Quadratic::from_int(self.p.clone());
        let q = Quadratic::from_int(self.q.clone());
        let r = Quadratic::from_int(self.r.clone());
        let s = Quadratic::from_int(self.s.clone());
        let num = p.mul(t)?.add(&q)?;
        let den = r.mul(t)?.add(&s)?;
        num.div(&den)
    }

    pub fn apply_float(&self, t: &Float) -> Float {
        let prec = t.prec();
        let num = Float::with_val(prec, t * &self.p) + &self.q;
        let den = Float::with_val(prec, t * &self.r) + &self.s;
        num / den
    }

    /// `|r t + s|`, the reciprocal square root of `|M'(t)|` (the determinant is ±1).
    pub fn denominator_at(&self, t: &Rational) -> Rational {
        let v = Rational::from(t * &self.r) + &self.s;
        v.abs()
    }
}
