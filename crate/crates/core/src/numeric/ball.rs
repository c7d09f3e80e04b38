//! Midpoint-radius balls over MPFR floats.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::ops::CompleteRound;
use rug::{Float, Integer, Rational};

use super::surd::Quadratic;
use crate::error::{Error, Result};

const RADIUS_PREC: u32 = 64;

/// A real number known to lie in `[center - radius, center + radius]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    center: Float,
    radius: Float,
}

fn up(x: impl CompleteRound<Completed = Float, Prec = u32, Round = Round>) -> Float {
    x.complete_round(RADIUS_PREC, Round::Up).0
}

/// One unit in the last place of `x` at its own precision (0 for zero).
pub(crate) fn ulp(x: &Float) -> Float {
    match x.get_exp() {
        Some(e) => Float::with_val(RADIUS_PREC, 1u32) << (e - x.prec() as i32),
        None => Float::with_val(RADIUS_PREC, 0u32),
    }
}

impl Ball {
    pub fn new(center: Float, radius: Float) -> Result<Self> {
        if radius.is_sign_negative() || radius.is_nan() || !center.is_finite() {
            return Err(Error::BadParams(
                "ball radius must be finite and >= 0".into(),
            ));
        }
        Ok(Ball {
            center,
            radius: Float::with_val_round(RADIUS_PREC, &radius, Round::Up).0,
        })
    }

    pub fn exact(center: Float) -> Self {
        Ball {
            center,
            radius: Float::with_val(RADIUS_PREC, 0u32),
        }
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let (center, ord) = Float::with_val_round(prec, q, Round::Nearest);
        let radius = if ord == Ordering::Equal {
            Float::with_val(RADIUS_PREC, 0u32)
        } else {
            ulp(&center)
        };
        Ball { center, radius }
    }

    pub fn from_quadratic(q: &Quadratic, prec: u32) -> Self {
        if let Some(r) = q.to_rational() {
            return Self::from_rational(&r, prec);
        }
        let center = q.to_float(prec);
        // to_float is accurate to a few ulps
        let u = ulp(&center);
        let radius = up(&u * 4u32);
        Ball { center, radius }
    }

    /// Parses a decimal literal rounded to `bits` bits.
    pub fn from_decimal(text: &str, bits: u32) -> Result<Self> {
        let parsed = Float::parse(text).map_err(|e| Error::Parse {
            spec: text.to_string(),
            reason: e.to_string(),
        })?;
        let (center, ord) = Float::with_val_round(bits, parsed, Round::Nearest);
        if !center.is_finite() {
            return Err(Error::BadParams(format!("{text} is not finite")));
        }
        let radius = if ord == Ordering::Equal {
            Float::with_val(RADIUS_PREC, 0u32)
        } else {
            ulp(&center)
        };
        Ok(Ball { center, radius })
    }

    pub fn center(&self) -> &Float {
        &self.center
    }

    pub fn radius(&self) -> &Float {
        &self.radius
    }

    pub fn prec(&self) -> u32 {
        self.center.prec()
    }

    pub fn lo(&self) -> Float {
        Float::with_val_round(self.prec() + 8, &self.center - &self.radius, Round::Down).0
    }

    pub fn hi(&self) -> Float {
        Float::with_val_round(self.prec() + 8, &self.center + &self.radius, Round::Up).0
    }

    /// `Some(sign)` when the whole ball lies strictly on one side of zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo() > 0u32 {
            Some(Ordering::Greater)
        } else if self.hi() < 0u32 {
            Some(Ordering::Less)
        } else if self.center == 0u32 && self.radius == 0u32 {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn neg(&self) -> Self {
        Ball {
            center: Float::with_val(self.prec(), -&self.center),
            radius: self.radius.clone(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.center.is_sign_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn sub_int(&self, k: &Integer) -> Self {
        let (center, ord) = Float::with_val_round(self.prec(), &self.center - k, Round::Nearest);
        let mut radius = self.radius.clone();
        if ord != Ordering::Equal {
            radius = up(&radius + &ulp(&center));
        }
        Ball { center, radius }
    }

    /// `None` if the ball contains zero.
    pub fn recip(&self) -> Option<Self> {
        let mag = Float::with_val_round(RADIUS_PREC, self.center.abs_ref(), Round::Down).0;
        let gap = Float::with_val_round(RADIUS_PREC, &mag - &self.radius, Round::Down).0;
        if gap <= 0u32 {
            return None;
        }
        let center = Float::with_val(self.prec(), self.center.recip_ref());
        // |1/x - 1/c| <= r / (|c| (|c| - r))
        let denom = Float::with_val_round(RADIUS_PREC, &mag * &gap, Round::Down).0;
        let spread = up(&self.radius / &denom);
        let radius = up(&spread + &ulp(&center));
        Some(Ball { center, radius })
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        let prec = self.prec().max(other.prec());
        let (center, ord) =
            Float::with_val_round(prec, &self.center * &other.center, Round::Nearest);
        let ax = up(self.center.abs_ref());
        let ay = up(other.center.abs_ref());
        let cross = up(&self.radius * &other.radius);
        let s1 = up(&ax * &other.radius);
        let s2 = up(&ay * &self.radius);
        let spread = up(&s1 + &s2);
        let mut radius = up(&spread + &cross);
        if ord != Ordering::Equal {
            radius = up(&radius + &ulp(&center));
        }
        Ball { center, radius }
    }

    pub fn contains(&self, x: &Float) -> bool {
        self.lo() <= *x && *x <= self.hi()
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        let lo = self.lo();
        let hi = self.hi();
        lo <= *q && hi >= *q
    }

    /// Nearest integer with `self - k` in `[-1/2, 1/2)`, when unambiguous.
    pub fn nearest(&self) -> Result<Integer> {
        let shifted = Float::with_val(self.prec() + 8, &self.center + 0.5f64);
        let k = shifted
            .floor()
            .to_integer()
            .ok_or_else(|| Error::BadParams("non-finite ball".into()))?;
        let lo_edge = Rational::from((Integer::from(&k * 2u32) - 1u32, 2u32));
        let hi_edge = Rational::from((Integer::from(&k * 2u32) + 1u32, 2u32));
        if self.lo() < lo_edge {
            return Err(Error::AmbiguousBall {
                boundary: lo_edge.to_string(),
            });
        }
        if self.hi() >= hi_edge {
            return Err(Error::AmbiguousBall {
                boundary: hi_edge.to_string(),
            });
        }
        Ok(k)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.prec() as f64) * std::f64::consts::LOG10_2).ceil() as usize;
        write!(
            f,
            "{} +/- {}",
            self.center.to_string_radix(10, Some(digits.max(2))),
            self.radius.to_string_radix(10, Some(3))
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_ball_is_tight() {
        let b = Ball::from_rational(&Rational::from((1, 3)), 128);
        assert!(b.radius() <= &Float::with_val(64, Float::u_exp(1, -126)));
        assert!(b.contains_rational(&Rational::from((1, 3))));
        let exact = Ball::from_rational(&Rational::from((3, 4)), 64);
        assert_eq!(exact.radius(), &Float::with_val(64, 0u32));
    }

    #[test]
    fn recip_encloses() {
        let b = Ball::from_rational(&Rational::from((2, 7)), 100);
        let r = b.recip().unwrap();
        assert!(r.contains_rational(&Rational::from((7, 2))));
        let z = Ball::new(Float::with_val(64, 0.1), Float::with_val(64, 0.2)).unwrap();
        assert!(z.recip().is_none());
    }

    #[test]
    fn nearest_detects_straddle() {
        let b = Ball::new(Float::with_val(64, 0.5), Float::with_val(64, 1e-10)).unwrap();
        assert!(matches!(b.nearest(), Err(Error::AmbiguousBall { .. })));
        let c = Ball::from_decimal("0.75", 64).unwrap();
        assert_eq!(c.nearest().unwrap(), 1);
        let h = Ball::from_decimal("0.5", 64).unwrap();
        assert_eq!(h.nearest().unwrap(), 1);
    }
}
