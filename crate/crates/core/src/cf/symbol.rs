use std::fmt;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::mobius::Mobius;
use crate::error::{Error, Result};
use crate::numeric::Quadratic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// One step `(a_n, s_n)` of a modified continued fraction:
/// `1/alpha_{n-1} = a_n + s_n * alpha_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct McfSymbol {
    a: u64,
    s: Sign,
}

impl McfSymbol {
    /// Rejects `a < 2` and `(2, -)`.
    pub fn new(a: u64, s: Sign) -> Result<Self> {
        if a < 2 || (a == 2 && s == Sign::Minus) {
            return Err(Error::InvalidSymbol {
                a,
                sign: s.as_char(),
            });
        }
        Ok(McfSymbol { a, s })
    }

    pub fn plus(a: u64) -> Result<Self> {
        Self::new(a, Sign::Plus)
    }

    pub fn minus(a: u64) -> Result<Self> {
        Self::new(a, Sign::Minus)
    }

    pub fn a(self) -> u64 {
        self.a
    }

    pub fn s(self) -> Sign {
        self.s
    }

    /// The map `t -> 1 / (a + s t)` recovering `alpha_{n-1}` from `alpha_n`.
    pub fn mobius(self) -> Mobius {
        Mobius::new(
            Integer::new(),
            Integer::from(1),
            Integer::from(self.s.as_i32()),
            Integer::from(self.a),
        )
    }

    /// The floor-convention entry `a` such that this symbol's interval lies in `1/x in (a, a+1)`.
    pub fn floor_entry(self) -> u64 {
        match self.s {
            Sign::Plus => self.a,
            Sign::Minus => self.a - 1,
        }
    }
}

impl fmt::Display for McfSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.s.as_char())
    }
}

impl Serialize for McfSymbol {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        (self.a, self.s.as_i32()).serialize(ser)
    }
}

/// A real number given by its symbol sequence: `a0 + s0 * alpha_0` where
/// `alpha_0` is coded by `preperiod` followed (optionally) by `period`
/// repeated forever. Without a period the tail is 0 and the value is rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolStream {
    pub a0: i64,
    pub s0: Sign,
    pub preperiod: Vec<McfSymbol>,
    pub period: Vec<McfSymbol>,
}

impl SymbolStream {
    pub fn new(a0: i64, s0: Sign, preperiod: Vec<McfSymbol>, period: Vec<McfSymbol>) -> Self {
        SymbolStream {
            a0,
            s0,
            preperiod,
            period,
        }
    }

    pub fn is_periodic(&self) -> bool {
        !self.period.is_empty()
    }

    /// The `n`-th symbol `(a_{n+1}, s_{n+1})`, if the stream has one.
    pub fn symbol(&self, n: usize) -> Option<McfSymbol> {
        if n < self.preperiod.len() {
            Some(self.preperiod[n])
        } else if self.period.is_empty() {
            None
        } else {
            Some(self.period[(n - self.preperiod.len()) % self.period.len()])
        }
    }

    /// The first `n` symbols (fewer if the stream is finite).
    pub fn prefix(&self, n: usize) -> Vec<McfSymbol> {
        (0..n).map_while(|k| self.symbol(k)).collect()
    }

    /// Exact fixed point in `(0, 1/2)` of the period map, or 0 without a period.
    pub fn tail(&self) -> Result<Quadratic> {
        if self.period.is_empty() {
            return Ok(Quadratic::from_int(0));
        }
        periodic_fixed_point(&self.period)
    }

    /// `alpha_0 ..= alpha_depth` at `prec` bits by running `t -> 1/(a + s t)`
    /// backwards from the exact periodic tail; the map contracts, so every
    /// value keeps full relative precision. A finite stream stops before its zero tail.
    pub fn alphas_float(&self, depth: usize, prec: u32) -> Result<Vec<Float>> {
        let l = self.preperiod.len();
        if self.period.is_empty() {
            let mut out = Vec::with_capacity(l);
            let mut t = Float::new(prec);
            for sym in self.preperiod.iter().rev() {
                t = backward(sym, &t, prec);
                out.push(t.clone());
            }
            out.reverse();
            out.truncate(depth + 1);
            return Ok(out);
        }
        let p = self.period.len();
        let reps = (depth + 1).saturating_sub(l).div_ceil(p).max(1);
        let top = l + p * reps;
        let mut t = self.tail()?.to_float(prec);
        let mut out = vec![Float::new(prec); top + 1];
        out[top] = t.clone();
        for n in (1..=top).rev() {
            t = backward(&self.symbol(n - 1).expect("periodic"), &t, prec);
            out[n - 1] = t.clone();
        }
        out.truncate(depth + 1);
        Ok(out)
    }

    pub fn to_quadratic(&self) -> Result<Quadratic> {
        let tail = self.tail()?;
        let alpha0 = Mobius::from_symbols(&self.preperiod).apply_quadratic(&tail)?;
        let signed = if self.s0 == Sign::Plus {
            alpha0
        } else {
            alpha0.neg()
        };
        Ok(signed.add_int(&Integer::from(self.a0)))
    }
}

fn backward(sym: &McfSymbol, t: &Float, prec: u32) -> Float {
    let st = if sym.s() == Sign::Plus {
        Float::with_val(prec, t)
    } else {
        Float::with_val(prec, -t)
    };
    let d = st + sym.a();
    Float::with_val(prec, d.recip_ref())
}

/// The attracting fixed point in `(0, 1/2)` of the composition of `period`.
pub fn periodic_fixed_point(period: &[McfSymbol]) -> Result<Quadratic> {
    if period.is_empty() {
        return Err(Error::BadParams("empty period".into()));
    }
    let m = Mobius::from_symbols(period);
    // t = (p t + q)/(r t + s)  <=>  r t² + (s - p) t - q = 0
    let (p, q, r, s) = m.entries();
    let lin = Integer::from(s - p);
    let disc = Integer::from(&lin * &lin) + Integer::from(q * r) * 4u32;
    let two_r = Integer::from(r * 2u32);
    let half = Rational::from((1, 2));
    for sign in [1i32, -1] {
        let root = Quadratic::new(
            Integer::from(-&lin),
            Integer::from(sign),
            two_r.clone(),
            disc.clone(),
        )?;
        if root.signum() > 0 && root.cmp_rational(&half) == std::cmp::Ordering::Less {
            return Ok(root);
        }
    }
    Err(Error::InvalidTail(
        "period has no fixed point in (0, 1/2)".into(),
    ))
}
