//! Exact arithmetic in a real quadratic field.
//!
//! A [`Quadratic`] is `(a + b*sqrt(d)) / c` with integer coefficients, `c > 0`,
//! `gcd(a, b, c) = 1` and `d` square-free. When `b = 0` the value is rational
//! and `d` is normalised to 1. The continued-fraction maps `x -> 1/x - k` and
//! `x -> -x` are closed on this representation, which is what makes periodic
//! expansions exactly checkable.

use std::cmp::Ordering;
use std::fmt;

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Trial-division bound used when extracting square factors of `d`.
const SQUAREFREE_TRIAL_BOUND: u32 = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quadratic {
    a: Integer,
    b: Integer,
    c: Integer,
    d: Integer,
}

impl Quadratic {
    /// Builds `(a + b*sqrt(d)) / c`, pulling square factors out of `d`.
    pub fn new(a: Integer, b: Integer, c: Integer, d: Integer) -> Result<Self> {
        if c == 0 {
            return Err(Error::DivisionByZero);
        }
        if d < 0 {
            return Err(Error::BadParams("negative radicand".into()));
        }
        let (k, d) = split_square(d);
        Ok(Self::normalized(a, b * k, c, d))
    }

    pub fn from_int(n: impl Into<Integer>) -> Self {
        Self::normalized(n.into(), Integer::new(), Integer::from(1), Integer::from(1))
    }

    pub fn from_rational(q: &Rational) -> Self {
        Self::normalized(
            q.numer().clone(),
            Integer::new(),
            q.denom().clone(),
            Integer::from(1),
        )
    }

    /// `d` must already be square-free.
    fn normalized(mut a: Integer, mut b: Integer, mut c: Integer, mut d: Integer) -> Self {
        if b == 0 || d == 0 {
            b = Integer::new();
            d = Integer::from(1);
        } else if d == 1 {
            a += &b;
            b = Integer::new();
        }
        if c < 0 {
            a = -a;
            b = -b;
            c = -c;
        }
        let mut g = Integer::from(a.gcd_ref(&b));
        g = Integer::from(g.gcd_ref(&c));
        if g != 1 && g != 0 {
            a = a.div_exact(&g);
            b = b.div_exact(&g);
            c = c.div_exact(&g);
        }
        Quadratic { a, b, c, d }
    }

    pub fn a(&self) -> &Integer {
        &self.a
    }
    pub fn b(&self) -> &Integer {
        &self.b
    }
    pub fn c(&self) -> &Integer {
        &self.c
    }
    pub fn d(&self) -> &Integer {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b == 0
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational()
            .then(|| Rational::from((self.a.clone(), self.c.clone())))
    }

    /// Sign of the value: -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        sign_of_sum(&self.a, &self.b, &self.d)
    }

    pub fn neg(&self) -> Self {
        Quadratic {
            a: Integer::from(-&self.a),
            b: Integer::from(-&self.b),
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // c / (a + b√d) = c (a - b√d) / (a² - b² d)
        let norm = Integer::from(&self.a * &self.a) - Integer::from(&self.b * &self.b) * &self.d;
        Ok(Self::normalized(
            Integer::from(&self.c * &self.a),
            -Integer::from(&self.c * &self.b),
            norm,
            self.d.clone(),
        ))
    }

    pub fn add_int(&self, k: &Integer) -> Self {
        Self::normalized(
            &self.a + Integer::from(k * &self.c),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
        )
    }

    pub fn sub_int(&self, k: &Integer) -> Self {
        self.add_int(&Integer::from(-k))
    }

    fn common_radicand(&self, other: &Self) -> Result<Integer> {
        match (self.is_rational(), other.is_rational()) {
            (true, true) => Ok(Integer::from(1)),
            (true, false) => Ok(other.d.clone()),
            (false, true) => Ok(self.d.clone()),
            (false, false) if self.d == other.d => Ok(self.d.clone()),
            _ => Err(Error::IncompatibleFields),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        Ok(Self::normalized(
            Integer::from(&self.a * &other.c) + Integer::from(&other.a * &self.c),
            Integer::from(&self.b * &other.c) + Integer::from(&other.b * &self.c),
            Integer::from(&self.c * &other.c),
            d,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        let bb = Integer::from(&self.b * &other.b) * &d;
        Ok(Self::normalized(
            Integer::from(&self.a * &other.a) + bb,
            Integer::from(&self.a * &other.b) + Integer::from(&self.b * &other.a),
            Integer::from(&self.c * &other.c),
            d,
        ))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.recip()?)
    }

    /// Multiplies by a rational number.
    pub fn scale(&self, q: &Rational) -> Self {
        Self::normalized(
            Integer::from(&self.a * q.numer()),
            Integer::from(&self.b * q.numer()),
            Integer::from(&self.c * q.denom()),
            self.d.clone(),
        )
    }

    /// Exact floor.
    pub fn floor(&self) -> Integer {
        // floor((a + y)/c) = floor((a + floor(y))/c) for integer a and c > 0.
        let disc = Integer::from(&self.b * &self.b) * &self.d;
        let s = Integer::from(disc.sqrt_ref());
        let fy = if self.b >= 0 {
            s
        } else if Integer::from(&s * &s) == disc {
            -s
        } else {
            -s - 1u32
        };
        let (q, _) = (Integer::from(&self.a + &fy)).div_rem_floor(self.c.clone());
        q
    }

    /// The integer `k` with `self - k` in `[-1/2, 1/2)`.
    pub fn nearest(&self) -> Integer {
        // floor(x + 1/2) = floor((2a + c + 2b√d) / 2c)
        let shifted = Quadratic {
            a: Integer::from(&self.a * 2u32) + &self.c,
            b: Integer::from(&self.b * 2u32),
            c: Integer::from(&self.c * 2u32),
            d: self.d.clone(),
        };
        shifted.floor()
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        let diff = Self::normalized(
            Integer::from(&self.a * q.denom()) - Integer::from(q.numer() * &self.c),
            Integer::from(&self.b * q.denom()),
            Integer::from(&self.c * q.denom()),
            self.d.clone(),
        );
        diff.signum().cmp(&0)
    }

    /// Exact comparison; fails only when the fields differ.
    pub fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        Ok(self.sub(other)?.signum().cmp(&0))
    }

    /// Rounded to `prec` bits with relative error below `2^(2 - prec)`.
    pub fn to_float(&self, prec: u32) -> Float {
        let work = prec + 8;
        if self.is_rational() {
            return Float::with_val(prec, &Rational::from((self.a.clone(), self.c.clone())));
        }
        let disc = Integer::from(&self.b * &self.b) * &self.d;
        let root = Float::with_val(work, &disc).sqrt();
        let opposite = self.a != 0 && (self.a < 0) != (self.b < 0);
        if opposite {
            // (a + b√d)/c = (a² - b²d) / (c (a - b√d)); the denominator has no cancellation.
            let num = Integer::from(&self.a * &self.a) - &disc;
            let den = if self.a > 0 {
                Float::with_val(work, &self.a) + root
            } else {
                Float::with_val(work, &self.a) - root
            };
            let den = den * &self.c;
            Float::with_val(prec, Float::with_val(work, &num) / den)
        } else {
            let signed = if self.b < 0 { -root } else { root };
            let num = signed + &self.a;
            Float::with_val(prec, num / &self.c)
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(64).to_f64()
    }

    /// Lower bound on the number of bits needed to hold the coefficients.
    pub fn height_bits(&self) -> u32 {
        self.a
            .significant_bits()
            .max(self.b.significant_bits())
            .max(self.c.significant_bits())
    }
}

/// Sign of `a + b*sqrt(d)` for `d >= 0`.
fn sign_of_sum(a: &Integer, b: &Integer, d: &Integer) -> i32 {
    let sa = a.cmp0() as i32;
    let sb = if *d == 0 { 0 } else { b.cmp0() as i32 };
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    // opposite signs: compare a² with b²d
    let a2 = Integer::from(a * a);
    let b2d = Integer::from(b * b) * d;
    match a2.cmp(&b2d) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => 0,
    }
}

/// Returns `(k, m)` with `d = k² m`, reducing `m` as far as trial division allows.
fn split_square(d: Integer) -> (Integer, Integer) {
    if d <= 1 {
        return (Integer::from(1), d);
    }
    let mut k = Integer::from(1);
    let mut m = d;
    let mut p: u32 = 2;
    while p <= SQUAREFREE_TRIAL_BOUND {
        let pp = u64::from(p) * u64::from(p);
        if m < pp {
            break;
        }
        while m.is_divisible_u(p) {
            let q = Integer::from(m.div_exact_u_ref(p));
            if q.is_divisible_u(p) {
                m = q.div_exact_u(p);
                k *= p;
            } else {
                break;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m.is_perfect_square() {
        let r = m.sqrt();
        k *= &r;
        m = Integer::from(1);
    }
    (k, m)
}

impl fmt::Display for Quadratic {
    /// Renders in the `surd:` alpha-spec body form `(a+b*sqrt(d))/c`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}/{}", self.a, self.c)
        } else {
            let sign = if self.b < 0 { '-' } else { '+' };
            write!(
                f,
                "({}{}{}*sqrt({}))/{}",
                self.a,
                sign,
                Integer::from(self.b.abs_ref()),
                self.d,
                self.c
            )
        }
    }
}
