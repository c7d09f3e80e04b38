//! Linearization of `P(z) = lambda z + z^2`, `lambda = e^{2 pi i alpha}`, and
//! the quantities assembled from it.
//!
//! The linearizing map `phi(w) = sum b_n w^n` solves `phi(lambda w) = P(phi(w))`,
//! which gives `b_1 = 1` and `(lambda^n - lambda) b_n = sum_{j=1}^{n-1} b_j b_{n-j}`.
//! Its radius of convergence is the conformal radius of the Siegel disk.

use std::io::{self, Read, Write};

use rug::float::Constant;
use rug::ops::NegAssign;
use rug::{Assign, Complex, Float, Integer, Rational};
use serde_json::json;

use crate::brjuno::{brjuno_eval, fine_scale_part, BrjunoResult, TailAssumption};
use crate::cf::mcf_expand;
use crate::error::{Error, Result};
use crate::numeric::{PrecisionCtx, RealValue};

/// Extra bits carried on `alpha` so that `n alpha mod 1` keeps full precision.
const GUARD_BITS: u32 = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationSeries {
    pub alpha: RealValue,
    pub lambda: Complex,
    /// `b_1 ..= b_N`; `coeffs[0] = b_1 = 1`.
    pub coeffs: Vec<Complex>,
    pub n: usize,
    pub bits: u32,
    /// `min_{2 <= n <= N} |lambda^n - lambda|`.
    pub min_divisor: f64,
    /// Largest relative coefficient error, estimated from a half-precision rerun.
    pub rel_error: Option<f64>,
}

impl LinearizationSeries {
    /// Wraps given coefficients (`coeffs[0] = b_1`) for the estimators.
    pub fn from_coeffs(alpha: RealValue, coeffs: Vec<Complex>) -> Self {
        let bits = coeffs.first().map_or(64, |c| c.prec().0);
        LinearizationSeries {
            lambda: multiplier(&alpha, bits),
            n: coeffs.len(),
            alpha,
            coeffs,
            bits,
            min_divisor: f64::NAN,
            rel_error: None,
        }
    }

    /// `b_n`, `n >= 1`.
    pub fn b(&self, n: usize) -> &Complex {
        &self.coeffs[n - 1]
    }

    /// Bits of agreement with the half-precision rerun, if it was made.
    pub fn achieved_bits(&self) -> Option<f64> {
        self.rel_error
            .map(|e| if e > 0.0 { -e.log2() } else { self.bits as f64 })
    }
}

fn two_pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi) * 2u32
}

/// `x - round(x)`, odd in `x` so that `-alpha` yields mirrored phases.
fn reduce(x: &Float) -> Float {
    let r = Float::with_val(x.prec(), x.round_ref());
    Float::with_val(x.prec(), x - &r)
}

/// A rotation angle in turns: exact for rational `alpha`, else a wide float.
#[derive(Clone, Debug)]
enum Turns {
    Exact(Rational),
    Approx(Float),
}

impl Turns {
    fn of(alpha: &RealValue, wide: u32) -> Turns {
        match alpha.exact().and_then(|q| q.to_rational()) {
            Some(q) => Turns::Exact(q),
            None => Turns::Approx(alpha.to_float(wide)),
        }
    }

    /// `self * num / den`.
    fn scaled(&self, num: u64, den: u32) -> Turns {
        match self {
            Turns::Exact(q) => Turns::Exact(Rational::from(q * num) / den),
            Turns::Approx(f) => Turns::Approx(Float::with_val(f.prec(), f * num) / den),
        }
    }

    /// `(sin, cos)` of `2 pi self`, exact at multiples of a quarter turn.
    fn sin_cos(&self, prec: u32) -> (Float, Float) {
        match self {
            Turns::Exact(q) => {
                let r = q - q.clone().round();
                let quarter = Rational::from(Rational::from(&r * 4u32).round_ref());
                if quarter == Rational::from(&r * 4u32) {
                    let (s, c) = match quarter.numer().to_i32().unwrap_or(0) {
                        0 => (0, 1),
                        1 => (1, 0),
                        -1 => (-1, 0),
                        _ => (0, -1),
                    };
                    return (Float::with_val(prec, s), Float::with_val(prec, c));
                }
                let f = Float::with_val(prec + GUARD_BITS, &r);
                turn(&f, prec).sin_cos(Float::new(prec))
            }
            Turns::Approx(f) => turn(f, prec).sin_cos(Float::new(prec)),
        }
    }
}

/// `2 pi (x mod 1)` as a symmetric turn.
fn turn(x: &Float, prec: u32) -> Float {
    Float::with_val(prec, reduce(x) * two_pi(prec))
}

/// `e^{2 pi i x}`.
fn unit_complex(x: &Turns, prec: u32) -> Complex {
    let (s, c) = x.sin_cos(prec);
    Complex::with_val(prec, (c, s))
}

/// `lambda^n - lambda = 2i sin(pi (n-1) alpha) e^{i pi (n+1) alpha}`, which
/// avoids the cancellation of a direct subtraction when the divisor is small.
fn divisor(alpha: &Turns, n: u64, prec: u32) -> Complex {
    let (s, _) = alpha.scaled(n - 1, 2).sin_cos(prec);
    let (sp, cp) = alpha.scaled(n + 1, 2).sin_cos(prec);
    let mut re = Float::with_val(prec, &s * &sp) * 2u32;
    re.neg_assign();
    let im = Float::with_val(prec, &s * &cp) * 2u32;
    Complex::with_val(prec, (re, im))
}

fn complex_abs_f64(z: &Complex) -> f64 {
    Float::with_val(z.prec().0, z.abs_ref()).to_f64()
}

/// Denominator of `alpha` when it is an exact rational.
fn rational_period(alpha: &RealValue) -> Option<Integer> {
    let q = alpha.exact()?.to_rational()?;
    Some(q.denom().clone())
}

fn run_recurrence(
    alpha: &RealValue,
    n_max: usize,
    bits: u32,
) -> Result<(Complex, Vec<Complex>, f64)> {
    let a = Turns::of(alpha, bits + GUARD_BITS);
    let lambda = unit_complex(&a, bits);
    let period = rational_period(alpha);
    let threshold = (-(bits as f64) / 4.0).exp2();
    let mut coeffs: Vec<Complex> = Vec::with_capacity(n_max);
    coeffs.push(Complex::with_val(bits, (1u32, 0u32)));
    let mut min_div = f64::INFINITY;
    let mut acc = Complex::new(bits);
    let mut term = Complex::new(bits);
    for n in 2..=n_max {
        if let Some(q) = &period {
            if Integer::from(n - 1).is_divisible(q) {
                return Err(Error::RationalRotation { n });
            }
        }
        let d = divisor(&a, n as u64, bits);
        let dabs = complex_abs_f64(&d);
        min_div = min_div.min(dabs);
        if dabs < threshold {
            return Err(Error::PrecisionExhausted { generation: n });
        }
        // sum_{j=1}^{n-1} b_j b_{n-j}, folded by symmetry
        acc.assign(0u32);
        for j in 1..=(n - 1) / 2 {
            term.assign(&coeffs[j - 1] * &coeffs[n - j - 1]);
            acc += &term;
        }
        acc *= 2u32;
        if n % 2 == 0 {
            let h = &coeffs[n / 2 - 1];
            term.assign(h * h);
            acc += &term;
        }
        coeffs.push(Complex::with_val(bits, &acc / &d));
    }
    Ok((lambda, coeffs, min_div))
}

/// Coefficients `b_1 ..= b_N` at `ctx.bits()`.
pub fn linearize(alpha: &RealValue, n: usize, ctx: PrecisionCtx) -> Result<LinearizationSeries> {
    if n < 2 {
        return Err(Error::BadParams("series length must be at least 2".into()));
    }
    let bits = ctx.bits();
    let (lambda, coeffs, min_divisor) = run_recurrence(alpha, n, bits)?;
    Ok(LinearizationSeries {
        alpha: alpha.clone(),
        lambda,
        coeffs,
        n,
        bits,
        min_divisor,
        rel_error: None,
    })
}

/// [`linearize`] plus a rerun at half the precision.
///
/// The rerun's deviation measures how many bits the recurrence destroys; the
/// full-precision error is that deviation scaled down by the extra bits.
pub fn linearize_checked(
    alpha: &RealValue,
    n: usize,
    ctx: PrecisionCtx,
) -> Result<LinearizationSeries> {
    let mut series = linearize(alpha, n, ctx)?;
    let low_bits = (ctx.bits() / 2).max(PrecisionCtx::MIN_BITS);
    if low_bits >= ctx.bits() {
        return Ok(series);
    }
    let (_, shadow, _) = run_recurrence(alpha, n, low_bits)?;
    let mut worst = 0.0f64;
    for (hi, lo) in series.coeffs.iter().zip(&shadow) {
        let diff = Complex::with_val(ctx.bits(), hi - lo);
        let rel = complex_abs_f64(&diff) / complex_abs_f64(hi);
        worst = worst.max(rel);
    }
    let scale = (-((ctx.bits() - low_bits) as f64)).exp2();
    series.rel_error = Some(worst * scale);
    Ok(series)
}

/// `max_n |(lambda^n - lambda) b_n - sum b_j b_{n-j}| / |sum b_j b_{n-j}|`,
/// with `lambda^n` taken from repeated multiplication rather than sines.
pub fn recurrence_residual(series: &LinearizationSeries) -> f64 {
    let prec = series.bits;
    let mut pow = series.lambda.clone();
    let mut worst = 0.0f64;
    for n in 2..=series.n {
        pow *= &series.lambda;
        let mut conv = Complex::new(prec);
        for j in 1..n {
            conv += Complex::with_val(prec, series.b(j) * series.b(n - j));
        }
        let d = Complex::with_val(prec, &pow - &series.lambda);
        let lhs = Complex::with_val(prec, &d * series.b(n));
        let r = complex_abs_f64(&Complex::with_val(prec, &lhs - &conv)) / complex_abs_f64(&conv);
        worst = worst.max(r);
    }
    worst
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RadiusEstimate {
    pub r_hat: f64,
    pub window: (usize, usize),
    /// RMS of `log|b_n|` about the fitted line.
    pub fit_residual: f64,
    /// Standard error of the fitted slope, i.e. of `log r_hat`.
    pub slope_stderr: f64,
    pub alt_hadamard: f64,
}

impl RadiusEstimate {
    pub fn log_r(&self) -> f64 {
        self.r_hat.ln()
    }

    /// `|log r_hat - log alt_hadamard|`.
    pub fn estimator_gap(&self) -> f64 {
        (self.r_hat.ln() - self.alt_hadamard.ln()).abs()
    }
}

/// Least-squares slope of `log|b_n|` over `n in [N/2, N]`: `r_hat = exp(-slope)`.
pub fn estimate_radius(series: &LinearizationSeries) -> Result<RadiusEstimate> {
    let n = series.coeffs.len();
    if n < 64 {
        return Err(Error::BadParams(
            "radius estimation needs at least 64 coefficients".into(),
        ));
    }
    let lo = n / 2;
    let mut xs = Vec::with_capacity(n - lo + 1);
    let mut ys = Vec::with_capacity(n - lo + 1);
    let mut hadamard = f64::NEG_INFINITY;
    for k in lo..=n {
        let b = series.b(k);
        let mag = Float::with_val(b.prec().0, b.abs_ref());
        if mag.is_zero() {
            return Err(Error::DegenerateSeries { n: k });
        }
        let l = mag.ln().to_f64();
        hadamard = hadamard.max(l / k as f64);
        xs.push(k as f64);
        ys.push(l);
    }
    let fit = linear_fit(&xs, &ys);
    Ok(RadiusEstimate {
        r_hat: (-fit.slope).exp(),
        window: (lo, n),
        fit_residual: fit.rms,
        slope_stderr: fit.slope_stderr,
        alt_hadamard: (-hadamard).exp(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let rms = (ss / m).sqrt();
    let slope_stderr = if xs.len() > 2 && sxx > 0.0 {
        (ss / (m - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    LinearFit {
        slope,
        intercept,
        rms,
        slope_stderr,
    }
}

/// `e^{2 pi i alpha}` at `prec` bits.
pub fn multiplier(alpha: &RealValue, prec: u32) -> Complex {
    unit_complex(&Turns::of(alpha, prec + GUARD_BITS), prec)
}

/// `Q(z) = lambda z + (27/16) lambda^2 z^2`, whose critical value is `-4/27`.
pub fn q_map(lambda: &Complex, z: &Complex) -> Complex {
    let prec = z.prec().0;
    let lin = Complex::with_val(prec, lambda * z);
    let l2 = Complex::with_val(prec, lambda * lambda);
    let z2 = Complex::with_val(prec, z * z);
    let quad = Complex::with_val(prec, &l2 * &z2) * Float::with_val(prec, 27u32) / 16u32;
    lin + quad
}

/// The nonzero fixed point `sigma = 16 (1 - lambda) lambda^{-2} / 27` of `Q`.
pub fn sigma_fixed_point(alpha: &RealValue, prec: u32) -> Complex {
    let lambda = multiplier(alpha, prec);
    let one_minus = Complex::with_val(prec, 1u32) - &lambda;
    let l2 = Complex::with_val(prec, &lambda * &lambda);
    let s = Complex::with_val(prec, &one_minus / &l2) * 16u32;
    s / 27u32
}

/// `tau(w) = sigma / (1 - e^{-2 pi i alpha w})`, invariant under `w -> w + 1/alpha`.
pub fn covering_tau(alpha: &RealValue, w: &Complex, prec: u32) -> Result<Complex> {
    let a = alpha.to_float(prec + GUARD_BITS);
    if a.is_zero() {
        return Err(Error::BadParams("tau needs alpha != 0".into()));
    }
    let sigma = sigma_fixed_point(alpha, prec);
    // alpha w, with its real part reduced mod 1 so the deck shift is exact
    let aw = Complex::with_val(prec + GUARD_BITS, w * &a);
    let (re, im) = aw.into_real_imag();
    let arg = Complex::with_val(prec, (reduce(&re), im)) * two_pi(prec);
    let e = arg.mul_i(true).exp(); // e^{-2 pi i alpha w}
    let denom = Complex::with_val(prec, 1u32) - e;
    let gap = complex_abs_f64(&denom);
    if gap == 0.0 || gap < (-(prec as f64) / 2.0).exp2() {
        return Err(Error::PoleAtLattice);
    }
    Ok(sigma / denom)
}

/// `max |tau(w)| (e^{2 pi alpha Im w} - 1) / alpha` over `Re w in [0, 1/alpha)`, `Im w` in `heights`.
pub fn tau_decay_constant(
    alpha: &RealValue,
    heights: &[f64],
    columns: usize,
    prec: u32,
) -> Result<f64> {
    let a = alpha.to_f64();
    let mut worst = 0.0f64;
    for &h in heights {
        if h <= 0.0 {
            return Err(Error::BadParams("decay heights must be positive".into()));
        }
        let scale = ((2.0 * std::f64::consts::PI * a.abs() * h).exp() - 1.0) / a.abs();
        for c in 0..columns {
            let re = (c as f64 + 0.5) / (columns as f64 * a);
            let w = Complex::with_val(prec, (re, h));
            let t = covering_tau(alpha, &w, prec)?;
            worst = worst.max(complex_abs_f64(&t) * scale);
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize)]
pub enum Family {
    /// `P(z) = lambda z + z^2`.
    #[default]
    P,
    /// `Q`, whose radius is that of `P` divided by `27/16`.
    Q,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonConfig {
    pub series_n: usize,
    pub depth: usize,
    pub tail: TailAssumption,
    pub ctx: PrecisionCtx,
    pub family: Family,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonSample {
    pub alpha: RealValue,
    pub y: BrjunoResult,
    pub log_r: f64,
    pub upsilon: f64,
    pub series_n: usize,
    pub precision_bits: u32,
    pub radius: RadiusEstimate,
    /// Share of `Y` below the resolution `4/N` of the series.
    pub unresolved: f64,
    /// Brjuno tail + unresolved part + slope standard error + coefficient precision error.
    pub error_bar: f64,
    pub family: Family,
}

impl UpsilonSample {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "alpha": self.alpha.to_spec(),
            "family": self.family,
            "series_n": self.series_n,
            "precision_bits": self.precision_bits,
            "y": self.y.to_json(),
            "log_r": self.log_r,
            "upsilon": self.upsilon,
            "unresolved": self.unresolved,
            "error_bar": self.error_bar,
            "radius": self.radius,
        })
    }
}

/// `log(r(P_alpha)) + Y_{1/2}(alpha)`, or the same for `Q`.
pub fn upsilon(alpha: &RealValue, cfg: &UpsilonConfig) -> Result<UpsilonSample> {
    let exp = mcf_expand(alpha, cfg.depth, cfg.ctx)?;
    if exp.terminated {
        return Err(Error::TerminatedInput);
    }
    let y = brjuno_eval(&exp, cfg.tail)?;
    let series = linearize_checked(alpha, cfg.series_n, cfg.ctx)?;
    let radius = estimate_radius(&series)?;
    let mut log_r = radius.log_r();
    if cfg.family == Family::Q {
        log_r -= (27.0f64 / 16.0).ln();
    }
    let precision_err = series.rel_error.unwrap_or(0.0);
    let unresolved = fine_scale_part(&exp, 4.0 / cfg.series_n as f64);
    Ok(UpsilonSample {
        alpha: alpha.clone(),
        upsilon: log_r + y.value,
        error_bar: y.tail_bound + unresolved + radius.slope_stderr + precision_err,
        unresolved,
        y,
        log_r,
        series_n: cfg.series_n,
        precision_bits: cfg.ctx.bits(),
        radius,
        family: cfg.family,
    })
}

/// Binary dump: one JSON header line, then `(re, im)` pairs of x87 80-bit
/// extended floats, little-endian, 20 bytes per coefficient.
pub fn write_coeff_dump<W: Write>(series: &LinearizationSeries, out: &mut W) -> io::Result<()> {
    let header = json!({
        "alpha_spec": series.alpha.to_spec(),
        "N": series.n,
        "bits": series.bits,
        "encoding": "f80le-pairs",
    });
    writeln!(out, "{header}")?;
    for b in &series.coeffs {
        out.write_all(&encode_f80(b.real()))?;
        out.write_all(&encode_f80(b.imag()))?;
    }
    Ok(())
}

pub fn read_coeff_dump<R: Read>(
    input: &mut R,
) -> io::Result<(serde_json::Value, Vec<(Float, Float)>)> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "missing header line"))?;
    let header: serde_json::Value = serde_json::from_slice(&bytes[..nl])
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let body = &bytes[nl + 1..];
    if body.len() % 20 != 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "truncated coefficient body",
        ));
    }
    let pairs = body
        .chunks_exact(20)
        .map(|c| {
            (
                decode_f80(c[..10].try_into().unwrap()),
                decode_f80(c[10..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((header, pairs))
}

/// Rounds to 64 significant bits; overflow saturates to infinity, underflow flushes to zero.
pub fn encode_f80(x: &Float) -> [u8; 10] {
    let mut out = [0u8; 10];
    let neg = x.is_sign_negative();
    let sign: u16 = if neg { 0x8000 } else { 0 };
    let y = Float::with_val(64, x);
    let (mantissa, biased) = if y.is_nan() {
        (0xC000_0000_0000_0000u64, 0x7fffu16)
    } else if y.is_infinite() {
        (1u64 << 63, 0x7fff)
    } else if y.is_zero() {
        (0, 0)
    } else {
        let (m, e) = y.to_integer_exp().expect("finite");
        let m = m.abs().to_u64().expect("64-bit mantissa");
        let biased = e as i64 + 16383 + 63;
        if biased >= 0x7fff {
            (1u64 << 63, 0x7fff)
        } else if biased <= 0 {
            (0, 0)
        } else {
            (m, biased as u16)
        }
    };
    out[..8].copy_from_slice(&mantissa.to_le_bytes());
    out[8..].copy_from_slice(&(sign | biased).to_le_bytes());
    out
}

pub fn decode_f80(bytes: [u8; 10]) -> Float {
    let mantissa = u64::from_le_bytes(bytes[..8].try_into().unwrap());
    let se = u16::from_le_bytes(bytes[8..].try_into().unwrap());
    let neg = se & 0x8000 != 0;
    let biased = (se & 0x7fff) as i32;
    let mut f = if biased == 0x7fff {
        if mantissa << 1 == 0 {
            Float::with_val(64, rug::float::Special::Infinity)
        } else {
            Float::with_val(64, rug::float::Special::Nan)
        }
    } else {
        Float::with_val(64, mantissa) << (biased - 16383 - 63)
    };
    if neg {
        f.neg_assign();
    }
    f
}
