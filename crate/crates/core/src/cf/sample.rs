//! Deterministic samplers of high-type numbers.
//!
//! Entries are drawn uniformly and the last drawn symbol repeats forever, so
//! every sample is an exact quadratic surd whose expansion reproduces the draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Integer;

use super::mobius::Mobius;
use super::symbol::{McfSymbol, Sign, SymbolStream};
use super::{classical_expand, mcf_expand, ClassicalExpansion, McfExpansion};
use crate::error::{Error, Result};
use crate::numeric::{PrecisionCtx, Quadratic, RealValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SignMode {
    /// Fair coin per symbol; `-` needs `a >= 3`.
    #[default]
    Mixed,
    PlusOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HighTypeSampler {
    pub n_min: u64,
    pub a_max: u64,
    /// Number of drawn symbols; the expansion is computed to this depth.
    pub depth: usize,
    pub signs: SignMode,
}

impl HighTypeSampler {
    pub fn new(n_min: u64, a_max: u64, depth: usize) -> Result<Self> {
        if n_min < 2 || a_max < n_min || depth == 0 {
            return Err(Error::BadParams(format!(
                "need 2 <= N <= a_max and depth >= 1 (got N={n_min}, a_max={a_max}, depth={depth})"
            )));
        }
        Ok(HighTypeSampler {
            n_min,
            a_max,
            depth,
            signs: SignMode::Mixed,
        })
    }

    pub fn with_signs(mut self, signs: SignMode) -> Self {
        self.signs = signs;
        self
    }

    pub fn draw_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> McfSymbol {
        let minus_floor = self.n_min.max(3);
        let minus_ok = self.signs == SignMode::Mixed && minus_floor <= self.a_max;
        if minus_ok && rng.gen_bool(0.5) {
            let a = rng.gen_range(minus_floor..=self.a_max);
            McfSymbol::minus(a).expect("a >= 3")
        } else {
            let a = rng.gen_range(self.n_min..=self.a_max);
            McfSymbol::plus(a).expect("a >= 2")
        }
    }
}

/// Draws `depth` symbols and closes the stream with the last one as period.
pub fn draw_stream<R: Rng + ?Sized>(cfg: &HighTypeSampler, rng: &mut R) -> SymbolStream {
    let mut drawn: Vec<McfSymbol> = (0..cfg.depth).map(|_| cfg.draw_symbol(rng)).collect();
    let last = drawn.pop().expect("depth >= 1");
    SymbolStream::new(0, Sign::Plus, drawn, vec![last])
}

pub fn sample_high_type_with<R: Rng + ?Sized>(
    cfg: &HighTypeSampler,
    rng: &mut R,
    ctx: PrecisionCtx,
) -> Result<(RealValue, McfExpansion)> {
    let stream = draw_stream(cfg, rng);
    let value = RealValue::from_quadratic(stream.to_quadratic()?);
    let exp = mcf_expand(&value, cfg.depth, ctx)?;
    Ok((value, exp))
}

/// A high-type number in `(0, 1/2)` with entries in `[n_min, a_max]`, mixed signs.
pub fn sample_high_type(
    n_min: u64,
    a_max: u64,
    depth: usize,
    seed: u64,
) -> Result<(RealValue, McfExpansion)> {
    let cfg = HighTypeSampler::new(n_min, a_max, depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_high_type_with(&cfg, &mut rng, PrecisionCtx::default())
}

/// Classical counterpart: floor entries uniform in `[n_min, a_max]`, the last one repeating.
pub fn sample_classical(
    n_min: u64,
    a_max: u64,
    depth: usize,
    seed: u64,
) -> Result<(RealValue, ClassicalExpansion)> {
    if n_min < 1 || a_max < n_min || depth == 0 {
        return Err(Error::BadParams(
            "need 1 <= N <= a_max and depth >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<u64> = (0..depth).map(|_| rng.gen_range(n_min..=a_max)).collect();
    let c = Integer::from(*entries.last().unwrap());
    // t = 1/(c + t)
    let disc = Integer::from(&c * &c) + 4u32;
    let tail = Quadratic::new(Integer::from(-&c), Integer::from(1), Integer::from(2), disc)?;
    let m = entries[..depth - 1]
        .iter()
        .fold(Mobius::identity(), |acc, &e| {
            acc.compose(&Mobius::new(
                Integer::new(),
                Integer::from(1),
                Integer::from(1),
                Integer::from(e),
            ))
        });
    let value = RealValue::from_quadratic(m.apply_quadratic(&tail)?);
    let exp = classical_expand(&value, depth, PrecisionCtx::default())?;
    Ok((value, exp))
}
