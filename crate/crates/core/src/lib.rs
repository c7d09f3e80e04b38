//! Continued fractions, Brjuno sums and Siegel-disk radii of quadratic
//! polynomials, with the arithmetic estimates needed to probe the
//! 1/2-Hölder regularity of `log r + Y` on high-type numbers.

pub mod brjuno;
pub mod cf;
pub mod error;
pub mod holder;
pub mod intervals;
pub mod numeric;
pub mod siegel;

pub use cf::{
    classical_expand, is_high_type, mcf_expand, reconstruct, reconstruct_signed, sample_high_type,
    ClassicalExpansion, ContinuedFraction, McfExpansion, McfSymbol, Sign, SymbolStream,
};
pub use error::{Error, Result};
pub use intervals::{fundamental_interval, FundInterval, SplitReport};
pub use numeric::{d_log, parse_alpha, LogDistance, PrecisionCtx, RealValue};
