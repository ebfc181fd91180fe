//! Quadrature, principal-value integration, special functions and series
//! acceleration used throughout the crate.

pub mod pole;
pub mod quad;
pub mod series;
pub mod special;

pub use pole::{laurent_fit, pv_integral_above, pv_integral_above_with_breaks, LaurentFit, PoleKind, PoleSpec, PvResult, ResolvedPole};
pub use quad::{integrate, integrate_segments, integrate_with_breaks, Domain, Oscillator, QuadConfig, QuadValue, Quadrature};
pub use series::{sum_matsubara, sum_matsubara_from, WynnEpsilon};
pub use special::{digamma, digamma_real, trigamma, trigamma_real};
