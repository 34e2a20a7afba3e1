//! One-shot rate-distortion-perception coders at perfect perceptual quality.
//!
//! The crate covers three families of quantizers that all reproduce the source law exactly:
//! deterministic encoders with decoder-side noise, dithered quantizers, and the staggered
//! quantizers that sit between them (a small set of offset quantizers selected by shared
//! randomness, with a conditional resampling decoder). Reference curves and estimators are
//! provided alongside so that every simulated point can be checked against a closed form,
//! a quadrature value, or an information-theoretic limit.
//!
//! * [`sources`]: scalar laws, quantiles, truncated resampling.
//! * [`circle`]: unit-circle coders and their closed forms.
//! * [`frontier`]: the perfect-perception frontier on the circle and scalar reference rates.
//! * [`stagger`]: staggered quantizers for general scalar sources.
//! * [`metrics`]: distortion, entropy and perception estimators.
//! * [`simlab`]: seeded experiment configs, sweeps and the CSV/JSON row format.

// Guards of the form `!(x > 0.0)` are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle;
pub mod error;
pub mod frontier;
pub mod mc;
pub mod metrics;
pub mod quad;
pub mod rng;
pub mod simlab;
pub mod sources;
pub mod stagger;

pub use error::{Error, Result};
