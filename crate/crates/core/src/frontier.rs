//! Information-theoretic reference curves.
//!
//! On the circle the perfect-perception frontier is traced by the law
//! `p(z; λ) ∝ exp(λ cos z)` on (−π, π]: each `λ > 0` gives the pair
//! `(log 2π − h(Z), E[2 − 2cos Z])`. All integrals are evaluated as `exp(−2λ sin²(z/2))` so that
//! nothing overflows or cancels, and entropies stay in nats until the final conversion to bits.

use std::f64::consts::{LN_2, PI, TAU};

use rayon::prelude::*;

use crate::circle::{FrontierPoint, PointParams, Provenance};
use crate::error::{invalid, Error, Result};
use crate::quad::Simpson;

pub const MAX_LAMBDA: f64 = 1e4;
/// Above this concentration the integrals are taken in the variable `z·√λ`.
const RESCALE_ABOVE: f64 = 50.0;
const QUAD_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VonMisesLaw {
    lambda: f64,
    /// `∫ exp(λ(cos z − 1)) dz` over (−π, π].
    scaled_normalizer: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VonMisesStats {
    pub lambda: f64,
    /// `ln ∫ exp(λ cos z) dz`.
    pub log_normalizer: f64,
    pub mean_cos: f64,
    /// `E[1 − cos Z]`, computed directly to keep precision at large λ.
    pub mean_one_minus_cos: f64,
    pub entropy_nats: f64,
    /// `ln 2π − h`: divergence from the uniform law, i.e. the rate in nats.
    pub divergence_nats: f64,
}

/// `2 sin²(z/2)`, free of the cancellation in `1 − cos z` near 0.
fn one_minus_cos(z: f64) -> f64 {
    let s = (0.5 * z).sin();
    2.0 * s * s
}

/// `∫_{−π}^{π} g(z) dz` for an even integrand peaked at 0.
fn integrate_even<G: Fn(f64) -> f64>(g: G, lambda: f64, tol: f64) -> Result<f64> {
    if lambda > RESCALE_ABOVE {
        let s = lambda.sqrt();
        let v = Simpson::new(tol).integrate(|t| g(t / s), 0.0, PI * s)?;
        Ok(2.0 * v / s)
    } else {
        Ok(2.0 * Simpson::new(tol).integrate(g, 0.0, PI)?)
    }
}

impl VonMisesLaw {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= MAX_LAMBDA) {
            return Err(invalid(format!("lambda must lie in (0, {MAX_LAMBDA}], got {lambda}")));
        }
        let scaled_normalizer = integrate_even(|z| (-lambda * one_minus_cos(z)).exp(), lambda, QUAD_TOL)?;
        Ok(VonMisesLaw { lambda, scaled_normalizer })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn pdf(&self, z: f64) -> f64 {
        (-self.lambda * one_minus_cos(z)).exp() / self.scaled_normalizer
    }

    pub fn log_normalizer(&self) -> f64 {
        self.lambda + self.scaled_normalizer.ln()
    }

    pub fn stats(&self) -> Result<VonMisesStats> {
        let lambda = self.lambda;
        let tol = QUAD_TOL * lambda.recip().min(1.0);
        let m = integrate_even(
            |z| {
                let c = one_minus_cos(z);
                c * (-lambda * c).exp()
            },
            lambda,
            tol,
        )? / self.scaled_normalizer;
        let entropy_nats = self.scaled_normalizer.ln() + lambda * m;
        // For small λ the divergence is O(λ²), far below the rounding of ln 2π − h. Writing
        // C̃/2π = 1 + u with u from an expm1 integrand leaves a cancellation of relative size ε/λ.
        let divergence_nats = if lambda < 1.0 {
            let u = integrate_even(|z| (-lambda * one_minus_cos(z)).exp_m1(), lambda, QUAD_TOL * lambda)? / TAU;
            -lambda * m - u.ln_1p()
        } else {
            TAU.ln() - entropy_nats
        };
        Ok(VonMisesStats {
            lambda,
            log_normalizer: self.log_normalizer(),
            mean_cos: 1.0 - m,
            mean_one_minus_cos: m,
            // h = ln C − λ E[cos Z] = ln C̃ + λ E[1 − cos Z]
            entropy_nats,
            divergence_nats,
        })
    }
}

/// One point of the perfect-perception frontier on the circle.
pub fn rdp_point(lambda: f64) -> Result<FrontierPoint> {
    let stats = VonMisesLaw::new(lambda)?.stats()?;
    Ok(FrontierPoint {
        rate_bits: (stats.divergence_nats / LN_2).max(0.0),
        distortion: 2.0 * stats.mean_one_minus_cos,
        provenance: Provenance::Quadrature,
        params: PointParams::Lambda(lambda),
    })
}

/// Frontier points for a strictly increasing λ grid; fails unless distortion strictly
/// decreases and rate strictly increases along it.
pub fn rdp_curve(lambdas: &[f64]) -> Result<Vec<FrontierPoint>> {
    if lambdas.is_empty() {
        return Err(Error::EmptyInput);
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("lambda grid must be strictly increasing"));
    }
    let points: Vec<FrontierPoint> = lambdas.par_iter().map(|&l| rdp_point(l)).collect::<Result<_>>()?;
    for (w, l) in points.windows(2).zip(&lambdas[1..]) {
        if !(w[1].distortion < w[0].distortion && w[1].rate_bits > w[0].rate_bits) {
            return Err(Error::NonMonotone(*l));
        }
    }
    Ok(points)
}

/// `points` log-spaced values from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) || points == 0 {
        return Err(invalid(format!("bad log grid [{min}, {max}] with {points} points")));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..points)
        .map(|i| {
            if i == 0 {
                min
            } else if i == points - 1 {
                max
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

/// Frontier rate at distortion `d`, by bisection on `ln λ`.
pub fn rdp_rate_at_distortion(d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(invalid(format!("distortion must be > 0, got {d}")));
    }
    let (mut lo, mut hi) = (1e-8_f64.ln(), MAX_LAMBDA.ln());
    let at = |ll: f64| rdp_point(ll.exp().min(MAX_LAMBDA));
    if d >= at(lo)?.distortion {
        return Ok(0.0);
    }
    if d < at(hi)?.distortion {
        return Err(invalid(format!("distortion {d} is below the range covered by lambda ≤ {MAX_LAMBDA}")));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if at(mid)?.distortion > d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(0.5 * (lo + hi))?.rate_bits)
}

/// Perfect-perception Gaussian reference `R(D/2)` under MSE, in bits.
pub fn gaussian_rdp_reference(distortion: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma must be > 0, got {sigma}")));
    }
    let ceiling = 2.0 * sigma * sigma;
    if !(distortion > 0.0 && distortion <= ceiling) {
        return Err(invalid(format!("distortion must lie in (0, 2σ²] = (0, {ceiling}], got {distortion}")));
    }
    Ok((0.5 * (ceiling / distortion).log2()).max(0.0))
}

/// Achievable one-shot rate `R + log₂(R + 1) + 4` for target rate `R ≥ 0`.
pub fn one_shot_overhead_bound(rate_bits: f64) -> f64 {
    rate_bits + (rate_bits + 1.0).log2() + 4.0
}
