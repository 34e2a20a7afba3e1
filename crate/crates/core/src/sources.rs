//! Scalar source laws and the truncated resampling primitive used by the staggered decoder.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Boundary tables treat a Gaussian as supported on `mean ± GAUSS_SUPPORT_SIGMAS · std_dev`.
pub const GAUSS_SUPPORT_SIGMAS: f64 = 10.0;

/// Intervals with less parent mass than this cannot be resampled.
pub const MIN_INTERVAL_MASS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceModel {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, std_dev: f64 },
    /// Uniform angle on (−π, π].
    CircleUniform,
}

impl SourceModel {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!("uniform source needs finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(SourceModel::Uniform { lo, hi })
    }

    pub fn gaussian(mean: f64, std_dev: f64) -> Result<Self> {
        if !(mean.is_finite() && std_dev.is_finite() && std_dev > 0.0) {
            return Err(invalid(format!("gaussian source needs finite mean and sigma > 0, got ({mean}, {std_dev})")));
        }
        Ok(SourceModel::Gaussian { mean, std_dev })
    }

    fn interval(&self) -> Option<(f64, f64)> {
        match *self {
            SourceModel::Uniform { lo, hi } => Some((lo, hi)),
            SourceModel::CircleUniform => Some((-PI, PI)),
            SourceModel::Gaussian { .. } => None,
        }
    }

    /// Effective support used for boundary tables.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            SourceModel::Gaussian { mean, std_dev } => {
                (mean - GAUSS_SUPPORT_SIGMAS * std_dev, mean + GAUSS_SUPPORT_SIGMAS * std_dev)
            }
            _ => self.interval().unwrap(),
        }
    }

    pub fn median(&self) -> f64 {
        match *self {
            SourceModel::Gaussian { mean, .. } => mean,
            _ => {
                let (lo, hi) = self.interval().unwrap();
                0.5 * (lo + hi)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            SourceModel::Gaussian { mean, std_dev } => {
                let z = (x - mean) / std_dev;
                (-0.5 * z * z).exp() / (std_dev * (2.0 * PI).sqrt())
            }
            _ => {
                let (lo, hi) = self.interval().unwrap();
                if x < lo || x > hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            SourceModel::Gaussian { mean, std_dev } => std_normal_cdf((x - mean) / std_dev),
            _ => {
                let (lo, hi) = self.interval().unwrap();
                ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
            }
        }
    }

    /// Survival function `1 − F(x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            SourceModel::Gaussian { mean, std_dev } => std_normal_cdf(-(x - mean) / std_dev),
            _ => {
                let (lo, hi) = self.interval().unwrap();
                ((hi - x) / (hi - lo)).clamp(0.0, 1.0)
            }
        }
    }

    /// `inf{x : F(x) > u}` for `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(invalid(format!("quantile level must lie in [0, 1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        match *self {
            SourceModel::Gaussian { mean, std_dev } => mean + std_dev * std_normal_quantile(u),
            _ => {
                let (lo, hi) = self.interval().unwrap();
                (lo + u * (hi - lo)).min(hi)
            }
        }
    }

    /// Inverse survival function: the `x` with `1 − F(x) = s`, for `s ∈ (0, 1]`.
    pub(crate) fn isf_unchecked(&self, s: f64) -> f64 {
        match *self {
            SourceModel::Gaussian { mean, std_dev } => mean - std_dev * std_normal_quantile(s),
            _ => {
                let (lo, hi) = self.interval().unwrap();
                (hi - s * (hi - lo)).max(lo)
            }
        }
    }

    /// `P(a ≤ X ≤ b)`, computed on whichever tail keeps the difference well conditioned.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        if a >= self.median() {
            (self.sf(a) - self.sf(b)).max(0.0)
        } else {
            (self.cdf(b) - self.cdf(a)).max(0.0)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            SourceModel::Gaussian { mean, std_dev } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std_dev * z
            }
            SourceModel::CircleUniform => PI - 2.0 * PI * rng.random::<f64>(),
            SourceModel::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

impl fmt::Display for SourceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceModel::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            SourceModel::Gaussian { mean, std_dev } => write!(f, "gauss:{mean},{std_dev}"),
            SourceModel::CircleUniform => f.write_str("circle"),
        }
    }
}

impl FromStr for SourceModel {
    type Err = Error;

    /// Parses `uniform:lo,hi`, `gauss:mu,sigma` or `circle`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "circle" {
            return Ok(SourceModel::CircleUniform);
        }
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("source `{s}`: expected uniform:lo,hi | gauss:mu,sigma | circle")))?;
        let (p, q) = args
            .split_once(',')
            .ok_or_else(|| invalid(format!("source `{s}`: expected two comma-separated parameters")))?;
        let p: f64 = p.trim().parse().map_err(|_| invalid(format!("source `{s}`: bad number `{p}`")))?;
        let q: f64 = q.trim().parse().map_err(|_| invalid(format!("source `{s}`: bad number `{q}`")))?;
        match kind.trim() {
            "uniform" => SourceModel::uniform(p, q),
            "gauss" => SourceModel::gaussian(p, q),
            other => Err(invalid(format!("unknown source kind `{other}`"))),
        }
    }
}

/// A parent law restricted to `[a, b]` and renormalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedLaw {
    parent: SourceModel,
    a: f64,
    b: f64,
    mass: f64,
}

impl TruncatedLaw {
    pub fn new(parent: SourceModel, a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::DegenerateInterval { a, b, mass: 0.0 });
        }
        let mass = parent.mass(a, b);
        if !(mass >= MIN_INTERVAL_MASS) {
            return Err(Error::DegenerateInterval { a, b, mass });
        }
        Ok(TruncatedLaw { parent, a, b, mass })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            0.0
        } else {
            self.parent.pdf(x) / self.mass
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (self.parent.mass(self.a, x.min(self.b)) / self.mass).clamp(0.0, 1.0)
    }
}

/// Inverse-CDF draw from `law`: `F⁻¹(F(a) + U·(F(b) − F(a)))`, evaluated on the upper tail
/// through the survival function when `a` lies above the median.
pub fn sample_truncated<R: Rng + ?Sized>(law: &TruncatedLaw, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let p = &law.parent;
    let x = if law.a >= p.median() {
        let (sa, sb) = (p.sf(law.a), p.sf(law.b));
        p.isf_unchecked(sa - u * (sa - sb))
    } else {
        let (fa, fb) = (p.cdf(law.a), p.cdf(law.b));
        p.quantile_unchecked(fa + u * (fb - fa))
    };
    x.clamp(law.a, law.b)
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile by safeguarded Newton iteration on `ln Φ`, seeded with the
/// Abramowitz–Stegun 26.2.23 rational approximation.
pub fn std_normal_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    if u == 0.5 {
        return 0.0;
    }
    // Solve on the lower half; 1 − u is exact for u ≥ 0.5.
    let (p, sign) = if u < 0.5 { (u, 1.0) } else { (1.0 - u, -1.0) };
    sign * lower_quantile(p)
}

fn lower_quantile(p: f64) -> f64 {
    let t = (-2.0 * p.ln()).sqrt();
    let mut z = -(t - (2.515517 + 0.802853 * t + 0.010328 * t * t)
        / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t));
    let target = p.ln();
    let (mut lo, mut hi) = (-40.0_f64, 0.0_f64);
    for _ in 0..100 {
        let cdf = std_normal_cdf(z);
        let resid = cdf.ln() - target;
        if resid > 0.0 {
            hi = hi.min(z);
        } else {
            lo = lo.max(z);
        }
        let mut next = z - resid * cdf / std_normal_pdf(z);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - z).abs();
        z = next;
        if step <= 2.0 * f64::EPSILON * z.abs().max(1.0) {
            break;
        }
    }
    z
}
