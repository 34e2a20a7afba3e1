//! Unit-circle coders at perfect perceptual quality.
//!
//! A source point is represented by its angle in (−π, π]. All angle arithmetic goes through
//! [`wrap_angle`]. The squared Euclidean distortion between two points on the circle is
//! `2 − 2cos(θ − θ̂)`.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::mc::{run_blocks, McPlan};
use crate::metrics::{ExperimentResult, Tally};
use crate::sources::SourceModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    MonteCarlo,
    Quadrature,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::MonteCarlo => "monte-carlo",
            Provenance::Quadrature => "quadrature",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointParams {
    Levels { levels: u32, offsets: Option<u32> },
    Lambda(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub rate_bits: f64,
    pub distortion: f64,
    pub provenance: Provenance,
    pub params: PointParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CircleVariant {
    Staggered { offsets: u32 },
    Dithered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CircleScheme {
    pub levels: u32,
    pub variant: CircleVariant,
}

impl CircleScheme {
    pub fn staggered(levels: u32, offsets: u32) -> Result<Self> {
        if levels == 0 || offsets == 0 {
            return Err(invalid(format!("levels and offsets must be ≥ 1, got L={levels}, N={offsets}")));
        }
        Ok(CircleScheme { levels, variant: CircleVariant::Staggered { offsets } })
    }

    pub fn dithered(levels: u32) -> Result<Self> {
        if levels == 0 {
            return Err(invalid("levels must be ≥ 1"));
        }
        Ok(CircleScheme { levels, variant: CircleVariant::Dithered })
    }

    pub fn cell_width(&self) -> f64 {
        TAU / self.levels as f64
    }

    /// Angular offset of the `n`-th staggered quantizer: `n · 2π/(LN)`.
    pub fn offset_angle(&self, n: u32) -> f64 {
        match self.variant {
            CircleVariant::Staggered { offsets } => n as f64 * TAU / (self.levels as f64 * offsets as f64),
            CircleVariant::Dithered => 0.0,
        }
    }

    /// Arc length of the decoder-private noise.
    pub fn private_noise_arc(&self) -> f64 {
        match self.variant {
            CircleVariant::Staggered { offsets } => TAU / (self.levels as f64 * offsets as f64),
            CircleVariant::Dithered => 0.0,
        }
    }

    /// Cell `k` spans `[φ + k·w, φ + (k+1)·w)`; an angle on an edge goes to the
    /// counter-clockwise cell.
    pub fn cell_index(&self, theta: f64, offset: f64) -> u32 {
        let t = wrap_angle(theta - offset - PI) + PI;
        let k = (t / self.cell_width()).floor() as u32;
        k % self.levels
    }

    pub fn cell_center(&self, k: u32, offset: f64) -> f64 {
        wrap_angle(offset + (k as f64 + 0.5) * self.cell_width())
    }
}

/// Canonical wrap into (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    PI - (PI - theta).rem_euclid(TAU)
}

/// `2 − 2cos(θ − θ̂)`, evaluated as `4 sin²((θ − θ̂)/2)`.
pub fn circle_distortion(theta: f64, theta_hat: f64) -> f64 {
    let s = (0.5 * (theta - theta_hat)).sin();
    4.0 * s * s
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Rate-distortion pair of `N` staggered `L`-level quantizers:
/// `(log₂L, 2 − 2·sinc(π/(LN))·sinc(π/L))`.
pub fn staggered_circle_rd(levels: u32, offsets: u32) -> FrontierPoint {
    let (l, n) = (levels as f64, offsets as f64);
    FrontierPoint {
        rate_bits: l.log2(),
        distortion: 2.0 - 2.0 * sinc(PI / (l * n)) * sinc(PI / l),
        provenance: Provenance::ClosedForm,
        params: PointParams::Levels { levels, offsets: Some(offsets) },
    }
}

/// Extreme point of the optimal one-shot trade-off, achieved by an `L`-level dithered quantizer.
pub fn dithered_circle_rd(levels: u32) -> FrontierPoint {
    let l = levels as f64;
    FrontierPoint {
        rate_bits: l.log2(),
        distortion: 2.0 - 2.0 * sinc(PI / l),
        provenance: Provenance::ClosedForm,
        params: PointParams::Levels { levels, offsets: None },
    }
}

fn circle_cdf(x: f64) -> f64 {
    SourceModel::CircleUniform.cdf(x)
}

pub fn simulate_staggered_circle(scheme: &CircleScheme, plan: &McPlan) -> Result<ExperimentResult> {
    let CircleVariant::Staggered { offsets } = scheme.variant else {
        return Err(invalid("simulate_staggered_circle needs a staggered scheme"));
    };
    let arc = scheme.private_noise_arc();
    let blocks = run_blocks(plan, |rng, len| {
        let mut tally = Tally::new(offsets as usize, len);
        for _ in 0..len {
            let theta = SourceModel::CircleUniform.sample(rng);
            let n = rng.random_range(0..offsets);
            let phi = scheme.offset_angle(n);
            let k = scheme.cell_index(theta, phi);
            let noise = (rng.random::<f64>() - 0.5) * arc;
            let theta_hat = wrap_angle(scheme.cell_center(k, phi) + noise);
            tally.record(n as usize, k as i64, theta, theta_hat, circle_distortion(theta, theta_hat));
        }
        Ok(tally)
    })?;
    let tally = Tally::merge_all(blocks);
    Ok(tally.finish(Some((scheme.levels as f64).log2()), circle_cdf, plan.seed))
}

pub fn simulate_dithered_circle(levels: u32, plan: &McPlan) -> Result<ExperimentResult> {
    let scheme = CircleScheme::dithered(levels)?;
    let w = scheme.cell_width();
    let blocks = run_blocks(plan, |rng, len| {
        let mut tally = Tally::new(1, len);
        for _ in 0..len {
            let theta = SourceModel::CircleUniform.sample(rng);
            let dither = (rng.random::<f64>() - 0.5) * w;
            let k = scheme.cell_index(theta + dither, 0.0);
            let theta_hat = wrap_angle(scheme.cell_center(k, 0.0) - dither);
            tally.record(0, k as i64, theta, theta_hat, circle_distortion(theta, theta_hat));
        }
        Ok(tally)
    })?;
    let tally = Tally::merge_all(blocks);
    Ok(tally.finish(Some((levels as f64).log2()), circle_cdf, plan.seed))
}

pub fn simulate_circle(scheme: &CircleScheme, plan: &McPlan) -> Result<ExperimentResult> {
    match scheme.variant {
        CircleVariant::Staggered { .. } => simulate_staggered_circle(scheme, plan),
        CircleVariant::Dithered => simulate_dithered_circle(scheme.levels, plan),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneShotFrontier {
    /// Extreme points for `L = 1..=L_max`, in increasing rate.
    pub points: Vec<FrontierPoint>,
    /// Indices into `points` of the lower convex hull vertices.
    pub hull: Vec<usize>,
}

impl OneShotFrontier {
    pub fn on_hull(&self, idx: usize) -> bool {
        self.hull.contains(&idx)
    }

    /// Time-sharing rate at distortion `d`, or `None` below the smallest reachable distortion.
    pub fn rate_at_distortion(&self, d: f64) -> Option<f64> {
        let hull: Vec<&FrontierPoint> = self.hull.iter().map(|&i| &self.points[i]).collect();
        let first = hull.first()?;
        if d >= first.distortion {
            return Some(first.rate_bits);
        }
        hull.windows(2).find_map(|w| {
            let (p, q) = (w[0], w[1]);
            (d <= p.distortion && d >= q.distortion).then(|| {
                let t = (p.distortion - d) / (p.distortion - q.distortion);
                p.rate_bits + t * (q.rate_bits - p.rate_bits)
            })
        })
    }
}

pub fn one_shot_frontier(max_levels: u32) -> Result<OneShotFrontier> {
    if max_levels == 0 {
        return Err(invalid("L_max must be ≥ 1"));
    }
    let points: Vec<FrontierPoint> = (1..=max_levels).map(dithered_circle_rd).collect();
    let mut hull: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        while hull.len() >= 2 {
            let o = &points[hull[hull.len() - 2]];
            let a = &points[hull[hull.len() - 1]];
            let cross = (a.rate_bits - o.rate_bits) * (p.distortion - o.distortion)
                - (a.distortion - o.distortion) * (p.rate_bits - o.rate_bits);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    Ok(OneShotFrontier { points, hull })
}

/// `l(α; r)` from the two-adjacent-cell analysis of the optimal one-shot quantizer.
pub fn two_cell_objective(alpha: f64, r: f64, lambda: f64) -> f64 {
    let beta = r - alpha;
    beta * beta.ln() + lambda / PI * (PI * beta).sin() + alpha * alpha.ln() + lambda / PI * (PI * alpha).sin()
}

pub fn two_cell_derivative(alpha: f64, r: f64, lambda: f64) -> f64 {
    let beta = r - alpha;
    -beta.ln() - lambda * (PI * beta).cos() + alpha.ln() + lambda * (PI * alpha).cos()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoCellReport {
    pub r: f64,
    pub lambda: f64,
    pub grid_step: f64,
    /// Grid minimizer of `l`.
    pub argmin: f64,
    /// Grid maximizer of `l`.
    pub argmax: f64,
    /// Split that minimizes the rate-distortion Lagrangian of the two cells. The Lagrangian is
    /// `−l` up to constants, so this is the maximizer of `l`.
    pub optimum: f64,
    /// Whether the optimum is away from the grid ends (both cells non-empty).
    pub optimum_is_interior: bool,
    /// Whether the optimum is interior and within one grid step of `r/2`.
    pub is_midpoint: bool,
}

pub fn verify_two_cell_optimality(r: f64, lambda: f64, grid_size: usize) -> Result<TwoCellReport> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid(format!("r must lie in (0, 1], got {r}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be > 0, got {lambda}")));
    }
    if grid_size < 3 {
        return Err(invalid("grid_size must be ≥ 3"));
    }
    let step = r / (grid_size as f64 + 1.0);
    let alpha = |k: usize| r * (k as f64 + 1.0) / (grid_size as f64 + 1.0);
    let (mut kmin, mut kmax) = (0, 0);
    let (mut lmin, mut lmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..grid_size {
        let v = two_cell_objective(alpha(k), r, lambda);
        if v < lmin {
            lmin = v;
            kmin = k;
        }
        if v > lmax {
            lmax = v;
            kmax = k;
        }
    }
    let optimum = alpha(kmax);
    let interior = kmax != 0 && kmax != grid_size - 1;
    Ok(TwoCellReport {
        r,
        lambda,
        grid_step: step,
        argmin: alpha(kmin),
        argmax: optimum,
        optimum,
        optimum_is_interior: interior,
        is_midpoint: interior && (optimum - 0.5 * r).abs() <= step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ks_critical;

    #[test]
    fn wrap_is_canonical() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        for k in -20..20 {
            let w = wrap_angle(0.37 + k as f64 * TAU);
            assert!((w - 0.37).abs() < 1e-12);
            assert!(w > -PI && w <= PI);
        }
    }

    #[test]
    fn baseline_quantizer_matches_sign_rule() {
        // L=2, N=1: index 1 on [0, π), reconstruction centered at ±π/2 with π of noise.
        let s = CircleScheme::staggered(2, 1).unwrap();
        assert_eq!(s.cell_index(0.0, 0.0), 0);
        assert_eq!(s.cell_index(3.0, 0.0), 0);
        assert_eq!(s.cell_index(PI, 0.0), 1);
        assert_eq!(s.cell_index(-0.1, 0.0), 1);
        assert!((s.cell_center(0, 0.0) - PI / 2.0).abs() < 1e-15);
        assert!((s.cell_center(1, 0.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(s.private_noise_arc(), PI);
    }

    #[test]
    fn offsets_are_evenly_spaced() {
        let s = CircleScheme::staggered(4, 3).unwrap();
        for n in 0..3 {
            assert!((s.offset_angle(n + 1) - s.offset_angle(n) - TAU / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_ties_go_counter_clockwise() {
        let s = CircleScheme::staggered(4, 1).unwrap();
        for k in 0..4 {
            assert_eq!(s.cell_index(k as f64 * PI / 2.0, 0.0), k % 4);
        }
    }

    #[test]
    fn closed_form_examples() {
        let p = staggered_circle_rd(2, 1);
        assert_eq!(p.rate_bits, 1.0);
        assert!((p.distortion - (2.0 - 8.0 / (PI * PI))).abs() < 1e-15);
        assert!((p.distortion - 1.189431).abs() < 1e-6);
        for n in [1, 3, 100] {
            let q = staggered_circle_rd(1, n);
            assert_eq!((q.rate_bits, q.distortion), (0.0, 2.0));
        }
        // Direct evaluation of the formula: 2 − 2·(sin(π/4)/(π/4))·(2/π).
        let q = staggered_circle_rd(2, 2);
        let direct = 2.0 - 2.0 * (0.5f64.sqrt() * 4.0 / PI) * (2.0 / PI);
        assert!((q.distortion - direct).abs() < 1e-15);
        assert!((q.distortion - 0.853682).abs() < 1e-6);
        let lim = staggered_circle_rd(2, 1_000_000);
        assert!((lim.distortion - (2.0 - 4.0 / PI)).abs() < 1e-11);
    }

    #[test]
    fn dithered_extreme_points() {
        assert_eq!(dithered_circle_rd(1).distortion, 2.0);
        assert!((dithered_circle_rd(2).distortion - (2.0 - 4.0 / PI)).abs() < 1e-15);
        assert!((dithered_circle_rd(4).distortion - 0.199367).abs() < 1e-6);
    }

    #[test]
    fn one_shot_frontier_includes_every_level() {
        let f = one_shot_frontier(1).unwrap();
        assert_eq!(f.points.len(), 1);
        assert_eq!((f.points[0].rate_bits, f.points[0].distortion), (0.0, 2.0));

        let f = one_shot_frontier(64).unwrap();
        assert_eq!(f.hull, (0..64).collect::<Vec<_>>());
        // Oracle: every interior point lies strictly below every chord around it.
        let p = &f.points;
        for i in 0..64 {
            for j in i + 1..64 {
                for k in j + 1..64 {
                    let t = (p[j].rate_bits - p[i].rate_bits) / (p[k].rate_bits - p[i].rate_bits);
                    let chord = p[i].distortion + t * (p[k].distortion - p[i].distortion);
                    assert!(p[j].distortion < chord, "L={} above chord ({}, {})", j + 1, i + 1, k + 1);
                }
            }
        }
        assert_eq!(f.rate_at_distortion(2.5), Some(0.0));
        assert!((f.rate_at_distortion(2.0 - 4.0 / PI).unwrap() - 1.0).abs() < 1e-12);
        let mid = 0.5 * (2.0 + 2.0 - 4.0 / PI);
        assert!((f.rate_at_distortion(mid).unwrap() - 0.5).abs() < 1e-12);
        assert!(one_shot_frontier(0).is_err());
    }

    #[test]
    fn two_cell_symmetry() {
        let (r, lambda, g) = (0.7, 3.0, 1001);
        for k in 0..g {
            let a = r * (k as f64 + 1.0) / (g as f64 + 1.0);
            let d = two_cell_objective(a, r, lambda) - two_cell_objective(r - a, r, lambda);
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn two_cell_derivative_matches_finite_differences() {
        let mut rng = crate::rng::Stream::new(77);
        for _ in 0..100 {
            let r: f64 = 0.05 + 0.95 * rng.random::<f64>();
            let lambda = 20.0 * rng.random::<f64>();
            let a = r * (0.05 + 0.9 * rng.random::<f64>());
            let h = 1e-6 * r;
            let fd = (two_cell_objective(a + h, r, lambda) - two_cell_objective(a - h, r, lambda)) / (2.0 * h);
            assert!((fd - two_cell_derivative(a, r, lambda)).abs() < 1e-6);
        }
    }

    #[test]
    fn two_cell_midpoint_for_large_lambda() {
        let rep = verify_two_cell_optimality(0.5, 10.0, 100_000).unwrap();
        assert!(rep.is_midpoint, "{rep:?}");
        assert!((rep.optimum - 0.25).abs() <= rep.grid_step);
        // For small λ the sum l is convex and the best split is degenerate.
        let small = verify_two_cell_optimality(0.5, 0.1, 10_000).unwrap();
        assert!(!small.optimum_is_interior);
        assert!((small.argmin - 0.25).abs() <= small.grid_step);
        assert!(verify_two_cell_optimality(1.5, 1.0, 10).is_err());
        assert!(verify_two_cell_optimality(0.0, 1.0, 10).is_err());
        assert!(verify_two_cell_optimality(0.5, 1.0, 2).is_err());
    }

    #[test]
    fn baseline_simulation() {
        let plan = McPlan::new(200_000, 3);
        let s = CircleScheme::staggered(2, 1).unwrap();
        let res = simulate_staggered_circle(&s, &plan).unwrap();
        assert!(res.mse_consistent_with(2.0 - 8.0 / (PI * PI)), "{res:?}");
        assert!(res.perception_ks < ks_critical(200_000));
        let d = simulate_dithered_circle(2, &plan).unwrap();
        assert!(d.mse_consistent_with(2.0 - 4.0 / PI), "{d:?}");
        assert_eq!(d.rate_bits, 1.0);
        assert!((d.index_entropy_bits - 1.0).abs() < 1e-3);
    }
}
