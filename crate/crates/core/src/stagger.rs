//! Staggered quantizers for general scalar sources.
//!
//! `N` uniform quantizers of step `Δ` are offset by `Δ/N`; the `n`-th encoder is
//! `f_n(x) = ⌊x/Δ − n/N⌉`. The pair (cell, quantizer) is indexed by `j = N·f_n(x) + n`, which
//! orders every cell of every quantizer by its left edge `Δ(j/N − 1/2)`. The decoder resamples
//! from the source law restricted to `[a(j), b(j)]`, where
//! `a(j) = F⁻¹((1/N)·Σ_{k=0}^{N−1} F(left(j + k)))` and `b(j) = a(j + 1)`. With this choice
//! `F(b(j)) − F(a(j))` telescopes to the probability that code `j` is emitted, so the mixture
//! of decoder laws is exactly the source law.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::mc::{run_blocks, McPlan};
use crate::metrics::{entropy_of_probs, ExperimentResult, Tally};
use crate::quad::Simpson;
use crate::sources::{sample_truncated, SourceModel, TruncatedLaw};

/// Codes emitted with smaller probability are left out of boundary tables.
pub const ACTIVE_MASS: f64 = 1e-12;
pub const MASS_IDENTITY_TOL: f64 = 1e-9;
const MAX_ACTIVE_CODES: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StaggeredSpec {
    pub source: SourceModel,
    pub step: f64,
    pub offsets: u32,
    /// Use `F(left(j − k))`, `k = 1..=N` in the boundary formula instead of `j + k`, `k = 0..N`.
    /// The literal variant is off-center by one step and does not preserve the source law.
    pub literal_paper_indexing: bool,
}

impl StaggeredSpec {
    pub fn new(source: SourceModel, step: f64, offsets: u32) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid(format!("step must be finite and > 0, got {step}")));
        }
        if offsets == 0 {
            return Err(invalid("number of offsets must be ≥ 1"));
        }
        Ok(StaggeredSpec { source, step, offsets, literal_paper_indexing: false })
    }

    pub fn with_literal_paper_indexing(mut self, on: bool) -> Self {
        self.literal_paper_indexing = on;
        self
    }

    /// `⌊x/Δ − n/N⌉`, ties rounded up.
    pub fn encode(&self, x: f64, n: u32) -> i64 {
        (x / self.step - n as f64 / self.offsets as f64 + 0.5).floor() as i64
    }

    pub fn code(&self, index: i64, n: u32) -> i64 {
        self.offsets as i64 * index + n as i64
    }

    pub fn split_code(&self, j: i64) -> (i64, u32) {
        let n = self.offsets as i64;
        (j.div_euclid(n), j.rem_euclid(n) as u32)
    }

    /// Left edge `Δ(j/N − 1/2)` of the cell with global index `j`.
    pub fn cell_left(&self, j: i64) -> f64 {
        let n = self.offsets as i64;
        self.step * (2 * j - n) as f64 / (2 * n) as f64
    }

    /// Cell `j` is `[left(j), left(j + N))`.
    pub fn cell(&self, j: i64) -> (f64, f64) {
        (self.cell_left(j), self.cell_left(j + self.offsets as i64))
    }

    /// Cell `j` intersected with the effective support.
    pub fn clipped_cell(&self, j: i64) -> (f64, f64) {
        let (lo, hi) = self.source.support();
        let (l, r) = self.cell(j);
        (l.max(lo), r.min(hi))
    }

    /// Probability that code `j` is emitted: cell mass times `1/N`.
    pub fn code_probability(&self, j: i64) -> f64 {
        let (l, r) = self.clipped_cell(j);
        self.source.mass(l, r) / self.offsets as f64
    }

    /// Every code whose cell meets the support, with one spare code on each side.
    fn code_range(&self) -> (i64, i64) {
        let (lo, hi) = self.source.support();
        let n = self.offsets as f64;
        let first = (n * (lo / self.step + 0.5)).floor() as i64 - self.offsets as i64 - 1;
        let last = (n * (hi / self.step + 0.5)).ceil() as i64 + 1;
        (first, last)
    }

    fn boundary_value(&self, j: i64) -> f64 {
        let n = self.offsets as i64;
        let lefts: Vec<f64> = if self.literal_paper_indexing {
            (1..=n).map(|k| self.cell_left(j - k)).collect()
        } else {
            (0..n).map(|k| self.cell_left(j + k)).collect()
        };
        quantile_of_mean(&self.source, &lefts)
    }
}

/// `F⁻¹(mean of F(x_k))`, taken through the survival function on the upper half.
fn quantile_of_mean(source: &SourceModel, xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean_cdf = xs.iter().map(|&x| source.cdf(x)).sum::<f64>() / n;
    if mean_cdf <= 0.5 {
        source.quantile_unchecked(mean_cdf)
    } else {
        let mean_sf = xs.iter().map(|&x| source.sf(x)).sum::<f64>() / n;
        source.isf_unchecked(mean_sf)
    }
}

#[derive(Clone, Debug)]
pub struct BoundaryTable {
    spec: StaggeredSpec,
    first: i64,
    /// `a(first), …, a(last), b(last)`.
    edges: Vec<f64>,
    probs: Vec<f64>,
    laws: Vec<Option<TruncatedLaw>>,
    max_mass_error: f64,
}

impl BoundaryTable {
    pub fn spec(&self) -> &StaggeredSpec {
        &self.spec
    }

    pub fn first_code(&self) -> i64 {
        self.first
    }

    pub fn last_code(&self) -> i64 {
        self.first + self.probs.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn codes(&self) -> impl Iterator<Item = i64> {
        self.first..=self.last_code()
    }

    fn slot(&self, j: i64) -> Option<usize> {
        (j >= self.first && j <= self.last_code()).then(|| (j - self.first) as usize)
    }

    pub fn is_active(&self, j: i64) -> bool {
        self.slot(j).is_some()
    }

    /// Decoder interval `[a(j), b(j)]` of an active code.
    pub fn interval(&self, j: i64) -> Result<(f64, f64)> {
        let k = self.slot(j).ok_or(Error::InactiveCode(j))?;
        Ok((self.edges[k], self.edges[k + 1]))
    }

    pub fn probability(&self, j: i64) -> Option<f64> {
        self.slot(j).map(|k| self.probs[k])
    }

    /// All boundaries `a(first), …, a(last), b(last)`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Largest `|F(b(j)) − F(a(j)) − P(j)|` over active codes.
    pub fn max_mass_error(&self) -> f64 {
        self.max_mass_error
    }
}

pub fn build_boundaries(spec: &StaggeredSpec) -> Result<BoundaryTable> {
    let (lo, hi) = spec.source.support();
    let (start, end) = spec.code_range();
    if (end - start) as usize > MAX_ACTIVE_CODES {
        return Err(invalid(format!("step {} yields more than {MAX_ACTIVE_CODES} codes", spec.step)));
    }
    let active: Vec<(i64, f64)> =
        (start..=end).map(|j| (j, spec.code_probability(j))).filter(|&(_, p)| p >= ACTIVE_MASS).collect();
    let (Some(&(first, _)), Some(&(last, _))) = (active.first(), active.last()) else {
        return Err(invalid("no code carries probability on the support"));
    };
    if (last - first + 1) as usize != active.len() {
        return Err(invalid("active codes are not contiguous"));
    }
    let probs: Vec<f64> = active.iter().map(|&(_, p)| p).collect();

    let count = probs.len();
    let mut edges: Vec<f64> = (0..=count).map(|k| spec.boundary_value(first + k as i64).clamp(lo, hi)).collect();
    // The outermost intervals absorb the mass of the excluded tail codes.
    edges[0] = lo;
    edges[count] = hi;
    for k in 1..=count {
        edges[k] = edges[k].max(edges[k - 1]);
    }

    let mut max_err: f64 = 0.0;
    let mut laws = Vec::with_capacity(count);
    for (k, &p) in probs.iter().enumerate() {
        let (a, b) = (edges[k], edges[k + 1]);
        let err = (spec.source.mass(a, b) - p).abs();
        if !spec.literal_paper_indexing && err > MASS_IDENTITY_TOL {
            return Err(Error::MassIdentity { code: first + k as i64, error: err });
        }
        max_err = max_err.max(err);
        laws.push(TruncatedLaw::new(spec.source, a, b).ok());
    }
    Ok(BoundaryTable { spec: *spec, first, edges, probs, laws, max_mass_error: max_err })
}

/// Reconstruction for index `i` of quantizer `n`: a draw from the source law on `[a(j), b(j)]`
/// with `j = N·i + n`.
pub fn decode<R: Rng + ?Sized>(table: &BoundaryTable, index: i64, n: u32, rng: &mut R) -> Result<f64> {
    let j = table.spec.code(index, n);
    let k = table.slot(j).ok_or(Error::InactiveCode(j))?;
    match &table.laws[k] {
        Some(law) => Ok(sample_truncated(law, rng)),
        // Only the literal indexing variant produces zero-width intervals.
        None if table.spec.literal_paper_indexing => Ok(table.edges[k]),
        None => {
            let (a, b) = (table.edges[k], table.edges[k + 1]);
            Err(Error::DegenerateInterval { a, b, mass: table.spec.source.mass(a, b) })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeDistribution {
    /// For each quantizer `n`, the pairs `(i, P(f_n(X) = i))` with positive mass.
    pub per_quantizer: Vec<Vec<(i64, f64)>>,
    /// `(j, P(j))` over all codes with positive mass, each quantizer weighted `1/N`.
    pub pooled: Vec<(i64, f64)>,
    pub per_quantizer_entropy_bits: Vec<f64>,
    /// `(1/N)·Σ_n H(f_n(X))`: the rate with one tailored code per quantizer.
    pub staggered_rate_bits: f64,
    pub pooled_entropy_bits: f64,
    /// `(i, P(f(X + Z) = i))` for dither `Z` uniform on `(−Δ/2, Δ/2]`.
    pub dithered: Vec<(i64, f64)>,
    /// `H(f(X + Z))`, the rate of a single entropy code shared across dither values.
    pub dithered_rate_bits: f64,
    /// Distortion of the unshaped dithered reconstruction `X + Z̃`: `Δ²/12`.
    pub dithered_mse: f64,
}

pub fn exact_code_distribution(spec: &StaggeredSpec) -> Result<CodeDistribution> {
    let n = spec.offsets as usize;
    let (start, end) = spec.code_range();
    let mut per_quantizer = vec![Vec::new(); n];
    let mut pooled = Vec::new();
    for j in start..=end {
        let p = spec.code_probability(j);
        if p > 0.0 {
            let (i, q) = spec.split_code(j);
            per_quantizer[q as usize].push((i, p * n as f64));
            pooled.push((j, p));
        }
    }
    let per_quantizer_entropy_bits: Vec<f64> =
        per_quantizer.iter().map(|v| entropy_of_probs(v.iter().map(|&(_, p)| p))).collect();
    let staggered_rate_bits = per_quantizer_entropy_bits.iter().sum::<f64>() / n as f64;
    let pooled_entropy_bits = entropy_of_probs(pooled.iter().map(|&(_, p)| p));

    let dithered = dithered_masses(spec)?;
    let dithered_rate_bits = entropy_of_probs(dithered.iter().map(|&(_, p)| p));
    Ok(CodeDistribution {
        per_quantizer,
        pooled,
        per_quantizer_entropy_bits,
        staggered_rate_bits,
        pooled_entropy_bits,
        dithered,
        dithered_rate_bits,
        dithered_mse: spec.step * spec.step / 12.0,
    })
}

/// Cell masses of `X + Z` under the unoffset quantizer, by quadrature of the convolved density
/// `p(y) = (1/Δ)·P(y − Δ/2 ≤ X < y + Δ/2)`.
fn dithered_masses(spec: &StaggeredSpec) -> Result<Vec<(i64, f64)>> {
    let src = spec.source;
    let step = spec.step;
    let half = 0.5 * step;
    let (lo, hi) = src.support();
    let breaks: Vec<f64> = match src {
        SourceModel::Gaussian { .. } => Vec::new(),
        _ => vec![lo - half, lo + half, hi - half, hi + half],
    };
    let density = |y: f64| src.mass(y - half, y + half) / step;
    let quad = Simpson::new(1e-15);
    let first = ((lo - half) / step + 0.5).floor() as i64 - 1;
    let last = ((hi + half) / step + 0.5).floor() as i64 + 1;
    let mut out = Vec::new();
    for i in first..=last {
        let (a, b) = (step * (i as f64 - 0.5), step * (i as f64 + 0.5));
        let p = quad.integrate_with_breaks(density, a, b, &breaks)?;
        if p > 0.0 {
            out.push((i, p));
        }
    }
    Ok(out)
}

/// Mean and variance of the source law restricted to `[a, b]`.
fn restricted_moments(src: &SourceModel, a: f64, b: f64) -> Result<(f64, f64)> {
    match *src {
        SourceModel::Gaussian { .. } => {
            let z = src.mass(a, b);
            if z <= 0.0 || b <= a {
                return Ok((a, 0.0));
            }
            let c = 0.5 * (a + b);
            let w = b - a;
            let quad = Simpson::new(1e-13 * z * w * w);
            let shift = quad.integrate(|x| (x - c) * src.pdf(x), a, b)? / z;
            let second = quad.integrate(|x| (x - c) * (x - c) * src.pdf(x), a, b)? / z;
            Ok((c + shift, (second - shift * shift).max(0.0)))
        }
        _ => {
            let (lo, hi) = src.support();
            let (l, r) = (a.max(lo), b.min(hi));
            if r <= l {
                return Ok((l, 0.0));
            }
            Ok((0.5 * (l + r), (r - l) * (r - l) / 12.0))
        }
    }
}

/// Expected squared error of the full pipeline: for every active code, the source restricted to
/// the encoder cell against an independent draw on the decoder interval.
pub fn exact_mse(table: &BoundaryTable) -> Result<f64> {
    let spec = table.spec;
    let mut total = 0.0;
    for j in table.codes() {
        let p = table.probability(j).unwrap();
        let (cl, cr) = spec.clipped_cell(j);
        let (a, b) = table.interval(j)?;
        let (m1, v1) = restricted_moments(&spec.source, cl, cr)?;
        let (m2, v2) = restricted_moments(&spec.source, a, b)?;
        total += p * (v1 + v2 + (m1 - m2) * (m1 - m2));
    }
    Ok(total)
}

/// End-to-end simulation: draw `X`, draw the shared offset, encode, decode.
pub fn simulate_pipeline(spec: &StaggeredSpec, plan: &McPlan) -> Result<ExperimentResult> {
    let table = build_boundaries(spec)?;
    simulate_with_table(&table, plan)
}

pub fn simulate_with_table(table: &BoundaryTable, plan: &McPlan) -> Result<ExperimentResult> {
    let spec = table.spec;
    let blocks = run_blocks(plan, |rng, len| {
        let mut tally = Tally::new(spec.offsets as usize, len);
        for _ in 0..len {
            let x = spec.source.sample(rng);
            let n = rng.random_range(0..spec.offsets);
            let i = spec.encode(x, n);
            let x_hat = decode(table, i, n, rng)?;
            tally.record(n as usize, i, x, x_hat, (x - x_hat) * (x - x_hat));
        }
        Ok(tally)
    })?;
    let source = spec.source;
    Ok(Tally::merge_all(blocks).finish(None, |x| source.cdf(x), plan.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ks_critical;
    use crate::rng::Stream;

    fn uniform_spec(step: f64, offsets: u32) -> StaggeredSpec {
        StaggeredSpec::new(SourceModel::uniform(0.0, 1.0).unwrap(), step, offsets).unwrap()
    }

    /// `inf{x : encode(x, n) = i}` by bisection, for `j = N·i + n`.
    fn left_edge_by_bisection(spec: &StaggeredSpec, j: i64) -> f64 {
        let (i, n) = spec.split_code(j);
        let guess = spec.step * (i as f64 + n as f64 / spec.offsets as f64);
        let (mut lo, mut hi) = (guess - spec.step, guess);
        assert!(spec.encode(lo, n) < i && spec.encode(hi, n) == i);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if spec.encode(mid, n) >= i {
                hi = mid
            } else {
                lo = mid
            }
        }
        hi
    }

    #[test]
    fn encode_examples() {
        let s = StaggeredSpec::new(SourceModel::uniform(0.0, 1.0).unwrap(), 1.0, 2).unwrap();
        assert_eq!(s.encode(0.4, 0), 0);
        assert_eq!(s.encode(0.4, 1), 0);
        assert_eq!(uniform_spec(0.25, 2).encode(0.9, 1), 3);
        // Ties round up.
        assert_eq!(s.encode(0.5, 0), 1);
        assert_eq!(s.encode(-0.5, 0), 0);
    }

    #[test]
    fn cell_left_examples() {
        let s = StaggeredSpec::new(SourceModel::uniform(0.0, 1.0).unwrap(), 1.0, 2).unwrap();
        assert_eq!(s.cell_left(3), 1.0);
        assert!((left_edge_by_bisection(&s, 3) - 1.0).abs() < 1e-12);
        let s1 = StaggeredSpec::new(SourceModel::uniform(0.0, 1.0).unwrap(), 1.0, 1).unwrap();
        assert_eq!(s1.cell_left(0), -0.5);
        let s3 = uniform_spec(0.3, 3);
        for j in -20..20 {
            assert!((s3.cell_left(j + 3) - s3.cell_left(j) - 0.3).abs() < 1e-15);
            assert!((left_edge_by_bisection(&s3, j) - s3.cell_left(j)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let u = SourceModel::uniform(0.0, 1.0).unwrap();
        assert!(StaggeredSpec::new(u, 0.0, 1).is_err());
        assert!(StaggeredSpec::new(u, f64::NAN, 1).is_err());
        assert!(StaggeredSpec::new(u, 0.25, 0).is_err());
    }

    #[test]
    fn single_quantizer_resamples_whole_cell() {
        let s = uniform_spec(0.25, 1);
        let t = build_boundaries(&s).unwrap();
        for j in t.codes() {
            assert_eq!(t.interval(j).unwrap(), s.clipped_cell(j));
        }
        assert_eq!(t.len(), 5);
    }

    #[test]
    fn two_offsets_use_centered_half_cells() {
        let s = uniform_spec(0.25, 2);
        let t = build_boundaries(&s).unwrap();
        // Interior codes: a(j) = Δj/N − Δ/(2N).
        for j in 2..=6 {
            let (a, b) = t.interval(j).unwrap();
            assert!((a - (0.125 * j as f64 - 0.0625)).abs() < 1e-15, "j={j}");
            let (l, r) = s.cell(j);
            assert!((0.5 * (a + b) - 0.5 * (l + r)).abs() < 1e-15);
            assert!((b - a - 0.125).abs() < 1e-15);
        }
        assert_eq!(t.interval(0).unwrap(), (0.0, 0.0625));
        assert_eq!(t.interval(8).unwrap(), (0.9375, 1.0));
        assert!(matches!(t.interval(9), Err(Error::InactiveCode(9))));
        assert!(matches!(t.interval(-1), Err(Error::InactiveCode(-1))));
    }

    #[test]
    fn partition_and_mass_identity() {
        let g = SourceModel::gaussian(0.0, 1.0).unwrap();
        for (src, step, n) in [(g, 0.5, 4), (g, 0.25, 3), (SourceModel::uniform(-1.0, 2.5).unwrap(), 0.3, 5)] {
            let t = build_boundaries(&StaggeredSpec::new(src, step, n).unwrap()).unwrap();
            assert!(t.max_mass_error() < MASS_IDENTITY_TOL);
            let (lo, hi) = src.support();
            assert_eq!(t.edges()[0], lo);
            assert_eq!(*t.edges().last().unwrap(), hi);
            for j in t.codes() {
                let (a, b) = t.interval(j).unwrap();
                assert!(a < b);
                if j < t.last_code() {
                    assert_eq!(b, t.interval(j + 1).unwrap().0);
                }
            }
        }
    }

    #[test]
    fn literal_indexing_is_off_by_one_step() {
        let s = uniform_spec(0.25, 2).with_literal_paper_indexing(true);
        let t = build_boundaries(&s).unwrap();
        let shifted = build_boundaries(&uniform_spec(0.25, 2)).unwrap();
        // Interior boundaries move left by one full step.
        assert!((t.interval(5).unwrap().0 - (shifted.interval(5).unwrap().0 - 0.25)).abs() < 1e-15);
        assert!(t.max_mass_error() > MASS_IDENTITY_TOL);
        let mut rng = Stream::new(1);
        for j in t.codes() {
            let (i, n) = s.split_code(j);
            let x = decode(&t, i, n, &mut rng).unwrap();
            let (a, b) = t.interval(j).unwrap();
            assert!(x >= a && x <= b);
        }
    }

    #[test]
    fn decode_stays_in_interval_and_rejects_inactive() {
        let s = StaggeredSpec::new(SourceModel::gaussian(0.0, 1.0).unwrap(), 0.5, 2).unwrap();
        let t = build_boundaries(&s).unwrap();
        let mut rng = Stream::new(4);
        for j in t.codes() {
            let (i, n) = s.split_code(j);
            let (a, b) = t.interval(j).unwrap();
            for _ in 0..50 {
                let x = decode(&t, i, n, &mut rng).unwrap();
                assert!(x >= a && x <= b);
            }
        }
        let (i, n) = s.split_code(t.last_code() + 1);
        assert!(matches!(decode(&t, i, n, &mut rng), Err(Error::InactiveCode(_))));
    }

    #[test]
    fn exact_distribution_uniform() {
        // Cell masses by enumeration: quantizer 0 straddles both support edges, quantizer 1 is aligned.
        let one = exact_code_distribution(&uniform_spec(0.25, 1)).unwrap();
        let masses: Vec<f64> = one.per_quantizer[0].iter().map(|&(_, p)| p).collect();
        assert_eq!(masses, vec![0.125, 0.25, 0.25, 0.25, 0.125]);
        assert_eq!(one.staggered_rate_bits, 2.25);

        let two = exact_code_distribution(&uniform_spec(0.25, 2)).unwrap();
        assert_eq!(two.per_quantizer_entropy_bits, vec![2.25, 2.0]);
        assert_eq!(two.staggered_rate_bits, 2.125);
        assert_eq!(two.pooled.iter().map(|&(_, p)| p).sum::<f64>(), 1.0);
        assert!(two.staggered_rate_bits <= two.pooled_entropy_bits);

        // X + Z is trapezoidal on (−1/8, 9/8): the edge cells each hold 1/8.
        let dm: Vec<f64> = two.dithered.iter().map(|&(_, p)| p).collect();
        assert_eq!(dm.len(), 5);
        for (got, want) in dm.iter().zip([0.125, 0.25, 0.25, 0.25, 0.125]) {
            assert!((got - want).abs() < 1e-15, "{dm:?}");
        }
        assert!((two.dithered_rate_bits - 2.25).abs() < 1e-12);
        assert_eq!(two.dithered_mse, 0.0625 / 12.0);
    }

    #[test]
    fn aligned_grid_has_four_equal_cells() {
        let src = SourceModel::uniform(-0.125, 0.875).unwrap();
        let s = StaggeredSpec::new(src, 0.25, 1).unwrap();
        let d = exact_code_distribution(&s).unwrap();
        assert_eq!(d.per_quantizer[0].len(), 4);
        assert_eq!(d.staggered_rate_bits, 2.0);
        let t = build_boundaries(&s).unwrap();
        assert!((exact_mse(&t).unwrap() - 0.0625 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn exact_mse_uniform_by_hand() {
        // Interior cell: Δ²/12·(1 + 1/N²). Edge cell of width w with a half-width decoder
        // interval at the support edge: w²/12 + w²/48 + (w/4)² = w²/6.
        let interior = 0.0625 / 12.0 * 1.25;
        let edge = 0.125f64.powi(2) / 6.0;
        let straddling = 0.75 * interior + 0.25 * edge;
        let want = 0.5 * (straddling + interior);
        let t = build_boundaries(&uniform_spec(0.25, 2)).unwrap();
        assert!((exact_mse(&t).unwrap() - want).abs() < 1e-15);

        let t1 = build_boundaries(&uniform_spec(0.25, 1)).unwrap();
        let want1 = 0.75 * 0.0625 / 6.0 + 0.25 * edge;
        assert!((exact_mse(&t1).unwrap() - want1).abs() < 1e-15);
    }

    #[test]
    fn uniform_pipeline_reproduces_source() {
        let plan = McPlan::new(200_000, 21);
        let res = simulate_pipeline(&uniform_spec(0.25, 2), &plan).unwrap();
        assert!(res.perception_ks < ks_critical(200_000), "{res:?}");
        let t = build_boundaries(&uniform_spec(0.25, 2)).unwrap();
        assert!(res.mse_consistent_with(exact_mse(&t).unwrap()), "{res:?}");
    }
}
