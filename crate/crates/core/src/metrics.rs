//! Distortion, entropy and perception estimators shared by every simulator.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::Simpson;

/// Asymptotic one-sample Kolmogorov–Smirnov critical value at α = 0.01, times √n.
pub const KS_CRITICAL_01: f64 = 1.628;

pub fn ks_critical(n: usize) -> f64 {
    KS_CRITICAL_01 / (n as f64).sqrt()
}

/// Two-sample critical value at α = 0.01.
pub fn ks_two_sample_critical(n: usize, m: usize) -> f64 {
    KS_CRITICAL_01 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    /// Coding rate in bits per sample.
    pub rate_bits: f64,
    /// Average plug-in entropy of the emitted indices conditioned on the offset.
    pub index_entropy_bits: f64,
    pub mse: f64,
    /// 3σ half-width of the Monte Carlo distortion estimate.
    pub mc_radius_mse: f64,
    pub perception_ks: f64,
    pub perception_w1: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl ExperimentResult {
    pub fn ks_passes(&self) -> bool {
        self.perception_ks < ks_critical(self.n_samples as usize)
    }

    pub fn mse_consistent_with(&self, expected: f64) -> bool {
        (self.mse - expected).abs() <= self.mc_radius_mse
    }
}

/// One-pass mean/variance accumulator (Welford, with Chan's merge).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanVar {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanVar {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MeanVar) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn radius3(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        3.0 * self.variance().sqrt() / (self.n as f64).sqrt()
    }
}

/// Per-block simulation record: distortion moments, index counts per offset, and the source and
/// reconstruction samples needed for the perception statistics.
#[derive(Clone, Debug, Default)]
pub struct Tally {
    distortion: MeanVar,
    per_offset: Vec<Counts>,
    source: Vec<f64>,
    recon: Vec<f64>,
}

impl Tally {
    pub fn new(offsets: usize, capacity: usize) -> Self {
        Tally {
            distortion: MeanVar::default(),
            per_offset: vec![Counts::new(); offsets],
            source: Vec::with_capacity(capacity),
            recon: Vec::with_capacity(capacity),
        }
    }

    pub fn record(&mut self, offset: usize, index: i64, x: f64, x_hat: f64, distortion: f64) {
        self.distortion.push(distortion);
        *self.per_offset[offset].entry(index).or_insert(0) += 1;
        self.source.push(x);
        self.recon.push(x_hat);
    }

    /// Left fold in the given order.
    pub fn merge_all(blocks: Vec<Tally>) -> Tally {
        let mut iter = blocks.into_iter();
        let Some(mut acc) = iter.next() else {
            return Tally::default();
        };
        for b in iter {
            acc.distortion.merge(&b.distortion);
            for (into, from) in acc.per_offset.iter_mut().zip(&b.per_offset) {
                merge_counts(into, from);
            }
            acc.source.extend_from_slice(&b.source);
            acc.recon.extend_from_slice(&b.recon);
        }
        acc
    }

    pub fn per_offset(&self) -> &[Counts] {
        &self.per_offset
    }

    /// `fixed_rate` overrides the empirical rate for fixed-rate schemes.
    pub fn finish<F: Fn(f64) -> f64>(mut self, fixed_rate: Option<f64>, cdf: F, seed: u64) -> ExperimentResult {
        let index_entropy = avg_conditional_entropy(&self.per_offset);
        sort_floats(&mut self.source);
        sort_floats(&mut self.recon);
        ExperimentResult {
            rate_bits: fixed_rate.unwrap_or(index_entropy),
            index_entropy_bits: index_entropy,
            mse: self.distortion.mean(),
            mc_radius_mse: self.distortion.radius3(),
            perception_ks: ks_statistic_sorted(&self.recon, cdf),
            perception_w1: wasserstein1_sorted(&self.source, &self.recon),
            n_samples: self.distortion.count(),
            seed,
        }
    }
}

/// Mean squared error and its 3σ Monte Carlo radius.
pub fn mse<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Result<(f64, f64)> {
    let mut acc = MeanVar::default();
    for (x, y) in pairs {
        acc.push((x - y) * (x - y));
    }
    if acc.count() == 0 {
        return Err(Error::EmptyInput);
    }
    Ok((acc.mean(), acc.radius3()))
}

pub type Counts = BTreeMap<i64, u64>;

pub fn merge_counts(into: &mut Counts, from: &Counts) {
    for (&k, &v) in from {
        *into.entry(k).or_insert(0) += v;
    }
}

pub fn entropy_of_counts<I: IntoIterator<Item = u64>>(counts: I) -> f64 {
    let counts: Vec<u64> = counts.into_iter().collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Entropy in bits of a probability vector; zero entries contribute nothing.
pub fn entropy_of_probs<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum::<f64>().max(0.0)
}

pub fn plugin_entropy(counts: &Counts) -> f64 {
    entropy_of_counts(counts.values().copied())
}

/// Rate with one tailored entropy code per offset: the average plug-in entropy.
pub fn avg_conditional_entropy(per_offset: &[Counts]) -> f64 {
    if per_offset.is_empty() {
        return 0.0;
    }
    per_offset.iter().map(plugin_entropy).sum::<f64>() / per_offset.len() as f64
}

pub fn sort_floats(xs: &mut [f64]) {
    xs.sort_unstable_by(f64::total_cmp);
}

/// One-sample KS statistic against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    sort_floats(&mut xs);
    ks_statistic_sorted(&xs, cdf)
}

pub fn ks_statistic_sorted<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        let upper = (i as f64 + 1.0) / n - f;
        let lower = f - i as f64 / n;
        acc.max(upper.abs()).max(lower.abs())
    })
}

/// Two-sample KS statistic (sup distance between empirical CDFs).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    sort_floats(&mut xs);
    sort_floats(&mut ys);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Empirical W₁ between equal-size samples: mean gap between sorted order statistics.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    sort_floats(&mut xs);
    sort_floats(&mut ys);
    Ok(wasserstein1_sorted(&xs, &ys))
}

pub(crate) fn wasserstein1_sorted(xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| (x - y).abs()).sum::<f64>() / xs.len() as f64
}

/// `−∫ p ln p` over `[lo, hi]` in nats.
pub fn differential_entropy_quadrature<F: Fn(f64) -> f64>(pdf: F, lo: f64, hi: f64) -> Result<f64> {
    Simpson::new(1e-9).integrate(
        |x| {
            let p = pdf(x);
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        },
        lo,
        hi,
    )
}
