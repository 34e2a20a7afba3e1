//! Adaptive Simpson quadrature with an absolute tolerance and a hard cap on subintervals.

use crate::error::{Error, Result};

pub const DEFAULT_MAX_INTERVALS: usize = 1 << 20;
const MIN_DEPTH: u32 = 4;
const MAX_DEPTH: u32 = 60;

#[derive(Clone, Copy, Debug)]
pub struct Simpson {
    pub tol: f64,
    pub max_intervals: usize,
}

impl Simpson {
    pub fn new(tol: f64) -> Self {
        Simpson { tol, max_intervals: DEFAULT_MAX_INTERVALS }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<f64> {
        self.integrate_with_breaks(f, lo, hi, &[])
    }

    /// Integrates over `[lo, hi]`, splitting first at every break point strictly inside.
    ///
    /// Placing breaks at kinks of a piecewise-smooth integrand makes each piece smooth, and on
    /// polynomial pieces of degree ≤ 3 the rule is exact.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64, breaks: &[f64]) -> Result<f64> {
        if hi == lo {
            return Ok(0.0);
        }
        if hi < lo {
            return self.integrate_with_breaks(f, hi, lo, breaks).map(|v| -v);
        }
        let mut points: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mut edges = Vec::with_capacity(points.len() + 2);
        edges.push(lo);
        edges.extend(points);
        edges.push(hi);

        let width = hi - lo;
        let mut budget = self.max_intervals;
        let mut total = 0.0;
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let tol = self.tol * (b - a) / width;
            let m = 0.5 * (a + b);
            let (fa, fm, fb) = (f(a), f(m), f(b));
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            total += recurse(&f, a, b, fa, fm, fb, whole, tol, 0, &mut budget)
                .ok_or(Error::QuadratureDidNotConverge { lo, hi, max_intervals: self.max_intervals })?;
        }
        Ok(total)
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut usize,
) -> Option<f64> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return None;
    }
    if depth >= MIN_DEPTH && (delta.abs() <= 15.0 * tol.max(f64::EPSILON * (left + right).abs()) || depth >= MAX_DEPTH || m <= a || m >= b) {
        return Some(left + right + delta / 15.0);
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, budget)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, budget)?;
    Some(l + r)
}
