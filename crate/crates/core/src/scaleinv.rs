//! Scale-invariant weighted sign test.
//!
//! Each pair `(i, j)` is standardized by a diagonal scale estimated from the
//! other `n - 2` observations, so rescaling any coordinate leaves the test
//! unchanged. The per-pair scales are downdated from full-sample coordinate
//! sums; after that every pair costs O(p) for the statistic and O(np) for the
//! variance estimate.

use rayon::prelude::*;

use crate::error::{HdSignError, Result};
use crate::sample::SampleMatrix;
use crate::signcore::{check_alpha, zero_norm_threshold, TestOutcome};
use crate::weight::WeightFunction;

/// A coordinate whose leave-two-out scale fell to the floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlooredCoordinate {
    pub i: usize,
    pub j: usize,
    pub coord: usize,
}

/// Leave-two-out diagonal scales `D_ij`, one length-p vector per unordered
/// pair `i < j`.
#[derive(Debug, Clone)]
pub struct PairDiagonals {
    n: usize,
    p: usize,
    scales: Vec<f64>,
    floored: Vec<FlooredCoordinate>,
}

impl PairDiagonals {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        assert!(i != j && j < self.n, "pair ({i}, {j}) out of range");
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Scales for the pair `{i, j}` (order does not matter).
    pub fn pair(&self, i: usize, j: usize) -> &[f64] {
        let k = self.index(i, j);
        &self.scales[k * self.p..(k + 1) * self.p]
    }

    /// Coordinates that were floored; empty for data with no constant
    /// coordinates.
    pub fn floored(&self) -> &[FlooredCoordinate] {
        &self.floored
    }
}

/// Strategy for the per-pair diagonal scale.
pub trait DiagonalEstimator: Send + Sync {
    fn name(&self) -> &str;

    fn leave_two_out(&self, x: &SampleMatrix) -> Result<PairDiagonals>;
}

/// Unbiased coordinate variance of the `n - 2` remaining rows (denominator
/// `n - 3`).
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleVariance;

/// Mean squared coordinate of the remaining rows about zero (denominator
/// `n - 2`).
#[derive(Debug, Clone, Copy, Default)]
pub struct SecondMoment;

impl DiagonalEstimator for SampleVariance {
    fn name(&self) -> &str {
        "sample-variance"
    }

    fn leave_two_out(&self, x: &SampleMatrix) -> Result<PairDiagonals> {
        x.require_rows(4)?;
        let p = x.p();
        let mean = column_means(x);
        // shifting by the full-sample mean keeps the downdated sums well scaled
        let (s1, s2) = shifted_sums(x, &mean);
        let m = (x.n() - 2) as f64;
        downdate(x, &floors(x), |i, j, k| {
            let (a, b) = (x.row(i)[k] - mean[k], x.row(j)[k] - mean[k]);
            let t1 = s1[k] - a - b;
            let t2 = s2[k] - a * a - b * b;
            debug_assert!(k < p);
            (t2 - t1 * t1 / m) / (m - 1.0)
        })
    }
}

impl DiagonalEstimator for SecondMoment {
    fn name(&self) -> &str {
        "second-moment"
    }

    fn leave_two_out(&self, x: &SampleMatrix) -> Result<PairDiagonals> {
        x.require_rows(4)?;
        let (_, s2) = shifted_sums(x, &vec![0.0; x.p()]);
        let m = (x.n() - 2) as f64;
        downdate(x, &floors(x), |i, j, k| {
            let (a, b) = (x.row(i)[k], x.row(j)[k]);
            (s2[k] - a * a - b * b) / m
        })
    }
}

fn column_means(x: &SampleMatrix) -> Vec<f64> {
    let mut mean = vec![0.0; x.p()];
    for row in x.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    let n = x.n() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

fn shifted_sums(x: &SampleMatrix, shift: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut s1 = vec![0.0; x.p()];
    let mut s2 = vec![0.0; x.p()];
    for row in x.rows() {
        for k in 0..x.p() {
            let v = row[k] - shift[k];
            s1[k] += v;
            s2[k] += v * v;
        }
    }
    (s1, s2)
}

/// Per-coordinate floor: 1e-12 times the full-sample variance, or 1e-12 when
/// that variance is zero.
fn floors(x: &SampleMatrix) -> Vec<f64> {
    let mean = column_means(x);
    let (_, s2) = shifted_sums(x, &mean);
    let denom = (x.n() - 1) as f64;
    s2.iter()
        .map(|s| {
            let var = s / denom;
            if var > 0.0 {
                1e-12 * var
            } else {
                1e-12
            }
        })
        .collect()
}

fn downdate(x: &SampleMatrix, floor: &[f64], scale: impl Fn(usize, usize, usize) -> f64) -> Result<PairDiagonals> {
    let (n, p) = (x.n(), x.p());
    let pairs = n * (n - 1) / 2;
    let mut scales = Vec::with_capacity(pairs * p);
    let mut floored = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for (k, &lo) in floor.iter().enumerate() {
                let d = scale(i, j, k);
                if d <= lo || !d.is_finite() {
                    floored.push(FlooredCoordinate { i, j, coord: k });
                    scales.push(lo);
                } else {
                    scales.push(d);
                }
            }
        }
    }
    Ok(PairDiagonals { n, p, scales, floored })
}

/// Leave-two-out scales with the default [`SampleVariance`] strategy.
pub fn leave_two_out_diagonals(x: &SampleMatrix) -> Result<PairDiagonals> {
    SampleVariance.leave_two_out(x)
}

/// Scale-invariant statistic and variance estimate for one sample.
#[derive(Debug, Clone)]
pub struct ScalarInvariant<'a> {
    x: &'a SampleMatrix,
    diagonals: PairDiagonals,
}

/// Scale-invariant test result, with the number of floored coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarInvariantOutcome {
    pub outcome: TestOutcome,
    pub floored_coordinates: usize,
}

impl<'a> ScalarInvariant<'a> {
    pub fn new(x: &'a SampleMatrix) -> Result<Self> {
        Self::with_estimator(x, &SampleVariance)
    }

    pub fn with_estimator(x: &'a SampleMatrix, estimator: &dyn DiagonalEstimator) -> Result<Self> {
        let diagonals = estimator.leave_two_out(x)?;
        Ok(Self { x, diagonals })
    }

    pub fn diagonals(&self) -> &PairDiagonals {
        &self.diagonals
    }

    /// `T_n`.
    pub fn statistic(&self, k: &WeightFunction) -> Result<f64> {
        let n = self.x.n();
        let eps = zero_norm_threshold(self.x.p());
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for j in i + 1..n {
                    let d = self.diagonals.pair(i, j);
                    let (xi, xj) = (self.x.row(i), self.x.row(j));
                    let (mut cross, mut ni, mut nj) = (0.0, 0.0, 0.0);
                    for t in 0..d.len() {
                        let inv = 1.0 / d[t];
                        cross += xi[t] * xj[t] * inv;
                        ni += xi[t] * xi[t] * inv;
                        nj += xj[t] * xj[t] * inv;
                    }
                    let (ri, rj) = (ni.sqrt(), nj.sqrt());
                    if ri <= eps || rj <= eps {
                        continue;
                    }
                    let ki = finite_weight(k, ri, i)?;
                    let kj = finite_weight(k, rj, j)?;
                    acc += ki * kj * cross / (ri * rj);
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let total: f64 = rows.iter().sum();
        let n = n as f64;
        Ok(2.0 * total / (n * (n - 1.0)))
    }

    /// The variance estimate, with every observation in the inner sign mean
    /// standardized by the outer pair's scales. Clamped at zero.
    pub fn variance(&self, k: &WeightFunction) -> Result<f64> {
        let (n, p) = (self.x.n(), self.x.p());
        let eps = zero_norm_threshold(p);
        let inv_m = 1.0 / (n as f64 - 2.0);
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut inv_d = vec![0.0; p];
                let mut zi = vec![0.0; p];
                let mut zj = vec![0.0; p];
                let mut acc = 0.0;
                for j in i + 1..n {
                    let d = self.diagonals.pair(i, j);
                    let (xi, xj) = (self.x.row(i), self.x.row(j));
                    for t in 0..p {
                        inv_d[t] = 1.0 / d[t];
                        zi[t] = xi[t] * inv_d[t];
                        zj[t] = xj[t] * inv_d[t];
                    }
                    let ri = crate::sample::dot(xi, &zi).sqrt();
                    let rj = crate::sample::dot(xj, &zj).sqrt();
                    if ri <= eps || rj <= eps {
                        continue;
                    }
                    let wi = finite_weight(k, ri, i)?;
                    let wj = finite_weight(k, rj, j)?;
                    let uij = crate::sample::dot(xi, &zj) / (ri * rj);
                    // mean sign of the other rows, projected on U_i and U_j
                    let (mut on_i, mut on_j) = (0.0, 0.0);
                    for m in (0..n).filter(|&m| m != i && m != j) {
                        let xm = self.x.row(m);
                        let mut rm2 = 0.0;
                        for t in 0..p {
                            rm2 += xm[t] * xm[t] * inv_d[t];
                        }
                        let rm = rm2.sqrt();
                        if rm <= eps {
                            continue;
                        }
                        on_i += crate::sample::dot(xm, &zi) / (rm * ri);
                        on_j += crate::sample::dot(xm, &zj) / (rm * rj);
                    }
                    let a = uij - on_j * inv_m;
                    let b = uij - on_i * inv_m;
                    acc += wi * wi * wj * wj * a * b;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        // ordered pairs i != j contribute symmetrically
        let total: f64 = 2.0 * rows.iter().sum::<f64>();
        Ok((2.0 * total / (n as f64).powi(4)).max(0.0))
    }

    pub fn run_test(&self, k: &WeightFunction, alpha: f64) -> Result<ScalarInvariantOutcome> {
        check_alpha(alpha)?;
        let statistic = self.statistic(k)?;
        let variance = self.variance(k)?;
        Ok(ScalarInvariantOutcome {
            outcome: TestOutcome::from_parts(statistic, variance, alpha)?,
            floored_coordinates: self.diagonals.floored().len(),
        })
    }
}

fn finite_weight(k: &WeightFunction, r: f64, row: usize) -> Result<f64> {
    let w = k.eval(r);
    if w.is_finite() {
        Ok(w)
    } else {
        Err(HdSignError::NonFiniteWeight { row, radius: r })
    }
}

pub fn scalar_invariant_statistic(x: &SampleMatrix, k: &WeightFunction) -> Result<f64> {
    ScalarInvariant::new(x)?.statistic(k)
}

pub fn scalar_invariant_variance(x: &SampleMatrix, k: &WeightFunction) -> Result<f64> {
    ScalarInvariant::new(x)?.variance(k)
}

pub fn run_scalar_invariant_test(x: &SampleMatrix, k: &WeightFunction, alpha: f64) -> Result<ScalarInvariantOutcome> {
    check_alpha(alpha)?;
    ScalarInvariant::new(x)?.run_test(k, alpha)
}
