//! Weighted spatial-sign statistics for a high-dimensional location.
//!
//! For observations `X_1..X_n` with radii `r_i = ||X_i||` and signs
//! `U_i = X_i / r_i`, the weighted sign statistic is the U-statistic
//!
//! ```text
//! W_n = 2/(n(n-1)) * sum_{i<j} K(r_i) K(r_j) U_i' U_j
//! ```
//!
//! which is evaluated through `V_i = K(r_i) U_i` as
//! `(||sum V_i||^2 - sum ||V_i||^2) / (n(n-1))` in O(np).
//!
//! The variance estimator needs the leave-two-out sign mean
//! `u_ij = (S - U_i - U_j)/(n-2)` for every pair, with `S = sum_k U_k`. Its
//! inner products with `U_i` and `U_j` are downdated from the sign Gram
//! matrix and `S' U_j`, so the whole estimate costs one O(n^2 p) Gram pass.

use crate::error::{HdSignError, Result};
use crate::normal;
use crate::sample::{dot, norm, SampleMatrix};
use crate::weight::WeightFunction;

/// Rows whose norm is at or below this value have a zero spatial sign.
#[inline]
pub fn zero_norm_threshold(p: usize) -> f64 {
    1e-12 * (p as f64).sqrt()
}

/// `x / ||x||`, or the zero vector when `||x||` is within the zero threshold.
pub fn spatial_sign(x: &[f64]) -> Vec<f64> {
    let r = norm(x);
    if r <= zero_norm_threshold(x.len()) {
        vec![0.0; x.len()]
    } else {
        x.iter().map(|v| v / r).collect()
    }
}

/// Result of a one-sided test of `theta = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub sigma_hat: f64,
    pub z: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
}

impl TestOutcome {
    /// Standardizes a statistic by the square root of its variance estimate.
    /// Refuses a zero variance.
    pub fn from_parts(statistic: f64, variance: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(variance > 0.0) {
            return Err(HdSignError::DegenerateVariance);
        }
        let sigma_hat = variance.sqrt();
        let z = statistic / sigma_hat;
        Ok(Self {
            statistic,
            sigma_hat,
            z,
            p_value: normal::upper_tail(z),
            reject: z > normal::upper_quantile(alpha),
            alpha,
        })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(HdSignError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Spatial signs and radii of every row, shared by all weight functions.
#[derive(Debug, Clone)]
pub struct SpatialSigns {
    n: usize,
    p: usize,
    signs: Vec<f64>,
    radii: Vec<f64>,
    nonzero: Vec<bool>,
}

impl SpatialSigns {
    pub fn new(x: &SampleMatrix) -> Self {
        let (n, p) = (x.n(), x.p());
        let eps = zero_norm_threshold(p);
        let mut signs = vec![0.0; n * p];
        let mut radii = Vec::with_capacity(n);
        let mut nonzero = Vec::with_capacity(n);
        for (row, out) in x.rows().zip(signs.chunks_exact_mut(p)) {
            let r = norm(row);
            radii.push(r);
            nonzero.push(r > eps);
            if r > eps {
                for (o, v) in out.iter_mut().zip(row) {
                    *o = v / r;
                }
            }
        }
        Self {
            n,
            p,
            signs,
            radii,
            nonzero,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn sign(&self, i: usize) -> &[f64] {
        &self.signs[i * self.p..(i + 1) * self.p]
    }

    /// `K(r_i)` per row; zero-norm rows get weight 0.
    pub fn weights(&self, k: &WeightFunction) -> Result<Vec<f64>> {
        self.radii
            .iter()
            .zip(&self.nonzero)
            .enumerate()
            .map(|(row, (&r, &nz))| {
                if !nz {
                    return Ok(0.0);
                }
                let w = k.eval(r);
                if w.is_finite() {
                    Ok(w)
                } else {
                    Err(HdSignError::NonFiniteWeight { row, radius: r })
                }
            })
            .collect()
    }

    /// `W_n` by the sum-of-V reduction.
    pub fn statistic(&self, k: &WeightFunction) -> Result<f64> {
        if self.n < 2 {
            return Err(HdSignError::TooFewObservations {
                required: 2,
                actual: self.n,
            });
        }
        let weights = self.weights(k)?;
        let mut total = vec![0.0; self.p];
        let mut diagonal = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let u = self.sign(i);
            for (t, v) in total.iter_mut().zip(u) {
                *t += w * v;
            }
            diagonal += w * w * dot(u, u);
        }
        let n = self.n as f64;
        Ok((dot(&total, &total) - diagonal) / (n * (n - 1.0)))
    }

    pub fn gram(&self) -> SignGram {
        let n = self.n;
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            let ui = self.sign(i);
            for j in i..n {
                let g = dot(ui, self.sign(j));
                gram[i * n + j] = g;
                gram[j * n + i] = g;
            }
        }
        let sum_dots = (0..n).map(|j| gram[j * n..(j + 1) * n].iter().sum()).collect();
        SignGram { n, gram, sum_dots }
    }
}

/// Gram matrix `G_ij = U_i'U_j` of the spatial signs together with `S'U_j`.
#[derive(Debug, Clone)]
pub struct SignGram {
    n: usize,
    gram: Vec<f64>,
    sum_dots: Vec<f64>,
}

impl SignGram {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.n + j]
    }

    /// The variance estimate `sigma_hat_n^2` for the given row weights,
    /// clamped at zero.
    pub fn variance(&self, weights: &[f64]) -> Result<f64> {
        let n = self.n;
        if n < 3 {
            return Err(HdSignError::TooFewObservations { required: 3, actual: n });
        }
        let inv = 1.0 / (n as f64 - 2.0);
        let mut total = 0.0;
        for i in 0..n {
            let wi = weights[i] * weights[i];
            if wi == 0.0 {
                continue;
            }
            let gii = self.get(i, i);
            let si = self.sum_dots[i];
            let mut row = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                let wj = weights[j] * weights[j];
                if wj == 0.0 {
                    continue;
                }
                let gij = self.get(i, j);
                // (U_i - u_ij)'U_j and (U_j - u_ij)'U_i
                let a = gij - (self.sum_dots[j] - gij - self.get(j, j)) * inv;
                let b = gij - (si - gii - gij) * inv;
                row += wj * a * b;
            }
            total += wi * row;
        }
        let n4 = (n as f64).powi(4);
        Ok((2.0 * total / n4).max(0.0))
    }
}

/// `W_n` for weight `k`.
pub fn weighted_sign_statistic(x: &SampleMatrix, k: &WeightFunction) -> Result<f64> {
    SpatialSigns::new(x).statistic(k)
}

/// The ratio-consistent variance estimate `sigma_hat_n^2`; 0 signals a
/// degenerate sample.
pub fn variance_estimator(x: &SampleMatrix, k: &WeightFunction) -> Result<f64> {
    x.require_rows(3)?;
    let signs = SpatialSigns::new(x);
    let weights = signs.weights(k)?;
    signs.gram().variance(&weights)
}

/// Rejects `theta = 0` when `W_n / sigma_hat_n > z_alpha`.
pub fn run_test(x: &SampleMatrix, k: &WeightFunction, alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    x.require_rows(3)?;
    let signs = SpatialSigns::new(x);
    let statistic = signs.statistic(k)?;
    let variance = signs.gram().variance(&signs.weights(k)?)?;
    TestOutcome::from_parts(statistic, variance, alpha)
}

/// Runs several weights on one sample, sharing the sign Gram matrix.
pub fn run_tests(x: &SampleMatrix, weights: &[WeightFunction], alpha: f64) -> Result<Vec<Result<TestOutcome>>> {
    check_alpha(alpha)?;
    x.require_rows(3)?;
    let signs = SpatialSigns::new(x);
    let gram = signs.gram();
    Ok(weights
        .iter()
        .map(|k| {
            let statistic = signs.statistic(k)?;
            let variance = gram.variance(&signs.weights(k)?)?;
            TestOutcome::from_parts(statistic, variance, alpha)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_statistic(x: &SampleMatrix, k: &WeightFunction) -> f64 {
        let n = x.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let (ui, uj) = (spatial_sign(x.row(i)), spatial_sign(x.row(j)));
                let ki = k.eval(norm(x.row(i)));
                let kj = k.eval(norm(x.row(j)));
                s += ki * kj * dot(&ui, &uj);
            }
        }
        2.0 * s / (n as f64 * (n as f64 - 1.0))
    }

    #[test]
    fn spatial_sign_examples() {
        assert_eq!(spatial_sign(&[3.0, 4.0]), vec![0.6, 0.8]);
        assert_eq!(spatial_sign(&[0.0, 0.0]), vec![0.0, 0.0]);
        let a = spatial_sign(&[1.0, -2.0, 0.5]);
        let b = spatial_sign(&[7.0, -14.0, 3.5]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn orthogonal_pair_gives_zero() {
        let x = SampleMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(weighted_sign_statistic(&x, &WeightFunction::Ss).unwrap(), 0.0);
    }

    #[test]
    fn collinear_pair_with_inverse_weight() {
        let x = SampleMatrix::from_rows(&[[2.0, 0.0], [1.0, 0.0]]).unwrap();
        let w = weighted_sign_statistic(&x, &WeightFunction::Os).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_rows_contribute_nothing() {
        let x = SampleMatrix::from_rows(&[[2.0, 0.0], [0.0, 0.0], [1.0, 0.0]]).unwrap();
        let w = weighted_sign_statistic(&x, &WeightFunction::Os).unwrap();
        // one nonzero pair out of three: (2/6) * (1/2)(1/1)
        assert!((w - 1.0 / 6.0).abs() < 1e-15);
        assert!(variance_estimator(&x, &WeightFunction::Os).is_ok());
    }

    #[test]
    fn non_finite_custom_weight_is_an_error() {
        let x = SampleMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let k = WeightFunction::custom("bad", |r| if r > 1.2 { f64::INFINITY } else { 1.0 });
        assert!(matches!(
            weighted_sign_statistic(&x, &k),
            Err(HdSignError::NonFiniteWeight { row: 2, .. })
        ));
    }

    #[test]
    fn orthonormal_triple_has_zero_variance() {
        let x = SampleMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(variance_estimator(&x, &WeightFunction::Ss).unwrap(), 0.0);
        assert_eq!(
            run_test(&x, &WeightFunction::Ss, 0.05).unwrap_err(),
            HdSignError::DegenerateVariance
        );
    }

    #[test]
    fn variance_requires_three_rows() {
        let x = SampleMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            variance_estimator(&x, &WeightFunction::Os),
            Err(HdSignError::TooFewObservations { required: 3, .. })
        ));
    }

    #[test]
    fn zero_statistic_has_half_p_value() {
        let out = TestOutcome::from_parts(0.0, 0.3, 0.05).unwrap();
        assert_eq!(out.p_value, 0.5);
        assert!(!out.reject);
        assert!(TestOutcome::from_parts(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn reduction_matches_double_sum_on_small_sample() {
        let x = SampleMatrix::from_rows(&[
            [0.3, -1.2, 0.8],
            [1.1, 0.4, -0.2],
            [-0.7, 0.9, 1.5],
            [0.05, -0.3, -1.1],
            [2.0, 0.1, 0.6],
        ])
        .unwrap();
        for k in [WeightFunction::Os, WeightFunction::Ss, WeightFunction::Cq] {
            let fast = weighted_sign_statistic(&x, &k).unwrap();
            let slow = naive_statistic(&x, &k);
            assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1e-300), "{k}");
        }
    }
}
