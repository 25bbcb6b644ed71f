//! Asymptotic power and relative efficiency of the weighted sign tests.
//!
//! Every test in the family has asymptotic power
//! `Phi(-z_alpha + c_K * p n theta'theta / sqrt(2 tr(Sigma^2)))`, where the
//! efficiency factor `c_K = [E{K(r)/r}]^2 / E{K(r)^2}` depends only on the
//! radial law. By Cauchy-Schwarz `c_K <= E(r^-2)`, attained at `K(r) = 1/r`.
//! The named tests have
//!
//! * OS: `E(||v||^-2)`
//! * SS: `(E ||v||^-1)^2`
//! * CQ: `1 / E(||v||^2)`
//!
//! and relative efficiencies are ratios of these factors.

use statrs::function::gamma::ln_gamma;

use crate::distributions::{Family, RngStream};
use crate::error::{HdSignError, Result};
use crate::normal;
use crate::signcore::check_alpha;
use crate::weight::WeightFunction;

/// Radial moments of the standardized variate `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMoments {
    /// `E ||v||^-2`
    pub inv2: f64,
    /// `E ||v||^-1`
    pub inv1: f64,
    /// `E ||v||^2`
    pub sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerInputs {
    pub n: usize,
    pub p: usize,
    /// `theta'theta`
    pub theta_norm2: f64,
    /// `tr(Sigma^2)`
    pub tr_sigma2: f64,
    pub moments: RadialMoments,
}

impl PowerInputs {
    pub fn validate(&self) -> Result<()> {
        let m = &self.moments;
        let bad = |msg: &str| Err(HdSignError::InvalidParameter(msg.to_string()));
        if self.n == 0 || self.p == 0 {
            return bad("n and p must be positive");
        }
        if !(self.theta_norm2 >= 0.0) || !(self.tr_sigma2 > 0.0) {
            return bad("need theta'theta >= 0 and tr(Sigma^2) > 0");
        }
        if ![m.inv2, m.inv1, m.sq].iter().all(|v| v.is_finite() && *v > 0.0) {
            return bad("radial moments must be finite and positive");
        }
        // Jensen, with room for round-off in estimated moments
        if m.inv2 < m.inv1 * m.inv1 * (1.0 - 1e-12) {
            return bad("E||v||^-2 must be at least (E||v||^-1)^2");
        }
        Ok(())
    }

    /// `p n theta'theta / sqrt(2 tr(Sigma^2))`
    pub fn signal(&self) -> f64 {
        self.p as f64 * self.n as f64 * self.theta_norm2 / (2.0 * self.tr_sigma2).sqrt()
    }
}

/// Power of the weighted sign test whose efficiency factor is `moment_ratio`.
pub fn power_ws(inputs: &PowerInputs, alpha: f64, moment_ratio: f64) -> Result<f64> {
    check_alpha(alpha)?;
    inputs.validate()?;
    if !(moment_ratio >= 0.0) || !moment_ratio.is_finite() {
        return Err(HdSignError::InvalidParameter(format!(
            "efficiency factor must be non-negative, got {moment_ratio}"
        )));
    }
    let shift = moment_ratio * inputs.signal();
    if shift == 0.0 {
        return Ok(alpha);
    }
    Ok(normal::cdf(-normal::upper_quantile(alpha) + shift))
}

pub fn power_os(inputs: &PowerInputs, alpha: f64) -> Result<f64> {
    power_ws(inputs, alpha, inputs.moments.inv2)
}

pub fn power_ss(inputs: &PowerInputs, alpha: f64) -> Result<f64> {
    power_ws(inputs, alpha, inputs.moments.inv1 * inputs.moments.inv1)
}

pub fn power_cq(inputs: &PowerInputs, alpha: f64) -> Result<f64> {
    power_ws(inputs, alpha, 1.0 / inputs.moments.sq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreReport {
    pub os_cq: f64,
    pub os_ss: f64,
    pub ss_cq: f64,
}

impl AreReport {
    fn from_pair(os_cq: f64, os_ss: f64) -> Self {
        Self {
            os_cq,
            os_ss,
            ss_cq: os_cq / os_ss,
        }
    }
}

/// Large-p relative efficiencies for the elliptical families.
pub fn are_closed_form(family: &Family) -> Result<AreReport> {
    family.validate()?;
    match *family {
        Family::Normal => Ok(AreReport::from_pair(1.0, 1.0)),
        Family::StudentT { df } => {
            let os_cq = df / (df - 2.0);
            let log_ratio = ln_gamma(df / 2.0) - ln_gamma((df + 1.0) / 2.0);
            let os_ss = df * (2.0 * log_ratio).exp() / 2.0;
            Ok(AreReport::from_pair(os_cq, os_ss))
        }
        Family::MixtureNormal { kappa, sigma } => {
            let inv2 = 1.0 - kappa + kappa / (sigma * sigma);
            let sq = 1.0 - kappa + kappa * sigma * sigma;
            let inv1 = 1.0 - kappa + kappa / sigma;
            Ok(AreReport::from_pair(inv2 * sq, inv2 / (inv1 * inv1)))
        }
        Family::IcStudentT { .. } | Family::IcNormalMixture { .. } => {
            Err(HdSignError::UnsupportedFamily(family.label()))
        }
    }
}

/// The eight distributions tabulated by the `are` command, in column order.
pub fn table1_columns() -> Vec<(String, Family)> {
    let mut cols: Vec<(String, Family)> = [3.0, 4.0, 5.0, 6.0]
        .into_iter()
        .map(|df| (format!("t_p(0,I_p,{df})"), Family::StudentT { df }))
        .collect();
    cols.push(("N(0,I_p)".to_string(), Family::Normal));
    for (kappa, sigma) in [(0.2, 3.0), (0.2, 10.0), (0.8, 10.0)] {
        cols.push((
            format!("MN({kappa},{sigma},I_p)"),
            Family::MixtureNormal { kappa, sigma },
        ));
    }
    cols
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn contains(&self, value: f64, standard_errors: f64) -> bool {
        (self.mean - value).abs() <= standard_errors * self.std_error
    }
}

/// Monte Carlo radial moments of a family at dimension `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimates {
    pub p: usize,
    pub samples: usize,
    pub inv2: Estimate,
    pub inv1: Estimate,
    pub sq: Estimate,
    /// Sample covariance of `(||v||^-2, ||v||^-1, ||v||^2)`, row-major 3×3.
    covariance: [f64; 9],
}

impl MomentEstimates {
    pub fn moments(&self) -> RadialMoments {
        RadialMoments {
            inv2: self.inv2.mean,
            inv1: self.inv1.mean,
            sq: self.sq.mean,
        }
    }

    fn delta(&self, value: f64, grad: [f64; 3]) -> Estimate {
        let mut var = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                var += grad[a] * self.covariance[a * 3 + b] * grad[b];
            }
        }
        Estimate {
            mean: value,
            std_error: (var.max(0.0) / self.samples as f64).sqrt(),
        }
    }

    /// `E||v||^-2 E||v||^2`
    pub fn are_os_cq(&self) -> Estimate {
        let (a, c) = (self.inv2.mean, self.sq.mean);
        self.delta(a * c, [c, 0.0, a])
    }

    /// `E||v||^-2 / (E||v||^-1)^2`
    pub fn are_os_ss(&self) -> Estimate {
        let (a, b) = (self.inv2.mean, self.inv1.mean);
        self.delta(a / (b * b), [1.0 / (b * b), -2.0 * a / (b * b * b), 0.0])
    }

    /// `(E||v||^-1)^2 E||v||^2`
    pub fn are_ss_cq(&self) -> Estimate {
        let (b, c) = (self.inv1.mean, self.sq.mean);
        self.delta(b * b * c, [0.0, 2.0 * b * c, b * b])
    }
}

/// Draws `n_mc` standardized variates (identity scatter) and returns the
/// `||v||` sample.
pub fn radial_sample(family: &Family, p: usize, n_mc: usize, stream: &RngStream) -> Result<Vec<f64>> {
    family.validate()?;
    if p == 0 {
        return Err(HdSignError::EmptyDimension);
    }
    let mut rng = stream.rng();
    let mut z = vec![0.0; p];
    Ok((0..n_mc)
        .map(|_| {
            family.draw_standard(&mut rng, &mut z);
            crate::sample::norm(&z)
        })
        .collect())
}

/// Monte Carlo estimates of `E||v||^-2`, `E||v||^-1` and `E||v||^2`.
pub fn moment_oracle(family: &Family, p: usize, n_mc: usize, stream: &RngStream) -> Result<MomentEstimates> {
    if n_mc < 10_000 {
        return Err(HdSignError::InvalidParameter(format!(
            "moment oracle needs at least 10^4 draws, got {n_mc}"
        )));
    }
    let radii = radial_sample(family, p, n_mc, stream)?;
    let cols: Vec<[f64; 3]> = radii.iter().map(|r| [1.0 / (r * r), 1.0 / r, r * r]).collect();
    let nf = n_mc as f64;
    let mut mean = [0.0; 3];
    for c in &cols {
        for k in 0..3 {
            mean[k] += c[k];
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);
    let mut covariance = [0.0; 9];
    for c in &cols {
        for a in 0..3 {
            for b in 0..3 {
                covariance[a * 3 + b] += (c[a] - mean[a]) * (c[b] - mean[b]);
            }
        }
    }
    covariance.iter_mut().for_each(|v| *v /= nf - 1.0);
    let est = |k: usize| Estimate {
        mean: mean[k],
        std_error: (covariance[k * 3 + k] / nf).sqrt(),
    };
    Ok(MomentEstimates {
        p,
        samples: n_mc,
        inv2: est(0),
        inv1: est(1),
        sq: est(2),
        covariance,
    })
}

/// Estimated efficiency factor of a weight against the Cauchy-Schwarz bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEfficiency {
    /// `[E{K(r)/r}]^2 / E{K(r)^2}`
    pub factor: Estimate,
    /// `E(r^-2)`
    pub bound: Estimate,
    /// `bound - factor`, with a standard error from the paired sample.
    pub gap: Estimate,
}

/// Efficiency factor of `k` on an observed radial sample.
pub fn weight_efficiency(k: &WeightFunction, radii: &[f64]) -> Result<WeightEfficiency> {
    if radii.len() < 2 {
        return Err(HdSignError::InvalidParameter("need at least two radii".into()));
    }
    let nf = radii.len() as f64;
    let mut vals = Vec::with_capacity(radii.len());
    for (row, &r) in radii.iter().enumerate() {
        let w = k.eval(r);
        if !w.is_finite() || !(r > 0.0) {
            return Err(HdSignError::NonFiniteWeight { row, radius: r });
        }
        vals.push([1.0 / (r * r), w / r, w * w]);
    }
    let mut mean = [0.0; 3];
    for v in &vals {
        for t in 0..3 {
            mean[t] += v[t] / nf;
        }
    }
    let mut cov = [0.0; 9];
    for v in &vals {
        for a in 0..3 {
            for b in 0..3 {
                cov[a * 3 + b] += (v[a] - mean[a]) * (v[b] - mean[b]) / (nf - 1.0);
            }
        }
    }
    let se = |grad: [f64; 3]| {
        let mut var = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                var += grad[a] * cov[a * 3 + b] * grad[b];
            }
        }
        (var.max(0.0) / nf).sqrt()
    };
    let (e_inv2, e_kr, e_k2) = (mean[0], mean[1], mean[2]);
    let factor = e_kr * e_kr / e_k2;
    let d_factor = [0.0, 2.0 * e_kr / e_k2, -e_kr * e_kr / (e_k2 * e_k2)];
    let d_gap = [1.0, -d_factor[1], -d_factor[2]];
    Ok(WeightEfficiency {
        factor: Estimate {
            mean: factor,
            std_error: se(d_factor),
        },
        bound: Estimate {
            mean: e_inv2,
            std_error: se([1.0, 0.0, 0.0]),
        },
        gap: Estimate {
            mean: e_inv2 - factor,
            std_error: se(d_gap),
        },
    })
}
