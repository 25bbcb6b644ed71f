//! Seeded samplers for the elliptical and independent-component families used
//! in the power studies, plus the scatter-matrix square root and the
//! uniform-sphere moment check used to validate them.
//!
//! Elliptical families are drawn as `X = theta + L (s Z)` where `L L' = Sigma`,
//! `Z` is standard normal and `s` is a radial mixing variable:
//!
//! * normal: `s = 1`
//! * multivariate t with `df` degrees of freedom: `s = sqrt(df / chi2_df)`
//! * normal mixture `(1-kappa) N(0, Sigma) + kappa N(0, sigma^2 Sigma)`:
//!   `s = sigma` with probability `kappa`, otherwise 1
//!
//! Independent-component families draw every coordinate of `Z` from a
//! univariate law and return `X = L Z + theta` without rescaling `Z`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal, StudentT};

use crate::error::{HdSignError, Result};
use crate::sample::{dot, SampleMatrix};

/// A reproducible random stream: one seed, many independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// ChaCha8 keyed by `seed`, positioned on stream `stream_id`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScatterKind {
    /// `Sigma_ij = rho^|i-j|`
    Ar1 {
        rho: f64,
    },
    Identity,
    /// Row-major p×p symmetric positive-definite matrix.
    Dense(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSpec {
    kind: ScatterKind,
    p: usize,
}

impl ScatterSpec {
    pub fn ar1(p: usize, rho: f64) -> Result<Self> {
        if p == 0 {
            return Err(HdSignError::EmptyDimension);
        }
        if !(rho.abs() < 1.0) {
            return Err(HdSignError::InvalidParameter(format!(
                "AR(1) correlation must satisfy |rho| < 1, got {rho}"
            )));
        }
        Ok(Self {
            kind: ScatterKind::Ar1 { rho },
            p,
        })
    }

    pub fn identity(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(HdSignError::EmptyDimension);
        }
        Ok(Self {
            kind: ScatterKind::Identity,
            p,
        })
    }

    pub fn dense(matrix: Vec<f64>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(HdSignError::EmptyDimension);
        }
        if matrix.len() != p * p {
            return Err(HdSignError::ShapeMismatch {
                n: p,
                p,
                len: matrix.len(),
            });
        }
        for i in 0..p {
            for j in 0..i {
                let (a, b) = (matrix[i * p + j], matrix[j * p + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(HdSignError::InvalidParameter(format!(
                        "scatter matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            kind: ScatterKind::Dense(matrix),
            p,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn kind(&self) -> &ScatterKind {
        &self.kind
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match &self.kind {
            ScatterKind::Ar1 { rho } => rho.powi(i.abs_diff(j) as i32),
            ScatterKind::Identity => f64::from(u8::from(i == j)),
            ScatterKind::Dense(m) => m[i * self.p + j],
        }
    }

    /// Row-major p×p matrix.
    pub fn matrix(&self) -> Vec<f64> {
        let p = self.p;
        let mut m = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                m[i * p + j] = self.entry(i, j);
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.p).map(|i| self.entry(i, i)).sum()
    }

    /// `tr(Sigma^2) = sum_ij Sigma_ij^2`.
    pub fn trace_sq(&self) -> f64 {
        let p = self.p;
        match &self.kind {
            ScatterKind::Identity => p as f64,
            ScatterKind::Ar1 { rho } => {
                // p on the diagonal, 2(p-d) entries at lag d
                let r2 = rho * rho;
                let mut lag = 1.0;
                let mut total = p as f64;
                for d in 1..p {
                    lag *= r2;
                    total += 2.0 * (p - d) as f64 * lag;
                }
                total
            }
            ScatterKind::Dense(m) => m.iter().map(|v| v * v).sum(),
        }
    }

    /// Linear map `z -> L z` with `L L' = Sigma`.
    pub fn root(&self) -> Result<ScatterRoot> {
        Ok(match &self.kind {
            ScatterKind::Identity => ScatterRoot::Identity,
            ScatterKind::Ar1 { rho } => ScatterRoot::Ar1 {
                rho: *rho,
                innovation: (1.0 - rho * rho).sqrt(),
            },
            ScatterKind::Dense(_) => ScatterRoot::Dense(scatter_sqrt(self)?),
        })
    }
}

/// Dense lower-triangular p×p matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    p: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.data[i * self.p..i * self.p + i + 1], &z[..=i]);
        }
    }

    /// Forward substitution: solves `L y = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.p];
        for i in 0..self.p {
            let row = &self.data[i * self.p..i * self.p + i];
            y[i] = (b[i] - dot(row, &y[..i])) / self.get(i, i);
        }
        y
    }

    /// `L L'`, row-major.
    pub fn gram(&self) -> Vec<f64> {
        let p = self.p;
        let mut m = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..=i {
                let k = j + 1;
                let v = dot(&self.data[i * p..i * p + k], &self.data[j * p..j * p + k]);
                m[i * p + j] = v;
                m[j * p + i] = v;
            }
        }
        m
    }
}

/// Cholesky factor of the scatter matrix.
pub fn scatter_sqrt(spec: &ScatterSpec) -> Result<LowerTriangular> {
    let p = spec.p();
    let a = spec.matrix();
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let d = a[j * p + j] - dot(&l[j * p..j * p + j], &l[j * p..j * p + j]);
        if !(d > 0.0) {
            return Err(HdSignError::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[j * p + j] = djj;
        for i in j + 1..p {
            let s = a[i * p + j] - dot(&l[i * p..i * p + j], &l[j * p..j * p + j]);
            l[i * p + j] = s / djj;
        }
    }
    Ok(LowerTriangular { p, data: l })
}

/// How a scatter square root is applied to a draw.
#[derive(Debug, Clone)]
pub enum ScatterRoot {
    Identity,
    /// Cholesky factor of an AR(1) matrix, applied by its recursion in O(p).
    Ar1 {
        rho: f64,
        innovation: f64,
    },
    Dense(LowerTriangular),
}

impl ScatterRoot {
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        match self {
            Self::Identity => out.copy_from_slice(z),
            Self::Ar1 { rho, innovation } => {
                let mut prev = z[0];
                out[0] = prev;
                for k in 1..z.len() {
                    prev = rho * prev + innovation * z[k];
                    out[k] = prev;
                }
            }
            Self::Dense(l) => l.apply(z, out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Normal,
    /// Multivariate t.
    StudentT {
        df: f64,
    },
    /// `(1-kappa) N(0, Sigma) + kappa N(0, sigma^2 Sigma)`.
    MixtureNormal {
        kappa: f64,
        sigma: f64,
    },
    /// Independent t coordinates.
    IcStudentT {
        df: f64,
    },
    /// Independent `(1-kappa) N(0,1) + kappa N(0, sigma^2)` coordinates.
    IcNormalMixture {
        kappa: f64,
        sigma: f64,
    },
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HdSignError::InvalidParameter(msg));
        match *self {
            Self::Normal => Ok(()),
            Self::StudentT { df } | Self::IcStudentT { df } => {
                if df >= 3.0 && df.is_finite() {
                    Ok(())
                } else {
                    bad(format!("t degrees of freedom must be at least 3, got {df}"))
                }
            }
            Self::MixtureNormal { kappa, sigma } | Self::IcNormalMixture { kappa, sigma } => {
                if !(kappa > 0.0 && kappa < 1.0) {
                    bad(format!("mixture weight must lie in (0, 1), got {kappa}"))
                } else if !(sigma > 0.0 && sigma.is_finite()) {
                    bad(format!("mixture scale must be positive, got {sigma}"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn is_elliptical(&self) -> bool {
        matches!(self, Self::Normal | Self::StudentT { .. } | Self::MixtureNormal { .. })
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Normal => "N".to_string(),
            Self::StudentT { df } => format!("t({df})"),
            Self::MixtureNormal { kappa, sigma } => format!("MN({kappa},{sigma})"),
            Self::IcStudentT { df } => format!("IC-t({df})"),
            Self::IcNormalMixture { kappa, sigma } => format!("IC-MN({kappa},{sigma})"),
        }
    }

    /// Fills `z` with one standardized draw (identity scatter, zero location).
    pub fn draw_standard<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64]) {
        match *self {
            Self::Normal => fill_normal(rng, z),
            Self::StudentT { df } => {
                fill_normal(rng, z);
                let chi2: f64 = ChiSquared::new(df).expect("validated df").sample(rng);
                let s = (df / chi2).sqrt();
                z.iter_mut().for_each(|v| *v *= s);
            }
            Self::MixtureNormal { kappa, sigma } => {
                fill_normal(rng, z);
                if rng.random::<f64>() < kappa {
                    z.iter_mut().for_each(|v| *v *= sigma);
                }
            }
            Self::IcStudentT { df } => {
                let t = StudentT::new(df).expect("validated df");
                z.iter_mut().for_each(|v| *v = t.sample(rng));
            }
            Self::IcNormalMixture { kappa, sigma } => {
                for v in z.iter_mut() {
                    let g: f64 = StandardNormal.sample(rng);
                    *v = if rng.random::<f64>() < kappa { sigma * g } else { g };
                }
            }
        }
    }
}

fn fill_normal<R: Rng + ?Sized>(rng: &mut R, z: &mut [f64]) {
    z.iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    pub family: Family,
    pub scatter: ScatterSpec,
    pub theta: Vec<f64>,
}

impl DistributionSpec {
    pub fn new(family: Family, scatter: ScatterSpec, theta: Vec<f64>) -> Result<Self> {
        family.validate()?;
        if theta.len() != scatter.p() {
            return Err(HdSignError::InvalidParameter(format!(
                "location has length {}, scatter dimension is {}",
                theta.len(),
                scatter.p()
            )));
        }
        Ok(Self { family, scatter, theta })
    }

    /// Zero location.
    pub fn centered(family: Family, scatter: ScatterSpec) -> Result<Self> {
        let p = scatter.p();
        Self::new(family, scatter, vec![0.0; p])
    }

    pub fn p(&self) -> usize {
        self.scatter.p()
    }
}

/// Prepared sampler: the scatter root is computed once.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    spec: &'a DistributionSpec,
    root: ScatterRoot,
}

impl<'a> Sampler<'a> {
    pub fn new(spec: &'a DistributionSpec) -> Result<Self> {
        spec.family.validate()?;
        Ok(Self {
            spec,
            root: spec.scatter.root()?,
        })
    }

    pub fn sample(&self, n: usize, stream: &RngStream) -> Result<SampleMatrix> {
        let p = self.spec.p();
        let mut rng = stream.rng();
        let mut data = vec![0.0; n * p];
        let mut z = vec![0.0; p];
        for row in data.chunks_exact_mut(p) {
            self.spec.family.draw_standard(&mut rng, &mut z);
            self.root.apply(&z, row);
            for (x, t) in row.iter_mut().zip(&self.spec.theta) {
                *x += t;
            }
        }
        SampleMatrix::new(data, n, p)
    }
}

/// Draws `n` observations from `spec` on the given stream.
pub fn sample(spec: &DistributionSpec, n: usize, stream: &RngStream) -> Result<SampleMatrix> {
    Sampler::new(spec)?.sample(n, stream)
}

/// Which coordinates of the location shift are nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Allocation {
    /// Last `ceil(p/2)` coordinates.
    Dense,
    /// Last `ceil(p/20)` coordinates.
    Sparse,
}

impl Allocation {
    pub fn nonzero_count(&self, p: usize) -> usize {
        match self {
            Self::Dense => p.div_ceil(2),
            Self::Sparse => p.div_ceil(20),
        }
    }
}

/// Denominator used to express the size of a location shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalNorm {
    /// `theta'theta / sqrt(tr Sigma)`
    Trace,
    /// `theta'theta / sqrt(tr Sigma^2)`
    TraceSq,
}

impl SignalNorm {
    pub fn denominator(&self, scatter: &ScatterSpec) -> f64 {
        match self {
            Self::Trace => scatter.trace().sqrt(),
            Self::TraceSq => scatter.trace_sq().sqrt(),
        }
    }
}

/// Location shift with equal positive nonzero entries such that
/// `theta'theta / denominator = target`.
pub fn build_theta(p: usize, allocation: Allocation, target: f64, denominator: f64) -> Result<Vec<f64>> {
    if !(target >= 0.0) || !target.is_finite() {
        return Err(HdSignError::InvalidParameter(format!(
            "signal target must be non-negative, got {target}"
        )));
    }
    if !(denominator > 0.0) || !denominator.is_finite() {
        return Err(HdSignError::InvalidParameter(format!(
            "signal denominator must be positive, got {denominator}"
        )));
    }
    let m = allocation.nonzero_count(p);
    let mut theta = vec![0.0; p];
    if target > 0.0 {
        let value = (target * denominator / m as f64).sqrt();
        theta[p - m..].iter_mut().for_each(|t| *t = value);
    }
    Ok(theta)
}

/// Monte Carlo mean of a moment next to its closed-form value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub sample_mean: f64,
    pub expected: f64,
    pub std_error: f64,
}

impl MomentCheck {
    pub fn z_score(&self) -> f64 {
        let diff = self.sample_mean - self.expected;
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff.abs() <= 1e-12 * self.expected.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, standard_errors: f64) -> bool {
        self.z_score().abs() <= standard_errors
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereMomentReport {
    pub p: usize,
    pub samples: usize,
    /// `E(u'Mu)^2 = {tr^2(M) + 2 tr(M^2)} / (p^2 + 2p)`
    pub second: MomentCheck,
    /// The displayed fourth-moment identity
    /// `{3 tr^2(M^2) + 6 tr(M^4)} / {p(p+2)(p+4)(p+6)}`.
    pub fourth: MomentCheck,
    /// The same sample mean against the exact fourth moment (see
    /// [`sphere_fourth_moment_exact`]).
    pub fourth_exact: MomentCheck,
    pub trace: f64,
}

impl SphereMomentReport {
    /// Both displayed identities hold within `standard_errors`.
    pub fn passes(&self, standard_errors: f64) -> bool {
        self.second.within(standard_errors) && self.fourth.within(standard_errors)
    }

    /// The second moment and the exact fourth moment hold.
    pub fn passes_exact(&self, standard_errors: f64) -> bool {
        self.second.within(standard_errors) && self.fourth_exact.within(standard_errors)
    }
}

/// `E(u'Mu)^2` for `u` uniform on the unit sphere.
pub fn sphere_second_moment(m: &[f64], p: usize) -> f64 {
    let tr = (0..p).map(|i| m[i * p + i]).sum::<f64>();
    let tr2: f64 = m.iter().map(|v| v * v).sum();
    (tr * tr + 2.0 * tr2) / (p as f64 * p as f64 + 2.0 * p as f64)
}

/// `{3 tr^2(M^2) + 6 tr(M^4)} / {p(p+2)(p+4)(p+6)}`, the fourth-moment
/// identity as usually quoted. Its numerator is `E(z1'Mz2)^4` for independent
/// Gaussian `z1, z2`, so it understates `E(u'Mu)^4` for every nonzero `M`.
pub fn sphere_fourth_moment(m: &[f64], p: usize) -> f64 {
    let m2 = matmul(m, m, p);
    let tr2: f64 = (0..p).map(|i| m2[i * p + i]).sum();
    // tr(M^4) = ||M^2||_F^2 for symmetric M
    let tr4: f64 = m2.iter().map(|v| v * v).sum();
    let pf = p as f64;
    (3.0 * tr2 * tr2 + 6.0 * tr4) / (pf * (pf + 2.0) * (pf + 4.0) * (pf + 6.0))
}

/// Exact `E(u'Mu)^4`, from the cumulants `2^(k-1) (k-1)! tr(M^k)` of `z'Mz`
/// divided by `E||z||^8 = p(p+2)(p+4)(p+6)`.
pub fn sphere_fourth_moment_exact(m: &[f64], p: usize) -> f64 {
    let m2 = matmul(m, m, p);
    let t1: f64 = (0..p).map(|i| m[i * p + i]).sum();
    let t2: f64 = (0..p).map(|i| m2[i * p + i]).sum();
    // tr(M^3) = <M, M^2>_F and tr(M^4) = ||M^2||_F^2 for symmetric M
    let t3: f64 = m.iter().zip(&m2).map(|(a, b)| a * b).sum();
    let t4: f64 = m2.iter().map(|v| v * v).sum();
    let pf = p as f64;
    let num = t1.powi(4) + 12.0 * t1 * t1 * t2 + 32.0 * t1 * t3 + 12.0 * t2 * t2 + 48.0 * t4;
    num / (pf * (pf + 2.0) * (pf + 4.0) * (pf + 6.0))
}

fn matmul(a: &[f64], b: &[f64], p: usize) -> Vec<f64> {
    let mut c = vec![0.0; p * p];
    for i in 0..p {
        for k in 0..p {
            let aik = a[i * p + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..p {
                c[i * p + j] += aik * b[k * p + j];
            }
        }
    }
    c
}

fn validate_moment_matrix(m: &[f64], p: usize) -> Result<()> {
    if p == 0 {
        return Err(HdSignError::EmptyDimension);
    }
    if m.len() != p * p {
        return Err(HdSignError::ShapeMismatch { n: p, p, len: m.len() });
    }
    // symmetry is checked the same way as for scatter matrices
    ScatterSpec::dense(m.to_vec(), p).map(|_| ())
}

/// Running sums of `(u'Mu)^2` and `(u'Mu)^4`.
struct SphereAccumulator<'a> {
    m: &'a [f64],
    mu: Vec<f64>,
    count: usize,
    sums: [f64; 4],
}

impl<'a> SphereAccumulator<'a> {
    fn new(m: &'a [f64], p: usize) -> Self {
        Self {
            m,
            mu: vec![0.0; p],
            count: 0,
            sums: [0.0; 4],
        }
    }

    fn push(&mut self, u: &[f64]) {
        let p = u.len();
        for (i, out) in self.mu.iter_mut().enumerate() {
            *out = dot(&self.m[i * p..(i + 1) * p], u);
        }
        let q = dot(u, &self.mu);
        let (q2, q4) = (q * q, q * q * q * q);
        self.sums[0] += q2;
        self.sums[1] += q2 * q2;
        self.sums[2] += q4;
        self.sums[3] += q4 * q4;
        self.count += 1;
    }

    fn report(self, p: usize) -> Result<SphereMomentReport> {
        if self.count < 2 {
            return Err(HdSignError::InvalidParameter("need at least two sphere samples".into()));
        }
        let nf = self.count as f64;
        let check = |s: f64, ss: f64, expected: f64| {
            let mean = s / nf;
            let var = ((ss - nf * mean * mean) / (nf - 1.0)).max(0.0);
            MomentCheck {
                sample_mean: mean,
                expected,
                std_error: (var / nf).sqrt(),
            }
        };
        let [s2, ss2, s4, ss4] = self.sums;
        Ok(SphereMomentReport {
            p,
            samples: self.count,
            second: check(s2, ss2, sphere_second_moment(self.m, p)),
            fourth: check(s4, ss4, sphere_fourth_moment(self.m, p)),
            fourth_exact: check(s4, ss4, sphere_fourth_moment_exact(self.m, p)),
            trace: (0..p).map(|i| self.m[i * p + i]).sum(),
        })
    }
}

/// Draws `samples` uniform unit vectors `u = z/||z||` and compares the sample
/// means of `(u'Mu)^2` and `(u'Mu)^4` with their closed forms.
pub fn sphere_moment_check(m: &[f64], p: usize, samples: usize, stream: &RngStream) -> Result<SphereMomentReport> {
    validate_moment_matrix(m, p)?;
    let mut rng = stream.rng();
    let mut u = vec![0.0; p];
    let mut acc = SphereAccumulator::new(m, p);
    for _ in 0..samples {
        fill_normal(&mut rng, &mut u);
        let r = dot(&u, &u).sqrt();
        u.iter_mut().for_each(|v| *v /= r);
        acc.push(&u);
    }
    acc.report(p)
}

/// The same comparison for the directions of the rows of `x`; rows at the
/// origin are skipped.
pub fn sphere_moment_check_rows(m: &[f64], x: &SampleMatrix) -> Result<SphereMomentReport> {
    let p = x.p();
    validate_moment_matrix(m, p)?;
    let mut acc = SphereAccumulator::new(m, p);
    let mut u = vec![0.0; p];
    for row in x.rows() {
        let r = dot(row, row).sqrt();
        if r > 0.0 {
            u.iter_mut().zip(row).for_each(|(o, v)| *o = v / r);
            acc.push(&u);
        }
    }
    acc.report(p)
}
