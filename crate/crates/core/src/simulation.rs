//! Monte Carlo size and power of the sign tests.
//!
//! Replication `r` of a scenario draws its sample from stream `r` of the
//! scenario seed, so results do not depend on how replications are spread
//! over threads.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::distributions::{
    build_theta, Allocation, DistributionSpec, Family, RngStream, Sampler, ScatterSpec, SignalNorm,
};
use crate::error::{HdSignError, Result};
use crate::scaleinv::ScalarInvariant;
use crate::signcore::{check_alpha, run_tests, TestOutcome};
use crate::weight::WeightFunction;
use crate::SampleMatrix;

/// The seven data-generating models of the power study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::I,
        Scenario::II,
        Scenario::III,
        Scenario::IV,
        Scenario::V,
        Scenario::VI,
        Scenario::VII,
    ];

    pub fn family(&self) -> Family {
        match self {
            Self::I => Family::Normal,
            Self::II => Family::StudentT { df: 3.0 },
            Self::III => Family::StudentT { df: 4.0 },
            Self::IV => Family::MixtureNormal {
                kappa: 0.2,
                sigma: 10.0,
            },
            Self::V => Family::MixtureNormal {
                kappa: 0.8,
                sigma: 10.0,
            },
            Self::VI => Family::IcStudentT { df: 3.0 },
            Self::VII => Family::IcNormalMixture {
                kappa: 0.2,
                sigma: 10.0,
            },
        }
    }

    /// Signal size under the alternatives, in units of `sqrt(tr Sigma^2)`.
    pub fn default_target(&self) -> f64 {
        match self {
            Self::V | Self::VII => 1.0,
            _ => 0.1,
        }
    }

    pub fn scatter(p: usize) -> Result<ScatterSpec> {
        ScatterSpec::ar1(p, 0.5)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::I => "I",
            Self::II => "II",
            Self::III => "III",
            Self::IV => "IV",
            Self::V => "V",
            Self::VI => "VI",
            Self::VII => "VII",
        };
        f.write_str(s)
    }
}

impl FromStr for Scenario {
    type Err = HdSignError;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().trim_matches(|c| c == '(' || c == ')').to_ascii_uppercase();
        Self::ALL
            .into_iter()
            .enumerate()
            .find(|(k, sc)| sc.to_string() == upper || (k + 1).to_string() == upper)
            .map(|(_, sc)| sc)
            .ok_or_else(|| HdSignError::InvalidParameter(format!("unknown scenario {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Null,
    Dense,
    Sparse,
}

impl Pattern {
    pub fn allocation(&self) -> Option<Allocation> {
        match self {
            Self::Null => None,
            Self::Dense => Some(Allocation::Dense),
            Self::Sparse => Some(Allocation::Sparse),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Null => "Size",
            Self::Dense => "Dense",
            Self::Sparse => "Sparse",
        })
    }
}

impl FromStr for Pattern {
    type Err = HdSignError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "null" | "size" => Ok(Self::Null),
            "dense" => Ok(Self::Dense),
            "sparse" => Ok(Self::Sparse),
            _ => Err(HdSignError::InvalidParameter(format!("unknown pattern {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestId {
    Cq,
    Ss,
    Os,
    /// Scale-invariant statistic with the `1/r` weight.
    ScalarInvariantOs,
}

impl TestId {
    pub const STANDARD: [TestId; 3] = [TestId::Cq, TestId::Ss, TestId::Os];

    pub fn weight(&self) -> WeightFunction {
        match self {
            Self::Cq => WeightFunction::Cq,
            Self::Ss => WeightFunction::Ss,
            Self::Os | Self::ScalarInvariantOs => WeightFunction::Os,
        }
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cq => "CQ",
            Self::Ss => "SS",
            Self::Os => "OS",
            Self::ScalarInvariantOs => "SI-OS",
        })
    }
}

impl FromStr for TestId {
    type Err = HdSignError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cq" => Ok(Self::Cq),
            "ss" => Ok(Self::Ss),
            "os" => Ok(Self::Os),
            "si-os" | "scalar-invariant-os" => Ok(Self::ScalarInvariantOs),
            _ => Err(HdSignError::InvalidParameter(format!("unknown test {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub label: String,
    pub family: Family,
    pub scatter: ScatterSpec,
    pub n: usize,
    pub pattern: Pattern,
    /// Size of the shift relative to `signal_norm`; always 0 under the null.
    pub target: f64,
    pub signal_norm: SignalNorm,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub tests: Vec<TestId>,
}

impl ScenarioSpec {
    /// One cell of the power study: AR(1) scatter with `rho = 0.5`, the
    /// scenario's default signal measured as `theta'theta / sqrt(tr Sigma^2)`,
    /// CQ/SS/OS at the 5% level.
    pub fn standard(
        scenario: Scenario,
        n: usize,
        p: usize,
        pattern: Pattern,
        replications: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::new(
            scenario.to_string(),
            scenario.family(),
            Scenario::scatter(p)?,
            n,
            pattern,
            scenario.default_target(),
            replications,
            0.05,
            seed,
            TestId::STANDARD.to_vec(),
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: String,
        family: Family,
        scatter: ScatterSpec,
        n: usize,
        pattern: Pattern,
        target: f64,
        replications: usize,
        alpha: f64,
        seed: u64,
        tests: Vec<TestId>,
    ) -> Result<Self> {
        family.validate()?;
        check_alpha(alpha)?;
        if replications == 0 {
            return Err(HdSignError::InvalidParameter("replications must be at least 1".into()));
        }
        let min_n = if tests.contains(&TestId::ScalarInvariantOs) {
            4
        } else {
            3
        };
        if n < min_n {
            return Err(HdSignError::TooFewObservations {
                required: min_n,
                actual: n,
            });
        }
        if tests.is_empty() {
            return Err(HdSignError::InvalidParameter("no tests requested".into()));
        }
        let target = if pattern == Pattern::Null { 0.0 } else { target };
        Ok(Self {
            label,
            family,
            scatter,
            n,
            pattern,
            target,
            signal_norm: SignalNorm::TraceSq,
            replications,
            alpha,
            seed,
            tests,
        })
    }

    pub fn p(&self) -> usize {
        self.scatter.p()
    }

    pub fn with_tests(mut self, tests: Vec<TestId>) -> Self {
        self.tests = tests;
        self
    }

    pub fn with_signal_norm(mut self, signal_norm: SignalNorm) -> Self {
        self.signal_norm = signal_norm;
        self
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    pub fn theta(&self) -> Result<Vec<f64>> {
        match self.pattern.allocation() {
            None => Ok(vec![0.0; self.p()]),
            Some(a) => build_theta(self.p(), a, self.target, self.signal_norm.denominator(&self.scatter)),
        }
    }

    pub fn distribution(&self) -> Result<DistributionSpec> {
        DistributionSpec::new(self.family, self.scatter.clone(), self.theta()?)
    }
}

/// Rejection tally of one test within a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub test: TestId,
    pub rejections: usize,
    /// Replications with a usable variance estimate.
    pub valid: usize,
    pub degenerate: usize,
}

impl TestResult {
    pub fn rejection_rate(&self) -> f64 {
        if self.valid == 0 {
            return f64::NAN;
        }
        self.rejections as f64 / self.valid as f64
    }

    /// `sqrt(r(1-r)/R)`
    pub fn mc_standard_error(&self) -> f64 {
        let r = self.rejection_rate();
        (r * (1.0 - r) / self.valid as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub spec: ScenarioSpec,
    pub results: Vec<TestResult>,
    pub elapsed: Duration,
}

impl SimulationReport {
    pub fn result(&self, test: TestId) -> Option<&TestResult> {
        self.results.iter().find(|r| r.test == test)
    }

    pub fn rate(&self, test: TestId) -> Option<f64> {
        self.result(test).map(TestResult::rejection_rate)
    }
}

/// Draws and tests every replication, returning per-test outcomes in
/// replication order.
pub struct Replicator<'a> {
    spec: &'a ScenarioSpec,
    distribution: DistributionSpec,
}

impl<'a> Replicator<'a> {
    pub fn new(spec: &'a ScenarioSpec) -> Result<Self> {
        Ok(Self {
            spec,
            distribution: spec.distribution()?,
        })
    }

    pub fn sample(&self, replication: usize) -> Result<SampleMatrix> {
        Sampler::new(&self.distribution)?.sample(self.spec.n, &RngStream::new(self.spec.seed, replication as u64))
    }

    fn evaluate(&self, x: &SampleMatrix) -> Result<Vec<Result<TestOutcome>>> {
        let spec = self.spec;
        let plain: Vec<WeightFunction> = spec
            .tests
            .iter()
            .filter(|t| **t != TestId::ScalarInvariantOs)
            .map(TestId::weight)
            .collect();
        let mut plain_out = if plain.is_empty() {
            Vec::new()
        } else {
            run_tests(x, &plain, spec.alpha)?
        }
        .into_iter();
        spec.tests
            .iter()
            .map(|t| match t {
                TestId::ScalarInvariantOs => Ok(ScalarInvariant::new(x)
                    .and_then(|si| si.run_test(&t.weight(), spec.alpha))
                    .map(|o| o.outcome)),
                _ => Ok(plain_out.next().expect("one outcome per plain test")),
            })
            .collect()
    }

    /// All replications; outer index is the replication, inner the test.
    pub fn outcomes(&self) -> Result<Vec<Vec<Result<TestOutcome>>>> {
        let sampler = Sampler::new(&self.distribution)?;
        (0..self.spec.replications)
            .into_par_iter()
            .map(|r| {
                let x = sampler.sample(self.spec.n, &RngStream::new(self.spec.seed, r as u64))?;
                self.evaluate(&x)
            })
            .collect()
    }
}

/// Runs every replication of a scenario and tallies rejections.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<SimulationReport> {
    let start = Instant::now();
    let outcomes = Replicator::new(spec)?.outcomes()?;
    let mut results: Vec<TestResult> = spec
        .tests
        .iter()
        .map(|&test| TestResult {
            test,
            rejections: 0,
            valid: 0,
            degenerate: 0,
        })
        .collect();
    for rep in outcomes {
        for (tally, outcome) in results.iter_mut().zip(rep) {
            match outcome {
                Ok(o) => {
                    tally.valid += 1;
                    tally.rejections += usize::from(o.reject);
                }
                Err(HdSignError::DegenerateVariance) => tally.degenerate += 1,
                Err(e) => return Err(e),
            }
        }
    }
    for r in &results {
        // more than 0.1% excluded replications invalidates the cell
        if r.degenerate * 1000 > spec.replications {
            return Err(HdSignError::TooManyDegenerate {
                degenerate: r.degenerate,
                replications: spec.replications,
            });
        }
    }
    Ok(SimulationReport {
        spec: spec.clone(),
        results,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table2Preset {
    /// 2,500 replications at p = 200, 400, 800.
    Full,
    /// 500 replications at p = 200.
    Quick,
}

impl Table2Preset {
    pub fn dimensions(&self) -> &'static [usize] {
        match self {
            Self::Full => &[200, 400, 800],
            Self::Quick => &[200],
        }
    }

    pub fn replications(&self) -> usize {
        match self {
            Self::Full => 2500,
            Self::Quick => 500,
        }
    }
}

pub const TABLE2_N: usize = 40;

/// Every cell of the size/power table, ordered by dimension, scenario, then
/// Size/Dense/Sparse.
pub fn table2_specs(preset: Table2Preset, seed: u64) -> Result<Vec<ScenarioSpec>> {
    let mut specs = Vec::new();
    for &p in preset.dimensions() {
        for scenario in Scenario::ALL {
            for pattern in [Pattern::Null, Pattern::Dense, Pattern::Sparse] {
                specs.push(ScenarioSpec::standard(
                    scenario,
                    TABLE2_N,
                    p,
                    pattern,
                    preset.replications(),
                    seed,
                )?);
            }
        }
    }
    Ok(specs)
}

pub fn table2(preset: Table2Preset, seed: u64) -> Result<Vec<SimulationReport>> {
    table2_specs(preset, seed)?.iter().map(run_scenario).collect()
}
