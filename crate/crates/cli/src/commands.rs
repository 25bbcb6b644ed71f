use std::io::Write;

use hdsign::distributions::{sphere_moment_check, RngStream, ScatterSpec, SignalNorm};
use hdsign::scaleinv::ScalarInvariant;
use hdsign::simulation::{run_scenario, table2_specs, Scenario, ScenarioSpec, Table2Preset};
use hdsign::{run_test, SampleMatrix, WeightFunction};

use crate::args::{Cli, Command, SignalNormArg, SimulateArgs, Table2Args, TestArgs, TestKind, ValidateArgs};
use crate::csvio::read_matrix;
use crate::error::{CliError, Result};
use crate::report;

/// Standard errors allowed by `validate`.
pub const VALIDATE_STANDARD_ERRORS: f64 = 4.0;

/// How a successful command finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The test rejected, or a validation check failed.
    Flagged,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Ok => 0,
            Self::Flagged => 2,
        }
    }
}

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<Status> {
    match &cli.command {
        Command::Test(args) => cmd_test(args, out),
        Command::Are(args) => {
            report::are_table()?.write(out, args.format)?;
            Ok(Status::Ok)
        }
        Command::Simulate(args) => cmd_simulate(args, out),
        Command::Table2(args) => cmd_table2(args, out),
        Command::Validate(args) => cmd_validate(args, out),
    }
}

fn weight_for(args: &TestArgs) -> Result<WeightFunction> {
    match (args.kind, &args.weight) {
        (TestKind::Custom, Some(expr)) => Ok(WeightFunction::parse(expr)?),
        (TestKind::Custom, None) => Err(CliError::Usage("--kind custom requires --weight".into())),
        (_, Some(_)) => Err(CliError::Usage("--weight is only used with --kind custom".into())),
        (TestKind::Ss, None) => Ok(WeightFunction::Ss),
        (TestKind::Cq, None) => Ok(WeightFunction::Cq),
        (TestKind::Os | TestKind::ScalarInvariantOs, None) => Ok(WeightFunction::Os),
    }
}

fn shift(x: SampleMatrix, theta0: &Option<Vec<f64>>) -> Result<SampleMatrix> {
    match theta0.as_deref() {
        None => Ok(x),
        Some([v]) => Ok(x.centered_at(&vec![*v; x.p()])?),
        Some(t) if t.len() == x.p() => Ok(x.centered_at(t)?),
        Some(t) => Err(CliError::Usage(format!(
            "--theta0 has {} values but the data have {} columns",
            t.len(),
            x.p()
        ))),
    }
}

fn cmd_test<W: Write>(args: &TestArgs, out: &mut W) -> Result<Status> {
    let k = weight_for(args)?;
    let x = shift(read_matrix(&args.input, args.header)?, &args.theta0)?;
    let (n, p) = (x.n(), x.p());
    let (table, reject) = if args.kind == TestKind::ScalarInvariantOs {
        let result = ScalarInvariant::new(&x)?.run_test(&k, args.alpha)?;
        if result.floored_coordinates > 0 {
            eprintln!(
                "warning: {} leave-two-out coordinate scales were floored (constant coordinates)",
                result.floored_coordinates
            );
        }
        let table = report::outcome_table("SI-OS", n, p, &result.outcome, Some(result.floored_coordinates));
        (table, result.outcome.reject)
    } else {
        let outcome = run_test(&x, &k, args.alpha)?;
        (report::outcome_table(k.name(), n, p, &outcome, None), outcome.reject)
    };
    table.write(out, args.output.format)?;
    Ok(if reject { Status::Flagged } else { Status::Ok })
}

fn signal_norm(arg: SignalNormArg) -> SignalNorm {
    match arg {
        SignalNormArg::Trace => SignalNorm::Trace,
        SignalNormArg::TraceSq => SignalNorm::TraceSq,
    }
}

pub fn simulate_spec(args: &SimulateArgs) -> Result<ScenarioSpec> {
    let scenario: Scenario = args.scenario;
    let spec = ScenarioSpec::new(
        scenario.to_string(),
        scenario.family(),
        Scenario::scatter(args.p)?,
        args.n,
        args.pattern,
        args.target.unwrap_or(scenario.default_target()),
        args.reps,
        args.alpha,
        args.seed,
        args.tests.clone(),
    )?;
    Ok(spec.with_signal_norm(signal_norm(args.signal_norm)))
}

fn cmd_simulate<W: Write>(args: &SimulateArgs, out: &mut W) -> Result<Status> {
    let report = run_scenario(&simulate_spec(args)?)?;
    eprintln!("{} replications in {:.1?}", report.spec.replications, report.elapsed);
    report::simulation_table(std::slice::from_ref(&report)).write(out, args.output.format)?;
    Ok(Status::Ok)
}

fn cmd_table2<W: Write>(args: &Table2Args, out: &mut W) -> Result<Status> {
    let preset = if args.quick {
        Table2Preset::Quick
    } else {
        Table2Preset::Full
    };
    let mut specs = table2_specs(preset, args.seed)?;
    if let Some(reps) = args.reps {
        if reps == 0 {
            return Err(CliError::Usage("--reps must be at least 1".into()));
        }
        specs = specs.into_iter().map(|s| s.with_replications(reps)).collect();
    }
    let total = specs.len();
    let mut reports = Vec::with_capacity(total);
    for (i, spec) in specs.iter().enumerate() {
        let r = run_scenario(spec)?;
        eprintln!(
            "[{}/{total}] ({}) {} p={}: {:.1?}",
            i + 1,
            spec.label,
            spec.pattern,
            spec.p(),
            r.elapsed
        );
        reports.push(r);
    }
    let table = match args.output.format {
        crate::table::Format::Table => report::table2_wide(&reports),
        _ => report::simulation_table(&reports),
    };
    table.write(out, args.output.format)?;
    Ok(Status::Ok)
}

fn cmd_validate<W: Write>(args: &ValidateArgs, out: &mut W) -> Result<Status> {
    let mut m = ScatterSpec::ar1(args.p, args.rho)?.matrix();
    if args.trace_free {
        (0..args.p).for_each(|i| m[i * args.p + i] -= 1.0);
    }
    let rep = sphere_moment_check(&m, args.p, args.samples, &RngStream::new(args.seed, 0))?;
    report::validate_table(&rep, VALIDATE_STANDARD_ERRORS).write(out, args.output.format)?;
    Ok(if rep.passes(VALIDATE_STANDARD_ERRORS) {
        Status::Ok
    } else {
        Status::Flagged
    })
}
