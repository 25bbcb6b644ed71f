//! Tables for each subcommand's results.

use hdsign::distributions::{MomentCheck, SphereMomentReport};
use hdsign::power::{are_closed_form, table1_columns, AreReport};
use hdsign::simulation::{SimulationReport, TestId};
use hdsign::{Result, TestOutcome};

use crate::table::{Cell, Table};

type Getter = fn(&AreReport) -> f64;

/// The 3 x 8 efficiency grid.
pub fn are_table() -> Result<Table> {
    let columns = table1_columns();
    let mut table = Table::new(std::iter::once("ARE".to_string()).chain(columns.iter().map(|(l, _)| l.clone())));
    let reports = columns
        .iter()
        .map(|(_, f)| are_closed_form(f))
        .collect::<Result<Vec<_>>>()?;
    let rows: [(&str, Getter); 3] = [
        ("ARE(OS,CQ)", |r| r.os_cq),
        ("ARE(OS,SS)", |r| r.os_ss),
        ("ARE(SS,CQ)", |r| r.ss_cq),
    ];
    for (label, get) in rows {
        let mut row = vec![Cell::from(label)];
        row.extend(reports.iter().map(|r| Cell::Fixed(get(r), 2)));
        table.push(row);
    }
    Ok(table)
}

pub fn outcome_table(weight: &str, n: usize, p: usize, outcome: &TestOutcome, floored: Option<usize>) -> Table {
    let mut headers = vec![
        "weight",
        "n",
        "p",
        "statistic",
        "sigma_hat",
        "z",
        "p_value",
        "alpha",
        "reject",
    ];
    if floored.is_some() {
        headers.push("floored");
    }
    let mut table = Table::new(headers);
    let mut row = vec![
        Cell::from(weight),
        Cell::from(n),
        Cell::from(p),
        Cell::Sci(outcome.statistic, 4),
        Cell::Sci(outcome.sigma_hat, 4),
        Cell::Fixed(outcome.z, 4),
        Cell::Fixed(outcome.p_value, 4),
        Cell::Fixed(outcome.alpha, 3),
        Cell::from(outcome.reject),
    ];
    if let Some(f) = floored {
        row.push(Cell::from(f));
    }
    table.push(row);
    table
}

/// One row per (cell, test): counts, rate and Monte Carlo error in percent.
pub fn simulation_table(reports: &[SimulationReport]) -> Table {
    let mut table = Table::new([
        "scenario",
        "pattern",
        "n",
        "p",
        "test",
        "rejections",
        "valid",
        "degenerate",
        "rate_pct",
        "se_pct",
    ]);
    for report in reports {
        let spec = &report.spec;
        for r in &report.results {
            table.push(vec![
                Cell::from(spec.label.clone()),
                Cell::from(spec.pattern.to_string()),
                Cell::from(spec.n),
                Cell::from(spec.p()),
                Cell::from(r.test.to_string()),
                Cell::from(r.rejections),
                Cell::from(r.valid),
                Cell::from(r.degenerate),
                Cell::Fixed(100.0 * r.rejection_rate(), 1),
                Cell::Fixed(100.0 * r.mc_standard_error(), 2),
            ]);
        }
    }
    table
}

/// Scenario/pattern rows with one CQ/SS/OS block per dimension, rates in
/// percent.
pub fn table2_wide(reports: &[SimulationReport]) -> Table {
    let mut dims: Vec<usize> = reports.iter().map(|r| r.spec.p()).collect();
    dims.dedup();
    let mut headers = vec!["Scenario".to_string(), "Pattern".to_string()];
    for p in &dims {
        headers.extend(TestId::STANDARD.iter().map(|t| format!("{t} p={p}")));
    }
    let mut table = Table::new(headers);
    let per_dim = reports.len() / dims.len().max(1);
    for k in 0..per_dim {
        let first = &reports[k].spec;
        let mut row = vec![
            Cell::from(format!("({})", first.label)),
            Cell::from(first.pattern.to_string()),
        ];
        for d in 0..dims.len() {
            let report = &reports[d * per_dim + k];
            for t in TestId::STANDARD {
                row.push(Cell::Fixed(100.0 * report.rate(t).unwrap_or(f64::NAN), 1));
            }
        }
        table.push(row);
    }
    table
}

pub fn validate_table(report: &SphereMomentReport, standard_errors: f64) -> Table {
    let mut table = Table::new([
        "moment",
        "p",
        "samples",
        "sample_mean",
        "expected",
        "std_error",
        "z",
        "status",
    ]);
    let checks: [(&str, &MomentCheck); 3] = [
        ("second", &report.second),
        ("fourth", &report.fourth),
        ("fourth-exact", &report.fourth_exact),
    ];
    for (name, check) in checks {
        table.push(vec![
            Cell::from(name),
            Cell::from(report.p),
            Cell::from(report.samples),
            Cell::Sci(check.sample_mean, 5),
            Cell::Sci(check.expected, 5),
            Cell::Sci(check.std_error, 3),
            Cell::Fixed(check.z_score(), 2),
            Cell::from(if check.within(standard_errors) { "pass" } else { "FAIL" }),
        ]);
    }
    table
}
