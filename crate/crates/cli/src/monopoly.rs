//! Table form of the stochastic-demand monopolist.

use evcharge_core::monopolist::{best_case_at, SolveMethod};
use evcharge_core::{solve_monopolist, Error, MonopolistSolution};

use crate::config::MonopolistScenario;
use crate::table::{Cell, Table};

/// Spacing of the optional profit profile.
pub const PROFILE_STEP: f64 = 1e-3;

const COLUMNS: &[&str] = &[
    "kind",
    "target",
    "case",
    "n_ev",
    "price",
    "ice_price",
    "expected_profit",
    "method",
    "demand_floor",
    "conversion_margin",
    "oracle_n_ev",
    "oracle_profit",
    "oracle_gap",
    "status",
];

fn method_name(method: SolveMethod) -> &'static str {
    match method {
        SolveMethod::ClosedForm => "closed-form",
        SolveMethod::GridSearch => "grid-search",
    }
}

/// Solution plus its table.
#[derive(Debug, Clone, PartialEq)]
pub struct MonopolistOutput {
    pub solution: MonopolistSolution,
    pub table: Table,
}

fn blank_row(kind: &str) -> Vec<Cell> {
    let mut row = vec![Cell::Missing; COLUMNS.len()];
    row[0] = kind.into();
    row[COLUMNS.len() - 1] = "converged".into();
    row
}

/// Rows: one per Case 1 target, the solution, then the profile when asked.
pub fn run_monopolist_suite(
    scenario: &MonopolistScenario,
    profile: bool,
) -> Result<MonopolistOutput, Error> {
    let params = &scenario.params;
    let dist = &scenario.distribution;
    let solution = solve_monopolist(params, dist)?;
    let ice_price = solution.ice_price;
    let mut table = Table::new(COLUMNS.to_vec());

    for candidate in &solution.candidates {
        let mut row = blank_row("target");
        row[1] = candidate.target.into();
        row[2] = format!("case1(t={})", candidate.target).into();
        row[3] = candidate.n_ev.into();
        row[4] = candidate.price.into();
        row[5] = ice_price.into();
        row[6] = candidate.profit.into();
        if candidate.price.is_none() {
            row[13] = "infeasible".into();
        }
        table.push(row);
    }

    let mut row = blank_row("solution");
    row[1] = solution.case.target().map_or(Cell::Missing, Cell::from);
    row[2] = solution.case.to_string().into();
    row[3] = solution.n_ev.into();
    row[4] = solution.price.into();
    row[5] = ice_price.into();
    row[6] = solution.expected_profit.into();
    row[7] = method_name(solution.method).into();
    row[8] = solution.assumptions.demand_floor.into();
    row[9] = solution.assumptions.conversion_margin.into();
    row[10] = solution.oracle.n_ev.into();
    row[11] = solution.oracle.choice.profit.into();
    row[12] = solution.oracle_gap.into();
    table.push(row);

    if profile {
        let steps = (1.0 / PROFILE_STEP).round() as usize;
        for k in 0..=steps {
            let n_ev = k as f64 / steps as f64;
            let mut row = blank_row("profile");
            row[3] = n_ev.into();
            row[5] = ice_price.into();
            match best_case_at(params, dist, n_ev) {
                Some(choice) => {
                    row[1] = choice.case.target().map_or(Cell::Missing, Cell::from);
                    row[2] = choice.case.to_string().into();
                    row[4] = choice.price.into();
                    row[6] = choice.profit.into();
                }
                None => row[13] = "infeasible".into(),
            }
            table.push(row);
        }
    }
    Ok(MonopolistOutput { solution, table })
}
