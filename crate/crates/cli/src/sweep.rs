//! Mandate and endowment sweeps of the competitive model.

use evcharge_core::pricing::{optimal_single_price_equilibrium_from, FixedPointSettings};
use evcharge_core::{
    capacity_deviation_gain, check_no_profitable_undercut, naive_mandate_capacities,
    optimal_capacity_equilibrium_from, price_deviation_gain, solve_second_stage, total_welfare,
    wardrop_residual, CapacityOptions, CapacityProfile, CapacityRegime, CapacityWarning,
    DriverClass, Error, Firm, MarketParams, PolicyConfig, PricingOutcome, PricingRegime,
    WardropOutcome, WelfareReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{CompetitiveScenario, SweepVariable};
use crate::table::{Cell, Table};

/// Extra random starts per point for the uniqueness diagnostic.
pub const RESTARTS: usize = 3;
/// Half-width of the unilateral price perturbation scan.
pub const PRICE_PROBE_RADIUS: f64 = 1e-3;
pub const PRICE_PROBE_POINTS: usize = 21;
pub const CAPACITY_PROBE_POINTS: usize = 101;

const OUTCOME_COLUMNS: &[&str] = &[
    "N_e1",
    "N_e2",
    "N_d1",
    "N_d2",
    "c1",
    "c2",
    "m1",
    "m2",
    "q_e1",
    "q_e2",
    "q_d1",
    "q_d2",
    "avg_price_ev",
    "avg_price_ice",
    "profit_1",
    "profit_2",
    "total_profit",
    "cs_ev",
    "cs_ice",
    "govt_cost",
    "total_welfare",
    "total_congestion",
    "hhi_ev",
    "hhi_ice",
];

const DIAGNOSTIC_COLUMNS: &[&str] = &[
    "status",
    "price_iterations",
    "capacity_rounds",
    "price_residual",
    "multistart_spread",
    "warning",
];

const ORACLE_COLUMNS: &[&str] = &[
    "wardrop_residual",
    "price_deviation_gain",
    "capacity_deviation_gain",
    "undercut_ok",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Converged,
    PriceNotConverged,
    CapacityNotConverged,
    Failed(String),
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::PriceNotConverged => "price-not-converged",
            Status::CapacityNotConverged => "capacity-not-converged",
            Status::Failed(_) => "failed",
        }
    }

    fn from_error(err: &Error) -> Self {
        match err {
            Error::PriceNotConverged { .. } => Status::PriceNotConverged,
            Error::CapacityNotConverged { .. } => Status::CapacityNotConverged,
            other => Status::Failed(other.to_string()),
        }
    }
}

/// One fully solved market.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub capacities: CapacityProfile,
    pub pricing: PricingOutcome,
    pub outcome: WardropOutcome,
    pub report: WelfareReport,
    pub capacity_rounds: Option<usize>,
    pub warnings: Vec<CapacityWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    pub wardrop_residual: f64,
    pub price_deviation_gain: Option<f64>,
    pub capacity_deviation_gain: Option<f64>,
    pub undercut_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub status: Status,
    pub solved: Option<Solved>,
    /// Largest deviation between the primary solution and the restarts.
    pub spread: Option<f64>,
    pub oracle: Option<Oracle>,
}

impl PointResult {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Everything that identifies one market to solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub params: MarketParams,
    pub policy: PolicyConfig,
    pub delta: f64,
    pub pricing: PricingRegime,
    pub capacity: CapacityRegime,
}

fn capacity_options() -> CapacityOptions {
    CapacityOptions {
        allow_unsupported: true,
        ..CapacityOptions::default()
    }
}

fn floor(policy: &PolicyConfig, delta: f64) -> [f64; 2] {
    [policy.mandate * delta, policy.mandate * (1.0 - delta)]
}

fn first_stage(
    point: &Point,
    start: [f64; 2],
) -> Result<(CapacityProfile, Option<usize>, Vec<CapacityWarning>), Error> {
    match point.capacity {
        CapacityRegime::NaiveMandate => Ok((
            naive_mandate_capacities(point.policy.mandate, point.delta)?,
            None,
            Vec::new(),
        )),
        CapacityRegime::OptimalCapacity => {
            let eq = optimal_capacity_equilibrium_from(
                &point.params,
                &point.policy,
                point.delta,
                point.pricing,
                start,
                &capacity_options(),
            )?;
            Ok((eq.capacities, Some(eq.rounds), eq.warnings))
        }
    }
}

fn solve_from(point: &Point, start: [f64; 2]) -> Result<Solved, Error> {
    let (capacities, capacity_rounds, warnings) = first_stage(point, start)?;
    let stage = solve_second_stage(&point.params, &capacities, point.pricing)?;
    let report = total_welfare(
        &point.params,
        &capacities,
        stage.prices(),
        &stage.outcome,
        point.policy.intrinsic_cost,
        point.policy.subsidy,
    )?;
    Ok(Solved {
        capacities,
        pricing: stage.pricing,
        outcome: stage.outcome,
        report,
        capacity_rounds,
        warnings,
    })
}

/// Solves one market. Restarts from random points measure how far other
/// starting points land from the primary solution.
pub fn solve_point(point: &Point, seed: u64, with_oracle: bool) -> PointResult {
    let primary = match solve_from(point, floor(&point.policy, point.delta)) {
        Ok(solved) => solved,
        Err(err) => {
            return PointResult {
                status: Status::from_error(&err),
                solved: None,
                spread: None,
                oracle: None,
            }
        }
    };
    let spread = restart_spread(point, &primary, seed);
    let oracle = with_oracle.then(|| certify(point, &primary));
    PointResult {
        status: Status::Converged,
        solved: Some(primary),
        spread,
        oracle,
    }
}

fn restart_spread(point: &Point, primary: &Solved, seed: u64) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spread: f64 = 0.0;
    match (point.capacity, point.pricing) {
        (CapacityRegime::OptimalCapacity, _) => {
            let (lo, hi) = (
                floor(&point.policy, point.delta),
                [point.delta, 1.0 - point.delta],
            );
            for _ in 0..RESTARTS {
                let start = [0, 1].map(|i| {
                    if hi[i] > lo[i] {
                        rng.gen_range(lo[i]..=hi[i])
                    } else {
                        lo[i]
                    }
                });
                let other = solve_from(point, start).ok()?;
                for i in 0..2 {
                    spread = spread.max((other.capacities.ev[i] - primary.capacities.ev[i]).abs());
                }
            }
        }
        (CapacityRegime::NaiveMandate, PricingRegime::OptimalSinglePrice) => {
            for _ in 0..RESTARTS {
                let start = [0, 1].map(|_| rng.gen_range(0.0..=point.params.w_ev));
                let other = optimal_single_price_equilibrium_from(
                    &point.params,
                    &primary.capacities,
                    start,
                    FixedPointSettings::default(),
                )
                .ok()?;
                for firm in Firm::ALL {
                    let a = other
                        .prices
                        .cell(DriverClass::Ice, firm)
                        .or(other.prices.cell(DriverClass::Ev, firm));
                    let b = primary
                        .pricing
                        .prices
                        .cell(DriverClass::Ice, firm)
                        .or(primary.pricing.prices.cell(DriverClass::Ev, firm));
                    if let (Some(a), Some(b)) = (a, b) {
                        spread = spread.max((a - b).abs());
                    }
                }
            }
        }
        // Closed forms have a single answer.
        _ => {}
    }
    Some(spread)
}

/// Equilibrium certificates at a solved point.
pub fn certify(point: &Point, solved: &Solved) -> Oracle {
    let params = &point.params;
    let caps = &solved.capacities;
    let prices = &solved.pricing.prices;
    let price_deviation_gain = (point.pricing == PricingRegime::TwoPrice).then(|| {
        let mut gain: f64 = 0.0;
        for class in DriverClass::ALL {
            for firm in Firm::ALL {
                gain = gain.max(price_deviation_gain(
                    params,
                    caps,
                    prices,
                    class,
                    firm,
                    PRICE_PROBE_RADIUS,
                    PRICE_PROBE_POINTS,
                ));
            }
        }
        gain
    });
    let capacity_deviation_gain = (point.capacity == CapacityRegime::OptimalCapacity).then(|| {
        Firm::ALL
            .into_iter()
            .map(|firm| {
                capacity_deviation_gain(
                    params,
                    &point.policy,
                    caps,
                    point.pricing,
                    firm,
                    CAPACITY_PROBE_POINTS,
                )
                .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    });
    Oracle {
        wardrop_residual: wardrop_residual(params, caps, prices, &solved.outcome),
        price_deviation_gain,
        capacity_deviation_gain,
        undercut_ok: check_no_profitable_undercut(params, caps, prices),
    }
}

/// Stable per-row seed from the scenario seed, the sweep value and a label.
fn row_seed(seed: u64, value: f64, label: &str) -> u64 {
    let mut h = seed ^ value.to_bits().rotate_left(29);
    for byte in label.bytes() {
        h = (h ^ byte as u64).wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn outcome_cells(result: &PointResult) -> Vec<Cell> {
    let Some(s) = &result.solved else {
        return vec![Cell::Missing; OUTCOME_COLUMNS.len()];
    };
    let caps = &s.capacities;
    let p = &s.pricing.prices;
    let q = &s.outcome;
    let r = &s.report;
    vec![
        caps.ev[0].into(),
        caps.ev[1].into(),
        caps.ice[0].into(),
        caps.ice[1].into(),
        p.ev[0].into(),
        p.ev[1].into(),
        p.ice[0].into(),
        p.ice[1].into(),
        q.ev[0].into(),
        q.ev[1].into(),
        q.ice[0].into(),
        q.ice[1].into(),
        r.avg_price_ev.into(),
        r.avg_price_ice.into(),
        r.profit_1.into(),
        r.profit_2.into(),
        r.total_profit().into(),
        r.cs_ev.into(),
        r.cs_ice.into(),
        r.govt_cost.into(),
        r.total_welfare.into(),
        r.total_congestion.into(),
        r.hhi_ev.into(),
        r.hhi_ice.into(),
    ]
}

fn diagnostic_cells(result: &PointResult) -> Vec<Cell> {
    let solved = result.solved.as_ref();
    let warning = match (&result.status, solved) {
        (Status::Failed(message), _) => message.clone(),
        (_, Some(s)) => s
            .warnings
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; "),
        _ => String::new(),
    };
    vec![
        result.status.name().into(),
        solved.map_or(Cell::Missing, |s| s.pricing.iterations.into()),
        solved
            .and_then(|s| s.capacity_rounds)
            .map_or(Cell::Missing, Cell::from),
        solved.map(|s| s.pricing.residual).into(),
        result.spread.into(),
        warning.into(),
    ]
}

fn oracle_cells(result: &PointResult) -> Vec<Cell> {
    let Some(o) = &result.oracle else {
        return vec![Cell::Missing; ORACLE_COLUMNS.len()];
    };
    vec![
        o.wardrop_residual.into(),
        o.price_deviation_gain.into(),
        o.capacity_deviation_gain.into(),
        o.undercut_ok.into(),
    ]
}

fn header(lead: &[&'static str], with_oracle: bool) -> Vec<&'static str> {
    let mut columns: Vec<&'static str> = lead.to_vec();
    columns.extend_from_slice(DIAGNOSTIC_COLUMNS);
    columns.extend_from_slice(OUTCOME_COLUMNS);
    if with_oracle {
        columns.extend_from_slice(ORACLE_COLUMNS);
    }
    columns
}

fn full_row(mut lead: Vec<Cell>, result: &PointResult, with_oracle: bool) -> Vec<Cell> {
    lead.extend(diagnostic_cells(result));
    lead.extend(outcome_cells(result));
    if with_oracle {
        lead.extend(oracle_cells(result));
    }
    lead
}

/// Solved sweep: the table plus the number of rows that did not converge.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub table: Table,
    pub results: Vec<PointResult>,
}

impl SweepOutput {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| !r.converged()).count()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct SweepError(pub String);

/// One row per (r, pricing regime), ordered by r then regime name.
pub fn run_mandate_sweep(
    scenario: &CompetitiveScenario,
    with_oracle: bool,
) -> Result<SweepOutput, SweepError> {
    let values = match scenario.sweep {
        SweepVariable::Mandate => scenario.grid.points(),
        SweepVariable::None => vec![scenario.policy.mandate],
        SweepVariable::Endowment => {
            return Err(SweepError(
                "sweep-mandate needs `sweep = r` or `sweep = none`".into(),
            ))
        }
    };
    let mut regimes = scenario.pricing.clone();
    regimes.sort_by_key(|r| r.name());
    let mut jobs = Vec::new();
    for &r in &values {
        let policy = PolicyConfig::new(r, scenario.policy.intrinsic_cost, scenario.policy.subsidy)
            .map_err(|e| SweepError(e.to_string()))?;
        for &pricing in &regimes {
            jobs.push(Point {
                params: scenario.params,
                policy,
                delta: scenario.delta,
                pricing,
                capacity: scenario.capacity,
            });
        }
    }
    let results: Vec<PointResult> = jobs
        .par_iter()
        .map(|point| {
            let seed = row_seed(scenario.seed, point.policy.mandate, point.pricing.name());
            solve_point(point, seed, with_oracle)
        })
        .collect();

    let mut table = Table::new(header(&["r", "delta", "pricing", "capacity"], with_oracle));
    for (point, result) in jobs.iter().zip(&results) {
        let lead = vec![
            point.policy.mandate.into(),
            point.delta.into(),
            point.pricing.name().into(),
            point.capacity.name().into(),
        ];
        table.push(full_row(lead, result, with_oracle));
    }
    Ok(SweepOutput { table, results })
}

/// The four policy combinations compared across endowments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyCell {
    None,
    Subsidy,
    Mandate,
    Both,
}

impl PolicyCell {
    pub const ALL: [PolicyCell; 4] = [
        PolicyCell::None,
        PolicyCell::Subsidy,
        PolicyCell::Mandate,
        PolicyCell::Both,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyCell::None => "a-none",
            PolicyCell::Subsidy => "b-subsidy",
            PolicyCell::Mandate => "c-mandate",
            PolicyCell::Both => "d-both",
        }
    }

    /// The cell's policy, taking the mandate and subsidy levels from `base`.
    pub fn policy(self, base: &PolicyConfig) -> PolicyConfig {
        let (r, s) = match self {
            PolicyCell::None => (0.0, 0.0),
            PolicyCell::Subsidy => (0.0, base.subsidy),
            PolicyCell::Mandate => (base.mandate, 0.0),
            PolicyCell::Both => (base.mandate, base.subsidy),
        };
        PolicyConfig {
            mandate: r,
            intrinsic_cost: base.intrinsic_cost,
            subsidy: s,
        }
    }
}

/// One row per (delta, policy cell, pricing regime), in that order.
pub fn run_delta_sweep(
    scenario: &CompetitiveScenario,
    with_oracle: bool,
) -> Result<SweepOutput, SweepError> {
    let values = match scenario.sweep {
        SweepVariable::Endowment => scenario.grid.points(),
        SweepVariable::None => vec![scenario.delta],
        SweepVariable::Mandate => {
            return Err(SweepError(
                "sweep-delta needs `sweep = delta` or `sweep = none`".into(),
            ))
        }
    };
    let mut regimes = scenario.pricing.clone();
    regimes.sort_by_key(|r| r.name());
    let mut jobs = Vec::new();
    for &delta in &values {
        for cell in PolicyCell::ALL {
            for &pricing in &regimes {
                jobs.push((
                    cell,
                    Point {
                        params: scenario.params,
                        policy: cell.policy(&scenario.policy),
                        delta,
                        pricing,
                        capacity: scenario.capacity,
                    },
                ));
            }
        }
    }
    let results: Vec<PointResult> = jobs
        .par_iter()
        .map(|(cell, point)| {
            let label = format!("{}/{}", cell.name(), point.pricing.name());
            solve_point(
                point,
                row_seed(scenario.seed, point.delta, &label),
                with_oracle,
            )
        })
        .collect();

    let mut table = Table::new(header(
        &["delta", "policy", "r", "t", "s", "pricing", "capacity"],
        with_oracle,
    ));
    for ((cell, point), result) in jobs.iter().zip(&results) {
        let lead = vec![
            point.delta.into(),
            cell.name().into(),
            point.policy.mandate.into(),
            point.policy.intrinsic_cost.into(),
            point.policy.subsidy.into(),
            point.pricing.name().into(),
            point.capacity.name().into(),
        ];
        table.push(full_row(lead, result, with_oracle));
    }
    Ok(SweepOutput { table, results })
}
