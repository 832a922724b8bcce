//! Exit criteria. Runs every criterion at its pinned tolerance, prints one
//! line per criterion and fails the process if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use evcharge::config::{load_scenario, CompetitiveScenario, Model};
use evcharge::sweep::{run_delta_sweep, run_mandate_sweep, PolicyCell};
use evcharge::table::Table;
use evcharge_core::monopolist::SolveMethod;
use evcharge_core::welfare::consumer_surplus;
use evcharge_core::{
    capacity_deviation_gain, check_no_profitable_undercut, optimal_capacity_equilibrium,
    price_deviation_gain, solve_monopolist, solve_second_stage, two_price_equilibrium,
    wardrop_quantities, wardrop_residual, CapacityProfile, DemandDistribution, DriverClass, Firm,
    MarketParams, MonopolistParams, PolicyConfig, PriceProfile, PricingRegime,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Criterion 1
const REPORTED_TOLERANCE: f64 = 0.002;
const MONOPOLIST_BUDGET: Duration = Duration::from_secs(1);
// Criterion 2
const ORACLE_DRAWS: usize = 200;
const ORACLE_GRID: f64 = 1e-4;
const ORACLE_PROFIT_TOLERANCE: f64 = 1e-6;
const ORACLE_CAPACITY_TOLERANCE: f64 = 5e-4;
const PATTERN_TOLERANCE: f64 = 1e-6;
// Criterion 3
const MANDATE_WINDOW: f64 = 0.05;
const SWEEP_BUDGET: Duration = Duration::from_secs(30);
// Criterion 4
const CS_EV_FACTOR: f64 = 2.0;
const WELFARE_CHANGE_LIMIT: f64 = 0.15;
// Criterion 5
const CERTIFICATION_DRAWS: usize = 500;
const WARDROP_TOLERANCE: f64 = 1e-9;
const FIXED_POINT_TOLERANCE: f64 = 1e-10;
const PRICE_DEVIATION_TOLERANCE: f64 = 1e-8;
const CAPACITY_DEVIATION_TOLERANCE: f64 = 1e-6;
// Criterion 6
const SPLIT_GRID: f64 = 1e-3;
const STRUCTURE_DRAWS: usize = 200;
const ENDOWMENT_DRAWS: usize = 20;

/// Label, cost, sizes, probabilities, reported capacity range, target.
type ReportedOptimum = (&'static str, f64, [f64; 3], [f64; 3], (f64, f64), usize);
type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn competitive(text: &str) -> CompetitiveScenario {
    match load_scenario(text).expect("scenario loads").model {
        Model::Competitive(c) => c,
        Model::Monopolist(_) => panic!("expected a competitive scenario"),
    }
}

fn number(table: &Table, row: usize, column: &str) -> f64 {
    table
        .get(row, column)
        .and_then(|c| c.as_number())
        .unwrap_or_else(|| panic!("row {row} has no number in `{column}`"))
}

fn text(table: &Table, row: usize, column: &str) -> String {
    table.get(row, column).expect("column exists").render()
}

// ---------------------------------------------------------------------------
// 1. Monopolist reported optima

fn criterion_1() -> Verdict {
    let cases: [ReportedOptimum; 6] = [
        (
            "a",
            0.01,
            [0.1, 0.15, 0.3],
            [0.4, 0.33, 0.27],
            (0.196, 0.196),
            1,
        ),
        (
            "b",
            0.01,
            [0.1, 0.15, 0.3],
            [0.31, 0.33, 0.36],
            (0.279, 0.279),
            2,
        ),
        (
            "c",
            0.01,
            [0.1, 0.15, 0.5],
            [0.31, 0.33, 0.36],
            (0.278, 0.279),
            2,
        ),
        (
            "d",
            0.01,
            [0.1, 0.15, 0.5],
            [0.2, 0.1, 0.7],
            (0.860, 0.860),
            3,
        ),
        (
            "e",
            0.01,
            [0.1, 0.15, 0.5],
            [0.2, 0.15, 0.65],
            (0.284, 0.284),
            2,
        ),
        (
            "f",
            0.0,
            [0.1, 0.15, 0.5],
            [0.2, 0.15, 0.65],
            (0.857, 0.857),
            3,
        ),
    ];
    let start = Instant::now();
    let mut pass = true;
    let mut found = Vec::new();
    for (name, cost, q, pi, (lo, hi), target) in cases {
        let params = MonopolistParams::new(1.25, 1.0, 1.0, cost).unwrap();
        let dist = DemandDistribution::new(q.to_vec(), pi.to_vec()).unwrap();
        let solution = solve_monopolist(&params, &dist).unwrap();
        let ok = solution.n_ev >= lo - REPORTED_TOLERANCE
            && solution.n_ev <= hi + REPORTED_TOLERANCE
            && solution.case == evcharge_core::PricingCase::Case1(target);
        pass &= ok;
        found.push(format!("{name}={:.4}/{}", solution.n_ev, solution.case));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < MONOPOLIST_BUDGET;
    Verdict::new(pass, format!("{} in {elapsed:.2?}", found.join(" ")))
}

// ---------------------------------------------------------------------------
// 2. Closed form against an independent brute force

/// Best EV price at fixed capacity by direct maximization of
/// `c * sum_i pi_i min(N (W_e - c) / eps, q_i)`, which is a concave
/// quadratic between consecutive kinks `c_i = W_e - eps q_i / N`.
fn best_ev_revenue(params: &MonopolistParams, q: &[f64], pi: &[f64], n: f64) -> (f64, f64) {
    let (we, eps) = (params.w_ev, params.epsilon);
    if n <= 0.0 {
        return (0.0, we / 2.0);
    }
    let revenue = |c: f64| {
        let demand = n * (we - c) / eps;
        c * q
            .iter()
            .zip(pi)
            .map(|(&qi, &p)| p * demand.min(qi))
            .sum::<f64>()
    };
    let mut kinks: Vec<f64> = q
        .iter()
        .map(|&qi| we - eps * qi / n)
        .filter(|&c| c > 0.0 && c < we)
        .collect();
    kinks.push(0.0);
    kinks.push(we);
    kinks.sort_by(f64::total_cmp);
    let mut best = (revenue(0.0), 0.0);
    for w in kinks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let demand = n * (we - mid) / eps;
        // Capped realizations contribute a constant, the rest a linear term.
        let (capped, slope): (f64, f64) = q.iter().zip(pi).fold((0.0, 0.0), |acc, (&qi, &p)| {
            if demand >= qi {
                (acc.0 + p * qi, acc.1)
            } else {
                (acc.0, acc.1 + p)
            }
        });
        let vertex = if slope > 0.0 {
            (capped + slope * n * we / eps) / (2.0 * slope * n / eps)
        } else {
            hi
        };
        for c in [lo, hi, vertex.clamp(lo, hi)] {
            let r = revenue(c);
            if r > best.0 {
                best = (r, c);
            }
        }
    }
    best
}

fn brute_profit(params: &MonopolistParams, q: &[f64], pi: &[f64], n: f64) -> (f64, f64) {
    let (revenue, price) = best_ev_revenue(params, q, pi, n);
    let ice = (1.0 - n) * params.w_ice * params.w_ice / (4.0 * params.epsilon);
    (revenue + ice - params.cost * n, price)
}

/// Grid maximum of the brute-force profit, polished by ternary search over
/// the neighbouring grid cells.
fn brute_force_optimum(params: &MonopolistParams, q: &[f64], pi: &[f64]) -> (f64, f64, f64) {
    let steps = (1.0 / ORACLE_GRID).round() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=steps {
        let n = k as f64 / steps as f64;
        let value = brute_profit(params, q, pi, n).0;
        if value > best.0 {
            best = (value, n);
        }
    }
    let (mut lo, mut hi) = (
        (best.1 - ORACLE_GRID).max(0.0),
        (best.1 + ORACLE_GRID).min(1.0),
    );
    for _ in 0..100 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if brute_profit(params, q, pi, a).0 >= brute_profit(params, q, pi, b).0 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mid = 0.5 * (lo + hi);
    let (value, n) = if brute_profit(params, q, pi, mid).0 > best.0 {
        (brute_profit(params, q, pi, mid).0, mid)
    } else {
        best
    };
    (value, n, brute_profit(params, q, pi, n).1)
}

fn random_monopolist(rng: &mut ChaCha8Rng) -> (MonopolistParams, DemandDistribution) {
    loop {
        let w_ice = rng.gen_range(0.2..1.5);
        let w_ev = w_ice + rng.gen_range(0.05..1.0);
        let epsilon = rng.gen_range(0.5..2.0);
        let cost = rng.gen_range(0.0..0.05);
        let n = rng.gen_range(1..=4);
        let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..1.0)).collect();
        q.sort_by(f64::total_cmp);
        if q.windows(2).any(|w| w[1] - w[0] < 1e-3) {
            continue;
        }
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut pi: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let head: f64 = pi[..n - 1].iter().sum();
        pi[n - 1] = 1.0 - head;
        let params = MonopolistParams::new(w_ev, w_ice, epsilon, cost).unwrap();
        let dist = DemandDistribution::new(q, pi).unwrap();
        if evcharge_core::verify_theorem_assumptions(&params, &dist).hold() {
            return (params, dist);
        }
    }
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_profit: f64 = 0.0;
    let mut worst_capacity: f64 = 0.0;
    let mut failures = Vec::new();
    let mut at_bound = 0;
    let mut shortfall: f64 = 0.0;
    for draw in 0..ORACLE_DRAWS {
        let (params, dist) = random_monopolist(&mut rng);
        let (q, pi) = (dist.sizes(), dist.probabilities());
        let solution = solve_monopolist(&params, &dist).unwrap();
        let (oracle_profit, oracle_n, oracle_price) = brute_force_optimum(&params, q, pi);
        let profit_gap = (oracle_profit - solution.expected_profit).abs();
        let capacity_gap = (oracle_n - solution.n_ev).abs();
        let demand = oracle_n * (params.w_ev - oracle_price) / params.epsilon;
        let case1 = q.iter().any(|&qt| (demand - qt).abs() <= PATTERN_TOLERANCE);
        worst_profit = worst_profit.max(profit_gap);
        worst_capacity = worst_capacity.max(capacity_gap);
        let ok = solution.method == SolveMethod::ClosedForm
            && profit_gap <= ORACLE_PROFIT_TOLERANCE
            && capacity_gap <= ORACLE_CAPACITY_TOLERANCE
            && case1;
        let closed_form_best = solution
            .candidates
            .iter()
            .filter_map(|c| c.profit)
            .fold(f64::NEG_INFINITY, f64::max);
        if !ok {
            if solution.n_ev >= 1.0 - ORACLE_CAPACITY_TOLERANCE {
                at_bound += 1;
            }
            shortfall = shortfall.max(oracle_profit - closed_form_best);
            failures.push(format!(
                "draw {draw}: N={:.5} {} via {:?}, oracle served {demand:.4} against q={q:.4?}",
                solution.n_ev, solution.case, solution.method
            ));
        }
    }
    let mut detail = format!(
        "{ORACLE_DRAWS} draws, max profit gap {worst_profit:.2e}, max capacity gap {worst_capacity:.2e}"
    );
    if !failures.is_empty() {
        detail.push_str(&format!(
            "; {} failing ({at_bound} at N=1, closed form short by up to {shortfall:.2e}), first: {}",
            failures.len(),
            failures[0]
        ));
    }
    Verdict::new(failures.is_empty(), detail)
}

// ---------------------------------------------------------------------------
// 3. Welfare-maximizing mandate

fn mandate_argmax(alpha: f64) -> (f64, Duration) {
    let text = format!(
        "model = competitive\nW_d = 1\nbeta = 1\nW_e = 1.25\nalpha = {alpha}\nepsilon = 1\n\
         t = 0\ns = 0\ndelta = 0.6\npricing = naive-single\ncapacity = naive-mandate\n\
         sweep = r\nsweep_min = 0\nsweep_max = 1\nsweep_step = 0.01\n"
    );
    let start = Instant::now();
    let out = run_mandate_sweep(&competitive(&text), false).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(out.failures(), 0);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for row in 0..out.table.rows.len() {
        let w = number(&out.table, row, "total_welfare");
        if w > best.0 {
            best = (w, number(&out.table, row, "r"));
        }
    }
    (best.1, elapsed)
}

fn criterion_3() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [5.0, 2.0] {
        let (r, elapsed) = mandate_argmax(alpha);
        let target = 1.0 / alpha;
        let ok = (r - target).abs() <= MANDATE_WINDOW + 1e-12 && elapsed < SWEEP_BUDGET;
        pass &= ok;
        parts.push(format!(
            "alpha={alpha}: argmax r={r:.2} vs 1/alpha={target:.2} ({}, {elapsed:.2?})",
            if ok { "ok" } else { "outside window" }
        ));
    }
    Verdict::new(pass, parts.join("; "))
}

// ---------------------------------------------------------------------------
// 4. Policy effects across endowments

fn criterion_4() -> Verdict {
    let config =
        std::fs::read_to_string(repo_root().join("scenarios/endowment-policies.cfg")).unwrap();
    let scenario = competitive(&config);
    let out = run_delta_sweep(&scenario, false).unwrap();
    let table = &out.table;
    let mut problems = Vec::new();
    let mut max_change: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for block in table.rows.chunks(4).enumerate().map(|(i, _)| i * 4) {
        let delta = number(table, block, "delta");
        let cell = |c: PolicyCell| {
            let row = (block..block + 4)
                .find(|&r| text(table, r, "policy") == c.name())
                .expect("every cell present");
            assert_eq!(text(table, row, "status"), "converged");
            row
        };
        let a = cell(PolicyCell::None);
        let mandate = cell(PolicyCell::Mandate);
        for c in [PolicyCell::Subsidy, PolicyCell::Mandate, PolicyCell::Both] {
            let row = cell(c);
            if number(table, row, "cs_ice") >= number(table, a, "cs_ice") {
                problems.push(format!("delta={delta} {}: cs_ice not lower", c.name()));
            }
            let ratio = number(table, row, "cs_ev") / number(table, a, "cs_ev");
            min_ratio = min_ratio.min(ratio);
            if ratio < CS_EV_FACTOR {
                problems.push(format!(
                    "delta={delta} {}: cs_ev ratio {ratio:.2}",
                    c.name()
                ));
            }
            let w0 = number(table, a, "total_welfare");
            let change = ((number(table, row, "total_welfare") - w0) / w0).abs();
            max_change = max_change.max(change);
            if change >= WELFARE_CHANGE_LIMIT {
                problems.push(format!(
                    "delta={delta} {}: welfare change {change:.3}",
                    c.name()
                ));
            }
        }
        for c in [PolicyCell::Subsidy, PolicyCell::Both] {
            let row = cell(c);
            if number(table, row, "govt_cost") <= 0.0 {
                problems.push(format!("delta={delta} {}: no subsidy outlay", c.name()));
            }
            for column in ["profit_1", "profit_2"] {
                if number(table, row, column) < number(table, mandate, column) {
                    problems.push(format!(
                        "delta={delta} {}: {column} below mandate",
                        c.name()
                    ));
                }
            }
        }
    }
    let detail = format!(
        "{} rows, min cs_ev ratio {min_ratio:.2}, max welfare change {:.1}%{}",
        table.rows.len(),
        100.0 * max_change,
        problems
            .first()
            .map(|p| format!("; {p}"))
            .unwrap_or_default()
    );
    Verdict::new(problems.is_empty() && table.rows.len() == 20, detail)
}

// ---------------------------------------------------------------------------
// 5. Equilibrium certification

fn random_params(rng: &mut ChaCha8Rng) -> MarketParams {
    let w_ice = rng.gen_range(0.2..1.5);
    MarketParams::new(
        w_ice + rng.gen_range(0.05..1.5),
        w_ice,
        rng.gen_range(0.1..5.0),
        rng.gen_range(0.1..5.0),
        rng.gen_range(0.2..2.0),
    )
    .unwrap()
}

fn random_capacities(rng: &mut ChaCha8Rng) -> CapacityProfile {
    let delta = rng.gen_range(0.05..0.95);
    let ev = [rng.gen_range(0.01..delta), rng.gen_range(0.01..1.0 - delta)];
    CapacityProfile::from_ev(delta, ev).unwrap()
}

/// Best response written out independently of the library.
fn textbook_best_response(w: f64, s: f64, opp_scaled: f64, opp_price: f64) -> f64 {
    w * (1.0 + s * opp_scaled * opp_price) / (2.0 * (s * w * opp_scaled + 1.0))
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = [0.0f64; 4];
    let mut problems = Vec::new();
    for draw in 0..CERTIFICATION_DRAWS {
        let params = random_params(&mut rng);
        let caps = random_capacities(&mut rng);

        let arbitrary = PriceProfile::new(
            [
                rng.gen_range(0.0..params.w_ev),
                rng.gen_range(0.0..params.w_ev),
            ],
            [
                rng.gen_range(0.0..params.w_ice),
                rng.gen_range(0.0..params.w_ice),
            ],
        );
        let outcome = wardrop_quantities(&params, &caps, &arbitrary);
        let residual = wardrop_residual(&params, &caps, &arbitrary, &outcome);

        let prices = two_price_equilibrium(&params, &caps);
        let eq_outcome = wardrop_quantities(&params, &caps, &prices);
        let residual = residual.max(wardrop_residual(&params, &caps, &prices, &eq_outcome));
        worst[0] = worst[0].max(residual);

        let mut fixed_point: f64 = 0.0;
        let mut deviation: f64 = 0.0;
        for class in DriverClass::ALL {
            let demand = params.demand(class);
            let cap = caps.class(class);
            let p = prices.class(class);
            for firm in Firm::ALL {
                let (i, j) = (firm.index(), firm.other().index());
                let br = textbook_best_response(
                    demand.intercept,
                    demand.slope,
                    cap[j] / params.epsilon,
                    p[j].unwrap(),
                );
                fixed_point = fixed_point.max((br - p[i].unwrap()).abs());
                deviation = deviation.max(price_deviation_gain(
                    &params, &caps, &prices, class, firm, 1e-3, 21,
                ));
            }
        }
        worst[1] = worst[1].max(fixed_point);
        worst[2] = worst[2].max(deviation);
        if !check_no_profitable_undercut(&params, &caps, &prices) {
            problems.push(format!("draw {draw}: undercut check failed"));
        }

        let t = rng.gen_range(0.0..0.2);
        let policy = PolicyConfig::new(rng.gen_range(0.0..0.6), t, rng.gen_range(0.0..=t)).unwrap();
        match optimal_capacity_equilibrium(&params, &policy, caps.delta, PricingRegime::TwoPrice) {
            Ok(eq) => {
                for firm in Firm::ALL {
                    let gain = capacity_deviation_gain(
                        &params,
                        &policy,
                        &eq.capacities,
                        PricingRegime::TwoPrice,
                        firm,
                        101,
                    )
                    .unwrap();
                    worst[3] = worst[3].max(gain);
                }
            }
            Err(err) => problems.push(format!("draw {draw}: {err}")),
        }
    }
    let pass = problems.is_empty()
        && worst[0] < WARDROP_TOLERANCE
        && worst[1] <= FIXED_POINT_TOLERANCE
        && worst[2] <= PRICE_DEVIATION_TOLERANCE
        && worst[3] <= CAPACITY_DEVIATION_TOLERANCE;
    Verdict::new(
        pass,
        format!(
            "{CERTIFICATION_DRAWS} draws: wardrop {:.1e}, fixed point {:.1e}, price deviation {:.1e}, capacity deviation {:.1e}{}",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            problems.first().map(|p| format!("; {p}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. Structural properties

fn total_ev_quantity(params: &MarketParams, total: f64, x: f64) -> f64 {
    // Firm 1 is all chargers so both EV cells fit inside one unit of spots.
    let delta = total - x;
    let caps = CapacityProfile {
        delta,
        ev: [total - x, x],
        ice: [0.0, 1.0 - total],
    };
    let prices = two_price_equilibrium(params, &caps);
    let q = wardrop_quantities(params, &caps, &prices);
    q.ev[0] + q.ev[1]
}

fn existence_params(rng: &mut ChaCha8Rng) -> MarketParams {
    let w_ice = rng.gen_range(0.3..1.0);
    let w_ev = w_ice + rng.gen_range(0.05..1.0);
    MarketParams::new(
        w_ev,
        w_ice,
        rng.gen_range(0.05..=1.0 / w_ev),
        rng.gen_range(0.05..=1.0 / w_ice),
        1.0,
    )
    .unwrap()
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut problems = Vec::new();

    let mut worst_split: f64 = 0.0;
    for draw in 0..STRUCTURE_DRAWS {
        let params = random_params(&mut rng);
        let total = rng.gen_range(0.05..1.0);
        let steps = (total / SPLIT_GRID).floor() as usize;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in 0..=steps {
            let x = k as f64 * SPLIT_GRID;
            let value = total_ev_quantity(&params, total, x);
            if value > best.0 + 1e-15 {
                best = (value, x);
            }
        }
        let miss = (best.1 - total / 2.0).abs();
        worst_split = worst_split.max(miss);
        if miss > SPLIT_GRID {
            problems.push(format!(
                "split draw {draw}: argmax {:.4} of total {total:.4}",
                best.1
            ));
        }
    }

    for draw in 0..STRUCTURE_DRAWS {
        let params = random_params(&mut rng);
        let doubled = params.with_slope(DriverClass::Ev, 2.0 * params.alpha);
        let own = rng.gen_range(0.01..0.5);
        let opp = rng.gen_range(0.01..0.5);
        let opp_price = rng.gen_range(0.0..params.w_ev);
        let base =
            evcharge_core::best_response_price(&params, DriverClass::Ev, own, opp, Some(opp_price))
                .unwrap();
        let steeper = evcharge_core::best_response_price(
            &doubled,
            DriverClass::Ev,
            own,
            opp,
            Some(opp_price),
        )
        .unwrap();
        if steeper >= base {
            problems.push(format!("slope draw {draw}: {steeper} >= {base}"));
        }
    }

    let mut endowment_margin = f64::INFINITY;
    let mut certified = 0;
    for draw in 0..ENDOWMENT_DRAWS {
        let params = existence_params(&mut rng);
        let policy = PolicyConfig::new(0.0, rng.gen_range(0.0..0.2), 0.0).unwrap();
        let surplus = |delta: f64| {
            let eq = optimal_capacity_equilibrium(&params, &policy, delta, PricingRegime::TwoPrice)
                .expect("capacity equilibrium");
            let stage =
                solve_second_stage(&params, &eq.capacities, PricingRegime::TwoPrice).unwrap();
            if !check_no_profitable_undercut(&params, &eq.capacities, stage.prices()) {
                panic!("undercut check failed at a certified equilibrium");
            }
            let (ev, ice) =
                consumer_surplus(&params, &eq.capacities, stage.prices(), &stage.outcome).unwrap();
            ev + ice
        };
        let even = surplus(0.5);
        for delta in [0.6, 0.7, 0.8, 0.9] {
            let other = surplus(delta);
            certified += 1;
            endowment_margin = endowment_margin.min(even - other);
            if other > even + 1e-12 {
                problems.push(format!(
                    "endowment draw {draw}: delta={delta} surplus {other} > {even}"
                ));
            }
        }
    }

    Verdict::new(
        problems.is_empty(),
        format!(
            "equal split within {worst_split:.1e}; slope doubling strict on {STRUCTURE_DRAWS} draws; \
             even endowment surplus margin {endowment_margin:.2e} over {certified} comparisons{}",
            problems.first().map(|p| format!("; {p}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------------------
// 7. Determinism and interface

const MALFORMED: &[(&str, &str)] = &[
    ("empty.cfg", "missing-key"),
    ("unknown-key.cfg", "unknown-key"),
    ("duplicate-key.cfg", "duplicate-key"),
    ("no-equals.cfg", "malformed-line"),
    ("word-number.cfg", "malformed-number"),
    ("bad-regime.cfg", "invalid-value"),
    ("bad-model.cfg", "invalid-value"),
    ("probabilities.cfg", "invariant-violation"),
    ("ice-above-ev.cfg", "invariant-violation"),
    ("zero-step.cfg", "invariant-violation"),
];

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_evcharge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn criterion_7() -> Verdict {
    let root = repo_root();
    let dir = tempfile::tempdir().unwrap();
    let mut problems = Vec::new();
    let runs: [(&str, &str, &[&str]); 3] = [
        ("sweep-mandate", "scenarios/mandate-alpha5.cfg", &[]),
        (
            "sweep-delta",
            "scenarios/endowment-policies.cfg",
            &["--oracle"],
        ),
        ("monopolist", "scenarios/monopolist-a.cfg", &["--profile"]),
    ];
    for (command, config, extra) in runs {
        let config = root.join(config);
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let path = dir.path().join(format!("{command}-{attempt}.csv"));
            let mut args = vec![
                command,
                "--config",
                config.to_str().unwrap(),
                "--output",
                path.to_str().unwrap(),
            ];
            args.extend_from_slice(extra);
            let out = run_cli(&args);
            if !out.status.success() {
                problems.push(format!("{command} exited with {}", out.status));
            }
            outputs.push(std::fs::read(&path).unwrap_or_default());
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            problems.push(format!("{command}: reruns differ"));
        }
    }

    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/malformed");
    for (file, class) in MALFORMED {
        let path = fixtures.join(file);
        let out = run_cli(&["validate", "--config", path.to_str().unwrap()]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        if out.status.code() != Some(2) || !stderr.starts_with(&format!("error: {class}:")) {
            problems.push(format!("{file}: expected {class}, got `{}`", stderr.trim()));
        }
    }
    Verdict::new(
        problems.is_empty(),
        format!(
            "3 scenarios byte-identical on rerun, {}/{} malformed configs rejected{}",
            MALFORMED.len() - problems.iter().filter(|p| p.ends_with('`')).count(),
            MALFORMED.len(),
            problems
                .first()
                .map(|p| format!("; {p}"))
                .unwrap_or_default()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 monopolist reference optima", criterion_1),
        ("2 closed form vs brute force", criterion_2),
        ("3 welfare-maximizing mandate", criterion_3),
        ("4 policy effects by endowment", criterion_4),
        ("5 equilibrium certification", criterion_5),
        ("6 structural properties", criterion_6),
        ("7 determinism and interface", criterion_7),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let verdict = check();
        let tag = if verdict.pass { "PASS" } else { "FAIL" };
        println!(
            "acceptance criterion {name:<32} {tag}  [{:.2?}] {}",
            start.elapsed(),
            verdict.detail
        );
        failed += usize::from(!verdict.pass);
    }
    if failed > 0 {
        println!("acceptance: {failed} of 7 criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all 7 criteria passed");
}
