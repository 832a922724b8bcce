use evcharge_core::monopolist::optimal_capacity_case1;
use evcharge_core::{
    capacity_deviation_gain, optimal_capacity_equilibrium, solve_monopolist, DemandDistribution,
    Firm, MarketParams, MonopolistParams, PolicyConfig, PricingCase, PricingRegime,
};

fn reference_params(cost: f64, q: &[f64], pi: &[f64]) -> (MonopolistParams, DemandDistribution) {
    (
        MonopolistParams::new(1.25, 1.0, 1.0, cost).unwrap(),
        DemandDistribution::new(q.to_vec(), pi.to_vec()).unwrap(),
    )
}

#[test]
fn reported_monopolist_optima() {
    let cases = [
        (0.01, [0.1, 0.15, 0.3], [0.4, 0.33, 0.27], 0.196, 1),
        (0.01, [0.1, 0.15, 0.3], [0.31, 0.33, 0.36], 0.279, 2),
        (0.01, [0.1, 0.15, 0.5], [0.2, 0.1, 0.7], 0.860, 3),
        (0.0, [0.1, 0.15, 0.5], [0.2, 0.15, 0.65], 0.857, 3),
    ];
    for (cost, q, pi, n_ev, t) in cases {
        let (params, dist) = reference_params(cost, &q, &pi);
        let solution = solve_monopolist(&params, &dist).unwrap();
        assert!((solution.n_ev - n_ev).abs() <= 0.002, "{q:?} {pi:?}");
        assert_eq!(solution.case, PricingCase::Case1(t));
        assert!(solution.oracle_agrees());
    }
}

#[test]
fn frozen_case1_capacities() {
    let (params, dist) = reference_params(0.01, &[0.1, 0.15, 0.3], &[0.4, 0.33, 0.27]);
    let expected = [0.196116135138184, 0.273861278752583, 0.443543424289854];
    for (t, want) in expected.into_iter().enumerate() {
        let got = optimal_capacity_case1(&params, &dist, t + 1).unwrap();
        assert!((got - want).abs() < 1e-9, "t={} got {got}", t + 1);
    }
}

#[test]
fn single_realization_reduces_by_hand() {
    // With one market size q the profit is (W_e - eps q / N) q + (1 - N) W_d^2 / (4 eps) - p N,
    // maximized at N = q sqrt(eps / (W_d^2 / (4 eps) + p)).
    let (params, dist) = reference_params(0.01, &[0.2], &[1.0]);
    let solution = solve_monopolist(&params, &dist).unwrap();
    let expected = 0.2 * (1.0f64 / (0.25 + 0.01)).sqrt();
    assert!((solution.n_ev - expected).abs() < 1e-12);
    let profit = (1.25 - 0.2 / expected) * 0.2 + (1.0 - expected) * 0.25 - 0.01 * expected;
    assert!((solution.expected_profit - profit).abs() < 1e-12);
}

#[test]
fn even_endowment_is_symmetric_and_grid_stable() {
    let params = MarketParams::new(1.0, 0.9, 1.0, 0.33, 1.0).unwrap();
    let policy = PolicyConfig::new(0.0, 0.1, 0.0).unwrap();
    let eq = optimal_capacity_equilibrium(&params, &policy, 0.5, PricingRegime::TwoPrice).unwrap();
    let caps = eq.capacities;
    assert!((caps.ev[0] - caps.ev[1]).abs() < 1e-7);
    for firm in Firm::ALL {
        let gain =
            capacity_deviation_gain(&params, &policy, &caps, PricingRegime::TwoPrice, firm, 501)
                .unwrap();
        assert!(gain <= 1e-6);
    }
}

#[test]
fn full_subsidy_respects_mandate() {
    let params = MarketParams::new(1.0, 0.9, 1.0, 0.33, 1.0).unwrap();
    let policy = PolicyConfig::new(0.33, 0.1, 0.1).unwrap();
    for delta in [0.5, 0.7, 0.9] {
        let eq =
            optimal_capacity_equilibrium(&params, &policy, delta, PricingRegime::TwoPrice).unwrap();
        assert!(eq.capacities.ev[0] >= 0.33 * delta - 1e-12);
        assert!(eq.capacities.ev[1] >= 0.33 * (1.0 - delta) - 1e-12);
    }
}
