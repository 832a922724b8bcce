//! Risk-neutral monopolist choosing charger capacity before the size of the
//! EV market is known.
//!
//! ICE drivers are unlimited and all value parking at `W_d`; EV drivers value
//! it at `W_e > W_d` but at most `q_i` of them show up, with probability
//! `pi_i`. For a fixed number of charger spots the EV price falls into one of
//! three quantity patterns:
//!
//! * **Case 1 (target t)**: serve every realization up to `q_t` fully and
//!   exactly `q_t` in larger ones.
//! * **Case 2 (target t)**: serve realizations up to `q_t` fully and some
//!   amount strictly between `q_t` and `q_{t+1}` otherwise.
//! * **Case 3**: serve less than `q_1` in every realization.
//!
//! Ordered by the largest quantity served they read
//! `Case 3, Case 1(1), Case 2(1), Case 1(2), ..., Case 2(n-1), Case 1(n)`.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::market::positive;
use crate::search::golden_section_max;

/// Resolution of the brute-force capacity grid.
pub const ORACLE_RESOLUTION: f64 = 1e-4;
/// Agreement required between the closed form and the grid search.
pub const ORACLE_TOLERANCE: f64 = 1e-6;
const REFINE_TOLERANCE: f64 = 1e-8;
const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Finite distribution of the EV market size.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandDistribution {
    sizes: Vec<f64>,
    probabilities: Vec<f64>,
}

impl DemandDistribution {
    /// `sizes` must be strictly increasing and positive, `probabilities`
    /// positive and summing to one.
    pub fn new(sizes: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        let invalid = |name, reason| Err(Error::InvalidParameter { name, reason });
        if sizes.is_empty() {
            return invalid("q", "at least one realization is required");
        }
        if sizes.len() != probabilities.len() {
            return invalid("pi", "must have one probability per realization");
        }
        if sizes.iter().any(|q| !(q.is_finite() && *q > 0.0)) {
            return invalid("q", "realizations must be finite and positive");
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("q", "realizations must be strictly increasing");
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return invalid("pi", "probabilities must be positive");
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return invalid("pi", "probabilities must sum to 1");
        }
        Ok(DemandDistribution {
            sizes,
            probabilities,
        })
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Size of realization `t` (1-based).
    pub fn size(&self, t: usize) -> f64 {
        self.sizes[t - 1]
    }

    /// `sum_{i <= t} pi_i q_i`: expected demand from realizations at or below
    /// the target.
    pub fn served_below(&self, t: usize) -> f64 {
        self.sizes[..t]
            .iter()
            .zip(&self.probabilities[..t])
            .map(|(q, p)| p * q)
            .sum()
    }

    /// `sum_{j > t} pi_j`: probability of exceeding the target.
    pub fn tail_probability(&self, t: usize) -> f64 {
        self.probabilities[t..].iter().sum()
    }

    /// Expected quantity served when a Case 1 price targets `q_t`.
    pub fn capped_mean(&self, t: usize) -> f64 {
        self.served_below(t) + self.tail_probability(t) * self.size(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonopolistParams {
    pub w_ev: f64,
    pub w_ice: f64,
    pub epsilon: f64,
    /// Cost per converted spot.
    pub cost: f64,
}

impl MonopolistParams {
    pub fn new(w_ev: f64, w_ice: f64, epsilon: f64, cost: f64) -> Result<Self> {
        positive("W_e", w_ev)?;
        positive("W_d", w_ice)?;
        positive("epsilon", epsilon)?;
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: "must be finite and non-negative",
            });
        }
        if w_ev <= w_ice {
            return Err(Error::InvalidParameter {
                name: "W_e",
                reason: "must exceed W_d",
            });
        }
        Ok(MonopolistParams {
            w_ev,
            w_ice,
            epsilon,
            cost,
        })
    }

    /// Marginal ICE revenue lost per converted spot plus conversion cost.
    fn capacity_shadow_cost(&self) -> f64 {
        self.w_ice * self.w_ice / (4.0 * self.epsilon) + self.cost
    }
}

/// EV quantity pattern; targets are 1-based realization indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PricingCase {
    Case1(usize),
    Case2(usize),
    Case3,
}

impl PricingCase {
    /// All cases for `n` realizations, in increasing order of the largest
    /// quantity served.
    pub fn ordered(n: usize) -> Vec<PricingCase> {
        let mut out = Vec::with_capacity(2 * n);
        out.push(PricingCase::Case3);
        for t in 1..=n {
            out.push(PricingCase::Case1(t));
            if t < n {
                out.push(PricingCase::Case2(t));
            }
        }
        out
    }

    pub fn target(self) -> Option<usize> {
        match self {
            PricingCase::Case1(t) | PricingCase::Case2(t) => Some(t),
            PricingCase::Case3 => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            PricingCase::Case1(_) => 1,
            PricingCase::Case2(_) => 2,
            PricingCase::Case3 => 3,
        }
    }
}

impl fmt::Display for PricingCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PricingCase::Case1(t) => write!(f, "case1(t={t})"),
            PricingCase::Case2(t) => write!(f, "case2(t={t})"),
            PricingCase::Case3 => f.write_str("case3"),
        }
    }
}

/// ICE price `W_d / 2` and the resulting revenue `(1 - N_e) W_d^2 / (4 eps)`.
pub fn ice_price_and_revenue(params: &MonopolistParams, n_ev: f64) -> (f64, f64) {
    let w = params.w_ice;
    (w / 2.0, (1.0 - n_ev) * w * w / (4.0 * params.epsilon))
}

/// Realized EV demand `min(N_e (W_e - c) / eps, q_max)`.
pub fn ev_demand(params: &MonopolistParams, n_ev: f64, price: f64, market_size: f64) -> f64 {
    (n_ev * (params.w_ev - price) / params.epsilon).min(market_size)
}

/// Quantity served in every realization at the given capacity and price.
pub fn served_pattern(
    params: &MonopolistParams,
    dist: &DemandDistribution,
    n_ev: f64,
    price: f64,
) -> Vec<f64> {
    dist.sizes()
        .iter()
        .map(|&q| ev_demand(params, n_ev, price, q))
        .collect()
}

fn check_target(t: usize, max: usize, n: usize) -> Result<()> {
    if t == 0 || t > max {
        Err(Error::InvalidTarget { target: t, n })
    } else {
        Ok(())
    }
}

/// Case 1 price `W_e - eps q_t / N_e`, which serves exactly `q_t` when the
/// market is at least that large. Infeasible when negative.
pub fn case1_price(
    params: &MonopolistParams,
    dist: &DemandDistribution,
    n_ev: f64,
    t: usize,
) -> Result<f64> {
    let case = PricingCase::Case1(t);
    check_target(t, dist.len(), dist.len())?;
    if n_ev <= 0.0 {
        return Err(Error::InfeasibleCase { case });
    }
    let price = params.w_ev - params.epsilon * dist.size(t) / n_ev;
    if price < 0.0 {
        return Err(Error::InfeasibleCase { case });
    }
    Ok(price)
}

/// Unconstrained Case 2 price for a given expected mass served below the
/// target and tail probability.
pub fn case2_price_formula(
    w_ev: f64,
    epsilon: f64,
    served_below: f64,
    tail_probability: f64,
    n_ev: f64,
) -> f64 {
    w_ev / 2.0 + epsilon * served_below / (2.0 * tail_probability * n_ev)
}

/// Case 2 price, feasible only when the demand it induces lies strictly
/// between `q_t` and `q_{t+1}`.
pub fn case2_price(
    params: &MonopolistParams,
    dist: &DemandDistribution,
    n_ev: f64,
    t: usize,
) -> Result<f64> {
    let case = PricingCase::Case2(t);
    check_target(t, dist.len().saturating_sub(1), dist.len())?;
    if n_ev <= 0.0 {
        return Err(Error::InfeasibleCase { case });
    }
    let price = case2_price_formula(
        params.w_ev,
        params.epsilon,
        dist.served_below(t),
        dist.tail_probability(t),
        n_ev,
    );
    let served = n_ev * (params.w_ev - price) / params.epsilon;
    if served > dist.size(t) && served < dist.size(t + 1) {
        Ok(price)
    } else {
        Err(Error::InfeasibleCase { case })
    }
}

/// Case 3 price `W_e / 2`, feasible while it serves less than `q_1`.
pub fn case3_price(params: &MonopolistParams, dist: &DemandDistribution, n_ev: f64) -> Result<f64> {
    let price = params.w_ev / 2.0;
    if n_ev * params.w_ev / (2.0 * params.epsilon) < dist.size(1) {
        Ok(price)
    } else {
        Err(Error::InfeasibleCase {
            case: PricingCase::Case3,
        })
    }
}

pub fn case_price(
    params: &MonopolistParams,
    dist: &DemandDistribution,
    n_ev: f64,
    case: PricingCase,
) -> Result<f64> {
    match case {
        PricingCase::Case1(t) => case1_price(params, dist, n_ev, t),
        PricingCase::Case2(t) => case2_price(params, dist, n_ev, t),
        PricingCase::Case3 => case3_price(params, dist, n_ev),
    }
}

/// Expected profit from an explicit EV price, without any case logic.
pub fn profit_at_price(
    params: &MonopolistParams,
    dist: &DemandDistribution,
    n_ev: f64,
    price: f64,
) -> f64 {
    let expected_served: f64 = dist
        .sizes()
        .iter()
        .zip(dist.probabilities())
        .map(|(&q, &p)| p * ev_demand(params, n_ev, price, q))
        .sum();
    let (_, ice_revenue) = ice_price_and_revenue(params, n_ev);
    price * expected_served + ice_revenue - params.cost * n_ev
}

/// Expected profit when pricing in `case` at capacity `n_ev`.
pub fn expected_profit(
    params: &MonopolistParams,
    dist: &DemandDistribution,
    n_ev: f64,
    case: PricingCase,
) -> Result<f64> {
    let price = case_price(params, dist, n_ev, case)?;
    Ok(profit_at_price(params, dist, n_ev, price))
}

/// Capacity maximizing the (concave) Case 1 profit for target `t`, capped at
/// the total number of spots.
pub fn optimal_capacity_case1(
    params: &MonopolistParams,
    dist: &DemandDistribution,
    t: usize,
) -> Result<f64> {
    check_target(t, dist.len(), dist.len())?;
    let interior = libm::sqrt(
        params.epsilon * dist.size(t) * dist.capped_mean(t) / params.capacity_shadow_cost(),
    );
    Ok(interior.min(1.0))
}

/// Truth values of the two hypotheses under which only Case 1 prices can be
/// optimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TheoremAssumptions {
    /// `W_e / 2 > eps q_1`: the smallest market can be served at the
    /// unconstrained price with fewer than all spots.
    pub demand_floor: bool,
    /// `(W_e^2 - W_d^2) / (4 eps) > p`: converting a spot that serves EVs at
    /// the unconstrained price beats keeping it for ICE drivers.
    pub conversion_margin: bool,
}

impl TheoremAssumptions {
    pub fn hold(&self) -> bool {
        self.demand_floor && self.conversion_margin
    }
}

pub fn verify_theorem_assumptions(
    params: &MonopolistParams,
    dist: &DemandDistribution,
) -> TheoremAssumptions {
    let (we, wd, eps) = (params.w_ev, params.w_ice, params.epsilon);
    TheoremAssumptions {
        demand_floor: we / 2.0 > eps * dist.size(1),
        conversion_margin: (we * we - wd * wd) / (4.0 * eps) > params.cost,
    }
}

/// Best feasible case at a fixed capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseChoice {
    pub case: PricingCase,
    pub price: f64,
    pub profit: f64,
}

/// Highest-profit feasible pricing case at capacity `n_ev`. Ties go to the
/// case serving less.
pub fn best_case_at(
    params: &MonopolistParams,
    dist: &DemandDistribution,
    n_ev: f64,
) -> Option<CaseChoice> {
    let mut best: Option<CaseChoice> = None;
    for case in PricingCase::ordered(dist.len()) {
        let Ok(price) = case_price(params, dist, n_ev, case) else {
            continue;
        };
        let profit = profit_at_price(params, dist, n_ev, price);
        if best.is_none_or(|b| profit > b.profit) {
            best = Some(CaseChoice {
                case,
                price,
                profit,
            });
        }
    }
    best
}

/// Brute-force optimum over a capacity grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    pub n_ev: f64,
    pub choice: CaseChoice,
}

/// Scans `N_e` on a grid of the given resolution, evaluating the best
/// feasible case at each point, then refines around the best grid point
/// with golden-section search.
pub fn grid_search(
    params: &MonopolistParams,
    dist: &DemandDistribution,
    resolution: f64,
) -> GridOptimum {
    let steps = libm::round(1.0 / resolution) as usize;
    let envelope = |n: f64| best_case_at(params, dist, n).map_or(f64::NEG_INFINITY, |c| c.profit);
    let mut best_k = 0;
    let mut best_value = envelope(0.0);
    for k in 1..=steps {
        let value = envelope(k as f64 / steps as f64);
        if value > best_value {
            best_k = k;
            best_value = value;
        }
    }
    let x = best_k as f64 / steps as f64;
    let lo = (x - resolution).max(0.0);
    let hi = (x + resolution).min(1.0);
    let refined = golden_section_max(envelope, lo, hi, REFINE_TOLERANCE);
    let n_ev = if refined.value > best_value {
        refined.x
    } else {
        x
    };
    let choice =
        best_case_at(params, dist, n_ev).expect("a pricing case is feasible at any capacity");
    GridOptimum { n_ev, choice }
}

/// Per-target Case 1 optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case1Candidate {
    pub target: usize,
    pub n_ev: f64,
    /// `None` when the Case 1 price is negative at this capacity.
    pub price: Option<f64>,
    pub profit: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Best of the per-target Case 1 closed forms.
    ClosedForm,
    /// Grid search; used when the hypotheses fail or the closed form is
    /// beaten by the grid.
    GridSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonopolistSolution {
    pub n_ev: f64,
    pub case: PricingCase,
    /// EV price.
    pub price: f64,
    /// ICE price, always `W_d / 2`.
    pub ice_price: f64,
    pub expected_profit: f64,
    pub method: SolveMethod,
    pub assumptions: TheoremAssumptions,
    pub candidates: Vec<Case1Candidate>,
    pub oracle: GridOptimum,
    /// Grid profit minus the returned profit.
    pub oracle_gap: f64,
}

impl MonopolistSolution {
    pub fn oracle_agrees(&self) -> bool {
        self.oracle_gap.abs() <= ORACLE_TOLERANCE
    }
}

pub fn case1_candidates(
    params: &MonopolistParams,
    dist: &DemandDistribution,
) -> Vec<Case1Candidate> {
    (1..=dist.len())
        .map(|t| {
            let n_ev = optimal_capacity_case1(params, dist, t).expect("target in range");
            let price = case1_price(params, dist, n_ev, t).ok();
            Case1Candidate {
                target: t,
                n_ev,
                price,
                profit: price.map(|c| profit_at_price(params, dist, n_ev, c)),
            }
        })
        .collect()
}

/// Optimal capacity and prices.
///
/// Under the two hypotheses the optimum is the best of the `n` Case 1
/// closed forms (ties toward fewer spots). The answer is always checked
/// against a brute-force grid search; if the grid finds more profit than
/// [`ORACLE_TOLERANCE`] allows, or the hypotheses fail, the grid optimum is
/// returned instead.
pub fn solve_monopolist(
    params: &MonopolistParams,
    dist: &DemandDistribution,
) -> Result<MonopolistSolution> {
    if dist.is_empty() {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: "at least one realization is required",
        });
    }
    let assumptions = verify_theorem_assumptions(params, dist);
    let candidates = case1_candidates(params, dist);
    let oracle = grid_search(params, dist, ORACLE_RESOLUTION);
    let ice_price = params.w_ice / 2.0;

    let closed_form = assumptions
        .hold()
        .then(|| {
            candidates
                .iter()
                .filter_map(|c| Some((c, c.price?, c.profit?)))
                .fold(
                    None::<(&Case1Candidate, f64, f64)>,
                    |best, next| match best {
                        Some(b) if b.2 > next.2 || (b.2 == next.2 && b.0.n_ev <= next.0.n_ev) => {
                            Some(b)
                        }
                        _ => Some(next),
                    },
                )
        })
        .flatten();

    if let Some((candidate, price, profit)) = closed_form {
        let gap = oracle.choice.profit - profit;
        if gap <= ORACLE_TOLERANCE {
            return Ok(MonopolistSolution {
                n_ev: candidate.n_ev,
                case: PricingCase::Case1(candidate.target),
                price,
                ice_price,
                expected_profit: profit,
                method: SolveMethod::ClosedForm,
                assumptions,
                candidates,
                oracle,
                oracle_gap: gap,
            });
        }
    }
    Ok(MonopolistSolution {
        n_ev: oracle.n_ev,
        case: oracle.choice.case,
        price: oracle.choice.price,
        ice_price,
        expected_profit: oracle.choice.profit,
        method: SolveMethod::GridSearch,
        assumptions,
        candidates,
        oracle,
        oracle_gap: 0.0,
    })
}
