//! First stage of the competitive game: how many spots each firm converts
//! to chargers, anticipating the second-stage price equilibrium.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::market::{
    wardrop_quantities, CapacityProfile, DriverClass, Firm, MarketParams, PriceProfile,
    WardropOutcome,
};
use crate::pricing::{equilibrium_prices, PricingOutcome, PricingRegime};
use crate::search::scan_then_refine;
use crate::welfare::profits;

/// Government policy: mandated EV share, construction cost and subsidy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig {
    /// Minimum share `r` of each firm's spots that must carry a charger.
    pub mandate: f64,
    /// Intrinsic cost `t` of converting one spot.
    pub intrinsic_cost: f64,
    /// Per-spot subsidy `s`.
    pub subsidy: f64,
}

impl PolicyConfig {
    pub fn new(mandate: f64, intrinsic_cost: f64, subsidy: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mandate) {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: "must lie in [0, 1]",
            });
        }
        if !(intrinsic_cost.is_finite() && intrinsic_cost >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: "must be finite and non-negative",
            });
        }
        if !(subsidy.is_finite() && subsidy >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: "must be finite and non-negative",
            });
        }
        if subsidy > intrinsic_cost {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: "subsidy cannot exceed the intrinsic cost",
            });
        }
        Ok(PolicyConfig {
            mandate,
            intrinsic_cost,
            subsidy,
        })
    }

    /// Cost per converted spot borne by the firm, `t - s`.
    pub fn effective_cost(&self) -> f64 {
        self.intrinsic_cost - self.subsidy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CapacityRegime {
    /// Each firm converts exactly the mandated share.
    NaiveMandate,
    /// Each firm optimizes its conversions, with the mandate as a floor.
    OptimalCapacity,
}

impl CapacityRegime {
    pub fn name(self) -> &'static str {
        match self {
            CapacityRegime::NaiveMandate => "naive-mandate",
            CapacityRegime::OptimalCapacity => "optimal",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            CapacityRegime::NaiveMandate,
            CapacityRegime::OptimalCapacity,
        ]
        .into_iter()
        .find(|r| r.name() == name)
    }
}

impl fmt::Display for CapacityRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn naive_mandate_capacities(mandate: f64, delta: f64) -> Result<CapacityProfile> {
    if !(0.0..=1.0).contains(&mandate) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: "must lie in [0, 1]",
        });
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "must lie in [0, 1]",
        });
    }
    let endowment = [delta, 1.0 - delta];
    let ev = [mandate * endowment[0], mandate * endowment[1]];
    Ok(CapacityProfile {
        delta,
        ev,
        ice: [endowment[0] - ev[0], endowment[1] - ev[1]],
    })
}

/// Solved second stage for fixed capacities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondStage {
    pub pricing: PricingOutcome,
    pub outcome: WardropOutcome,
}

impl SecondStage {
    pub fn prices(&self) -> &PriceProfile {
        &self.pricing.prices
    }
}

pub fn solve_second_stage(
    params: &MarketParams,
    capacities: &CapacityProfile,
    regime: PricingRegime,
) -> Result<SecondStage> {
    let pricing = equilibrium_prices(params, capacities, regime)?;
    let outcome = wardrop_quantities(params, capacities, &pricing.prices);
    Ok(SecondStage { pricing, outcome })
}

/// Profit `m q_d + c q_e - p N_e` of one firm at the regime's second-stage
/// equilibrium.
pub fn firm_profit(
    params: &MarketParams,
    capacities: &CapacityProfile,
    regime: PricingRegime,
    conversion_cost: f64,
    firm: Firm,
) -> Result<f64> {
    let stage = solve_second_stage(params, capacities, regime)?;
    Ok(profits(capacities, stage.prices(), &stage.outcome, conversion_cost)[firm.index()])
}

/// Caveats attached to an optimal-capacity equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityWarning {
    /// Two-price parameters outside `alpha W_e <= 1`, `beta W_d <= 1`,
    /// `eps = 1`, where existence is not established.
    OutsideExistenceConditions,
    /// Optimal single pricing has no existence result for optimal capacity.
    UnsupportedTheory,
}

impl fmt::Display for CapacityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CapacityWarning::OutsideExistenceConditions => {
                f.write_str("parameters outside the two-price existence conditions")
            }
            CapacityWarning::UnsupportedTheory => f.write_str(
                "optimal capacity under optimal single pricing is unsupported by theory",
            ),
        }
    }
}

/// Whether the two-price existence conditions hold.
pub fn existence_conditions_hold(params: &MarketParams) -> bool {
    params.alpha * params.w_ev <= 1.0 && params.beta * params.w_ice <= 1.0 && params.epsilon == 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityOptions {
    /// Permit optimal single pricing (no existence theory).
    pub allow_unsupported: bool,
    /// Grid points of the pre-scan guarding each best-response search.
    pub prescan_points: usize,
    /// Bracket width at which the golden-section refinement stops.
    pub capacity_tolerance: f64,
    /// Max-norm change between rounds that counts as converged.
    pub profile_tolerance: f64,
    pub max_rounds: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            allow_unsupported: false,
            prescan_points: 1001,
            capacity_tolerance: 1e-8,
            profile_tolerance: 1e-7,
            max_rounds: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEquilibrium {
    pub capacities: CapacityProfile,
    pub rounds: usize,
    pub warnings: Vec<CapacityWarning>,
}

fn profile_with(delta: f64, ev: [f64; 2]) -> CapacityProfile {
    CapacityProfile {
        delta,
        ev,
        ice: [(delta - ev[0]).max(0.0), ((1.0 - delta) - ev[1]).max(0.0)],
    }
}

fn own_interval(policy: &PolicyConfig, delta: f64, firm: Firm) -> (f64, f64) {
    let endowment = match firm {
        Firm::One => delta,
        Firm::Two => 1.0 - delta,
    };
    (policy.mandate * endowment, endowment)
}

/// Profit of `firm` as a function of its own EV capacity, the rival's held
/// fixed. Unsolvable second stages score negative infinity.
fn own_capacity_profit(
    params: &MarketParams,
    policy: &PolicyConfig,
    delta: f64,
    regime: PricingRegime,
    firm: Firm,
    rival_ev: f64,
) -> impl Fn(f64) -> f64 {
    let params = *params;
    let cost = policy.effective_cost();
    move |own: f64| {
        let mut ev = [0.0; 2];
        ev[firm.index()] = own;
        ev[firm.other().index()] = rival_ev;
        let caps = profile_with(delta, ev);
        firm_profit(&params, &caps, regime, cost, firm).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Best EV capacity for `firm` in `[r N_i, N_i]` against a fixed rival
/// capacity: grid pre-scan, then golden-section refinement. Flat stretches
/// resolve toward fewer conversions.
pub fn best_response_capacity(
    params: &MarketParams,
    policy: &PolicyConfig,
    delta: f64,
    regime: PricingRegime,
    firm: Firm,
    rival_ev: f64,
    options: &CapacityOptions,
) -> f64 {
    let (lo, hi) = own_interval(policy, delta, firm);
    let profit = own_capacity_profit(params, policy, delta, regime, firm, rival_ev);
    scan_then_refine(
        profit,
        lo,
        hi,
        options.prescan_points,
        options.capacity_tolerance,
    )
    .x
}

/// Optimal-capacity equilibrium starting from the mandate floor.
pub fn optimal_capacity_equilibrium(
    params: &MarketParams,
    policy: &PolicyConfig,
    delta: f64,
    regime: PricingRegime,
) -> Result<CapacityEquilibrium> {
    let start = [
        own_interval(policy, delta, Firm::One).0,
        own_interval(policy, delta, Firm::Two).0,
    ];
    optimal_capacity_equilibrium_from(
        params,
        policy,
        delta,
        regime,
        start,
        &CapacityOptions::default(),
    )
}

/// Alternating (Gauss-Seidel) best responses in EV capacity from `start`.
pub fn optimal_capacity_equilibrium_from(
    params: &MarketParams,
    policy: &PolicyConfig,
    delta: f64,
    regime: PricingRegime,
    start: [f64; 2],
    options: &CapacityOptions,
) -> Result<CapacityEquilibrium> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "must lie in [0, 1]",
        });
    }
    let mut warnings = Vec::new();
    match regime {
        PricingRegime::OptimalSinglePrice if !options.allow_unsupported => {
            return Err(Error::UnsupportedRegime)
        }
        PricingRegime::OptimalSinglePrice => warnings.push(CapacityWarning::UnsupportedTheory),
        PricingRegime::TwoPrice if !existence_conditions_hold(params) => {
            warnings.push(CapacityWarning::OutsideExistenceConditions)
        }
        _ => {}
    }

    let mut ev = [0.0; 2];
    for firm in Firm::ALL {
        let (lo, hi) = own_interval(policy, delta, firm);
        ev[firm.index()] = start[firm.index()].clamp(lo, hi);
    }
    let mut history = Vec::new();
    history.push(ev);
    for round in 1..=options.max_rounds {
        let previous = ev;
        for firm in Firm::ALL {
            let rival = ev[firm.other().index()];
            ev[firm.index()] =
                best_response_capacity(params, policy, delta, regime, firm, rival, options);
        }
        history.push(ev);
        let change = (ev[0] - previous[0]).abs().max((ev[1] - previous[1]).abs());
        if change < options.profile_tolerance {
            return Ok(CapacityEquilibrium {
                capacities: profile_with(delta, ev),
                rounds: round,
                warnings,
            });
        }
    }
    Err(Error::CapacityNotConverged { history })
}

/// Largest profit gain `firm` could obtain by moving its EV capacity to any
/// of `points` evenly spaced values in its admissible interval.
pub fn capacity_deviation_gain(
    params: &MarketParams,
    policy: &PolicyConfig,
    capacities: &CapacityProfile,
    regime: PricingRegime,
    firm: Firm,
    points: usize,
) -> Result<f64> {
    let delta = capacities.delta;
    let current = firm_profit(params, capacities, regime, policy.effective_cost(), firm)?;
    let (lo, hi) = own_interval(policy, delta, firm);
    let profit = own_capacity_profit(
        params,
        policy,
        delta,
        regime,
        firm,
        capacities.ev[firm.other().index()],
    );
    let mut gain: f64 = 0.0;
    for k in 0..points {
        let x = if points == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (points - 1) as f64
        };
        gain = gain.max(profit(x) - current);
    }
    Ok(gain)
}

/// Largest second-stage revenue gain `firm` could obtain by shifting its
/// price for `class` by one of `points` evenly spaced offsets in
/// `[-radius, radius]`, all other prices fixed.
pub fn price_deviation_gain(
    params: &MarketParams,
    capacities: &CapacityProfile,
    prices: &PriceProfile,
    class: DriverClass,
    firm: Firm,
    radius: f64,
    points: usize,
) -> f64 {
    let Some(base) = prices.cell(class, firm) else {
        return 0.0;
    };
    let revenue = |prices: &PriceProfile| {
        let outcome = wardrop_quantities(params, capacities, prices);
        profits(capacities, prices, &outcome, 0.0)[firm.index()]
    };
    let current = revenue(prices);
    let mut gain: f64 = 0.0;
    for k in 0..points {
        let offset = -radius + 2.0 * radius * k as f64 / (points - 1) as f64;
        let mut moved = *prices;
        moved.class_mut(class)[firm.index()] = Some(base + offset);
        gain = gain.max(revenue(&moved) - current);
    }
    gain
}
