//! Shared domain types for the two-firm parking market and the Wardrop
//! sorting of drivers across firms for fixed capacities and prices.
//!
//! Each firm splits its spots between charger-equipped spots (EV only) and
//! regular spots (ICE only). Drivers of a class only congest spots of their
//! own class at the same firm, so every computation here decomposes into two
//! independent single-class problems.

use core::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance on marginal utilities at a Wardrop point.
pub const WARDROP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DriverClass {
    Ev,
    Ice,
}

impl DriverClass {
    pub const ALL: [DriverClass; 2] = [DriverClass::Ev, DriverClass::Ice];
}

impl fmt::Display for DriverClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriverClass::Ev => f.write_str("EV"),
            DriverClass::Ice => f.write_str("ICE"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Firm {
    One,
    Two,
}

impl Firm {
    pub const ALL: [Firm; 2] = [Firm::One, Firm::Two];

    pub fn index(self) -> usize {
        match self {
            Firm::One => 0,
            Firm::Two => 1,
        }
    }

    pub fn other(self) -> Firm {
        match self {
            Firm::One => Firm::Two,
            Firm::Two => Firm::One,
        }
    }
}

impl fmt::Display for Firm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Firm::One => f.write_str("firm 1"),
            Firm::Two => f.write_str("firm 2"),
        }
    }
}

/// Linear inverse demand `W (1 - slope * Q)` for one driver class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassDemand {
    pub intercept: f64,
    pub slope: f64,
}

/// Demand and congestion parameters of the competitive market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    /// EV inverse-demand intercept.
    pub w_ev: f64,
    /// ICE inverse-demand intercept.
    pub w_ice: f64,
    /// EV inverse-demand slope.
    pub alpha: f64,
    /// ICE inverse-demand slope.
    pub beta: f64,
    /// Congestion cost at full occupancy.
    pub epsilon: f64,
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "must be finite and strictly positive",
        })
    }
}

impl MarketParams {
    pub fn new(w_ev: f64, w_ice: f64, alpha: f64, beta: f64, epsilon: f64) -> Result<Self> {
        let params = MarketParams {
            w_ev,
            w_ice,
            alpha,
            beta,
            epsilon,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        positive("W_e", self.w_ev)?;
        positive("W_d", self.w_ice)?;
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("epsilon", self.epsilon)?;
        if self.w_ev <= self.w_ice {
            return Err(Error::InvalidParameter {
                name: "W_e",
                reason: "must exceed W_d",
            });
        }
        Ok(())
    }

    pub fn demand(&self, class: DriverClass) -> ClassDemand {
        match class {
            DriverClass::Ev => ClassDemand {
                intercept: self.w_ev,
                slope: self.alpha,
            },
            DriverClass::Ice => ClassDemand {
                intercept: self.w_ice,
                slope: self.beta,
            },
        }
    }

    /// Copy of the parameters with one class's slope replaced.
    pub fn with_slope(&self, class: DriverClass, slope: f64) -> Self {
        let mut out = *self;
        match class {
            DriverClass::Ev => out.alpha = slope,
            DriverClass::Ice => out.beta = slope,
        }
        out
    }
}

/// Spot allocation of both firms. Total spots are normalized to one and
/// firm 1 owns `delta` of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityProfile {
    pub delta: f64,
    pub ev: [f64; 2],
    pub ice: [f64; 2],
}

const CAPACITY_SUM_TOLERANCE: f64 = 1e-12;

impl CapacityProfile {
    pub fn new(delta: f64, ev: [f64; 2], ice: [f64; 2]) -> Result<Self> {
        let profile = CapacityProfile { delta, ev, ice };
        profile.validate()?;
        Ok(profile)
    }

    /// Builds the profile from EV allocations; the remainder of each firm's
    /// endowment becomes regular spots.
    pub fn from_ev(delta: f64, ev: [f64; 2]) -> Result<Self> {
        let ice = [(delta - ev[0]).max(0.0), ((1.0 - delta) - ev[1]).max(0.0)];
        Self::new(delta, ev, ice)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: "must lie in [0, 1]",
            });
        }
        for value in self.ev.iter().chain(self.ice.iter()) {
            if !(0.0..=1.0).contains(value) {
                return Err(Error::InvalidParameter {
                    name: "capacity",
                    reason: "spot masses must lie in [0, 1]",
                });
            }
        }
        for firm in Firm::ALL {
            let i = firm.index();
            if (self.ev[i] + self.ice[i] - self.endowment(firm)).abs() > CAPACITY_SUM_TOLERANCE {
                return Err(Error::InvalidParameter {
                    name: "capacity",
                    reason: "EV and ICE spots must add up to the firm's endowment",
                });
            }
        }
        Ok(())
    }

    pub fn endowment(&self, firm: Firm) -> f64 {
        match firm {
            Firm::One => self.delta,
            Firm::Two => 1.0 - self.delta,
        }
    }

    pub fn class(&self, class: DriverClass) -> [f64; 2] {
        match class {
            DriverClass::Ev => self.ev,
            DriverClass::Ice => self.ice,
        }
    }

    pub fn cell(&self, class: DriverClass, firm: Firm) -> f64 {
        self.class(class)[firm.index()]
    }

    /// Firm labels exchanged.
    pub fn swapped(&self) -> Self {
        CapacityProfile {
            delta: 1.0 - self.delta,
            ev: [self.ev[1], self.ev[0]],
            ice: [self.ice[1], self.ice[0]],
        }
    }
}

/// Posted prices. `None` marks a cell with no market (no price posted).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PriceProfile {
    pub ev: [Option<f64>; 2],
    pub ice: [Option<f64>; 2],
}

impl PriceProfile {
    pub fn new(ev: [f64; 2], ice: [f64; 2]) -> Self {
        PriceProfile {
            ev: [Some(ev[0]), Some(ev[1])],
            ice: [Some(ice[0]), Some(ice[1])],
        }
    }

    pub fn class(&self, class: DriverClass) -> [Option<f64>; 2] {
        match class {
            DriverClass::Ev => self.ev,
            DriverClass::Ice => self.ice,
        }
    }

    pub fn class_mut(&mut self, class: DriverClass) -> &mut [Option<f64>; 2] {
        match class {
            DriverClass::Ev => &mut self.ev,
            DriverClass::Ice => &mut self.ice,
        }
    }

    pub fn cell(&self, class: DriverClass, firm: Firm) -> Option<f64> {
        self.class(class)[firm.index()]
    }

    pub fn swapped(&self) -> Self {
        PriceProfile {
            ev: [self.ev[1], self.ev[0]],
            ice: [self.ice[1], self.ice[0]],
        }
    }
}

/// Equilibrium masses of drivers parked at each firm. Quantities may exceed
/// capacity; the excess is cruising for a spot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WardropOutcome {
    pub ev: [f64; 2],
    pub ice: [f64; 2],
}

impl WardropOutcome {
    pub fn class(&self, class: DriverClass) -> [f64; 2] {
        match class {
            DriverClass::Ev => self.ev,
            DriverClass::Ice => self.ice,
        }
    }

    fn class_mut(&mut self, class: DriverClass) -> &mut [f64; 2] {
        match class {
            DriverClass::Ev => &mut self.ev,
            DriverClass::Ice => &mut self.ice,
        }
    }

    pub fn cell(&self, class: DriverClass, firm: Firm) -> f64 {
        self.class(class)[firm.index()]
    }

    pub fn swapped(&self) -> Self {
        WardropOutcome {
            ev: [self.ev[1], self.ev[0]],
            ice: [self.ice[1], self.ice[0]],
        }
    }
}

/// Value of parking for the marginal driver of `class` at `firm`.
pub fn marginal_utility(
    params: &MarketParams,
    class: DriverClass,
    firm: Firm,
    quantities: &WardropOutcome,
    capacities: &CapacityProfile,
    prices: &PriceProfile,
) -> Result<f64> {
    let demand = params.demand(class);
    let capacity = capacities.cell(class, firm);
    if capacity <= 0.0 {
        return Err(Error::InfiniteCongestion { class, firm });
    }
    let price = prices
        .cell(class, firm)
        .ok_or(Error::NoMarket { class, firm })?;
    let q = quantities.class(class);
    let own = q[firm.index()];
    Ok(demand.intercept * (1.0 - demand.slope * (q[0] + q[1]))
        - params.epsilon * own / capacity
        - price)
}

/// Wardrop sorting of one class of drivers over the two firms.
///
/// The problem is a two-variable linear complementarity problem with a
/// symmetric positive definite matrix, so exactly one of the four support
/// patterns (both firms, firm 1 only, firm 2 only, nobody) is consistent.
pub(crate) fn class_wardrop(
    demand: ClassDemand,
    epsilon: f64,
    capacity: [f64; 2],
    price: [Option<f64>; 2],
) -> [f64; 2] {
    let w = demand.intercept;
    let s = demand.slope;
    let open = |i: usize| -> Option<f64> {
        match price[i] {
            Some(p) if capacity[i] > 0.0 => Some(p),
            _ => None,
        }
    };
    // Alone at firm i, the marginal driver satisfies w(1 - s q) - eps q / N - p = 0.
    let alone = |i: usize, p: f64| -> f64 { ((w - p) / (s * w + epsilon / capacity[i])).max(0.0) };
    // Utility of the first driver at an empty firm when the other serves q.
    let entry_utility = |q_other: f64, p: f64| w * (1.0 - s * q_other) - p;

    match (open(0), open(1)) {
        (None, None) => [0.0, 0.0],
        (Some(p1), None) => [alone(0, p1), 0.0],
        (None, Some(p2)) => [0.0, alone(1, p2)],
        (Some(p1), Some(p2)) => {
            let q1 = interior_quantity(w, s, epsilon, capacity[0], capacity[1], p1, p2);
            let q2 = interior_quantity(w, s, epsilon, capacity[1], capacity[0], p2, p1);
            if q1 >= 0.0 && q2 >= 0.0 {
                return [q1, q2];
            }
            let only1 = alone(0, p1);
            if only1 > 0.0 && entry_utility(only1, p2) <= 0.0 {
                return [only1, 0.0];
            }
            let only2 = alone(1, p2);
            if only2 > 0.0 && entry_utility(only2, p1) <= 0.0 {
                return [0.0, only2];
            }
            [0.0, 0.0]
        }
    }
}

/// Closed-form quantity at a firm when both firms serve the class.
fn interior_quantity(
    w: f64,
    s: f64,
    epsilon: f64,
    own_capacity: f64,
    opp_capacity: f64,
    own_price: f64,
    opp_price: f64,
) -> f64 {
    let opp_scaled = opp_capacity / epsilon;
    let own_scaled = own_capacity / epsilon;
    (w * (1.0 + s * opp_scaled * (opp_price - own_price)) - own_price)
        / (s * w * (1.0 + opp_capacity / own_capacity) + 1.0 / own_scaled)
}

/// Equilibrium quantities for fixed capacities and prices. Total over all
/// valid inputs: empty cells and unpriced cells serve nobody.
pub fn wardrop_quantities(
    params: &MarketParams,
    capacities: &CapacityProfile,
    prices: &PriceProfile,
) -> WardropOutcome {
    let mut outcome = WardropOutcome::default();
    for class in DriverClass::ALL {
        *outcome.class_mut(class) = class_wardrop(
            params.demand(class),
            params.epsilon,
            capacities.class(class),
            prices.class(class),
        );
    }
    outcome
}

/// Largest absolute marginal utility over the cells that serve drivers.
pub fn wardrop_residual(
    params: &MarketParams,
    capacities: &CapacityProfile,
    prices: &PriceProfile,
    outcome: &WardropOutcome,
) -> f64 {
    let mut residual: f64 = 0.0;
    for class in DriverClass::ALL {
        for firm in Firm::ALL {
            if outcome.cell(class, firm) <= 0.0 {
                continue;
            }
            residual = match marginal_utility(params, class, firm, outcome, capacities, prices) {
                Ok(u) => residual.max(u.abs()),
                Err(_) => f64::INFINITY,
            };
        }
    }
    residual
}

/// Checks that no firm could profitably undercut its rival out of a class
/// market, which certifies the interior Wardrop expressions at a candidate
/// equilibrium. A firm that captured the whole class would charge the
/// monopoly price `W/2`, so the rival is only priced out if its price exceeds
/// `W/2 + eps q_i / N_i`.
pub fn check_no_profitable_undercut(
    params: &MarketParams,
    capacities: &CapacityProfile,
    prices: &PriceProfile,
) -> bool {
    let outcome = wardrop_quantities(params, capacities, prices);
    DriverClass::ALL.into_iter().all(|class| {
        let w = params.demand(class).intercept;
        let capacity = capacities.class(class);
        let price = prices.class(class);
        let q = outcome.class(class);
        if capacity.iter().any(|&n| n <= 0.0) {
            return true;
        }
        let (Some(p1), Some(p2)) = (price[0], price[1]) else {
            return true;
        };
        let bound = |i: usize| w / 2.0 + params.epsilon * q[i] / capacity[i];
        p2 <= bound(0) && p1 <= bound(1)
    })
}
