//! Surplus, profit and concentration metrics of a solved market.

use crate::error::{Error, Result};
use crate::market::{
    CapacityProfile, DriverClass, Firm, MarketParams, PriceProfile, WardropOutcome,
};

/// Consumer surplus of one class with sequential parking: earlier drivers
/// face less congestion than later ones.
fn class_surplus(
    params: &MarketParams,
    class: DriverClass,
    capacities: &CapacityProfile,
    prices: &PriceProfile,
    outcome: &WardropOutcome,
) -> Result<f64> {
    let demand = params.demand(class);
    let q = outcome.class(class);
    let cap = capacities.class(class);
    let price = prices.class(class);
    let total = q[0] + q[1];
    let mut surplus = demand.intercept * (total - demand.slope * total * total / 2.0);
    for firm in Firm::ALL {
        let i = firm.index();
        if q[i] == 0.0 {
            continue;
        }
        let (true, Some(p)) = (cap[i] > 0.0, price[i]) else {
            return Err(Error::InconsistentOutcome { class, firm });
        };
        surplus -= params.epsilon * q[i] * q[i] / (2.0 * cap[i]) + p * q[i];
    }
    Ok(surplus)
}

/// Consumer surplus `(EV, ICE)`.
pub fn consumer_surplus(
    params: &MarketParams,
    capacities: &CapacityProfile,
    prices: &PriceProfile,
    outcome: &WardropOutcome,
) -> Result<(f64, f64)> {
    Ok((
        class_surplus(params, DriverClass::Ev, capacities, prices, outcome)?,
        class_surplus(params, DriverClass::Ice, capacities, prices, outcome)?,
    ))
}

/// Subsidy outlay `s (N_e1 + N_e2)`.
pub fn government_cost(capacities: &CapacityProfile, subsidy: f64) -> f64 {
    subsidy * (capacities.ev[0] + capacities.ev[1])
}

/// Sum of squared market shares, or `None` for an empty market.
pub fn herfindahl(q1: f64, q2: f64) -> Option<f64> {
    let total = q1 + q2;
    if total <= 0.0 {
        return None;
    }
    let (s1, s2) = (q1 / total, q2 / total);
    Some(s1 * s1 + s2 * s2)
}

/// Quantity-weighted mean price, or `None` for an empty market.
pub fn average_price(q1: f64, q2: f64, p1: f64, p2: f64) -> Option<f64> {
    let total = q1 + q2;
    if total <= 0.0 {
        return None;
    }
    Some((q1 * p1 + q2 * p2) / total)
}

/// Sum of the marginal congestion cost `eps q / N` over all firm-class
/// cells that have spots.
pub fn total_congestion(
    epsilon: f64,
    outcome: &WardropOutcome,
    capacities: &CapacityProfile,
) -> f64 {
    DriverClass::ALL
        .into_iter()
        .flat_map(|class| {
            let q = outcome.class(class);
            let cap = capacities.class(class);
            [(q[0], cap[0]), (q[1], cap[1])]
        })
        .filter(|&(_, n)| n > 0.0)
        .map(|(q, n)| epsilon * q / n)
        .sum()
}

/// Revenue minus conversion cost for each firm.
pub fn profits(
    capacities: &CapacityProfile,
    prices: &PriceProfile,
    outcome: &WardropOutcome,
    conversion_cost: f64,
) -> [f64; 2] {
    let mut out = [0.0; 2];
    for firm in Firm::ALL {
        let i = firm.index();
        let revenue: f64 = DriverClass::ALL
            .into_iter()
            .map(|class| prices.cell(class, firm).unwrap_or(0.0) * outcome.cell(class, firm))
            .sum();
        out[i] = revenue - conversion_cost * capacities.ev[i];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareReport {
    pub cs_ev: f64,
    pub cs_ice: f64,
    pub profit_1: f64,
    pub profit_2: f64,
    pub govt_cost: f64,
    pub total_welfare: f64,
    pub hhi_ev: Option<f64>,
    pub hhi_ice: Option<f64>,
    pub avg_price_ev: Option<f64>,
    pub avg_price_ice: Option<f64>,
    pub total_congestion: f64,
}

impl WelfareReport {
    pub fn total_profit(&self) -> f64 {
        self.profit_1 + self.profit_2
    }

    /// `total_welfare` minus the sum of its components.
    pub fn identity_residual(&self) -> f64 {
        self.total_welfare
            - (self.cs_ev + self.cs_ice + self.profit_1 + self.profit_2 - self.govt_cost)
    }
}

/// Assembles every welfare metric. Firms pay `intrinsic_cost - subsidy` per
/// converted spot and the government pays `subsidy`.
pub fn total_welfare(
    params: &MarketParams,
    capacities: &CapacityProfile,
    prices: &PriceProfile,
    outcome: &WardropOutcome,
    intrinsic_cost: f64,
    subsidy: f64,
) -> Result<WelfareReport> {
    let (cs_ev, cs_ice) = consumer_surplus(params, capacities, prices, outcome)?;
    let [profit_1, profit_2] = profits(capacities, prices, outcome, intrinsic_cost - subsidy);
    let govt_cost = government_cost(capacities, subsidy);
    let average = |class: DriverClass| {
        let q = outcome.class(class);
        let p = prices.class(class);
        average_price(q[0], q[1], p[0].unwrap_or(0.0), p[1].unwrap_or(0.0))
    };
    Ok(WelfareReport {
        cs_ev,
        cs_ice,
        profit_1,
        profit_2,
        govt_cost,
        total_welfare: cs_ev + cs_ice + profit_1 + profit_2 - govt_cost,
        hhi_ev: herfindahl(outcome.ev[0], outcome.ev[1]),
        hhi_ice: herfindahl(outcome.ice[0], outcome.ice[1]),
        avg_price_ev: average(DriverClass::Ev),
        avg_price_ice: average(DriverClass::Ice),
        total_congestion: total_congestion(params.epsilon, outcome, capacities),
    })
}
