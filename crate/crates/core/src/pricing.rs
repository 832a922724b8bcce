//! Second-stage price competition for fixed capacities.
//!
//! Three regimes are supported:
//!
//! * **Two price**: separate EV and ICE prices. The classes decouple and each
//!   has a closed-form equilibrium.
//! * **Optimal single price**: one price per firm for both classes, chosen
//!   with full knowledge of EV demand. Solved by damped fixed-point iteration
//!   on the best-response map.
//! * **Naive single price**: one price per firm, kept at the level the firms
//!   would charge if every spot were a regular spot. Independent of the
//!   installed chargers.

use core::fmt;

use crate::error::{Error, Result};
use crate::market::{CapacityProfile, DriverClass, Firm, MarketParams, PriceProfile};

/// Tolerance on the fixed-point residual of an equilibrium price profile.
pub const PRICE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PricingRegime {
    TwoPrice,
    OptimalSinglePrice,
    NaiveSinglePrice,
}

impl PricingRegime {
    pub const ALL: [PricingRegime; 3] = [
        PricingRegime::TwoPrice,
        PricingRegime::OptimalSinglePrice,
        PricingRegime::NaiveSinglePrice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PricingRegime::TwoPrice => "two-price",
            PricingRegime::OptimalSinglePrice => "optimal-single",
            PricingRegime::NaiveSinglePrice => "naive-single",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for PricingRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Revenue-maximizing price for one class at a firm, given the rival's
/// capacity and price for that class. `None` when the firm has no spots of
/// that class. A rival without capacity or without a price exerts no
/// competitive pressure and the answer is the monopoly price `W/2`.
pub fn best_response_price(
    params: &MarketParams,
    class: DriverClass,
    own_capacity: f64,
    opp_capacity: f64,
    opp_price: Option<f64>,
) -> Option<f64> {
    if own_capacity <= 0.0 {
        return None;
    }
    let demand = params.demand(class);
    let (w, s) = (demand.intercept, demand.slope);
    let (opp, price) = match opp_price {
        Some(p) if opp_capacity > 0.0 => (opp_capacity / params.epsilon, p),
        _ => (0.0, 0.0),
    };
    Some(w * (1.0 + s * opp * price) / (2.0 * (s * w * opp + 1.0)))
}

/// Closed-form two-price equilibrium of one class with scaled capacities
/// `own = N_i / eps`, `opp = N_j / eps`.
fn duopoly_price(w: f64, s: f64, own: f64, opp: f64) -> f64 {
    (2.0 * s * w * w * own + s * w * w * opp + 2.0 * w)
        / (3.0 * s * s * w * w * own * opp + 4.0 * s * w * (own + opp) + 4.0)
}

/// Unique second-stage equilibrium when firms post separate EV and ICE
/// prices. Cells without spots carry no price; when both firms lack spots
/// of a class the whole class is marked as having no market.
pub fn two_price_equilibrium(params: &MarketParams, capacities: &CapacityProfile) -> PriceProfile {
    let mut prices = PriceProfile::default();
    for class in DriverClass::ALL {
        let demand = params.demand(class);
        let cap = capacities.class(class);
        let scaled = [cap[0] / params.epsilon, cap[1] / params.epsilon];
        let slot = prices.class_mut(class);
        for i in 0..2 {
            if cap[i] > 0.0 {
                slot[i] = Some(duopoly_price(
                    demand.intercept,
                    demand.slope,
                    scaled[i],
                    scaled[1 - i],
                ));
            }
        }
    }
    prices
}

/// Largest gap between a posted two-price profile and the best responses
/// to it, over all priced cells.
pub fn two_price_residual(
    params: &MarketParams,
    capacities: &CapacityProfile,
    prices: &PriceProfile,
) -> f64 {
    let mut residual: f64 = 0.0;
    for class in DriverClass::ALL {
        let cap = capacities.class(class);
        let price = prices.class(class);
        for firm in Firm::ALL {
            let (i, j) = (firm.index(), firm.other().index());
            if let (Some(p), Some(br)) = (
                price[i],
                best_response_price(params, class, cap[i], cap[j], price[j]),
            ) {
                residual = residual.max((p - br).abs());
            }
        }
    }
    residual
}

/// Best response of a firm that posts one price for both classes, given the
/// rival's single price. `None` when the firm owns no spots.
///
/// The first-order condition sums the two class revenues' derivatives. With
/// `A_k = s_k W_k (1 + N_kj / N_ki) + eps / N_ki` the interior Wardrop
/// denominator of class `k`, the answer is
/// `sum_k W_k (1 + s_k N_kj m_j / eps) / A_k` over
/// `2 sum_k (s_k W_k N_kj / eps + 1) / A_k`, summing over the classes for
/// which the firm has spots.
pub fn single_price_best_response(
    params: &MarketParams,
    capacities: &CapacityProfile,
    firm: Firm,
    opp_price: Option<f64>,
) -> Option<f64> {
    let (i, j) = (firm.index(), firm.other().index());
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for class in DriverClass::ALL {
        let cap = capacities.class(class);
        if cap[i] <= 0.0 {
            continue;
        }
        let demand = params.demand(class);
        let (w, s) = (demand.intercept, demand.slope);
        let (opp, m_j) = match opp_price {
            Some(p) if cap[j] > 0.0 => (cap[j] / params.epsilon, p),
            _ => (0.0, 0.0),
        };
        let opp_ratio = if opp > 0.0 { cap[j] / cap[i] } else { 0.0 };
        let a = s * w * (1.0 + opp_ratio) + params.epsilon / cap[i];
        numerator += w * (1.0 + s * opp * m_j) / a;
        denominator += (s * w * opp + 1.0) / a;
    }
    if denominator > 0.0 {
        Some(numerator / (2.0 * denominator))
    } else {
        None
    }
}

/// Settings of the damped fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSettings {
    /// Weight on the best response in each update.
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointSettings {
    fn default() -> Self {
        FixedPointSettings {
            damping: 0.5,
            tolerance: PRICE_TOLERANCE,
            max_iterations: 10_000,
        }
    }
}

/// Prices of a second-stage equilibrium together with its certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingOutcome {
    pub prices: PriceProfile,
    /// Fixed-point iterations used (zero for closed forms).
    pub iterations: usize,
    /// Largest gap to the regime's best-response map.
    pub residual: f64,
}

fn firm_has_spots(capacities: &CapacityProfile, firm: Firm) -> bool {
    capacities.ev[firm.index()] > 0.0 || capacities.ice[firm.index()] > 0.0
}

fn single_price_profile(capacities: &CapacityProfile, m: [Option<f64>; 2]) -> PriceProfile {
    let mut prices = PriceProfile { ev: m, ice: m };
    for firm in Firm::ALL {
        if !firm_has_spots(capacities, firm) {
            prices.ev[firm.index()] = None;
            prices.ice[firm.index()] = None;
        }
    }
    prices
}

/// Largest gap between a posted single price and the firm's best response.
pub fn single_price_residual(
    params: &MarketParams,
    capacities: &CapacityProfile,
    m: [f64; 2],
) -> f64 {
    let mut residual: f64 = 0.0;
    for firm in Firm::ALL {
        let (i, j) = (firm.index(), firm.other().index());
        if let Some(br) = single_price_best_response(params, capacities, firm, Some(m[j])) {
            residual = residual.max((br - m[i]).abs());
        }
    }
    residual
}

/// Optimal-single-price equilibrium from the monopoly ICE price `W_d / 2`.
pub fn optimal_single_price_equilibrium(
    params: &MarketParams,
    capacities: &CapacityProfile,
) -> Result<PricingOutcome> {
    let start = params.w_ice / 2.0;
    optimal_single_price_equilibrium_from(
        params,
        capacities,
        [start, start],
        FixedPointSettings::default(),
    )
}

/// Optimal-single-price equilibrium by damped simultaneous best responses
/// from an explicit starting pair. Stops once both firms' best-response
/// gaps fall below the tolerance.
pub fn optimal_single_price_equilibrium_from(
    params: &MarketParams,
    capacities: &CapacityProfile,
    start: [f64; 2],
    settings: FixedPointSettings,
) -> Result<PricingOutcome> {
    let present = [
        firm_has_spots(capacities, Firm::One),
        firm_has_spots(capacities, Firm::Two),
    ];
    let mut m = start;
    for firm in Firm::ALL {
        if !present[firm.index()] {
            m[firm.index()] = 0.0;
        }
    }
    let rival = |m: [f64; 2], firm: Firm| {
        let j = firm.other().index();
        present[j].then_some(m[j])
    };
    let mut residual = f64::INFINITY;
    for iteration in 0..=settings.max_iterations {
        let br = [
            single_price_best_response(params, capacities, Firm::One, rival(m, Firm::One)),
            single_price_best_response(params, capacities, Firm::Two, rival(m, Firm::Two)),
        ];
        residual = 0.0;
        for i in 0..2 {
            if let Some(b) = br[i] {
                residual = residual.max((b - m[i]).abs());
            }
        }
        if residual < settings.tolerance {
            let posted = [present[0].then_some(m[0]), present[1].then_some(m[1])];
            return Ok(PricingOutcome {
                prices: single_price_profile(capacities, posted),
                iterations: iteration,
                residual,
            });
        }
        for i in 0..2 {
            if let Some(b) = br[i] {
                m[i] += settings.damping * (b - m[i]);
            }
        }
    }
    Err(Error::PriceNotConverged {
        last: m,
        residual,
        iterations: settings.max_iterations,
    })
}

/// Naive single price: the ICE-only two-price equilibrium for the original
/// endowments `(delta, 1 - delta)`, applied to both classes. When one firm
/// owns everything it charges the monopoly price `W_d / 2` and the other
/// firm posts nothing.
pub fn naive_single_price(params: &MarketParams, delta: f64) -> PriceProfile {
    let w = params.w_ice;
    let m = if delta <= 0.0 {
        [None, Some(w / 2.0)]
    } else if delta >= 1.0 {
        [Some(w / 2.0), None]
    } else {
        let n1 = delta / params.epsilon;
        let n2 = (1.0 - delta) / params.epsilon;
        [
            Some(duopoly_price(w, params.beta, n1, n2)),
            Some(duopoly_price(w, params.beta, n2, n1)),
        ]
    };
    PriceProfile { ev: m, ice: m }
}

/// Gap between naive prices and the ICE best responses evaluated at the
/// original endowments.
fn naive_residual(params: &MarketParams, delta: f64, prices: &PriceProfile) -> f64 {
    let endowment = [delta, 1.0 - delta];
    let mut residual: f64 = 0.0;
    for i in 0..2 {
        if let (Some(p), Some(br)) = (
            prices.ice[i],
            best_response_price(
                params,
                DriverClass::Ice,
                endowment[i],
                endowment[1 - i],
                prices.ice[1 - i],
            ),
        ) {
            residual = residual.max((p - br).abs());
        }
    }
    residual
}

/// Second-stage equilibrium prices under the given regime.
pub fn equilibrium_prices(
    params: &MarketParams,
    capacities: &CapacityProfile,
    regime: PricingRegime,
) -> Result<PricingOutcome> {
    match regime {
        PricingRegime::TwoPrice => {
            let prices = two_price_equilibrium(params, capacities);
            Ok(PricingOutcome {
                residual: two_price_residual(params, capacities, &prices),
                prices,
                iterations: 0,
            })
        }
        PricingRegime::OptimalSinglePrice => optimal_single_price_equilibrium(params, capacities),
        PricingRegime::NaiveSinglePrice => {
            let prices = naive_single_price(params, capacities.delta);
            Ok(PricingOutcome {
                residual: naive_residual(params, capacities.delta, &prices),
                prices,
                iterations: 0,
            })
        }
    }
}
