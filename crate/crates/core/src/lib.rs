//! Equilibrium solvers for charger investment in parking markets.
//!
//! Two models are covered:
//!
//! * a two-firm market where EV drivers and ICE drivers compete for
//!   congestible parking, firms convert spots to chargers under a mandate or
//!   subsidy and then compete on price ([`market`], [`pricing`],
//!   [`capacity`], [`welfare`]);
//! * a monopolist converting spots before the size of the EV market is
//!   known ([`monopolist`]).
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
extern crate alloc;

pub mod capacity;
pub mod error;
pub mod market;
pub mod monopolist;
pub mod pricing;
pub mod search;
pub mod welfare;

pub use capacity::{
    best_response_capacity, capacity_deviation_gain, existence_conditions_hold, firm_profit,
    naive_mandate_capacities, optimal_capacity_equilibrium, optimal_capacity_equilibrium_from,
    price_deviation_gain, solve_second_stage, CapacityEquilibrium, CapacityOptions, CapacityRegime,
    CapacityWarning, PolicyConfig, SecondStage,
};
pub use error::{Error, Result};
pub use market::{
    check_no_profitable_undercut, marginal_utility, wardrop_quantities, wardrop_residual,
    CapacityProfile, ClassDemand, DriverClass, Firm, MarketParams, PriceProfile, WardropOutcome,
};
pub use monopolist::{
    solve_monopolist, verify_theorem_assumptions, DemandDistribution, MonopolistParams,
    MonopolistSolution, PricingCase,
};
pub use pricing::{
    best_response_price, equilibrium_prices, naive_single_price, optimal_single_price_equilibrium,
    single_price_residual, two_price_equilibrium, PricingOutcome, PricingRegime,
};
pub use welfare::{total_welfare, WelfareReport};
