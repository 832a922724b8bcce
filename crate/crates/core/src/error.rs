use alloc::vec::Vec;
use core::fmt;

use crate::market::{DriverClass, Firm};
use crate::monopolist::PricingCase;

/// Errors produced by the equilibrium solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A model parameter is out of its admissible range.
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    /// Marginal utility requested for a cell with no spots.
    InfiniteCongestion { class: DriverClass, firm: Firm },
    /// No price was posted for a cell that needs one.
    NoMarket { class: DriverClass, firm: Firm },
    /// Quantities are positive where capacity or price is missing.
    InconsistentOutcome { class: DriverClass, firm: Firm },
    /// Damped fixed-point iteration for the single-price game did not settle.
    PriceNotConverged {
        last: [f64; 2],
        residual: f64,
        iterations: usize,
    },
    /// Alternating capacity best responses did not settle.
    CapacityNotConverged { history: Vec<[f64; 2]> },
    /// The requested pricing regime has no existence result for optimal capacity.
    UnsupportedRegime,
    /// The monopolist pricing case cannot be realized at the given capacity.
    InfeasibleCase { case: PricingCase },
    /// Target index outside the admissible range for the case.
    InvalidTarget { target: usize, n: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::InfiniteCongestion { class, firm } => {
                write!(f, "infinite congestion: {class} capacity at {firm} is zero")
            }
            Error::NoMarket { class, firm } => {
                write!(f, "no {class} price posted at {firm}")
            }
            Error::InconsistentOutcome { class, firm } => write!(
                f,
                "{class} quantity at {firm} is positive without capacity or price"
            ),
            Error::PriceNotConverged {
                last,
                residual,
                iterations,
            } => write!(
                f,
                "single-price fixed point did not converge after {iterations} iterations \
                 (last iterate [{}, {}], residual {residual:e})",
                last[0], last[1]
            ),
            Error::CapacityNotConverged { history } => write!(
                f,
                "capacity best responses did not converge after {} rounds",
                history.len()
            ),
            Error::UnsupportedRegime => f.write_str(
                "optimal capacity under optimal single pricing requires the unsupported-theory flag",
            ),
            Error::InfeasibleCase { case } => write!(f, "{case} is infeasible at this capacity"),
            Error::InvalidTarget { target, n } => {
                write!(f, "target index {target} out of range for {n} realizations")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
