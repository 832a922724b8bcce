//! Batch runner for the charger investment models: loads flat scenario
//! files, solves sweeps in parallel and writes deterministic CSV tables.

pub mod app;
pub mod config;
pub mod monopoly;
pub mod sweep;
pub mod table;

pub use config::{load_scenario, ConfigError, ErrorClass, Scenario};
pub use table::{emit_csv, format_number, Cell, Table};
