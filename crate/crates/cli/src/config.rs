//! Flat `key = value` scenario files.
//!
//! One assignment per line, `#` starts a comment, sequences are comma
//! separated. Unknown and repeated keys are rejected. Every error carries the
//! offending key and, when the key appears in the file, its line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use evcharge_core::{
    CapacityRegime, DemandDistribution, MarketParams, MonopolistParams, PolicyConfig, PricingRegime,
};
use thiserror::Error;

const COMPETITIVE_KEYS: &[&str] = &[
    "model",
    "W_e",
    "W_d",
    "alpha",
    "beta",
    "epsilon",
    "delta",
    "r",
    "t",
    "s",
    "pricing",
    "capacity",
    "sweep",
    "sweep_min",
    "sweep_max",
    "sweep_step",
    "seed",
    "output",
];

const MONOPOLIST_KEYS: &[&str] = &[
    "model", "W_e", "W_d", "epsilon", "p", "t", "s", "q", "pi", "output",
];

/// Default spacing of the mandate grid.
pub const DEFAULT_R_STEP: f64 = 0.01;
/// Default spacing of the endowment grid.
pub const DEFAULT_DELTA_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    MissingKey,
    UnknownKey,
    DuplicateKey,
    MalformedLine,
    MalformedNumber,
    InvalidValue,
    InvariantViolation,
}

impl ErrorClass {
    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::MissingKey => "missing-key",
            ErrorClass::UnknownKey => "unknown-key",
            ErrorClass::DuplicateKey => "duplicate-key",
            ErrorClass::MalformedLine => "malformed-line",
            ErrorClass::MalformedNumber => "malformed-number",
            ErrorClass::InvalidValue => "invalid-value",
            ErrorClass::InvariantViolation => "invariant-violation",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{class}: {}{message}", location(.key, *.line))]
pub struct ConfigError {
    pub class: ErrorClass,
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

fn location(key: &str, line: Option<usize>) -> String {
    match (key.is_empty(), line) {
        (true, Some(line)) => format!("line {line}: "),
        (true, None) => String::new(),
        (false, Some(line)) => format!("`{key}` (line {line}): "),
        (false, None) => format!("`{key}`: "),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Mandate,
    Endowment,
    None,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Mandate => "r",
            SweepVariable::Endowment => "delta",
            SweepVariable::None => "none",
        }
    }
}

/// Inclusive grid `min + k * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Grid {
    pub fn single(value: f64) -> Self {
        Grid {
            min: value,
            max: value,
            step: 1.0,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        // Slack absorbs representation error in (max - min) / step.
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| self.min + k as f64 * self.step)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompetitiveScenario {
    pub params: MarketParams,
    pub delta: f64,
    pub policy: PolicyConfig,
    pub pricing: Vec<PricingRegime>,
    pub capacity: CapacityRegime,
    pub sweep: SweepVariable,
    pub grid: Grid,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonopolistScenario {
    pub params: MonopolistParams,
    pub distribution: DemandDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Competitive(CompetitiveScenario),
    Monopolist(MonopolistScenario),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: Model,
    pub output: Option<PathBuf>,
}

struct Entry {
    value: String,
    line: usize,
}

struct Fields {
    entries: BTreeMap<String, Entry>,
}

impl Fields {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError {
                    class: ErrorClass::MalformedLine,
                    key: String::new(),
                    line: Some(line),
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError {
                    class: ErrorClass::MalformedLine,
                    key: key.to_string(),
                    line: Some(line),
                    message: "key must be a single word".to_string(),
                });
            }
            if let Some(previous) = entries.get(key) {
                let Entry { line: first, .. } = previous;
                return Err(ConfigError {
                    class: ErrorClass::DuplicateKey,
                    key: key.to_string(),
                    line: Some(line),
                    message: format!("already set on line {first}"),
                });
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Fields { entries })
    }

    fn error(&self, class: ErrorClass, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            class,
            key: key.to_string(),
            line: self.entries.get(key).map(|e| e.line),
            message: message.into(),
        }
    }

    fn check_known(&self, allowed: &[&str], model: &str) -> Result<(), ConfigError> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                let message = if COMPETITIVE_KEYS.contains(&key.as_str())
                    || MONOPOLIST_KEYS.contains(&key.as_str())
                {
                    format!("not used by the {model} model")
                } else {
                    "unrecognized key".to_string()
                };
                return Err(self.error(ErrorClass::UnknownKey, key, message));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn required(&self, key: &str) -> Result<&str, ConfigError> {
        self.raw(key)
            .ok_or_else(|| self.error(ErrorClass::MissingKey, key, "required"))
    }

    fn number_from(&self, key: &str, text: &str) -> Result<f64, ConfigError> {
        match text.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(
                ErrorClass::MalformedNumber,
                key,
                format!("`{}` is not a finite number", text.trim()),
            )),
        }
    }

    fn number(&self, key: &str) -> Result<f64, ConfigError> {
        let text = self.required(key)?;
        self.number_from(key, text)
    }

    fn number_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.raw(key) {
            Some(text) => self.number_from(key, text),
            None => Ok(default),
        }
    }

    fn numbers(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let text = self.required(key)?;
        if text.is_empty() {
            return Err(self.error(ErrorClass::InvalidValue, key, "empty sequence"));
        }
        text.split(',')
            .map(|item| self.number_from(key, item))
            .collect()
    }

    fn invariant(&self, key: &str, err: evcharge_core::Error) -> ConfigError {
        self.error(ErrorClass::InvariantViolation, key, err.to_string())
    }
}

/// Config key named by a core validation error.
fn core_key(err: &evcharge_core::Error, fallback: &'static str) -> &'static str {
    match err {
        evcharge_core::Error::InvalidParameter { name, .. } => name,
        _ => fallback,
    }
}

pub fn load_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let fields = Fields::parse(text)?;
    let model = fields.required("model")?;
    let model = match model {
        "competitive" => {
            fields.check_known(COMPETITIVE_KEYS, "competitive")?;
            Model::Competitive(competitive(&fields)?)
        }
        "monopolist" => {
            fields.check_known(MONOPOLIST_KEYS, "monopolist")?;
            Model::Monopolist(monopolist(&fields)?)
        }
        other => {
            return Err(fields.error(
                ErrorClass::InvalidValue,
                "model",
                format!("`{other}` is not one of competitive, monopolist"),
            ))
        }
    };
    let output = fields.raw("output").map(PathBuf::from);
    Ok(Scenario { model, output })
}

fn competitive(fields: &Fields) -> Result<CompetitiveScenario, ConfigError> {
    let w_ev = fields.number("W_e")?;
    let w_ice = fields.number("W_d")?;
    let alpha = fields.number("alpha")?;
    let beta = fields.number("beta")?;
    let epsilon = fields.number("epsilon")?;
    let params = MarketParams::new(w_ev, w_ice, alpha, beta, epsilon)
        .map_err(|e| fields.invariant(core_key(&e, "W_e"), e))?;

    let delta = fields.number("delta")?;
    if !(0.0..=1.0).contains(&delta) {
        return Err(fields.error(
            ErrorClass::InvariantViolation,
            "delta",
            "must lie in [0, 1]",
        ));
    }
    let r = fields.number_or("r", 0.0)?;
    let t = fields.number_or("t", 0.0)?;
    let s = fields.number_or("s", 0.0)?;
    let policy = PolicyConfig::new(r, t, s).map_err(|e| fields.invariant(core_key(&e, "s"), e))?;

    let pricing = match fields.raw("pricing") {
        None => PricingRegime::ALL.to_vec(),
        Some(text) => parse_regimes(text).map_err(|name| {
            fields.error(
                ErrorClass::InvalidValue,
                "pricing",
                format!("`{name}` is not one of two-price, optimal-single, naive-single"),
            )
        })?,
    };
    let capacity = match fields.raw("capacity") {
        None => CapacityRegime::NaiveMandate,
        Some(text) => CapacityRegime::from_name(text).ok_or_else(|| {
            fields.error(
                ErrorClass::InvalidValue,
                "capacity",
                format!("`{text}` is not one of naive-mandate, optimal"),
            )
        })?,
    };

    let sweep = match fields.raw("sweep").unwrap_or("none") {
        "r" => SweepVariable::Mandate,
        "delta" => SweepVariable::Endowment,
        "none" => SweepVariable::None,
        other => {
            return Err(fields.error(
                ErrorClass::InvalidValue,
                "sweep",
                format!("`{other}` is not one of r, delta, none"),
            ))
        }
    };
    let grid = match sweep {
        SweepVariable::None => {
            for key in ["sweep_min", "sweep_max", "sweep_step"] {
                if fields.raw(key).is_some() {
                    return Err(fields.error(
                        ErrorClass::InvalidValue,
                        key,
                        "grid keys need `sweep = r` or `sweep = delta`",
                    ));
                }
            }
            Grid::single(0.0)
        }
        SweepVariable::Mandate => sweep_grid(fields, (0.0, 1.0), DEFAULT_R_STEP)?,
        SweepVariable::Endowment => sweep_grid(fields, (0.5, 0.9), DEFAULT_DELTA_STEP)?,
    };

    let seed = match fields.raw("seed") {
        None => 0,
        Some(text) => text.parse::<u64>().map_err(|_| {
            fields.error(
                ErrorClass::MalformedNumber,
                "seed",
                format!("`{text}` is not a non-negative integer"),
            )
        })?,
    };

    Ok(CompetitiveScenario {
        params,
        delta,
        policy,
        pricing,
        capacity,
        sweep,
        grid,
        seed,
    })
}

fn sweep_grid(fields: &Fields, range: (f64, f64), step: f64) -> Result<Grid, ConfigError> {
    let grid = Grid {
        min: fields.number_or("sweep_min", range.0)?,
        max: fields.number_or("sweep_max", range.1)?,
        step: fields.number_or("sweep_step", step)?,
    };
    if grid.step <= 0.0 {
        return Err(fields.error(
            ErrorClass::InvariantViolation,
            "sweep_step",
            "must be positive",
        ));
    }
    if grid.min > grid.max {
        return Err(fields.error(
            ErrorClass::InvariantViolation,
            "sweep_min",
            "must not exceed sweep_max",
        ));
    }
    if grid.min < 0.0 || grid.max > 1.0 {
        let key = if grid.min < 0.0 {
            "sweep_min"
        } else {
            "sweep_max"
        };
        return Err(fields.error(
            ErrorClass::InvariantViolation,
            key,
            "grid must lie in [0, 1]",
        ));
    }
    Ok(grid)
}

/// Parses a comma-separated regime list, deduplicated and in name order.
pub fn parse_regimes(text: &str) -> Result<Vec<PricingRegime>, String> {
    let mut regimes = Vec::new();
    for name in text.split(',').map(str::trim) {
        let regime = PricingRegime::from_name(name).ok_or_else(|| name.to_string())?;
        if !regimes.contains(&regime) {
            regimes.push(regime);
        }
    }
    regimes.sort_by_key(|r| r.name());
    Ok(regimes)
}

fn monopolist(fields: &Fields) -> Result<MonopolistScenario, ConfigError> {
    let w_ev = fields.number("W_e")?;
    let w_ice = fields.number("W_d")?;
    let epsilon = fields.number("epsilon")?;
    let cost = match (fields.raw("p"), fields.raw("t")) {
        (Some(_), Some(_)) => {
            return Err(fields.error(
                ErrorClass::InvalidValue,
                "p",
                "give either p or t, not both",
            ))
        }
        (Some(_), None) => {
            if fields.raw("s").is_some() {
                return Err(fields.error(ErrorClass::InvalidValue, "s", "s needs t, not p"));
            }
            fields.number("p")?
        }
        (None, Some(_)) => {
            let t = fields.number("t")?;
            let s = fields.number_or("s", 0.0)?;
            let policy =
                PolicyConfig::new(0.0, t, s).map_err(|e| fields.invariant(core_key(&e, "s"), e))?;
            policy.effective_cost()
        }
        (None, None) => {
            return Err(fields.error(ErrorClass::MissingKey, "p", "required (or t and s)"))
        }
    };
    let params = MonopolistParams::new(w_ev, w_ice, epsilon, cost)
        .map_err(|e| fields.invariant(core_key(&e, "W_e"), e))?;
    let q = fields.numbers("q")?;
    let pi = fields.numbers("pi")?;
    if q.len() != pi.len() {
        return Err(fields.error(
            ErrorClass::InvariantViolation,
            "pi",
            format!("{} probabilities for {} market sizes", pi.len(), q.len()),
        ));
    }
    let distribution =
        DemandDistribution::new(q, pi).map_err(|e| fields.invariant(core_key(&e, "q"), e))?;
    Ok(MonopolistScenario {
        params,
        distribution,
    })
}
