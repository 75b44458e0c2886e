//! Sequence files: JSON documents or plain CSV moment lists.

use hankelshift::hankel::MomentSequence;
use hankelshift::measures::{moments_of, AtomicMeasure};
use hankelshift::numkit::{parse_rational, Rational, Scalar};
use hankelshift::shifts::{weights_to_moments, WeightSequence};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Weights,
    Moments,
    Measure,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Weights => "weights",
            Kind::Moments => "moments",
            Kind::Measure => "measure",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFile {
    kind: String,
    #[serde(default)]
    values: Option<Vec<Value>>,
    #[serde(default)]
    atoms: Option<Vec<Value>>,
    #[serde(default)]
    densities: Option<Vec<Value>>,
    #[serde(default)]
    exact: Option<bool>,
    /// Weights only: `values` already holds `α_n^2`.
    #[serde(default)]
    squared: bool,
    /// Measure only: last moment index to generate.
    #[serde(default)]
    horizon: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Carrier {
    Numbers,
    Strings,
}

/// A parsed file, values kept exact until the mode is fixed.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub kind: Kind,
    /// Weights: `α_n` (or `α_n^2` when `squared`); moments: `γ_n`; measure: atoms.
    pub values: Vec<Rational>,
    pub densities: Vec<Rational>,
    pub squared: bool,
    pub horizon: Option<usize>,
    /// Mode requested by the file: explicit `exact`, else exact iff values are strings.
    pub file_exact: bool,
    pub has_strings: bool,
    pub csv: bool,
}

pub fn parse(text: &str) -> Result<Loaded, CliError> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}

fn parse_json(text: &str) -> Result<Loaded, CliError> {
    let file: SequenceFile = serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!("line {}, column {}: {}", e.line(), e.column(), strip_position(&e.to_string())))
    })?;
    let kind = match file.kind.as_str() {
        "weights" => Kind::Weights,
        "moments" => Kind::Moments,
        "measure" => Kind::Measure,
        other => return Err(CliError::Input(format!("unknown kind {other:?}; expected weights, moments or measure"))),
    };
    let (primary, densities) = match kind {
        Kind::Measure => {
            if file.values.is_some() {
                return Err(CliError::Input("a measure takes atoms and densities, not values".into()));
            }
            let atoms = file.atoms.ok_or_else(|| CliError::Input("measure without atoms".into()))?;
            let densities = file.densities.ok_or_else(|| CliError::Input("measure without densities".into()))?;
            (atoms, densities)
        }
        _ => {
            if file.atoms.is_some() || file.densities.is_some() {
                return Err(CliError::Input(format!("{} take values, not atoms/densities", kind.as_str())));
            }
            (file.values.ok_or_else(|| CliError::Input("missing values".into()))?, Vec::new())
        }
    };
    if file.squared && kind != Kind::Weights {
        return Err(CliError::Input("squared applies to weights only".into()));
    }
    if file.horizon.is_some() && kind != Kind::Measure {
        return Err(CliError::Input("horizon applies to measures only".into()));
    }
    let carrier = carrier_of(primary.iter().chain(&densities))?;
    let has_strings = carrier == Some(Carrier::Strings);
    if has_strings && file.exact == Some(false) {
        return Err(CliError::Input("\"p/q\" strings require exact mode, but the file sets exact: false".into()));
    }
    let values = convert("values", &primary)?;
    let densities = convert("densities", &densities)?;
    Ok(Loaded {
        kind,
        values,
        densities,
        squared: file.squared,
        horizon: file.horizon,
        file_exact: file.exact.unwrap_or(has_strings),
        has_strings,
        csv: false,
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn carrier_of<'a>(values: impl Iterator<Item = &'a Value>) -> Result<Option<Carrier>, CliError> {
    let mut seen = None;
    for (i, v) in values.enumerate() {
        let c = match v {
            Value::Number(_) => Carrier::Numbers,
            Value::String(_) => Carrier::Strings,
            other => return Err(CliError::Input(format!("entry {i} is neither a number nor a string: {other}"))),
        };
        match seen {
            None => seen = Some(c),
            Some(s) if s != c => {
                return Err(CliError::Input("mixed representations: use all numbers or all \"p/q\" strings".into()))
            }
            _ => {}
        }
    }
    Ok(seen)
}

fn convert(field: &str, values: &[Value]) -> Result<Vec<Rational>, CliError> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let text = match v {
                Value::Number(n) => n.to_string(),
                Value::String(s) => s.clone(),
                _ => unreachable!("carrier checked"),
            };
            parse_rational(&text).map_err(|e| CliError::Input(format!("{field}[{i}]: {e}")))
        })
        .collect()
}

fn parse_csv(text: &str) -> Result<Loaded, CliError> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let cell = line.trim().trim_end_matches(',').trim();
        if cell.is_empty() || cell.starts_with('#') {
            continue;
        }
        if cell.contains('/') {
            return Err(CliError::Input(format!("line {}: CSV takes plain decimals; use JSON for \"p/q\"", i + 1)));
        }
        let v = parse_rational(cell).map_err(|e| CliError::Input(format!("line {}, column 1: {e}", i + 1)))?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::Input("CSV file holds no values".into()));
    }
    Ok(Loaded {
        kind: Kind::Moments,
        values,
        densities: Vec::new(),
        squared: false,
        horizon: None,
        file_exact: false,
        has_strings: false,
        csv: true,
    })
}

/// Scalars the CLI can run on.
pub trait Backend: Scalar {
    fn from_rational(r: &Rational) -> Self;
}

impl Backend for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl Backend for f64 {
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
}

/// The data in both forms the analyses use.
pub struct Sequence<S> {
    pub gamma: MomentSequence<S>,
    /// Squared weights, when the moments admit them (always, for valid input).
    pub alpha: Option<WeightSequence<S>>,
    /// Input measure, when one was given.
    pub measure: Option<AtomicMeasure<S>>,
}

pub fn build<S: Backend>(loaded: &Loaded) -> Result<Sequence<S>, CliError> {
    let lift = |v: &[Rational]| v.iter().map(S::from_rational).collect::<Vec<S>>();
    let input = |e: hankelshift::Error| CliError::Input(e.to_string());
    match loaded.kind {
        Kind::Weights => {
            let values = lift(&loaded.values);
            let alpha = if loaded.squared {
                WeightSequence::from_squared(values)
            } else {
                WeightSequence::from_weights(values)
            }
            .map_err(input)?;
            Ok(Sequence { gamma: weights_to_moments(&alpha), alpha: Some(alpha), measure: None })
        }
        Kind::Moments => {
            let gamma = MomentSequence::new(lift(&loaded.values)).map_err(input)?;
            let alpha = hankelshift::shifts::moments_to_weights(&gamma).ok();
            Ok(Sequence { gamma, alpha, measure: None })
        }
        Kind::Measure => {
            let mu = AtomicMeasure::new(lift(&loaded.values), lift(&loaded.densities)).map_err(input)?;
            let horizon = loaded.horizon.unwrap_or(2 * mu.len() + 2);
            let gamma = moments_of(&mu, horizon);
            let alpha = hankelshift::shifts::moments_to_weights(&gamma).ok();
            Ok(Sequence { gamma, alpha, measure: Some(mu) })
        }
    }
}
