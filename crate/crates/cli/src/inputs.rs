//! Input file formats.

use crate::CliError;
use qfilter::apps::BooleanFunction;
use qfilter::sim::C64;
use serde_json::Value;
use std::path::Path;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// A JSON list of non-negative weights.
pub fn read_weights(path: &Path) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = serde_json::from_value(read_json(path)?)
        .map_err(|e| CliError::Parse(format!("{}: expected a list of numbers: {e}", path.display())))?;
    if v.is_empty() || v.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(CliError::Parse(format!("{}: weights must be finite, non-negative and nonempty", path.display())));
    }
    Ok(v)
}

/// A JSON list of non-negative integers.
pub fn read_array(path: &Path) -> Result<Vec<u64>, CliError> {
    serde_json::from_value(read_json(path)?)
        .map_err(|e| CliError::Parse(format!("{}: expected a list of non-negative integers: {e}", path.display())))
}

/// A JSON list whose entries are real numbers or [re, im] pairs.
pub fn read_amplitudes(path: &Path) -> Result<Vec<C64>, CliError> {
    let bad = || CliError::Parse(format!("{}: expected numbers or [re, im] pairs", path.display()));
    let Value::Array(items) = read_json(path)? else {
        return Err(bad());
    };
    let amps = items
        .iter()
        .map(|item| match item {
            Value::Number(x) => x.as_f64().map(|re| C64::new(re, 0.0)).ok_or_else(bad),
            Value::Array(pair) if pair.len() == 2 => match (pair[0].as_f64(), pair[1].as_f64()) {
                (Some(re), Some(im)) => Ok(C64::new(re, im)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if amps.is_empty() || amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
        return Err(bad());
    }
    Ok(amps)
}

/// A text file with a truth table of '0'/'1' characters.
pub fn read_truth_table(path: &Path) -> Result<BooleanFunction, CliError> {
    read(path)?.parse().map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}
