use std::path::Path;

use nalgebra::DVector;

use headfit::basis::{edit_coefficient, vector_to_field, OrderStatistics};
use headfit::io::{load_basis_dir, read_json, write_field};

use crate::args::{CommonArgs, EditArgs};
use crate::config::{load_config, EmptyConfig};
use crate::error::{CliError, CliResult};

use super::{read_coefficients, require_out, write_coefficients, STATISTICS_FILE};

/// Value side of `--set k=VALUE`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SetValue {
    Number(f64),
    /// Index into `OrderStatistics::as_array`.
    Statistic(usize),
}

const STATISTIC_NAMES: [&str; 6] = ["min", "p10", "p25", "p75", "p90", "max"];

pub fn parse_set(s: &str) -> CliResult<(usize, SetValue)> {
    let bad = || CliError::config(format!("--set expects K=VALUE, got `{s}`"));
    let (k, v) = s.split_once('=').ok_or_else(bad)?;
    let k = k.trim().parse::<usize>().map_err(|_| bad())?;
    let v = v.trim();
    if let Some(i) = STATISTIC_NAMES.iter().position(|n| *n == v) {
        return Ok((k, SetValue::Statistic(i)));
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok((k, SetValue::Number(x))),
        _ => Err(bad()),
    }
}

fn load_statistics(basis: &Path) -> CliResult<Vec<OrderStatistics>> {
    Ok(read_json(&basis.join(STATISTICS_FILE))?)
}

pub fn run(common: &CommonArgs, args: &EditArgs) -> CliResult<()> {
    let out = require_out(common)?;
    load_config::<EmptyConfig>(common.config.as_deref())?;
    let sets = args.set.iter().map(|s| parse_set(s)).collect::<CliResult<Vec<_>>>()?;
    let (basis, _) = load_basis_dir(&args.basis)?;
    let mut coefficients = match &args.coeffs {
        Some(p) => read_coefficients(p)?,
        None => DVector::zeros(basis.rank()),
    };
    let mut statistics = None;
    let mut field = None;
    for (k, value) in sets {
        let value = match value {
            SetValue::Number(x) => x,
            SetValue::Statistic(i) => {
                if statistics.is_none() {
                    statistics = Some(load_statistics(&args.basis)?);
                }
                let stats = statistics.as_ref().expect("loaded above");
                let s = stats.get(k).ok_or_else(|| {
                    CliError::config(format!("coefficient {k} out of range ({} components)", stats.len()))
                })?;
                s.as_array()[i]
            }
        };
        let (edited, f) = edit_coefficient(&basis, &coefficients, k, value)
            .map_err(|e| CliError::config(format!("--set {k}: {e}")))?;
        coefficients = edited;
        field = Some(f);
    }
    let field = field.expect("clap requires at least one --set");
    write_field(out, &vector_to_field(&field)?)?;
    if let Some(path) = &args.coeffs_out {
        write_coefficients(path, &coefficients)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_numbers_and_statistics() {
        assert_eq!(parse_set("3=-1.5").unwrap(), (3, SetValue::Number(-1.5)));
        assert_eq!(parse_set("0=p90").unwrap(), (0, SetValue::Statistic(4)));
        assert_eq!(parse_set("2 = max").unwrap(), (2, SetValue::Statistic(5)));
        for bad in ["3", "x=1", "1=median", "1=nan", "-1=2"] {
            assert!(parse_set(bad).is_err(), "{bad}");
        }
    }
}
