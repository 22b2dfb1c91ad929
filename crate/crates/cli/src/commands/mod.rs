mod distill;
mod edit;
mod eval;
mod fit;
mod reconstruct;
mod render;
mod synth;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::args::{Command, CommonArgs};
use crate::error::{CliError, CliResult};

pub use distill::STATISTICS_FILE;

pub fn dispatch(common: &CommonArgs, command: &Command) -> CliResult<()> {
    match command {
        Command::Synth => synth::run(common),
        Command::Fit(a) => fit::run(common, a),
        Command::Distill(a) => distill::run(common, a),
        Command::Reconstruct(a) => reconstruct::run(common, a),
        Command::Render(a) => render::run(common, a),
        Command::Edit(a) => edit::run(common, a),
        Command::Eval(a) => eval::run(common, a),
    }
}

fn require_out(common: &CommonArgs) -> CliResult<&Path> {
    common.out.as_deref().ok_or_else(|| CliError::config("--out is required"))
}

/// `{"coefficients": [...]}` file used by `distill`, `edit` and `reconstruct`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsFile {
    pub coefficients: Vec<f64>,
}

fn read_coefficients(path: &Path) -> CliResult<nalgebra::DVector<f64>> {
    let f: CoefficientsFile = headfit::io::read_json(path)?;
    Ok(nalgebra::DVector::from_vec(f.coefficients))
}

fn write_coefficients(path: &Path, c: &nalgebra::DVector<f64>) -> CliResult<()> {
    Ok(headfit::io::write_json(path, &CoefficientsFile { coefficients: c.iter().copied().collect() })?)
}

