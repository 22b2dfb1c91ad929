use headfit::basis::{reconstruct_linear, vector_to_field};
use headfit::io::{load_basis_dir, load_model_dir, read_field, read_json, write_obj};
use headfit::model::PoseParams;

use crate::args::{CommonArgs, ReconstructArgs};
use crate::config::{load_config, EmptyConfig};
use crate::error::{CliError, CliResult};

use super::{read_coefficients, require_out};

pub fn run(common: &CommonArgs, args: &ReconstructArgs) -> CliResult<()> {
    let out = require_out(common)?;
    load_config::<EmptyConfig>(common.config.as_deref())?;
    let (template, model) = load_model_dir(&args.model)?;
    let params = match &args.params {
        Some(p) => read_json(p)?,
        None => PoseParams::zeros(&model),
    };
    let mut vertices = model.reconstruct(&params)?;
    let offsets = match (&args.field, &args.basis, &args.coeffs) {
        (Some(field), _, _) => Some(read_field(field)?),
        (None, Some(basis), Some(coeffs)) => {
            let (basis, _) = load_basis_dir(basis)?;
            Some(vector_to_field(&reconstruct_linear(&basis, &read_coefficients(coeffs)?)?)?)
        }
        (None, None, Some(_)) => return Err(CliError::config("--coeffs needs --basis")),
        _ => None,
    };
    if let Some(offsets) = offsets {
        if offsets.len() != vertices.len() {
            return Err(CliError::Runtime(anyhow::anyhow!(
                "offset field has {} vertices but the model has {}",
                offsets.len(),
                vertices.len()
            )));
        }
        for (v, d) in vertices.iter_mut().zip(&offsets) {
            *v += d;
        }
    }
    write_obj(out, &template.with_vertices(vertices)?)?;
    Ok(())
}
