use std::path::PathBuf;

use nalgebra::DMatrix;

use headfit::basis::{coefficient_statistics, field_to_vector, fit_pca, project, reconstruct_linear, BasisRanks};
use headfit::io::{read_field, read_regions, save_basis_dir, write_json, ModelManifest};

use crate::args::{CommonArgs, DistillArgs};
use crate::config::{config_hash, load_config, validated, EmptyConfig};
use crate::error::{CliError, CliResult};
use crate::report::EvalReport;

use super::{require_out, write_coefficients};

/// Per-coefficient order statistics written next to the basis.
pub const STATISTICS_FILE: &str = "statistics.json";

fn field_files(dir: &std::path::Path) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| anyhow::anyhow!("cannot list {}: {e}", dir.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| anyhow::anyhow!("cannot list {}: {e}", dir.display()))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "bin") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Runtime(anyhow::anyhow!("no .bin fields in {}", dir.display())));
    }
    Ok(files)
}

pub fn run(common: &CommonArgs, args: &DistillArgs) -> CliResult<()> {
    let out = require_out(common)?;
    let config = load_config::<EmptyConfig>(common.config.as_deref())?.value;
    let ranks = BasisRanks { hair: args.k_hair, neck: args.k_neck };
    if ranks.total() == 0 {
        return Err(CliError::config("k_hair + k_neck must be at least 1"));
    }

    let files = field_files(&args.fields)?;
    let fields = files.iter().map(|p| read_field(p)).collect::<Result<Vec<_>, _>>()?;
    let n = fields[0].len();
    let regions = match (&args.model, &args.regions) {
        (_, Some(path)) => read_regions(path, n)?,
        (Some(dir), None) => {
            let m: ModelManifest = headfit::io::read_json(&dir.join("manifest.json"))?;
            read_regions(&dir.join("regions.json"), m.vertex_count)?
        }
        (None, None) => return Err(CliError::config("one of --model or --regions is required")),
    };
    let vectors: Vec<_> = fields.iter().map(|f| field_to_vector(f)).collect();
    if let Some(bad) = vectors.iter().position(|v| v.len() != 3 * regions.len()) {
        return Err(CliError::Runtime(anyhow::anyhow!(
            "{} has {} vertices, expected {}",
            files[bad].display(),
            vectors[bad].len() / 3,
            regions.len()
        )));
    }
    let data = DMatrix::from_columns(&vectors);
    let basis = validated(fit_pca(&data, ranks, &regions, !args.no_center))?;
    save_basis_dir(out, &basis, &regions)?;

    let mut coefficients = Vec::with_capacity(files.len());
    let mut relative = 0.0;
    for (path, v) in files.iter().zip(&vectors) {
        let eta = project(&basis, v)?;
        let err = (reconstruct_linear(&basis, &eta)? - v).norm();
        relative += if v.norm() > 0.0 { err / v.norm() } else { 0.0 };
        let stem = path.file_stem().expect("listed files have names").to_string_lossy();
        write_coefficients(&out.join("coefficients").join(format!("{stem}.json")), &eta)?;
        coefficients.push(eta);
    }
    write_json(&out.join(STATISTICS_FILE), &coefficient_statistics(&coefficients)?)?;

    let mut report = EvalReport::new("distill", common.seed.unwrap_or(0), config_hash(&config));
    report.insert("fields", files.len() as f64);
    report.insert("rank", basis.rank() as f64);
    report.insert("mean_relative_rms_error", relative / files.len() as f64);
    if let Some(f) = basis.captured_fraction() {
        report.insert("captured_fraction", f);
    }
    write_json(&out.join("report.json"), &report)?;
    log::info!("distilled {} fields into {} components", files.len(), basis.rank());
    Ok(())
}
