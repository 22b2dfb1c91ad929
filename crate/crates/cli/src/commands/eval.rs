use headfit::fit::compute_iou;
use headfit::geometry::chamfer3d;
use headfit::io::{read_field, read_mask, read_obj, write_json};

use crate::args::{CommonArgs, EvalArgs};
use crate::config::{config_hash, load_config, EvalConfig};
use crate::error::{CliError, CliResult};
use crate::report::{parse_jsonl, EvalReport};

pub fn run(common: &CommonArgs, args: &EvalArgs) -> CliResult<()> {
    let config = load_config::<EvalConfig>(common.config.as_deref())?.value;
    if !(config.iou_threshold > 0.0 && config.iou_threshold < 1.0) {
        return Err(CliError::config(format!("iou_threshold must lie in (0, 1), got {}", config.iou_threshold)));
    }
    let mut report = EvalReport::new("eval", common.seed.unwrap_or(0), config_hash(&config));

    if let (Some(mesh), Some(reference)) = (&args.mesh, &args.reference) {
        let a = read_obj(mesh)?.vertices;
        let b = read_obj(reference)?.vertices;
        report.insert("chamfer3d", chamfer3d(&a, &b)?);
    }
    if let (Some(mask), Some(target)) = (&args.mask, &args.target_mask) {
        let iou = compute_iou(&read_mask(mask)?, &read_mask(target)?, config.iou_threshold)?;
        report.insert("iou", iou);
    }
    if let (Some(field), Some(reference)) = (&args.field, &args.reference_field) {
        let a = read_field(field)?;
        let b = read_field(reference)?;
        if a.len() != b.len() {
            return Err(CliError::Runtime(anyhow::anyhow!("fields have {} and {} vertices", a.len(), b.len())));
        }
        let n = a.len().max(1) as f64;
        let err = (a.iter().zip(&b).map(|(x, y)| (x - y).norm_squared()).sum::<f64>() / n).sqrt();
        let scale = (b.iter().map(|y| y.norm_squared()).sum::<f64>() / n).sqrt();
        report.insert("field_rms_error", err);
        if scale > 0.0 {
            report.insert("field_relative_rms_error", err / scale);
        }
    }
    if let Some(path) = &args.trace {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        let trace = parse_jsonl(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        if let (Some(first), Some(last)) = (trace.first(), trace.last()) {
            report.insert("trace_steps", trace.len() as f64 - 1.0);
            report.insert("trace_initial_total", first.report.total);
            report.insert("trace_final_total", last.report.total);
            report.insert("trace_ratio", last.report.total / first.report.total);
        }
    }
    if report.metrics.is_empty() {
        return Err(CliError::config("nothing to evaluate: pass --mesh/--reference, --mask/--target-mask, --field/--reference-field or --trace"));
    }
    match &common.out {
        Some(out) => write_json(out, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?),
    }
    Ok(())
}
