use headfit::fit::{fit, FitConfig, FitTargets};
use headfit::io::{load_model_dir, read_json, read_mask, write_bytes, write_field, write_json, write_obj};
use headfit::model::PoseParams;
use headfit::raster::Camera;

use crate::args::{CommonArgs, FitArgs};
use crate::config::{config_hash, load_config, validated};
use crate::error::CliResult;
use crate::report::{trace_to_jsonl, EvalReport};

use super::require_out;

pub fn run(common: &CommonArgs, args: &FitArgs) -> CliResult<()> {
    let out = require_out(common)?;
    let loaded = load_config::<FitConfig>(common.config.as_deref())?;
    let mut config = loaded.value.clone();
    let full = read_mask(&args.mask_full)?;
    let hair = read_mask(&args.mask_hair)?;
    if !loaded.has("image_size") {
        config.image_size = full.size();
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    validated(config.validate())?;

    let (template, model) = load_model_dir(&args.model)?;
    let params: PoseParams = read_json(&args.params)?;
    let camera: Camera = read_json(&args.camera)?;
    let result = fit(&template, &model, &params, FitTargets { full: &full, hair: &hair }, &camera, &config)?;

    write_field(out, &result.field.displacements())?;
    if let Some(path) = &args.log {
        write_bytes(path, trace_to_jsonl(&result.trace).as_bytes())?;
    }
    if let Some(path) = &args.mesh_out {
        write_obj(path, &template.with_vertices(result.vertices.clone())?)?;
    }
    let iou_full = result.iou_full(&full)?;
    let iou_hair = result.iou_hair(&hair)?;
    log::info!(
        "loss {:.6e} -> {:.6e}, IoU full {iou_full:.4}, hair {iou_hair:.4}",
        result.initial_loss(),
        result.final_loss()
    );
    if let Some(path) = &args.report {
        let mut report = EvalReport::new("fit", config.seed, config_hash(&config));
        report.insert("iou_full", iou_full);
        report.insert("iou_hair", iou_hair);
        report.insert("initial_loss", result.initial_loss());
        report.insert("final_loss", result.final_loss());
        report.insert("loss_ratio", result.final_loss() / result.initial_loss());
        if let Some(last) = result.trace.last() {
            for (name, v) in &last.terms {
                report.insert(&format!("final_{name}"), *v);
            }
        }
        report.insert("routing_face_ear", result.routing.face_ear);
        report.insert("routing_hair_term_on_neck", result.routing.hair_term_on_neck);
        report.insert("routing_full_term_on_hair", result.routing.full_term_on_hair);
        write_json(path, &report)?;
    }
    Ok(())
}
