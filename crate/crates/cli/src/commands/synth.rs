use std::collections::BTreeMap;

use serde::Serialize;

use crate::args::CommonArgs;
use crate::config::{config_hash, load_config, validated};
use crate::error::CliResult;
use headfit::geometry::Region;
use headfit::io::{save_model_dir, write_field, write_json, write_mask, write_obj};
use headfit::synth::{synth_head, SynthConfig};

use super::require_out;

/// `fixture.json`: what the fixture contains and how it was made.
#[derive(Serialize)]
struct Fixture {
    seed: u64,
    config_hash: String,
    vertex_count: usize,
    region_counts: BTreeMap<&'static str, usize>,
    partition: &'static str,
    truth_rms: f64,
    config: SynthConfig,
}

const PARTITION: &str = "ellipsoid directions: top cap hair, lower cap neck, front band face, two side patches ears";

pub fn run(common: &CommonArgs) -> CliResult<()> {
    let out = require_out(common)?;
    let config = load_config::<SynthConfig>(common.config.as_deref())?.value;
    validated(config.validate())?;
    let seed = common.seed.unwrap_or(0);
    let head = synth_head(seed, &config)?;

    save_model_dir(&out.join("model"), &head.template, &head.model)?;
    write_json(&out.join("params.json"), &head.params)?;
    write_json(&out.join("camera.json"), &head.camera)?;
    write_mask(&out.join("mask_full.pgm"), &head.target_full)?;
    write_mask(&out.join("mask_hair.pgm"), &head.target_hair)?;
    let truth = head.truth.displacements();
    write_field(&out.join("truth_field.bin"), &truth)?;
    write_obj(&out.join("truth_mesh.obj"), &head.template.with_vertices(head.deformed.clone())?)?;

    let regions = head.template.regions();
    let movable: Vec<usize> = (0..regions.len()).filter(|&i| !regions.label(i).is_fixed()).collect();
    let truth_rms = (movable.iter().map(|&i| truth[i].norm_squared()).sum::<f64>() / movable.len().max(1) as f64).sqrt();
    let fixture = Fixture {
        seed,
        config_hash: config_hash(&config),
        vertex_count: head.template.vertex_count(),
        region_counts: Region::ALL.iter().map(|&r| (r.name(), regions.count(r))).collect(),
        partition: PARTITION,
        truth_rms,
        config,
    };
    write_json(&out.join("fixture.json"), &fixture)?;
    log::info!("wrote synthetic head (seed {seed}) to {}", out.display());
    Ok(())
}
