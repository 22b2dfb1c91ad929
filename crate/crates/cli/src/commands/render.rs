use headfit::io::{load_mesh, read_json, write_mask};
use headfit::raster::{rasterize_triangles, Camera, ImageSize};

use crate::args::{CommonArgs, RenderArgs};
use crate::config::{load_config, validated, RenderConfig};
use crate::error::CliResult;

use super::require_out;

pub fn run(common: &CommonArgs, args: &RenderArgs) -> CliResult<()> {
    let out = require_out(common)?;
    let mut config = load_config::<RenderConfig>(common.config.as_deref())?.value;
    if let Some(h) = args.height {
        config.image_size.height = h;
    }
    if let Some(w) = args.width {
        config.image_size.width = w;
    }
    let size = validated(ImageSize::new(config.image_size.height, config.image_size.width))?;
    validated(config.raster.validate())?;

    let mesh = load_mesh(&args.mesh, args.regions.as_deref())?;
    let camera: Camera = read_json(&args.camera)?;
    let triangles = if args.hair_only { mesh.hair_render_triangles() } else { mesh.triangles().to_vec() };
    let render = rasterize_triangles(&triangles, mesh.vertices(), &camera, &config.raster, size)?;
    write_mask(out, render.occupancy())?;
    Ok(())
}
