use std::path::Path;
use std::process::{Command, Output};

use headfit::geometry::Region;
use headfit::io::{load_basis_dir, read_field, read_json, read_mask, read_obj, read_regions};
use headfit_cli::report::{parse_jsonl, EvalReport};

const SYNTH: &str = r#"{"subdivisions": 2, "image_size": {"height": 32, "width": 32}, "raster": {"sigma": 1e-3, "epsilon": 1e-7}}"#;

fn headfit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_headfit")).args(args).current_dir(dir).output().unwrap()
}

#[track_caller]
fn ok(dir: &Path, args: &[&str]) {
    let out = headfit(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn synth(dir: &Path, seed: &str, out: &str) {
    std::fs::write(dir.join("synth.json"), SYNTH).unwrap();
    ok(dir, &["synth", "--seed", seed, "--config", "synth.json", "--out", out]);
}

fn fit(dir: &Path, fx: &str, iterations: usize, out: &str) {
    std::fs::write(dir.join("fit.json"), format!(r#"{{"iterations": {iterations}, "raster": {{"sigma": 1e-3, "epsilon": 1e-7}}}}"#)).unwrap();
    ok(
        dir,
        &[
            "fit", "--config", "fit.json", "--model", &format!("{fx}/model"), "--params", &format!("{fx}/params.json"),
            "--mask-full", &format!("{fx}/mask_full.pgm"), "--mask-hair", &format!("{fx}/mask_hair.pgm"), "--camera",
            &format!("{fx}/camera.json"), "--out", out, "--log", &format!("{out}.jsonl"), "--report", &format!("{out}.json"),
        ],
    );
}

#[test]
fn synth_is_deterministic_and_respects_masks() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, "5", "a");
    synth(d, "5", "b");
    for f in ["truth_field.bin", "mask_full.pgm", "mask_hair.pgm", "params.json", "model/v_base.bin", "fixture.json"] {
        assert_eq!(std::fs::read(d.join("a").join(f)).unwrap(), std::fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
    let field = read_field(&d.join("a/truth_field.bin")).unwrap();
    let regions = read_regions(&d.join("a/model/regions.json"), field.len()).unwrap();
    for (i, v) in field.iter().enumerate() {
        if regions.label(i).is_fixed() {
            assert_eq!(v.norm(), 0.0, "vertex {i}");
        }
    }
    assert!(field.iter().any(|v| v.norm() > 0.0));
    let full = read_mask(&d.join("a/mask_full.pgm")).unwrap();
    let hair = read_mask(&d.join("a/mask_hair.pgm")).unwrap();
    assert!(hair.values().iter().zip(full.values()).all(|(h, f)| *h <= f + 1.0 / 255.0));

    synth(d, "6", "c");
    assert_ne!(std::fs::read(d.join("a/truth_field.bin")).unwrap(), std::fs::read(d.join("c/truth_field.bin")).unwrap());
}

#[test]
fn fit_writes_field_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, "0", "fx");
    fit(d, "fx", 6, "field.bin");
    let field = read_field(&d.join("field.bin")).unwrap();
    let regions = read_regions(&d.join("fx/model/regions.json"), field.len()).unwrap();
    assert!(regions.indices(Region::Face).iter().all(|&i| field[i].norm() == 0.0));
    let trace = parse_jsonl(&std::fs::read_to_string(d.join("field.bin.jsonl")).unwrap()).unwrap();
    assert_eq!(trace.len(), 7);
    assert!(trace.iter().enumerate().all(|(i, l)| l.step == i));
    let report: EvalReport = read_json(&d.join("field.bin.json")).unwrap();
    assert_eq!(report.metadata.command, "fit");
    assert_eq!(report.metrics["initial_loss"], trace[0].report.total);
    assert_eq!(report.metrics["routing_face_ear"], 0.0);
}

#[test]
fn eval_of_identical_meshes_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, "0", "fx");
    ok(d, &["eval", "--mesh", "fx/truth_mesh.obj", "--reference", "fx/truth_mesh.obj", "--out", "r.json"]);
    let report: EvalReport = read_json(&d.join("r.json")).unwrap();
    assert_eq!(report.metrics["chamfer3d"], 0.0);
    assert_eq!(report.metadata.config_hash.len(), 64);
}

#[test]
fn render_of_empty_mesh_is_blank() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("empty.obj"), "").unwrap();
    std::fs::write(d.join("camera.json"), r#"{"scale": 1.0, "translation": [0.0, 0.0]}"#).unwrap();
    ok(d, &["render", "--mesh", "empty.obj", "--camera", "camera.json", "--height", "5", "--width", "7", "--out", "e.pgm"]);
    let bytes = std::fs::read(d.join("e.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n7 5\n255\n"));
    assert!(bytes[b"P5\n7 5\n255\n".len()..].iter().all(|&b| b == 0));
    assert_eq!(bytes.len(), b"P5\n7 5\n255\n".len() + 35);
}

#[test]
fn render_reproduces_synthetic_targets() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, "2", "fx");
    std::fs::write(d.join("render.json"), r#"{"raster": {"sigma": 1e-3, "epsilon": 1e-7}}"#).unwrap();
    let base = ["render", "--config", "render.json", "--mesh", "fx/truth_mesh.obj", "--regions", "fx/model/regions.json"];
    let tail = ["--camera", "fx/camera.json", "--height", "32", "--width", "32"];
    ok(d, &[&base[..], &tail[..], &["--out", "full.png"]].concat());
    ok(d, &[&base[..], &tail[..], &["--hair-only", "--out", "hair.pgm"]].concat());
    // OBJ stores f32 coordinates, so allow one grey level
    for (ours, target) in [("full.png", "fx/mask_full.pgm"), ("hair.pgm", "fx/mask_hair.pgm")] {
        let a = read_mask(&d.join(ours)).unwrap();
        let b = read_mask(&d.join(target)).unwrap();
        let worst = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst <= 1.0 / 255.0 + 1e-12, "{ours}: {worst}");
    }
}

#[test]
fn reconstruct_applies_field_to_posed_model() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, "1", "fx");
    ok(d, &["reconstruct", "--model", "fx/model", "--params", "fx/params.json", "--field", "fx/truth_field.bin", "--out", "m.obj"]);
    let ours = read_obj(&d.join("m.obj")).unwrap();
    let truth = read_obj(&d.join("fx/truth_mesh.obj")).unwrap();
    assert_eq!(ours.triangles, truth.triangles);
    let worst = ours.vertices.iter().zip(&truth.vertices).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");

    ok(d, &["reconstruct", "--model", "fx/model", "--out", "rest.obj"]);
    let rest = read_obj(&d.join("rest.obj")).unwrap();
    let template = read_obj(&d.join("fx/model/template.obj")).unwrap();
    assert_eq!(rest.vertices, template.vertices);
}

#[test]
fn distill_edit_and_basis_reconstruct_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for seed in ["0", "1", "2"] {
        synth(d, seed, &format!("fx{seed}"));
        std::fs::create_dir_all(d.join("fields")).unwrap();
        std::fs::copy(d.join(format!("fx{seed}/truth_field.bin")), d.join(format!("fields/{seed}.bin"))).unwrap();
    }
    ok(d, &["distill", "--fields", "fields", "--k-hair", "2", "--k-neck", "1", "--regions", "fx0/model/regions.json", "--out", "basis"]);
    let (basis, _) = load_basis_dir(&d.join("basis")).unwrap();
    assert_eq!(basis.rank(), 3);
    let report: EvalReport = read_json(&d.join("basis/report.json")).unwrap();
    assert_eq!(report.metrics["fields"], 3.0);
    for seed in 0..3 {
        assert!(d.join(format!("basis/coefficients/{seed}.json")).is_file());
    }

    ok(d, &["edit", "--basis", "basis", "--coeffs", "basis/coefficients/1.json", "--set", "0=max", "--set", "2=-0.5", "--coeffs-out", "c.json", "--out", "e.bin"]);
    let stats: Vec<headfit::basis::OrderStatistics> = read_json(&d.join("basis/statistics.json")).unwrap();
    let c: headfit_cli::commands::CoefficientsFile = read_json(&d.join("c.json")).unwrap();
    assert_eq!(c.coefficients[0], stats[0].max);
    assert_eq!(c.coefficients[2], -0.5);

    ok(d, &["reconstruct", "--model", "fx0/model", "--basis", "basis", "--coeffs", "c.json", "--out", "via_basis.obj"]);
    ok(d, &["reconstruct", "--model", "fx0/model", "--field", "e.bin", "--out", "via_field.obj"]);
    let a = read_obj(&d.join("via_basis.obj")).unwrap();
    let b = read_obj(&d.join("via_field.obj")).unwrap();
    let worst = a.vertices.iter().zip(&b.vertices).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");

    let bad = headfit(d, &["edit", "--basis", "basis", "--set", "9=1", "--out", "x.bin"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn invalid_config_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), r#"{"subdivisions": 2, "camera_scal": 0.5}"#).unwrap();
    let out = headfit(d, &["synth", "--config", "bad.json", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("camera_scal"));

    std::fs::write(d.join("bad.json"), r#"{"raster": {"sigma": -1.0, "epsilon": 1e-7}}"#).unwrap();
    let out = headfit(d, &["synth", "--config", "bad.json", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));

    std::fs::write(d.join("bad.json"), r#"{"weights": {"lambda_hair": 1}}"#).unwrap();
    let out = headfit(d, &["fit", "--config", "bad.json", "--model", "m", "--params", "p", "--mask-full", "f", "--mask-hair", "h", "--camera", "c", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weights"));

    assert_eq!(headfit(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(headfit(d, &["synth"]).status.code(), Some(2));
    assert_eq!(headfit(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = headfit(d, &["eval", "--mesh", "missing.obj", "--reference", "missing.obj"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.obj"));

    synth(d, "0", "fx");
    std::fs::write(d.join("big.pgm"), b"P5\n8 8\n255\n\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0").unwrap();
    let out = headfit(
        d,
        &[
            "fit", "--model", "fx/model", "--params", "fx/params.json", "--mask-full", "fx/mask_full.pgm", "--mask-hair",
            "big.pgm", "--camera", "fx/camera.json", "--out", "f.bin",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}
