use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use xyzkit::io::{read_depth_pfm, Absence, ReportDocument};

fn xyzkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xyzkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate_small(dir: &Path, seeds: &str) {
    let out = xyzkit(&["generate", "--seeds", seeds, "--resolution", "48x40", "--out", s(dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

/// Slopes steep enough that some seeds cannot keep a positive radius within
/// their single attempt.
fn write_config(dir: &Path, slope: [f64; 2]) -> std::path::PathBuf {
    let p = dir.join("scene.toml");
    fs::write(
        &p,
        format!(
            "[profile]\nterm_count = [1, 1]\nterm_kinds = [\"linear\"]\nlinear_slope = [{}, {}]\n\
             base_radius = [0.02, 0.02]\nheight = [0.25, 0.25]\nmax_retries = 0\n",
            slope[0], slope[1]
        ),
    )
    .unwrap();
    p
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&xyzkit(&[])), 1);
    assert_eq!(code(&xyzkit(&["generate", "--seeds", "3..x", "--out", "x"])), 1);
    assert_eq!(code(&xyzkit(&["generate", "--seeds", "1", "--resolution", "0x5", "--out", "x"])), 1);
    assert_eq!(code(&xyzkit(&["eval", "--gt", "a", "--pred", "b", "--mode", "scale"])), 1);
    assert_eq!(code(&xyzkit(&["--help"])), 0);
}

#[test]
fn unwritable_output_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("plain-file");
    fs::write(&file, "x").unwrap();
    let out = xyzkit(&["generate", "--seeds", "0", "--out", s(&file.join("sub"))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("output directory"));
}

#[test]
fn invalid_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "fill_fraction = [0.5, 1.5]\n").unwrap();
    let out = xyzkit(&["generate", "--seeds", "0", "--config", s(&cfg), "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2);
}

#[test]
fn some_failed_seeds_exit_3_and_keep_the_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), [-1.0, 1.0]);
    let out_dir = tmp.path().join("out");
    let out = xyzkit(&["generate", "--seeds", "0..5", "--config", s(&cfg), "--resolution", "32x32", "--out", s(&out_dir)]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let failed = stderr.lines().filter(|l| l.trim_start().starts_with("seed ")).count();
    let written = xyzkit::io::find_manifests(&out_dir).unwrap().len();
    assert!(failed > 0 && written > 0);
    assert_eq!(failed + written, 6);
}

#[test]
fn all_failed_seeds_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), [-1.0, -0.5]);
    let out = xyzkit(&["generate", "--seeds", "0..2", "--config", s(&cfg), "--out", s(&tmp.path().join("out"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_prediction_exits_3_with_the_row_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    generate_small(&gt, "1,2");
    let pred = tmp.path().join("pred");
    fs::create_dir_all(&pred).unwrap();
    for e in fs::read_dir(&gt).unwrap() {
        let p = e.unwrap().path();
        let name = p.file_name().unwrap().to_str().unwrap().to_string();
        if name.ends_with("_xyz.pfm") && name != "2_content_xyz.pfm" {
            fs::copy(&p, pred.join(&name)).unwrap();
        }
    }
    let report = tmp.path().join("report");
    let out = xyzkit(&["eval", "--gt", s(&gt), "--pred", s(&pred), "--mode", "content-scale", "--out", s(&report)]);
    assert_eq!(code(&out), 3);
    let doc: ReportDocument = serde_json::from_str(&fs::read_to_string(report.join("report.json")).unwrap()).unwrap();
    let failures: Vec<_> = doc.failures().collect();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0].seed, 2);
    assert!(matches!(&failures[0].result, Err(Absence::MissingPrediction(p)) if p.ends_with("2_content_xyz.pfm")));
    assert!(report.join("report.csv").is_file() && report.join("report.txt").is_file());

    // the remaining rows were still scored
    let ok = doc.rows.iter().filter(|r| r.result.is_ok()).count();
    assert!(ok >= 2);
}

#[test]
fn eval_without_manifests_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = xyzkit(&["eval", "--gt", s(tmp.path()), "--pred", s(tmp.path())]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no manifests"));
}

#[test]
fn render_replays_a_manifest_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    generate_small(&a, "4");
    let out = xyzkit(&["render", "--manifest", s(&a.join("4_manifest.json")), "--out", s(&b)]);
    assert_eq!(code(&out), 0);
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 13);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn loss_of_a_map_against_itself_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    generate_small(tmp.path(), "3");
    let xyz = tmp.path().join("3_vessel_xyz.pfm");
    let mask = tmp.path().join("3_vessel_mask.pgm");
    for kind in ["scale", "translation"] {
        let out = xyzkit(&["loss", "--pred", s(&xyz), "--gt", s(&xyz), "--mask", s(&mask), "--kind", kind]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("value: 0\n"), "{stdout}");
    }
}

#[test]
fn clean_depth_keeps_the_object_and_drops_far_pixels() {
    let tmp = tempfile::tempdir().unwrap();
    generate_small(tmp.path(), "6");
    let manifest = xyzkit::io::SceneManifest::read(tmp.path().join("6_manifest.json")).unwrap();
    let cam = &manifest.camera;
    let k = format!("{},{},{},{}", cam.fx(), cam.fy(), cam.cx(), cam.cy());
    let depth = tmp.path().join("6_vessel_depth.pfm");
    let mask = tmp.path().join("6_vessel_mask.pgm");
    let cleaned = tmp.path().join("cleaned.pfm");
    let args = ["clean-depth", "--depth", s(&depth), "--mask", s(&mask), "--intrinsics", &k];
    // vessels are at most 25 cm tall, so a 1 m radius keeps every pixel
    let out = xyzkit(&[&args[..], &["--radius", "1", "--out", s(&cleaned)]].concat());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (before, after) = (read_depth_pfm(&depth).unwrap(), read_depth_pfm(&cleaned).unwrap());
    assert_eq!(before.valid(), after.valid());

    let out = xyzkit(&[&args[..], &["--radius", "1e-4", "--out", s(&cleaned)]].concat());
    assert_eq!(code(&out), 0);
    assert!(read_depth_pfm(&cleaned).unwrap().valid_count() < before.valid_count());
}
