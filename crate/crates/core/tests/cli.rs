mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flamelens::imaging::{load_image, load_mask};
use flamelens::training::load_matrix;
use flamelens::{BinaryMask, RgbImage};
use tempfile::TempDir;

use common::*;

fn flamelens(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flamelens"))
        .args(args)
        .current_dir(dir)
        .env_remove("FLAMELENS_JOBS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    (dir, path)
}

#[test]
fn unknown_preset_is_usage_error() {
    let (_t, dir) = scratch();
    write_png(&dir.join("a.png"), &orange_block().0);
    let o = flamelens(&["detect", "a.png", "--preset", "bogus", "--out", "m.png"], &dir);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!dir.join("m.png").exists());
}

#[test]
fn small_region_is_usage_error_without_output() {
    let (_t, dir) = scratch();
    write_png(&dir.join("s.png"), &training_image());
    let o = flamelens(
        &["train", "s.png", "--fire-region", "0,0,10,10", "--background-region", "40,0,40,40", "--out", "w.json"],
        &dir,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("region too small"), "{}", stderr(&o));
    assert!(!dir.join("w.json").exists());
}

#[test]
fn undecodable_image_is_runtime_error() {
    let (_t, dir) = scratch();
    std::fs::write(dir.join("bad.png"), b"not an image").unwrap();
    let o = flamelens(&["detect", "bad.png", "--out", "m.png"], &dir);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(!dir.join("m.png").exists());
}

#[test]
fn missing_image_is_runtime_error() {
    let (_t, dir) = scratch();
    let o = flamelens(&["detect", "nope.png", "--out", "m.png"], &dir);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn black_image_has_no_fire() {
    let (_t, dir) = scratch();
    write_png(&dir.join("black.png"), &RgbImage::filled(20, 10, [0.0; 3]));
    for method in ["linear", "nonlinear"] {
        let o = flamelens(&["detect", "black.png", "--method", method, "--out", "m.png"], &dir);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("fire pixels: 0 of 200 (0.0000)"), "{}", stdout(&o));
        assert_eq!(load_mask(&dir.join("m.png")).unwrap().count(), 0);
    }
}

#[test]
fn linear_eq10_covers_block() {
    let (_t, dir) = scratch();
    let (img, truth) = orange_block();
    write_png(&dir.join("a.png"), &img);
    let o = flamelens(
        &["detect", "a.png", "--method", "linear", "--preset", "eq10", "--out", "m.png", "--overlay", "o.png"],
        &dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(load_mask(&dir.join("m.png")).unwrap(), truth);
    let shown = load_image(&dir.join("o.png")).unwrap();
    assert_eq!(shown.pixel(30, 30), [1.0, 0.0, 0.0]);
}

#[test]
fn closing_flag_is_accepted() {
    let (_t, dir) = scratch();
    write_png(&dir.join("a.png"), &orange_block().0);
    let o = flamelens(&["detect", "a.png", "--close", "1", "--out", "m.png"], &dir);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = flamelens(&["detect", "a.png", "--close", "0", "--out", "m.png"], &dir);
    assert_eq!(o.status.code(), Some(2));
}

/// Writes `n` orange-block scenes with masks equal to the linear detector
/// output, and a manifest listing them.
fn self_consistent_dataset(dir: &Path, n: usize) {
    let mut manifest = String::from("# image\tmask\n");
    for i in 0..n {
        write_png(&dir.join(format!("f{i}.png")), &orange_block().0);
        let o = flamelens(
            &["detect", &format!("f{i}.png"), "--method", "linear", "--out", &format!("m{i}.png")],
            dir,
        );
        assert!(o.status.success());
        manifest.push_str(&format!("f{i}.png\tm{i}.png\n"));
    }
    std::fs::write(dir.join("list.tsv"), manifest).unwrap();
}

#[test]
fn eval_against_own_output_scores_perfectly() {
    let (_t, dir) = scratch();
    self_consistent_dataset(&dir, 2);
    let o = flamelens(&["eval", "list.tsv", "--method", "linear", "--report", "r.json"], &dir);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("F-score 1.000"), "{}", stdout(&o));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("r.json")).unwrap()).unwrap();
    assert_eq!(doc["report"]["aggregate"]["counts"]["tp"], 512);
    assert_eq!(doc["report"]["aggregate"]["counts"]["fp"], 0);
}

#[test]
fn eval_flags_missing_mask_and_continues() {
    let (_t, dir) = scratch();
    self_consistent_dataset(&dir, 3);
    std::fs::remove_file(dir.join("m1.png")).unwrap();
    let o = flamelens(&["eval", "list.tsv", "--method", "linear", "--report", "r.json"], &dir);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("1 pair(s) failed"), "{}", stdout(&o));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("r.json")).unwrap()).unwrap();
    let report = &doc["report"];
    assert_eq!(report["images"].as_array().unwrap().len(), 2);
    assert_eq!(report["failures"].as_array().unwrap().len(), 1);
    assert_eq!(report["aggregate"]["counts"]["tp"], 512);
}

#[test]
fn eval_with_nothing_scorable_fails() {
    let (_t, dir) = scratch();
    std::fs::write(dir.join("list.tsv"), "a.png\tb.png\n").unwrap();
    let o = flamelens(&["eval", "list.tsv"], &dir);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eval_report_body_is_reproducible() {
    let (_t, dir) = scratch();
    self_consistent_dataset(&dir, 2);
    let body = |name: &str| {
        let o = flamelens(&["eval", "list.tsv", "--report", name], &dir);
        assert!(o.status.success());
        let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join(name)).unwrap()).unwrap();
        doc["report"].to_string()
    };
    assert_eq!(body("a.json"), body("b.json"));
}

#[test]
fn eval_accepts_dataset_directory() {
    let (_t, dir) = scratch();
    std::fs::create_dir_all(dir.join("set/frames")).unwrap();
    std::fs::create_dir_all(dir.join("set/masks")).unwrap();
    let (img, truth) = orange_block();
    write_png(&dir.join("set/frames/a.png"), &img);
    write_mask(&dir.join("set/masks/a.png"), &truth);
    let o = flamelens(&["eval", "set", "--method", "linear"], &dir);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("F-score 1.000"), "{}", stdout(&o));
}

#[test]
fn overlay_paints_only_masked_pixels() {
    let (_t, dir) = scratch();
    let (img, truth) = orange_block();
    write_png(&dir.join("a.png"), &img);
    let original = load_image(&dir.join("a.png")).unwrap();

    write_mask(&dir.join("none.png"), &BinaryMask::filled(64, 64, false));
    let o = flamelens(&["overlay", "a.png", "none.png", "--out", "o.png"], &dir);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(load_image(&dir.join("o.png")).unwrap(), original);

    write_mask(&dir.join("all.png"), &BinaryMask::filled(64, 64, true));
    let o = flamelens(&["overlay", "a.png", "all.png", "--colour", "1,0,0", "--out", "o.png"], &dir);
    assert!(o.status.success());
    assert!(load_image(&dir.join("o.png")).unwrap().pixels().iter().all(|p| *p == [1.0, 0.0, 0.0]));

    write_mask(&dir.join("block.png"), &truth);
    let o = flamelens(&["overlay", "a.png", "block.png", "--color", "0,0,1", "--out", "o.png"], &dir);
    assert!(o.status.success());
    let shown = load_image(&dir.join("o.png")).unwrap();
    let changed = shown.pixels().iter().zip(original.pixels()).filter(|(a, b)| a != b).count();
    assert_eq!(changed, truth.count());
}

#[test]
fn overlay_size_mismatch_is_runtime_error() {
    let (_t, dir) = scratch();
    write_png(&dir.join("a.png"), &orange_block().0);
    write_mask(&dir.join("m.png"), &BinaryMask::filled(8, 8, true));
    let o = flamelens(&["overlay", "a.png", "m.png", "--out", "o.png"], &dir);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn trained_matrix_drives_detection() {
    let (_t, dir) = scratch();
    write_png(&dir.join("s.png"), &training_image());
    let fire = BinaryMask::from_fn(80, 40, |x, _| x < 40);
    let background = BinaryMask::from_fn(80, 40, |x, _| x >= 40);
    write_mask(&dir.join("fire.png"), &fire);
    write_mask(&dir.join("bg.png"), &background);
    let o = flamelens(
        &[
            "train", "s.png", "--fire-mask", "fire.png", "--background-mask", "bg.png", "--seed", "3",
            "--iterations", "20", "--out", "w.json",
        ],
        &dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("cost: 0"), "{out}");
    assert!(out.contains("matrix: w.json"), "{out}");
    load_matrix(&dir.join("w.json")).unwrap();

    let o = flamelens(&["detect", "s.png", "--matrix", "w.json", "--out", "m.png"], &dir);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = flamelens(&["detect", "s.png", "--matrix", "w.json", "--preset", "eq8", "--out", "m.png"], &dir);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_sets_pso_parameters() {
    let (_t, dir) = scratch();
    write_png(&dir.join("s.png"), &training_image());
    std::fs::write(dir.join("c.json"), r#"{"pso": {"swarm_size": 5, "max_iterations": 3}}"#).unwrap();
    let o = flamelens(
        &[
            "train", "s.png", "--fire-region", "0,0,40,40", "--background-region", "40,0,40,40", "--config", "c.json",
            "--out", "w.json",
        ],
        &dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::write(dir.join("bad.json"), r#"{"pso": {"swarms": 5}}"#).unwrap();
    let o = flamelens(
        &[
            "train", "s.png", "--fire-region", "0,0,40,40", "--background-region", "40,0,40,40", "--config",
            "bad.json", "--out", "w.json",
        ],
        &dir,
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
