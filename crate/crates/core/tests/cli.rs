use std::fs;
use std::path::Path;

use fuselab::cam::{write_activations, ActivationTensor};
use fuselab::dataset::format::write_matrix;
use fuselab::runner::cli_main;
use ndarray::array;

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

fn setup(dir: &Path) {
    fs::write(dir.join("synth.kv"), "preset = complementary\nsamples_per_class = 30\nseed = 3\n").unwrap();
    fs::write(dir.join("run.cfg"), "dataset = bundle\nfolds = 3\nseed = 1\nsvm.max_passes = 5\n").unwrap();
    assert_eq!(cli_main(["fuselab", "synth", &s(&dir.join("synth.kv")), &s(&dir.join("bundle"))]), 0);
}

#[test]
fn synth_then_run_writes_every_report() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = dir.path().join("out");
    assert_eq!(cli_main(["fuselab", "run", &s(&dir.path().join("run.cfg")), "--out", &s(&out)]), 0);
    for f in ["grid.csv", "per_class.csv", "confusion.csv", "precision_recall.csv", "predictions.csv", "classes.csv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let grid = fs::read_to_string(out.join("grid.csv")).unwrap();
    // 3 rows x 7 columns plus the header
    assert_eq!(grid.lines().count(), 22);
    assert!(grid.starts_with("dataset,row,column,mean,std,cell,folds\n"));
    let per_class = fs::read_to_string(out.join("per_class.csv")).unwrap();
    assert_eq!(per_class.lines().count(), 1 + 3 + 2);
    assert!(per_class.lines().nth(4).unwrap().contains(",accuracy,"));
    assert!(per_class.lines().nth(5).unwrap().contains(",kappa,"));
}

#[test]
fn report_replays_stored_predictions() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = dir.path().join("out");
    let replay = dir.path().join("replay");
    assert_eq!(cli_main(["fuselab", "run", &s(&dir.path().join("run.cfg")), "--out", &s(&out)]), 0);
    assert_eq!(cli_main(["fuselab", "report", &s(&out), "--out", &s(&replay)]), 0);
    for f in ["grid.csv", "per_class.csv", "confusion.csv", "precision_recall.csv", "predictions.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(replay.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = dir.path().join("k4");
    let cfg = s(&dir.path().join("run.cfg"));
    assert_eq!(cli_main(["fuselab", "run", &cfg, "--folds", "4", "--seed", "9", "--out", &s(&out)]), 0);
    let grid = fs::read_to_string(out.join("grid.csv")).unwrap();
    let folds = grid.lines().nth(1).unwrap().rsplit(',').next().unwrap();
    assert_eq!(folds.split(';').count(), 4);
}

#[test]
fn single_fold_is_rejected_before_training() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = dir.path().join("never");
    assert_eq!(cli_main(["fuselab", "run", &s(&dir.path().join("run.cfg")), "--folds", "1", "--out", &s(&out)]), 1);
    assert!(!out.exists());
}

#[test]
fn missing_config_and_usage_errors() {
    assert_eq!(cli_main(["fuselab", "run", "/nonexistent/missing.cfg"]), 1);
    assert_eq!(cli_main(["fuselab", "frobnicate"]), 2);
    assert_eq!(cli_main(["fuselab", "run"]), 2);
    assert_eq!(cli_main(["fuselab", "run", "x.cfg", "--bogus"]), 2);
}

#[test]
fn empty_format_list_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    fs::write(dir.path().join("none.cfg"), "dataset = bundle\nfolds = 3\nformats =\nout = quiet\n").unwrap();
    assert_eq!(cli_main(["fuselab", "run", &s(&dir.path().join("none.cfg"))]), 0);
    assert!(!dir.path().join("quiet").exists());
}

#[test]
fn cam_writes_pgm_and_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let t = ActivationTensor::new(2, 2, 2, vec![0.0, 1.0, 1.0, 0.0, 2.0, 2.0, 3.0, -1.0]).unwrap();
    write_activations(dir.path().join("a.camt"), &t).unwrap();
    write_matrix(dir.path().join("w.fuse"), &array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let out = dir.path().join("map.pgm");
    let code = cli_main([
        "fuselab",
        "cam",
        &s(&dir.path().join("a.camt")),
        &s(&dir.path().join("w.fuse")),
        &s(&out),
        "--class",
        "0",
        "--size",
        "4x4",
        "--color",
    ]);
    assert_eq!(code, 0);
    let pgm = fs::read(&out).unwrap();
    assert!(pgm.starts_with(b"P5\n4 4\n255\n"));
    assert_eq!(pgm.len(), b"P5\n4 4\n255\n".len() + 16);
    assert!(out.with_extension("ppm").is_file());
    assert_eq!(cli_main(["fuselab", "cam", &s(&dir.path().join("a.camt")), &s(&dir.path().join("w.fuse")), &s(&out), "--class", "5"]), 1);
}

#[test]
fn custom_synth_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = "dataset = toy\nclasses = a, b\nsizes = 6, 4\nview.v.width = 2\nview.v.noise = 0.1\nview.v.mean.a = 1, 1\n";
    fs::write(dir.path().join("toy.kv"), spec).unwrap();
    let out = dir.path().join("toy");
    assert_eq!(cli_main(["fuselab", "synth", &s(&dir.path().join("toy.kv")), &s(&out)]), 0);
    let bundle = fuselab::dataset::load_bundle(&out).unwrap();
    assert_eq!(bundle.n_samples(), 10);
    assert_eq!(bundle.view("v").unwrap().width(), 2);
}
