use std::path::{Path, PathBuf};
use std::process::Command;

use broadcd::commands;
use broadcd::synth::Rect;
use broadcd::{RunConfig, Stage};
use broadcd_core::broadnet;
use broadcd_core::eval::{self, SWEEP_HEADER};
use broadcd_core::imagery::{self, Standardization};
use broadcd_core::resample::ImbalanceRatio;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_broadcd"))
}

fn synth(dir: &Path, seed: u64) -> RunConfig {
    let mut cfg = RunConfig {
        seed,
        out: Some(dir.to_path_buf()),
        ..Default::default()
    };
    cfg.synth.noise = 2.0;
    commands::cmd_synth(&cfg, &mut std::io::sink()).unwrap();
    RunConfig {
        seed,
        ref_path: Some(dir.join("ref.png")),
        test_path: Some(dir.join("test.png")),
        mask_path: Some(dir.join("mask.png")),
        ..Default::default()
    }
}

fn train(cfg: &RunConfig, out: PathBuf) -> broadnet::BroadNetModel {
    let cfg = RunConfig {
        out: Some(out),
        ..cfg.clone()
    };
    commands::cmd_train(&cfg, &mut std::io::sink()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_via_binary_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let synth = bin()
        .args(["synth", "--out", s(d), "--seed", "42"])
        .output()
        .unwrap();
    assert!(synth.status.success());
    let run = |name: &str| {
        let out = bin()
            .args([
                "train",
                "--ref",
                s(&d.join("ref.png")),
                "--test",
                s(&d.join("test.png")),
            ])
            .args([
                "--mask",
                s(&d.join("mask.png")),
                "--ir",
                "10:1",
                "--strategy",
                "smote",
            ])
            .args([
                "--layers",
                "5",
                "--compression",
                "0.9",
                "--seed",
                "42",
                "--out",
                s(&d.join(name)),
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.starts_with("layer 1 width 8 cv_afs "), "{stdout}");
        std::fs::read(d.join(name)).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn missing_mask_fails_in_imagery_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synth(dir.path(), 1);
    let out = bin()
        .args([
            "train",
            "--ref",
            s(cfg.ref_path.as_ref().unwrap()),
            "--test",
        ])
        .arg(cfg.test_path.as_ref().unwrap())
        .args([
            "--mask",
            s(&dir.path().join("absent.png")),
            "--out",
            s(&dir.path().join("m.json")),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("imagery stage"));

    let no_flag = RunConfig {
        mask_path: None,
        out: Some(dir.path().join("m.json")),
        ..cfg
    };
    let err = commands::cmd_train(&no_flag, &mut std::io::sink()).unwrap_err();
    assert_eq!(err.stage, Stage::Imagery);
    assert!(err.to_string().contains("--mask"));
}

#[test]
fn bad_inputs_give_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corrupt = d.join("corrupt.json");
    std::fs::write(&corrupt, "{\"version\": 1, \"config\":").unwrap();
    let cfg = synth(d, 2);
    let out = bin()
        .args([
            "predict",
            "--model",
            s(&corrupt),
            "--ref",
            s(cfg.ref_path.as_ref().unwrap()),
        ])
        .args([
            "--test",
            s(cfg.test_path.as_ref().unwrap()),
            "--out",
            s(&d.join("p.png")),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model stage"));

    let out = bin()
        .args(["synth", "--out", s(&d.join("g")), "--rect", "60,60,8,8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("synth stage"));

    let cfg_file = d.join("run.cfg");
    std::fs::write(&cfg_file, "colour = blue\n").unwrap();
    let out = bin()
        .args(["synth", "--config", s(&cfg_file), "--out", s(d)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key `colour`"));
}

#[test]
fn synth_writes_rectangle_mask() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig {
        out: Some(dir.path().to_path_buf()),
        seed: 3,
        ..Default::default()
    };
    cfg.synth.rect = Rect {
        x: 10,
        y: 10,
        width: 16,
        height: 16,
    };
    commands::cmd_synth(&cfg, &mut std::io::sink()).unwrap();
    let mask = imagery::binarize_mask(dir.path().join("mask.png")).unwrap();
    assert_eq!((mask.width(), mask.height()), (64, 64));
    assert_eq!(mask.changed_count(), 256);
    let first = std::fs::read(dir.path().join("test.png")).unwrap();
    commands::cmd_synth(&cfg, &mut std::io::sink()).unwrap();
    assert_eq!(first, std::fs::read(dir.path().join("test.png")).unwrap());
}

#[test]
fn predict_covers_every_pixel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synth(dir.path(), 4);
    let model_path = dir.path().join("m.json");
    train(&cfg, model_path.clone());
    let map = dir.path().join("map.png");
    let predict = RunConfig {
        model: Some(model_path),
        out: Some(map.clone()),
        ..cfg
    };
    let labels = commands::cmd_predict(&predict, &mut std::io::sink()).unwrap();
    let img = image::open(&map).unwrap().to_luma8();
    assert_eq!(img.dimensions(), (64, 64));
    assert_eq!(labels.len(), 64 * 64);
    for (p, &l) in img.pixels().zip(&labels) {
        assert_eq!(p.0[0], if l == 1 { 255 } else { 0 });
    }
}

#[test]
fn identical_pair_predicts_the_zero_pattern_class() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synth(dir.path(), 5);
    let model_path = dir.path().join("m.json");
    let model = train(&cfg, model_path.clone());
    cfg.test_path = cfg.ref_path.clone();
    let predict = RunConfig {
        model: Some(model_path),
        out: Some(dir.path().join("map.png")),
        ..cfg
    };
    let labels = commands::cmd_predict(&predict, &mut std::io::sink()).unwrap();

    let stats: &Standardization = model.standardization();
    let zero = stats.apply(&[0.0; 9]);
    let expected = model
        .predict(&broadcd_core::linalg::Matrix::new(1, 9, zero.to_vec()).unwrap())
        .unwrap();
    assert_eq!(expected.labels, vec![0]);
    assert!(labels.iter().all(|&l| l == expected.labels[0]));
}

#[test]
fn evaluate_perfect_degenerate_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = synth(d, 6);
    let csv = d.join("report.csv");

    let perfect = RunConfig {
        pred: cfg.mask_path.clone(),
        csv: Some(csv.clone()),
        ..cfg.clone()
    };
    let report = commands::cmd_evaluate(&perfect, &mut std::io::sink()).unwrap();
    assert_eq!(report.scores.afs, 100.0);

    let black = d.join("black.png");
    image::GrayImage::new(64, 64).save(&black).unwrap();
    let degenerate = RunConfig {
        pred: Some(black),
        csv: Some(csv.clone()),
        ir: ImbalanceRatio::new(250, 1).unwrap(),
        ..cfg.clone()
    };
    let mut printed = Vec::new();
    let report2 = commands::cmd_evaluate(&degenerate, &mut printed).unwrap();
    assert_eq!(report2.scores.f1, 0.0);
    assert!(String::from_utf8(printed).unwrap().contains("f1 0.00"));

    let text = std::fs::read_to_string(&csv).unwrap();
    let expected = format!(
        "{SWEEP_HEADER}\n{}\n{}\n",
        eval::report_row(&report),
        eval::report_row(&report2)
    );
    assert_eq!(text, expected);

    let small = d.join("small.png");
    image::GrayImage::new(8, 8).save(&small).unwrap();
    let mismatch = RunConfig {
        pred: Some(small),
        ..cfg
    };
    let err = commands::cmd_evaluate(&mismatch, &mut std::io::sink()).unwrap_err();
    assert_eq!(err.stage, Stage::Evaluate);
}

#[test]
fn holdout_matches_training_split() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synth(dir.path(), 7);
    let prepared = commands::prepare(&cfg).unwrap();
    let (_, held_out) = commands::split(&cfg, &prepared.dataset).unwrap();
    let mask = imagery::binarize_mask(cfg.mask_path.as_ref().unwrap()).unwrap();
    let idx = commands::holdout_indices(&cfg, &mask).unwrap();
    assert_eq!(idx.len(), held_out.len());
    for (&i, &(x, y)) in idx.iter().zip(held_out.coords().unwrap()) {
        assert_eq!(i, y as usize * 64 + x as usize);
    }

    let perfect = RunConfig {
        pred: cfg.mask_path.clone(),
        holdout: true,
        ..cfg
    };
    let report = commands::cmd_evaluate(&perfect, &mut std::io::sink()).unwrap();
    assert_eq!(report.counts.total(), held_out.len());
}

#[test]
fn sweep_isolates_failing_cells() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synth(dir.path(), 8);
    cfg.irs = vec![
        ImbalanceRatio::new(1, 1).unwrap(),
        ImbalanceRatio::new(250, 1).unwrap(),
    ];
    cfg.strategies = vec![broadcd_core::resample::ResampleStrategy::smote()];
    cfg.layer_counts = vec![3];
    cfg.compressions = vec![0.9];
    cfg.out = Some(dir.path().join("sweep.csv"));
    let outcomes = commands::cmd_sweep(&cfg, &mut std::io::sink()).unwrap();
    assert_eq!(outcomes.len(), 2);
    let err = outcomes[1].result.as_ref().unwrap_err();
    assert_eq!(err.stage, Stage::Resample);
    let text = std::fs::read_to_string(cfg.out.as_ref().unwrap()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], commands::SWEEP_CSV_HEADER);
    assert!(lines[2].starts_with("smote,250:1,3,0.90,,,,"));

    let mut single = cfg.clone();
    single.irs.truncate(1);
    single.out = None;
    let mut stdout = Vec::new();
    let alone = commands::cmd_sweep(&single, &mut stdout).unwrap();
    assert_eq!(alone.len(), 1);
    let alone_text = String::from_utf8(stdout).unwrap();
    assert_eq!(alone_text.lines().count(), 2);
    assert_eq!(alone_text.lines().nth(1), Some(lines[1]));
}

#[test]
fn default_sweep_grid_has_48_cells() {
    let cells = commands::sweep_cells(&RunConfig::default());
    assert_eq!(cells.len(), 48);
    let rows: std::collections::BTreeSet<String> = cells.iter().map(eval::cell_fields).collect();
    assert_eq!(rows.len(), 48);
}
