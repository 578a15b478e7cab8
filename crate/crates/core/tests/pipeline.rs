use std::path::{Path, PathBuf};
use std::process::Command;

use vpbgk::cli::output::{REPORT_HEADER, SNAPSHOT_HEADER};
use vpbgk::cli::{emit_snapshot, parse_config, read_field_dump, ParsedConfig};
use vpbgk::solver::{initialize, InitialCondition, SolverConfig};

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vpbgk"))
}

fn snapshot_columns(text: &str) -> Vec<[f64; 5]> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SNAPSHOT_HEADER));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3], v[4]]
        })
        .collect()
}

#[test]
fn table_presets_parse_to_the_convergence_setup() {
    for (file, eps) in [
        ("paper_table1_eps1.cfg", 1.0),
        ("paper_table1_eps0_01.cfg", 0.01),
        ("paper_table1_eps0_0001.cfg", 0.0001),
    ] {
        match parse_config(preset(file)).unwrap() {
            ParsedConfig::Study(s) => {
                assert_eq!(s.base, SolverConfig::paper_test(eps), "{file}");
                assert_eq!(s.levels, 5);
            }
            other => panic!("{file}: expected a study, got {other:?}"),
        }
    }
}

#[test]
fn equilibrium_snapshot_is_flat() {
    let cfg = match parse_config(preset("equilibrium.cfg")).unwrap() {
        ParsedConfig::Run(c) => c,
        other => panic!("{other:?}"),
    };
    assert!(matches!(
        cfg.initial_condition,
        InitialCondition::UniformMaxwellian { .. }
    ));
    let grid = cfg.grid().unwrap();
    let state = initialize(&cfg, &grid).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snap.csv");
    emit_snapshot(&state, &grid, &path, None).unwrap();
    let rows = snapshot_columns(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 40);
    for r in &rows {
        assert_eq!(r[1], rows[0][1]);
        assert!((r[1] - 1.0).abs() < 1e-10);
        assert!(r[4].abs() < 1e-14, "e = {}", r[4]);
    }
}

#[test]
fn initial_snapshot_density_and_dump_round_trip() {
    let cfg = SolverConfig::paper_test(1.0);
    let grid = cfg.grid().unwrap();
    let state = initialize(&cfg, &grid).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("snap.csv");
    let dump = dir.path().join("f.bin");
    emit_snapshot(&state, &grid, &snap, Some(&dump)).unwrap();

    for r in snapshot_columns(&std::fs::read_to_string(&snap).unwrap()) {
        let expected = 1.0 + 0.01 * (2.0 * std::f64::consts::PI * r[0]).cos();
        assert!((r[1] - expected).abs() < 1e-8, "x = {}: {} vs {expected}", r[0], r[1]);
    }

    let back = read_field_dump(&dump).unwrap();
    let bits = |f: &vpbgk::DistributionField| f.interior().map(f64::to_bits).collect::<Vec<_>>();
    assert_eq!(bits(&back), bits(&state.f));
    let bytes = std::fs::read(&dump).unwrap();
    assert_eq!(bytes.len(), 24 + 8 * 40 * 161);
    assert_eq!(&bytes[..8], b"VPBGKF64");
}

#[test]
fn run_subcommand_writes_every_listed_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("run")
        .arg(preset("equilibrium.cfg"))
        .arg("--out-dir")
        .arg(dir.path())
        .arg("--snapshots")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "run");
    let outputs = manifest["outputs"].as_array().unwrap();
    for p in outputs {
        assert!(Path::new(p.as_str().unwrap()).exists(), "{p}");
    }
    for name in [
        "diagnostics.csv",
        "stability.csv",
        "steps.csv",
        "snapshot_final.csv",
        "f_final.bin",
        "snapshot_000000.csv",
        "f_000010.bin",
    ] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let snap = std::fs::read_to_string(dir.path().join("snapshot_final.csv")).unwrap();
    for r in snapshot_columns(&snap) {
        assert!((r[1] - 1.0).abs() < 1e-10);
    }
}

#[test]
fn fixed_dt_flag_gives_uniform_steps() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["--fixed-dt", "--out-dir"])
        .arg(dir.path())
        .arg("run")
        .arg(preset("smoke.cfg"))
        .output()
        .unwrap();
    assert!(status.status.success());
    let steps = std::fs::read_to_string(dir.path().join("steps.csv")).unwrap();
    let dts: Vec<f64> = steps
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(dts.len() > 100);
    let (last, body) = dts.split_last().unwrap();
    assert!(body.iter().all(|dt| *dt == dts[0]));
    assert!((last - dts[0]).abs() <= 1e-15);
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"dt_policy\": \"fixed\""));
}

fn small_study(dir: &Path) -> PathBuf {
    let cfg = dir.join("study.cfg");
    std::fs::write(
        &cfg,
        "n_x = 8\nn_v = 16\nv_max = 8\neps = 0.1\nt_final = 0.05\nsigma = 0.9\n\
         initial_condition = paper_test\nlevels = 3\n",
    )
    .unwrap();
    cfg
}

#[test]
fn study_subcommand_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_study(dir.path());
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = bin()
            .arg("study")
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let report = std::fs::read(out_dir.join("report.csv")).unwrap();
        assert_eq!(String::from_utf8_lossy(&out.stdout).as_bytes(), &report[..]);
        assert!(out_dir.join("levels.csv").exists());
        reports.push(report);
    }
    assert_eq!(reports[0], reports[1]);
    let text = String::from_utf8(reports.pop().unwrap()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(REPORT_HEADER));
    // two error rows times three metrics
    assert_eq!(lines.count(), 6);
}

#[test]
fn subcommand_and_config_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_study(dir.path());
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("study"));

    let out = bin()
        .arg("study")
        .arg(preset("smoke.cfg"))
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn bad_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(
        &cfg,
        "n_x = 40\nn_v = 80\nv_max = 15\neps = 1\nt_final = 0.4\nsigma = 0.9\ninitial_condition = paper_test\nq_list = 3\n",
    )
    .unwrap();
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 8") && err.contains("q > 3"), "{err}");
}
