use std::path::Path;
use std::process::{Command, Output};

use aircont_cli::commands::render_manifest;
use aircont_cli::{Command as Cmd, RunConfig};

fn aircont(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aircont"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn stability_default_ratio_at_least_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = aircont(dir.path(), &["stability", "--out", "s.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let ratio: f64 = value(&stdout(&o), "area_ratio").parse().unwrap();
    assert!(ratio >= 1.0);
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3001);
    // T_s = 0.01, N = 4: no multi-hop cell below 0.05 s
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let delta: f64 = f[0].parse().unwrap();
        if delta < 0.05 - 1e-9 {
            assert_eq!(f[6], "0", "{line}");
        }
    }
    assert!(dir.path().join("s.csv.manifest.toml").exists());
}

#[test]
fn infeasible_grid_reports_undefined_ratio() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[grid]\ndelta_min = 0.001\ndelta_max = 0.009\ndelta_steps = 5\nratio_steps = 4\n",
    )
    .unwrap();
    let o = aircont(
        dir.path(),
        &["stability", "--config", "c.toml", "--out", "s.csv"],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(value(&text, "air_cells"), "0");
    assert_eq!(value(&text, "sota_cells"), "0");
    assert_eq!(value(&text, "area_ratio"), "undefined");
}

#[test]
fn sweep_is_complete_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[sweep]\ntrials = 400\n").unwrap();
    let run = |out: &str| {
        let o = aircont(
            dir.path(),
            &["mse-sweep", "--config", "c.toml", "--out", out],
        );
        assert_eq!(o.status.code(), Some(0));
        std::fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));

    let cfg = RunConfig::from_toml("").unwrap();
    let points = cfg.sweep.points();
    assert!(points.contains(&(2.5, 0.5)));
    let rows: Vec<Vec<&str>> = a.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 2 * points.len());
    let mut better = 0;
    let air: Vec<_> = rows.iter().filter(|r| r[0] == "air").collect();
    for r in &air {
        let s = rows
            .iter()
            .find(|s| s[0] == "sota" && s[1..4] == r[1..4])
            .expect("matching sota row");
        if r[5].parse::<f64>().unwrap() < s[5].parse::<f64>().unwrap() {
            better += 1;
        }
    }
    assert!(better as f64 >= 0.95 * air.len() as f64);
}

#[test]
fn seed_flag_changes_sweep() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[sweep]\nsensor_counts = [5]\ntrials = 50\n",
    )
    .unwrap();
    let run = |seed: &str, out: &str| {
        aircont(
            dir.path(),
            &[
                "mse-sweep",
                "--config",
                "c.toml",
                "--seed",
                seed,
                "--out",
                out,
            ],
        );
        std::fs::read_to_string(dir.path().join(out)).unwrap()
    };
    assert_ne!(run("1", "a.csv"), run("2", "b.csv"));
    let manifest = std::fs::read_to_string(dir.path().join("b.csv.manifest.toml")).unwrap();
    assert!(manifest.starts_with("seed = 2\n"), "{manifest}");
}

#[test]
fn simulate_flag_and_manifest_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let o = aircont(dir.path(), &["simulate", "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "rmse_air<rmse_sota"), "true");
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,scheme,u,x1,x2,x3,x4");
    for scheme in ["ideal", "air", "sota"] {
        assert!(csv.lines().any(|l| l.split(',').nth(1) == Some(scheme)));
    }

    let o = aircont(
        dir.path(),
        &[
            "simulate",
            "--config",
            "t.csv.manifest.toml",
            "--out",
            "t2.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        csv,
        std::fs::read_to_string(dir.path().join("t2.csv")).unwrap()
    );
}

#[test]
fn zero_horizon_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "seed = 3\n[sim]\nhorizon = 0.0\n",
    )
    .unwrap();
    let o = aircont(
        dir.path(),
        &["simulate", "--config", "c.toml", "--out", "t.csv"],
    );
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("horizon"), "{err}");
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn unknown_key_fails_loudly() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[timing]\nslots = 0.02\n").unwrap();
    let o = aircont(dir.path(), &["stability", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("slots"), "{err}");
}

#[test]
fn infeasible_simulation_period_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[sim]\ndelta_sota = 0.03\n").unwrap();
    let o = aircont(
        dir.path(),
        &["simulate", "--config", "c.toml", "--out", "t.csv"],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_passes_and_detects_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let o = aircont(dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS ")));

    let o = aircont(
        dir.path(),
        &["validate", "--perturb-mse-air", "0.01", "--out", "v.txt"],
    );
    assert_eq!(o.status.code(), Some(3));
    let report = std::fs::read_to_string(dir.path().join("v.txt")).unwrap();
    let failed: Vec<&str> = report.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("air MSE closed form vs sampling"));
}

#[test]
fn scaling_debug_prints_both_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let o = aircont(dir.path(), &["scaling-debug"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in [
        "air.alpha",
        "air.beta",
        "air.mse",
        "sota.alpha_a",
        "sota.mse",
    ] {
        value(&text, key);
    }
}

#[test]
fn manifest_reparses_to_the_same_config() {
    let cfg = RunConfig::from_toml("seed = 9\n[sim]\nsigma2 = 0.25\n").unwrap();
    let text = render_manifest(&cfg, Cmd::Simulate, &[Path::new("out.csv")]);
    assert!(text.contains("[manifest]"));
    assert!(text.contains("command = \"simulate\""));
    assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
}
