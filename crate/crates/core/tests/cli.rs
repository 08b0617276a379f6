use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
seed = 3
horizon = 20
budget = 6
particles = 30
draws = 5
gain_draws = 50

[system]
kind = "linear-gaussian"
a = 0.9
c = 1.0
q = 1.0
r = 1.0

[ga]
population_size = 4
generations = 2
"#;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipf-schedule"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, CONFIG).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn every_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    let out_arg = out.to_string_lossy().into_owned();
    let base = ["--config", config.as_str(), "--out", out_arg.as_str(), "--workers", "2"];

    let run = |extra: &[&str]| {
        let args: Vec<&str> = base.iter().copied().chain(extra.iter().copied()).collect();
        let o = cli(&args);
        assert!(o.status.success(), "{extra:?}: {}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };

    run(&["optimize"]);
    let best = out.join("best_schedule.txt");
    assert!(best.exists());
    let at_best = format!("@{}", best.display());

    assert!(run(&["evaluate", "regular"]).contains("expected MSE"));
    assert!(run(&["evaluate", "0,4,8,12,16,20"]).contains("expected MSE"));
    assert!(run(&["trace", &at_best, "regular"]).contains("relative gain"));
    assert!(run(&["gain", &at_best]).contains("mean gain"));
    for file in ["convergence.csv", "evaluate_draws.csv", "trace.csv", "gain_draws.csv", "gain_histogram.csv"] {
        assert!(out.join(file).exists(), "{file}");
    }
}

#[test]
fn same_seed_gives_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let mut outputs = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "4")] {
        let out = dir.path().join(name);
        let o = cli(&[
            "--config",
            &config,
            "--out",
            &out.to_string_lossy(),
            "--workers",
            workers,
            "--seed",
            "99",
            "optimize",
        ]);
        assert!(o.status.success());
        outputs.push(fs::read(out.join("convergence.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn invalid_config_exits_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "budget = 500\n").unwrap();
    let o = cli(&["--config", &path.to_string_lossy(), "optimize"]);
    assert!(!o.status.success());
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.starts_with("error: invalid config"), "{stderr}");
}

#[test]
fn wrong_schedule_size_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let o = cli(&["--config", &config, "--out", &dir.path().to_string_lossy(), "evaluate", "0,1,2"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget is 6"));
}

#[test]
fn unevaluable_schedule_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("point.toml");
    // exact measurements of a diffusing state: every filter run degenerates
    fs::write(
        &path,
        "horizon = 10\nbudget = 2\nparticles = 10\ndraws = 3\n[system]\nkind = \"linear-gaussian\"\na = 1.0\nc = 1.0\nq = 1.0\nr = 0.0\n",
    )
    .unwrap();
    let o = cli(&["--config", &path.to_string_lossy(), "--out", &dir.path().to_string_lossy(), "evaluate", "3,7"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unevaluable"));
}
