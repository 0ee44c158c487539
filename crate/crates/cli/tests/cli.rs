use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsallis-lab"))
        .args(args)
        .env_remove("TSALLIS_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn golden(name: &str, args: &[&str]) {
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let out = lab(args);
    assert_eq!(code(&out), 0);
    let got = stdout(&out);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&file, &got).unwrap();
    }
    let want = fs::read_to_string(&file).unwrap();
    assert_eq!(got, want, "help text drifted from {}", file.display());
}

#[test]
fn help_matches_golden_files() {
    golden("help_main.txt", &["--help"]);
    golden("help_run.txt", &["run", "--help"]);
    golden("help_audit.txt", &["audit", "--help"]);
    golden("help_fit.txt", &["fit", "--help"]);
    golden("help_trace.txt", &["trace", "--help"]);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = lab(&["run", "--means", "0.2,0.5", "--bogus"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("Usage"));
    assert_eq!(code(&lab(&[])), 2);
}

#[test]
fn one_round_run_writes_uniform_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&[
        "run", "--means", "0.2,0.5", "--horizon", "1", "--reps", "1", "--seed", "1", "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(lines.next().is_none());
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("t"), 1.0);
    assert!((col("mean_bregman") - (4.0 * 2f64.sqrt() - 4.0)).abs() < 1e-12);
    assert!(dir.path().join("run.meta.toml").exists());
    assert!(stdout(&out).contains("D_psi"));
}

#[test]
fn tied_optimum_is_rejected() {
    let out = lab(&["run", "--means", "0.3,0.3", "--horizon", "10", "--reps", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unique"));
}

#[test]
fn invalid_configurations_exit_2() {
    for args in [
        vec!["run", "--means", "0.2,0.5", "--horizon", "0"],
        vec!["audit", "--means", "0.2,0.5", "--horizon", "0"],
        vec!["run", "--means", "0.2,0.5", "--reps", "0"],
        vec!["run", "--means", "0.2,0.5", "--alpha", "1.5"],
        vec!["run", "--means", "0.2,1.5"],
        vec!["run", "--means", "0.2,0.5", "--fault", "drop=1"],
        vec!["run", "--means", "0.2,0.5", "--fit-window", "5:1"],
        vec!["run"],
    ] {
        let out = lab(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn unstable_alpha_needs_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&[
        "run", "--means", "0.2,0.5", "--alpha", "1.5", "--allow-unstable-alpha", "--horizon",
        "50", "--reps", "2", "--out", path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn identical_invocations_write_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let target = dir.path().join(sub);
        let out = lab(&[
            "run", "--means", "0.2,0.5,0.6", "--horizon", "500", "--reps", "8", "--seed", "3",
            "--out", path(&target),
        ]);
        assert_eq!(code(&out), 0);
        fs::read(target.join("run.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, threads: &str| {
        let target = dir.path().join(sub);
        let out = Command::new(env!("CARGO_BIN_EXE_tsallis-lab"))
            .args(["run", "--means", "0.2,0.5", "--horizon", "300", "--reps", "6"])
            .args(["--out", path(&target)])
            .env("TSALLIS_LAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        fs::read(target.join("run.csv")).unwrap()
    };
    assert_eq!(run("one", "1"), run("three", "3"));
    let bad = Command::new(env!("CARGO_BIN_EXE_tsallis-lab"))
        .args(["run", "--means", "0.2,0.5", "--horizon", "10", "--reps", "1"])
        .env("TSALLIS_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.conf");
    let out_dir = dir.path().join("out");
    fs::write(
        &cfg,
        format!(
            "# small run\nmeans = 0.2,0.5\nhorizon = 40\nreps = 2\nseed = 5\nout = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();
    let out = lab(&["run", "--config", path(&cfg), "--horizon", "30"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let meta = fs::read_to_string(out_dir.join("run.meta.toml")).unwrap();
    assert!(meta.contains("horizon = 30"), "{meta}");
    assert!(meta.contains("replications = 2"));
    assert!(meta.contains("master_seed = 5"));

    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(code(&lab(&["run", "--config", path(&cfg)])), 2);
    assert_eq!(code(&lab(&["run", "--config", "/nonexistent/lab.conf"])), 2);
}

#[test]
fn audit_is_clean_without_fault_and_fails_with_it() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "audit", "--means", "0.1,0.3,0.5,0.7,0.9", "--horizon", "10000", "--reps", "4", "--out",
    ];
    let clean = lab(&[&base[..], &[path(&dir.path().join("c"))]].concat());
    assert_eq!(code(&clean), 0, "{}", stdout(&clean));
    assert!(stdout(&clean).contains(" 0 violations"));

    let faulty = lab(
        &[&base[..], &[path(&dir.path().join("f")), "--fault", "clip-probs=0.01"]].concat(),
    );
    assert_eq!(code(&faulty), 3);
    let log = stdout(&faulty);
    let line = log.lines().find(|l| l.contains("lemma=sandwich")).expect("sandwich reported");
    for field in ["round=", "replication=", "lhs=", "rhs="] {
        assert!(line.contains(field), "{line}");
    }
}

fn write_csv(dir: &Path, rows: impl Iterator<Item = (f64, f64)>) -> String {
    let file = dir.join("synthetic.csv");
    let mut text = String::from("t,mean_bregman\n");
    for (t, v) in rows {
        text.push_str(&format!("{t},{v:e}\n"));
    }
    fs::write(&file, text).unwrap();
    file.to_str().unwrap().to_string()
}

#[test]
fn fit_reports_exact_inverse_square_root() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(
        dir.path(),
        (0..=40).map(|k| {
            let t = 10f64.powf(k as f64 / 10.0).round();
            (t, 3.0 / t.sqrt())
        }),
    );
    let out = lab(&["fit", "--input", &csv, "--column", "mean_bregman", "--window", "10:10000"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("slope      -0.500000"), "{}", stdout(&out));

    let pass = lab(&["fit", "--input", &csv, "--expect-slope-max", "-0.45"]);
    assert_eq!(code(&pass), 0);
    assert!(stdout(&pass).contains("PASS"));

    let fail = lab(&["fit", "--input", &csv, "--expect-slope-max", "-0.6"]);
    assert_eq!(code(&fail), 4);
    assert!(stdout(&fail).contains("FAIL"));

    let r2 = lab(&["fit", "--input", &csv, "--expect-r2-min", "0.99", "--expect-slope-min", "-0.51"]);
    assert_eq!(code(&r2), 0);
}

#[test]
fn fit_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.csv");
    fs::write(&file, "t,mean_bregman\n1,abc\n").unwrap();
    assert_eq!(code(&lab(&["fit", "--input", path(&file)])), 1);
    fs::write(&file, "t,other\n1,2\n").unwrap();
    assert_eq!(code(&lab(&["fit", "--input", path(&file)])), 1);
    assert_eq!(code(&lab(&["fit", "--input", "/nonexistent.csv"])), 1);
}

#[test]
fn trace_replay_prints_uniform_first_round() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("losses.csv");
    fs::write(&file, "0,1\n").unwrap();
    let out = lab(&["trace", "--replay", path(&file), "--seed", "7", "--steps", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let row = text.lines().find(|l| l.starts_with("1\t")).unwrap();
    assert!(row.contains("(0.500000000000,0.500000000000)"), "{row}");
}

#[test]
fn trace_residuals_are_small() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("losses.csv");
    let rows: String = (0..50).map(|t| format!("{},{},{}\n", t % 2, (t % 3) as f64 / 2.0, 0.25)).collect();
    fs::write(&file, rows).unwrap();
    let out = lab(&["trace", "--replay", path(&file), "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let data: Vec<&str> = text.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).collect();
    assert_eq!(data.len(), 50);
    for line in data {
        let residual: f64 = line.rsplit('\t').next().unwrap().parse().unwrap();
        assert!(residual <= 1e-7, "{line}");
    }

    let stochastic = lab(&["trace", "--means", "0.2,0.5", "--steps", "20"]);
    assert_eq!(code(&stochastic), 0);
}

#[test]
fn trace_errors() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("losses.csv");
    fs::write(&file, "0,1\n1,0\n").unwrap();
    assert_eq!(code(&lab(&["trace", "--replay", path(&file), "--steps", "3"])), 2);
    assert_eq!(code(&lab(&["trace", "--replay", "/nonexistent/losses.csv"])), 1);
    assert_eq!(code(&lab(&["trace", "--replay", path(&file), "--star", "3"])), 2);
    assert_eq!(code(&lab(&["trace"])), 2);
}
