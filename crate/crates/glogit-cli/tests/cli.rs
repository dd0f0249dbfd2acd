//! End-to-end tests of the `glogit` binary: file formats, determinism and
//! exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn glogit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glogit"))
        .args(args)
        .env_remove("GLOGIT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn simulate_writes_replicates_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let d1 = dir.path().join("a");
    let d2 = dir.path().join("b");
    for d in [&d1, &d2] {
        let out = glogit(&[
            "simulate",
            "--n", "60",
            "--beta", "1,-1,-3,1,3",
            "--p", "0.3",
            "--seed", "7",
            "--reps", "3",
            "--out-dir", d.to_str().unwrap(),
        ]);
        assert_success(&out);
    }
    for rep in 1..=3 {
        let f1 = read(&d1.join(format!("rep_{rep}.csv")));
        let f2 = read(&d2.join(format!("rep_{rep}.csv")));
        assert_eq!(f1, f2, "same flags + seed must be byte-identical");
        let mut lines = f1.lines();
        assert_eq!(lines.next().unwrap(), "y,x0,x1,x2,x3,x4");
        assert_eq!(lines.count(), 60);
    }
    assert!(d1.join("manifest_simulate.json").exists());
    // distinct replicates differ
    assert_ne!(read(&d1.join("rep_1.csv")), read(&d1.join("rep_2.csv")));
    // intercept column is all ones, y is 0/1
    for line in read(&d1.join("rep_1.csv")).lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert!(cells[0] == "0" || cells[0] == "1");
        assert_eq!(cells[1], "1");
    }
}

#[test]
fn fit_chain_has_the_documented_shape_and_replays_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    assert_success(&glogit(&[
        "simulate",
        "--n", "80",
        "--beta", "0.5,-1",
        "--p", "1",
        "--seed", "3",
        "--out-dir", data_dir.to_str().unwrap(),
    ]));
    let data = data_dir.join("rep_1.csv");

    let fit_args = |out: &Path| {
        vec![
            "fit".to_string(),
            "--data".into(), data.display().to_string(),
            "--iters".into(), "100".into(),
            "--burnin".into(), "50".into(),
            "--thin".into(), "5".into(),
            "--seed".into(), "11".into(),
            "--fixed-p".into(), "1".into(),
            "--no-intercept".into(),
            "--out-dir".into(), out.display().to_string(),
        ]
    };
    let f1 = dir.path().join("fit1");
    let f2 = dir.path().join("fit2");
    for d in [&f1, &f2] {
        let args = fit_args(d);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_success(&glogit(&args));
    }
    let chain = read(&f1.join("chain.csv"));
    let mut lines = chain.lines();
    assert_eq!(lines.next().unwrap(), "iter,beta_0,beta_1,p");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10, "100 iters / 50 burn-in / thin 5 keeps 10");
    let mut prev = 0u64;
    for row in &rows {
        let iter: u64 = row.split(',').next().unwrap().parse().unwrap();
        assert!(iter > prev, "iter not strictly increasing");
        prev = iter;
        // fixed p: constant column
        assert_eq!(row.split(',').next_back().unwrap(), "1");
    }
    assert_eq!(chain, read(&f2.join("chain.csv")), "replay must be byte-identical");

    let summary = read(&f1.join("summary.csv"));
    assert!(summary.starts_with("parameter,mean,sd,q2.5,q97.5,geweke_z,ess"));
    assert_eq!(summary.lines().count(), 4); // header + beta_0, beta_1, p
    assert!(f1.join("summary.txt").exists());
    assert!(f1.join("manifest_fit.json").exists());
    let manifest = read(&f1.join("manifest_fit.json"));
    assert!(manifest.contains("\"input_digest\""));
}

#[test]
fn fit_error_paths_use_the_documented_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    // unreadable file → 1
    let out = glogit(&[
        "fit", "--data", "/nonexistent/nope.csv", "--iters", "10", "--burnin", "5",
    ]);
    assert_eq!(exit_code(&out), 1, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // missing response column → 2
    let f = dir.path().join("noresp.csv");
    std::fs::write(&f, "a,b\n1,2\n0,1\n").unwrap();
    let out = glogit(&[
        "fit", "--data", f.to_str().unwrap(), "--iters", "10", "--burnin", "5",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("response"));

    // non-binary response → 2
    let f = dir.path().join("nonbin.csv");
    std::fs::write(&f, "y,x\n1,0.5\n2,0.3\n").unwrap();
    let out = glogit(&[
        "fit", "--data", f.to_str().unwrap(), "--iters", "10", "--burnin", "5",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-binary"));

    // all one class → 2 (sampler precondition)
    let f = dir.path().join("oneclass.csv");
    std::fs::write(&f, "y,x\n1,0.5\n1,0.3\n1,-0.2\n1,0.9\n").unwrap();
    let out = glogit(&[
        "fit", "--data", f.to_str().unwrap(), "--iters", "10", "--burnin", "5",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("one class"));

    // a non-numeric cell names its row → 1
    let f = dir.path().join("na.csv");
    let mut body = String::from("y,x\n");
    for i in 1..=10 {
        if i == 7 {
            body.push_str("1,NA_value\n");
        } else {
            body.push_str(&format!("{},{}\n", i % 2, 0.1 * i as f64));
        }
    }
    std::fs::write(&f, body).unwrap();
    let out = glogit(&[
        "fit", "--data", f.to_str().unwrap(), "--iters", "10", "--burnin", "5",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("row 7"),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    // header-only file → 1 (empty dataset)
    let f = dir.path().join("empty.csv");
    std::fs::write(&f, "y,x\n").unwrap();
    let out = glogit(&[
        "fit", "--data", f.to_str().unwrap(), "--iters", "10", "--burnin", "5",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));

    // bad flag combination → 2
    let f = dir.path().join("ok.csv");
    std::fs::write(&f, "y,x\n1,0.5\n0,0.3\n1,-0.2\n0,0.9\n").unwrap();
    let out = glogit(&[
        "fit", "--data", f.to_str().unwrap(), "--iters", "10", "--burnin", "20",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn diagnose_reports_per_parameter_files() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    assert_success(&glogit(&[
        "simulate", "--n", "70", "--beta", "0.3,-0.6", "--p", "0.7",
        "--seed", "5", "--out-dir", data_dir.to_str().unwrap(),
    ]));
    let fit_dir = dir.path().join("fit");
    assert_success(&glogit(&[
        "fit",
        "--data", data_dir.join("rep_1.csv").to_str().unwrap(),
        "--iters", "400", "--burnin", "100", "--seed", "1",
        "--no-intercept", "--out-dir", fit_dir.to_str().unwrap(),
    ]));
    assert_success(&glogit(&[
        "diagnose",
        "--chain", fit_dir.join("chain.csv").to_str().unwrap(),
        "--max-lag", "20",
    ]));

    let geweke = read(&fit_dir.join("geweke.csv"));
    let lines: Vec<&str> = geweke.lines().collect();
    assert_eq!(lines[0], "parameter,z,pass");
    assert_eq!(lines.len(), 4); // beta_0, beta_1, p
    for line in &lines[1..] {
        let pass = line.split(',').nth(2).unwrap();
        assert!(pass == "true" || pass == "false");
    }

    let acf = read(&fit_dir.join("acf.csv"));
    let lines: Vec<&str> = acf.lines().collect();
    assert_eq!(lines[0], "lag,beta_0,beta_1,p");
    assert_eq!(lines.len(), 22); // header + lags 0..=20
    let row0: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row0[0], "0");
    assert_eq!(row0[1], "1", "acf at lag 0 must be 1");
    assert!(fit_dir.join("pacf.csv").exists());

    // malformed chain file → 1
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y\n1,2\n").unwrap();
    let out = glogit(&["diagnose", "--chain", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);

    // oversized lag → 2
    let out = glogit(&[
        "diagnose",
        "--chain", fit_dir.join("chain.csv").to_str().unwrap(),
        "--max-lag", "5000",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn study_grid_arithmetic_and_jobs_invariance() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &Path, jobs: &str| {
        let args = [
            "study",
            "--scenario", "1",
            "--n-grid", "40",
            "--reps", "1",
            "--p-mode", "unknown",
            "--iters", "60",
            "--burnin", "20",
            "--seed", "9",
            "--jobs", jobs,
            "--out-dir", out.to_str().unwrap(),
        ];
        let o = glogit(&args);
        assert_success(&o);
    };
    let d1 = dir.path().join("j1");
    let d2 = dir.path().join("j2");
    run(&d1, "1");
    run(&d2, "2");

    let runs = read(&d1.join("runs.csv"));
    // default p grid has 4 values × 1 n × 1 rep = 4 chains
    assert_eq!(runs.lines().count(), 5, "header + 4 rows:\n{runs}");
    assert!(runs.starts_with("p_true,n,rep,p_hat,beta_0,beta_1,beta_2,beta_3,beta_4"));
    assert_eq!(runs, read(&d2.join("runs.csv")), "--jobs must not change results");

    let table = read(&d1.join("study_table.csv"));
    assert!(table.starts_with("p_true,n,stat,p_hat,"));
    // one mean and one sd row per cell
    assert_eq!(table.lines().count(), 1 + 8);
    assert!(d1.join("manifest_study.json").exists());
}

#[test]
fn env_var_overrides_default_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_glogit"))
        .args(["simulate", "--n", "20", "--beta", "0.5", "--p", "1", "--seed", "2"])
        .env("GLOGIT_OUT_DIR", &env_dir)
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    assert!(env_dir.join("rep_1.csv").exists());
}
