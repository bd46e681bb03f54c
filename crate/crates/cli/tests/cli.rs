use std::path::Path;
use std::process::{Command, Output};

fn iqls(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iqls"))
        .args(args)
        .current_dir(dir)
        .env_remove("IQLS_DEFAULT_SEED")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn generate_then_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&iqls(
        &["gen-data", "-d", "2", "-n", "50", "--out", "data.csv"],
        d,
    ));
    assert!(read(d, "data.csv").starts_with("x1,x2,y\n"));
    let manifest: serde_json::Value =
        serde_json::from_str(&read(d, "data.csv.manifest.json")).unwrap();
    assert_eq!(manifest["command"], "gen-data");
    assert_eq!(manifest["seed"], 0);

    ok(&iqls(
        &[
            "fit-linear",
            "--data",
            "data.csv",
            "-m",
            "6",
            "-k",
            "9",
            "--bounds",
            "-10:10",
            "--solver",
            "exhaustive",
            "--out",
            "fit",
        ],
        d,
    ));
    let mse = column(&read(d, "fit.trace.csv"), "mse");
    assert_eq!(mse.len(), 10);
    assert!(*mse.last().unwrap() < 1e-6);
    let trace: serde_json::Value = serde_json::from_str(&read(d, "fit.trace.json")).unwrap();
    assert_eq!(trace["records"].as_array().unwrap().len(), 9);
    assert_eq!(trace["stop_reason"], "max_iterations");
    assert!(read(d, "fit.manifest.json").contains("fit.trace.csv"));
}

#[test]
fn bounds_columns_follow_the_width_law() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&iqls(
        &[
            "gen-data", "-d", "2", "-n", "30", "--seed", "4", "--out", "data.csv",
        ],
        d,
    ));
    for (m, factor) in [("1", 2.0), ("2", 3.0)] {
        let out = format!("m{m}");
        ok(&iqls(
            &[
                "fit-linear",
                "--data",
                "data.csv",
                "-m",
                m,
                "-k",
                "8",
                "--out",
                &out,
            ],
            d,
        ));
        let csv = read(d, &format!("{out}.trace.csv"));
        for i in 1..=2 {
            let lo = column(&csv, &format!("lower_{i}"));
            let hi = column(&csv, &format!("upper_{i}"));
            for k in 0..lo.len() {
                let expected = 20.0 / f64::powi(factor, k as i32);
                let slack = 4.0 * f64::EPSILON * lo[k].abs().max(hi[k].abs());
                assert!(
                    ((hi[k] - lo[k]) - expected).abs() <= 1e-12 * expected + slack,
                    "m={m} k={k}"
                );
            }
        }
    }
}

#[test]
fn seed_comes_from_the_environment_when_not_given() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let run = |env: Option<&str>, extra: &[&str], out: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_iqls"));
        c.args(["gen-data", "-n", "5", "--out", out])
            .args(extra)
            .current_dir(d);
        match env {
            Some(v) => c.env("IQLS_DEFAULT_SEED", v),
            None => c.env_remove("IQLS_DEFAULT_SEED"),
        };
        ok(&c.output().unwrap());
        read(d, out)
    };
    let from_env = run(Some("7"), &[], "a.csv");
    let explicit = run(None, &["--seed", "7"], "b.csv");
    let default = run(None, &[], "c.csv");
    assert_eq!(from_env, explicit);
    assert_ne!(from_env, default);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(
        iqls(&["fit-linear", "--data", "data.csv"], d).status.code(),
        Some(2)
    );
    assert_eq!(
        iqls(&["fit-linear", "--data", "missing.csv", "--out", "x"], d)
            .status
            .code(),
        Some(3)
    );
    ok(&iqls(
        &["gen-data", "-d", "13", "-n", "20", "--out", "wide.csv"],
        d,
    ));
    let over = iqls(
        &[
            "fit-linear",
            "--data",
            "wide.csv",
            "-m",
            "2",
            "-k",
            "1",
            "--solver",
            "exhaustive",
            "--out",
            "x",
        ],
        d,
    );
    assert_eq!(over.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&over.stderr).contains("26"));
    let bad_bits = iqls(
        &["fit-linear", "--data", "wide.csv", "-m", "0", "--out", "x"],
        d,
    );
    assert_eq!(bad_bits.status.code(), Some(2));
    assert_eq!(
        iqls(&["gen-data", "--domain", "3:1", "--out", "x.csv"], d)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn per_weight_bounds_file() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&iqls(
        &["gen-data", "-d", "2", "-n", "20", "--out", "data.csv"],
        d,
    ));
    std::fs::write(d.join("box.csv"), "lower,upper\n-8,8\n0,1\n").unwrap();
    ok(&iqls(
        &[
            "fit-linear",
            "--data",
            "data.csv",
            "--bounds-file",
            "box.csv",
            "-k",
            "1",
            "--out",
            "f",
        ],
        d,
    ));
    let csv = read(d, "f.trace.csv");
    assert_eq!(column(&csv, "upper_2")[0], 1.0);
    assert_eq!(column(&csv, "lower_1")[0], -8.0);
    std::fs::write(d.join("short.csv"), "lower,upper\n-8,8\n").unwrap();
    let out = iqls(
        &[
            "fit-linear",
            "--data",
            "data.csv",
            "--bounds-file",
            "short.csv",
            "--out",
            "f",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_spline_and_qubo_export() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&iqls(
        &["gen-data", "-d", "3", "-n", "40", "--out", "data.csv"],
        d,
    ));
    ok(&iqls(
        &[
            "sweep-bits",
            "--data",
            "data.csv",
            "-m",
            "1,2",
            "-k",
            "4",
            "--out",
            "sweep.csv",
        ],
        d,
    ));
    let sweep = read(d, "sweep.csv");
    assert_eq!(sweep.lines().count(), 1 + 8);
    assert!(sweep.starts_with("m,iteration,mse\n1,1,"));

    ok(&iqls(
        &[
            "export-qubo",
            "--data",
            "data.csv",
            "-m",
            "2",
            "--out",
            "q.json",
        ],
        d,
    ));
    let q = iqls::import_qubo(&read(d, "q.json")).unwrap();
    assert_eq!(q.num_vars(), 6);

    ok(&iqls(
        &[
            "fit-spline",
            "--target",
            "tanh",
            "--knots",
            "6",
            "-m",
            "2",
            "-k",
            "4",
            "--bounds",
            "-3:3",
            "--grid-points",
            "50",
            "--out",
            "s",
        ],
        d,
    ));
    assert_eq!(read(d, "s.curves.csv").lines().count(), 51);
    let manifest: serde_json::Value = serde_json::from_str(&read(d, "s.manifest.json")).unwrap();
    assert!(manifest["results"]["final_mse"].is_number());
    assert_eq!(
        iqls(&["fit-spline", "--target", "cosh", "--out", "s"], d)
            .status
            .code(),
        Some(2)
    );
}
