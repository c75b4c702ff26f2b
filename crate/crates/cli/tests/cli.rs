use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fmds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmds")).args(args).output().unwrap()
}

fn fmds_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmds")).args(args).env(key, value).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A 4-object, 3-slice tensor of points on a line.
fn small_tensor(dir: &TempDir) -> PathBuf {
    let mut body = String::from("t,i,j,d\n");
    for (k, t) in [0.0, 0.5, 1.0].iter().enumerate() {
        let x = [0.0, 1.0 + t, 3.0, 4.0 + 0.5 * k as f64];
        for i in 0..4 {
            for j in i + 1..4 {
                body.push_str(&format!("{t},{},{},{}\n", i + 1, j + 1, (x[i] - x[j]).abs()));
            }
        }
    }
    let path = dir.path().join("tensor.csv");
    fs::write(&path, body).unwrap();
    path
}

fn rotation(dir: &TempDir) -> PathBuf {
    let out = dir.path().join("synth");
    let o = fmds(&["synth", "--scenario", "smooth-rotation", "--n", "4", "--m", "20", "--seed", "7", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out.join("tensor.csv")
}

#[test]
fn single_slice_cmds_writes_one_plot_and_one_table() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("one.csv");
    fs::write(&input, "t,i,j,d\n0,1,2,3\n0,1,3,4\n0,2,3,5\n").unwrap();
    let out = dir.path().join("out");
    let o = fmds(&["cmds", "--input", p(&input), "--dim", "2", "--out", p(&out), "--deterministic"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> =
        fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names, ["coords_0001.csv", "eigenvalues.csv", "manifest.json", "scatter_0001.svg", "summary.json"]);
    let coords = fs::read_to_string(out.join("coords_0001.csv")).unwrap();
    assert!(coords.starts_with("# manifest_sha256="));
    assert_eq!(coords.lines().count(), 1 + 1 + 3);
}

#[test]
fn cmds_summary_reports_negative_mass_per_slice() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("two.csv");
    // The second slice breaks the triangle inequality.
    fs::write(&input, "t,i,j,d\n0,1,2,1\n0,1,3,1\n0,2,3,1\n1,1,2,1\n1,1,3,5\n1,2,3,1\n").unwrap();
    let out = dir.path().join("out");
    let o = fmds(&["cmds", "--input", p(&input), "--dim", "2", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = json(out.join("summary.json"));
    let slices = summary["slices"].as_array().unwrap();
    assert_eq!(slices.len(), 2);
    assert_eq!(slices[0]["negative_mass"].as_f64().unwrap(), 0.0);
    assert!(slices[1]["negative_mass"].as_f64().unwrap() > 0.0);
    assert!(stderr(&o).contains("negative_mass"));
}

#[test]
fn cmds_dimension_equal_to_n_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = small_tensor(&dir);
    let o = fmds(&["cmds", "--input", p(&input), "--dim", "4", "--out", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dimension"));
}

#[test]
fn cmds_output_does_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let input = rotation(&dir);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |out: &Path| vec!["cmds".to_string(), "--input".into(), p(&input).into(), "--out".into(), p(out).into(), "--deterministic".into()];
    let run = |out: &Path, threads: &str| {
        let args = args(out);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = fmds_env(&args, "FMDS_THREADS", threads);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    run(&a, "1");
    run(&b, "4");
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "manifest.json" {
            continue;
        }
        let x = fs::read_to_string(a.join(&name)).unwrap();
        let y = fs::read_to_string(b.join(&name)).unwrap();
        // The manifest records a different output directory, so only the hash line differs.
        let strip = |s: &str| s.lines().filter(|l| !l.contains("manifest_sha256")).collect::<Vec<_>>().join("\n");
        assert_eq!(strip(&x), strip(&y), "{name:?}");
    }
    let o = fmds_env(&["cmds", "--input", p(&input), "--out", p(&a)], "FMDS_THREADS", "zero");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fmds_run_writes_every_artifact() {
    let dir = TempDir::new().unwrap();
    let input = rotation(&dir);
    let out = dir.path().join("fit");
    let o = fmds(&["fmds", "--input", p(&input), "--knots", "1", "--max-epochs", "3000", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in [
        "coefficients.json",
        "trajectories.csv",
        "stress.csv",
        "fitted.csv",
        "trajectories.svg",
        "path.svg",
        "manifest.json",
        "summary.json",
    ] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let summary = json(out.join("summary.json"));
    assert_eq!(summary["converged"], Value::Bool(true));
    assert!(summary["max_abs_error"].as_f64().unwrap() < 0.05 * summary["max_dissimilarity"].as_f64().unwrap());

    let coefficients = json(out.join("coefficients.json"));
    assert_eq!(coefficients["objects"].as_array().unwrap().len(), 4);
    assert_eq!(coefficients["objects"][0]["coefficients"].as_array().unwrap().len(), 2);
    assert_eq!(coefficients["manifest_sha256"], summary["manifest_sha256"]);

    let epochs = summary["epochs"].as_u64().unwrap() as usize;
    let stress = fs::read_to_string(out.join("stress.csv")).unwrap();
    assert_eq!(stress.lines().filter(|l| !l.starts_with('#')).count(), 1 + 1 + epochs);

    let traj = fs::read_to_string(out.join("trajectories.csv")).unwrap();
    assert_eq!(traj.lines().filter(|l| !l.starts_with('#')).count(), 1 + 201 * 4);
    assert!(fs::read_to_string(out.join("trajectories.svg")).unwrap().contains("unix_time"));
}

#[test]
fn fmds_reports_original_time_units() {
    let dir = TempDir::new().unwrap();
    let mut body = String::from("t,i,j,d\n");
    for k in 0..8 {
        let t = 1990.0 + 5.0 * k as f64;
        body.push_str(&format!("{t},1,2,{}\n{t},1,3,2\n{t},2,3,{}\n", 1.0 + 0.1 * k as f64, 1.5));
    }
    let input = dir.path().join("years.csv");
    fs::write(&input, body).unwrap();
    let out = dir.path().join("fit");
    let o = fmds(&["fmds", "--input", p(&input), "--dim", "2", "--max-epochs", "5", "--samples", "3", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let traj = fs::read_to_string(out.join("trajectories.csv")).unwrap();
    let times: Vec<&str> = traj.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(times, ["1990", "1990", "1990", "2007.5", "2007.5", "2007.5", "2025", "2025", "2025"]);
    let coefficients = json(out.join("coefficients.json"));
    assert_eq!(coefficients["time_domain"], serde_json::json!([1990.0, 2025.0]));
}

#[test]
fn huge_tolerance_converges_after_one_epoch() {
    let dir = TempDir::new().unwrap();
    let input = rotation(&dir);
    let out = dir.path().join("fit");
    let o = fmds(&["fmds", "--input", p(&input), "--eps", "1e30", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = json(out.join("summary.json"));
    assert_eq!(summary["converged"], Value::Bool(true));
    assert_eq!(summary["epochs"], 1);
}

#[test]
fn manifest_reruns_reproduce_flags() {
    let dir = TempDir::new().unwrap();
    let input = rotation(&dir);
    let out = dir.path().join("fit");
    let o = fmds(&["fmds", "--input", p(&input), "--max-epochs", "50", "--seed", "3", "--out", p(&out), "--deterministic"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read_to_string(out.join("summary.json")).unwrap();
    let manifest = dir.path().join("saved.json");
    fs::copy(out.join("manifest.json"), &manifest).unwrap();
    let o = fmds(&["fmds", "--manifest", p(&manifest), "--deterministic"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("summary.json")).unwrap(), first);
}

#[test]
fn zero_epoch_manifest_is_rejected() {
    let dir = TempDir::new().unwrap();
    let input = rotation(&dir);
    let manifest = dir.path().join("m.json");
    let body = serde_json::json!({
        "format_version": 1, "command": "fmds", "input": input, "format": "tensor_csv",
        "metric": "euclidean", "window": 1, "stride": 1, "fit": { "max_epochs": 0 }, "out": dir.path().join("o"),
    });
    fs::write(&manifest, body.to_string()).unwrap();
    let o = fmds(&["fmds", "--manifest", p(&manifest)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("max_epochs"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn divergence_exits_with_numerical_code() {
    let dir = TempDir::new().unwrap();
    let input = rotation(&dir);
    let o = fmds(&[
        "fmds", "--input", p(&input), "--baseline", "gd", "--init", "random", "--alpha", "100", "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("diverged at epoch"), "{}", stderr(&o));
}

#[test]
fn ingest_failures_exit_with_code_three() {
    let dir = TempDir::new().unwrap();
    let o = fmds(&["fmds", "--input", p(&dir.path().join("absent.csv")), "--out", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "t,i,j,d\n0,1,2,1\n0,1,3,-1\n0,2,3,1\n").unwrap();
    let o = fmds(&["cmds", "--input", p(&bad), "--out", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("negative"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(fmds(&["fmds", "--bogus"]).status.code(), Some(2));
    assert_eq!(fmds(&["cmds", "--metric", "manhattan"]).status.code(), Some(2));
}

#[test]
fn dissim_from_panel_then_fmds_on_panel() {
    let dir = TempDir::new().unwrap();
    let panel = dir.path().join("prices.csv");
    let mut body = String::from("ticker");
    for k in 1..=30 {
        body.push_str(&format!(",day{k}"));
    }
    body.push('\n');
    for (name, f) in [("AAA", 0.3), ("BBB", 0.7), ("CCC", 1.1), ("DDD", 1.9)] {
        body.push_str(name);
        for k in 0..30 {
            let x = k as f64;
            body.push_str(&format!(",{}", 100.0 + (f * x).sin() * 5.0 + 0.1 * x * f));
        }
        body.push('\n');
    }
    fs::write(&panel, body).unwrap();

    let out = dir.path().join("dissim");
    let o = fmds(&["dissim", "--input", p(&panel), "--metric", "correlation", "--window", "5", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = json(out.join("summary.json"));
    assert_eq!(summary["m"], 26);
    assert_eq!(summary["labels"][0], "AAA");
    let tensor = fs::read_to_string(out.join("tensor.csv")).unwrap();
    assert!(tensor.lines().nth(2).unwrap().starts_with("5,1,2,"));

    let fit = dir.path().join("fit");
    let o = fmds(&[
        "fmds", "--input", p(&panel), "--format", "wide-csv", "--metric", "correlation", "--window", "5",
        "--max-epochs", "20", "--out", p(&fit),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(fit.join("trajectories.csv")).unwrap().contains(",DDD,"));

    let o = fmds(&["dissim", "--input", p(&panel), "--metric", "correlation", "--window", "1", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_lists_each_check() {
    let o = fmds(&["verify"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    for check in ["basis_vs_recursion", "gradient_vs_fd", "cmds_roundtrip", "stress_decomposition"] {
        let line = stdout.lines().find(|l| l.starts_with(check)).unwrap_or_else(|| panic!("no {check} line"));
        assert!(line.contains("tol=") && line.contains("max_dev="), "{line}");
    }
    #[cfg(not(feature = "fault-injection"))]
    {
        assert_eq!(o.status.code(), Some(0), "{stdout}");
        assert!(stdout.contains("all checks passed"));
    }
    #[cfg(feature = "fault-injection")]
    {
        assert_eq!(o.status.code(), Some(4));
        let line = stdout.lines().find(|l| l.starts_with("gradient_vs_fd")).unwrap();
        assert!(line.contains("FAIL"), "{line}");
    }
}

#[test]
fn synth_writes_truth_and_panel() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s");
    let o = fmds(&["synth", "--scenario", "random-walk-smoothed", "--p-true", "1", "--n", "3", "--m", "12", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("panel.csv").exists());
    assert_eq!(fs::read_to_string(out.join("truth.csv")).unwrap().lines().count(), 1 + 3 * 12);
    let o = fmds(&["synth", "--scenario", "smooth-rotation", "--p-true", "3", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}
