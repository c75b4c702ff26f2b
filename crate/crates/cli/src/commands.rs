use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fmds_core::cmds::classical_mds;
use fmds_core::dissimilarity::rolling_dissimilarity_tensor;
use fmds_core::fmds::{evaluate_trajectories, fit};
use fmds_core::oracle::{generate, verify, SyntheticScenario};
use fmds_core::{CmdsSolution, DissimilarityTensor, FitConfig};
use rayon::prelude::*;
use serde_json::json;

use crate::cli::{CmdsArgs, DissimArgs, FitArgs, FmdsArgs, InputArgs, OutputArgs, SynthArgs, VerifyArgs};
use crate::error::{CliError, Result};
use crate::io::{header_comment, panel_csv, read_panel, read_tensor, tensor_csv, write_file};
use crate::manifest::{Command, InputFormat, RunManifest, FORMAT_VERSION};
use crate::svg::{self, SvgMeta};

/// Environment variable capping worker threads for per-slice work.
pub const THREADS_ENV: &str = "FMDS_THREADS";

fn manifest_from_flags(
    command: Command,
    input: &InputArgs,
    default_format: InputFormat,
    fit: FitConfig,
    output: &OutputArgs,
) -> Result<RunManifest> {
    let path = input.input.clone().ok_or_else(|| CliError::Config("--input is required".into()))?;
    let out = output.out.clone().ok_or_else(|| CliError::Config("--out is required".into()))?;
    Ok(RunManifest {
        format_version: FORMAT_VERSION,
        command,
        input: path,
        format: input.format.map_or(default_format, Into::into),
        metric: input.metric.into(),
        window: input.window,
        stride: input.stride,
        fit,
        out,
    })
}

fn manifest_from_file(path: &Path, command: Command, output: &OutputArgs) -> Result<RunManifest> {
    let mut manifest = RunManifest::load(path)?;
    if manifest.command != command {
        return Err(CliError::Config(format!(
            "{} describes a {:?} run",
            path.display(),
            manifest.command
        )));
    }
    if let Some(out) = &output.out {
        manifest.out = out.clone();
    }
    Ok(manifest)
}

fn fit_config(args: &FitArgs) -> FitConfig {
    FitConfig {
        dim: args.dim,
        interior_knots: args.knots,
        alpha: args.alpha,
        gamma1: args.gamma1,
        gamma2: args.gamma2,
        tolerance: args.eps,
        max_epochs: args.max_epochs,
        seed: args.seed,
        init: args.init.into(),
        baseline: args.baseline.into(),
    }
}

/// The tensor described by a manifest, with object labels.
pub fn load_tensor(manifest: &RunManifest) -> Result<(DissimilarityTensor, Vec<String>)> {
    match manifest.format {
        InputFormat::TensorCsv => {
            if manifest.window != 1 || manifest.stride != 1 {
                return Err(CliError::Config("--window and --stride apply to wide-csv input only".into()));
            }
            let tensor = read_tensor(&manifest.input)?;
            let labels = (1..=tensor.n()).map(|i| format!("obj{i}")).collect();
            Ok((tensor, labels))
        }
        InputFormat::WideCsv => {
            let panel = read_panel(&manifest.input)?;
            let tensor = rolling_dissimilarity_tensor(&panel, manifest.metric, manifest.window, manifest.stride)?;
            Ok((tensor, panel.labels().to_vec()))
        }
    }
}

fn prepare_out(manifest: &RunManifest) -> Result<&Path> {
    let out = manifest.out.as_path();
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_file(&out.join("manifest.json"), manifest.to_json() + "\n")?;
    Ok(out)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("json value serializes");
    write_file(path, text + "\n")
}

pub fn run_dissim(args: &DissimArgs) -> Result<()> {
    let manifest =
        manifest_from_flags(Command::Dissim, &args.input, InputFormat::WideCsv, FitConfig::default(), &args.output)?;
    manifest.validate()?;
    let (tensor, labels) = load_tensor(&manifest)?;
    let hash = manifest.hash();
    let out = prepare_out(&manifest)?;
    write_file(&out.join("tensor.csv"), tensor_csv(&tensor, Some(&hash)))?;
    let slices: Vec<_> = tensor
        .slices()
        .iter()
        .zip(tensor.time_grid())
        .map(|(d, t)| {
            let r = d.validate(fmds_core::dissimilarity::DEFAULT_TOL);
            json!({ "t": t, "max": d.max(), "triangle_inequality": r.triangle_inequality })
        })
        .collect();
    write_json(
        &out.join("summary.json"),
        &json!({ "manifest_sha256": hash, "n": tensor.n(), "m": tensor.m(), "labels": labels, "slices": slices }),
    )?;
    println!("wrote {} slices for {} objects to {}", tensor.m(), tensor.n(), out.display());
    Ok(())
}

fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|k| *k >= 1)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(1),
    }
}

fn slice_name(prefix: &str, k: usize, ext: &str) -> String {
    format!("{prefix}_{:04}.{ext}", k + 1)
}

pub fn run_cmds(args: &CmdsArgs) -> Result<()> {
    let manifest = match &args.manifest {
        Some(path) => manifest_from_file(path, Command::Cmds, &args.output)?,
        None => {
            let fit = FitConfig { dim: args.dim, ..FitConfig::default() };
            manifest_from_flags(Command::Cmds, &args.input, InputFormat::TensorCsv, fit, &args.output)?
        }
    };
    manifest.validate()?;
    let (tensor, labels) = load_tensor(&manifest)?;
    let p = manifest.fit.dim;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let solutions: Vec<CmdsSolution> = pool.install(|| {
        tensor
            .slices()
            .par_iter()
            .map(|d| classical_mds(d, p))
            .collect::<fmds_core::Result<_>>()
    })?;

    let hash = manifest.hash();
    let out = prepare_out(&manifest)?;
    let mut eigen_csv = header_comment(Some(&hash));
    eigen_csv.push_str("slice,t,rank,eigenvalue\n");
    let mut summary = Vec::new();
    for (k, (sol, t)) in solutions.iter().zip(tensor.time_grid()).enumerate() {
        let x = &sol.configuration;
        let mut coords = header_comment(Some(&hash));
        coords.push_str("object");
        for a in 1..=p {
            let _ = write!(coords, ",dim{a}");
        }
        coords.push('\n');
        for (i, label) in labels.iter().enumerate() {
            coords.push_str(label);
            for a in 0..p {
                let _ = write!(coords, ",{}", x[(i, a)]);
            }
            coords.push('\n');
        }
        write_file(&out.join(slice_name("coords", k, "csv")), coords)?;

        let title = format!("Classical MDS, t = {t}");
        let meta = SvgMeta { title: &title, manifest_hash: &hash, deterministic: args.output.deterministic };
        let planar: Vec<(f64, f64)> =
            (0..x.nrows()).map(|i| (x[(i, 0)], if p >= 2 { x[(i, 1)] } else { 0.0 })).collect();
        write_file(&out.join(slice_name("scatter", k, "svg")), svg::scatter_2d(&planar, &labels, &meta))?;
        if p >= 3 {
            let points: Vec<[f64; 3]> = (0..x.nrows()).map(|i| [x[(i, 0)], x[(i, 1)], x[(i, 2)]]).collect();
            write_file(&out.join(slice_name("scatter3d", k, "svg")), svg::scatter_3d(&points, &labels, &meta))?;
        }

        for (r, lambda) in sol.eigenvalues.iter().enumerate() {
            let _ = writeln!(eigen_csv, "{},{t},{},{lambda}", k + 1, r + 1);
        }
        summary.push(json!({
            "slice": k + 1,
            "t": t,
            "used_dim": sol.used_dim,
            "negative_mass": sol.negative_mass,
            "eigenvalues": &sol.eigenvalues[..p],
        }));
    }
    write_file(&out.join("eigenvalues.csv"), eigen_csv)?;
    write_json(
        &out.join("summary.json"),
        &json!({ "manifest_sha256": hash, "n": tensor.n(), "m": tensor.m(), "dim": p, "slices": summary }),
    )?;
    let worst = solutions.iter().map(|s| s.negative_mass).fold(0.0, f64::max);
    println!("embedded {} slices in {p} dimensions (max negative_mass {worst:.3e})", tensor.m());
    if worst > 0.0 {
        eprintln!("warning: some slices have negative eigenvalues; see negative_mass in summary.json");
    }
    Ok(())
}

pub fn run_fmds(args: &FmdsArgs) -> Result<()> {
    let manifest = match &args.manifest {
        Some(path) => manifest_from_file(path, Command::Fmds, &args.output)?,
        None => manifest_from_flags(
            Command::Fmds,
            &args.input,
            InputFormat::TensorCsv,
            fit_config(&args.fit),
            &args.output,
        )?,
    };
    manifest.validate()?;
    if args.samples < 2 {
        return Err(CliError::Config("--samples must be at least 2".into()));
    }
    let (tensor, labels) = load_tensor(&manifest)?;
    let grid = tensor.time_grid().to_vec();
    let (t0, t1) = (grid[0], grid[grid.len() - 1]);
    if t1 <= t0 {
        return Err(CliError::Config("fmds needs at least two distinct time points".into()));
    }
    let span = t1 - t0;
    let unit_grid: Vec<f64> = grid.iter().map(|t| ((t - t0) / span).clamp(0.0, 1.0)).collect();
    let scaled = tensor.clone().with_time_grid(unit_grid.clone())?;

    let result = fit(&scaled, &manifest.fit)?;
    let coeffs = &result.coefficients;
    let p = coeffs.dim();
    let hash = manifest.hash();
    let out = prepare_out(&manifest)?;

    let knots = coeffs.knots();
    let objects: Vec<_> = labels
        .iter()
        .zip(coeffs.matrices())
        .map(|(label, c)| {
            let rows: Vec<Vec<f64>> = c.row_iter().map(|r| r.iter().copied().collect()).collect();
            json!({ "label": label, "coefficients": rows })
        })
        .collect();
    write_json(
        &out.join("coefficients.json"),
        &json!({
            "manifest_sha256": hash,
            "order": knots.order(),
            "time_domain": [t0, t1],
            "unit_interior_knots": knots.interior(),
            "interior_knots": knots.interior().iter().map(|u| t0 + u * span).collect::<Vec<_>>(),
            "objects": objects,
        }),
    )?;

    let dense_unit: Vec<f64> = (0..args.samples).map(|k| k as f64 / (args.samples - 1) as f64).collect();
    let dense_t: Vec<f64> = dense_unit.iter().map(|u| t0 + u * span).collect();
    let dense = evaluate_trajectories(coeffs, &dense_unit)?;
    let mut traj_csv = header_comment(Some(&hash));
    traj_csv.push_str("t,object");
    for a in 1..=p {
        let _ = write!(traj_csv, ",dim{a}");
    }
    traj_csv.push('\n');
    for (t, x) in dense_t.iter().zip(&dense.positions) {
        for (i, label) in labels.iter().enumerate() {
            let _ = write!(traj_csv, "{t},{label}");
            for a in 0..p {
                let _ = write!(traj_csv, ",{}", x[(i, a)]);
            }
            traj_csv.push('\n');
        }
    }
    write_file(&out.join("trajectories.csv"), traj_csv)?;

    let mut stress_csv = header_comment(Some(&hash));
    stress_csv.push_str("epoch,stress,displacement\n");
    let _ = writeln!(stress_csv, "0,{},", result.initial_stress);
    for (e, (f, d)) in result.stress_history.iter().zip(&result.displacement_history).enumerate() {
        let _ = writeln!(stress_csv, "{},{f},{d}", e + 1);
    }
    write_file(&out.join("stress.csv"), stress_csv)?;

    let at_grid = evaluate_trajectories(coeffs, &unit_grid)?;
    let mut fitted_csv = header_comment(Some(&hash));
    fitted_csv.push_str("t,i,j,d,d_hat\n");
    for (k, t) in grid.iter().enumerate() {
        for i in 0..tensor.n() {
            for j in i + 1..tensor.n() {
                let _ = writeln!(
                    fitted_csv,
                    "{t},{},{},{},{}",
                    i + 1,
                    j + 1,
                    tensor.get(k, i, j),
                    at_grid.fitted[k].get(i, j)
                );
            }
        }
    }
    write_file(&out.join("fitted.csv"), fitted_csv)?;

    let coords: Vec<Vec<Vec<f64>>> = (0..p)
        .map(|a| (0..labels.len()).map(|i| dense.positions.iter().map(|x| x[(i, a)]).collect()).collect())
        .collect();
    let meta = SvgMeta {
        title: "FMDS coordinates over time",
        manifest_hash: &hash,
        deterministic: args.output.deterministic,
    };
    write_file(&out.join("trajectories.svg"), svg::coordinates_vs_time(&dense_t, &coords, &labels, &meta))?;
    if p == 2 {
        let paths: Vec<Vec<(f64, f64)>> = (0..labels.len())
            .map(|i| dense.positions.iter().map(|x| (x[(i, 0)], x[(i, 1)])).collect())
            .collect();
        let meta = SvgMeta { title: "FMDS trajectories", ..meta };
        write_file(&out.join("path.svg"), svg::paths_2d(&paths, &labels, &meta))?;
    }

    let max_abs_error = at_grid.max_abs_error(&scaled)?;
    write_json(
        &out.join("summary.json"),
        &json!({
            "manifest_sha256": hash,
            "converged": result.converged,
            "epochs": result.epochs,
            "initial_stress": result.initial_stress,
            "final_stress": result.final_stress(),
            "max_abs_error": max_abs_error,
            "max_dissimilarity": tensor.max(),
            "n": tensor.n(),
            "m": tensor.m(),
            "dim": p,
            "basis_size": coeffs.q(),
        }),
    )?;
    println!(
        "{} after {} epochs: stress {:.6e} -> {:.6e}, max |d_hat - d| = {max_abs_error:.3e}",
        if result.converged { "converged" } else { "stopped" },
        result.epochs,
        result.initial_stress,
        result.final_stress()
    );
    Ok(())
}

pub fn run_verify(args: &VerifyArgs) -> Result<()> {
    let report = verify::run_all(args.seed)?;
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

pub fn run_synth(args: &SynthArgs) -> Result<()> {
    let scenario = SyntheticScenario {
        kind: args.scenario.into(),
        n: args.n,
        p_true: args.p_true,
        m: args.m,
        noise_sd: args.noise_sd,
        seed: args.seed,
    };
    scenario.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let data = generate(&scenario)?;
    let out: PathBuf = args.out.clone();
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    write_json(&out.join("scenario.json"), &serde_json::to_value(&scenario).expect("scenario serializes"))?;
    write_file(&out.join("tensor.csv"), tensor_csv(&data.tensor, None))?;
    if scenario.p_true == 1 {
        write_file(&out.join("panel.csv"), panel_csv(&data.panel))?;
    }
    let mut truth = String::from("t,object");
    for a in 1..=scenario.p_true {
        let _ = write!(truth, ",dim{a}");
    }
    truth.push('\n');
    for (t, x) in data.panel.time_grid().iter().zip(&data.truth) {
        for (i, label) in data.panel.labels().iter().enumerate() {
            let _ = write!(truth, "{t},{label}");
            for v in x.row(i).iter() {
                let _ = write!(truth, ",{v}");
            }
            truth.push('\n');
        }
    }
    write_file(&out.join("truth.csv"), truth)?;
    println!("wrote {:?} scenario ({} objects, {} time points) to {}", scenario.kind, args.n, args.m, out.display());
    Ok(())
}
