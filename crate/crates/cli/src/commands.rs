use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;
use serrin_core::branch::{branch_report, trace_branch_with, BranchSettings};
use serrin_core::collocation::{AngularSymmetry, Resolution, SolverOptions};
use serrin_core::geometry::{Axis, BoundaryProfile, CosineSeries, ModeIndex};
use serrin_core::io::{fmt_f64, ResultBundle, RunConfig};
use serrin_core::linearization::fd_derivative_h_with;
use serrin_core::mode_ode::chebyshev_grid;
use serrin_core::spectrum::{bifurcation_record, eigen_curve, find_lambda_n, BifurcationRecord};
use serrin_core::torsion::{serrin_defect, solve_torsion_with};
use serrin_core::verify::{run_battery, VerifyConfig};
use serrin_core::{Error, Fault, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
    NumericalFailure,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::CheckFailed => "check-failure",
            Status::NumericalFailure => "numerical-failure",
        }
    }
}

fn axes(cfg: &RunConfig) -> Result<Vec<Axis>> {
    match cfg.get_str("axis").unwrap_or("both") {
        "both" => Ok(vec![Axis::Xi, Axis::Eta]),
        s => Ok(vec![s.parse()?]),
    }
}

fn single_axis(cfg: &RunConfig) -> Result<Axis> {
    Ok(cfg.get_str("axis").unwrap_or("xi").parse()?)
}

fn resolution(cfg: &RunConfig, default: Resolution) -> Result<Resolution> {
    Ok(cfg.get("resolution", default)?)
}

fn float_list(cfg: &RunConfig, key: &str) -> Result<Option<Vec<f64>>> {
    let Some(raw) = cfg.get_str(key) else {
        return Ok(None);
    };
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("cannot parse {key} entry '{s}'")).into()))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn close(mut bundle: ResultBundle, dir: &Path, status: Status) -> Result<Status> {
    bundle.status = status.label().to_string();
    let path = bundle.finish(dir)?;
    println!("{}: {} ({} files, manifest {})", bundle.command, bundle.status, bundle.files.len(), path.display());
    for m in &bundle.messages {
        println!("  {m}");
    }
    Ok(status)
}

pub fn sweep(cfg: &RunConfig, dir: &Path) -> Result<Status> {
    let axes = axes(cfg)?;
    let (n0, n1) = cfg.range("n", (0, 8))?;
    let points: usize = cfg.get("points", 400)?;
    let lo = cfg.angle("lambda_min", 1e-3)?;
    let hi = cfg.angle("lambda_max", FRAC_PI_2 - 1e-3)?;
    if points < 2 || lo >= hi {
        return Err(Error::Config("sweep needs points >= 2 and lambda_min < lambda_max".into()).into());
    }
    let grid = chebyshev_grid(lo, hi, points);
    let items: Vec<ModeIndex> = axes.iter().flat_map(|&a| (n0..=n1).map(move |n| ModeIndex::new(a, n))).collect();
    let curves: Vec<_> = items.par_iter().map(|m| eigen_curve(*m, &grid, &Settings::default())).collect();

    let mut bundle = ResultBundle::new("sweep", cfg);
    let mut status = Status::Ok;
    for (mode, curve) in items.iter().zip(curves) {
        match curve {
            Ok(c) => {
                bundle.write(dir, &format!("sweep_{}_n{}.csv", mode.axis, mode.n), c.to_csv().as_bytes())?;
            }
            Err(e) => {
                status = Status::NumericalFailure;
                bundle.messages.push(format!("{}:{} failed: {e}", mode.axis, mode.n));
            }
        }
    }
    close(bundle, dir, status)
}

fn roots_csv(records: &[BifurcationRecord]) -> String {
    let mut s = String::from("axis,n,lambda,sigma_at_root,sigma_prime_numeric,sigma_prime_closed_form,relative_diff\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.axis,
            r.n,
            fmt_f64(r.lambda),
            fmt_f64(r.sigma_at_root),
            fmt_f64(r.sigma_prime_numeric),
            fmt_f64(r.sigma_prime_closed_form),
            fmt_f64(r.sigma_prime_relative_diff)
        ));
    }
    s
}

pub fn roots(cfg: &RunConfig, dir: &Path) -> Result<Status> {
    let axes = axes(cfg)?;
    let (n0, n1) = cfg.range("n", (2, 8))?;
    if n0 < 2 {
        return Err(Error::Precondition("bifurcation points exist only for n >= 2".into()).into());
    }
    let tol = cfg.tolerance("tol", 1e-12)?;
    let mut bundle = ResultBundle::new("roots", cfg);
    let mut status = Status::Ok;
    for axis in axes {
        let modes: Vec<ModeIndex> = (n0..=n1).map(|n| ModeIndex::new(axis, n)).collect();
        let found: Vec<_> =
            modes.par_iter().map(|m| find_lambda_n(*m, tol).and_then(|p| bifurcation_record(&p))).collect();
        let mut records = Vec::new();
        for (m, r) in modes.iter().zip(found) {
            match r {
                Ok(r) => records.push(r),
                Err(e) => {
                    status = Status::NumericalFailure;
                    bundle.messages.push(format!("{axis}:{} failed: {e}", m.n));
                }
            }
        }
        bundle.write(dir, &format!("roots_{axis}.csv"), roots_csv(&records).as_bytes())?;
        bundle.write(dir, &format!("roots_{axis}.json"), serde_json::to_string_pretty(&records)?.as_bytes())?;
    }
    close(bundle, dir, status)
}

fn solver_options(cfg: &RunConfig) -> Result<SolverOptions> {
    let symmetry = match cfg.get_str("symmetry").unwrap_or("even") {
        "even" => AngularSymmetry::Even,
        "full" => AngularSymmetry::Full,
        other => return Err(Error::Config(format!("symmetry must be even or full, got '{other}'")).into()),
    };
    Ok(SolverOptions { symmetry, fault: Fault::None })
}

fn load_profile(cfg: &RunConfig) -> Result<BoundaryProfile> {
    if let Some(path) = cfg.get_str("profile") {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{path}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| Error::Config(format!("{path}: {e}")).into());
    }
    let axis = single_axis(cfg)?;
    if let Some(c) = float_list(cfg, "coeffs")? {
        return Ok(BoundaryProfile::new(axis, c)?);
    }
    Ok(BoundaryProfile::constant(axis, cfg.angle("lambda", 0.6)?)?)
}

pub fn solve(cfg: &RunConfig, dir: &Path) -> Result<Status> {
    let profile = load_profile(cfg)?;
    let res = resolution(cfg, Resolution::new(64, 64))?;
    let field = solve_torsion_with(&profile, res, solver_options(cfg)?)?;
    let mut bundle = ResultBundle::new("solve", cfg);
    bundle.write(dir, "solve_header.json", serde_json::to_string_pretty(&field.header_json())?.as_bytes())?;
    bundle.write(dir, "solve_field.csv", field.field_csv().as_bytes())?;
    bundle.write(dir, "solve_trace.csv", field.trace_csv().as_bytes())?;
    bundle.messages.push(format!("serrin defect {:.3e}", serrin_defect(&field)));
    close(bundle, dir, Status::Ok)
}

pub fn check_linearization(cfg: &RunConfig, dir: &Path) -> Result<Status> {
    let axis = single_axis(cfg)?;
    let lambda = cfg.angle("lambda", 0.6)?;
    let m: usize = cfg.get("mode", 2)?;
    let steps = float_list(cfg, "steps")?.unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4]);
    let res = resolution(cfg, Resolution::new(48, 48))?;
    let tol = cfg.tolerance("tol", 1e-4)?;
    let w = CosineSeries::mode(m);
    let fd = fd_derivative_h_with(axis, lambda, &w, &steps, res, solver_options(cfg)?)?;

    let mut values = String::from("angle,fd_derivative,linearized\n");
    for ((a, v), r) in fd.angles.iter().zip(&fd.values).zip(&fd.reference) {
        values.push_str(&format!("{},{},{}\n", fmt_f64(*a), fmt_f64(*v), fmt_f64(*r)));
    }
    let stem = format!("linearization_{axis}_m{m}");
    let mut bundle = ResultBundle::new("check-linearization", cfg);
    bundle.write(dir, &format!("{stem}_steps.csv"), fd.table_csv().as_bytes())?;
    bundle.write(dir, &format!("{stem}_values.csv"), values.as_bytes())?;
    let passed = fd.extrapolated_deviation < tol;
    let summary = serde_json::json!({
        "axis": axis,
        "lambda": lambda,
        "mode": m,
        "steps": steps,
        "resolution": res.to_string(),
        "extrapolated_deviation": fd.extrapolated_deviation,
        "observed_order": fd.observed_order,
        "tolerance": tol,
        "passed": passed,
    });
    bundle.write(dir, &format!("{stem}.json"), serde_json::to_string_pretty(&summary)?.as_bytes())?;
    bundle.messages.push(format!("relative deviation {:.3e} (tolerance {tol:e})", fd.extrapolated_deviation));
    close(bundle, dir, if passed { Status::Ok } else { Status::CheckFailed })
}

pub fn branch(cfg: &RunConfig, dir: &Path) -> Result<Status> {
    let axis = single_axis(cfg)?;
    let j: u32 = cfg.get("mode", 2)?;
    let mode = ModeIndex::new(axis, j);
    mode.require_bifurcation_index()?;
    let defaults = BranchSettings::default();
    let settings = BranchSettings {
        s_max: cfg.get("smax", defaults.s_max)?,
        n_steps: cfg.get("steps", defaults.n_steps)?,
        resolution: resolution(cfg, defaults.resolution)?,
        truncation: cfg.get("truncation", defaults.truncation)?,
        newton_tol: cfg.tolerance("newton_tol", defaults.newton_tol)?,
        ..defaults
    };
    let run = trace_branch_with(mode, &settings, &Settings::default())?;
    let report = branch_report(&run);
    let stem = format!("branch_{axis}_j{j}");
    let profiles: Vec<_> = run.points.iter().map(|p| serde_json::json!({ "s": p.s, "profile": p.profile })).collect();
    let archive = serde_json::json!({
        "mode": mode,
        "settings": run.settings,
        "certificate": run.certificate,
        "radial_error": run.radial_error,
        "defect_tol": run.defect_tol,
        "termination": run.termination,
        "base_volume_fraction": report.base_volume_fraction,
        "profiles": profiles,
    });
    let mut bundle = ResultBundle::new("branch", cfg);
    bundle.write(dir, &format!("{stem}.json"), serde_json::to_string_pretty(&archive)?.as_bytes())?;
    bundle.write(dir, &format!("{stem}.csv"), report.to_csv().as_bytes())?;
    bundle.messages.push(format!("termination {:?}, {} points", run.termination, run.points.len()));
    close(bundle, dir, if run.completed() { Status::Ok } else { Status::NumericalFailure })
}

pub fn verify(cfg: &RunConfig, dir: &Path) -> Result<Status> {
    let defaults = VerifyConfig::default();
    let config = VerifyConfig {
        axes: axes(cfg)?,
        resolution: resolution(cfg, defaults.resolution)?,
        fault: cfg.get_str("fault").map(str::parse).transpose()?.unwrap_or(Fault::None),
    };
    let matrix = run_battery(&config);
    let mut bundle = ResultBundle::new("verify", cfg);
    bundle.write(dir, "verify.csv", matrix.to_csv().as_bytes())?;
    bundle.write(dir, "verify.json", serde_json::to_string_pretty(&matrix)?.as_bytes())?;
    for r in matrix.failed() {
        bundle.messages.push(format!("FAIL {}: {}", r.id, r.detail));
    }
    let passed = matrix.rows.iter().filter(|r| r.passed).count();
    bundle.messages.push(format!("{passed}/{} rows pass", matrix.rows.len()));
    close(bundle, dir, if matrix.all_passed() { Status::Ok } else { Status::CheckFailed })
}
