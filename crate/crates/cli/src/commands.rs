//! The three pipeline commands. Each returns a process exit code:
//! 0 success, 1 input error, 2 failed hypothesis/verdict, 3 non-convergence.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::json;

use anisoreg_core::diagnostics::moser_report;
use anisoreg_core::exponents::{check_admissibility, derive_exponents};
use anisoreg_core::field::Field;
use anisoreg_core::solver::{energy, minimize};

use crate::config::{boundary_field, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

fn out_dir(cfg: &RunConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value).expect("serializable"))
        .with_context(|| format!("writing {}", path.display()))
}

/// Check the regularity hypotheses and emit the exponent report.
pub fn cmd_check(cfg: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let dir = out_dir(cfg, out);
    fs::create_dir_all(&dir)?;
    let profile = cfg.integrand.profile();
    let report = check_admissibility(profile);
    let derived = derive_exponents(profile);

    let mut doc = json!({
        "admissibility": report.to_json(),
    });
    match &derived {
        Ok(d) => {
            doc["derived"] = d.to_json();
        }
        Err(e) => {
            doc["derived"] = json!(null);
            doc["derived_error"] = json!(e.to_string());
        }
    }
    write_json(&dir.join("check_report.json"), &doc)?;

    for c in &report.checks {
        let mark = if c.pass { "pass" } else { "FAIL" };
        println!("{}  {}: {}", mark, c.name, c.label);
    }
    if let Ok(d) = &derived {
        println!(
            "theta = ({}, {}, {}); restriction lhs = {}; qs' = {}; sigma_bar_star = {}",
            d.theta1, d.theta2, d.theta3, d.restriction_lhs, d.qs_prime, d.sigma_star
        );
    }
    println!("admissible: {}", report.admissible);
    Ok(if report.admissible { EXIT_OK } else { EXIT_HYPOTHESIS })
}

/// Minimize the discrete energy under the configured boundary trace.
pub fn cmd_solve(cfg: &RunConfig, out: Option<&Path>, force: bool) -> Result<i32> {
    let report = check_admissibility(cfg.integrand.profile());
    if !report.admissible && !force {
        eprintln!("profile fails the regularity hypotheses; rerun check or pass --force");
        return Ok(EXIT_HYPOTHESIS);
    }
    let dir = out_dir(cfg, out);
    fs::create_dir_all(&dir)?;
    let boundary = match boundary_field(cfg) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{e}");
            return Ok(EXIT_INPUT);
        }
    };
    let outcome = minimize(&cfg.integrand, &cfg.grid, &boundary, &cfg.solver)?;

    let field_path = dir.join("field.csv");
    let mut buf = Vec::new();
    outcome.field.write_csv(&cfg.grid, &mut buf)?;
    fs::write(&field_path, buf)?;

    let mut log = String::from("iter,energy,grad_norm,step\n");
    for rec in &outcome.log {
        log.push_str(&format!("{},{},{},{}\n", rec.iter, rec.energy, rec.grad_norm, rec.step));
    }
    fs::write(dir.join("iterations.csv"), log)?;

    write_json(
        &dir.join("solve_summary.json"),
        &json!({
            "converged": outcome.converged,
            "iterations": outcome.iterations,
            "final_energy": outcome.final_energy,
            "final_grad_norm": outcome.final_grad_norm,
            "stop_reason": outcome.stop_reason,
            "field": field_path.to_string_lossy(),
        }),
    )?;

    println!(
        "solve: converged={} iterations={} energy={:.12e} grad_norm={:.3e}",
        outcome.converged, outcome.iterations, outcome.final_energy, outcome.final_grad_norm
    );
    Ok(if outcome.converged { EXIT_OK } else { EXIT_NO_CONVERGENCE })
}

/// Run the diagnostic chain on a previously solved field.
pub fn cmd_diagnose(cfg: &RunConfig, field_path: &Path, out: Option<&Path>) -> Result<i32> {
    let dir = out_dir(cfg, out);
    fs::create_dir_all(&dir)?;
    let text = match fs::File::open(field_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("cannot open {}: {e}", field_path.display());
            return Ok(EXIT_INPUT);
        }
    };
    let field = match Field::read_csv(&cfg.grid, std::io::BufReader::new(text)) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("field file rejected: {e}");
            return Ok(EXIT_INPUT);
        }
    };
    if field.m() != cfg.integrand.m() {
        eprintln!(
            "field has m = {}, integrand expects m = {}",
            field.m(),
            cfg.integrand.m()
        );
        return Ok(EXIT_INPUT);
    }
    let derived = match derive_exponents(cfg.integrand.profile()) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("exponents underivable: {e}");
            return Ok(EXIT_HYPOTHESIS);
        }
    };

    let report = moser_report(&cfg.integrand, &cfg.grid, &field, &derived, &cfg.diagnostics)?;

    let recomputed_energy = energy(&cfg.integrand, &cfg.grid, &field)?;
    let mut doc = report.to_json();
    doc["recomputed_energy"] = json!(recomputed_energy);
    write_json(&dir.join("moser_report.json"), &doc)?;

    let mut buf = Vec::new();
    report.write_moser_csv(&mut buf)?;
    fs::write(dir.join("moser_sequence.csv"), &buf)?;
    buf.clear();
    report.write_bounds_csv(&mut buf)?;
    fs::write(dir.join("bound_fits.csv"), &buf)?;

    for v in &report.verdicts {
        let mark = if v.pass { "pass" } else { "FAIL" };
        println!("{mark}  {}: observed {:.4e} vs threshold {:.4e}", v.name, v.observed, v.threshold);
    }
    println!("diagnostics pass: {}", report.pass);
    Ok(if report.pass { EXIT_OK } else { EXIT_HYPOTHESIS })
}
