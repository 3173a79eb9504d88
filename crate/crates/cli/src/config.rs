//! Run configuration: JSON schema, validation with field paths, preset
//! resolution.
//!
//! Rationals are strings (`"4"`, `"6/5"`, `"inf"`); every validation failure
//! names the offending field path so a bad config is a one-line fix.

use std::fmt;

use serde::Deserialize;

use anisoreg_core::diagnostics::{DiagnosticThresholds, DiagnosticsOptions};
use anisoreg_core::exponents::AnisotropyProfile;
use anisoreg_core::field::Field;
use anisoreg_core::grid::{build_grid, BoxDomain, GridDomain};
use anisoreg_core::integrand::{Integrand, WeightSpec};
use anisoreg_core::presets;
use anisoreg_core::rational::{parse_rational, rational_to_f64, BigRational, ExtRational};
use anisoreg_core::solver::SolverConfig;

#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: &str, message: impl Into<String>) -> Self {
        ConfigError { path: path.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at {}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub profile: Option<RawProfile>,
    pub integrand: Option<RawIntegrand>,
    pub grid: Option<RawGrid>,
    pub boundary: Option<RawBoundary>,
    #[serde(default)]
    pub solver: RawSolver,
    #[serde(default)]
    pub diagnostics: RawDiagnostics,
    pub output: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProfile {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub p: Option<Vec<String>>,
    pub q: Option<String>,
    pub r: Option<Vec<String>>,
    pub s: Option<String>,
    pub tau: Option<String>,
    pub sigma_star_choice: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawIntegrand {
    pub preset: Option<String>,
    pub weights: Option<Vec<RawWeight>>,
    pub beta: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWeight {
    pub c: f64,
    pub alpha: String,
    #[serde(default)]
    pub kappa: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    /// Per-axis `[lo, hi]` pairs.
    #[serde(rename = "box")]
    pub box_corners: Option<Vec<[f64; 2]>>,
    pub resolution: Option<usize>,
    pub singular_at_origin: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawBoundary {
    Constant { value: Vec<f64> },
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    Coordinates,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawSolver {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub initial_step: f64,
}

impl Default for RawSolver {
    fn default() -> Self {
        let d = SolverConfig::default();
        RawSolver {
            grad_tol: d.grad_tol,
            max_iters: d.max_iters,
            armijo_c: d.armijo_c,
            backtrack_factor: d.backtrack_factor,
            initial_step: d.initial_step,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawDiagnostics {
    pub x0: Option<Vec<f64>>,
    pub radius_multipliers: Vec<f64>,
    pub h_max: usize,
    pub gammas: Vec<f64>,
    pub limit_gap_max: f64,
    pub c1_spread_max: f64,
    pub caccioppoli_cap: f64,
}

impl Default for RawDiagnostics {
    fn default() -> Self {
        let d = DiagnosticsOptions::default();
        RawDiagnostics {
            x0: None,
            radius_multipliers: d.radius_multipliers,
            h_max: d.h_max,
            gammas: d.gammas,
            limit_gap_max: d.thresholds.limit_gap_max,
            c1_spread_max: d.thresholds.c1_spread_max,
            caccioppoli_cap: d.thresholds.caccioppoli_cap,
        }
    }
}

/// Fully resolved configuration, ready to drive the pipeline.
pub struct RunConfig {
    pub integrand: Integrand,
    pub grid: GridDomain,
    pub boundary_kind: Option<RawBoundary>,
    pub solver: SolverConfig,
    pub diagnostics: DiagnosticsOptions,
    pub output: Option<String>,
}

fn rational_field(path: &str, value: &str) -> Result<BigRational, ConfigError> {
    parse_rational(value).map_err(|e| ConfigError::new(path, e.to_string()))
}

fn ext_field(path: &str, value: &str) -> Result<ExtRational, ConfigError> {
    value
        .parse::<ExtRational>()
        .map_err(|e| ConfigError::new(path, e.to_string()))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| ConfigError::new("<json>", e.to_string()))?;
    resolve_config(raw)
}

pub fn resolve_config(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let integrand_raw = raw.integrand.unwrap_or_default();

    // m may be overridden even with a preset
    let m = raw.profile.as_ref().and_then(|p| p.m).unwrap_or(2);

    let preset = match &integrand_raw.preset {
        Some(name) => Some(
            presets::by_name(name, m)
                .map_err(|e| ConfigError::new("integrand.preset", e.to_string()))?,
        ),
        None => None,
    };

    // profile: preset base with per-field overrides, or fully explicit
    let profile = match (&preset, &raw.profile) {
        (Some(p), maybe_overrides) => {
            let base = p.integrand.profile();
            let o = maybe_overrides.as_ref();
            build_profile_with_base(base, o)?
        }
        (None, Some(p)) => build_profile(p)?,
        (None, None) => {
            return Err(ConfigError::new("profile", "missing (no preset selected)"));
        }
    };

    // weights: preset's, unless explicit weights are given
    let integrand = match (&preset, &integrand_raw.weights) {
        (_, Some(ws)) => {
            let mut weights = Vec::new();
            for (i, w) in ws.iter().enumerate() {
                let alpha = rational_field(&format!("integrand.weights[{i}].alpha"), &w.alpha)?;
                weights.push(WeightSpec { c: w.c, alpha: rational_to_f64(&alpha), kappa: w.kappa });
            }
            let beta = match &integrand_raw.beta {
                Some(b) => rational_to_f64(&rational_field("integrand.beta", b)?),
                None => 0.0,
            };
            Integrand::new(profile, weights, beta)
                .map_err(|e| ConfigError::new("integrand.weights", e.to_string()))?
        }
        (Some(p), None) => {
            let weights = p.integrand.weights().to_vec();
            let beta = p.integrand.beta();
            Integrand::new(profile, weights, beta)
                .map_err(|e| ConfigError::new("integrand", e.to_string()))?
        }
        (None, None) => {
            return Err(ConfigError::new("integrand", "missing: give a preset or explicit weights"));
        }
    };

    // grid: preset domain/singularity as defaults
    let grid_raw = raw.grid.unwrap_or_default();
    let box_domain = match (grid_raw.box_corners, &preset) {
        (Some(entries), _) => {
            let lo: Vec<f64> = entries.iter().map(|e| e[0]).collect();
            let hi: Vec<f64> = entries.iter().map(|e| e[1]).collect();
            BoxDomain::new(lo, hi).map_err(|e| ConfigError::new("grid.box", e.to_string()))?
        }
        (None, Some(p)) => p.domain.clone(),
        (None, None) => return Err(ConfigError::new("grid.box", "missing")),
    };
    let resolution = grid_raw
        .resolution
        .ok_or_else(|| ConfigError::new("grid.resolution", "missing"))?;
    let singular = grid_raw
        .singular_at_origin
        .or(preset.as_ref().map(|p| p.singular_at_origin))
        .unwrap_or(integrand.singular_at_origin());
    if integrand.singular_at_origin() && !singular {
        return Err(ConfigError::new(
            "grid.singular_at_origin",
            "integrand is singular at the origin; the flag cannot be disabled",
        ));
    }
    let grid = build_grid(box_domain, resolution, singular)
        .map_err(|e| ConfigError::new("grid", e.to_string()))?;

    let solver = SolverConfig {
        grad_tol: raw.solver.grad_tol,
        max_iters: raw.solver.max_iters,
        armijo_c: raw.solver.armijo_c,
        backtrack_factor: raw.solver.backtrack_factor,
        initial_step: raw.solver.initial_step,
    };
    solver
        .validate()
        .map_err(|e| ConfigError::new("solver", e.to_string()))?;

    let d = raw.diagnostics;
    let diagnostics = DiagnosticsOptions {
        x0: d.x0,
        radius_multipliers: d.radius_multipliers,
        h_max: d.h_max,
        gammas: d.gammas,
        thresholds: DiagnosticThresholds {
            limit_gap_max: d.limit_gap_max,
            c1_spread_max: d.c1_spread_max,
            caccioppoli_cap: d.caccioppoli_cap,
        },
    };

    Ok(RunConfig {
        integrand,
        grid,
        boundary_kind: raw.boundary,
        solver,
        diagnostics,
        output: raw.output,
    })
}

fn build_profile(p: &RawProfile) -> Result<AnisotropyProfile, ConfigError> {
    let n = p.n.ok_or_else(|| ConfigError::new("profile.n", "missing"))?;
    let m = p.m.unwrap_or(1);
    let p_list = p.p.as_ref().ok_or_else(|| ConfigError::new("profile.p", "missing"))?;
    let q = p.q.as_ref().ok_or_else(|| ConfigError::new("profile.q", "missing"))?;
    let r_list = p.r.as_ref().ok_or_else(|| ConfigError::new("profile.r", "missing"))?;
    let s = p.s.as_ref().ok_or_else(|| ConfigError::new("profile.s", "missing"))?;
    let tau = p.tau.as_ref().ok_or_else(|| ConfigError::new("profile.tau", "missing"))?;

    let mut p_vals = Vec::new();
    for (i, v) in p_list.iter().enumerate() {
        p_vals.push(rational_field(&format!("profile.p[{i}]"), v)?);
    }
    let mut r_vals = Vec::new();
    for (i, v) in r_list.iter().enumerate() {
        r_vals.push(ext_field(&format!("profile.r[{i}]"), v)?);
    }
    let q = rational_field("profile.q", q)?;
    let s = ext_field("profile.s", s)?;
    let tau = rational_field("profile.tau", tau)?;
    let choice = match &p.sigma_star_choice {
        Some(c) => Some(rational_field("profile.sigma_star_choice", c)?),
        None => None,
    };
    AnisotropyProfile::new(n, m, p_vals, q, r_vals, s, tau, choice)
        .map_err(|e| ConfigError::new("profile", e.to_string()))
}

/// Preset profile with optional per-field overrides.
fn build_profile_with_base(
    base: &AnisotropyProfile,
    overrides: Option<&RawProfile>,
) -> Result<AnisotropyProfile, ConfigError> {
    let mut n = base.n;
    let mut m = base.m;
    let mut p_vals = base.p.clone();
    let mut q = base.q.clone();
    let mut r_vals = base.r.clone();
    let mut s = base.s.clone();
    let mut tau = base.tau.clone();
    let mut choice = base.sigma_star_choice.clone();
    if let Some(o) = overrides {
        if let Some(v) = o.n {
            n = v;
        }
        if let Some(v) = o.m {
            m = v;
        }
        if let Some(list) = &o.p {
            p_vals.clear();
            for (i, v) in list.iter().enumerate() {
                p_vals.push(rational_field(&format!("profile.p[{i}]"), v)?);
            }
        }
        if let Some(v) = &o.q {
            q = rational_field("profile.q", v)?;
        }
        if let Some(list) = &o.r {
            r_vals.clear();
            for (i, v) in list.iter().enumerate() {
                r_vals.push(ext_field(&format!("profile.r[{i}]"), v)?);
            }
        }
        if let Some(v) = &o.s {
            s = ext_field("profile.s", v)?;
        }
        if let Some(v) = &o.tau {
            tau = rational_field("profile.tau", v)?;
        }
        if let Some(v) = &o.sigma_star_choice {
            choice = Some(rational_field("profile.sigma_star_choice", v)?);
        }
    }
    AnisotropyProfile::new(n, m, p_vals, q, r_vals, s, tau, choice)
        .map_err(|e| ConfigError::new("profile", e.to_string()))
}

/// Build the Dirichlet boundary field for a solve.
pub fn boundary_field(cfg: &RunConfig) -> Result<Field, ConfigError> {
    let m = cfg.integrand.m();
    let n = cfg.grid.n();
    match &cfg.boundary_kind {
        None => Err(ConfigError::new("boundary", "missing (required by solve)")),
        Some(RawBoundary::Constant { value }) => {
            if value.len() != m {
                return Err(ConfigError::new(
                    "boundary.value",
                    format!("{} components for m = {m}", value.len()),
                ));
            }
            Field::constant(&cfg.grid, value)
                .map_err(|e| ConfigError::new("boundary", e.to_string()))
        }
        Some(RawBoundary::Affine { matrix, offset }) => {
            if offset.len() != m || matrix.len() != m || matrix.iter().any(|row| row.len() != n) {
                return Err(ConfigError::new(
                    "boundary.matrix",
                    format!("need an {m} x {n} matrix and offset of length {m}"),
                ));
            }
            let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
            Field::affine(&cfg.grid, &flat, offset)
                .map_err(|e| ConfigError::new("boundary", e.to_string()))
        }
        Some(RawBoundary::Coordinates) => {
            if m != n {
                return Err(ConfigError::new(
                    "boundary.kind",
                    format!("coordinates boundary needs m = n, got m = {m}, n = {n}"),
                ));
            }
            let mut flat = vec![0.0; m * n];
            for i in 0..n {
                flat[i * n + i] = 1.0;
            }
            Field::affine(&cfg.grid, &flat, &vec![0.0; m])
                .map_err(|e| ConfigError::new("boundary", e.to_string()))
        }
    }
}
