//! Empirical verification of the regularity proof chain on discrete fields.
//!
//! Every inequality in the chain carries an unspecified constant, so the
//! strongest falsifiable statement is: the fitted constant (realized
//! left-hand side over constant-free right-hand side) is finite, positive
//! and stable under refinement. This module computes those fits: the
//! envelope `G`, cut-off functions, Caccioppoli ratios, anisotropic
//! embedding ratios, the weighted Hoelder chain (exact on shared quadrature
//! nodes), the Moser sequence `(delta_h, R_h, M_h)`, the non-decreasing
//! `A(r)` and the two sup-norm bound fits.
//!
//! Quadrature is cell-center based, restricted to ball masks; `ess sup`
//! norms are node/cell maxima over the mask. Reductions are deterministic.

use num_rational::BigRational;
use num_traits::One;
use serde_json::{json, Value};

use crate::error::{CoreError, Result};
use crate::exponents::{sigma_component, DerivedExponents};
use crate::field::Field;
use crate::grid::GridDomain;
use crate::integrand::{pow_half, Integrand};
use crate::rational::{rational_to_f64, ExtRational, RationalJson};
use crate::reduce::{det_max, det_sum};

/// Radial cut-off: 1 on the inner ball, 0 outside the outer ball, linear
/// ramp in between. Lipschitz constant `1/(outer - inner)`, inside the
/// admissible budget `2/(outer - inner)`.
#[derive(Clone, Debug)]
pub struct CutoffSpec {
    pub center: Vec<f64>,
    pub inner: f64,
    pub outer: f64,
}

impl CutoffSpec {
    pub fn new(center: Vec<f64>, inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(CoreError::DiagnosticsDomain(format!(
                "cutoff needs 0 < inner < outer, got ({inner}, {outer})"
            )));
        }
        Ok(CutoffSpec { center, inner, outer })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        ((self.outer - d) / (self.outer - self.inner)).clamp(0.0, 1.0)
    }

    pub fn gradient_budget(&self) -> f64 {
        2.0 / (self.outer - self.inner)
    }
}

/// Node-wise envelope `G = max(|u|, 1)`.
pub fn g_envelope(field: &Field) -> Vec<f64> {
    let m = field.m();
    let nodes = field.values().len() / m;
    (0..nodes).map(|v| field.norm_at(v).max(1.0)).collect()
}

/// Cell-sampled view of a field: centers, gradient columns, corner-averaged
/// values, their norms, the envelope and the full energy density.
pub struct FieldOnCells {
    pub centers: Vec<f64>,
    pub xi: Vec<f64>,
    pub u_norm: Vec<f64>,
    pub u_avg: Vec<f64>,
    pub g: Vec<f64>,
    pub density: Vec<f64>,
    pub vol: f64,
    n: usize,
    m: usize,
}

impl FieldOnCells {
    pub fn xi_norm(&self, cell: usize, i: usize) -> f64 {
        let m = self.m;
        self.xi[(cell * self.n + i) * m..(cell * self.n + i + 1) * m]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn center(&self, cell: usize) -> &[f64] {
        &self.centers[cell * self.n..(cell + 1) * self.n]
    }
}

/// Sample a field and an integrand on every cell of the grid.
pub fn field_on_cells(integrand: &Integrand, grid: &GridDomain, field: &Field) -> Result<FieldOnCells> {
    if !field.matches_grid(grid) || field.m() != integrand.m() {
        return Err(CoreError::DimensionMismatch(
            "field does not match the grid/integrand dimensions".into(),
        ));
    }
    let n = grid.n();
    let m = field.m();
    let cells = grid.cell_count();
    let xi = crate::solver::discrete_gradient(grid, field)?;
    let mut centers = vec![0.0; cells * n];
    let mut u_avg = vec![0.0; cells * m];
    let mut u_norm = vec![0.0; cells];
    let mut g = vec![0.0; cells];
    let mut density = vec![0.0; cells];
    let mut corners = Vec::new();
    let p = integrand.p_f64();
    for c in 0..cells {
        grid.cell_center(c, &mut centers[c * n..(c + 1) * n]);
        grid.cell_corners(c, &mut corners);
        let avg = &mut u_avg[c * m..(c + 1) * m];
        for &node in &corners {
            for a in 0..m {
                avg[a] += field.value(node)[a];
            }
        }
        let scale = 1.0 / corners.len() as f64;
        let mut s2 = 0.0;
        for a in avg.iter_mut() {
            *a *= scale;
            s2 += *a * *a;
        }
        u_norm[c] = s2.sqrt();
        g[c] = u_norm[c].max(1.0);
        let mut f = 0.0;
        for i in 0..n {
            let w = integrand.full_weight(i, &centers[c * n..(c + 1) * n])?;
            let x2: f64 = xi[(c * n + i) * m..(c * n + i + 1) * m].iter().map(|v| v * v).sum();
            f += w * pow_half(x2, p[i]);
        }
        density[c] = f;
    }
    Ok(FieldOnCells { centers, xi, u_norm, u_avg, g, density, vol: grid.cell_volume(), n, m })
}

fn lp_norm(mask: &[usize], vol: f64, exponent: f64, value: impl Fn(usize) -> f64 + Sync) -> f64 {
    let integral = det_sum(mask.len(), |k| value(mask[k]).powf(exponent)) * vol;
    integral.powf(1.0 / exponent)
}

fn ess_sup(mask: &[usize], value: impl Fn(usize) -> f64 + Sync) -> f64 {
    det_max(mask.len(), |k| value(mask[k]))
}

/// `||lambda_i^{-1}||_{L^{r_i}}` over a cell mask; `r_i = inf` is the cell
/// maximum of `1/lambda_i`. Vanishing weights with finite `r_i` are an error.
fn weight_inverse_norm(
    integrand: &Integrand,
    foc: &FieldOnCells,
    i: usize,
    mask: &[usize],
) -> Result<f64> {
    let r_i = &integrand.profile().r[i];
    match r_i {
        ExtRational::Infinity => Ok(ess_sup(mask, |c| {
            let lam = integrand.eval_weight(i, foc.center(c));
            if lam == 0.0 {
                f64::INFINITY
            } else {
                1.0 / lam
            }
        })),
        ExtRational::Finite(r) => {
            for &c in mask {
                if integrand.eval_weight(i, foc.center(c)) == 0.0 {
                    return Err(CoreError::DegenerateWeight { index: i + 1, node: c });
                }
            }
            let r = rational_to_f64(r);
            Ok(lp_norm(mask, foc.vol, r, |c| 1.0 / integrand.eval_weight(i, foc.center(c))))
        }
    }
}

fn mu_norm(integrand: &Integrand, foc: &FieldOnCells, mask: &[usize]) -> Result<f64> {
    for &c in mask {
        integrand.mu_majorant(foc.center(c))?;
    }
    match &integrand.profile().s {
        ExtRational::Infinity => Ok(ess_sup(mask, |c| {
            integrand.mu_majorant(foc.center(c)).expect("checked above")
        })),
        ExtRational::Finite(s) => {
            let s = rational_to_f64(s);
            Ok(lp_norm(mask, foc.vol, s, |c| {
                integrand.mu_majorant(foc.center(c)).expect("checked above")
            }))
        }
    }
}

#[derive(Clone, Debug)]
pub struct MoserEntry {
    pub h: usize,
    /// Exact `delta_h = (sigma_bar_star / qs')^{h-1}`.
    pub delta: BigRational,
    /// `delta_h * qs'` as a float, the quadrature exponent.
    pub exponent: f64,
    pub radius: f64,
    pub inner_radius: f64,
    pub m_h: f64,
}

#[derive(Clone, Debug)]
pub struct MoserSequence {
    pub ratio: BigRational,
    pub entries: Vec<MoserEntry>,
    pub h_max: usize,
    /// True when the exponent outgrew the representable range and the
    /// sequence was cut short.
    pub truncated: bool,
}

/// The Moser sequence `(delta_h, R_h, M_h)` on shrinking balls
/// `R_h = (R/2)(1 + 2^{1-h})`, with `M_h` computed in log space.
pub fn moser_sequence(
    integrand: &Integrand,
    grid: &GridDomain,
    field: &Field,
    derived: &DerivedExponents,
    x0: &[f64],
    big_r: f64,
    h_max: usize,
) -> Result<MoserSequence> {
    if derived.qs_prime >= derived.sigma_star {
        return Err(CoreError::DiagnosticsDomain(format!(
            "qs' = {} is not below sigma_bar_star = {}; the iteration gains nothing",
            derived.qs_prime, derived.sigma_star
        )));
    }
    if h_max < 2 {
        return Err(CoreError::DiagnosticsDomain("h_max must be >= 2".into()));
    }
    if !grid.ball_inside(x0, big_r) {
        return Err(CoreError::DiagnosticsDomain(format!(
            "ball of radius {big_r} does not fit inside the grid box"
        )));
    }
    let foc = field_on_cells(integrand, grid, field)?;
    let ratio = derived.moser_ratio();
    let qs_prime = &derived.qs_prime;

    let mut entries = Vec::with_capacity(h_max);
    let mut truncated = false;
    let mut delta = BigRational::one();
    for h in 1..=h_max {
        let radius = 0.5 * big_r * (1.0 + 0.5f64.powi(h as i32 - 1));
        let inner_radius = 0.5 * big_r * (1.0 + 0.5f64.powi(h as i32));
        let exponent = rational_to_f64(&(&delta * qs_prime));
        let mask = grid.cells_in_ball(x0, radius);
        if mask.is_empty() {
            return Err(CoreError::DiagnosticsDomain(format!(
                "ball of radius {radius} captures no quadrature cells"
            )));
        }
        let ln_g_max = det_max(mask.len(), |k| foc.g[mask[k]].ln());
        if !exponent.is_finite() || exponent * ln_g_max.max(1.0) > 1e300 {
            truncated = true;
            break;
        }
        // log-space evaluation of (integral G^e)^{1/e}
        let shift = exponent * ln_g_max;
        let sum = det_sum(mask.len(), |k| (exponent * foc.g[mask[k]].ln() - shift).exp());
        let log_integral = shift + (sum * foc.vol).ln();
        let m_h = (log_integral / exponent).exp();
        entries.push(MoserEntry { h, delta: delta.clone(), exponent, radius, inner_radius, m_h });
        delta *= &ratio;
    }
    Ok(MoserSequence { ratio, entries, h_max, truncated })
}

#[derive(Clone, Debug)]
pub struct MoserLimitReport {
    pub m_last: f64,
    pub sup_g_inner: f64,
    pub limit_gap: f64,
    pub eventually_monotone: bool,
}

/// Compare the tail of the Moser sequence against the node-wise sup of `G`
/// over the limiting half ball.
pub fn check_moser_limit(
    sequence: &MoserSequence,
    grid: &GridDomain,
    field: &Field,
    x0: &[f64],
    big_r: f64,
) -> MoserLimitReport {
    let g = g_envelope(field);
    let nodes = grid.nodes_in_ball(x0, 0.5 * big_r);
    let sup_g_inner = nodes.iter().map(|&v| g[v]).fold(1.0f64, f64::max);
    let m_last = sequence.entries.last().map(|e| e.m_h).unwrap_or(f64::NAN);
    let limit_gap = (m_last - sup_g_inner).abs() / sup_g_inner;

    let ms: Vec<f64> = sequence.entries.iter().map(|e| e.m_h).collect();
    let diffs: Vec<f64> = ms.windows(2).map(|w| w[1] - w[0]).collect();
    let tail = diffs.len().saturating_sub((diffs.len() / 3).max(2));
    let tail_diffs = &diffs[tail.min(diffs.len().saturating_sub(1))..];
    let scale = ms.last().copied().unwrap_or(1.0).abs().max(1.0);
    let signs: Vec<i8> = tail_diffs
        .iter()
        .map(|&d| {
            if d.abs() <= 1e-14 * scale {
                0
            } else if d > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let eventually_monotone = signs.iter().all(|&s| s >= 0) || signs.iter().all(|&s| s <= 0);

    MoserLimitReport { m_last, sup_g_inner, limit_gap, eventually_monotone }
}

/// Fitted constant of the Caccioppoli-type estimate for one direction and
/// one power `gamma`: realized left side over the constant-free right side.
pub fn caccioppoli_constant(
    integrand: &Integrand,
    grid: &GridDomain,
    field: &Field,
    direction: usize,
    gamma: f64,
    cutoff: &CutoffSpec,
) -> Result<f64> {
    if direction >= integrand.n() {
        return Err(CoreError::DiagnosticsDomain(format!(
            "direction {direction} out of range for n = {}",
            integrand.n()
        )));
    }
    if gamma < 0.0 {
        return Err(CoreError::DiagnosticsDomain("gamma must be >= 0".into()));
    }
    let foc = field_on_cells(integrand, grid, field)?;
    let mask = grid.cells_in_ball(&cutoff.center, cutoff.outer);
    let p_i = integrand.p_f64()[direction];
    let q = integrand.q_f64();
    let pg = p_i * gamma;

    let lhs = det_sum(mask.len(), |k| {
        let c = mask[k];
        let lam = integrand.eval_weight(direction, foc.center(c));
        let eta = cutoff.eval(foc.center(c));
        lam * foc.u_norm[c].powf(pg) * foc.xi_norm(c, direction).powf(p_i) * eta.powf(q)
    }) * foc.vol;

    let rhs0 = det_sum(mask.len(), |k| {
        let c = mask[k];
        let mu = integrand.mu_majorant(foc.center(c)).expect("mask avoids the singularity");
        mu * foc.g[c].powf(q + pg)
    }) * foc.vol
        / (cutoff.outer - cutoff.inner).powf(q);

    if rhs0 == 0.0 {
        return Err(CoreError::DiagnosticsDomain(
            "Caccioppoli right side vanished; the majorant is degenerate on the mask".into(),
        ));
    }
    Ok(lhs / rhs0)
}

/// Which anisotropic embedding inequality to fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingForm {
    /// Zero-trace form: `||v||_{sigma_bar_star} <= c prod ||v_{x_i}||_{sigma_i}^{1/n}`.
    ZeroTrace,
    /// Cube form: `||v||_{sigma_bar_star} <= c (||v||_1 + sum ||v_{x_i}||_{sigma_i})`.
    Cube,
}

/// Fitted embedding constant over the whole grid box.
pub fn embedding_ratio(
    integrand: &Integrand,
    grid: &GridDomain,
    field: &Field,
    derived: &DerivedExponents,
    form: EmbeddingForm,
) -> Result<f64> {
    let foc = field_on_cells(integrand, grid, field)?;
    let n = grid.n();
    let all: Vec<usize> = (0..grid.cell_count()).collect();
    let sigma: Vec<f64> = derived.sigma.iter().map(rational_to_f64).collect();
    let sigma_star = rational_to_f64(&derived.sigma_star);

    let lhs = lp_norm(&all, foc.vol, sigma_star, |c| foc.u_norm[c]);
    if lhs == 0.0 {
        return Ok(0.0);
    }
    match form {
        EmbeddingForm::ZeroTrace => {
            let peak = det_max(field.values().len(), |i| field.values()[i].abs());
            for node in 0..grid.node_count() {
                if grid.is_boundary_node(node) && field.norm_at(node) > 1e-13 * peak.max(1.0) {
                    return Err(CoreError::DiagnosticsDomain(
                        "zero-trace embedding form needs a field vanishing on the boundary".into(),
                    ));
                }
            }
            let mut rhs = 1.0;
            for i in 0..n {
                let norm = lp_norm(&all, foc.vol, sigma[i], |c| foc.xi_norm(c, i));
                rhs *= norm.powf(1.0 / n as f64);
            }
            Ok(lhs / rhs)
        }
        EmbeddingForm::Cube => {
            let l1 = det_sum(all.len(), |k| foc.u_norm[all[k]]) * foc.vol;
            let mut rhs = l1;
            for i in 0..n {
                rhs += lp_norm(&all, foc.vol, sigma[i], |c| foc.xi_norm(c, i));
            }
            Ok(lhs / rhs)
        }
    }
}

/// Quadrature region for the weighted norm chain.
#[derive(Clone, Debug)]
pub enum Region {
    WholeBox,
    Ball { center: Vec<f64>, radius: f64 },
}

impl Region {
    fn mask(&self, grid: &GridDomain) -> Vec<usize> {
        match self {
            Region::WholeBox => (0..grid.cell_count()).collect(),
            Region::Ball { center, radius } => grid.cells_in_ball(center, *radius),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormChain {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Both sides of the weighted Hoelder chain
/// `||u_{x_j}||_{sigma_j}^{p_j} <= ||lambda_j^{-1}||_{r_j} * integral lambda_j |u_{x_j}|^{p_j}`.
/// With shared quadrature nodes this is exact discrete Hoelder; the
/// tolerance covers rounding only.
pub fn weighted_norm_chain(
    integrand: &Integrand,
    grid: &GridDomain,
    field: &Field,
    j: usize,
    region: &Region,
) -> Result<NormChain> {
    if j >= integrand.n() {
        return Err(CoreError::DiagnosticsDomain(format!(
            "direction {j} out of range for n = {}",
            integrand.n()
        )));
    }
    let foc = field_on_cells(integrand, grid, field)?;
    let mask = region.mask(grid);
    if mask.is_empty() {
        return Err(CoreError::DiagnosticsDomain("region captures no cells".into()));
    }
    let profile = integrand.profile();
    let p_j = integrand.p_f64()[j];
    let sigma_j = rational_to_f64(&sigma_component(&profile.p[j], &profile.r[j])?);

    let lhs = lp_norm(&mask, foc.vol, sigma_j, |c| foc.xi_norm(c, j)).powf(p_j);
    let weighted = det_sum(mask.len(), |k| {
        let c = mask[k];
        integrand.eval_weight(j, foc.center(c)) * foc.xi_norm(c, j).powf(p_j)
    }) * foc.vol;
    let lam_inv = weight_inverse_norm(integrand, &foc, j, &mask)?;
    let rhs = lam_inv * weighted;
    let holds = lhs <= rhs * (1.0 + 1e-12) + 1e-300;
    Ok(NormChain { lhs, rhs, holds })
}

#[derive(Clone, Debug)]
pub struct AFunctionReport {
    /// `(r, A(r))` pairs in the order of the input radii.
    pub values: Vec<(f64, f64)>,
    pub monotone: bool,
}

/// The radius function
/// `A(r) = ||mu||_{L^s(B_r)}^{1/p_bar} ||G||_{L^{qs'}(B_r)}^{q/p_bar - 1} prod ||lambda_i^{-1}||_{L^{r_i}(B_r)}^{1/(n p_i)}`,
/// non-decreasing over nested radii.
pub fn a_function(
    integrand: &Integrand,
    grid: &GridDomain,
    field: &Field,
    derived: &DerivedExponents,
    x0: &[f64],
    radii: &[f64],
) -> Result<AFunctionReport> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::DiagnosticsDomain("radii must be strictly increasing".into()));
    }
    if let Some(&r_max) = radii.last() {
        if !grid.ball_inside(x0, r_max) {
            return Err(CoreError::DiagnosticsDomain(format!(
                "ball of radius {r_max} does not fit inside the grid box"
            )));
        }
    }
    let foc = field_on_cells(integrand, grid, field)?;
    let n = grid.n();
    let p = integrand.p_f64();
    let p_bar = rational_to_f64(&derived.p_bar);
    let q = integrand.q_f64();
    let qs_prime = rational_to_f64(&derived.qs_prime);

    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        let mask = grid.cells_in_ball(x0, r);
        if mask.is_empty() {
            values.push((r, 0.0));
            continue;
        }
        let mu = mu_norm(integrand, &foc, &mask)?;
        let g_norm = lp_norm(&mask, foc.vol, qs_prime, |c| foc.g[c]);
        let mut a = mu.powf(1.0 / p_bar) * g_norm.powf(q / p_bar - 1.0);
        for i in 0..n {
            let lam = weight_inverse_norm(integrand, &foc, i, &mask)?;
            a *= lam.powf(1.0 / (n as f64 * p[i]));
        }
        values.push((r, a));
    }
    let monotone = values
        .windows(2)
        .all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-12) - 1e-300);
    Ok(AFunctionReport { values, monotone })
}

/// Minimum cells across the innermost ball of a bound fit for the fit to be
/// considered resolved.
pub const MIN_CELLS_ACROSS: f64 = 8.0;

#[derive(Clone, Debug)]
pub struct BoundFit {
    pub radius: f64,
    /// Fitted constant of the plain sup-norm bound.
    pub c1: f64,
    /// Fitted constant of the oscillation bound.
    pub c2: f64,
    pub lhs1: f64,
    pub rhs1: f64,
    pub lhs2: f64,
    pub rhs2: f64,
    /// Some inverse-weight norm was infinite on the sampled ball.
    pub lambda_norm_infinite: bool,
    /// The innermost balls span at least [`MIN_CELLS_ACROSS`] cells.
    pub resolved_c1: bool,
    pub resolved_c2: bool,
}

#[derive(Clone, Debug)]
pub struct SupBoundReport {
    pub fits: Vec<BoundFit>,
    /// max/min of fitted `c1` over resolved fits with a nonzero left side.
    pub c1_spread: Option<f64>,
}

/// Fit the two sup-norm bounds over a radius sweep.
pub fn sup_bound_report(
    integrand: &Integrand,
    grid: &GridDomain,
    field: &Field,
    derived: &DerivedExponents,
    x0: &[f64],
    radii: &[f64],
) -> Result<SupBoundReport> {
    if let Some(&r_max) = radii.last() {
        if !grid.ball_inside(x0, r_max) {
            return Err(CoreError::DiagnosticsDomain(format!(
                "ball of radius {r_max} does not fit inside the grid box"
            )));
        }
    }
    let foc = field_on_cells(integrand, grid, field)?;
    let n = grid.n();
    let m = field.m();
    let p = integrand.p_f64();
    let p_bar = rational_to_f64(&derived.p_bar);
    let p_min = rational_to_f64(&derived.p_min);
    let qs_prime = rational_to_f64(&derived.qs_prime);
    let theta1 = rational_to_f64(&derived.theta1);
    let theta2 = rational_to_f64(&derived.theta2);
    let theta3 = rational_to_f64(&derived.theta3);
    let sqrt_n = (n as f64).sqrt();
    let h_min = grid.spacing().iter().cloned().fold(f64::INFINITY, f64::min);

    // 1 + ||mu||^{1/p_bar} prod ||lambda_i^{-1}||^{1/(n p_i)} over one mask
    let bracket = |mask: &[usize]| -> Result<(f64, bool)> {
        let mu = mu_norm(integrand, &foc, mask)?;
        let mut prod = mu.powf(1.0 / p_bar);
        let mut infinite = false;
        for i in 0..n {
            match weight_inverse_norm(integrand, &foc, i, mask) {
                Ok(v) if v.is_finite() => prod *= v.powf(1.0 / (n as f64 * p[i])),
                Ok(_) | Err(CoreError::DegenerateWeight { .. }) => infinite = true,
                Err(e) => return Err(e),
            }
        }
        Ok((1.0 + prod, infinite))
    };

    let mut fits = Vec::with_capacity(radii.len());
    for &r in radii {
        let mask_r = grid.cells_in_ball(x0, r);
        let nodes_r = grid.nodes_in_ball(x0, r);
        let nodes_half = grid.nodes_in_ball(x0, 0.5 * r);
        if mask_r.is_empty() || nodes_half.is_empty() {
            return Err(CoreError::DiagnosticsDomain(format!(
                "radius {r} resolves no cells on this grid"
            )));
        }

        // plain bound: sup |u| over the half ball
        let lhs1 = det_max(nodes_half.len(), |k| field.norm_at(nodes_half[k])).max(0.0);
        let (bracket1, inf1) = bracket(&mask_r)?;
        let u_plus = lp_norm(&mask_r, foc.vol, qs_prime, |c| foc.u_norm[c] + 1.0);
        let rhs1 = r.powf(-theta3) * bracket1.powf(theta1) * u_plus.powf(theta2);
        let c1 = if rhs1.is_finite() { lhs1 / rhs1 } else { 0.0 };

        // oscillation bound: u - u_R on the innermost ball, with the middle
        // ball of radius r/sqrt(n) carrying the weight norms
        let mut u_mean = vec![0.0f64; m];
        for &v in &nodes_r {
            for (a, acc) in u_mean.iter_mut().enumerate() {
                *acc += field.value(v)[a];
            }
        }
        for acc in u_mean.iter_mut() {
            *acc /= nodes_r.len() as f64;
        }
        let r_in = r / (2.0 * sqrt_n);
        let r_mid = r / sqrt_n;
        let nodes_in = grid.nodes_in_ball(x0, r_in);
        let mask_mid = grid.cells_in_ball(x0, r_mid);
        let lhs2 = det_max(nodes_in.len(), |k| {
            let v = nodes_in[k];
            field.value(v)
                .iter()
                .zip(&u_mean)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .max(0.0);
        let (bracket_mid, inf2) = bracket(&mask_mid)?;
        let f_int = det_sum(mask_r.len(), |k| foc.density[mask_r[k]]) * foc.vol;
        let mut lam_sum = 0.0;
        let mut inf3 = false;
        for i in 0..n {
            match weight_inverse_norm(integrand, &foc, i, &mask_r) {
                Ok(v) if v.is_finite() => lam_sum += v.powf(1.0 / p[i]),
                Ok(_) | Err(CoreError::DegenerateWeight { .. }) => inf3 = true,
                Err(e) => return Err(e),
            }
        }
        let bracket2 = 1.0 + (1.0 + f_int).powf(1.0 / p_min) * lam_sum;
        let rhs2 = r.powf(-theta3) * bracket_mid.powf(theta1) * bracket2.powf(theta2);
        let c2 = if rhs2.is_finite() { lhs2 / rhs2 } else { 0.0 };

        fits.push(BoundFit {
            radius: r,
            c1,
            c2,
            lhs1,
            rhs1,
            lhs2,
            rhs2,
            lambda_norm_infinite: inf1 || inf2 || inf3,
            resolved_c1: r / h_min >= MIN_CELLS_ACROSS,
            resolved_c2: 2.0 * r_in / h_min >= MIN_CELLS_ACROSS,
        });
    }

    let resolved: Vec<f64> = fits
        .iter()
        .filter(|f| f.resolved_c1 && f.lhs1 > 0.0 && f.c1.is_finite() && f.c1 > 0.0)
        .map(|f| f.c1)
        .collect();
    let c1_spread = if resolved.is_empty() {
        None
    } else {
        let max = resolved.iter().cloned().fold(f64::MIN, f64::max);
        let min = resolved.iter().cloned().fold(f64::MAX, f64::min);
        Some(max / min)
    };
    Ok(SupBoundReport { fits, c1_spread })
}

#[derive(Clone, Debug)]
pub struct CaccioppoliFit {
    /// 1-based direction index, for reports.
    pub direction: usize,
    pub gamma: f64,
    pub inner: f64,
    pub outer: f64,
    pub fitted: f64,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub name: &'static str,
    pub pass: bool,
    pub observed: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug)]
pub struct DiagnosticThresholds {
    pub limit_gap_max: f64,
    pub c1_spread_max: f64,
    pub caccioppoli_cap: f64,
}

impl Default for DiagnosticThresholds {
    fn default() -> Self {
        DiagnosticThresholds { limit_gap_max: 0.05, c1_spread_max: 10.0, caccioppoli_cap: 100.0 }
    }
}

#[derive(Clone, Debug)]
pub struct DiagnosticsOptions {
    /// Ball center; defaults to the box center.
    pub x0: Option<Vec<f64>>,
    /// Multipliers of the box half-width for the radius sweep.
    pub radius_multipliers: Vec<f64>,
    pub h_max: usize,
    pub gammas: Vec<f64>,
    pub thresholds: DiagnosticThresholds,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            x0: None,
            radius_multipliers: vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            h_max: 12,
            gammas: vec![0.0, 1.0, 2.0],
            thresholds: DiagnosticThresholds::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MoserReport {
    pub sequence: MoserSequence,
    pub limit: MoserLimitReport,
    pub caccioppoli: Vec<CaccioppoliFit>,
    pub embedding_cube_ratio: f64,
    pub holder: Vec<NormChain>,
    pub a_function: AFunctionReport,
    pub bounds: SupBoundReport,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

/// Run the full diagnostic chain on one field.
pub fn moser_report(
    integrand: &Integrand,
    grid: &GridDomain,
    field: &Field,
    derived: &DerivedExponents,
    opts: &DiagnosticsOptions,
) -> Result<MoserReport> {
    let x0 = opts.x0.clone().unwrap_or_else(|| grid.box_domain().center());
    let hw = grid.box_domain().half_width();
    let radii: Vec<f64> = opts.radius_multipliers.iter().map(|m| m * hw).collect();
    if radii.is_empty() {
        return Err(CoreError::DiagnosticsDomain("empty radius sweep".into()));
    }
    let big_r = *radii.last().unwrap();

    let sequence = moser_sequence(integrand, grid, field, derived, &x0, big_r, opts.h_max)?;
    let limit = check_moser_limit(&sequence, grid, field, &x0, big_r);

    let cutoff = CutoffSpec::new(x0.clone(), 0.4 * hw, 0.8 * hw)?;
    let mut caccioppoli = Vec::new();
    for i in 0..integrand.n() {
        for &gamma in &opts.gammas {
            let fitted = caccioppoli_constant(integrand, grid, field, i, gamma, &cutoff)?;
            caccioppoli.push(CaccioppoliFit {
                direction: i + 1,
                gamma,
                inner: cutoff.inner,
                outer: cutoff.outer,
                fitted,
            });
        }
    }

    let embedding_cube_ratio = embedding_ratio(integrand, grid, field, derived, EmbeddingForm::Cube)?;

    let mut holder = Vec::new();
    for j in 0..integrand.n() {
        holder.push(weighted_norm_chain(integrand, grid, field, j, &Region::WholeBox)?);
    }

    let a_function = self::a_function(integrand, grid, field, derived, &x0, &radii)?;
    let bounds = sup_bound_report(integrand, grid, field, derived, &x0, &radii)?;

    let th = &opts.thresholds;
    let cacc_max = caccioppoli.iter().map(|c| c.fitted).fold(0.0f64, f64::max);
    let holder_ok = holder.iter().all(|h| h.holds);
    let c1_spread = bounds.c1_spread.unwrap_or(1.0);
    let verdicts = vec![
        Verdict {
            name: "moser_limit_gap",
            pass: limit.limit_gap <= th.limit_gap_max,
            observed: limit.limit_gap,
            threshold: th.limit_gap_max,
        },
        Verdict {
            name: "holder_exact",
            pass: holder_ok,
            observed: if holder_ok { 0.0 } else { 1.0 },
            threshold: 0.5,
        },
        Verdict {
            name: "a_monotone",
            pass: a_function.monotone,
            observed: if a_function.monotone { 0.0 } else { 1.0 },
            threshold: 0.5,
        },
        Verdict {
            name: "caccioppoli_bounded",
            pass: cacc_max.is_finite() && cacc_max <= th.caccioppoli_cap,
            observed: cacc_max,
            threshold: th.caccioppoli_cap,
        },
        Verdict {
            name: "c1_spread",
            pass: c1_spread <= th.c1_spread_max,
            observed: c1_spread,
            threshold: th.c1_spread_max,
        },
        Verdict {
            name: "embedding_finite",
            pass: embedding_cube_ratio.is_finite(),
            observed: embedding_cube_ratio,
            threshold: f64::INFINITY,
        },
    ];
    let pass = verdicts.iter().all(|v| v.pass);

    Ok(MoserReport {
        sequence,
        limit,
        caccioppoli,
        embedding_cube_ratio,
        holder,
        a_function,
        bounds,
        verdicts,
        pass,
    })
}

impl MoserReport {
    pub fn to_json(&self) -> Value {
        json!({
            "moser": {
                "ratio": RationalJson::from(&self.sequence.ratio),
                "h_max": self.sequence.h_max,
                "truncated": self.sequence.truncated,
                "entries": self.sequence.entries.iter().map(|e| json!({
                    "h": e.h,
                    "delta": RationalJson::from(&e.delta),
                    "exponent": e.exponent,
                    "radius": e.radius,
                    "inner_radius": e.inner_radius,
                    "m_h": e.m_h,
                })).collect::<Vec<_>>(),
                "m_last": self.limit.m_last,
                "sup_g_inner": self.limit.sup_g_inner,
                "limit_gap": self.limit.limit_gap,
                "eventually_monotone": self.limit.eventually_monotone,
            },
            "caccioppoli": self.caccioppoli.iter().map(|c| json!({
                "direction": c.direction,
                "gamma": c.gamma,
                "inner": c.inner,
                "outer": c.outer,
                "fitted": c.fitted,
            })).collect::<Vec<_>>(),
            "embedding_cube_ratio": self.embedding_cube_ratio,
            "holder": self.holder.iter().enumerate().map(|(j, h)| json!({
                "direction": j + 1,
                "lhs": h.lhs,
                "rhs": h.rhs,
                "holds": h.holds,
            })).collect::<Vec<_>>(),
            "a_function": {
                "values": self.a_function.values.iter()
                    .map(|(r, a)| json!({"r": r, "a": a})).collect::<Vec<_>>(),
                "monotone": self.a_function.monotone,
            },
            "bounds": {
                "fits": self.bounds.fits.iter().map(|f| json!({
                    "radius": f.radius,
                    "c1": f.c1,
                    "c2": f.c2,
                    "lhs1": f.lhs1,
                    "rhs1": f.rhs1,
                    "lhs2": f.lhs2,
                    "rhs2": f.rhs2,
                    "lambda_norm_infinite": f.lambda_norm_infinite,
                    "resolved_c1": f.resolved_c1,
                    "resolved_c2": f.resolved_c2,
                })).collect::<Vec<_>>(),
                "c1_spread": self.bounds.c1_spread,
            },
            "verdicts": self.verdicts.iter().map(|v| json!({
                "name": v.name,
                "pass": v.pass,
                "observed": v.observed,
                "threshold": v.threshold,
            })).collect::<Vec<_>>(),
            "pass": self.pass,
        })
    }

    /// Moser sweep CSV: `h,delta_h,R_h,M_h`.
    pub fn write_moser_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "h,delta_h,R_h,M_h")?;
        for e in &self.sequence.entries {
            writeln!(w, "{},{},{},{}", e.h, rational_to_f64(&e.delta), e.radius, e.m_h)?;
        }
        Ok(())
    }

    /// Bound-fit sweep CSV: `R,fitted_c1,fitted_c2`.
    pub fn write_bounds_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "R,fitted_c1,fitted_c2")?;
        for f in &self.bounds.fits {
            writeln!(w, "{},{},{}", f.radius, f.c1, f.c2)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{derive_exponents, AnisotropyProfile};
    use crate::grid::{build_grid, BoxDomain};
    use crate::integrand::WeightSpec;
    use crate::presets;
    use crate::rational::{rat, rat_int};

    fn unit_grid(res: usize) -> GridDomain {
        build_grid(BoxDomain::unit_square(), res, false).unwrap()
    }

    fn flat_quadratic(m: usize, r: ExtRational, s: ExtRational) -> Integrand {
        let profile = AnisotropyProfile::new(
            2,
            m,
            vec![rat_int(2), rat_int(2)],
            rat_int(2),
            vec![r.clone(), r],
            s,
            rat_int(2),
            None,
        )
        .unwrap();
        Integrand::new(
            profile,
            vec![
                WeightSpec { c: 1.0, alpha: 0.0, kappa: 0.0 },
                WeightSpec { c: 1.0, alpha: 0.0, kappa: 0.0 },
            ],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn envelope_examples() {
        let grid = unit_grid(4);
        let zero = Field::zeros(&grid, 2).unwrap();
        assert!(g_envelope(&zero).iter().all(|&g| g == 1.0));
        let f = Field::constant(&grid, &[3.0, 4.0]).unwrap();
        assert!(g_envelope(&f).iter().all(|&g| g == 5.0));
        let small = Field::constant(&grid, &[0.3, -0.4]).unwrap();
        assert!(g_envelope(&small).iter().all(|&g| g == 1.0));
    }

    #[test]
    fn moser_sequence_exact_rational_part() {
        let grid = unit_grid(16);
        let preset = presets::f1(2).unwrap();
        let derived = derive_exponents(preset.integrand.profile()).unwrap();
        let field = Field::constant(&grid, &[1.0, 0.0]).unwrap();
        let seq =
            moser_sequence(&preset.integrand, &grid, &field, &derived, &[0.5, 0.5], 0.4, 6).unwrap();
        assert_eq!(seq.ratio, rat(33, 26));
        assert_eq!(seq.entries[2].delta, rat(1089, 676));
        // delta_h sigma_star = delta_{h+1} qs' exactly
        for w in seq.entries.windows(2) {
            assert_eq!(&w[0].delta * &derived.sigma_star, &w[1].delta * &derived.qs_prime);
        }
        // radii telescope: R_h - rho_h = R 2^{-(h+1)}
        for e in &seq.entries {
            let diff = e.radius - e.inner_radius;
            let expect = 0.4 * 0.5f64.powi(e.h as i32 + 1);
            assert!((diff - expect).abs() < 1e-15, "h = {}", e.h);
        }
    }

    #[test]
    fn constant_field_matches_closed_form() {
        let grid = unit_grid(32);
        let preset = presets::f1(2).unwrap();
        let derived = derive_exponents(preset.integrand.profile()).unwrap();
        let field = Field::constant(&grid, &[3.0, 4.0]).unwrap();
        let x0 = [0.5, 0.5];
        let big_r = 0.4;
        let seq =
            moser_sequence(&preset.integrand, &grid, &field, &derived, &x0, big_r, 10).unwrap();
        for e in &seq.entries {
            let mask = grid.cells_in_ball(&x0, e.radius);
            let vol = grid.mask_volume(&mask);
            let expect = 5.0 * vol.powf(1.0 / e.exponent);
            assert!(
                (e.m_h - expect).abs() <= 1e-10 * expect,
                "h = {}: {} vs {expect}",
                e.h,
                e.m_h
            );
        }
        let limit = check_moser_limit(&seq, &grid, &field, &x0, big_r);
        let mask = grid.cells_in_ball(&x0, seq.entries.last().unwrap().radius);
        let closed =
            (grid.mask_volume(&mask).powf(1.0 / seq.entries.last().unwrap().exponent) - 1.0).abs();
        assert!((limit.limit_gap - closed).abs() <= 1e-8);
    }

    #[test]
    fn no_gain_is_rejected() {
        let grid = unit_grid(8);
        let preset = presets::f1(2).unwrap();
        let mut derived = derive_exponents(preset.integrand.profile()).unwrap();
        derived.qs_prime = derived.sigma_star.clone();
        let field = Field::constant(&grid, &[1.0, 0.0]).unwrap();
        assert!(matches!(
            moser_sequence(&preset.integrand, &grid, &field, &derived, &[0.5, 0.5], 0.4, 6),
            Err(CoreError::DiagnosticsDomain(_))
        ));
    }

    #[test]
    fn spike_is_approached_from_below() {
        let grid = unit_grid(32);
        let preset = presets::f1(1).unwrap();
        let derived = derive_exponents(preset.integrand.profile()).unwrap();
        let mut field = Field::zeros(&grid, 1).unwrap();
        // one tall interior spike near the center
        let mid = grid.node_count() / 2;
        field.values_mut()[mid] = 40.0;
        let x0 = [0.5, 0.5];
        let seq = moser_sequence(&preset.integrand, &grid, &field, &derived, &x0, 0.4, 12).unwrap();
        let g = g_envelope(&field);
        let peak = grid
            .nodes_in_ball(&x0, 0.2)
            .iter()
            .map(|&v| g[v])
            .fold(1.0f64, f64::max);
        for w in seq.entries.windows(2) {
            assert!(w[1].m_h >= w[0].m_h * (1.0 - 1e-12), "M_h should grow toward the spike");
        }
        assert!(seq.entries.last().unwrap().m_h <= peak * (1.0 + 1e-12));
    }

    #[test]
    fn cutoff_is_admissible_node_wise() {
        let grid = unit_grid(24);
        let cutoff = CutoffSpec::new(vec![0.5, 0.5], 0.2, 0.4).unwrap();
        let mut coord = [0.0f64; 2];
        let budget = cutoff.gradient_budget();
        for node in 0..grid.node_count() {
            grid.node_coord(node, &mut coord);
            let eta = cutoff.eval(&coord);
            assert!((0.0..=1.0).contains(&eta));
            let d = ((coord[0] - 0.5).powi(2) + (coord[1] - 0.5).powi(2)).sqrt();
            if d <= 0.2 {
                assert_eq!(eta, 1.0);
            }
            if d >= 0.4 {
                assert_eq!(eta, 0.0);
            }
            // discrete slope along each axis within budget
            for axis in 0..2 {
                let mut shifted = coord;
                shifted[axis] += grid.spacing()[axis];
                let slope = (cutoff.eval(&shifted) - eta).abs() / grid.spacing()[axis];
                assert!(slope <= budget * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn caccioppoli_of_constant_field_is_zero() {
        let grid = unit_grid(16);
        let preset = presets::f1(2).unwrap();
        let field = Field::constant(&grid, &[2.0, -1.0]).unwrap();
        let cutoff = CutoffSpec::new(vec![0.5, 0.5], 0.2, 0.4).unwrap();
        for gamma in [0.0, 1.0, 2.0] {
            let fit =
                caccioppoli_constant(&preset.integrand, &grid, &field, 0, gamma, &cutoff).unwrap();
            assert_eq!(fit, 0.0);
        }
    }

    #[test]
    fn holder_chain_branches() {
        let grid = unit_grid(12);
        // finite r on a constant field: lhs = 0 <= rhs
        let preset = presets::f1(1).unwrap();
        let constant = Field::constant(&grid, &[1.5]).unwrap();
        let chain =
            weighted_norm_chain(&preset.integrand, &grid, &constant, 0, &Region::WholeBox).unwrap();
        assert_eq!(chain.lhs, 0.0);
        assert!(chain.holds);

        // r = inf reduces to the ess-sup form
        let flat = flat_quadratic(1, ExtRational::Infinity, ExtRational::Infinity);
        let bump = Field::seeded_bump(&grid, 1, 5).unwrap();
        let chain = weighted_norm_chain(&flat, &grid, &bump, 1, &Region::WholeBox).unwrap();
        assert!(chain.holds);
        // with unit weights the ess-sup branch is ||xi||_p^p <= 1 * integral |xi|^p
        assert!((chain.lhs - chain.rhs).abs() <= 1e-9 * chain.rhs.max(1e-300));

        // bump field, finite r, ball region: exact discrete Hoelder
        let chain = weighted_norm_chain(
            &preset.integrand,
            &grid,
            &bump,
            0,
            &Region::Ball { center: vec![0.5, 0.5], radius: 0.3 },
        )
        .unwrap();
        assert!(chain.holds, "{chain:?}");
    }

    #[test]
    fn embedding_ratio_properties() {
        let grid = unit_grid(24);
        let preset = presets::f1(1).unwrap();
        let derived = derive_exponents(preset.integrand.profile()).unwrap();
        let bump = Field::seeded_bump(&grid, 1, 11).unwrap();
        let ratio =
            embedding_ratio(&preset.integrand, &grid, &bump, &derived, EmbeddingForm::ZeroTrace)
                .unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);

        // positive scaling leaves the zero-trace ratio unchanged
        let mut scaled = bump.clone();
        for v in scaled.values_mut() {
            *v *= 37.5;
        }
        let ratio2 =
            embedding_ratio(&preset.integrand, &grid, &scaled, &derived, EmbeddingForm::ZeroTrace)
                .unwrap();
        assert!((ratio - ratio2).abs() <= 1e-10 * ratio);

        // zero field short-circuits
        let zero = Field::zeros(&grid, 1).unwrap();
        assert_eq!(
            embedding_ratio(&preset.integrand, &grid, &zero, &derived, EmbeddingForm::ZeroTrace)
                .unwrap(),
            0.0
        );

        // non-vanishing trace is refused in the zero-trace form
        let affine = Field::affine(&grid, &[1.0, 0.0], &[0.0]).unwrap();
        assert!(embedding_ratio(
            &preset.integrand,
            &grid,
            &affine,
            &derived,
            EmbeddingForm::ZeroTrace
        )
        .is_err());
        // but fine in the cube form
        let cube =
            embedding_ratio(&preset.integrand, &grid, &affine, &derived, EmbeddingForm::Cube)
                .unwrap();
        assert!(cube.is_finite() && cube > 0.0);
    }

    #[test]
    fn a_function_constant_weight_reduction() {
        // q = p_bar and constant weights: the G factor drops out and
        // A(r) = ||mu||^{1/p_bar} prod ||lambda_i^{-1}||^{1/(n p_i)}
        let grid = unit_grid(20);
        let flat = flat_quadratic(1, ExtRational::Finite(rat_int(2)), ExtRational::Infinity);
        let derived = derive_exponents(flat.profile()).unwrap();
        let bump = Field::seeded_bump(&grid, 1, 3).unwrap();
        let x0 = [0.5, 0.5];
        let radii = [0.1, 0.2, 0.3, 0.4];
        let report = a_function(&flat, &grid, &bump, &derived, &x0, &radii).unwrap();
        assert!(report.monotone);
        for (r, a) in &report.values {
            let mask = grid.cells_in_ball(&x0, *r);
            let vol = grid.mask_volume(&mask);
            // mu = 2^{q-1} n C0 = 4, lambda = 1, r_i = 2
            let expect = 4.0f64.powf(1.0 / 2.0) * (vol.powf(1.0 / 2.0)).powf(2.0 / 4.0);
            assert!((a - expect).abs() <= 1e-12 * expect, "r = {r}: {a} vs {expect}");
        }
    }

    #[test]
    fn a_function_is_monotone_on_presets() {
        let grid = unit_grid(24);
        let preset = presets::f1(2).unwrap();
        let derived = derive_exponents(preset.integrand.profile()).unwrap();
        let bump = Field::seeded_bump(&grid, 2, 17).unwrap();
        let radii = [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4];
        let report =
            a_function(&preset.integrand, &grid, &bump, &derived, &[0.5, 0.5], &radii).unwrap();
        assert!(report.monotone, "{report:?}");
        assert!(a_function(&preset.integrand, &grid, &bump, &derived, &[0.5, 0.5], &[0.2, 0.2])
            .is_err());
    }

    #[test]
    fn constant_field_has_zero_oscillation_constant() {
        let grid = unit_grid(32);
        let preset = presets::f1(2).unwrap();
        let derived = derive_exponents(preset.integrand.profile()).unwrap();
        let field = Field::constant(&grid, &[4.0, -3.0]).unwrap();
        let report = sup_bound_report(
            &preset.integrand,
            &grid,
            &field,
            &derived,
            &[0.5, 0.5],
            &[0.2, 0.3, 0.4],
        )
        .unwrap();
        for fit in &report.fits {
            assert_eq!(fit.lhs2, 0.0);
            assert_eq!(fit.c2, 0.0);
            assert!(fit.c1 > 0.0 && fit.c1.is_finite());
        }
    }

    #[test]
    fn oscillation_fit_is_translation_invariant() {
        let grid = unit_grid(24);
        let preset = presets::f1(1).unwrap();
        let derived = derive_exponents(preset.integrand.profile()).unwrap();
        let field = Field::from_fn(&grid, 1, |x, out| out[0] = (4.0 * x[0]).sin() * x[1]).unwrap();
        let mut shifted = field.clone();
        for v in shifted.values_mut() {
            *v += 9.0;
        }
        let radii = [0.25, 0.4];
        let a = sup_bound_report(&preset.integrand, &grid, &field, &derived, &[0.5, 0.5], &radii)
            .unwrap();
        let b = sup_bound_report(&preset.integrand, &grid, &shifted, &derived, &[0.5, 0.5], &radii)
            .unwrap();
        for (fa, fb) in a.fits.iter().zip(&b.fits) {
            // lhs2 and the gradient-driven parts agree; c2 follows
            assert!((fa.lhs2 - fb.lhs2).abs() <= 1e-9 * fa.lhs2.max(1e-12));
            assert!((fa.c2 - fb.c2).abs() <= 1e-9 * fa.c2.max(1e-12));
        }
    }
}
