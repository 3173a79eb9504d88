//! Discrete energies on uniform grids and their minimization.
//!
//! The discrete gradient is the face-averaged forward difference centered at
//! each cell midpoint (exact on affine fields) and the energy is midpoint
//! quadrature of the density over cells. The energy is therefore an exact
//! function of the nodal values, its gradient is assembled by the chain rule,
//! and minimization is plain descent: Polak-Ribiere conjugate directions with
//! automatic restarts and an Armijo backtracking line search. Boundary nodes
//! never move.
//!
//! All reductions go through [`crate::reduce`], so energies, gradients and
//! whole minimization runs are bit-identical for any worker-thread count.

use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::field::Field;
use crate::grid::GridDomain;
use crate::integrand::{pow_half, pow_half_minus_one, Integrand};
use crate::reduce::{det_max, det_sum};

/// Stack capacity for per-cell matrices (`m, n <= 3`).
const MAX_MN: usize = 9;

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Stop when the sup over nodes of the nodal gradient norm drops below this.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub initial_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grad_tol: 1e-8,
            max_iters: 50_000,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            initial_step: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.grad_tol > 0.0
            && self.max_iters > 0
            && (0.0..1.0).contains(&self.armijo_c)
            && self.armijo_c > 0.0
            && (0.0..1.0).contains(&self.backtrack_factor)
            && self.backtrack_factor > 0.0
            && self.initial_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(CoreError::SolverAbort(format!("invalid solver configuration: {self:?}")))
        }
    }
}

/// Per-cell data that never changes during a minimization run.
struct CellCache {
    n: usize,
    m: usize,
    cells: usize,
    vol: f64,
    /// `w_i(x_c)` including the singular part, n per cell.
    weights: Vec<f64>,
    p: Vec<f64>,
    base_nodes: Vec<usize>,
    corner_offsets: Vec<usize>,
    /// `1 / (2^{n-1} h_i)` per axis.
    inv_den: Vec<f64>,
}

impl CellCache {
    fn build(integrand: &Integrand, grid: &GridDomain) -> Result<CellCache> {
        let n = grid.n();
        if integrand.n() != n {
            return Err(CoreError::DimensionMismatch(format!(
                "integrand has n = {}, grid has n = {n}",
                integrand.n()
            )));
        }
        let m = integrand.m();
        let cells = grid.cell_count();
        let mut weights = vec![0.0; cells * n];
        let mut base_nodes = vec![0usize; cells];
        let mut center = [0.0f64; 3];
        let mut multi = [0usize; 3];
        for c in 0..cells {
            grid.cell_center(c, &mut center[..n]);
            for i in 0..n {
                weights[c * n + i] = integrand.full_weight(i, &center[..n])?;
            }
            grid.cell_multi(c, &mut multi[..n]);
            base_nodes[c] = grid.node_index(&multi[..n]);
        }
        let mut corner_offsets = Vec::with_capacity(1 << n);
        for corner in 0..(1usize << n) {
            let mut off = [0usize; 3];
            for (i, o) in off.iter_mut().enumerate().take(n) {
                *o = (corner >> i) & 1;
            }
            corner_offsets.push(grid.node_index(&off[..n]));
        }
        let denom = (1usize << (n - 1)) as f64;
        let inv_den: Vec<f64> = grid.spacing().iter().map(|h| 1.0 / (denom * h)).collect();
        Ok(CellCache {
            n,
            m,
            cells,
            vol: grid.cell_volume(),
            weights,
            p: integrand.p_f64().to_vec(),
            base_nodes,
            corner_offsets,
            inv_den,
        })
    }

    /// Face-averaged forward-difference gradient of one cell.
    #[inline]
    fn gather_xi(&self, values: &[f64], cell: usize, xi: &mut [f64; MAX_MN]) {
        let (n, m) = (self.n, self.m);
        xi[..m * n].fill(0.0);
        let base = self.base_nodes[cell];
        for (corner, &off) in self.corner_offsets.iter().enumerate() {
            let node = (base + off) * m;
            for i in 0..n {
                let sign = if (corner >> i) & 1 == 1 { self.inv_den[i] } else { -self.inv_den[i] };
                for a in 0..m {
                    xi[i * m + a] += sign * values[node + a];
                }
            }
        }
    }

    #[inline]
    fn cell_energy(&self, values: &[f64], cell: usize) -> f64 {
        let mut xi = [0.0f64; MAX_MN];
        self.gather_xi(values, cell, &mut xi);
        let (n, m) = (self.n, self.m);
        let mut f = 0.0;
        for i in 0..n {
            let s2: f64 = xi[i * m..(i + 1) * m].iter().map(|v| v * v).sum();
            f += self.weights[cell * n + i] * pow_half(s2, self.p[i]);
        }
        f * self.vol
    }

    fn energy(&self, values: &[f64]) -> f64 {
        det_sum(self.cells, |c| self.cell_energy(values, c))
    }

    /// Chain-rule gradient of the discrete energy. `duals` is scratch of size
    /// `cells * m * n`; `out` has one `m`-vector per node, zero on the boundary.
    fn gradient(&self, grid: &GridDomain, values: &[f64], duals: &mut [f64], out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        // pass 1: per-cell dual matrices vol * df/dxi
        duals
            .par_chunks_mut(m * n)
            .enumerate()
            .for_each(|(cell, dual)| {
                let mut xi = [0.0f64; MAX_MN];
                self.gather_xi(values, cell, &mut xi);
                for i in 0..n {
                    let s2: f64 = xi[i * m..(i + 1) * m].iter().map(|v| v * v).sum();
                    let factor = self.weights[cell * n + i]
                        * self.p[i]
                        * pow_half_minus_one(s2, self.p[i])
                        * self.vol;
                    for a in 0..m {
                        dual[i * m + a] = if s2 == 0.0 { 0.0 } else { factor * xi[i * m + a] };
                    }
                }
            });
        // pass 2: per-node adjoint of the stencil; each node only reads its
        // adjacent cells, so parallelism is race-free and order is fixed
        let resolution = grid.resolution();
        out.par_chunks_mut(m).enumerate().for_each(|(node, g)| {
            g.fill(0.0);
            let mut multi = [0usize; 3];
            grid.node_multi(node, &mut multi[..n]);
            if (0..n).any(|i| multi[i] == 0 || multi[i] == resolution) {
                return; // Dirichlet node
            }
            for corner in 0..(1usize << n) {
                // bit i set: the cell lies on the low side along axis i,
                // making this node the high end of its edges
                let mut cell = 0usize;
                for i in 0..n {
                    let low = (corner >> i) & 1 == 1;
                    let ci = if low { multi[i] - 1 } else { multi[i] };
                    cell = cell * resolution + ci;
                }
                let dual = &duals[cell * m * n..(cell + 1) * m * n];
                for i in 0..n {
                    let sign = if (corner >> i) & 1 == 1 { self.inv_den[i] } else { -self.inv_den[i] };
                    for a in 0..m {
                        g[a] += sign * dual[i * m + a];
                    }
                }
            }
        });
    }
}

fn check_field(integrand: &Integrand, grid: &GridDomain, field: &Field) -> Result<()> {
    if !field.matches_grid(grid) {
        return Err(CoreError::DimensionMismatch(format!(
            "field has {} values for a grid with {} nodes x m = {}",
            field.values().len(),
            grid.node_count(),
            field.m()
        )));
    }
    if field.m() != integrand.m() {
        return Err(CoreError::DimensionMismatch(format!(
            "field has m = {}, integrand has m = {}",
            field.m(),
            integrand.m()
        )));
    }
    Ok(())
}

/// Per-cell gradient matrices of a field, cell-major `m x n`
/// (`out[(cell * n + i) * m + alpha]`).
pub fn discrete_gradient(grid: &GridDomain, field: &Field) -> Result<Vec<f64>> {
    if !field.matches_grid(grid) {
        return Err(CoreError::DimensionMismatch("field does not match grid".into()));
    }
    let n = grid.n();
    let m = field.m();
    let denom = (1usize << (n - 1)) as f64;
    let inv_den: Vec<f64> = grid.spacing().iter().map(|h| 1.0 / (denom * h)).collect();
    let mut corners = Vec::new();
    let mut out = vec![0.0; grid.cell_count() * m * n];
    let values = field.values();
    for cell in 0..grid.cell_count() {
        grid.cell_corners(cell, &mut corners);
        let xi = &mut out[cell * m * n..(cell + 1) * m * n];
        for (corner, &node) in corners.iter().enumerate() {
            for i in 0..n {
                let sign = if (corner >> i) & 1 == 1 { inv_den[i] } else { -inv_den[i] };
                for a in 0..m {
                    xi[i * m + a] += sign * values[node * m + a];
                }
            }
        }
    }
    Ok(out)
}

/// Midpoint-quadrature energy `sum_cells f(x_c, xi_c) vol`.
pub fn energy(integrand: &Integrand, grid: &GridDomain, field: &Field) -> Result<f64> {
    check_field(integrand, grid, field)?;
    let cache = CellCache::build(integrand, grid)?;
    Ok(cache.energy(field.values()))
}

/// Energy restricted to a cell mask (quadrature over a ball or cube).
pub fn energy_on_cells(
    integrand: &Integrand,
    grid: &GridDomain,
    field: &Field,
    mask: &[usize],
) -> Result<f64> {
    check_field(integrand, grid, field)?;
    let cache = CellCache::build(integrand, grid)?;
    Ok(det_sum(mask.len(), |k| cache.cell_energy(field.values(), mask[k])))
}

/// Exact gradient of the discrete energy with respect to nodal values;
/// one `m`-vector per node, zero at boundary nodes.
pub fn energy_gradient(integrand: &Integrand, grid: &GridDomain, field: &Field) -> Result<Vec<f64>> {
    check_field(integrand, grid, field)?;
    ensure_smooth(integrand)?;
    let cache = CellCache::build(integrand, grid)?;
    let mut duals = vec![0.0; grid.cell_count() * integrand.m() * grid.n()];
    let mut out = vec![0.0; grid.node_count() * integrand.m()];
    cache.gradient(grid, field.values(), &mut duals, &mut out);
    Ok(out)
}

fn ensure_smooth(integrand: &Integrand) -> Result<()> {
    if let Some((index, &p)) = integrand.p_f64().iter().enumerate().find(|(_, &p)| p < 2.0) {
        return Err(CoreError::NonSmoothGradient { index: index + 1, p });
    }
    Ok(())
}

/// Sup over nodes of the Euclidean norm of an `m`-vector-per-node array.
pub fn sup_node_norm(values: &[f64], m: usize) -> f64 {
    let nodes = values.len() / m;
    det_max(nodes, |v| {
        values[v * m..(v + 1) * m].iter().map(|x| x * x).sum::<f64>()
    })
    .max(0.0)
    .sqrt()
}

/// Discrete strong-form Euler residual: sup over nodes of the nodal energy
/// gradient norm, scaled by the inverse cell volume.
pub fn euler_residual(integrand: &Integrand, grid: &GridDomain, field: &Field) -> Result<f64> {
    let g = energy_gradient(integrand, grid, field)?;
    Ok(sup_node_norm(&g, field.m()) / grid.cell_volume())
}

#[derive(Clone, Debug)]
pub struct IterRecord {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct MinimizeOutcome {
    pub field: Field,
    pub converged: bool,
    pub iterations: usize,
    pub final_energy: f64,
    pub final_grad_norm: f64,
    pub stop_reason: String,
    pub log: Vec<IterRecord>,
}

/// Conjugate-direction restart interval.
const RESTART_EVERY: usize = 250;

/// Minimize the discrete energy over fields with the given Dirichlet trace.
///
/// The trace (boundary values of `boundary`) is held fixed; interior values
/// start from the componentwise mean of the trace. Energy is non-increasing
/// across iterations by the Armijo condition. Deterministic given inputs.
pub fn minimize(
    integrand: &Integrand,
    grid: &GridDomain,
    boundary: &Field,
    config: &SolverConfig,
) -> Result<MinimizeOutcome> {
    config.validate()?;
    check_field(integrand, grid, boundary)?;
    ensure_smooth(integrand)?;
    if boundary.values().iter().any(|v| !v.is_finite()) {
        return Err(CoreError::SolverAbort("boundary trace contains non-finite values".into()));
    }
    let cache = CellCache::build(integrand, grid)?;
    let m = integrand.m();
    let nodes = grid.node_count();

    // initial iterate: trace on the boundary, trace mean inside
    let mut u = boundary.clone();
    {
        let mut mean = vec![0.0f64; m];
        let mut count = 0usize;
        for node in 0..nodes {
            if grid.is_boundary_node(node) {
                for a in 0..m {
                    mean[a] += boundary.value(node)[a];
                }
                count += 1;
            }
        }
        for v in mean.iter_mut() {
            *v /= count as f64;
        }
        let values = u.values_mut();
        for node in 0..nodes {
            if !grid.is_boundary_node(node) {
                values[node * m..(node + 1) * m].copy_from_slice(&mean);
            }
        }
    }

    let dofs = nodes * m;
    let mut g = vec![0.0f64; dofs];
    let mut g_old = vec![0.0f64; dofs];
    let mut dir = vec![0.0f64; dofs];
    let mut trial = vec![0.0f64; dofs];
    let mut duals = vec![0.0f64; grid.cell_count() * m * grid.n()];

    let mut e = cache.energy(u.values());
    if !e.is_finite() {
        return Err(CoreError::SolverAbort(format!("initial energy is {e}")));
    }
    let mut log = Vec::new();
    let mut gg_old = 0.0f64;
    let mut last_step = config.initial_step;
    let mut converged = false;
    let mut stop_reason = String::from("max_iters reached");
    let mut iterations = 0usize;
    let mut gn = f64::INFINITY;

    for iter in 0..=config.max_iters {
        cache.gradient(grid, u.values(), &mut duals, &mut g);
        gn = sup_node_norm(&g, m);
        log.push(IterRecord { iter, energy: e, grad_norm: gn, step: if iter == 0 { 0.0 } else { last_step } });
        iterations = iter;
        if gn <= config.grad_tol {
            converged = true;
            stop_reason = "gradient tolerance reached".into();
            break;
        }
        if iter == config.max_iters {
            break;
        }

        // Polak-Ribiere direction with restarts
        let gg = det_sum(dofs, |i| g[i] * g[i]);
        let mut steepest = iter % RESTART_EVERY == 0 || gg_old == 0.0;
        if !steepest {
            let num = det_sum(dofs, |i| g[i] * (g[i] - g_old[i]));
            let beta = (num / gg_old).max(0.0);
            for i in 0..dofs {
                dir[i] = -g[i] + beta * dir[i];
            }
            let dg = det_sum(dofs, |i| dir[i] * g[i]);
            if !(dg < 0.0) {
                steepest = true;
            }
        }
        if steepest {
            for i in 0..dofs {
                dir[i] = -g[i];
            }
        }
        let mut dg = det_sum(dofs, |i| dir[i] * g[i]);

        let start = (last_step / config.backtrack_factor).clamp(1e-12, 1e9);
        let mut found = line_search(&cache, u.values(), &dir, e, dg, start, config, &mut trial);
        if matches!(found, LineSearch::Stall { .. }) && !steepest {
            // conjugate direction failed; retry along steepest descent
            for i in 0..dofs {
                dir[i] = -g[i];
            }
            dg = -gg;
            found = line_search(&cache, u.values(), &dir, e, dg, config.initial_step, config, &mut trial);
        }
        match found {
            LineSearch::Hit { step, energy: e_new } => {
                let values = u.values_mut();
                for i in 0..dofs {
                    values[i] += step * dir[i];
                }
                debug_assert!(e_new <= e);
                e = e_new;
                last_step = step;
                g_old.copy_from_slice(&g);
                gg_old = gg;
            }
            LineSearch::Stall { nonfinite_seen } => {
                // could not decrease along -g: either we are at numerical
                // stationarity or the energy itself misbehaved
                if nonfinite_seen || !e.is_finite() {
                    return Err(CoreError::SolverAbort(format!(
                        "non-finite energy in line search at iteration {iter} (gradient norm {gn:.3e})"
                    )));
                }
                stop_reason = format!("line search stalled at gradient norm {gn:.3e}");
                break;
            }
        }
    }

    Ok(MinimizeOutcome {
        field: u,
        converged,
        iterations,
        final_energy: e,
        final_grad_norm: gn,
        stop_reason,
        log,
    })
}

enum LineSearch {
    Hit { step: f64, energy: f64 },
    Stall { nonfinite_seen: bool },
}

/// Armijo backtracking with one quadratic-interpolation refinement.
fn line_search(
    cache: &CellCache,
    u: &[f64],
    dir: &[f64],
    e0: f64,
    dg: f64,
    start: f64,
    config: &SolverConfig,
    trial: &mut [f64],
) -> LineSearch {
    if !(dg < 0.0) {
        return LineSearch::Stall { nonfinite_seen: false };
    }
    let eval = |t: f64, trial: &mut [f64]| {
        for i in 0..u.len() {
            trial[i] = u[i] + t * dir[i];
        }
        cache.energy(trial)
    };
    // strict decrease on top of Armijo: once the decrement underflows the
    // energy resolution, the search fails instead of random-walking
    let armijo = |t: f64, et: f64| {
        et.is_finite() && et < e0 && et <= e0 + config.armijo_c * t * dg
    };

    let mut nonfinite_seen = false;
    let mut t = start;
    for _ in 0..120 {
        let et = eval(t, trial);
        if !et.is_finite() {
            nonfinite_seen = true;
        }
        if armijo(t, et) {
            // quadratic model through (0, e0), slope dg, and (t, et); its
            // minimizer is near-exact for quadratic energies
            let kappa = 2.0 * (et - e0 - t * dg) / (t * t);
            if kappa > 0.0 {
                let t_star = -dg / kappa;
                if t_star > 0.0 && (t_star / t - 1.0).abs() > 1e-3 {
                    let e_star = eval(t_star, trial);
                    if armijo(t_star, e_star) && e_star < et {
                        return LineSearch::Hit { step: t_star, energy: e_star };
                    }
                }
            }
            return LineSearch::Hit { step: t, energy: et };
        }
        t *= config.backtrack_factor;
        if t < 1e-20 {
            break;
        }
    }
    LineSearch::Stall { nonfinite_seen }
}
