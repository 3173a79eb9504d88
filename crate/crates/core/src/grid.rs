//! Uniform tensor-product grids over axis-aligned boxes.
//!
//! Fields live on nodes; quadrature and gradients live on cell centers.
//! Balls are realized as index masks (cells for quadrature, nodes for
//! sup-norms) and are monotone in the radius by construction.

use crate::error::{CoreError, Result};

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]` with `n` in `{2, 3}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(CoreError::InvalidGrid("box lo/hi dimension mismatch".into()));
        }
        let n = lo.len();
        if !(2..=3).contains(&n) {
            return Err(CoreError::InvalidGrid(format!("dimension n = {n} not in {{2, 3}}")));
        }
        for i in 0..n {
            if !(lo[i].is_finite() && hi[i].is_finite()) || lo[i] >= hi[i] {
                return Err(CoreError::InvalidGrid(format!(
                    "axis {i}: need finite lo < hi, got [{}, {}]",
                    lo[i], hi[i]
                )));
            }
        }
        Ok(BoxDomain { lo, hi })
    }

    pub fn unit_square() -> Self {
        BoxDomain::new(vec![0.0, 0.0], vec![1.0, 1.0]).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.n()).map(|i| 0.5 * (self.lo[i] + self.hi[i])).collect()
    }

    /// Smallest half-extent across axes; the radius sweep scales with it.
    pub fn half_width(&self) -> f64 {
        (0..self.n())
            .map(|i| 0.5 * (self.hi[i] - self.lo[i]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Uniform grid: `resolution` cells per axis, `resolution + 1` nodes per axis.
#[derive(Clone, Debug)]
pub struct GridDomain {
    box_domain: BoxDomain,
    resolution: usize,
    spacing: Vec<f64>,
    node_strides: Vec<usize>,
    cell_strides: Vec<usize>,
    node_count: usize,
    cell_count: usize,
    singular_at_origin: bool,
}

/// Slack used when testing ball membership and box containment, relative to
/// the grid spacing. Keeps masks stable against last-ulp coordinate noise.
const GEOM_EPS: f64 = 1e-9;

pub fn build_grid(
    box_domain: BoxDomain,
    resolution: usize,
    singular_at_origin: bool,
) -> Result<GridDomain> {
    if resolution < 4 {
        return Err(CoreError::InvalidGrid(format!(
            "resolution {resolution} must be >= 4"
        )));
    }
    let n = box_domain.n();
    let spacing: Vec<f64> = (0..n)
        .map(|i| (box_domain.hi[i] - box_domain.lo[i]) / resolution as f64)
        .collect();

    if singular_at_origin {
        // nearest cell center to the origin, per axis
        let mut dist2 = 0.0;
        for i in 0..n {
            let rel = (0.0 - box_domain.lo[i]) / spacing[i] - 0.5;
            let k = rel.round().clamp(0.0, (resolution - 1) as f64);
            let center = box_domain.lo[i] + (k + 0.5) * spacing[i];
            dist2 += center * center;
        }
        let h_min = spacing.iter().cloned().fold(f64::INFINITY, f64::min);
        if dist2.sqrt() < 1e-9 * h_min {
            return Err(CoreError::GridHitsSingularity);
        }
    }

    let nodes_per_axis = resolution + 1;
    let mut node_strides = vec![1usize; n];
    let mut cell_strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        node_strides[i] = node_strides[i + 1] * nodes_per_axis;
        cell_strides[i] = cell_strides[i + 1] * resolution;
    }
    let node_count = nodes_per_axis.pow(n as u32);
    let cell_count = resolution.pow(n as u32);

    Ok(GridDomain {
        box_domain,
        resolution,
        spacing,
        node_strides,
        cell_strides,
        node_count,
        cell_count,
        singular_at_origin,
    })
}

impl GridDomain {
    pub fn n(&self) -> usize {
        self.box_domain.n()
    }

    pub fn box_domain(&self) -> &BoxDomain {
        &self.box_domain
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn singular_at_origin(&self) -> bool {
        self.singular_at_origin
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn node_multi(&self, idx: usize, out: &mut [usize]) {
        let mut rest = idx;
        for i in 0..self.n() {
            out[i] = rest / self.node_strides[i];
            rest %= self.node_strides[i];
        }
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.node_strides).map(|(m, s)| m * s).sum()
    }

    pub fn cell_multi(&self, idx: usize, out: &mut [usize]) {
        let mut rest = idx;
        for i in 0..self.n() {
            out[i] = rest / self.cell_strides[i];
            rest %= self.cell_strides[i];
        }
    }

    pub fn cell_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.cell_strides).map(|(m, s)| m * s).sum()
    }

    pub fn node_coord(&self, idx: usize, out: &mut [f64]) {
        let mut rest = idx;
        for i in 0..self.n() {
            let k = rest / self.node_strides[i];
            rest %= self.node_strides[i];
            out[i] = self.box_domain.lo[i] + k as f64 * self.spacing[i];
        }
    }

    pub fn cell_center(&self, idx: usize, out: &mut [f64]) {
        let mut rest = idx;
        for i in 0..self.n() {
            let k = rest / self.cell_strides[i];
            rest %= self.cell_strides[i];
            out[i] = self.box_domain.lo[i] + (k as f64 + 0.5) * self.spacing[i];
        }
    }

    pub fn is_boundary_node(&self, idx: usize) -> bool {
        let mut rest = idx;
        for i in 0..self.n() {
            let k = rest / self.node_strides[i];
            rest %= self.node_strides[i];
            if k == 0 || k == self.resolution {
                return true;
            }
        }
        false
    }

    /// Corner node indices of a cell, in a fixed order (`2^n` entries).
    pub fn cell_corners(&self, cell: usize, out: &mut Vec<usize>) {
        out.clear();
        let n = self.n();
        let mut multi = [0usize; 3];
        self.cell_multi(cell, &mut multi[..n]);
        for corner in 0..(1usize << n) {
            let mut idx = 0;
            for i in 0..n {
                let bit = (corner >> i) & 1;
                idx += (multi[i] + bit) * self.node_strides[i];
            }
            out.push(idx);
        }
    }

    /// Cells adjacent to a node, in a fixed order (up to `2^n` entries).
    pub fn node_cells(&self, node: usize, out: &mut Vec<usize>) {
        out.clear();
        let n = self.n();
        let mut multi = [0usize; 3];
        self.node_multi(node, &mut multi[..n]);
        for corner in 0..(1usize << n) {
            let mut idx = 0;
            let mut ok = true;
            for i in 0..n {
                let bit = (corner >> i) & 1;
                // bit = 1 means the cell lies on the low side along axis i
                if bit == 1 {
                    if multi[i] == 0 {
                        ok = false;
                        break;
                    }
                    idx += (multi[i] - 1) * self.cell_strides[i];
                } else {
                    if multi[i] >= self.resolution {
                        ok = false;
                        break;
                    }
                    idx += multi[i] * self.cell_strides[i];
                }
            }
            if ok {
                out.push(idx);
            }
        }
    }

    fn in_ball(coord: &[f64], x0: &[f64], r: f64, tol: f64) -> bool {
        let d2: f64 = coord.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
        d2.sqrt() <= r + tol
    }

    /// Indices of nodes inside the closed ball `B_r(x0)`.
    pub fn nodes_in_ball(&self, x0: &[f64], r: f64) -> Vec<usize> {
        let tol = GEOM_EPS * self.spacing[0];
        let mut coord = [0.0f64; 3];
        (0..self.node_count)
            .filter(|&idx| {
                self.node_coord(idx, &mut coord[..self.n()]);
                Self::in_ball(&coord[..self.n()], x0, r, tol)
            })
            .collect()
    }

    /// Indices of cells whose centers lie in the closed ball `B_r(x0)`.
    pub fn cells_in_ball(&self, x0: &[f64], r: f64) -> Vec<usize> {
        let tol = GEOM_EPS * self.spacing[0];
        let mut coord = [0.0f64; 3];
        (0..self.cell_count)
            .filter(|&idx| {
                self.cell_center(idx, &mut coord[..self.n()]);
                Self::in_ball(&coord[..self.n()], x0, r, tol)
            })
            .collect()
    }

    /// Discrete measure of a cell mask.
    pub fn mask_volume(&self, mask: &[usize]) -> f64 {
        mask.len() as f64 * self.cell_volume()
    }

    /// True when the closed ball `B_r(x0)` fits inside the box.
    pub fn ball_inside(&self, x0: &[f64], r: f64) -> bool {
        let tol = GEOM_EPS * self.spacing[0];
        (0..self.n()).all(|i| {
            x0[i] - r >= self.box_domain.lo[i] - tol && x0[i] + r <= self.box_domain.hi[i] + tol
        })
    }
}
