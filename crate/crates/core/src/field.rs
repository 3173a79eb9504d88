//! Vector-valued nodal fields with fixed Dirichlet traces.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::grid::GridDomain;

/// `m` values per grid node, node-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    m: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &GridDomain, m: usize) -> Result<Field> {
        if !(1..=3).contains(&m) {
            return Err(CoreError::DimensionMismatch(format!("m = {m} not in 1..=3")));
        }
        Ok(Field { m, values: vec![0.0; grid.node_count() * m] })
    }

    pub fn constant(grid: &GridDomain, value: &[f64]) -> Result<Field> {
        let mut f = Field::zeros(grid, value.len())?;
        for node in 0..grid.node_count() {
            f.values[node * f.m..(node + 1) * f.m].copy_from_slice(value);
        }
        Ok(f)
    }

    /// Build a field by evaluating `func(x, out)` at every node coordinate.
    pub fn from_fn<F>(grid: &GridDomain, m: usize, func: F) -> Result<Field>
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let mut f = Field::zeros(grid, m)?;
        let n = grid.n();
        let mut coord = [0.0f64; 3];
        for node in 0..grid.node_count() {
            grid.node_coord(node, &mut coord[..n]);
            func(&coord[..n], &mut f.values[node * m..(node + 1) * m]);
        }
        Ok(f)
    }

    /// Affine field `u(x) = A x + b` with `A` given row-major (`m x n`).
    pub fn affine(grid: &GridDomain, matrix: &[f64], offset: &[f64]) -> Result<Field> {
        let n = grid.n();
        let m = offset.len();
        if matrix.len() != m * n {
            return Err(CoreError::DimensionMismatch(format!(
                "affine matrix has {} entries, expected {}",
                matrix.len(),
                m * n
            )));
        }
        Field::from_fn(grid, m, |x, out| {
            for (alpha, o) in out.iter_mut().enumerate() {
                *o = offset[alpha]
                    + (0..n).map(|i| matrix[alpha * n + i] * x[i]).sum::<f64>();
            }
        })
    }

    /// Seeded smooth random field with an exactly zero boundary trace:
    /// a few Gaussian bumps per component under a product-of-sines window.
    pub fn seeded_bump(grid: &GridDomain, m: usize, seed: u64) -> Result<Field> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = grid.n();
        let b = grid.box_domain().clone();
        let bumps = 4;
        // centers in the inner 80% of the box
        let mut params = Vec::new();
        for _ in 0..m {
            for _ in 0..bumps {
                let amp: f64 = rng.gen_range(-1.0..=1.0);
                let width: f64 = rng.gen_range(0.08..0.3);
                let center: Vec<f64> = (0..n)
                    .map(|i| {
                        let span = b.hi[i] - b.lo[i];
                        b.lo[i] + span * rng.gen_range(0.1..0.9)
                    })
                    .collect();
                params.push((amp, width, center));
            }
        }
        let mut f = Field::from_fn(grid, m, |x, out| {
            let window: f64 = (0..n)
                .map(|i| {
                    let t = (x[i] - b.lo[i]) / (b.hi[i] - b.lo[i]);
                    (std::f64::consts::PI * t).sin()
                })
                .product();
            for (alpha, o) in out.iter_mut().enumerate() {
                let mut v = 0.0;
                for (amp, width, center) in &params[alpha * bumps..(alpha + 1) * bumps] {
                    let scale = grid.box_domain().half_width() * 2.0;
                    let d2: f64 = x
                        .iter()
                        .zip(center)
                        .map(|(a, c)| ((a - c) / (width * scale)).powi(2))
                        .sum();
                    v += amp * (-0.5 * d2).exp();
                }
                *o = v * window;
            }
        })?;
        // sin(pi) is only ~1e-16; force the trace to exact zero
        for node in 0..grid.node_count() {
            if grid.is_boundary_node(node) {
                f.values[node * m..(node + 1) * m].fill(0.0);
            }
        }
        Ok(f)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn value(&self, node: usize) -> &[f64] {
        &self.values[node * self.m..(node + 1) * self.m]
    }

    /// Euclidean norm of the nodal vector.
    pub fn norm_at(&self, node: usize) -> f64 {
        self.value(node).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn matches_grid(&self, grid: &GridDomain) -> bool {
        self.values.len() == grid.node_count() * self.m
    }

    /// Dump as CSV: `node_index,x1..xn,u1..um`, shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, grid: &GridDomain, mut w: W) -> Result<()> {
        let n = grid.n();
        let mut header = String::from("node_index");
        for i in 1..=n {
            header.push_str(&format!(",x{i}"));
        }
        for a in 1..=self.m {
            header.push_str(&format!(",u{a}"));
        }
        writeln!(w, "{header}")?;
        let mut coord = [0.0f64; 3];
        for node in 0..grid.node_count() {
            grid.node_coord(node, &mut coord[..n]);
            let mut line = node.to_string();
            for &c in &coord[..n] {
                line.push_str(&format!(",{c}"));
            }
            for v in self.value(node) {
                line.push_str(&format!(",{v}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Read a CSV dump back, validating the node count and coordinates
    /// against the grid.
    pub fn read_csv<R: BufRead>(grid: &GridDomain, reader: R) -> Result<Field> {
        let n = grid.n();
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| CoreError::FieldParse("empty file".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < n + 2 || cols[0] != "node_index" {
            return Err(CoreError::FieldParse(format!("unexpected header: {header}")));
        }
        let m = cols.len() - 1 - n;
        if !(1..=3).contains(&m) {
            return Err(CoreError::FieldParse(format!("implied m = {m} not in 1..=3")));
        }
        let mut field = Field::zeros(grid, m)?;
        let mut coord = [0.0f64; 3];
        let mut rows = 0usize;
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.trim().split(',').collect();
            if parts.len() != 1 + n + m {
                return Err(CoreError::FieldParse(format!(
                    "row {}: {} columns, expected {}",
                    lineno + 2,
                    parts.len(),
                    1 + n + m
                )));
            }
            let node: usize = parts[0]
                .parse()
                .map_err(|_| CoreError::FieldParse(format!("row {}: bad node index", lineno + 2)))?;
            if node >= grid.node_count() {
                return Err(CoreError::FieldParse(format!(
                    "row {}: node index {node} out of range",
                    lineno + 2
                )));
            }
            grid.node_coord(node, &mut coord[..n]);
            for i in 0..n {
                let x: f64 = parts[1 + i]
                    .parse()
                    .map_err(|_| CoreError::FieldParse(format!("row {}: bad coordinate", lineno + 2)))?;
                if (x - coord[i]).abs() > 1e-9 * (1.0 + coord[i].abs()) {
                    return Err(CoreError::FieldParse(format!(
                        "row {}: coordinate {x} does not match grid ({})",
                        lineno + 2,
                        coord[i]
                    )));
                }
            }
            for a in 0..m {
                let v: f64 = parts[1 + n + a]
                    .parse()
                    .map_err(|_| CoreError::FieldParse(format!("row {}: bad value", lineno + 2)))?;
                field.values[node * m + a] = v;
            }
            rows += 1;
        }
        if rows != grid.node_count() {
            return Err(CoreError::FieldParse(format!(
                "{rows} data rows, expected {}",
                grid.node_count()
            )));
        }
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, BoxDomain};

    #[test]
    fn csv_round_trip_is_exact() {
        let grid = build_grid(BoxDomain::unit_square(), 6, false).unwrap();
        let f = Field::from_fn(&grid, 2, |x, out| {
            out[0] = (x[0] * 12.7).sin() / 3.0;
            out[1] = x[1] * x[0] - 0.25;
        })
        .unwrap();
        let mut buf = Vec::new();
        f.write_csv(&grid, &mut buf).unwrap();
        let g = Field::read_csv(&grid, &buf[..]).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn truncated_csv_is_rejected() {
        let grid = build_grid(BoxDomain::unit_square(), 6, false).unwrap();
        let f = Field::zeros(&grid, 1).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(matches!(
            Field::read_csv(&grid, truncated.as_bytes()),
            Err(CoreError::FieldParse(_))
        ));
    }

    #[test]
    fn wrong_grid_is_rejected() {
        let g6 = build_grid(BoxDomain::unit_square(), 6, false).unwrap();
        let g8 = build_grid(BoxDomain::unit_square(), 8, false).unwrap();
        let f = Field::zeros(&g6, 1).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&g6, &mut buf).unwrap();
        assert!(Field::read_csv(&g8, &buf[..]).is_err());
    }

    #[test]
    fn bumps_have_exact_zero_trace_and_are_seeded() {
        let grid = build_grid(BoxDomain::unit_square(), 12, false).unwrap();
        let f1 = Field::seeded_bump(&grid, 2, 7).unwrap();
        let f2 = Field::seeded_bump(&grid, 2, 7).unwrap();
        let f3 = Field::seeded_bump(&grid, 2, 8).unwrap();
        assert_eq!(f1, f2);
        assert_ne!(f1, f3);
        let mut nonzero_interior = false;
        for node in 0..grid.node_count() {
            if grid.is_boundary_node(node) {
                assert_eq!(f1.norm_at(node), 0.0);
            } else if f1.norm_at(node) != 0.0 {
                nonzero_interior = true;
            }
        }
        assert!(nonzero_interior);
    }

    #[test]
    fn affine_field_evaluates() {
        let grid = build_grid(BoxDomain::unit_square(), 4, false).unwrap();
        let f = Field::affine(&grid, &[1.0, 0.0, 0.0, 1.0], &[0.5, -0.5]).unwrap();
        let mut coord = [0.0f64; 2];
        for node in 0..grid.node_count() {
            grid.node_coord(node, &mut coord);
            assert_eq!(f.value(node)[0], coord[0] + 0.5);
            assert_eq!(f.value(node)[1], coord[1] - 0.5);
        }
    }
}
