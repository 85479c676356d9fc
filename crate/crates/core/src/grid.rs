//! Uniform periodic grids on the flat torus `[0,1)^dim` and real fields
//! sampled on them.

use crate::error::{Error, Result};

/// Uniform grid on the torus `[0,1)^dim`, `dim` is 1 or 2.
///
/// The side length is fixed at 1 and the number of points per axis is a
/// power of two, so `spacing * n_per_axis == 1` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("dim must be 1 or 2, got {dim}")));
        }
        if n_per_axis < 16 || !n_per_axis.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "n_per_axis must be a power of two >= 16, got {n_per_axis}"
            )));
        }
        Ok(Self { dim, n: n_per_axis })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Total number of grid points, `n_per_axis^dim`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume `spacing^dim`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Flat index from per-axis indices. `iy` is ignored in 1-D.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.n);
        if self.dim == 1 {
            ix
        } else {
            iy * self.n + ix
        }
    }

    /// Per-axis indices `(ix, iy)` from a flat index; `iy = 0` in 1-D.
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        if self.dim == 1 {
            (idx, 0)
        } else {
            (idx % self.n, idx / self.n)
        }
    }

    /// Physical coordinates of a grid point; second entry is 0 in 1-D.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(idx);
        let d = self.spacing();
        [ix as f64 * d, iy as f64 * d]
    }
}

/// Wrap a coordinate into `[0,1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Signed minimal-image difference `a - b`, in `[-1/2, 1/2)`.
#[inline]
pub fn periodic_delta(a: f64, b: f64) -> f64 {
    let mut d = (a - b) - (a - b).round();
    if d < -0.5 {
        d += 1.0;
    }
    if d >= 0.5 {
        d -= 1.0;
    }
    d
}

/// Periodic Euclidean distance between two torus points.
#[inline]
pub fn periodic_dist(dim: usize, p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for a in 0..dim {
        let d = periodic_delta(p[a], q[a]);
        s += d * d;
    }
    s.sqrt()
}

/// Real samples of a function on a [`TorusGrid`].
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
    pub label: String,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "values length {} != grid length {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite field value".into()));
        }
        Ok(Self { grid, values, label: label.into() })
    }

    pub fn zeros(grid: TorusGrid, label: impl Into<String>) -> Self {
        Self { grid, values: vec![0.0; grid.len()], label: label.into() }
    }

    /// Sample a closure `f(x)` on the grid, `x` a point in `[0,1)^dim`.
    pub fn from_fn(grid: TorusGrid, label: impl Into<String>, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|idx| {
                let p = grid.point(idx);
                f(&p[..dim])
            })
            .collect();
        Self { grid, values, label: label.into() }
    }

    /// L2 norm over the torus, `sqrt(sum v^2 * spacing^dim)`.
    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.cell_volume();
        (self.values.iter().map(|v| v * v).sum::<f64>() * w).sqrt()
    }

    /// Sup norm over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// L2 inner product over the torus.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        let w = self.grid.cell_volume();
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * w)
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
            label: self.label.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        let g = TorusGrid::new(2, 64).unwrap();
        assert_eq!(g.len(), 4096);
        assert_eq!(g.spacing() * g.n_per_axis() as f64, 1.0);
        assert!(TorusGrid::new(2, 48).is_err());
        assert!(TorusGrid::new(2, 8).is_err());
        assert!(TorusGrid::new(3, 64).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = TorusGrid::new(2, 16).unwrap();
        for idx in 0..g.len() {
            let (ix, iy) = g.coords(idx);
            assert_eq!(g.index(ix, iy), idx);
        }
    }

    #[test]
    fn periodic_distance_wraps() {
        assert!((periodic_dist(2, &[0.99, 0.5], &[0.01, 0.5]) - 0.02).abs() < 1e-15);
        assert!((periodic_delta(0.1, 0.9) - 0.2).abs() < 1e-15);
        assert_eq!(wrap_unit(-0.25), 0.75);
        assert_eq!(wrap_unit(1.0), 0.0);
    }

    #[test]
    fn l2_norm_of_constant() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = ScalarField::from_fn(g, "one", |_| 1.0);
        assert!((f.l2_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite() {
        let g = TorusGrid::new(1, 16).unwrap();
        assert!(ScalarField::new(g, vec![f64::NAN; 16], "bad").is_err());
    }
}
