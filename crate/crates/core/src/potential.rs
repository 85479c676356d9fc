//! Periodized Gaussian-bump potentials on the torus.

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid};
use crate::spectral::SpectralField;
use serde::{Deserialize, Serialize};

/// Relative tail tolerance for the dropped periodization terms.
pub const TAIL_TOL: f64 = 1e-12;
/// Cap on the per-bump periodization radius.
pub const K_CAP: usize = 10;

/// One Gaussian bump `amplitude * exp(-width |x - center|^2)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub amplitude: f64,
    pub width: f64,
    pub center: Vec<f64>,
}

/// Periodized sum of Gaussian bumps.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub bumps: Vec<Bump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodization_radius: Option<usize>,
}

impl PotentialSpec {
    pub fn free() -> Self {
        Self { bumps: vec![], periodization_radius: None }
    }

    /// Three positive bumps (amplitudes 5, 2, 3).
    pub fn three_bumps() -> Self {
        Self {
            bumps: vec![
                Bump { amplitude: 5.0, width: 10.0, center: vec![0.75, 0.5] },
                Bump { amplitude: 2.0, width: 10.0, center: vec![-0.25, 0.75] },
                Bump { amplitude: 3.0, width: 5.0, center: vec![-0.25, -0.25] },
            ],
            periodization_radius: None,
        }
    }

    /// Two positive bumps and one well (amplitudes 5, 2, -3).
    pub fn two_bumps_one_well() -> Self {
        Self {
            bumps: vec![
                Bump { amplitude: 5.0, width: 10.0, center: vec![0.75, 0.5] },
                Bump { amplitude: 2.0, width: 10.0, center: vec![-0.25, 0.75] },
                Bump { amplitude: -3.0, width: 5.0, center: vec![-0.25, -0.25] },
            ],
            periodization_radius: None,
        }
    }

    /// Smallest lattice radius keeping the dropped tail below
    /// `TAIL_TOL * |amplitude|` for a bump of the given width.
    ///
    /// A shift `m` with `|m| = K+1` contributes at most
    /// `exp(-width (K-1)^2)` at any evaluation point (centers are wrapped
    /// into `[0,1)`, evaluation points lie in `[0,1)`, so the distance to
    /// the nearest dropped image is at least `K-1`).
    pub fn required_radius(width: f64) -> Result<usize> {
        if width <= 0.0 {
            return Err(Error::InvalidArgument(format!("bump width must be > 0, got {width}")));
        }
        let need = (TAIL_TOL.ln().abs() / width).sqrt().ceil() as usize + 1;
        Ok(need.max(1))
    }

    fn effective_radius(&self) -> Result<usize> {
        let mut k = 1usize;
        for b in &self.bumps {
            k = k.max(Self::required_radius(b.width)?);
        }
        if let Some(user) = self.periodization_radius {
            if user < k {
                return Err(Error::InvalidArgument(format!(
                    "periodization_radius {user} too small; tail tolerance needs {k}"
                )));
            }
            k = user;
        }
        if k > K_CAP {
            return Err(Error::InvalidArgument(format!(
                "periodization radius {k} exceeds cap {K_CAP}"
            )));
        }
        Ok(k)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        for b in &self.bumps {
            if b.width <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "bump width must be > 0, got {}",
                    b.width
                )));
            }
            if b.center.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "bump center has {} coordinates, expected {dim}",
                    b.center.len()
                )));
            }
            if !b.amplitude.is_finite() || !b.center.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidArgument("non-finite bump parameter".into()));
            }
        }
        self.effective_radius()?;
        Ok(())
    }

    /// Evaluate the periodized potential at one point.
    ///
    /// The lattice sum factorizes per axis:
    /// `sum_m exp(-w |x-c-m|^2) = prod_a sum_{m_a} exp(-w (x_a-c_a-m_a)^2)`.
    pub fn eval_point(&self, dim: usize, x: &[f64]) -> Result<f64> {
        let k = self.effective_radius()? as i64;
        let mut total = 0.0;
        for b in &self.bumps {
            let mut prod = 1.0;
            for a in 0..dim {
                let c = crate::grid::wrap_unit(b.center[a]);
                let mut s = 0.0;
                for m in -k..=k {
                    let d = x[a] - c - m as f64;
                    s += (-b.width * d * d).exp();
                }
                prod *= s;
            }
            total += b.amplitude * prod;
        }
        Ok(total)
    }

    /// Gradient of the periodized potential at one point.
    pub fn eval_gradient(&self, dim: usize, x: &[f64]) -> Result<Vec<f64>> {
        let k = self.effective_radius()? as i64;
        let mut grad = vec![0.0; dim];
        for b in &self.bumps {
            // per-axis sums and their derivatives
            let mut s = [0.0f64; 2];
            let mut ds = [0.0f64; 2];
            for a in 0..dim {
                let c = crate::grid::wrap_unit(b.center[a]);
                let mut sa = 0.0;
                let mut da = 0.0;
                for m in -k..=k {
                    let d = x[a] - c - m as f64;
                    let e = (-b.width * d * d).exp();
                    sa += e;
                    da += -2.0 * b.width * d * e;
                }
                s[a] = sa;
                ds[a] = da;
            }
            for a in 0..dim {
                let mut term = b.amplitude * ds[a];
                for o in 0..dim {
                    if o != a {
                        term *= s[o];
                    }
                }
                grad[a] += term;
            }
        }
        Ok(grad)
    }

    /// Sample the potential on a grid.
    pub fn sample(&self, grid: TorusGrid) -> Result<ScalarField> {
        self.validate(grid.dim())?;
        let k = self.effective_radius()? as i64;
        let n = grid.n_per_axis();
        let dim = grid.dim();
        let mut values = vec![0.0; grid.len()];
        for b in &self.bumps {
            // per-axis periodized 1-D Gaussian tables
            let mut tables: Vec<Vec<f64>> = Vec::with_capacity(dim);
            for a in 0..dim {
                let c = crate::grid::wrap_unit(b.center[a]);
                let mut t = Vec::with_capacity(n);
                for i in 0..n {
                    let x = i as f64 * grid.spacing();
                    let mut s = 0.0;
                    for m in -k..=k {
                        let d = x - c - m as f64;
                        s += (-b.width * d * d).exp();
                    }
                    t.push(s);
                }
                tables.push(t);
            }
            match dim {
                1 => {
                    for (i, v) in values.iter_mut().enumerate() {
                        *v += b.amplitude * tables[0][i];
                    }
                }
                2 => {
                    for iy in 0..n {
                        let ty = tables[1][iy];
                        for ix in 0..n {
                            values[iy * n + ix] += b.amplitude * tables[0][ix] * ty;
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        ScalarField::new(grid, values, "V")
    }
}

/// A sampled potential with spectral point evaluation of `V` and `grad V`.
///
/// Built from grid samples; evaluation sums the significant Fourier modes,
/// which for Gaussian-bump potentials is a short sum.
#[derive(Debug, Clone)]
pub struct SampledPotential {
    dim: usize,
    modes: Vec<([i64; 2], num_complex::Complex64)>,
    min_value: f64,
    max_value: f64,
}

impl SampledPotential {
    pub fn from_field(field: &ScalarField) -> Self {
        let sp = SpectralField::forward(field);
        let maxc = sp.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        let modes = sp.significant_modes(1e-15 * maxc.max(1.0));
        let min_value = field.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_value = field.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self { dim: field.grid.dim(), modes, min_value, max_value }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self {
            dim,
            modes: vec![([0, 0], num_complex::Complex64::new(value, 0.0))],
            min_value: value,
            max_value: value,
        }
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        SpectralField::eval_modes(&self.modes, self.dim, x).re
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        use std::f64::consts::PI;
        let mut grad = vec![0.0; self.dim];
        for (k, c) in &self.modes {
            let mut phase = 0.0;
            for a in 0..self.dim {
                phase += k[a] as f64 * x[a];
            }
            phase *= 2.0 * PI;
            let e = num_complex::Complex64::new(phase.cos(), phase.sin());
            for a in 0..self.dim {
                grad[a] += (c * e * num_complex::Complex64::new(0.0, 2.0 * PI * k[a] as f64)).re;
            }
        }
        grad
    }
}
