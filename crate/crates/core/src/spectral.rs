//! FFT plumbing: complex spectra of grid fields, Fourier multipliers,
//! zero-padded upsampling, and pointwise trigonometric evaluation.
//!
//! Coefficient convention: `u(x) = sum_k c_k e^{2 pi i k.x}` with integer
//! frequencies `k` in the symmetric band `[-n/2, n/2)` per axis. The array
//! layout mirrors the grid layout (index `i` holds frequency
//! `signed_freq(i, n)`).

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Signed frequency stored at array position `i` of an `n`-point axis.
#[inline]
pub fn signed_freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Array position holding signed frequency `k` (requires `-n/2 <= k < n/2`).
#[inline]
pub fn freq_index(k: i64, n: usize) -> usize {
    if k >= 0 {
        k as usize
    } else {
        (k + n as i64) as usize
    }
}

fn fft_axes(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    match dim {
        1 => fft.process(data),
        2 => {
            // rows
            for row in data.chunks_exact_mut(n) {
                fft.process(row);
            }
            // columns, gathered through a scratch buffer
            let mut col = vec![Complex64::default(); n];
            for ix in 0..n {
                for iy in 0..n {
                    col[iy] = data[iy * n + ix];
                }
                fft.process(&mut col);
                for iy in 0..n {
                    data[iy * n + ix] = col[iy];
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Complex Fourier coefficients of a field on a [`TorusGrid`].
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: TorusGrid,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// Forward transform of a real field.
    pub fn forward(field: &ScalarField) -> SpectralField {
        let mut data: Vec<Complex64> =
            field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_axes(&mut data, field.grid.n_per_axis(), field.grid.dim(), false);
        let scale = 1.0 / field.grid.len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        SpectralField { grid: field.grid, coeffs: data }
    }

    /// Forward transform of complex samples (test signals).
    pub fn forward_complex(grid: TorusGrid, samples: &[Complex64]) -> Result<SpectralField> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidArgument("sample length != grid length".into()));
        }
        let mut data = samples.to_vec();
        fft_axes(&mut data, grid.n_per_axis(), grid.dim(), false);
        let scale = 1.0 / grid.len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        Ok(SpectralField { grid, coeffs: data })
    }

    pub fn zeros(grid: TorusGrid) -> SpectralField {
        SpectralField { grid, coeffs: vec![Complex64::default(); grid.len()] }
    }

    /// Inverse transform to complex grid samples.
    pub fn inverse_complex(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft_axes(&mut data, self.grid.n_per_axis(), self.grid.dim(), true);
        data
    }

    /// Inverse transform, discarding the (roundoff-level) imaginary part.
    pub fn inverse_real(&self, label: impl Into<String>) -> ScalarField {
        let data = self.inverse_complex();
        ScalarField {
            grid: self.grid,
            values: data.iter().map(|c| c.re).collect(),
            label: label.into(),
        }
    }

    /// Frequency vector at flat index `idx`; second entry 0 in 1-D.
    #[inline]
    pub fn freq_at(&self, idx: usize) -> [i64; 2] {
        let n = self.grid.n_per_axis();
        let (ix, iy) = self.grid.coords(idx);
        [signed_freq(ix, n), if self.grid.dim() == 2 { signed_freq(iy, n) } else { 0 }]
    }

    /// Coefficient of frequency `k` (zero outside the band).
    pub fn coeff(&self, k: [i64; 2]) -> Complex64 {
        let n = self.grid.n_per_axis() as i64;
        for a in 0..self.grid.dim() {
            if k[a] < -n / 2 || k[a] >= n / 2 {
                return Complex64::default();
            }
        }
        let ix = freq_index(k[0], self.grid.n_per_axis());
        let iy = if self.grid.dim() == 2 { freq_index(k[1], self.grid.n_per_axis()) } else { 0 };
        self.coeffs[self.grid.index(ix, iy)]
    }

    pub fn set_coeff(&mut self, k: [i64; 2], c: Complex64) {
        let ix = freq_index(k[0], self.grid.n_per_axis());
        let iy = if self.grid.dim() == 2 { freq_index(k[1], self.grid.n_per_axis()) } else { 0 };
        let idx = self.grid.index(ix, iy);
        self.coeffs[idx] = c;
    }

    /// Modes with `|c_k| > threshold`, as `(k, c_k)` pairs in index order.
    pub fn significant_modes(&self, threshold: f64) -> Vec<([i64; 2], Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > threshold)
            .map(|(idx, c)| (self.freq_at(idx), *c))
            .collect()
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point using a
    /// precomputed significant-mode list.
    pub fn eval_modes(modes: &[([i64; 2], Complex64)], dim: usize, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::default();
        for (k, c) in modes {
            let mut phase = 0.0;
            for a in 0..dim {
                phase += k[a] as f64 * x[a];
            }
            phase *= 2.0 * std::f64::consts::PI;
            acc += c * Complex64::new(phase.cos(), phase.sin());
        }
        acc
    }

    /// Largest `|k|_inf` with `|c_k| > threshold`.
    pub fn effective_band(&self, threshold: f64) -> i64 {
        let mut kmax = 0i64;
        for (idx, c) in self.coeffs.iter().enumerate() {
            if c.norm() > threshold {
                let k = self.freq_at(idx);
                kmax = kmax.max(k[0].abs()).max(k[1].abs());
            }
        }
        kmax
    }

    /// Zero-pad onto a finer grid with `new_n` points per axis.
    pub fn upsample(&self, new_n: usize) -> Result<SpectralField> {
        let n = self.grid.n_per_axis();
        if new_n < n {
            return Err(Error::InvalidArgument("upsample target smaller than source".into()));
        }
        let target = TorusGrid::new(self.grid.dim(), new_n)?;
        let mut out = SpectralField::zeros(target);
        for (idx, c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let k = self.freq_at(idx);
            out.set_coeff(k, *c);
        }
        Ok(out)
    }
}

/// Fourier-upsampled samples of a real field on a `new_n` grid.
pub fn upsample_field(field: &ScalarField, new_n: usize) -> Result<ScalarField> {
    if new_n == field.grid.n_per_axis() {
        return Ok(field.clone());
    }
    let sp = SpectralField::forward(field);
    Ok(sp.upsample(new_n)?.inverse_real(field.label.clone()))
}
