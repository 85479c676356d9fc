//! Grayscale level-set rasters in binary PGM.

use std::fs;
use std::path::Path;

use semilab_core::{Error, Result, ScalarField};

/// A rendered field: linear gray map with contour pixels forced to 0.
#[derive(Debug, Clone)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    /// Row-major from `y = 0` at the top.
    pub pixels: Vec<u8>,
    pub u_min: f64,
    pub u_max: f64,
    /// Contour levels drawn, equispaced inside `[u_min, u_max]`.
    pub levels: Vec<f64>,
}

/// Map a field to gray `round(255 (u - min)/(max - min))` and paint the
/// cells crossed by any of `n_levels` equispaced levels black. A
/// constant field renders as uniform 128.
pub fn render_levels(u: &ScalarField, n_levels: usize) -> Result<RasterImage> {
    let grid = u.grid;
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument(
            "level-set rendering requires a 2-D field".into(),
        ));
    }
    if n_levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 levels, got {n_levels}"
        )));
    }
    let n = grid.n_per_axis();
    let u_min = u.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let u_max = u.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = u_max - u_min;
    if range == 0.0 {
        return Ok(RasterImage {
            width: n,
            height: n,
            pixels: vec![128; n * n],
            u_min,
            u_max,
            levels: Vec::new(),
        });
    }
    let levels: Vec<f64> = (0..n_levels)
        .map(|j| u_min + (j as f64 + 0.5) * range / n_levels as f64)
        .collect();
    let mut pixels = vec![0u8; n * n];
    for iy in 0..n {
        for ix in 0..n {
            let v = u.values[grid.index(ix, iy)];
            pixels[iy * n + ix] = (255.0 * (v - u_min) / range).round() as u8;
        }
    }
    // a pixel is a contour pixel when its cell's corner range straddles
    // some level
    for iy in 0..n {
        let iy1 = (iy + 1) % n;
        for ix in 0..n {
            let ix1 = (ix + 1) % n;
            let c = [
                u.values[grid.index(ix, iy)],
                u.values[grid.index(ix1, iy)],
                u.values[grid.index(ix, iy1)],
                u.values[grid.index(ix1, iy1)],
            ];
            let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if levels.iter().any(|&l| lo <= l && l <= hi) {
                pixels[iy * n + ix] = 0;
            }
        }
    }
    Ok(RasterImage { width: n, height: n, pixels, u_min, u_max, levels })
}

/// Write a binary PGM (P5, maxval 255).
pub fn write_pgm(path: &Path, img: &RasterImage) -> std::io::Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use semilab_core::TorusGrid;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_renders_uniform_gray() {
        let g = TorusGrid::new(2, 32).unwrap();
        let u = ScalarField::from_fn(g, "u", |_| 0.0);
        let img = render_levels(&u, 4).unwrap();
        assert!(img.pixels.iter().all(|&p| p == 128));
        assert!(img.levels.is_empty());
    }

    #[test]
    fn sine_contours_sit_at_level_crossings() {
        let n = 128;
        let g = TorusGrid::new(2, n).unwrap();
        let u = ScalarField::from_fn(g, "u", |p| (2.0 * PI * p[0]).sin());
        let img = render_levels(&u, 2).unwrap();
        // two levels at +-1/2; sin crosses them at x = 1/12, 5/12, 7/12, 11/12
        assert!((img.levels[0] + 0.5).abs() < 1e-12);
        assert!((img.levels[1] - 0.5).abs() < 1e-12);
        let mut contour_cols = Vec::new();
        for ix in 0..n {
            if img.pixels[ix] == 0 {
                contour_cols.push(ix);
            }
        }
        for want in [1.0 / 12.0, 5.0 / 12.0, 7.0 / 12.0, 11.0 / 12.0] {
            let col = want * n as f64;
            assert!(
                contour_cols.iter().any(|&c| (c as f64 - col).abs() <= 1.0),
                "no contour column near {col}, have {contour_cols:?}"
            );
        }
        // columns are vertical stripes: every contour pixel repeats down rows
        for &c in &contour_cols {
            for iy in 0..n {
                assert_eq!(img.pixels[iy * n + c], 0);
            }
        }
    }

    #[test]
    fn pgm_header_and_payload() {
        let g = TorusGrid::new(2, 16).unwrap();
        let u = ScalarField::from_fn(g, "u", |p| p[0]);
        let img = render_levels(&u, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.pgm");
        write_pgm(&path, &img).unwrap();
        let data = std::fs::read(&path).unwrap();
        assert!(data.starts_with(b"P5\n16 16\n255\n"));
        assert_eq!(data.len(), 13 + 256);
    }
}
