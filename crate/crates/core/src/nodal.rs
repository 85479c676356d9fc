//! Nodal set extraction and the zero-distribution lemmas: H^{n-1} measure
//! of {u = 0}, sign-domain counting, zeros in classically allowed balls,
//! mean-value cancellation, and sign-split balance.

use crate::ball::{ball_mask, BallSpec};
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::grid::{periodic_dist, ScalarField, TorusGrid};
use rayon::prelude::*;

/// The zero set of a field: polyline segments in 2-D, crossing points in
/// 1-D. `total_measure` is polyline length in 2-D and crossing count in
/// 1-D (the 0-dimensional Hausdorff measure).
#[derive(Debug, Clone)]
pub struct NodalSet {
    pub grid: TorusGrid,
    pub segments: Vec<([f64; 2], [f64; 2])>,
    pub crossings: Vec<f64>,
    pub total_measure: f64,
}

/// Sign-perturbed copy of the values: exact zeros become `+eps0` so every
/// grid point has a definite sign.
fn perturbed(u: &ScalarField) -> Vec<f64> {
    let eps0 = 1e-14 * u.sup_norm();
    u.values.iter().map(|&v| if v == 0.0 { eps0 } else { v }).collect()
}

fn edge_cross(a: f64, b: f64) -> Option<f64> {
    if (a > 0.0) != (b > 0.0) {
        Some(a / (a - b))
    } else {
        None
    }
}

/// Marching squares with linear edge interpolation; saddle cells are
/// disambiguated by the sign of the corner average.
pub fn extract_nodal_set(u: &ScalarField) -> NodalSet {
    let grid = u.grid;
    let vals = perturbed(u);
    let n = grid.n_per_axis();
    let d = grid.spacing();

    if grid.dim() == 1 {
        let mut crossings = Vec::new();
        for i in 0..n {
            let a = vals[i];
            let b = vals[(i + 1) % n];
            if let Some(t) = edge_cross(a, b) {
                crossings.push((i as f64 + t) * d);
            }
        }
        let total_measure = crossings.len() as f64;
        return NodalSet { grid, segments: Vec::new(), crossings, total_measure };
    }

    let cell_segments: Vec<Vec<([f64; 2], [f64; 2])>> = (0..n)
        .into_par_iter()
        .map(|iy| {
            let mut segs = Vec::new();
            let iy1 = (iy + 1) % n;
            for ix in 0..n {
                let ix1 = (ix + 1) % n;
                let v00 = vals[iy * n + ix];
                let v10 = vals[iy * n + ix1];
                let v01 = vals[iy1 * n + ix];
                let v11 = vals[iy1 * n + ix1];
                let x0 = ix as f64 * d;
                let y0 = iy as f64 * d;
                // edge zero crossings: bottom, right, top, left
                let mut pts: Vec<[f64; 2]> = Vec::with_capacity(4);
                let mut which: Vec<u8> = Vec::with_capacity(4);
                if let Some(t) = edge_cross(v00, v10) {
                    pts.push([x0 + t * d, y0]);
                    which.push(0);
                }
                if let Some(t) = edge_cross(v10, v11) {
                    pts.push([x0 + d, y0 + t * d]);
                    which.push(1);
                }
                if let Some(t) = edge_cross(v01, v11) {
                    pts.push([x0 + t * d, y0 + d]);
                    which.push(2);
                }
                if let Some(t) = edge_cross(v00, v01) {
                    pts.push([x0, y0 + t * d]);
                    which.push(3);
                }
                match pts.len() {
                    0 => {}
                    2 => segs.push((pts[0], pts[1])),
                    4 => {
                        // saddle: both diagonals change sign; connect so the
                        // center-average sign region stays connected
                        let center = 0.25 * (v00 + v10 + v01 + v11);
                        // isolate the corners whose sign differs from the
                        // center: a (bottom, right) cut walls off v10
                        let pair_with_bottom = if (center > 0.0) != (v10 > 0.0) {
                            1u8
                        } else {
                            3u8
                        };
                        let b = pts[which.iter().position(|&w| w == 0).unwrap()];
                        let r = pts[which.iter().position(|&w| w == 1).unwrap()];
                        let t = pts[which.iter().position(|&w| w == 2).unwrap()];
                        let l = pts[which.iter().position(|&w| w == 3).unwrap()];
                        if pair_with_bottom == 1 {
                            segs.push((b, r));
                            segs.push((t, l));
                        } else {
                            segs.push((b, l));
                            segs.push((t, r));
                        }
                    }
                    _ => unreachable!("crossing count must be even"),
                }
            }
            segs
        })
        .collect();
    let segments: Vec<([f64; 2], [f64; 2])> =
        cell_segments.into_iter().flatten().collect();
    let total_measure = segments
        .iter()
        .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
        .sum();
    NodalSet { grid, segments, crossings: Vec::new(), total_measure }
}

/// Polyline length of the nodal set whose segment midpoints fall in
/// `B(center, r)` (periodic).
pub fn nodal_length_in_ball(ns: &NodalSet, center: &[f64], r: f64) -> f64 {
    ns.segments
        .iter()
        .filter(|(a, b)| {
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            periodic_dist(2, &mid, center) < r
        })
        .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
        .sum()
}

/// Connected components of {u > 0} plus components of {u < 0}, periodic
/// grid adjacency.
pub fn nodal_domain_count(u: &ScalarField) -> usize {
    let grid = u.grid;
    let vals = perturbed(u);
    let n = grid.n_per_axis();
    let len = grid.len();
    let mut seen = vec![false; len];
    let mut count = 0usize;
    let mut stack: Vec<usize> = Vec::new();
    for start in 0..len {
        if seen[start] {
            continue;
        }
        count += 1;
        let sign = vals[start] > 0.0;
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let neighbors: [usize; 4] = if grid.dim() == 1 {
                let i = idx;
                [(i + 1) % n, (i + n - 1) % n, i, i]
            } else {
                let ix = idx % n;
                let iy = idx / n;
                [
                    iy * n + (ix + 1) % n,
                    iy * n + (ix + n - 1) % n,
                    ((iy + 1) % n) * n + ix,
                    ((iy + n - 1) % n) * n + ix,
                ]
            };
            for &nb in &neighbors {
                if !seen[nb] && (vals[nb] > 0.0) == sign {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
    }
    count
}

/// Per-h nodal measures and the fitted `ln(measure)` vs `ln(1/h)` slope.
#[derive(Debug, Clone)]
pub struct NodalScalingReport {
    pub table: Vec<(f64, f64)>,
    pub slope: f64,
    pub r_squared: f64,
    /// Set when some measure vanished and no fit was possible.
    pub degenerate: bool,
}

pub fn nodal_measure_scaling(
    pairs: &[crate::eigensolver::EigenPair],
) -> Result<NodalScalingReport> {
    if pairs.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: pairs.len() });
    }
    let mut table: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|p| (p.h, extract_nodal_set(&p.field).total_measure))
        .collect();
    table.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    if table.iter().any(|&(_, m)| m <= 0.0) {
        return Ok(NodalScalingReport { table, slope: 0.0, r_squared: 0.0, degenerate: true });
    }
    let x: Vec<f64> = table.iter().map(|&(h, _)| (1.0 / h).ln()).collect();
    let y: Vec<f64> = table.iter().map(|&(_, m)| m.ln()).collect();
    let (_, slope, r2) = linear_fit(&x, &y);
    Ok(NodalScalingReport { table, slope, r_squared: r2, degenerate: false })
}

/// Exact periodic squared Euclidean distance transform (in grid units):
/// distance from each point to the nearest `true` point of `mask`.
///
/// Felzenszwalb's lower-envelope transform per axis, applied to a 3x tiling
/// so wraparound distances come out exactly.
fn edt_sq_periodic(mask: &[bool], grid: TorusGrid) -> Vec<f64> {
    const INF: f64 = 1e30;
    let n = grid.n_per_axis();

    fn transform_1d(f: &[f64], out: &mut Vec<f64>) {
        let n = f.len();
        out.clear();
        out.resize(n, 0.0);
        let mut v = vec![0usize; n];
        let mut z = vec![0.0f64; n + 1];
        let mut k = 0usize;
        v[0] = 0;
        z[0] = f64::NEG_INFINITY;
        z[1] = f64::INFINITY;
        for q in 1..n {
            loop {
                let p = v[k];
                let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                    / (2.0 * (q - p) as f64);
                if s <= z[k] {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                } else {
                    k += 1;
                    v[k] = q;
                    z[k] = s;
                    z[k + 1] = f64::INFINITY;
                    break;
                }
            }
        }
        let mut k = 0usize;
        for q in 0..n {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let p = v[k];
            out[q] = ((q as i64 - p as i64) * (q as i64 - p as i64)) as f64 + f[p];
        }
    }

    // pass along x with 3x periodic tiling
    let tile = |row: &[f64], out: &mut Vec<f64>, tmp: &mut Vec<f64>| {
        let n = row.len();
        tmp.clear();
        tmp.extend_from_slice(row);
        tmp.extend_from_slice(row);
        tmp.extend_from_slice(row);
        let mut full = Vec::new();
        transform_1d(tmp, &mut full);
        out.clear();
        out.extend_from_slice(&full[n..2 * n]);
    };

    match grid.dim() {
        1 => {
            let f: Vec<f64> = mask.iter().map(|&m| if m { 0.0 } else { INF }).collect();
            let mut out = Vec::new();
            let mut tmp = Vec::new();
            tile(&f, &mut out, &mut tmp);
            out
        }
        2 => {
            let mut stage = vec![0.0f64; grid.len()];
            stage
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(iy, chunk)| {
                    let f: Vec<f64> = (0..n)
                        .map(|ix| if mask[iy * n + ix] { 0.0 } else { INF })
                        .collect();
                    let mut out = Vec::new();
                    let mut tmp = Vec::new();
                    tile(&f, &mut out, &mut tmp);
                    chunk.copy_from_slice(&out);
                });
            let mut result = vec![0.0f64; grid.len()];
            let columns: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|ix| {
                    let col: Vec<f64> = (0..n).map(|iy| stage[iy * n + ix]).collect();
                    let mut out = Vec::new();
                    let mut tmp = Vec::new();
                    tile(&col, &mut out, &mut tmp);
                    out
                })
                .collect();
            for ix in 0..n {
                for iy in 0..n {
                    result[iy * n + ix] = columns[ix][iy];
                }
            }
            result
        }
        _ => unreachable!(),
    }
}

/// Outcome of the zero-in-allowed-balls check.
#[derive(Debug, Clone)]
pub struct ZeroBallReport {
    /// Grid indices of admissible centers whose ball misses one sign.
    pub violations: Vec<usize>,
    /// Number of admissible centers checked.
    pub checked: usize,
    /// Set when no ball fits inside the allowed region at this margin.
    pub allowed_region_empty: bool,
}

/// For every grid point whose ball `B(x0, c_ball h)` lies in the allowed
/// region `{V < E - margin}`, check that `u` takes both signs on the ball.
pub fn zero_in_ball_scan(
    u: &ScalarField,
    h: f64,
    c_ball: f64,
    v: &ScalarField,
    energy: f64,
    margin: f64,
) -> Result<ZeroBallReport> {
    u.check_same_grid(v)?;
    let grid = u.grid;
    let r = c_ball * h;
    if r <= 2.0 * grid.spacing() {
        return Err(Error::UnderResolved(format!(
            "ball radius {r} not resolvable at spacing {}",
            grid.spacing()
        )));
    }
    let vals = perturbed(u);
    let plus: Vec<bool> = vals.iter().map(|&x| x > 0.0).collect();
    let minus: Vec<bool> = vals.iter().map(|&x| x <= 0.0).collect();
    let forbidden: Vec<bool> = v.values.iter().map(|&x| x >= energy - margin).collect();

    let r_px2 = (r / grid.spacing()) * (r / grid.spacing());
    let d_plus = edt_sq_periodic(&plus, grid);
    let d_minus = edt_sq_periodic(&minus, grid);
    // distance zero everywhere when nothing is forbidden
    let d_bad = if forbidden.iter().any(|&b| b) {
        Some(edt_sq_periodic(&forbidden, grid))
    } else {
        None
    };

    let mut violations = Vec::new();
    let mut checked = 0usize;
    for idx in 0..grid.len() {
        let admissible = match &d_bad {
            None => true,
            Some(d) => d[idx] >= r_px2,
        };
        if !admissible {
            continue;
        }
        checked += 1;
        // the ball mask contains lattice points strictly within r, so a
        // sign is present iff its nearest representative is that close
        if !(d_plus[idx] < r_px2 && d_minus[idx] < r_px2) {
            violations.push(idx);
        }
    }
    Ok(ZeroBallReport { violations, checked, allowed_region_empty: checked == 0 })
}

/// Mask-quadrature integrals of `u+`, `u-`, and `|u|` over a ball.
#[derive(Debug, Clone, Copy)]
pub struct SignSplit {
    pub plus_integral: f64,
    pub minus_integral: f64,
    pub abs_integral: f64,
    pub empty_mask: bool,
}

pub fn sign_split(u: &ScalarField, ball: &BallSpec) -> SignSplit {
    let mask = ball_mask(u.grid, ball);
    if mask.is_empty() {
        return SignSplit {
            plus_integral: 0.0,
            minus_integral: 0.0,
            abs_integral: 0.0,
            empty_mask: true,
        };
    }
    let w = u.grid.cell_volume();
    let mut plus = 0.0;
    let mut minus = 0.0;
    for &idx in &mask {
        let v = u.values[idx];
        if v > 0.0 {
            plus += v;
        } else {
            minus -= v;
        }
    }
    SignSplit {
        plus_integral: plus * w,
        minus_integral: minus * w,
        abs_integral: (plus + minus) * w,
        empty_mask: false,
    }
}

/// `|Int_B u| / Int_B |u|`, the cancellation ratio over a ball at a nodal
/// point.
pub fn mean_value_ratio(u: &ScalarField, p: &[f64], r: f64) -> Result<f64> {
    let ball = BallSpec::new(p.to_vec(), r)?;
    let split = sign_split(u, &ball);
    if split.empty_mask || split.abs_integral == 0.0 {
        return Err(Error::EmptySampleSet(
            "ball carries no mass for the mean-value ratio".into(),
        ));
    }
    Ok((split.plus_integral - split.minus_integral).abs() / split.abs_integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn field_2d(n: usize, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        let g = TorusGrid::new(2, n).unwrap();
        ScalarField::from_fn(g, "u", move |p| f(p[0], p[1]))
    }

    fn field_1d(n: usize, f: impl Fn(f64) -> f64) -> ScalarField {
        let g = TorusGrid::new(1, n).unwrap();
        ScalarField::from_fn(g, "u", move |p| f(p[0]))
    }

    #[test]
    fn vertical_stripes_measure_six() {
        let u = field_2d(128, |x, _| (2.0 * PI * 3.0 * x).sin());
        let ns = extract_nodal_set(&u);
        assert!((ns.total_measure - 6.0).abs() < 1e-3 * 6.0, "{}", ns.total_measure);
    }

    #[test]
    fn constant_field_has_empty_nodal_set() {
        let u = field_2d(64, |_, _| 1.0);
        let ns = extract_nodal_set(&u);
        assert!(ns.segments.is_empty());
        assert_eq!(ns.total_measure, 0.0);
        assert_eq!(nodal_domain_count(&u), 1);
    }

    #[test]
    fn checkerboard_measure_and_domains() {
        // phase offsets keep the zero lines away from the sample lattice
        let u = field_2d(128, |x, y| {
            (2.0 * PI * x - 0.31).sin() * (2.0 * PI * y - 0.17).sin()
        });
        let ns = extract_nodal_set(&u);
        // two vertical and two horizontal zero lines, total length 4; the
        // four line junctions are saddle cells resolved by diagonal cuts,
        // each shorting the measure by O(cell width)
        assert!((ns.total_measure - 4.0).abs() < 6e-3 * 4.0, "{}", ns.total_measure);
        assert_eq!(nodal_domain_count(&u), 4);
    }

    #[test]
    fn one_dimensional_crossings() {
        let u = field_1d(128, |x| (2.0 * PI * 3.0 * x).sin());
        let ns = extract_nodal_set(&u);
        assert_eq!(ns.crossings.len(), 6);
        assert_eq!(ns.total_measure, 6.0);
        assert_eq!(nodal_domain_count(&u), 6);
    }

    #[test]
    fn negation_and_scaling_invariance() {
        let u = field_2d(64, |x, y| {
            (2.0 * PI * 2.0 * x).sin() + 0.4 * (2.0 * PI * y).cos()
        });
        let a = extract_nodal_set(&u);
        let b = extract_nodal_set(&u.scale(-1.0));
        let c = extract_nodal_set(&u.scale(3.75));
        assert_eq!(a.segments.len(), b.segments.len());
        assert_eq!(a.total_measure, b.total_measure);
        assert!((a.total_measure - c.total_measure).abs() <= 1e-12 * a.total_measure);
        for (s, t) in a.segments.iter().zip(&c.segments) {
            for k in 0..2 {
                assert!((s.0[k] - t.0[k]).abs() < 1e-12);
                assert!((s.1[k] - t.1[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn measure_converges_under_refinement() {
        let f = |x: f64, y: f64| {
            (2.0 * PI * 2.0 * x).sin() * (2.0 * PI * y).sin() + 0.2
        };
        let coarse = extract_nodal_set(&field_2d(128, f)).total_measure;
        let fine = extract_nodal_set(&field_2d(256, f)).total_measure;
        assert!((coarse - fine).abs() < 0.01 * fine, "{coarse} vs {fine}");
    }

    #[test]
    fn scaling_fit_recovers_inverse_h() {
        // sin(2 pi k x) has 2k crossings; k ~ 1/h gives slope 1
        let mut pairs = Vec::new();
        for &k in &[2i64, 4, 8] {
            let h = 0.16 / k as f64;
            let u = field_1d(256, move |x| (2.0 * PI * k as f64 * x).sin());
            pairs.push(crate::eigensolver::EigenPair {
                h,
                energy: (2.0 * PI * h * k as f64).powi(2),
                field: u,
                residual: 0.0,
                degenerate: false,
            });
        }
        let report = nodal_measure_scaling(&pairs).unwrap();
        assert!(!report.degenerate);
        assert!((report.slope - 1.0).abs() < 0.02, "slope {}", report.slope);
    }

    #[test]
    fn scaling_rejects_constant_fields() {
        let pairs: Vec<_> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| crate::eigensolver::EigenPair {
                h,
                energy: 0.0,
                field: field_1d(64, |_| 1.0),
                residual: 0.0,
                degenerate: false,
            })
            .collect();
        let report = nodal_measure_scaling(&pairs).unwrap();
        assert!(report.degenerate);
    }

    #[test]
    fn edt_matches_brute_force() {
        let g = TorusGrid::new(2, 32).unwrap();
        let mut state = 99u64;
        let mask: Vec<bool> = (0..g.len())
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 60) == 0
            })
            .collect();
        if !mask.iter().any(|&b| b) {
            return;
        }
        let d = edt_sq_periodic(&mask, g);
        let n = 32i64;
        for idx in 0..g.len() {
            let ix = (idx % 32) as i64;
            let iy = (idx / 32) as i64;
            let mut best = f64::INFINITY;
            for (j, &m) in mask.iter().enumerate() {
                if !m {
                    continue;
                }
                let jx = (j % 32) as i64;
                let jy = (j / 32) as i64;
                let dx = (ix - jx).rem_euclid(n).min((jx - ix).rem_euclid(n));
                let dy = (iy - jy).rem_euclid(n).min((jy - iy).rem_euclid(n));
                best = best.min((dx * dx + dy * dy) as f64);
            }
            assert_eq!(d[idx], best, "at {idx}");
        }
    }

    #[test]
    fn frequent_zeros_pass_ball_scan() {
        let u = field_1d(256, |x| (2.0 * PI * 5.0 * x).sin());
        let v = field_1d(256, |_| 0.0);
        let report = zero_in_ball_scan(&u, 0.04, 3.0, &v, 1.0, 0.1).unwrap();
        assert!(!report.allowed_region_empty);
        assert!(report.violations.is_empty(), "{} violations", report.violations.len());
    }

    #[test]
    fn sign_definite_field_violates_everywhere() {
        let u = field_1d(256, |_| 1.0);
        let v = field_1d(256, |_| 0.0);
        let report = zero_in_ball_scan(&u, 0.04, 3.0, &v, 1.0, 0.1).unwrap();
        assert_eq!(report.violations.len(), report.checked);
        assert_eq!(report.checked, 256);
    }

    #[test]
    fn forbidden_region_restricts_centers() {
        // V = 1 on the right half: admissible centers keep their ball in
        // the left half
        let g = TorusGrid::new(1, 256).unwrap();
        let v = ScalarField::from_fn(g, "V", |p| if p[0] >= 0.5 { 1.0 } else { 0.0 });
        let u = field_1d(256, |x| (2.0 * PI * 8.0 * x).sin());
        let report = zero_in_ball_scan(&u, 0.02, 3.0, &v, 0.5, 0.1).unwrap();
        assert!(report.checked > 0);
        assert!(report.checked < 256);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn odd_field_splits_evenly() {
        let u = field_1d(256, |x| (2.0 * PI * x).sin());
        let ball = BallSpec::new(vec![0.0], 0.2).unwrap();
        let s = sign_split(&u, &ball);
        assert!(!s.empty_mask);
        assert!((s.plus_integral - s.minus_integral).abs() <= 1e-12 * s.abs_integral);
        assert!(
            (s.plus_integral + s.minus_integral - s.abs_integral).abs()
                <= 1e-12 * s.abs_integral
        );
    }

    #[test]
    fn sign_definite_split_and_direct_oracle() {
        let u = field_2d(64, |_, _| 1.0);
        let ball = BallSpec::new(vec![0.3, 0.6], 0.15).unwrap();
        let s = sign_split(&u, &ball);
        assert_eq!(s.minus_integral, 0.0);
        let mask = ball_mask(u.grid, &ball);
        let volume = mask.len() as f64 * u.grid.cell_volume();
        assert_eq!(s.plus_integral, volume);

        // random field: split must equal the direct accumulation exactly
        let state = std::cell::Cell::new(5u64);
        let g = TorusGrid::new(2, 64).unwrap();
        let r = ScalarField::from_fn(g, "r", move |_| {
            let next = state
                .get()
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            state.set(next);
            (next >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        let s = sign_split(&r, &ball);
        let w = g.cell_volume();
        let mut plus = 0.0;
        let mut minus = 0.0;
        let mut plain = 0.0;
        for &idx in &ball_mask(g, &ball) {
            let v = r.values[idx];
            plus += v.max(0.0) * w;
            minus += (-v).max(0.0) * w;
            plain += v * w;
        }
        assert_eq!(s.plus_integral, plus);
        assert_eq!(s.minus_integral, minus);
        assert!((s.plus_integral - s.minus_integral - plain).abs() <= 1e-12 * s.abs_integral);
    }

    #[test]
    fn mean_value_ratio_poles() {
        let odd = field_1d(256, |x| (2.0 * PI * x).sin());
        let r = mean_value_ratio(&odd, &[0.0], 0.2).unwrap();
        assert!(r <= 1e-12, "ratio {r}");
        let one = field_1d(256, |_| 1.0);
        let r = mean_value_ratio(&one, &[0.0], 0.2).unwrap();
        assert_eq!(r, 1.0);
        let zero = field_1d(256, |_| 0.0);
        assert!(mean_value_ratio(&zero, &[0.0], 0.2).is_err());
    }

    #[test]
    fn isoperimetric_inequality_in_sample_balls() {
        let u = field_2d(256, |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).sin());
        let ns = extract_nodal_set(&u);
        for center in [[0.0, 0.0], [0.5, 0.0], [0.25, 0.5]] {
            let r = 0.2;
            let ball = BallSpec::new(center.to_vec(), r).unwrap();
            let mask = ball_mask(u.grid, &ball);
            let w = u.grid.cell_volume();
            let plus = mask.iter().filter(|&&i| u.values[i] > 0.0).count() as f64 * w;
            let minus = mask.iter().filter(|&&i| u.values[i] < 0.0).count() as f64 * w;
            let small = plus.min(minus);
            if small < 0.05 * (plus + minus) {
                continue;
            }
            let length = nodal_length_in_ball(&ns, &center, r);
            assert!(length >= small.sqrt(), "ball {center:?}: {length} < sqrt({small})");
        }
    }
}
