//! Tunneling constants, doubling exponents, and vanishing orders of
//! eigenfunctions, measured through ball-restricted L2 norms.

use rayon::prelude::*;

use crate::ball::{ball_l2, ball_mask, BallSpec};
use crate::grid::periodic_delta;
use crate::eigensolver::EigenPair;
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::grid::ScalarField;

/// One doubling measurement at a center `p` and radius `r`.
#[derive(Debug, Clone)]
pub struct DoublingSample {
    pub center: Vec<f64>,
    pub radius: f64,
    /// `h * ln(||u||_{B(p,2r)} / ||u||_{B(p,r)})`.
    pub exponent: f64,
}

/// Doubling exponents over a set of centers and radii.
#[derive(Debug, Clone)]
pub struct DoublingReport {
    pub h: f64,
    pub samples: Vec<DoublingSample>,
    pub max_exponent: f64,
    /// Centers whose inner-ball norm underflowed to zero and were skipped.
    pub dropped: usize,
}

/// Measure `h * ln` of the two-ball norm ratio at every (center, radius)
/// pair. Radii must satisfy `r >= 3h` and `2r < 1/4`.
pub fn doubling_survey(
    u: &EigenPair,
    centers: &[Vec<f64>],
    radii: &[f64],
) -> Result<DoublingReport> {
    if centers.is_empty() || radii.is_empty() {
        return Err(Error::InvalidArgument(
            "doubling survey needs at least one center and one radius".into(),
        ));
    }
    for &r in radii {
        if r < 3.0 * u.h {
            return Err(Error::InvalidArgument(format!(
                "doubling radius {r} below the resolved regime 3h = {}",
                3.0 * u.h
            )));
        }
        if 2.0 * r >= 0.25 {
            return Err(Error::InvalidArgument(format!(
                "doubled radius {} exceeds the embedded-ball bound 1/4",
                2.0 * r
            )));
        }
    }
    let mut pairs = Vec::with_capacity(centers.len() * radii.len());
    for c in centers {
        for &r in radii {
            pairs.push((c.clone(), r));
        }
    }
    let results: Vec<Option<DoublingSample>> = pairs
        .par_iter()
        .map(|(c, r)| {
            let inner = ball_l2(&u.field, &BallSpec::new(c.clone(), *r).ok()?);
            let outer = ball_l2(&u.field, &BallSpec::new(c.clone(), 2.0 * *r).ok()?);
            if inner <= 0.0 {
                return None;
            }
            Some(DoublingSample {
                center: c.clone(),
                radius: *r,
                exponent: u.h * (outer / inner).ln(),
            })
        })
        .collect();
    let dropped = results.iter().filter(|s| s.is_none()).count();
    let samples: Vec<DoublingSample> = results.into_iter().flatten().collect();
    if samples.is_empty() {
        return Err(Error::EmptySampleSet(
            "every doubling center had zero inner-ball norm".into(),
        ));
    }
    let max_exponent = samples.iter().map(|s| s.exponent).fold(f64::MIN, f64::max);
    Ok(DoublingReport { h: u.h, samples, max_exponent, dropped })
}

/// Worst-case small-ball mass over a center lattice.
#[derive(Debug, Clone)]
pub struct TunnelingReport {
    pub h: f64,
    pub r: f64,
    /// Center attaining the minimal ball norm.
    pub worst_center: Vec<f64>,
    /// `min_p ||u||_{B(p,r)} / ||u||`.
    pub min_ratio: f64,
    /// `-h * ln(min_ratio)`, nonnegative.
    pub c_meas: f64,
}

/// Scan a lattice of ball centers with the given index stride and record
/// the smallest relative ball mass. The stride must keep neighboring
/// centers within `r/2` of each other, and in 2-D yield at least 100
/// centers.
pub fn tunneling_survey(u: &EigenPair, r: f64, center_stride: usize) -> Result<TunnelingReport> {
    let grid = u.field.grid;
    if !(r > 0.0 && r < 0.25) {
        return Err(Error::InvalidArgument(format!(
            "tunneling radius must lie in (0, 1/4), got {r}"
        )));
    }
    if center_stride == 0 {
        return Err(Error::InvalidArgument("center stride must be positive".into()));
    }
    let d = grid.spacing();
    if center_stride as f64 * d > 0.5 * r {
        return Err(Error::InvalidArgument(format!(
            "center stride {center_stride} spaces centers {} apart, beyond r/2 = {}",
            center_stride as f64 * d,
            0.5 * r
        )));
    }
    let per_axis = grid.n_per_axis().div_ceil(center_stride);
    let n_centers = per_axis.pow(grid.dim() as u32);
    if grid.dim() == 2 && n_centers < 100 {
        return Err(Error::TooFewPoints { needed: 100, got: n_centers });
    }
    let total = u.field.l2_norm();
    if total <= 0.0 {
        return Err(Error::EmptySampleSet("zero eigenfunction in tunneling survey".into()));
    }
    let centers: Vec<Vec<f64>> = match grid.dim() {
        1 => (0..per_axis).map(|i| vec![(i * center_stride) as f64 * d]).collect(),
        _ => (0..per_axis * per_axis)
            .map(|f| {
                let ix = f % per_axis;
                let iy = f / per_axis;
                vec![(ix * center_stride) as f64 * d, (iy * center_stride) as f64 * d]
            })
            .collect(),
    };
    let (worst_center, min_norm) = centers
        .par_iter()
        .map(|c| {
            let b = BallSpec::new(c.clone(), r).expect("validated radius");
            (c, ball_l2(&u.field, &b))
        })
        .reduce(
            || (&centers[0], f64::INFINITY),
            |a, b| if b.1 < a.1 { b } else { a },
        );
    let min_ratio = min_norm / total;
    Ok(TunnelingReport {
        h: u.h,
        r,
        worst_center: worst_center.clone(),
        min_ratio,
        c_meas: (-u.h * min_ratio.ln()).max(0.0),
    })
}

/// Power-law fit of ball mass against radius around one point.
#[derive(Debug, Clone)]
pub struct VanishingOrderReport {
    pub point: Vec<f64>,
    pub h: f64,
    /// Dyadic radii scanned, smallest first.
    pub radii: Vec<f64>,
    /// Ball L2 norms at those radii.
    pub norms: Vec<f64>,
    /// Fit window into `radii` (start index, length).
    pub fit_start: usize,
    pub fit_len: usize,
    /// Slope of `ln norm` vs `ln r` over the fit window.
    pub slope: Option<f64>,
    /// Vanishing order estimate `slope - dim/2`.
    pub k_est: Option<f64>,
    /// Set when no power-law window was found (estimate omitted).
    pub flagged: bool,
}

/// Ball L2 norm with the boundary antialiased by a one-cell linear
/// weight; the sharp-cutoff mask norm has O(spacing/r) quadrature error,
/// too coarse for power-law fits at small radii.
fn soft_ball_l2(field: &ScalarField, center: &[f64], r: f64) -> f64 {
    let grid = field.grid;
    let n = grid.n_per_axis() as i64;
    let d = grid.spacing();
    let reach = (r / d).ceil() as i64 + 2;
    let mut s = 0.0;
    match grid.dim() {
        1 => {
            let c = (center[0] / d).round() as i64;
            for di in -reach..=reach {
                let ix = (c + di).rem_euclid(n) as usize;
                let dx = periodic_delta(ix as f64 * d, center[0]);
                let wt = ((r - dx.abs()) / d + 0.5).clamp(0.0, 1.0);
                let v = field.values[ix];
                s += wt * v * v;
            }
        }
        _ => {
            let cx = (center[0] / d).round() as i64;
            let cy = (center[1] / d).round() as i64;
            for dj in -reach..=reach {
                let iy = (cy + dj).rem_euclid(n) as usize;
                let dy = periodic_delta(iy as f64 * d, center[1]);
                for di in -reach..=reach {
                    let ix = (cx + di).rem_euclid(n) as usize;
                    let dx = periodic_delta(ix as f64 * d, center[0]);
                    let dist = (dx * dx + dy * dy).sqrt();
                    let wt = ((r - dist) / d + 0.5).clamp(0.0, 1.0);
                    if wt > 0.0 {
                        let v = field.values[grid.index(ix, iy)];
                        s += wt * v * v;
                    }
                }
            }
        }
    }
    (s * grid.cell_volume()).sqrt()
}

/// Largest window of length >= 4 whose interior log-log second
/// differences stay below the power-law breakdown threshold.
fn power_law_window(lny: &[f64], step: f64) -> Option<(usize, usize)> {
    let n = lny.len();
    let ok = |j: usize| {
        let c = (lny[j + 1] - 2.0 * lny[j] + lny[j - 1]) / (step * step);
        c.is_finite() && c.abs() <= 0.1
    };
    let mut best: Option<(usize, usize)> = None;
    let mut start = 0;
    while start + 4 <= n {
        if !lny[start].is_finite() {
            start += 1;
            continue;
        }
        let mut end = start + 1;
        while end < n && lny[end].is_finite() && (end == start + 1 || ok(end - 1)) {
            end += 1;
        }
        let len = end - start;
        if len >= 4 && best.map_or(true, |(_, bl)| len > bl) {
            best = Some((start, len));
        }
        start = if end > start + 1 { end - 1 } else { end };
    }
    best
}

/// Fit the growth exponent of `||u||_{B(p,r)}` over a geometric radius
/// ladder (ratio sqrt(2), so each octave is sampled twice) from four
/// grid cells up to 0.1.
pub fn vanishing_order(u: &ScalarField, p: &[f64], h: f64) -> Result<VanishingOrderReport> {
    let grid = u.grid;
    if p.len() != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "point dimension {} does not match grid dimension {}",
            p.len(),
            grid.dim()
        )));
    }
    let d = grid.spacing();
    let step = 2f64.sqrt();
    let mut radii = Vec::new();
    let mut r = 4.0 * d;
    while r <= 0.1 {
        radii.push(r);
        r *= step;
    }
    if radii.len() < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: radii.len() });
    }
    let norms: Vec<f64> = radii.par_iter().map(|&r| soft_ball_l2(u, p, r)).collect();
    let lny: Vec<f64> = norms.iter().map(|&v| v.ln()).collect();
    let mut report = VanishingOrderReport {
        point: p.to_vec(),
        h,
        radii: radii.clone(),
        norms: norms.clone(),
        fit_start: 0,
        fit_len: 0,
        slope: None,
        k_est: None,
        flagged: true,
    };
    let Some((start, len)) = power_law_window(&lny, 0.5 * std::f64::consts::LN_2) else {
        return Ok(report);
    };
    // ball mass must grow strictly with the radius inside the window
    if norms[start..start + len].windows(2).any(|w| w[1] <= w[0]) {
        return Ok(report);
    }
    let lnr: Vec<f64> = radii[start..start + len].iter().map(|r| r.ln()).collect();
    let (_, slope, _) = linear_fit(&lnr, &lny[start..start + len]);
    report.fit_start = start;
    report.fit_len = len;
    report.slope = Some(slope);
    report.k_est = Some(slope - grid.dim() as f64 / 2.0);
    report.flagged = false;
    Ok(report)
}

/// Upper bound on the doubling exponent of a field with `|u|` bounded
/// below on the outer ball: `h * ln(2^{dim/2} * (sup/inf) * vol_ratio^{1/2})`
/// with all three factors read off the grid.
pub fn doubling_exponent_bound(u: &EigenPair, center: &[f64], r: f64) -> Result<f64> {
    let outer = BallSpec::new(center.to_vec(), 2.0 * r)?;
    let mask_outer = ball_mask(u.field.grid, &outer);
    let mask_inner = ball_mask(u.field.grid, &BallSpec::new(center.to_vec(), r)?);
    if mask_inner.is_empty() {
        return Err(Error::EmptySampleSet("inner ball contains no grid points".into()));
    }
    let mut sup = 0.0f64;
    let mut inf = f64::INFINITY;
    for &i in &mask_outer {
        let a = u.field.values[i].abs();
        sup = sup.max(a);
        inf = inf.min(a);
    }
    if inf <= 0.0 {
        return Err(Error::InvalidArgument(
            "doubling bound requires |u| bounded below on the outer ball".into(),
        ));
    }
    let vol_ratio = mask_outer.len() as f64 / mask_inner.len() as f64;
    let dim = u.field.grid.dim() as f64;
    Ok(u.h * (2f64.powf(dim / 2.0) * (sup / inf) * vol_ratio.sqrt()).ln())
}
