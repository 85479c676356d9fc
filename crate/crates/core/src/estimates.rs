//! Semiclassical derivative bounds and analytic continuation growth.
//!
//! Two measurements on a band-limited field `u`: the Cauchy-type constant
//! `C_est = max_alpha M(alpha)^{1/|alpha|} / (1 + h|alpha|)` with
//! `M(alpha) = ||(hD)^alpha u||_inf / ||u||_inf`, and the strip growth
//! `M(t) = sup_x |u(x + i t e_a)| ~ ||u||_inf e^{C t / h}` of the
//! holomorphic extension. Both are exact operations on the discrete
//! band-limited object (Fourier multipliers), so no differencing error
//! enters.
//!
//! Derivatives are measured in the `(hD)^alpha` normalization, `D = -i d`;
//! the classical `d^alpha` form differs by the explicit factor
//! `h^{|alpha|}`.

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::grid::ScalarField;
use crate::spectral::SpectralField;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Derivative multi-index, one order per axis (unused axes zero).
pub type MultiIndex = [u32; 2];

pub fn multi_index_order(alpha: MultiIndex) -> u32 {
    alpha[0] + alpha[1]
}

/// `(hD)^alpha u` as a Fourier multiplier: `c_k -> i^{|alpha|}
/// prod_j (2 pi h k_j)^{alpha_j} c_k`.
///
/// The `i^{|alpha|}` phase makes the result real for real input (for real
/// `u`, `(hD)^alpha u` is `(-i)^{|alpha|}` times a real field); it leaves
/// the modulus, hence every sup norm, unchanged, and composes consistently:
/// applying `alpha` then `beta` equals applying `alpha + beta`.
pub fn hd_derivative(u: &ScalarField, alpha: MultiIndex, h: f64) -> Result<ScalarField> {
    let dim = u.grid.dim();
    if dim == 1 && alpha[1] != 0 {
        return Err(Error::InvalidArgument("second-axis order on a 1-D field".into()));
    }
    let k_nyq = (u.grid.n_per_axis() / 2) as f64;
    let order = multi_index_order(alpha);
    let worst = (2.0 * PI * h * k_nyq).powi(order as i32);
    if !worst.is_finite() {
        return Err(Error::Overflow(format!(
            "(2 pi h k_Nyquist)^{order} overflows; reduce |alpha|"
        )));
    }
    let phase = match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut sp = SpectralField::forward(u);
    // high orders amplify rounding noise at high k by (2 pi h k)^|alpha|;
    // drop coefficients below the noise floor before applying the multiplier
    let maxc = sp.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    for c in &mut sp.coeffs {
        if c.norm() <= 1e-13 * maxc {
            *c = Complex64::default();
        }
    }
    for idx in 0..sp.coeffs.len() {
        let k = sp.freq_at(idx);
        let mut m = 1.0f64;
        for a in 0..dim {
            m *= (2.0 * PI * h * k[a] as f64).powi(alpha[a] as i32);
        }
        sp.coeffs[idx] *= phase * m;
    }
    Ok(sp.inverse_real(format!("(hD)^{:?} {}", &alpha[..dim], u.label)))
}

/// Per-order sup-norm table and the fitted Cauchy constant.
#[derive(Debug, Clone)]
pub struct CauchyReport {
    pub h: f64,
    /// `(alpha, M(alpha))` for all `1 <= |alpha| <= alpha_max`.
    pub table: Vec<(MultiIndex, f64)>,
    /// `max_alpha M(alpha)^{1/|alpha|} / (1 + h |alpha|)`.
    pub c_est: f64,
    pub zero_field: bool,
}

fn enumerate_orders(dim: usize, alpha_max: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if dim == 1 {
        for a in 1..=alpha_max {
            out.push([a, 0]);
        }
    } else {
        for total in 1..=alpha_max {
            for a0 in 0..=total {
                out.push([a0, total - a0]);
            }
        }
    }
    out
}

pub fn cauchy_fit(u: &ScalarField, h: f64, alpha_max: u32) -> Result<CauchyReport> {
    let sup_u = u.sup_norm();
    if sup_u == 0.0 {
        return Ok(CauchyReport { h, table: Vec::new(), c_est: 0.0, zero_field: true });
    }
    let orders = enumerate_orders(u.grid.dim(), alpha_max);
    let table: Result<Vec<(MultiIndex, f64)>> = orders
        .par_iter()
        .map(|&alpha| {
            let d = hd_derivative(u, alpha, h)?;
            Ok((alpha, d.sup_norm() / sup_u))
        })
        .collect();
    let table = table?;
    let c_est = table
        .iter()
        .map(|&(alpha, m)| {
            let p = multi_index_order(alpha) as f64;
            m.powf(1.0 / p) / (1.0 + h * p)
        })
        .fold(0.0f64, f64::max);
    Ok(CauchyReport { h, table, c_est, zero_field: false })
}

/// Strip suprema of the analytic continuation and the fitted growth rate.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub h: f64,
    /// `(t, M(t))` for accepted strip half-widths, including `t = 0`.
    pub table: Vec<(f64, f64)>,
    /// Fitted `C` in `M(t) ~ ||u||_inf e^{C t / h}`.
    pub c_growth: f64,
    pub r_squared: f64,
    /// Strip widths rejected by the noise-amplification bound.
    pub dropped: Vec<f64>,
}

/// Largest frequency carrying non-noise coefficient mass.
fn effective_frequency(sp: &SpectralField) -> i64 {
    let maxc = sp.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    sp.effective_band(1e-13 * maxc)
}

/// Sup of `|u(x + i t e_axis)|` via the multiplier `e^{-2 pi k t}` on the
/// chosen axis.
fn strip_sup(sp: &SpectralField, axis: usize, t: f64) -> f64 {
    let mut shifted = sp.clone();
    for idx in 0..shifted.coeffs.len() {
        let k = shifted.freq_at(idx);
        shifted.coeffs[idx] *= (-2.0 * PI * k[axis] as f64 * t).exp();
    }
    shifted
        .inverse_complex()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

pub fn continuation_growth(u: &ScalarField, h: f64, t_list: &[f64]) -> Result<GrowthReport> {
    let sup_u = u.sup_norm();
    if sup_u == 0.0 {
        return Err(Error::EmptySampleSet("zero field in continuation".into()));
    }
    let mut sp = SpectralField::forward(u);
    // the multiplier e^{2 pi k t} amplifies rounding noise at high k;
    // coefficients below the noise floor carry no signal and are removed
    let maxc = sp.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    for c in &mut sp.coeffs {
        if c.norm() <= 1e-13 * maxc {
            *c = Complex64::default();
        }
    }
    let k_eff = effective_frequency(&sp).max(1) as f64;
    let t_cap = 0.5 * (1.0 / f64::EPSILON).ln() / (2.0 * PI * k_eff);
    let mut accepted: Vec<f64> = Vec::new();
    let mut dropped = Vec::new();
    for &t in t_list {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument("strip widths must be >= 0".into()));
        }
        if t <= t_cap {
            accepted.push(t);
        } else {
            dropped.push(t);
        }
    }
    if accepted.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: accepted.len() });
    }
    let dim = u.grid.dim();
    let mut table: Vec<(f64, f64)> = accepted
        .par_iter()
        .map(|&t| {
            let m = (0..dim)
                .map(|axis| strip_sup(&sp, axis, t))
                .fold(0.0f64, f64::max)
                .max((0..dim).map(|axis| strip_sup(&sp, axis, -t)).fold(0.0, f64::max));
            (t, m)
        })
        .collect();
    if !table.iter().any(|&(t, _)| t == 0.0) {
        table.push((0.0, sup_u));
    }
    table.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let ts: Vec<f64> = table.iter().map(|p| p.0).collect();
    let ln_m: Vec<f64> = table.iter().map(|p| p.1.ln()).collect();
    let (_, slope, r2) = linear_fit(&ts, &ln_m);
    Ok(GrowthReport { h, table, c_growth: slope * h, r_squared: r2, dropped })
}

/// Strip half-widths that stay inside the noise-amplification cap of
/// `continuation_growth`: `count` evenly spaced values up to 90% of the
/// largest admissible width for this field.
pub fn admissible_strips(u: &ScalarField, count: usize) -> Result<Vec<f64>> {
    if u.sup_norm() == 0.0 {
        return Err(Error::EmptySampleSet("zero field in continuation".into()));
    }
    let sp = SpectralField::forward(u);
    let k_eff = effective_frequency(&sp).max(1) as f64;
    let t_cap = 0.5 * (1.0 / f64::EPSILON).ln() / (2.0 * PI * k_eff);
    Ok((1..=count).map(|j| 0.9 * t_cap * j as f64 / count as f64).collect())
}

/// Side-by-side comparison of the three equivalent analyticity measurements
/// across an h-sweep.
#[derive(Debug, Clone)]
pub struct EquivalenceSummary {
    pub delta: f64,
    pub c_est_by_h: Vec<(f64, f64)>,
    pub c_growth_by_h: Vec<(f64, f64)>,
    pub delta_positive: bool,
    pub c_est_bounded: bool,
    pub c_growth_bounded: bool,
    pub pass: bool,
}

/// Check the measured implications: decay rate positive, Cauchy constant
/// bounded across the sweep, growth constant bounded across the sweep.
/// `ratio_cap` bounds max/min across h for "bounded".
pub fn equivalence_crosscheck(
    decay: &crate::fbi::DecayReport,
    cauchy: &[CauchyReport],
    growth: &[GrowthReport],
    ratio_cap: f64,
) -> EquivalenceSummary {
    let bounded = |vals: &[f64]| -> bool {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(0.0f64, f64::max);
        lo > 0.0 && hi.is_finite() && hi / lo <= ratio_cap
    };
    let c_est: Vec<f64> = cauchy.iter().map(|r| r.c_est).collect();
    let c_gr: Vec<f64> = growth.iter().map(|r| r.c_growth).collect();
    let delta_positive = decay.delta > 0.0;
    let c_est_bounded = !c_est.is_empty() && bounded(&c_est);
    let c_growth_bounded = !c_gr.is_empty() && bounded(&c_gr);
    EquivalenceSummary {
        delta: decay.delta,
        c_est_by_h: cauchy.iter().map(|r| (r.h, r.c_est)).collect(),
        c_growth_by_h: growth.iter().map(|r| (r.h, r.c_growth)).collect(),
        delta_positive,
        c_est_bounded,
        c_growth_bounded,
        pass: delta_positive && c_est_bounded && c_growth_bounded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    fn single_sine(n: usize, k: f64) -> ScalarField {
        let g = TorusGrid::new(1, n).unwrap();
        ScalarField::from_fn(g, "sin", move |p| (2.0 * PI * k * p[0]).sin())
    }

    #[test]
    fn zero_order_is_identity() {
        let g = TorusGrid::new(2, 32).unwrap();
        let u = ScalarField::from_fn(g, "u", |p| {
            (2.0 * PI * p[0]).sin() + (2.0 * PI * 2.0 * p[1]).cos()
        });
        let d = hd_derivative(&u, [0, 0], 0.1).unwrap();
        for (a, b) in u.values.iter().zip(&d.values) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn single_mode_first_derivative_sup() {
        let u = single_sine(64, 1.0);
        let h = 0.37;
        let d = hd_derivative(&u, [1, 0], h).unwrap();
        assert!((d.sup_norm() - 2.0 * PI * h).abs() < 1e-12);
    }

    #[test]
    fn composition_matches_repeated_application() {
        let g = TorusGrid::new(1, 64).unwrap();
        // fixed pseudo-random band-limited field
        let mut sp = SpectralField::zeros(g);
        let mut state = 0x2545F4914F6CDD1Du64;
        for k in 1..=6i64 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let re = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let im = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            sp.set_coeff([k, 0], Complex64::new(re, im));
            sp.set_coeff([-k, 0], Complex64::new(re, -im));
        }
        let u = sp.inverse_real("u");
        let h = 0.1;
        let direct = hd_derivative(&u, [3, 0], h).unwrap();
        let mut step = u.clone();
        for _ in 0..3 {
            step = hd_derivative(&step, [1, 0], h).unwrap();
        }
        for (a, b) in direct.values.iter().zip(&step.values) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn overflow_cap_reported() {
        let u = single_sine(1024, 1.0);
        let err = hd_derivative(&u, [2000, 0], 10.0).unwrap_err();
        assert!(matches!(err, Error::Overflow(_)));
    }

    #[test]
    fn cauchy_single_mode_closed_form() {
        // M((m)) = (2 pi h)^m, maximized ratio at m = 1:
        // C_est = 2 pi 0.1 / 1.1
        let u = single_sine(128, 1.0);
        let report = cauchy_fit(&u, 0.1, 10).unwrap();
        let expect = 2.0 * PI * 0.1 / 1.1;
        assert!((report.c_est - expect).abs() < 1e-10, "{}", report.c_est);
        assert!(!report.zero_field);
        assert_eq!(report.table.len(), 10);
        for &(alpha, m) in &report.table {
            let p = multi_index_order(alpha);
            let want = (2.0 * PI * 0.1f64).powi(p as i32);
            assert!((m - want).abs() < 1e-9 * want + 1e-12, "order {p}: {m} vs {want}");
        }
    }

    #[test]
    fn cauchy_scale_invariant_and_zero_flagged() {
        let u = single_sine(64, 2.0);
        let a = cauchy_fit(&u, 0.1, 6).unwrap();
        let b = cauchy_fit(&u.scale(-17.5), 0.1, 6).unwrap();
        assert!((a.c_est - b.c_est).abs() < 1e-13 * a.c_est);
        let z = ScalarField::zeros(TorusGrid::new(1, 32).unwrap(), "0");
        assert!(cauchy_fit(&z, 0.1, 4).unwrap().zero_field);
    }

    #[test]
    fn growth_single_mode_cosh() {
        // sup_x |sin(2 pi (x + i t))| = cosh(2 pi t)
        let u = single_sine(128, 1.0);
        let report = continuation_growth(&u, 0.5, &[0.0, 0.05, 0.1]).unwrap();
        assert!(report.dropped.is_empty());
        for &(t, m) in &report.table {
            let expect = (2.0 * PI * t).cosh();
            assert!((m - expect).abs() < 1e-10, "t {t}: {m} vs {expect}");
        }
        let m01 = report.table.iter().find(|p| p.0 == 0.1).unwrap().1;
        assert!((m01 - 1.2040).abs() < 1e-3);
    }

    #[test]
    fn growth_symmetric_in_t_for_real_fields() {
        let g = TorusGrid::new(1, 64).unwrap();
        let u = ScalarField::from_fn(g, "u", |p| {
            (2.0 * PI * p[0]).sin() + 0.5 * (2.0 * PI * 3.0 * p[0]).cos()
        });
        let sp = SpectralField::forward(&u);
        for &t in &[0.02, 0.05] {
            let plus = strip_sup(&sp, 0, t);
            let minus = strip_sup(&sp, 0, -t);
            assert!((plus - minus).abs() < 1e-12 * plus);
        }
    }

    #[test]
    fn growth_monotone_log_convex_and_above_sup() {
        let u = single_sine(128, 2.0);
        let ts = [0.0, 0.02, 0.04, 0.06, 0.08];
        let report = continuation_growth(&u, 0.5, &ts).unwrap();
        let sup_u = u.sup_norm();
        let ms: Vec<f64> = report.table.iter().map(|p| p.1).collect();
        for w in ms.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        for &m in &ms {
            assert!(m >= sup_u - 1e-12);
        }
        // midpoint log-convexity on the uniform t grid
        for w in ms.windows(3) {
            assert!(w[1].ln() <= 0.5 * (w[0].ln() + w[2].ln()) + 1e-8);
        }
    }

    #[test]
    fn growth_drops_noise_amplifying_strips() {
        let u = single_sine(256, 100.0);
        // k_eff = 100: cap = 0.5 ln(1/eps) / (200 pi)
        let h = 0.1;
        let cap = 0.5 * (1.0 / f64::EPSILON).ln() / (2.0 * PI * 100.0);
        let report = continuation_growth(&u, h, &[0.0, cap * 0.5, cap * 10.0]).unwrap();
        assert_eq!(report.dropped, vec![cap * 10.0]);
    }

    #[test]
    fn resolution_independent_cauchy_constant() {
        let coarse = single_sine(64, 3.0);
        let fine = single_sine(256, 3.0);
        let a = cauchy_fit(&coarse, 0.05, 8).unwrap();
        let b = cauchy_fit(&fine, 0.05, 8).unwrap();
        assert!((a.c_est - b.c_est).abs() < 1e-2 * a.c_est.abs());
    }

    #[test]
    fn crosscheck_flags_nyquist_scale_field() {
        // a fixed high-frequency field is not h-band-limited: its Cauchy
        // constant 2 pi h k / (1 + h) varies by ~4x across the sweep
        let mut cauchys = Vec::new();
        for &h in &[0.1, 0.05, 0.025] {
            let u = single_sine(256, 32.0);
            cauchys.push(cauchy_fit(&u, h, 6).unwrap());
        }
        let growths: Vec<GrowthReport> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| {
                let u = single_sine(64, 1.0);
                continuation_growth(&u, h, &[0.0, 0.02 * h, 0.04 * h]).unwrap()
            })
            .collect();
        let decay = crate::fbi::DecayReport {
            xi_threshold: 2.0,
            delta: 0.5,
            r_squared: 1.0,
            table: vec![],
            dropped: vec![],
        };
        let summary = equivalence_crosscheck(&decay, &cauchys, &growths, 2.0);
        assert!(!summary.c_est_bounded);
        assert!(!summary.pass);
        assert!(summary.delta_positive);
    }
}
