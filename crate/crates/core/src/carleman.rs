//! Carleman weight `phi = tau e^{mu psi}`, the conjugated symbol of
//! `-h^2 Lap + V - E` under `e^{phi/h} P e^{-phi/h}`, and the positivity of
//! the bracket `(i/2){p_phi, conj(p_phi)}` on the characteristic set.
//!
//! The metric is flat throughout, so every `dg` term of the general bracket
//! expansion vanishes identically and `g` is the identity; the curved-metric
//! terms are omitted here (they would add derivative-of-metric contractions
//! to each displayed term).
//!
//! Closed forms used on the shell `r_inner <= |x| <= r_outer`, where
//! `psi = A - |x|`:
//! `dpsi = -x/|x|`, `d2psi = -(I - xhat xhat^T)/|x|`,
//! `dphi = tau mu e^{mu psi} dpsi`,
//! `d2phi = tau e^{mu psi} (mu^2 dpsi dpsi^T + mu d2psi)`.

use crate::error::{Error, Result};
use crate::potential::SampledPotential;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Radial Carleman weight profile.
///
/// `psi(|x|) = A - |x|` on the shell; inside `B(0, r_inner)` it is capped
/// by the quintic `a0 - |x|^4/r^3 + 3|x|^5/(5 r^4)` which matches value,
/// slope, and curvature at `r_inner` and is flat at the origin.
#[derive(Debug, Clone, Copy)]
pub struct CarlemanWeight {
    pub tau: f64,
    pub mu: f64,
    pub big_a: f64,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl CarlemanWeight {
    pub fn new(tau: f64, mu: f64, big_a: f64, r_inner: f64, r_outer: f64) -> Result<Self> {
        if tau < 1.0 || mu < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "tau and mu must be >= 1, got tau={tau}, mu={mu}"
            )));
        }
        if !(0.0 < r_inner && r_inner < r_outer) {
            return Err(Error::InvalidArgument(format!(
                "shell radii must satisfy 0 < r_inner < r_outer, got {r_inner}, {r_outer}"
            )));
        }
        if big_a < 1.0 + r_outer {
            return Err(Error::InvalidArgument(format!(
                "A = {big_a} too small: psi >= 1 on the shell needs A >= 1 + r_outer"
            )));
        }
        Ok(Self { tau, mu, big_a, r_inner, r_outer })
    }

    /// Radial profile `psi(rho)` on `[0, r_outer]`, including the cap.
    pub fn psi_profile(&self, rho: f64) -> f64 {
        let r = self.r_inner;
        if rho >= r {
            self.big_a - rho
        } else {
            let a0 = self.big_a - 0.6 * r;
            a0 - rho.powi(4) / r.powi(3) + 0.6 * rho.powi(5) / r.powi(4)
        }
    }

    fn check_shell(&self, rho: f64) -> Result<()> {
        if rho == 0.0 {
            return Err(Error::InvalidArgument(
                "weight derivatives are undefined at the origin".into(),
            ));
        }
        if rho < self.r_inner - 1e-12 || rho > self.r_outer + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "|x| = {rho} outside the shell [{}, {}]",
                self.r_inner, self.r_outer
            )));
        }
        Ok(())
    }
}

/// `phi`, its gradient, and its Hessian at a shell point.
#[derive(Debug, Clone)]
pub struct WeightJet {
    pub phi: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
    pub psi: f64,
}

pub fn weight_eval(w: &CarlemanWeight, x: &[f64]) -> Result<WeightJet> {
    let dim = x.len();
    let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.check_shell(rho)?;
    let psi = w.big_a - rho;
    let e = (w.mu * psi).exp();
    let phi = w.tau * e;
    let xhat: Vec<f64> = x.iter().map(|v| v / rho).collect();
    let grad: Vec<f64> = xhat.iter().map(|&xh| -w.tau * w.mu * e * xh).collect();
    let mut hess = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let dpsi_i = -xhat[i];
            let dpsi_j = -xhat[j];
            let d2psi = -((if i == j { 1.0 } else { 0.0 }) - xhat[i] * xhat[j]) / rho;
            hess[i][j] = w.tau * e * (w.mu * w.mu * dpsi_i * dpsi_j + w.mu * d2psi);
        }
    }
    Ok(WeightJet { phi, grad, hess, psi })
}

/// Real and imaginary parts of the conjugated symbol at `(x, xi)`.
#[derive(Debug, Clone, Copy)]
pub struct ConjugatedSymbolValue {
    /// `|xi|^2 - |dphi|^2 + V - E`.
    pub re: f64,
    /// `2 <xi, dphi>`.
    pub im: f64,
}

pub fn conjugated_symbol(
    w: &CarlemanWeight,
    x: &[f64],
    xi: &[f64],
    v: f64,
    e: f64,
) -> Result<ConjugatedSymbolValue> {
    let jet = weight_eval(w, x)?;
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    let dphi2: f64 = jet.grad.iter().map(|v| v * v).sum();
    let ip: f64 = xi.iter().zip(&jet.grad).map(|(a, b)| a * b).sum();
    Ok(ConjugatedSymbolValue { re: xi2 - dphi2 + v - e, im: 2.0 * ip })
}

/// `(i/2){p_phi, conj(p_phi)}` at `(x, xi)` by the flat-metric expansion:
///
/// `4 tau mu^2 e^{mu psi} <xi, dpsi>^2 + 4 tau mu e^{mu psi} <xi, d2psi xi>
///  + 4 tau^3 mu^4 e^{3 mu psi} |dpsi|^4
///  + 4 tau^3 mu^3 e^{3 mu psi} <dpsi, d2psi dpsi> - 2 tau mu e^{mu psi}
///  <dpsi, grad V>`.
pub fn bracket_eval(
    w: &CarlemanWeight,
    x: &[f64],
    xi: &[f64],
    grad_v: &[f64],
) -> Result<f64> {
    let dim = x.len();
    let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.check_shell(rho)?;
    let psi = w.big_a - rho;
    let e1 = (w.mu * psi).exp();
    let e3 = (3.0 * w.mu * psi).exp();
    let xhat: Vec<f64> = x.iter().map(|v| v / rho).collect();
    let dpsi: Vec<f64> = xhat.iter().map(|v| -v).collect();
    let d2psi = |i: usize, j: usize| -> f64 {
        -((if i == j { 1.0 } else { 0.0 }) - xhat[i] * xhat[j]) / rho
    };
    let ip_xi_dpsi: f64 = xi.iter().zip(&dpsi).map(|(a, b)| a * b).sum();
    let mut xi_d2_xi = 0.0;
    let mut dpsi_d2_dpsi = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            xi_d2_xi += xi[i] * d2psi(i, j) * xi[j];
            dpsi_d2_dpsi += dpsi[i] * d2psi(i, j) * dpsi[j];
        }
    }
    let dpsi2: f64 = dpsi.iter().map(|v| v * v).sum();
    let ip_dpsi_dv: f64 = dpsi.iter().zip(grad_v).map(|(a, b)| a * b).sum();
    let t = w.tau;
    let m = w.mu;
    Ok(4.0 * t * m * m * e1 * ip_xi_dpsi * ip_xi_dpsi
        + 4.0 * t * m * e1 * xi_d2_xi
        + 4.0 * t.powi(3) * m.powi(4) * e3 * dpsi2 * dpsi2
        + 4.0 * t.powi(3) * m.powi(3) * e3 * dpsi_d2_dpsi
        - 2.0 * t * m * e1 * ip_dpsi_dv)
}

/// Result of the characteristic-set positivity scan.
#[derive(Debug, Clone)]
pub struct HypoellipticityReport {
    pub min_bracket: f64,
    pub argmin_x: Vec<f64>,
    pub argmin_xi: Vec<f64>,
    pub samples: usize,
    /// `min_bracket / (4 tau^3 mu^4 e^{3 mu psi})` at the arg-min, the
    /// bracket in units of its leading positive term.
    pub min_ratio: f64,
}

/// Default characteristic-set thickness: `|p_phi| < 1e-3 (1 + |xi|^2 +
/// |dphi|^2)`.
pub fn tol_char_default() -> f64 {
    1e-3
}

/// Scan the characteristic variety of `p_phi` over the shell centered at
/// `center` and return the minimum bracket value found.
///
/// The characteristic set fixes `|xi| = rho*(x) = sqrt(|dphi|^2 - V + E)`
/// with `xi` orthogonal to `dphi`, so the scan samples a neighborhood of
/// that sphere bundle (radial factors near 1, directions near the
/// orthogonal complement) rather than a full momentum box, and filters by
/// `re^2 + im^2 < tol_char^2 (1 + |xi|^2 + |dphi|^2)^2`.
pub fn hypoellipticity_scan(
    w: &CarlemanWeight,
    center: &[f64],
    potential: &SampledPotential,
    energy: f64,
    tol_char: f64,
) -> Result<HypoellipticityReport> {
    let dim = center.len();
    let n_rho = 24usize;
    let n_theta = if dim == 2 { 48 } else { 2 };
    let radial_factors = [0.97f64, 1.0, 1.03];
    let angle_offsets = [-2e-4f64, 0.0, 2e-4];

    let mut x_points: Vec<Vec<f64>> = Vec::new();
    for ir in 0..n_rho {
        let rho = w.r_inner + (w.r_outer - w.r_inner) * (ir as f64 + 0.5) / n_rho as f64;
        for it in 0..n_theta {
            let dir: Vec<f64> = match dim {
                1 => vec![if it == 0 { 1.0 } else { -1.0 }],
                2 => {
                    let th = 2.0 * PI * it as f64 / n_theta as f64;
                    vec![th.cos(), th.sin()]
                }
                _ => unreachable!(),
            };
            x_points.push(dir.iter().map(|d| d * rho).collect());
        }
    }

    let candidates: Vec<(f64, Vec<f64>, Vec<f64>, f64)> = x_points
        .par_iter()
        .flat_map_iter(|dx| {
            let mut local = Vec::new();
            let jet = match weight_eval(w, dx) {
                Ok(j) => j,
                Err(_) => return local.into_iter(),
            };
            let x_abs: Vec<f64> = center.iter().zip(dx).map(|(c, d)| c + d).collect();
            let v = potential.eval(&x_abs);
            let grad_v = potential.gradient(&x_abs);
            let dphi2: f64 = jet.grad.iter().map(|g| g * g).sum();
            let r2 = dphi2 - v + energy;
            if r2 <= 0.0 {
                return local.into_iter();
            }
            let rho_star = r2.sqrt();
            // directions orthogonal (or nearly so) to dphi
            let perp: Vec<Vec<f64>> = match dim {
                1 => vec![vec![1.0], vec![-1.0]],
                2 => {
                    let g = &jet.grad;
                    let gn = dphi2.sqrt();
                    let base = [-g[1] / gn, g[0] / gn];
                    let mut dirs = Vec::new();
                    for &off in &angle_offsets {
                        let (c, s) = (off.cos(), off.sin());
                        dirs.push(vec![c * base[0] - s * base[1], s * base[0] + c * base[1]]);
                        dirs.push(vec![-(c * base[0] - s * base[1]), -(s * base[0] + c * base[1])]);
                    }
                    dirs
                }
                _ => unreachable!(),
            };
            for dir in &perp {
                for &sf in &radial_factors {
                    let xi: Vec<f64> = dir.iter().map(|d| d * rho_star * sf).collect();
                    let sym = match conjugated_symbol(w, dx, &xi, v, energy) {
                        Ok(s) => s,
                        Err(_) => continue,
                    };
                    let xi2: f64 = xi.iter().map(|v| v * v).sum();
                    let scale = 1.0 + xi2 + dphi2;
                    if sym.re * sym.re + sym.im * sym.im < tol_char * tol_char * scale * scale {
                        if let Ok(b) = bracket_eval(w, dx, &xi, &grad_v) {
                            local.push((b, dx.clone(), xi, jet.psi));
                        }
                    }
                }
            }
            local.into_iter()
        })
        .collect();

    if candidates.is_empty() {
        return Err(Error::EmptySampleSet(
            "characteristic set missed; refine scan or enlarge tol_char".into(),
        ));
    }
    let samples = candidates.len();
    let (min_bracket, argmin_x, argmin_xi, psi_min) = candidates
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();
    let lead = 4.0 * w.tau.powi(3) * w.mu.powi(4) * (3.0 * w.mu * psi_min).exp();
    Ok(HypoellipticityReport {
        min_bracket,
        argmin_x,
        argmin_xi,
        samples,
        min_ratio: min_bracket / lead,
    })
}
