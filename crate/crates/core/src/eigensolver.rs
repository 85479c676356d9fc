//! Eigenpairs of `P(h) = -h^2 Laplacian + V` on the periodic grid.
//!
//! The Laplacian acts as the Fourier multiplier `(2 pi |k|)^2`. Dense mode
//! materializes the grid operator and is restricted to small grids; the
//! iterative mode is a Rayleigh-Ritz projection onto the plane-wave band
//! `|k| <= K`, with `K` grown adaptively until the residual target is met.
//! The projected matrix is assembled only through [`apply_hamiltonian`] and
//! inner products.

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid};
use crate::spectral::SpectralField;
use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

pub const RESIDUAL_TOL: f64 = 1e-8;
const DEGENERACY_GAP: f64 = 1e-10;
/// Cap on the projected basis size (matrix memory bound).
const BASIS_CAP: usize = 7000;

/// Energy, normalized eigenfunction, and solve residual at one `h`.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub h: f64,
    pub energy: f64,
    pub field: ScalarField,
    pub residual: f64,
    /// Set when another returned energy is closer than 1e-10.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Dense,
    Iterative,
}

/// Eigensolve request; `v` lives on `grid`.
#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub grid: TorusGrid,
    pub v: ScalarField,
    pub h: f64,
    pub energy_target: f64,
    pub count: usize,
    pub mode: SolverMode,
}

/// Grid resolution rule: `n_per_axis >= max(64, 16/h)`, rounded up to a
/// power of two.
pub fn resolution_for(h: f64) -> usize {
    let need = (16.0 / h).ceil().max(64.0) as usize;
    need.next_power_of_two()
}

/// Apply `(-h^2 Laplacian + V)` to a field.
pub fn apply_hamiltonian(field: &ScalarField, h: f64, v: &ScalarField) -> Result<ScalarField> {
    field.check_same_grid(v)?;
    let mut sp = SpectralField::forward(field);
    let h2 = h * h;
    for idx in 0..sp.coeffs.len() {
        let k = sp.freq_at(idx);
        let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
        sp.coeffs[idx] *= h2 * 4.0 * PI * PI * k2;
    }
    let mut out = sp.inverse_real(format!("H[{}]", field.label));
    for (o, (u, vv)) in out.values.iter_mut().zip(field.values.iter().zip(&v.values)) {
        *o += u * vv;
    }
    Ok(out)
}

/// One real trigonometric basis function, orthonormal in `L^2([0,1]^dim)`.
#[derive(Debug, Clone, Copy)]
enum BasisFn {
    Const,
    Cos([i64; 2]),
    Sin([i64; 2]),
}

fn basis_for_cutoff(dim: usize, kmax: i64) -> Vec<BasisFn> {
    let mut basis = vec![BasisFn::Const];
    match dim {
        1 => {
            for k in 1..=kmax {
                basis.push(BasisFn::Cos([k, 0]));
                basis.push(BasisFn::Sin([k, 0]));
            }
        }
        2 => {
            let k2max = kmax * kmax;
            for kx in -kmax..=kmax {
                for ky in -kmax..=kmax {
                    let in_half = kx > 0 || (kx == 0 && ky > 0);
                    if in_half && kx * kx + ky * ky <= k2max {
                        basis.push(BasisFn::Cos([kx, ky]));
                        basis.push(BasisFn::Sin([kx, ky]));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    basis
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn basis_to_spectrum(b: BasisFn, grid: TorusGrid) -> SpectralField {
    let mut sp = SpectralField::zeros(grid);
    match b {
        BasisFn::Const => sp.set_coeff([0, 0], Complex64::new(1.0, 0.0)),
        BasisFn::Cos(k) => {
            sp.set_coeff(k, Complex64::new(SQRT_HALF, 0.0));
            sp.set_coeff([-k[0], -k[1]], Complex64::new(SQRT_HALF, 0.0));
        }
        BasisFn::Sin(k) => {
            sp.set_coeff(k, Complex64::new(0.0, -SQRT_HALF));
            sp.set_coeff([-k[0], -k[1]], Complex64::new(0.0, SQRT_HALF));
        }
    }
    sp
}

/// Coefficient of basis function `b` in the spectrum of a real field.
fn basis_coefficient(b: BasisFn, sp: &SpectralField) -> f64 {
    match b {
        BasisFn::Const => sp.coeff([0, 0]).re,
        BasisFn::Cos(k) => 2.0 * SQRT_HALF * sp.coeff(k).re,
        BasisFn::Sin(k) => -2.0 * SQRT_HALF * sp.coeff(k).im,
    }
}

fn sym_eigen(mat: &Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    let evd = mat.selfadjoint_eigendecomposition(Side::Lower);
    let n = mat.nrows();
    let s = evd.s();
    let vals: Vec<f64> = (0..n).map(|i| s.column_vector().read(i)).collect();
    (vals, evd.u().to_owned())
}

/// Assemble the projected matrix `<b_i, H b_j>` on an internal dealiased
/// grid, touching the operator only through `apply_hamiltonian`.
fn build_projected(basis: &[BasisFn], h: f64, v_int: &ScalarField) -> Result<Mat<f64>> {
    let grid = v_int.grid;
    let nb = basis.len();
    let columns: Vec<Vec<f64>> = basis
        .par_iter()
        .map(|&bj| {
            let field = basis_to_spectrum(bj, grid).inverse_real("basis");
            let hb = apply_hamiltonian(&field, h, v_int)?;
            let sp = SpectralField::forward(&hb);
            Ok(basis.iter().map(|&bi| basis_coefficient(bi, &sp)).collect())
        })
        .collect::<Result<_>>()?;
    let mut mat = Mat::<f64>::zeros(nb, nb);
    for j in 0..nb {
        for i in 0..nb {
            // symmetrize away roundoff asymmetry
            let val = 0.5 * (columns[j][i] + columns[i][j]);
            mat.write(i, j, val);
        }
    }
    Ok(mat)
}

fn lift_to_grid(basis: &[BasisFn], weights: &[f64], grid: TorusGrid) -> ScalarField {
    let mut sp = SpectralField::zeros(grid);
    for (&b, &w) in basis.iter().zip(weights) {
        match b {
            BasisFn::Const => {
                let c = sp.coeff([0, 0]);
                sp.set_coeff([0, 0], c + w);
            }
            BasisFn::Cos(k) => {
                let a = Complex64::new(w * SQRT_HALF, 0.0);
                let mk = [-k[0], -k[1]];
                let c1 = sp.coeff(k);
                sp.set_coeff(k, c1 + a);
                let c2 = sp.coeff(mk);
                sp.set_coeff(mk, c2 + a);
            }
            BasisFn::Sin(k) => {
                let a = Complex64::new(0.0, -w * SQRT_HALF);
                let mk = [-k[0], -k[1]];
                let c1 = sp.coeff(k);
                sp.set_coeff(k, c1 + a);
                let c2 = sp.coeff(mk);
                sp.set_coeff(mk, c2 - a);
            }
        }
    }
    sp.inverse_real("u")
}

fn normalize_sign(field: &mut ScalarField) {
    let mut imax = 0;
    let mut vmax = 0.0f64;
    for (i, v) in field.values.iter().enumerate() {
        if v.abs() > vmax {
            vmax = v.abs();
            imax = i;
        }
    }
    let norm = field.l2_norm();
    if norm == 0.0 {
        return;
    }
    let s = if field.values[imax] < 0.0 { -1.0 } else { 1.0 } / norm;
    for v in &mut field.values {
        *v *= s;
    }
}

fn finalize_pairs(
    mut selected: Vec<(f64, ScalarField)>,
    h: f64,
    v: &ScalarField,
) -> Result<Vec<EigenPair>> {
    let energies: Vec<f64> = selected.iter().map(|(e, _)| *e).collect();
    let mut out = Vec::with_capacity(selected.len());
    for (i, (energy, field)) in selected.iter_mut().enumerate() {
        normalize_sign(field);
        let hu = apply_hamiltonian(field, h, v)?;
        let mut rss = 0.0;
        for (a, b) in hu.values.iter().zip(&field.values) {
            let r = a - *energy * b;
            rss += r * r;
        }
        let residual = (rss * field.grid.cell_volume()).sqrt();
        let degenerate = energies
            .iter()
            .enumerate()
            .any(|(j, e)| j != i && (e - *energy).abs() < DEGENERACY_GAP);
        out.push(EigenPair { h, energy: *energy, field: field.clone(), residual, degenerate });
    }
    Ok(out)
}

fn select_nearest(vals: &[f64], target: f64, count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| {
        let da = (vals[a] - target).abs();
        let db = (vals[b] - target).abs();
        da.partial_cmp(&db)
            .unwrap()
            .then(vals[a].partial_cmp(&vals[b]).unwrap())
    });
    order.truncate(count);
    order
}

fn grid_operator_matrix(grid: TorusGrid, h: f64, v: &ScalarField) -> Result<Mat<f64>> {
    let n = grid.len();
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = ScalarField::zeros(grid, "e");
            e.values[j] = 1.0;
            Ok(apply_hamiltonian(&e, h, v)?.values)
        })
        .collect::<Result<_>>()?;
    let mut mat = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            mat.write(i, j, 0.5 * (columns[j][i] + columns[i][j]));
        }
    }
    Ok(mat)
}

fn solve_dense(req: &SolveRequest) -> Result<Vec<EigenPair>> {
    let grid = req.grid;
    let n = grid.len();
    if n > 4096 {
        return Err(Error::InvalidArgument(format!(
            "dense mode limited to total dimension 4096, got {n}"
        )));
    }
    let mat = grid_operator_matrix(grid, req.h, &req.v)?;
    let (vals, vecs) = sym_eigen(&mat);
    let chosen = select_nearest(&vals, req.energy_target, req.count);
    let selected = chosen
        .into_iter()
        .map(|c| {
            let field = ScalarField {
                grid,
                values: (0..n).map(|i| vecs.read(i, c)).collect(),
                label: "u".into(),
            };
            (vals[c], field)
        })
        .collect();
    finalize_pairs(selected, req.h, &req.v)
}

fn v_band(v: &ScalarField) -> i64 {
    let sp = SpectralField::forward(v);
    let maxc = sp.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    sp.effective_band(1e-14 * maxc.max(1e-300))
}

/// Restrict the potential to a coarser internal grid (its band must fit).
fn restrict_potential(v: &ScalarField, n_int: usize) -> Result<ScalarField> {
    if n_int >= v.grid.n_per_axis() {
        return Ok(v.clone());
    }
    let sp = SpectralField::forward(v);
    let target = TorusGrid::new(v.grid.dim(), n_int)?;
    let mut out = SpectralField::zeros(target);
    let lim = n_int as i64 / 2;
    for (idx, c) in sp.coeffs.iter().enumerate() {
        let k = sp.freq_at(idx);
        if k[0] >= -lim && k[0] < lim && k[1] >= -lim && k[1] < lim {
            out.set_coeff(k, *c);
        }
    }
    Ok(out.inverse_real(v.label.clone()))
}

fn solve_iterative(req: &SolveRequest) -> Result<Vec<EigenPair>> {
    let grid = req.grid;
    let dim = grid.dim();
    let v_min = req.v.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let band = v_band(&req.v);
    let xi_cut = (req.energy_target - v_min).max(0.5).sqrt() + 1.5;
    let mut kmax = ((xi_cut / (2.0 * PI * req.h)).ceil() as i64).max(4);
    let k_ceiling = (grid.n_per_axis() as i64) / 2 - band - 2;
    if k_ceiling < 4 {
        return Err(Error::UnderResolved(format!(
            "potential band {band} fills the {}-point grid; no dealiased \
             plane-wave cutoff is available",
            grid.n_per_axis()
        )));
    }
    let mut attained = f64::INFINITY;
    loop {
        let kmax_eff = kmax.min(k_ceiling);
        let basis = basis_for_cutoff(dim, kmax_eff);
        if basis.len() > BASIS_CAP {
            return Err(Error::NonConvergence { attained, target: RESIDUAL_TOL });
        }
        let n_int_need = 2 * (kmax_eff + band + 2) as usize;
        let n_int = n_int_need
            .next_power_of_two()
            .max(16)
            .min(grid.n_per_axis());
        let v_int = restrict_potential(&req.v, n_int)?;
        let mat = build_projected(&basis, req.h, &v_int)?;
        let (vals, vecs) = sym_eigen(&mat);
        let chosen = select_nearest(&vals, req.energy_target, req.count);
        let selected: Vec<(f64, ScalarField)> = chosen
            .into_iter()
            .map(|c| {
                let w: Vec<f64> = (0..basis.len()).map(|i| vecs.read(i, c)).collect();
                (vals[c], lift_to_grid(&basis, &w, grid))
            })
            .collect();
        let pairs = finalize_pairs(selected, req.h, &req.v)?;
        attained = pairs.iter().map(|p| p.residual).fold(0.0f64, f64::max);
        if attained <= RESIDUAL_TOL {
            return Ok(pairs);
        }
        if kmax_eff >= k_ceiling {
            return Err(Error::NonConvergence { attained, target: RESIDUAL_TOL });
        }
        kmax = (kmax as f64 * 1.35).ceil() as i64 + 2;
    }
}

/// Solve for the `count` eigenpairs with energies nearest the target,
/// sorted by distance with ties broken toward the smaller energy.
pub fn solve_eigenpairs(req: &SolveRequest) -> Result<Vec<EigenPair>> {
    if req.count < 1 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    req.v.check_same_grid(&ScalarField::zeros(req.grid, ""))?;
    let mut pairs = match req.mode {
        SolverMode::Dense => solve_dense(req)?,
        SolverMode::Iterative => solve_iterative(req)?,
    };
    pairs.sort_by(|a, b| {
        let da = (a.energy - req.energy_target).abs();
        let db = (b.energy - req.energy_target).abs();
        da.partial_cmp(&db).unwrap().then(a.energy.partial_cmp(&b.energy).unwrap())
    });
    Ok(pairs)
}

/// Eigenvalue count below `E` vs the phase-space volume prediction
/// `(2 pi h)^{-dim} Vol{ |xi|^2 + V(x) <= E }`.
pub fn weyl_count_check(v: &ScalarField, h: f64, energy: f64) -> Result<(usize, f64)> {
    let grid = v.grid;
    let dim = grid.dim();
    let w = grid.cell_volume();
    let mut vol = 0.0;
    for &vv in &v.values {
        let gap = energy - vv;
        if gap > 0.0 {
            vol += match dim {
                1 => 2.0 * gap.sqrt(),
                2 => PI * gap,
                _ => unreachable!(),
            } * w;
        }
    }
    let predicted = vol / (2.0 * PI * h).powi(dim as i32);
    if predicted == 0.0 {
        return Ok((0, 0.0));
    }

    let vals = if grid.len() <= 4096 {
        let mat = grid_operator_matrix(grid, h, v)?;
        sym_eigen(&mat).0
    } else {
        // projected spectrum with a cutoff well above the energy shell
        let v_min = v.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let xi_cut = (energy - v_min).max(0.0).sqrt() + 1.5;
        let kmax = ((xi_cut / (2.0 * PI * h)).ceil() as i64).max(4);
        let basis = basis_for_cutoff(dim, kmax);
        if basis.len() > BASIS_CAP {
            return Err(Error::InvalidArgument(
                "weyl check too large for the projected solver".into(),
            ));
        }
        let band = v_band(v);
        let n_int = (2 * (kmax + band + 2) as usize).next_power_of_two().max(16);
        let v_int = if n_int <= grid.n_per_axis() {
            restrict_potential(v, n_int)?
        } else {
            v.clone()
        };
        let mat = build_projected(&basis, h, &v_int)?;
        sym_eigen(&mat).0
    };
    let observed = vals.iter().filter(|&&e| e <= energy).count();
    Ok((observed, predicted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Bump, PotentialSpec};

    fn grid2(n: usize) -> TorusGrid {
        TorusGrid::new(2, n).unwrap()
    }

    fn free_v(grid: TorusGrid) -> ScalarField {
        ScalarField::zeros(grid, "V")
    }

    #[test]
    fn resolution_rule() {
        assert_eq!(resolution_for(0.5), 64);
        assert_eq!(resolution_for(0.1), 256);
        assert_eq!(resolution_for(0.02), 1024);
    }

    #[test]
    fn constants_are_harmonic() {
        let g = grid2(32);
        let one = ScalarField::from_fn(g, "1", |_| 1.0);
        let out = apply_hamiltonian(&one, 0.1, &free_v(g)).unwrap();
        assert!(out.sup_norm() < 1e-12);
    }

    #[test]
    fn fourier_mode_is_exact_eigenvector() {
        let g = TorusGrid::new(1, 64).unwrap();
        let u = ScalarField::from_fn(g, "u", |x| (2.0 * PI * 3.0 * x[0]).cos());
        let h = 0.1;
        let out = apply_hamiltonian(&u, h, &free_v(g)).unwrap();
        let lambda = h * h * (6.0 * PI).powi(2);
        assert!((lambda - 3.5530577).abs() < 1e-6);
        for (a, b) in out.values.iter().zip(&u.values) {
            assert!((a - lambda * b).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_finite_difference_laplacian() {
        // 4th-order central difference oracle on a smooth field
        let g = grid2(256);
        let u = ScalarField::from_fn(g, "u", |x| {
            (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos() + (2.0 * PI * (x[0] + x[1])).cos()
        });
        let out = apply_hamiltonian(&u, 1.0, &free_v(g)).unwrap();
        let n = g.n_per_axis();
        let d = g.spacing();
        let idx = |ix: i64, iy: i64| {
            let ix = ix.rem_euclid(n as i64) as usize;
            let iy = iy.rem_euclid(n as i64) as usize;
            iy * n + ix
        };
        let mut max_rel = 0.0f64;
        let scale = out.sup_norm();
        for iy in 0..n as i64 {
            for ix in 0..n as i64 {
                let lap = (-u.values[idx(ix + 2, iy)] + 16.0 * u.values[idx(ix + 1, iy)]
                    - 30.0 * u.values[idx(ix, iy)]
                    + 16.0 * u.values[idx(ix - 1, iy)]
                    - u.values[idx(ix - 2, iy)]
                    - u.values[idx(ix, iy + 2)]
                    + 16.0 * u.values[idx(ix, iy + 1)]
                    + 16.0 * u.values[idx(ix, iy - 1)]
                    - 30.0 * u.values[idx(ix, iy)]
                    - u.values[idx(ix, iy - 2)])
                    / (12.0 * d * d);
                let got = out.values[idx(ix, iy)];
                max_rel = max_rel.max((got + lap).abs() / scale);
            }
        }
        assert!(max_rel < 1e-6, "max relative difference {max_rel}");
    }

    #[test]
    fn symmetry_of_hamiltonian() {
        let g = grid2(32);
        let v = PotentialSpec::three_bumps().sample(g).unwrap();
        let f = ScalarField::from_fn(g, "f", |x| (2.0 * PI * x[0]).sin() + (4.0 * PI * x[1]).cos());
        let w = ScalarField::from_fn(g, "g", |x| (6.0 * PI * x[1]).sin() * (2.0 * PI * x[0]).cos());
        let hf = apply_hamiltonian(&f, 0.2, &v).unwrap();
        let hw = apply_hamiltonian(&w, 0.2, &v).unwrap();
        let a = hf.inner(&w).unwrap();
        let b = f.inner(&hw).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
    }

    #[test]
    fn linearity() {
        let g = TorusGrid::new(1, 32).unwrap();
        let v = ScalarField::from_fn(g, "V", |x| (2.0 * PI * x[0]).cos());
        let f = ScalarField::from_fn(g, "f", |x| (2.0 * PI * 2.0 * x[0]).sin());
        let w = ScalarField::from_fn(g, "g", |x| (2.0 * PI * 3.0 * x[0]).cos());
        let combo = ScalarField::new(
            g,
            f.values.iter().zip(&w.values).map(|(a, b)| 2.0 * a - 0.5 * b).collect(),
            "c",
        )
        .unwrap();
        let h = 0.3;
        let hc = apply_hamiltonian(&combo, h, &v).unwrap();
        let hf = apply_hamiltonian(&f, h, &v).unwrap();
        let hw = apply_hamiltonian(&w, h, &v).unwrap();
        for i in 0..g.len() {
            assert!((hc.values[i] - (2.0 * hf.values[i] - 0.5 * hw.values[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn free_torus_spectrum_near_target() {
        let g = grid2(64);
        let req = SolveRequest {
            grid: g,
            v: free_v(g),
            h: 0.1,
            energy_target: 0.4,
            count: 4,
            mode: SolverMode::Iterative,
        };
        let pairs = solve_eigenpairs(&req).unwrap();
        let expect = 0.1f64.powi(2) * 4.0 * PI * PI; // |k|^2 = 1
        assert_eq!(pairs.len(), 4);
        for p in &pairs {
            assert!((p.energy - expect).abs() < 1e-10, "{} vs {expect}", p.energy);
            assert!(p.residual <= RESIDUAL_TOL);
            assert!(p.degenerate);
            assert!((p.field.l2_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn iterative_matches_dense_on_cosine_potential() {
        let g = TorusGrid::new(1, 256).unwrap();
        let v = ScalarField::from_fn(g, "V", |x| 2.0 * (2.0 * PI * x[0]).cos());
        let mk = |mode| SolveRequest {
            grid: g,
            v: v.clone(),
            h: 0.2,
            energy_target: 1.0,
            count: 4,
            mode,
        };
        let dense = solve_eigenpairs(&mk(SolverMode::Dense)).unwrap();
        let iter = solve_eigenpairs(&mk(SolverMode::Iterative)).unwrap();
        for (a, b) in dense.iter().zip(&iter) {
            assert!(
                (a.energy - b.energy).abs() <= 1e-8 * a.energy.abs().max(1.0),
                "{} vs {}",
                a.energy,
                b.energy
            );
            // eigenfunctions agree up to sign
            let ip = a.field.inner(&b.field).unwrap();
            let mut diff = 0.0f64;
            let s = if ip < 0.0 { -1.0 } else { 1.0 };
            for (x, y) in a.field.values.iter().zip(&b.field.values) {
                diff = diff.max((x - s * y).abs());
            }
            assert!(diff < 1e-6, "eigenfunction mismatch {diff}");
        }
    }

    #[test]
    fn gauge_shift_moves_energies_exactly() {
        let g = TorusGrid::new(1, 64).unwrap();
        let v = ScalarField::from_fn(g, "V", |x| 1.5 * (2.0 * PI * x[0]).cos());
        let c = 0.7;
        let v_shift = ScalarField::new(g, v.values.iter().map(|x| x + c).collect(), "V").unwrap();
        let mk = |v: ScalarField, target: f64| SolveRequest {
            grid: g,
            v,
            h: 0.2,
            energy_target: target,
            count: 3,
            mode: SolverMode::Dense,
        };
        let a = solve_eigenpairs(&mk(v, 1.0)).unwrap();
        let b = solve_eigenpairs(&mk(v_shift, 1.0 + c)).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert!((pa.energy + c - pb.energy).abs() < 1e-10);
            let ip = pa.field.inner(&pb.field).unwrap();
            assert!((ip.abs() - 1.0).abs() < 1e-10, "fields differ beyond sign: {ip}");
        }
    }

    #[test]
    fn orthonormality_of_returns() {
        let g = TorusGrid::new(1, 128).unwrap();
        let v = PotentialSpec {
            bumps: vec![Bump { amplitude: 3.0, width: 12.0, center: vec![0.5] }],
            periodization_radius: None,
        }
        .sample(g)
        .unwrap();
        let req = SolveRequest {
            grid: g,
            v,
            h: 0.1,
            energy_target: 1.5,
            count: 4,
            mode: SolverMode::Iterative,
        };
        let pairs = solve_eigenpairs(&req).unwrap();
        for i in 0..pairs.len() {
            for j in 0..i {
                if (pairs[i].energy - pairs[j].energy).abs() > DEGENERACY_GAP {
                    let ip = pairs[i].field.inner(&pairs[j].field).unwrap();
                    assert!(ip.abs() <= 1e-8, "inner product {ip}");
                }
            }
        }
    }

    #[test]
    fn weyl_free_1d() {
        let g = TorusGrid::new(1, 64).unwrap();
        let (observed, predicted) = weyl_count_check(&free_v(g), 0.05, 1.0).unwrap();
        assert!((predicted - 6.366).abs() < 1e-2);
        assert!((5..=7).contains(&observed), "observed {observed}");
    }

    #[test]
    fn weyl_below_min_v() {
        let g = grid2(32);
        let v = PotentialSpec::three_bumps().sample(g).unwrap();
        let (observed, predicted) = weyl_count_check(&v, 0.1, -1.0).unwrap();
        assert_eq!(observed, 0);
        assert_eq!(predicted, 0.0);
    }
}
