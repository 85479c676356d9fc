//! Experiment orchestration: h-sweeps, per-task CSV emission, and the
//! run manifest.

use std::fs;
use std::path::Path;
use std::time::Instant;

use semilab_core::carleman::{hypoellipticity_scan, tol_char_default, CarlemanWeight};
use semilab_core::eigensolver::{solve_eigenpairs, SolveRequest, SolverMode};
use semilab_core::estimates::{admissible_strips, cauchy_fit, continuation_growth};
use semilab_core::fbi::{decay_scan, fbi_sup_high_frequency};
use semilab_core::localization::{doubling_survey, tunneling_survey, vanishing_order};
use semilab_core::nodal::{extract_nodal_set, nodal_domain_count, zero_in_ball_scan};
use semilab_core::potential::SampledPotential;
use semilab_core::{EigenPair, ScalarField, TorusGrid};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{resolution, ExperimentConfig, Task};
use crate::csvio::{fmt_f64, write_csv, write_field_csv};
use crate::render::{render_levels, write_pgm};

#[derive(Debug, Clone, Serialize)]
pub struct TaskRecord {
    pub task: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
}

/// Run-level record of inputs, outputs, and timings.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub files: Vec<FileRecord>,
    pub tasks: Vec<TaskRecord>,
}

fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Solve products for one h.
struct HRun {
    h: f64,
    grid: TorusGrid,
    v: ScalarField,
    /// All eigenpairs returned by the solver.
    pairs: Vec<EigenPair>,
    seconds: f64,
}

impl HRun {
    /// Eigenpair closest to the energy target.
    fn pair(&self, target: f64) -> &EigenPair {
        self.pairs
            .iter()
            .min_by(|a, b| {
                (a.energy - target)
                    .abs()
                    .total_cmp(&(b.energy - target).abs())
            })
            .expect("nonempty eigenpair list")
    }
}

struct Emitter<'a> {
    out_dir: &'a Path,
    files: Vec<FileRecord>,
    records: Vec<TaskRecord>,
    failed: bool,
}

impl<'a> Emitter<'a> {
    fn record(&mut self, task: &str, h: Option<f64>, started: Instant, err: Option<String>) {
        let status = if err.is_some() { "failed" } else { "ok" };
        if err.is_some() {
            self.failed = true;
        }
        self.records.push(TaskRecord {
            task: task.into(),
            h,
            status: status.into(),
            error: err,
            seconds: started.elapsed().as_secs_f64(),
        });
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), String> {
        let path = self.out_dir.join(name);
        write_csv(&path, header, rows).map_err(|e| format!("{name}: {e}"))?;
        self.register(name, &path)
    }

    fn register(&mut self, name: &str, path: &Path) -> Result<(), String> {
        let data = fs::read(path).map_err(|e| format!("{name}: {e}"))?;
        self.files.push(FileRecord { name: name.into(), sha256: sha256_hex(&data) });
        Ok(())
    }
}

/// Deterministic center sample for the doubling survey.
fn seeded_centers(grid: TorusGrid, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let d = grid.spacing();
    let n = grid.n_per_axis() as f64;
    (0..count)
        .map(|_| {
            (0..grid.dim())
                .map(|_| (next() * n).floor() * d)
                .collect()
        })
        .collect()
}

/// Execute every configured task over the h-sweep, write per-task CSVs
/// and renders into `out_dir`, and finish with `manifest.json`. Task
/// failures are recorded and do not stop independent tasks.
pub fn run_pipeline(
    cfg: &ExperimentConfig,
    config_text: &str,
    out_dir: &Path,
) -> Result<(Manifest, bool), String> {
    fs::create_dir_all(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
    let mut em = Emitter { out_dir, files: Vec::new(), records: Vec::new(), failed: false };
    let needs_solve = cfg.tasks.iter().any(|t| *t != Task::Carleman);

    let mut runs: Vec<HRun> = Vec::new();
    for &h in &cfg.h_list {
        let started = Instant::now();
        let outcome = (|| -> Result<HRun, String> {
            let grid = TorusGrid::new(cfg.dim, resolution(cfg, h)).map_err(|e| e.to_string())?;
            let v = cfg.potential.sample(grid).map_err(|e| e.to_string())?;
            let pairs = if needs_solve {
                solve_eigenpairs(&SolveRequest {
                    grid,
                    v: v.clone(),
                    h,
                    energy_target: cfg.energy_target,
                    count: cfg.eigencount,
                    mode: SolverMode::Iterative,
                })
                .map_err(|e| e.to_string())?
            } else {
                Vec::new()
            };
            Ok(HRun { h, grid, v, pairs, seconds: started.elapsed().as_secs_f64() })
        })();
        match outcome {
            Ok(run) => runs.push(run),
            Err(e) => em.record("solve", Some(h), started, Some(e)),
        }
    }

    for &task in &cfg.tasks {
        match task {
            Task::Solve => {
                let started = Instant::now();
                let mut rows = Vec::new();
                for run in &runs {
                    for (i, p) in run.pairs.iter().enumerate() {
                        rows.push(vec![
                            fmt_f64(run.h),
                            i.to_string(),
                            fmt_f64(p.energy),
                            fmt_f64(p.residual),
                            p.degenerate.to_string(),
                        ]);
                    }
                }
                let err = em
                    .csv("eigenpairs.csv", &["h", "index", "energy", "residual", "degenerate"], &rows)
                    .err();
                em.record("solve", None, started, err);
            }
            Task::Fbi => {
                let started = Instant::now();
                let err = (|| -> Result<(), String> {
                    let selected: Vec<EigenPair> = runs
                        .iter()
                        .map(|r| r.pair(cfg.energy_target).clone())
                        .collect();
                    if selected.len() >= 3 {
                        let rep = decay_scan(&selected, cfg.thresholds.c0)
                            .map_err(|e| e.to_string())?;
                        let rows: Vec<Vec<String>> = rep
                            .table
                            .iter()
                            .map(|(h, s)| vec![fmt_f64(*h), fmt_f64(*s)])
                            .collect();
                        em.csv("fbi.csv", &["h", "sup_high_freq"], &rows)?;
                        em.csv(
                            "fbi_fit.csv",
                            &["xi_threshold", "delta", "r_squared"],
                            &[vec![
                                fmt_f64(rep.xi_threshold),
                                fmt_f64(rep.delta),
                                fmt_f64(rep.r_squared),
                            ]],
                        )?;
                    } else {
                        let mut rows = Vec::new();
                        for p in &selected {
                            let sup = fbi_sup_high_frequency(
                                &p.field,
                                p.h,
                                cfg.thresholds.c0,
                                cfg.thresholds.c0 + 1.0,
                            )
                            .map_err(|e| e.to_string())?;
                            rows.push(vec![fmt_f64(p.h), fmt_f64(sup)]);
                        }
                        em.csv("fbi.csv", &["h", "sup_high_freq"], &rows)?;
                    }
                    Ok(())
                })()
                .err();
                em.record("fbi", None, started, err);
            }
            Task::Cauchy => {
                let started = Instant::now();
                let err = (|| -> Result<(), String> {
                    let mut rows = Vec::new();
                    for run in &runs {
                        let u = run.pair(cfg.energy_target);
                        let rep =
                            cauchy_fit(&u.field, run.h, cfg.thresholds.alpha_max_for(cfg.dim))
                                .map_err(|e| e.to_string())?;
                        rows.push(vec![fmt_f64(run.h), fmt_f64(rep.c_est)]);
                    }
                    em.csv("cauchy.csv", &["h", "c_est"], &rows)
                })()
                .err();
                em.record("cauchy", None, started, err);
            }
            Task::Growth => {
                let started = Instant::now();
                let err = (|| -> Result<(), String> {
                    let mut rows = Vec::new();
                    for run in &runs {
                        let u = run.pair(cfg.energy_target);
                        let t_list = admissible_strips(&u.field, 4)
                            .map_err(|e| e.to_string())?;
                        let rep = continuation_growth(&u.field, run.h, &t_list)
                            .map_err(|e| e.to_string())?;
                        rows.push(vec![
                            fmt_f64(run.h),
                            fmt_f64(rep.c_growth),
                            fmt_f64(rep.r_squared),
                        ]);
                    }
                    em.csv("growth.csv", &["h", "c_growth", "r_squared"], &rows)
                })()
                .err();
                em.record("growth", None, started, err);
            }
            Task::Carleman => {
                let started = Instant::now();
                let err = (|| -> Result<(), String> {
                    let run = runs.last().ok_or("no resolved grid for the carleman scan")?;
                    let pot = SampledPotential::from_field(&run.v);
                    // shell around the strongest feature of the potential
                    let center_idx = (0..run.grid.len())
                        .max_by(|&a, &b| run.v.values[a].total_cmp(&run.v.values[b]))
                        .unwrap_or(0);
                    let center = &run.grid.point(center_idx)[..cfg.dim];
                    let mut rows = Vec::new();
                    for mu in [4.0, 8.0, 16.0] {
                        let w = CarlemanWeight::new(1.0, mu, 1.45, 0.3, 0.45)
                            .map_err(|e| e.to_string())?;
                        let rep = hypoellipticity_scan(
                            &w,
                            center,
                            &pot,
                            cfg.energy_target,
                            tol_char_default(),
                        )
                        .map_err(|e| e.to_string())?;
                        rows.push(vec![
                            fmt_f64(mu),
                            fmt_f64(rep.min_bracket),
                            fmt_f64(rep.min_ratio),
                            rep.samples.to_string(),
                        ]);
                    }
                    em.csv("carleman.csv", &["mu", "min_bracket", "min_ratio", "samples"], &rows)
                })()
                .err();
                em.record("carleman", None, started, err);
            }
            Task::Nodal => {
                let started = Instant::now();
                let err = (|| -> Result<(), String> {
                    let mut rows = Vec::new();
                    for run in &runs {
                        let u = run.pair(cfg.energy_target);
                        let ns = extract_nodal_set(&u.field);
                        let domains = nodal_domain_count(&u.field);
                        let zb = zero_in_ball_scan(
                            &u.field,
                            run.h,
                            cfg.thresholds.c_ball,
                            &run.v,
                            u.energy,
                            cfg.thresholds.margin,
                        )
                        .map_err(|e| e.to_string())?;
                        rows.push(vec![
                            fmt_f64(run.h),
                            fmt_f64(ns.total_measure),
                            domains.to_string(),
                            zb.checked.to_string(),
                            zb.violations.len().to_string(),
                        ]);
                    }
                    em.csv(
                        "nodal.csv",
                        &["h", "length", "domains", "ball_checked", "ball_violations"],
                        &rows,
                    )
                })()
                .err();
                em.record("nodal", None, started, err);
            }
            Task::Doubling => {
                let started = Instant::now();
                let err = (|| -> Result<(), String> {
                    let mut rows = Vec::new();
                    for run in &runs {
                        let u = run.pair(cfg.energy_target);
                        let centers = seeded_centers(run.grid, cfg.seed, 8);
                        let radii: Vec<f64> = [3.0 * run.h, 0.06, 0.1]
                            .into_iter()
                            .filter(|&r| r >= 3.0 * run.h && 2.0 * r < 0.25)
                            .collect();
                        let rep = doubling_survey(u, &centers, &radii)
                            .map_err(|e| e.to_string())?;
                        rows.push(vec![
                            fmt_f64(run.h),
                            fmt_f64(rep.max_exponent),
                            rep.dropped.to_string(),
                        ]);
                    }
                    em.csv("doubling.csv", &["h", "max_exponent", "dropped"], &rows)
                })()
                .err();
                em.record("doubling", None, started, err);
            }
            Task::Tunneling => {
                let started = Instant::now();
                let err = (|| -> Result<(), String> {
                    let mut rows = Vec::new();
                    for run in &runs {
                        let u = run.pair(cfg.energy_target);
                        let r = cfg.thresholds.tunneling_radius;
                        let stride =
                            ((0.5 * r / run.grid.spacing()).floor() as usize).max(1);
                        let rep =
                            tunneling_survey(u, r, stride).map_err(|e| e.to_string())?;
                        let mut row = vec![fmt_f64(run.h), fmt_f64(r), fmt_f64(rep.c_meas)];
                        row.extend(rep.worst_center.iter().map(|c| fmt_f64(*c)));
                        rows.push(row);
                    }
                    let header: &[&str] = if cfg.dim == 1 {
                        &["h", "r", "c_meas", "worst_x"]
                    } else {
                        &["h", "r", "c_meas", "worst_x", "worst_y"]
                    };
                    em.csv("tunneling.csv", header, &rows)
                })()
                .err();
                em.record("tunneling", None, started, err);
            }
            Task::Vanishing => {
                let started = Instant::now();
                let err = (|| -> Result<(), String> {
                    let mut rows = Vec::new();
                    for run in &runs {
                        let u = run.pair(cfg.energy_target);
                        // deepest |u| minimum on the grid
                        let idx = (0..run.grid.len())
                            .min_by(|&a, &b| {
                                u.field.values[a]
                                    .abs()
                                    .total_cmp(&u.field.values[b].abs())
                            })
                            .unwrap_or(0);
                        let p = &run.grid.point(idx)[..cfg.dim];
                        let rep =
                            vanishing_order(&u.field, p, run.h).map_err(|e| e.to_string())?;
                        rows.push(vec![
                            fmt_f64(run.h),
                            rep.slope.map(fmt_f64).unwrap_or_default(),
                            rep.k_est.map(fmt_f64).unwrap_or_default(),
                            rep.flagged.to_string(),
                        ]);
                    }
                    em.csv("vanishing.csv", &["h", "slope", "k_est", "flagged"], &rows)
                })()
                .err();
                em.record("vanishing", None, started, err);
            }
            Task::Render => {
                for run in &runs {
                    let started = Instant::now();
                    let err = (|| -> Result<(), String> {
                        let u = run.pair(cfg.energy_target);
                        let img = render_levels(&u.field, cfg.thresholds.n_levels)
                            .map_err(|e| e.to_string())?;
                        let pgm_name = format!("u_h{}.pgm", run.h);
                        let pgm_path = out_dir.join(&pgm_name);
                        write_pgm(&pgm_path, &img).map_err(|e| e.to_string())?;
                        em.register(&pgm_name, &pgm_path)?;
                        let csv_name = format!("u_h{}.csv", run.h);
                        let csv_path = out_dir.join(&csv_name);
                        write_field_csv(&csv_path, &u.field).map_err(|e| e.to_string())?;
                        em.register(&csv_name, &csv_path)?;
                        Ok(())
                    })()
                    .err();
                    em.record("render", Some(run.h), started, err);
                }
            }
        }
    }

    // record solve wall times even when the solve task itself is absent
    for run in &runs {
        em.records.push(TaskRecord {
            task: "eigensolve".into(),
            h: Some(run.h),
            status: "ok".into(),
            error: None,
            seconds: run.seconds,
        });
    }

    let failed = em.failed;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        files: em.files,
        tasks: em.records,
    };
    let manifest_path = out_dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| e.to_string())?;
    fs::write(&manifest_path, body).map_err(|e| format!("manifest.json: {e}"))?;
    Ok((manifest, failed))
}
