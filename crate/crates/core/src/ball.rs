//! Periodic Euclidean balls and ball-restricted L2 quadrature.

use crate::error::{Error, Result};
use crate::grid::{periodic_delta, ScalarField, TorusGrid};

/// A ball `B(p, r)` on the torus, `0 < r < 1/4` so the periodic ball is
/// embedded.
#[derive(Debug, Clone)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 0.25) {
            return Err(Error::InvalidArgument(format!(
                "ball radius must lie in (0, 1/4), got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }
}

/// Indices of grid points with periodic distance `< r` from the center.
pub fn ball_mask(grid: TorusGrid, ball: &BallSpec) -> Vec<usize> {
    let n = grid.n_per_axis() as i64;
    let d = grid.spacing();
    let r2 = ball.radius * ball.radius;
    let reach = (ball.radius / d).ceil() as i64 + 1;
    let mut out = Vec::new();
    match grid.dim() {
        1 => {
            let c = (ball.center[0] / d).round() as i64;
            for di in -reach..=reach {
                let ix = (c + di).rem_euclid(n) as usize;
                let dx = periodic_delta(ix as f64 * d, ball.center[0]);
                if dx * dx < r2 {
                    out.push(ix);
                }
            }
        }
        2 => {
            let cx = (ball.center[0] / d).round() as i64;
            let cy = (ball.center[1] / d).round() as i64;
            for dj in -reach..=reach {
                let iy = (cy + dj).rem_euclid(n) as usize;
                let dy = periodic_delta(iy as f64 * d, ball.center[1]);
                for di in -reach..=reach {
                    let ix = (cx + di).rem_euclid(n) as usize;
                    let dx = periodic_delta(ix as f64 * d, ball.center[0]);
                    if dx * dx + dy * dy < r2 {
                        out.push(grid.index(ix, iy));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Ball-restricted L2 norm with the under-resolved flag.
#[derive(Debug, Clone, Copy)]
pub struct BallNorm {
    pub value: f64,
    pub under_resolved: bool,
}

/// `sqrt(sum_mask v^2 * spacing^dim)`; empty mask yields 0, flagged.
pub fn ball_l2_norm(field: &ScalarField, ball: &BallSpec) -> BallNorm {
    let mask = ball_mask(field.grid, ball);
    if mask.is_empty() {
        return BallNorm { value: 0.0, under_resolved: true };
    }
    let w = field.grid.cell_volume();
    let s: f64 = mask.iter().map(|&i| field.values[i] * field.values[i]).sum();
    BallNorm { value: (s * w).sqrt(), under_resolved: false }
}

/// Convenience accessor for the norm value.
pub fn ball_l2(field: &ScalarField, ball: &BallSpec) -> f64 {
    ball_l2_norm(field, ball).value
}
