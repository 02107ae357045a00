//! Parameter sweeps with independent points run on a fixed pool of threads.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nanolattice_core::verify::{run_point, scaling_table, ScalingParameter, ScalingRow, ScalingTable, Tolerances};

use crate::error::{AppError, AppResult};

/// Comma-separated positive values, at least three.
pub fn parse_grid(s: &str) -> AppResult<Vec<f64>> {
    let grid = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| AppError::Usage(format!("bad grid value `{x}`"))))
        .collect::<AppResult<Vec<f64>>>()?;
    if grid.len() < 3 {
        return Err(AppError::Usage(format!("a sweep grid needs at least 3 points, got {}", grid.len())));
    }
    if let Some(x) = grid.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(AppError::Usage(format!("grid values must be positive and finite, got {x}")));
    }
    for (i, x) in grid.iter().enumerate() {
        if grid[..i].contains(x) {
            return Err(AppError::Usage(format!("grid value {x} appears twice")));
        }
    }
    Ok(grid)
}

/// Runs every grid point with `workers` threads; rows come back in grid order
/// whatever the scheduling.
pub fn run_grid(parameter: ScalingParameter, grid: &[f64], tol: &Tolerances, workers: usize) -> AppResult<Vec<ScalingRow>> {
    let workers = workers.clamp(1, grid.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<AppResult<ScalingRow>>>> = Mutex::new((0..grid.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= grid.len() {
                    break;
                }
                let r = run_point(parameter, grid[i], tol).map_err(AppError::from);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers have finished")
        .into_iter()
        .map(|r| r.expect("every point was run"))
        .collect()
}

pub fn run_sweep(parameter: ScalingParameter, grid: &[f64], tol: &Tolerances, workers: usize) -> AppResult<ScalingTable> {
    let rows = run_grid(parameter, grid, tol, workers)?;
    Ok(scaling_table(parameter, rows, tol)?)
}
