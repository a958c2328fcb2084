//! Shared fixtures for the benchmarks.

use corrlab_core::{PotentialSpec, RadialField, RadialGrid, RadialProfile, Result};
use num_complex::Complex64;

/// Bump potential used throughout the window experiments.
pub fn bump() -> Result<PotentialSpec> {
    PotentialSpec::bump(5.0, 1.0)
}

/// Normalized bump profile dilated by `lambda` on a uniform grid with
/// `nodes` points covering `[0, 4Λ]`.
pub fn dilated_bump(lambda: f64, nodes: usize, mu: f64) -> Result<RadialField> {
    let r_max = 4.0 * lambda;
    let grid = RadialGrid::uniform(r_max / (nodes - 1) as f64, r_max)?;
    let p = RadialProfile::bump(1.0)?.dilated(lambda);
    RadialField::from_fn(grid, |r| Complex64::new(p.value(r), 0.0), mu)
}
