use super::solver::{fit_map_from, FitConfig, FitResult};
use super::{FitError, PenaltySpec};
use crate::design::SparseDesign;

#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub expected_lambda: f64,
    pub fit: FitResult,
    /// Share of gamma-lasso columns with a nonzero estimate.
    pub nonzero_fraction: f64,
}

/// Fits the model along an ascending grid of expected L1 penalties, each fit
/// warm-started from the previous one. Gamma-lasso columns of `template` get
/// `s = E[lambda] / 2`, `r = 1/2`; every other column keeps its penalty.
pub fn regularization_path(
    design: &SparseDesign,
    template: &PenaltySpec,
    grid: &[f64],
    config: &FitConfig,
) -> Result<Vec<PathPoint>, FitError> {
    if grid.is_empty() {
        return Err(FitError::InvalidGrid("empty grid".into()));
    }
    if grid.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
        return Err(FitError::InvalidGrid("grid values must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FitError::InvalidGrid("grid must be strictly ascending".into()));
    }
    let mut warm = vec![0.0; design.n_cols()];
    let mut out = Vec::with_capacity(grid.len());
    for &expected_lambda in grid {
        let penalties = template.with_expected_lambda(expected_lambda)?;
        let fit = fit_map_from(design, &penalties, config, &warm)?;
        warm.clone_from(&fit.coefficients);
        let nonzero_fraction = fit.nonzero_fraction();
        out.push(PathPoint { expected_lambda, fit, nonzero_fraction });
    }
    Ok(out)
}
