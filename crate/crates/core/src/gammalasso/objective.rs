use super::{FitError, Penalty, PenaltySpec};
use crate::design::SparseDesign;
use crate::numeric::{inv_logit, softplus};

fn check_dims(design: &SparseDesign, coeffs: &[f64], penalties: &PenaltySpec) -> Result<(), FitError> {
    if coeffs.len() != design.n_cols() || penalties.len() != design.n_cols() {
        return Err(FitError::DimensionMismatch(format!(
            "{} coefficients and {} penalties for {} columns",
            coeffs.len(),
            penalties.len(),
            design.n_cols()
        )));
    }
    Ok(())
}

/// Logistic loss `sum_i log(1 + exp(-y_i x_i' theta))`.
pub fn logistic_loss(design: &SparseDesign, coeffs: &[f64]) -> f64 {
    design
        .margins(coeffs)
        .iter()
        .zip(design.response())
        .map(|(eta, &y)| softplus(-(y as f64) * eta))
        .sum()
}

/// Joint negative log posterior: logistic loss plus every column's penalty.
pub fn neg_log_posterior(design: &SparseDesign, coeffs: &[f64], penalties: &PenaltySpec) -> Result<f64, FitError> {
    check_dims(design, coeffs, penalties)?;
    Ok(logistic_loss(design, coeffs) + penalties.total(coeffs))
}

/// Gradient of the logistic loss alone.
pub fn loss_gradient(design: &SparseDesign, coeffs: &[f64]) -> Vec<f64> {
    let margins = design.margins(coeffs);
    let y = design.response();
    // d/d eta_i of softplus(-y_i eta_i)
    let dloss: Vec<f64> = margins
        .iter()
        .zip(y)
        .map(|(&eta, &yi)| -(yi as f64) * inv_logit(-(yi as f64) * eta))
        .collect();
    (0..design.n_cols()).map(|j| design.col(j).map(|(i, v)| v as f64 * dloss[i]).sum()).collect()
}

/// Largest violation of the first-order optimality conditions.
///
/// Smooth and nonzero L1 coordinates must be stationary; a zero L1 coordinate
/// only needs its loss gradient inside the penalty's slope at the origin.
pub fn kkt_violation(design: &SparseDesign, coeffs: &[f64], penalties: &PenaltySpec) -> Result<f64, FitError> {
    check_dims(design, coeffs, penalties)?;
    let grad = loss_gradient(design, coeffs);
    let mut worst = 0.0f64;
    for (j, (&g, &theta)) in grad.iter().zip(coeffs).enumerate() {
        let v = match penalties.get(j) {
            Penalty::Ridge { sigma } => (g + theta / (sigma * sigma)).abs(),
            Penalty::Laplace { lambda } if theta == 0.0 => (g.abs() - lambda).max(0.0),
            Penalty::Laplace { lambda } => (g + lambda * theta.signum()).abs(),
            Penalty::GammaLasso { s, r } if theta == 0.0 => (g.abs() - s / r).max(0.0),
            Penalty::GammaLasso { s, r } => (g + s / (r + theta.abs()) * theta.signum()).abs(),
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

/// `P(home scores)` for a signed indicator row.
pub fn predict_prob(coeffs: &[f64], row: &[f64]) -> Result<f64, FitError> {
    if coeffs.len() != row.len() {
        return Err(FitError::DimensionMismatch(format!("{} coefficients for a row of {}", coeffs.len(), row.len())));
    }
    Ok(inv_logit(coeffs.iter().zip(row).map(|(b, x)| b * x).sum()))
}
