use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::LineupError;

/// Simple regression of one metric on salary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub intercept: f64,
    pub slope: f64,
    /// Standard error of the slope.
    pub slope_se: f64,
    /// Residual standard error, `sqrt(RSS / (n - 2))`.
    pub residual_se: f64,
    pub rss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalaryRegression {
    pub a: OlsFit,
    pub b: OlsFit,
    /// Slope difference `b - a` from the pooled model with a group indicator
    /// and its salary interaction.
    pub interaction: f64,
    pub interaction_se: f64,
    pub interaction_t: f64,
    /// Two-sided p-value on `2n - 4` degrees of freedom.
    pub interaction_p: f64,
}

fn ols(x: &[f64], y: &[f64], xbar: f64, sxx: f64) -> OlsFit {
    let n = x.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - xbar) * (yi - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - intercept - slope * xi).powi(2)).sum();
    let residual_se = (rss / (n - 2.0)).sqrt();
    OlsFit { intercept, slope, slope_se: residual_se / sxx.sqrt(), residual_se, rss }
}

/// Regresses two metrics on the same salaries and tests whether the slopes
/// differ.
pub fn salary_regression(metric_a: &[f64], metric_b: &[f64], salaries: &[f64]) -> Result<SalaryRegression, LineupError> {
    let n = salaries.len();
    if metric_a.len() != n || metric_b.len() != n {
        return Err(LineupError::DimensionMismatch("metrics and salaries differ in length".into()));
    }
    if n < 3 {
        return Err(LineupError::DegenerateDesign(format!("need at least 3 observations, got {n}")));
    }
    if metric_a.iter().chain(metric_b).chain(salaries).any(|v| !v.is_finite()) {
        return Err(LineupError::DegenerateDesign("non-finite input".into()));
    }
    let xbar = salaries.iter().sum::<f64>() / n as f64;
    let sxx: f64 = salaries.iter().map(|x| (x - xbar).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(LineupError::DegenerateDesign("salaries are constant".into()));
    }
    let a = ols(salaries, metric_a, xbar, sxx);
    let b = ols(salaries, metric_b, xbar, sxx);
    let df = 2.0 * n as f64 - 4.0;
    let pooled_var = (a.rss + b.rss) / df;
    let interaction = b.slope - a.slope;
    let interaction_se = (2.0 * pooled_var / sxx).sqrt();
    let (interaction_t, interaction_p) = if interaction == 0.0 {
        (0.0, 1.0)
    } else if interaction_se == 0.0 {
        (interaction.signum() * f64::INFINITY, 0.0)
    } else {
        let t = interaction / interaction_se;
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| LineupError::DegenerateDesign(e.to_string()))?;
        (t, (2.0 * dist.sf(t.abs())).min(1.0))
    };
    Ok(SalaryRegression { a, b, interaction, interaction_se, interaction_t, interaction_p })
}
