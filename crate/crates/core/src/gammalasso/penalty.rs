use serde::{Deserialize, Serialize};

use super::FitError;
use crate::design::ColumnDirectory;

/// Default ridge prior sd on team effects and the intercept.
pub const DEFAULT_SIGMA: f64 = 1.0;
/// Default gamma-lasso rate.
pub const DEFAULT_RATE: f64 = 0.5;
/// Default expected L1 penalty, `s / r`.
pub const DEFAULT_EXPECTED_LAMBDA: f64 = 15.0;

/// Prior on a single coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Penalty {
    /// Fixed-variance Gaussian, `theta^2 / (2 sigma^2)`.
    Ridge { sigma: f64 },
    /// Fixed-rate Laplace, `lambda |theta|`.
    Laplace { lambda: f64 },
    /// Laplace with a Gamma(s, r) hyperprior on its rate, `s log(1 + |theta| / r)` at the joint mode.
    GammaLasso { s: f64, r: f64 },
}

impl Penalty {
    fn validate(&self) -> Result<(), String> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            Penalty::Ridge { sigma } if !ok(sigma) => Err(format!("ridge sigma {sigma} must be > 0")),
            Penalty::Laplace { lambda } if !ok(lambda) => Err(format!("laplace lambda {lambda} must be > 0")),
            Penalty::GammaLasso { s, r } if !ok(s) || !ok(r) => {
                Err(format!("gamma-lasso (s={s}, r={r}) must both be > 0"))
            }
            _ => Ok(()),
        }
    }

    /// Penalty contribution to the negative log posterior.
    #[inline]
    pub fn value(&self, theta: f64) -> f64 {
        match *self {
            Penalty::Ridge { sigma } => theta * theta / (2.0 * sigma * sigma),
            Penalty::Laplace { lambda } => lambda * theta.abs(),
            Penalty::GammaLasso { s, r } => s * (theta.abs() / r).ln_1p(),
        }
    }

    pub fn is_l1(&self) -> bool {
        !matches!(self, Penalty::Ridge { .. })
    }
}

/// One penalty per design column, assigned by directory role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Penalty>", into = "Vec<Penalty>")]
pub struct PenaltySpec {
    penalties: Vec<Penalty>,
}

impl PenaltySpec {
    pub fn new(penalties: Vec<Penalty>) -> Result<Self, FitError> {
        for (j, p) in penalties.iter().enumerate() {
            p.validate().map_err(|e| FitError::InvalidPenalty(format!("column {j}: {e}")))?;
        }
        Ok(PenaltySpec { penalties })
    }

    /// Ridge(sigma = 1) on the intercept and team block; gamma-lasso with
    /// `s = expected_lambda * r`, `r = 1/2` on every player and pair column.
    pub fn standard(directory: &ColumnDirectory, expected_lambda: f64) -> Result<Self, FitError> {
        let gl = gamma_lasso_for(expected_lambda)?;
        let penalties = (0..directory.n_cols())
            .map(|j| if directory.is_ridge_block(j) { Penalty::Ridge { sigma: DEFAULT_SIGMA } } else { gl })
            .collect();
        PenaltySpec::new(penalties)
    }

    /// Replaces every gamma-lasso column's hyperprior with `s = e * r`, `r = 1/2`.
    pub fn with_expected_lambda(&self, expected_lambda: f64) -> Result<Self, FitError> {
        let gl = gamma_lasso_for(expected_lambda)?;
        let penalties = self
            .penalties
            .iter()
            .map(|p| if matches!(p, Penalty::GammaLasso { .. }) { gl } else { *p })
            .collect();
        PenaltySpec::new(penalties)
    }

    pub fn len(&self) -> usize {
        self.penalties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.penalties.is_empty()
    }

    pub fn get(&self, j: usize) -> Penalty {
        self.penalties[j]
    }

    pub fn as_slice(&self) -> &[Penalty] {
        &self.penalties
    }

    pub fn total(&self, coeffs: &[f64]) -> f64 {
        self.penalties.iter().zip(coeffs).map(|(p, &t)| p.value(t)).sum()
    }
}

impl TryFrom<Vec<Penalty>> for PenaltySpec {
    type Error = FitError;

    fn try_from(penalties: Vec<Penalty>) -> Result<Self, Self::Error> {
        PenaltySpec::new(penalties)
    }
}

impl From<PenaltySpec> for Vec<Penalty> {
    fn from(spec: PenaltySpec) -> Self {
        spec.penalties
    }
}

fn gamma_lasso_for(expected_lambda: f64) -> Result<Penalty, FitError> {
    if !(expected_lambda.is_finite() && expected_lambda > 0.0) {
        return Err(FitError::InvalidPenalty(format!("expected lambda {expected_lambda} must be > 0")));
    }
    Ok(Penalty::GammaLasso { s: expected_lambda * DEFAULT_RATE, r: DEFAULT_RATE })
}

/// Conditional Laplace prior sd at the prior-mean penalty: `sqrt(2) / (s / r)`.
pub fn prior_sd(s: f64, r: f64) -> Result<f64, FitError> {
    if !(s > 0.0 && r > 0.0) {
        return Err(FitError::InvalidPenalty(format!("prior_sd needs s, r > 0 (got s={s}, r={r})")));
    }
    Ok(std::f64::consts::SQRT_2 / (s / r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_sd_anchor() {
        let sd = prior_sd(7.5, 0.5).unwrap();
        assert!((0.0935..=0.0945).contains(&sd), "{sd}");
        // Three prior deviations multiply the for-vs-against odds by about a third.
        let odds = (3.0 * sd).exp();
        assert!((1.32..=1.34).contains(&odds), "{odds}");
    }

    #[test]
    fn prior_sd_identity() {
        let r = 2.0;
        let s = std::f64::consts::SQRT_2 * r;
        assert!((prior_sd(s, r).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prior_sd_rejects_nonpositive() {
        assert!(prior_sd(0.0, 1.0).is_err());
        assert!(prior_sd(1.0, -1.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(PenaltySpec::new(vec![Penalty::Ridge { sigma: 0.0 }]).is_err());
        assert!(PenaltySpec::new(vec![Penalty::GammaLasso { s: 1.0, r: f64::NAN }]).is_err());
        assert!(PenaltySpec::new(vec![Penalty::Laplace { lambda: 2.0 }]).is_ok());
    }

    #[test]
    fn gamma_lasso_value() {
        let p = Penalty::GammaLasso { s: 7.5, r: 0.5 };
        assert!((p.value(0.5) - 7.5 * 2f64.ln()).abs() < 1e-14);
        assert_eq!(p.value(-0.5), p.value(0.5));
    }

    #[test]
    fn serde_shape() {
        let spec = PenaltySpec::new(vec![Penalty::Ridge { sigma: 1.0 }, Penalty::GammaLasso { s: 7.5, r: 0.5 }])
            .unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"[{"type":"ridge","sigma":1.0},{"type":"gamma_lasso","s":7.5,"r":0.5}]"#);
        assert_eq!(serde_json::from_str::<PenaltySpec>(&json).unwrap(), spec);
        assert!(serde_json::from_str::<PenaltySpec>(r#"[{"type":"ridge","sigma":-1.0}]"#).is_err());
    }
}
