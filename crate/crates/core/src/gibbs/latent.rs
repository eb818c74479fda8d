//! Scalar draws for the latent-variable blocks.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::GibbsError;
use crate::numeric::ln_normal_cdf;

fn positive(name: &str, v: f64) -> Result<(), GibbsError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(GibbsError::InvalidParameter(format!("{name} = {v} must be finite and > 0")))
    }
}

/// Draws from `N(mean, variance)` restricted to `(0, inf)`.
///
/// Plain rejection when the truncation point is in the bulk, otherwise
/// Robert's translated-exponential proposal.
pub fn draw_truncated_normal_plus<R: Rng + ?Sized>(mean: f64, variance: f64, rng: &mut R) -> Result<f64, GibbsError> {
    positive("variance", variance)?;
    if !mean.is_finite() {
        return Err(GibbsError::InvalidParameter(format!("mean = {mean} must be finite")));
    }
    let sd = variance.sqrt();
    let alpha = -mean / sd;
    loop {
        let x = if alpha < 0.5 {
            let x: f64 = rng.sample(StandardNormal);
            if x <= alpha {
                continue;
            }
            x
        } else {
            let rate = 0.5 * (alpha + (alpha * alpha + 4.0).sqrt());
            let e: f64 = rng.sample(Exp1);
            let x = alpha + e / rate;
            let u: f64 = rng.random();
            if u > (-0.5 * (x - rate) * (x - rate)).exp() {
                continue;
            }
            x
        };
        let out = mean + sd * x;
        if out > 0.0 {
            return Ok(out);
        }
    }
}

/// Inverse Gaussian draw with the given mean and shape (Michael, Schucany
/// and Haas). An infinite mean gives the Levy limit `shape / N(0,1)^2`.
pub fn draw_inverse_gaussian<R: Rng + ?Sized>(mu: f64, shape: f64, rng: &mut R) -> Result<f64, GibbsError> {
    if !(mu > 0.0) || mu.is_nan() {
        return Err(GibbsError::InvalidParameter(format!("mu = {mu} must be > 0")));
    }
    positive("shape", shape)?;
    let nu: f64 = rng.sample(StandardNormal);
    let y = nu * nu;
    if mu.is_infinite() {
        return Ok(shape / y);
    }
    // Smaller root of the quadratic, arranged to avoid cancellation.
    let my = mu * y;
    let root = my * my + 4.0 * mu * shape * y;
    let x = 4.0 * mu * mu * shape * y / (my + root.sqrt()).powi(2);
    let x = if x > 0.0 { x } else { mu };
    let u: f64 = rng.random();
    Ok(if u * (mu + x) <= mu { x } else { mu * mu / x })
}

/// Series behind the scale-mixture proposal `omega = sum_k 2 eps_k / psi_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaSeries {
    /// `psi_k = k^2`: the normal scale mixture is the standard logistic.
    #[default]
    Logistic,
    /// `psi_k = (k - 1/2)^2 pi^2`: mean one, hyperbolic-secant mixture.
    HalfInteger,
}

impl OmegaSeries {
    pub fn psi(self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            OmegaSeries::Logistic => k * k,
            OmegaSeries::HalfInteger => (k - 0.5).powi(2) * std::f64::consts::PI.powi(2),
        }
    }
}

/// Precomputed `2 / psi_k`, `k = 1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaProposal {
    weights: Vec<f64>,
}

impl OmegaProposal {
    pub fn new(series: OmegaSeries, k: usize) -> Result<Self, GibbsError> {
        if k == 0 {
            return Err(GibbsError::InvalidParameter("K must be >= 1".into()));
        }
        Ok(OmegaProposal { weights: (1..=k).map(|k| 2.0 / series.psi(k)).collect() })
    }

    /// Expected proposal value.
    pub fn mean(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.weights.iter().map(|w| w * rng.sample::<f64, _>(Exp1)).sum()
    }

    /// One independence Metropolis step for `omega` given the folded margin
    /// `m = y x'beta`. Returns the new value and whether it was accepted.
    pub fn step<R: Rng + ?Sized>(&self, m: f64, current: f64, rng: &mut R) -> (f64, bool) {
        let proposal = self.propose(rng);
        if m == 0.0 {
            return (proposal, true);
        }
        let log_a = ln_normal_cdf(m / proposal.sqrt()) - ln_normal_cdf(m / current.sqrt());
        if log_a >= 0.0 {
            return (proposal, true);
        }
        let u: f64 = rng.random();
        if u.ln() < log_a {
            (proposal, true)
        } else {
            (current, false)
        }
    }
}

/// Single omega update; see [`OmegaProposal::step`].
pub fn draw_omega<R: Rng + ?Sized>(
    m: f64,
    omega_current: f64,
    k: usize,
    series: OmegaSeries,
    rng: &mut R,
) -> Result<(f64, bool), GibbsError> {
    positive("omega", omega_current)?;
    Ok(OmegaProposal::new(series, k)?.step(m, omega_current, rng))
}

/// `lambda | beta ~ Gamma(a + p1, b + sum |beta_j|)` over the L1 coordinates.
pub fn draw_lambda<R: Rng + ?Sized>(beta_l1: &[f64], a: f64, b: f64, rng: &mut R) -> Result<f64, GibbsError> {
    positive("a", a)?;
    positive("b", b)?;
    let shape = a + beta_l1.len() as f64;
    let rate = b + beta_l1.iter().map(|x| x.abs()).sum::<f64>();
    let g = Gamma::new(shape, 1.0 / rate).map_err(|e| GibbsError::InvalidParameter(e.to_string()))?;
    Ok(g.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn truncated_normal_far_tail_and_bad_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = draw_truncated_normal_plus(-40.0, 1.0, &mut rng).unwrap();
            assert!(x > 0.0 && x < 1.0, "{x}");
        }
        assert!(draw_truncated_normal_plus(0.0, 0.0, &mut rng).is_err());
        assert!(draw_truncated_normal_plus(0.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn truncated_normal_tail_mean() {
        // N(-3, 1) on (0, inf) is a standard normal above 3, shifted by -3.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xs: Vec<f64> = (0..100_000).map(|_| draw_truncated_normal_plus(-3.0, 1.0, &mut rng).unwrap()).collect();
        let (m, v) = moments(&xs);
        let phi = (-4.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let exact = phi / (1.0 - crate::numeric::normal_cdf(3.0));
        assert!((m - (exact - 3.0)).abs() < 3.0 * (v / 1e5).sqrt(), "{m} vs {exact}");
    }

    #[test]
    fn inverse_gaussian_rejects_bad_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(draw_inverse_gaussian(0.0, 1.0, &mut rng).is_err());
        assert!(draw_inverse_gaussian(1.0, -1.0, &mut rng).is_err());
        assert!(draw_inverse_gaussian(f64::NAN, 1.0, &mut rng).is_err());
        assert!(draw_inverse_gaussian(f64::INFINITY, 1.0, &mut rng).unwrap() > 0.0);
    }

    #[test]
    fn inverse_gaussian_huge_mean_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let x = draw_inverse_gaussian(1e12, 1.0, &mut rng).unwrap();
            assert!(x.is_finite() && x > 0.0);
        }
    }

    #[test]
    fn omega_zero_margin_always_accepts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let (_, acc) = draw_omega(0.0, 1.0, 100, OmegaSeries::Logistic, &mut rng).unwrap();
            assert!(acc);
        }
    }

    #[test]
    fn series_means() {
        let half = OmegaProposal::new(OmegaSeries::HalfInteger, 100_000).unwrap().mean();
        assert!((half - 1.0).abs() < 1e-5);
        let logistic = OmegaProposal::new(OmegaSeries::Logistic, 100_000).unwrap().mean();
        assert!((logistic - std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-4);
        assert!(OmegaProposal::new(OmegaSeries::Logistic, 0).is_err());
    }

    #[test]
    fn lambda_formula_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let xs: Vec<f64> = (0..100_000).map(|_| draw_lambda(&[0.0; 3], 2.0, 0.1, &mut rng).unwrap()).collect();
        let (m, _) = moments(&xs);
        // Gamma(5, 0.1): mean 50, sd 22.36
        assert!((m - 50.0).abs() < 3.0 * 22.36 / (1e5f64).sqrt());
        assert!(draw_lambda(&[], 0.0, 0.1, &mut rng).is_err());
        assert!(draw_lambda(&[], 2.0, -0.1, &mut rng).is_err());
    }
}
