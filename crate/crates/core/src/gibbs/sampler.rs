use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::draws::PosteriorDraws;
use super::latent::{draw_inverse_gaussian, draw_lambda, draw_truncated_normal_plus, OmegaProposal, OmegaSeries};
use super::GibbsError;
use crate::design::SparseDesign;
use crate::gammalasso::{Penalty, PenaltySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GibbsConfig {
    pub n_samples: usize,
    pub burnin: usize,
    pub thin: usize,
    /// Terms in the omega proposal series.
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub seed: u64,
    pub series: OmegaSeries,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig { n_samples: 10_000, burnin: 1_000, thin: 1, k: 100, a: 2.0, b: 0.1, seed: 0, series: OmegaSeries::Logistic }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<(), GibbsError> {
        if self.n_samples == 0 || self.thin == 0 || self.k == 0 {
            return Err(GibbsError::InvalidParameter("n_samples, thin and k must be >= 1".into()));
        }
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return Err(GibbsError::InvalidParameter(format!("lambda prior a={}, b={} must be > 0", self.a, self.b)));
        }
        Ok(())
    }
}

/// Every block of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    pub beta: Vec<f64>,
    pub lambda: f64,
    /// Fixed at 1 on ridge coordinates.
    pub tau2: Vec<f64>,
    pub z: Vec<f64>,
    pub omega: Vec<f64>,
}

impl LatentState {
    pub fn initial(design: &SparseDesign, config: &GibbsConfig) -> Self {
        let omega0 = OmegaProposal::new(config.series, config.k).map(|p| p.mean()).unwrap_or(1.0);
        LatentState {
            beta: vec![0.0; design.n_cols()],
            lambda: config.a / config.b,
            tau2: vec![1.0; design.n_cols()],
            z: vec![1.0; design.n_rows()],
            omega: vec![omega0; design.n_rows()],
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lambda > 0.0
            && self.tau2.iter().all(|&t| t > 0.0)
            && self.z.iter().all(|&z| z > 0.0)
            && self.omega.iter().all(|&w| w > 0.0)
    }
}

/// Design rows folded by their response, kept sparse.
#[derive(Debug, Clone)]
pub struct FoldedRows {
    rows: Vec<Vec<(usize, f64)>>,
    p: usize,
}

impl FoldedRows {
    pub fn new(design: &SparseDesign) -> Self {
        let y = design.response();
        let rows = (0..design.n_rows())
            .map(|i| design.row(i).map(|(j, v)| (j, (v * y[i]) as f64)).collect())
            .collect();
        FoldedRows { rows, p: design.n_cols() }
    }

    pub fn margin(&self, i: usize, beta: &[f64]) -> f64 {
        self.rows[i].iter().map(|&(j, x)| x * beta[j]).sum()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Prior precision of each coordinate given the current scales.
fn prior_precision(penalties: &PenaltySpec, tau2: &[f64], lambda: f64) -> Vec<f64> {
    penalties
        .as_slice()
        .iter()
        .zip(tau2)
        .map(|(pen, &t)| match *pen {
            Penalty::Ridge { sigma } => 1.0 / (sigma * sigma),
            _ => lambda * lambda / t,
        })
        .collect()
}

fn draw_beta_folded<R: Rng + ?Sized>(
    rows: &FoldedRows,
    z: &[f64],
    omega: &[f64],
    precision: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>, String> {
    let p = rows.p;
    let mut q = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    for (j, &d) in precision.iter().enumerate() {
        q[(j, j)] = d;
    }
    for (i, row) in rows.rows.iter().enumerate() {
        let w = 1.0 / omega[i];
        for &(a, xa) in row {
            rhs[a] += w * z[i] * xa;
            for &(b, xb) in row {
                if b <= a {
                    q[(a, b)] += w * xa * xb;
                }
            }
        }
    }
    let diag_min = (0..p).map(|j| q[(j, j)]).fold(f64::INFINITY, f64::min);
    let diag_max = (0..p).map(|j| q[(j, j)]).fold(0.0, f64::max);
    let chol = nalgebra::Cholesky::new(q).ok_or_else(|| {
        format!("precision matrix not positive definite (diagonal range {diag_min:e}..{diag_max:e})")
    })?;
    let mean = chol.solve(&rhs);
    let xi = DVector::<f64>::from_fn(p, |_, _| rng.sample(StandardNormal));
    let noise = chol.l_dirty().tr_solve_lower_triangular(&xi).ok_or("singular Cholesky factor")?;
    let beta: Vec<f64> = (mean + noise).iter().copied().collect();
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(format!("non-finite draw (diagonal range {diag_min:e}..{diag_max:e})"));
    }
    Ok(beta)
}

/// Exact draw of `beta | z, omega, tau2, lambda`: Gaussian with precision
/// `P + X' Omega^-1 X` and mean solving `(P + X' Omega^-1 X) b = X' Omega^-1 z`,
/// rows of `X` folded by their response.
pub fn draw_beta_conditional<R: Rng + ?Sized>(
    design: &SparseDesign,
    z: &[f64],
    omega: &[f64],
    tau2: &[f64],
    lambda: f64,
    penalties: &PenaltySpec,
    rng: &mut R,
) -> Result<Vec<f64>, GibbsError> {
    let (n, p) = (design.n_rows(), design.n_cols());
    if z.len() != n || omega.len() != n || tau2.len() != p || penalties.len() != p {
        return Err(GibbsError::DimensionMismatch("latent blocks disagree with the design".into()));
    }
    if !(lambda > 0.0) || tau2.iter().chain(omega).any(|&v| !(v > 0.0)) {
        return Err(GibbsError::InvalidParameter("lambda, tau2 and omega must be positive".into()));
    }
    let rows = FoldedRows::new(design);
    draw_beta_folded(&rows, z, omega, &prior_precision(penalties, tau2, lambda), rng)
        .map_err(|detail| GibbsError::SolverFailure { scan: 0, detail })
}

/// One chain with a fixed seed. Ridge columns keep their Gaussian prior;
/// every other column gets a Laplace prior with the shared rate `lambda`.
pub struct Chain<'a> {
    rows: FoldedRows,
    penalties: &'a PenaltySpec,
    l1: Vec<usize>,
    proposal: OmegaProposal,
    config: GibbsConfig,
    rng: ChaCha8Rng,
    pub state: LatentState,
    pub proposed: u64,
    pub accepted: u64,
    scans: usize,
}

impl<'a> Chain<'a> {
    pub fn new(design: &SparseDesign, penalties: &'a PenaltySpec, config: &GibbsConfig) -> Result<Self, GibbsError> {
        config.validate()?;
        if penalties.len() != design.n_cols() {
            return Err(GibbsError::DimensionMismatch(format!(
                "{} penalties for {} columns",
                penalties.len(),
                design.n_cols()
            )));
        }
        let l1 = (0..penalties.len()).filter(|&j| penalties.get(j).is_l1()).collect();
        Ok(Chain {
            rows: FoldedRows::new(design),
            penalties,
            l1,
            proposal: OmegaProposal::new(config.series, config.k)?,
            config: config.clone(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            state: LatentState::initial(design, config),
            proposed: 0,
            accepted: 0,
            scans: 0,
        })
    }

    /// One systematic scan: omega, z, tau2, beta, lambda.
    pub fn scan(&mut self) -> Result<(), GibbsError> {
        let st = &mut self.state;
        for i in 0..self.rows.n_rows() {
            let m = self.rows.margin(i, &st.beta);
            let (w, acc) = self.proposal.step(m, st.omega[i], &mut self.rng);
            st.omega[i] = w;
            if m != 0.0 {
                self.proposed += 1;
                self.accepted += acc as u64;
            }
            st.z[i] = draw_truncated_normal_plus(m, w, &mut self.rng)?;
        }
        for &j in &self.l1 {
            let mu = 1.0 / (st.lambda * st.beta[j].abs());
            st.tau2[j] = 1.0 / draw_inverse_gaussian(mu, 1.0, &mut self.rng)?;
        }
        let precision = prior_precision(self.penalties, &st.tau2, st.lambda);
        st.beta = draw_beta_folded(&self.rows, &st.z, &st.omega, &precision, &mut self.rng)
            .map_err(|detail| GibbsError::SolverFailure { scan: self.scans, detail })?;
        let l1_beta: Vec<f64> = self.l1.iter().map(|&j| st.beta[j]).collect();
        if !l1_beta.is_empty() {
            st.lambda = draw_lambda(&l1_beta, self.config.a, self.config.b, &mut self.rng)?;
        }
        self.scans += 1;
        Ok(())
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }
}

/// Runs the sampler and keeps `n_samples` scans after `burnin`, every
/// `thin`-th one.
pub fn sample_posterior(
    design: &SparseDesign,
    penalties: &PenaltySpec,
    config: &GibbsConfig,
) -> Result<PosteriorDraws, GibbsError> {
    let mut chain = Chain::new(design, penalties, config)?;
    for _ in 0..config.burnin {
        chain.scan()?;
    }
    let p = design.n_cols();
    let mut beta = Vec::with_capacity(config.n_samples * p);
    let mut lambda = Vec::with_capacity(config.n_samples);
    for _ in 0..config.n_samples {
        for _ in 0..config.thin {
            chain.scan()?;
        }
        beta.extend_from_slice(&chain.state.beta);
        lambda.push(chain.state.lambda);
    }
    let rate = chain.acceptance_rate();
    PosteriorDraws::new(design.directory().clone(), beta, lambda, config.clone(), rate)
}
