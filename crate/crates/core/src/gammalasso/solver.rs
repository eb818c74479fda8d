//! Coordinate descent on the joint negative log posterior.
//!
//! Each outer iteration expands the logistic loss to second order at the
//! current margins and minimizes the expansion plus the exact penalties by
//! coordinate descent, then backtracks along the resulting direction. When no
//! backtracked point improves, a sweep of majorize-minimize coordinate moves
//! (curvature bound `1/4 sum_i x_ij^2`) is tried instead. Each coordinate
//! problem keeps its penalty exact; for gamma-lasso columns the minimizer is
//! the soft-threshold at the adaptive weight `s / (r + |beta|)` evaluated at
//! the new value, which reduces to a quadratic in `|beta|`, and the origin is
//! taken whenever it scores lower. Candidates are accepted only if the true
//! objective does not increase, so the trace never increases.

use serde::{Deserialize, Serialize};

use super::objective::{kkt_violation, neg_log_posterior};
use super::{FitError, Penalty, PenaltySpec};
use crate::design::SparseDesign;
use crate::numeric::{inv_logit, softplus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Relative objective change per outer iteration required, together
    /// with the KKT tolerance, to stop.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Absolute KKT tolerance required to declare convergence.
    pub kkt_tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { tol: 1e-7, max_sweeps: 10_000, kkt_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Full coefficient vector in directory order.
    pub coefficients: Vec<f64>,
    /// `s / (r + |beta_j|)` for gamma-lasso columns, `None` elsewhere.
    pub lambda_hat: Vec<Option<f64>>,
    pub objective_trace: Vec<f64>,
    pub objective: f64,
    pub kkt_violation: f64,
    pub sweeps: usize,
    pub converged: bool,
}

impl FitResult {
    /// Intercept and team effects.
    pub fn alpha<'a>(&'a self, design: &'a SparseDesign) -> impl Iterator<Item = (usize, f64)> + 'a {
        let dir = design.directory();
        (0..dir.player_offset()).map(move |j| (j, self.coefficients[j]))
    }

    /// Nonzero player and interaction effects.
    pub fn beta_nonzero<'a>(&'a self, design: &'a SparseDesign) -> impl Iterator<Item = (usize, f64)> + 'a {
        let dir = design.directory();
        (dir.player_offset()..dir.n_cols())
            .map(move |j| (j, self.coefficients[j]))
            .filter(|(_, b)| *b != 0.0)
    }

    /// Fraction of gamma-lasso columns with a nonzero estimate.
    pub fn nonzero_fraction(&self) -> f64 {
        let gl: Vec<f64> = self
            .lambda_hat
            .iter()
            .zip(&self.coefficients)
            .filter(|(l, _)| l.is_some())
            .map(|(_, &b)| b)
            .collect();
        if gl.is_empty() {
            return 0.0;
        }
        gl.iter().filter(|&&b| b != 0.0).count() as f64 / gl.len() as f64
    }

    pub fn into_converged(self) -> Result<FitResult, FitError> {
        if self.converged {
            Ok(self)
        } else {
            Err(FitError::NotConverged { sweeps: self.sweeps, kkt: self.kkt_violation })
        }
    }
}

/// Minimizer of `h/2 (b - c)^2 + s log(1 + |b| / r)`.
pub(crate) fn gamma_lasso_step(c: f64, h: f64, s: f64, r: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let mag = c.abs();
    let disc = (mag + r) * (mag + r) - 4.0 * s / h;
    if disc < 0.0 {
        return 0.0;
    }
    let u = 0.5 * ((mag - r) + disc.sqrt());
    if u <= 0.0 {
        return 0.0;
    }
    let at_u = 0.5 * h * (u - mag) * (u - mag) + s * (u / r).ln_1p();
    let at_zero = 0.5 * h * mag * mag;
    if at_u < at_zero {
        u.copysign(c)
    } else {
        0.0
    }
}

fn coordinate_target(penalty: Penalty, current: f64, grad: f64, h: f64) -> f64 {
    match penalty {
        Penalty::Ridge { sigma } => {
            let prec = 1.0 / (sigma * sigma);
            (h * current - grad) / (h + prec)
        }
        Penalty::Laplace { lambda } => {
            if h <= 0.0 {
                return 0.0;
            }
            let c = current - grad / h;
            // `+ 0.0` turns a signed zero into +0.0
            (c.abs() - lambda / h).max(0.0).copysign(c) + 0.0
        }
        Penalty::GammaLasso { s, r } => {
            if h <= 0.0 {
                return 0.0;
            }
            gamma_lasso_step(current - grad / h, h, s, r)
        }
    }
}

/// Largest column count for which the Newton expansion keeps a dense Gram matrix.
const DENSE_GRAM_MAX: usize = 2000;

struct State<'a> {
    design: &'a SparseDesign,
    penalties: &'a PenaltySpec,
    coef: Vec<f64>,
    /// `y_i x_i' theta`
    margin: Vec<f64>,
    /// quarter column norms
    curvature: Vec<f64>,
}

impl State<'_> {
    /// One coordinate move; returns the (nonpositive) objective change, or
    /// `None` when the coefficient stays put.
    fn update(&mut self, j: usize) -> Option<f64> {
        let y = self.design.response();
        let mut grad = 0.0;
        for (i, v) in self.design.col(j) {
            let w = (y[i] * v) as f64;
            grad -= w * inv_logit(-self.margin[i]);
        }
        let penalty = self.penalties.get(j);
        let old = self.coef[j];
        let new = coordinate_target(penalty, old, grad, self.curvature[j]);
        if new == old || !new.is_finite() {
            return None;
        }
        let delta = new - old;
        // softplus(-m - w d) - softplus(-m) = log1p(expm1(-w d) * sigma(-m)), free of cancellation.
        let mut change = penalty_change(penalty, old, new);
        for (i, v) in self.design.col(j) {
            let w = (y[i] * v) as f64;
            change += ((-w * delta).exp_m1() * inv_logit(-self.margin[i])).ln_1p();
        }
        if change > 0.0 {
            return None;
        }
        for (i, v) in self.design.col(j) {
            self.margin[i] += (y[i] * v) as f64 * delta;
        }
        self.coef[j] = new;
        Some(change)
    }

    fn objective(&self) -> f64 {
        let loss: f64 = self.margin.iter().map(|m| softplus(-m)).sum();
        loss + self.penalties.total(&self.coef)
    }
}

fn penalty_change(penalty: Penalty, old: f64, new: f64) -> f64 {
    match penalty {
        Penalty::Ridge { sigma } => (new - old) * (new + old) / (2.0 * sigma * sigma),
        Penalty::Laplace { lambda } => lambda * (new.abs() - old.abs()),
        Penalty::GammaLasso { s, r } => s * ((new.abs() - old.abs()) / (r + old.abs())).ln_1p(),
    }
}

impl State<'_> {
    /// Proximal Newton candidate: coordinate descent on the penalized
    /// quadratic expansion of the loss at the current margins. Returns the
    /// candidate coefficients and the margin change it implies.
    fn newton_candidate(&self, max_inner: usize, inner_tol: f64) -> (Vec<f64>, Vec<f64>) {
        let y = self.design.response();
        let p = self.coef.len();
        let wrong: Vec<f64> = self.margin.iter().map(|&m| inv_logit(-m)).collect();
        let weight: Vec<f64> = wrong.iter().map(|&q| q * (1.0 - q)).collect();
        let mut b = self.coef.clone();
        let mut dm = vec![0.0; self.margin.len()];
        let dense = p <= DENSE_GRAM_MAX;
        let mut gram = Vec::new();
        let mut grad = vec![0.0; p];
        let hess: Vec<f64> = if dense {
            gram = vec![0.0; p * p];
            let mut row: Vec<(usize, f64)> = Vec::new();
            for i in 0..self.design.n_rows() {
                row.clear();
                row.extend(self.design.row(i).map(|(j, v)| (j, (y[i] * v) as f64)));
                for &(j, xj) in &row {
                    grad[j] -= xj * wrong[i];
                    for &(k, xk) in &row {
                        gram[j * p + k] += weight[i] * xj * xk;
                    }
                }
            }
            (0..p).map(|j| gram[j * p + j]).collect()
        } else {
            (0..p).map(|j| self.design.col(j).map(|(i, _)| weight[i]).sum()).collect()
        };
        let mut pass = |b: &mut Vec<f64>, dm: &mut Vec<f64>, cols: &mut dyn Iterator<Item = usize>| -> f64 {
            let mut worst = 0.0f64;
            for j in cols {
                let g = if dense {
                    grad[j]
                } else {
                    let mut g = 0.0;
                    for (i, v) in self.design.col(j) {
                        g += (y[i] * v) as f64 * (weight[i] * dm[i] - wrong[i]);
                    }
                    g
                };
                let new = coordinate_target(self.penalties.get(j), b[j], g, hess[j]);
                if new != b[j] && new.is_finite() {
                    let delta = new - b[j];
                    if dense {
                        for (gk, hk) in grad.iter_mut().zip(&gram[j * p..(j + 1) * p]) {
                            *gk += hk * delta;
                        }
                    } else {
                        for (i, v) in self.design.col(j) {
                            dm[i] += (y[i] * v) as f64 * delta;
                        }
                    }
                    b[j] = new;
                    worst = worst.max(hess[j] * delta.abs());
                }
            }
            worst
        };
        let mut used = 0;
        while used < max_inner {
            used += 1;
            if pass(&mut b, &mut dm, &mut (0..p)) < inner_tol {
                break;
            }
            let active: Vec<usize> = (0..p).filter(|&j| b[j] != 0.0 || !self.penalties.get(j).is_l1()).collect();
            while used < max_inner {
                used += 1;
                if pass(&mut b, &mut dm, &mut active.iter().copied()) < inner_tol {
                    break;
                }
            }
        }
        if dense {
            for j in 0..p {
                let delta = b[j] - self.coef[j];
                if delta != 0.0 {
                    for (i, v) in self.design.col(j) {
                        dm[i] += (y[i] * v) as f64 * delta;
                    }
                }
            }
        }
        (b, dm)
    }

    /// Exact objective change from moving to `coef` with margin change `t * dm`.
    fn change_to(&self, coef: &[f64], dm: &[f64], t: f64) -> f64 {
        // softplus(-m - d) - softplus(-m) = log1p(expm1(-d) * sigma(-m)), free of cancellation.
        let loss: f64 = self.margin.iter().zip(dm).map(|(&m, &d)| ((-t * d).exp_m1() * inv_logit(-m)).ln_1p()).sum();
        let pen: f64 = (0..coef.len()).map(|j| penalty_change(self.penalties.get(j), self.coef[j], coef[j])).sum();
        loss + pen
    }

    /// Backtracking along the Newton direction; returns the accepted
    /// objective change.
    fn newton_step(&mut self, inner_tol: f64) -> Option<f64> {
        let (target, dm) = self.newton_candidate(500, inner_tol);
        if target == self.coef {
            return None;
        }
        let mut t = 1.0;
        for _ in 0..30 {
            let coef: Vec<f64> =
                self.coef.iter().zip(&target).map(|(a, b)| if t == 1.0 { *b } else { a + t * (b - a) }).collect();
            let change = self.change_to(&coef, &dm, t);
            if change <= 0.0 {
                for (m, d) in self.margin.iter_mut().zip(&dm) {
                    *m += t * d;
                }
                self.coef = coef;
                return Some(change);
            }
            t *= 0.5;
        }
        None
    }

    /// One sweep of majorize-minimize coordinate moves, each accepted only
    /// if it does not raise the objective.
    fn bound_sweep(&mut self) -> Option<f64> {
        let mut total = None;
        for j in 0..self.coef.len() {
            if let Some(c) = self.update(j) {
                total = Some(total.unwrap_or(0.0) + c);
            }
        }
        total
    }
}

struct Descent {
    coef: Vec<f64>,
    trace: Vec<f64>,
    sweeps: usize,
    kkt: f64,
}

fn descend(design: &SparseDesign, penalties: &PenaltySpec, config: &FitConfig, init: &[f64]) -> Result<Descent, FitError> {
    let p = design.n_cols();
    let y = design.response();
    let margin = design.margins(init).iter().zip(y).map(|(eta, &yi)| yi as f64 * eta).collect();
    let curvature = (0..p).map(|j| 0.25 * design.col_nnz(j) as f64).collect();
    let mut st = State { design, penalties, coef: init.to_vec(), margin, curvature };

    // The trace accumulates accepted (nonpositive) changes, so it never increases.
    let mut current = st.objective();
    let mut trace = vec![current];
    let mut sweeps = 0;
    let mut kkt = kkt_violation(design, &st.coef, penalties)?;
    let relative = |change: f64, base: f64| change.abs() / base.abs().max(1.0);

    while sweeps < config.max_sweeps {
        sweeps += 1;
        let inner_tol = (0.01 * kkt).max(1e-12);
        let Some(change) = st.newton_step(inner_tol).or_else(|| st.bound_sweep()) else { break };
        current += change;
        trace.push(current);
        kkt = kkt_violation(design, &st.coef, penalties)?;
        if kkt <= config.kkt_tol && relative(change, current) < config.tol {
            break;
        }
    }
    Ok(Descent { coef: st.coef, trace, sweeps, kkt })
}

/// MAP fit from the all-zero start.
pub fn fit_map(design: &SparseDesign, penalties: &PenaltySpec, config: &FitConfig) -> Result<FitResult, FitError> {
    fit_map_from(design, penalties, config, &vec![0.0; design.n_cols()])
}

/// MAP fit warm-started at `init`.
pub fn fit_map_from(
    design: &SparseDesign,
    penalties: &PenaltySpec,
    config: &FitConfig,
    init: &[f64],
) -> Result<FitResult, FitError> {
    let p = design.n_cols();
    if design.n_rows() == 0 {
        return Err(FitError::DimensionMismatch("design has no rows".into()));
    }
    if penalties.len() != p || init.len() != p {
        return Err(FitError::DimensionMismatch(format!(
            "{} penalties and {} starting values for {p} columns",
            penalties.len(),
            init.len()
        )));
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(FitError::DimensionMismatch("non-finite starting value".into()));
    }
    let start = neg_log_posterior(design, init, penalties)?;
    let mut sweeps = 0;
    let mut from = init.to_vec();
    // Weighted-lasso stage: the tangent of each gamma-lasso penalty at `init`
    // majorizes it, so its minimizer cannot score worse than `init`.
    if penalties.as_slice().iter().any(|p| matches!(p, Penalty::GammaLasso { .. })) {
        let tangent = PenaltySpec::new(
            penalties
                .as_slice()
                .iter()
                .zip(init)
                .map(|(&p, &b)| match p {
                    Penalty::GammaLasso { s, r } => Penalty::Laplace { lambda: s / (r + b.abs()) },
                    other => other,
                })
                .collect(),
        )?;
        let rough = FitConfig { tol: config.tol.max(1e-6), kkt_tol: config.kkt_tol.max(1e-3), ..*config };
        let stage = descend(design, &tangent, &rough, init)?;
        sweeps += stage.sweeps;
        if neg_log_posterior(design, &stage.coef, penalties)? <= start {
            from = stage.coef;
        }
    }
    let fin = descend(design, penalties, config, &from)?;
    sweeps += fin.sweeps;
    let mut trace = fin.trace;
    if start > trace[0] {
        trace.insert(0, start);
    }
    let (coef, kkt) = (fin.coef, fin.kkt);
    let converged = kkt <= config.kkt_tol;

    let objective = neg_log_posterior(design, &coef, penalties)?;
    let lambda_hat = (0..p)
        .map(|j| match penalties.get(j) {
            Penalty::GammaLasso { s, r } => Some(s / (r + coef[j].abs())),
            _ => None,
        })
        .collect();
    Ok(FitResult { coefficients: coef, lambda_hat, objective_trace: trace, objective, kkt_violation: kkt, sweeps, converged })
}
