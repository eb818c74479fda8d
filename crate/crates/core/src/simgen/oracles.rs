//! Brute-force references for the estimators. None of these reuse the
//! solver, sampler or optimizer kernels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::SimError;
use crate::design::SparseDesign;
use crate::design::Position;
use crate::gammalasso::{Penalty, PenaltySpec};
use crate::lineup::{Line, LineChoice, LineQuery, Roster, RosterEntry};

/// Dense copy of a tiny problem: rows folded by their response.
struct Dense {
    rows: Vec<Vec<f64>>,
    penalties: Vec<Penalty>,
}

impl Dense {
    fn new(design: &SparseDesign, penalties: &PenaltySpec, max_p: usize) -> Result<Self, SimError> {
        let p = design.n_cols();
        if p > max_p {
            return Err(SimError::TooManyCoefficients { got: p, max: max_p });
        }
        if penalties.len() != p {
            return Err(SimError::InvalidConfig(format!("{} penalties for {p} columns", penalties.len())));
        }
        let mut rows = vec![vec![0.0; p]; design.n_rows()];
        for t in design.entries() {
            rows[t.row][t.col] = (t.value * design.response()[t.row]) as f64;
        }
        Ok(Dense { rows, penalties: penalties.as_slice().to_vec() })
    }

    fn log_lik(&self, theta: &[f64]) -> f64 {
        let mut total = 0.0;
        for row in &self.rows {
            let m: f64 = row.iter().zip(theta).map(|(x, t)| x * t).sum();
            // log(1 + e^{-m}) evaluated on the safe side.
            total -= if m >= 0.0 { (1.0 + (-m).exp()).ln() } else { -m + (1.0 + m.exp()).ln() };
        }
        total
    }

    /// Loss, ridge and Laplace terms at `theta` plus a subgradient of their sum.
    fn convex_part(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; theta.len()];
        let mut value = 0.0;
        for row in &self.rows {
            let m: f64 = row.iter().zip(theta).map(|(x, t)| x * t).sum();
            value += if m >= 0.0 { (1.0 + (-m).exp()).ln() } else { -m + (1.0 + m.exp()).ln() };
            let s = 1.0 / (1.0 + m.exp());
            for (g, x) in grad.iter_mut().zip(row) {
                *g -= x * s;
            }
        }
        for (j, pen) in self.penalties.iter().enumerate() {
            match *pen {
                Penalty::Ridge { sigma } => {
                    value += theta[j] * theta[j] / (2.0 * sigma * sigma);
                    grad[j] += theta[j] / (sigma * sigma);
                }
                Penalty::Laplace { lambda } => {
                    value += lambda * theta[j].abs();
                    if theta[j] != 0.0 {
                        grad[j] += lambda * theta[j].signum();
                    }
                }
                Penalty::GammaLasso { .. } => {}
            }
        }
        (value, grad)
    }

    fn concave_term(pen: &Penalty, t: f64) -> f64 {
        match *pen {
            Penalty::GammaLasso { s, r } => s * (1.0 + t.abs() / r).ln(),
            _ => 0.0,
        }
    }

    fn objective(&self, theta: &[f64]) -> f64 {
        let (v, _) = self.convex_part(theta);
        v + self.penalties.iter().zip(theta).map(|(p, &t)| Self::concave_term(p, t)).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimum {
    pub coefficients: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
}

#[derive(Clone)]
struct Cell {
    lo: Vec<i64>,
    hi: Vec<i64>,
    bound: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on the bound
        other.bound.total_cmp(&self.bound)
    }
}

/// Exact minimum of the negative log posterior over the lattice
/// `{k * step : lo <= k * step <= hi}^p`, `p <= 3`.
///
/// Lattice blocks are discarded only when a certified lower bound exceeds the
/// incumbent: the convex part (loss, ridge, Laplace) is bounded below by its
/// tangent plane at the block center, the gamma-lasso terms by their value at
/// the point nearest the origin. Surviving small blocks are enumerated point
/// by point, so the result equals plain exhaustive enumeration.
pub fn oracle_map_grid(
    design: &SparseDesign,
    penalties: &PenaltySpec,
    bounds: (f64, f64),
    step: f64,
) -> Result<GridMinimum, SimError> {
    let dense = Dense::new(design, penalties, 3)?;
    let p = design.n_cols();
    if !(step > 0.0 && bounds.0 <= bounds.1) {
        return Err(SimError::InvalidConfig(format!("bad box {bounds:?} / step {step}")));
    }
    let k_lo = (bounds.0 / step).ceil() as i64;
    let k_hi = (bounds.1 / step).floor() as i64;
    if p == 0 {
        return Ok(GridMinimum { coefficients: vec![], objective: dense.objective(&[]), evaluations: 1 });
    }
    let at = |k: &[i64]| -> Vec<f64> { k.iter().map(|&k| k as f64 * step).collect() };

    let mut best_k: Vec<i64> = vec![0.clamp(k_lo, k_hi); p];
    let mut best = dense.objective(&at(&best_k));
    let mut evaluations = 1usize;
    let consider = |k: Vec<i64>, v: f64, best: &mut f64, best_k: &mut Vec<i64>| {
        if v < *best || (v == *best && k < *best_k) {
            *best = v;
            *best_k = k;
        }
    };

    let bound_of = |lo: &[i64], hi: &[i64], evaluations: &mut usize| -> (f64, Vec<i64>, f64) {
        let mid: Vec<i64> = lo.iter().zip(hi).map(|(a, b)| a + (b - a) / 2).collect();
        let c = at(&mid);
        let (conv, grad) = dense.convex_part(&c);
        *evaluations += 1;
        let mut lb = conv;
        let mut concave_at_mid = 0.0;
        for j in 0..p {
            let reach = ((mid[j] - lo[j]).max(hi[j] - mid[j])) as f64 * step;
            lb -= grad[j].abs() * reach;
            let nearest = if lo[j] <= 0 && hi[j] >= 0 { 0.0 } else if lo[j] > 0 { lo[j] as f64 * step } else { hi[j] as f64 * step };
            lb += Dense::concave_term(&dense.penalties[j], nearest);
            concave_at_mid += Dense::concave_term(&dense.penalties[j], c[j]);
        }
        (lb - 1e-9 * (1.0 + lb.abs()), mid, conv + concave_at_mid)
    };

    let mut heap = BinaryHeap::new();
    let root_lo = vec![k_lo; p];
    let root_hi = vec![k_hi; p];
    let (lb, mid, v) = bound_of(&root_lo, &root_hi, &mut evaluations);
    consider(mid, v, &mut best, &mut best_k);
    heap.push(Cell { lo: root_lo, hi: root_hi, bound: lb });

    const LEAF_POINTS: i64 = 512;
    while let Some(cell) = heap.pop() {
        if cell.bound > best {
            break;
        }
        let sizes: Vec<i64> = cell.lo.iter().zip(&cell.hi).map(|(a, b)| b - a + 1).collect();
        if sizes.iter().product::<i64>() <= LEAF_POINTS {
            let mut k = cell.lo.clone();
            loop {
                let v = dense.objective(&at(&k));
                evaluations += 1;
                consider(k.clone(), v, &mut best, &mut best_k);
                let mut d = 0;
                loop {
                    if d == p {
                        break;
                    }
                    k[d] += 1;
                    if k[d] <= cell.hi[d] {
                        break;
                    }
                    k[d] = cell.lo[d];
                    d += 1;
                }
                if d == p {
                    break;
                }
            }
            continue;
        }
        let widest = (0..p).max_by_key(|&j| sizes[j]).expect("p > 0");
        let split = cell.lo[widest] + sizes[widest] / 2;
        for (lo_w, hi_w) in [(cell.lo[widest], split - 1), (split, cell.hi[widest])] {
            let mut lo = cell.lo.clone();
            let mut hi = cell.hi.clone();
            lo[widest] = lo_w;
            hi[widest] = hi_w;
            let (lb, mid, v) = bound_of(&lo, &hi, &mut evaluations);
            consider(mid, v, &mut best, &mut best_k);
            if lb <= best {
                heap.push(Cell { lo, hi, bound: lb });
            }
        }
    }
    Ok(GridMinimum { coefficients: at(&best_k), objective: best, evaluations })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadGrid {
    pub lo: f64,
    pub hi: f64,
    /// Nodes per axis (trapezoid rule).
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMoments {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Log of `int (lambda/2)^p1 exp(-lambda * abs_sum) Gamma(lambda; a, b) d lambda`
/// up to a constant, by trapezoid quadrature in `log lambda`.
fn log_marginal_laplace(abs_sum: f64, p1: usize, a: f64, b: f64) -> f64 {
    if p1 == 0 {
        return 0.0;
    }
    let shape = p1 as f64 + a;
    let rate = abs_sum + b;
    let peak = (shape / rate).ln();
    let (lo, hi, n) = (peak - 15.0, peak + 6.0, 600usize);
    let h = (hi - lo) / (n - 1) as f64;
    let logs: Vec<f64> = (0..n)
        .map(|k| {
            let u = lo + k as f64 * h;
            let w: f64 = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            shape * u - rate * u.exp() + w.ln()
        })
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln() + h.ln()
}

/// Posterior means and variances of `p <= 2` coefficients by tensor-grid
/// integration of the exact unnormalized posterior: logistic likelihood,
/// Gaussian priors on ridge columns, and Laplace priors on L1 columns whose
/// shared rate is integrated against a Gamma(a, b) prior.
pub fn oracle_posterior_quadrature(
    design: &SparseDesign,
    penalties: &PenaltySpec,
    grid: QuadGrid,
    lambda_prior: (f64, f64),
) -> Result<PosteriorMoments, SimError> {
    let dense = Dense::new(design, penalties, 2)?;
    let p = design.n_cols();
    if grid.n < 3 || !(grid.hi > grid.lo) {
        return Err(SimError::InvalidConfig(format!("bad quadrature grid {grid:?}")));
    }
    let (a, b) = lambda_prior;
    let p1 = dense.penalties.iter().filter(|pen| !matches!(pen, Penalty::Ridge { .. })).count();
    let h = (grid.hi - grid.lo) / (grid.n - 1) as f64;
    let node = |k: usize| grid.lo + k as f64 * h;
    let edge = |k: usize| -> f64 { if k == 0 || k == grid.n - 1 { 0.5 } else { 1.0 } };

    let total = grid.n.pow(p as u32);
    let mut logs = Vec::with_capacity(total);
    let mut points = Vec::with_capacity(total);
    for flat in 0..total {
        let mut idx = flat;
        let mut theta = Vec::with_capacity(p);
        let mut weight = 1.0;
        for _ in 0..p {
            let k = idx % grid.n;
            idx /= grid.n;
            theta.push(node(k));
            weight *= edge(k);
        }
        let mut lp = dense.log_lik(&theta) + weight.ln();
        let mut abs_sum = 0.0;
        for (pen, &t) in dense.penalties.iter().zip(&theta) {
            match *pen {
                Penalty::Ridge { sigma } => lp -= t * t / (2.0 * sigma * sigma),
                _ => abs_sum += t.abs(),
            }
        }
        lp += log_marginal_laplace(abs_sum, p1, a, b);
        logs.push(lp);
        points.push(theta);
    }
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = w.iter().sum();
    let mut mean = vec![0.0; p];
    for (wi, th) in w.iter().zip(&points) {
        for j in 0..p {
            mean[j] += wi * th[j] / z;
        }
    }
    let mut variance = vec![0.0; p];
    for (wi, th) in w.iter().zip(&points) {
        for j in 0..p {
            variance[j] += wi * (th[j] - mean[j]).powi(2) / z;
        }
    }
    Ok(PosteriorMoments { mean, variance })
}

/// Largest roster the line enumerator accepts.
pub const LINE_ORACLE_MAX_PLAYERS: usize = 40;

/// Every position-legal line, scored directly. Returns `None` when no line
/// satisfies the budget, pins and excludes.
pub fn oracle_line_enumeration(beta: &[f64], roster: &Roster, query: &LineQuery) -> Result<Option<LineChoice>, SimError> {
    if roster.len() > LINE_ORACLE_MAX_PLAYERS {
        return Err(SimError::RosterTooLarge { got: roster.len(), max: LINE_ORACLE_MAX_PLAYERS });
    }
    let pool = |pos| -> Vec<&RosterEntry> {
        let mut v: Vec<&RosterEntry> = roster.at(pos).filter(|e| !query.excluded.contains(&e.id)).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    };
    let (gs, cs, ls, rs, ds) = (pool(Position::G), pool(Position::C), pool(Position::L), pool(Position::R), pool(Position::D));
    let mut best: Option<(f64, Vec<&str>, u64)> = None;
    for g in &gs {
        for c in &cs {
            for l in &ls {
                for r in &rs {
                    for (i, d1) in ds.iter().enumerate() {
                        for d2 in &ds[i + 1..] {
                            let slots = [*g, *c, *l, *r, *d1, *d2];
                            if !query.pinned.iter().all(|p| slots.iter().any(|e| &e.id == p)) {
                                continue;
                            }
                            let cost: u128 = slots.iter().map(|e| e.salary_cents as u128).sum();
                            if cost > query.budget() as u128 {
                                continue;
                            }
                            let mut value = 0.0;
                            for e in &slots {
                                value += beta[e.column];
                            }
                            let ids: Vec<&str> = slots.iter().map(|e| e.id.as_str()).collect();
                            let take = match &best {
                                None => true,
                                Some((v, b, _)) => value > *v || (value == *v && ids < *b),
                            };
                            if take {
                                best = Some((value, ids, cost as u64));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(best.map(|(value, ids, cost_cents)| LineChoice {
        line: Line::new(ids[0], ids[1], ids[2], ids[3], ids[4], ids[5]),
        value,
        cost_cents,
    }))
}
