#![allow(dead_code)]

use icepm::design::{ColumnDirectory, PlayerInfo, Position, SparseDesign, Triplet};
use icepm::numeric::inv_logit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Monte Carlo standard error of the mean of iid draws.
pub fn iid_se(xs: &[f64]) -> f64 {
    (mean_var(xs).1 / xs.len() as f64).sqrt()
}

/// Batch-means standard error for autocorrelated chains.
pub fn batch_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches).map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    (mean_var(&means).1 / batches as f64).sqrt()
}

/// Standard error of the sample variance of iid draws.
pub fn var_se(xs: &[f64]) -> f64 {
    let (m, v) = mean_var(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / xs.len() as f64;
    ((m4 - v * v) / xs.len() as f64).sqrt()
}

pub fn players(n: usize) -> ColumnDirectory {
    let players = (0..n).map(|k| PlayerInfo { id: format!("p{k}"), position: Position::C }).collect();
    ColumnDirectory::new(false, vec![], players, vec![]).unwrap()
}

/// Player-only design from dense rows of -1/0/+1.
pub fn dense_design(rows: &[Vec<i8>], y: &[i8]) -> SparseDesign {
    let p = rows.first().map_or(0, |r| r.len());
    let mut entries = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0 {
                entries.push(Triplet { row: i, col: j, value: v });
            }
        }
    }
    SparseDesign::from_parts(rows.len(), entries, y.to_vec(), players(p)).unwrap()
}

/// `n` random rows over `beta.len()` columns with logistic responses.
pub fn logistic_problem(beta: &[f64], n: usize, seed: u64) -> SparseDesign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    while rows.len() < n {
        let row: Vec<i8> = beta.iter().map(|_| [-1, 0, 1][rng.random_range(0..3)]).collect();
        if row.iter().all(|&v| v == 0) {
            continue;
        }
        let eta: f64 = row.iter().zip(beta).map(|(&x, b)| x as f64 * b).sum();
        y.push(if rng.random::<f64>() < inv_logit(eta) { 1 } else { -1 });
        rows.push(row);
    }
    dense_design(&rows, &y)
}

/// Largest gap between an empirical CDF and `cdf`.
pub fn ks_distance(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// One-sided Mann-Whitney p-value for `a` stochastically larger than `b`
/// (normal approximation, midranks for ties).
pub fn mann_whitney_greater(a: &[f64], b: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += all[i..=j].iter().filter(|e| e.1).count() as f64 * mid;
        i = j + 1;
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let u = rank_sum - n1 * (n1 + 1.0) / 2.0;
    let z = (u - n1 * n2 / 2.0) / (n1 * n2 * (n1 + n2 + 1.0) / 12.0).sqrt();
    1.0 - icepm::numeric::normal_cdf(z)
}
