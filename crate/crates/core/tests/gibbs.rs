mod common;

use std::time::Instant;

use common::*;
use icepm::design::SparseDesign;
use icepm::gammalasso::{Penalty, PenaltySpec};
use icepm::gibbs::*;
use icepm::simgen::{oracle_posterior_quadrature, QuadGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 100_000;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn half_normal_mean() {
    let mut r = rng(10);
    let xs: Vec<f64> = (0..N).map(|_| draw_truncated_normal_plus(0.0, 1.0, &mut r).unwrap()).collect();
    assert!(xs.iter().all(|&x| x > 0.0));
    let (m, _) = mean_var(&xs);
    let target = (2.0 / std::f64::consts::PI).sqrt();
    assert!((m - target).abs() < 3.0 * iid_se(&xs), "{m} vs {target}");
}

#[test]
fn truncated_normal_negligible_truncation() {
    let mut r = rng(11);
    let xs: Vec<f64> = (0..N).map(|_| draw_truncated_normal_plus(10.0, 1.0, &mut r).unwrap()).collect();
    let (m, _) = mean_var(&xs);
    assert!((m - 10.0).abs() < 3.0 * iid_se(&xs));
}

#[test]
fn inverse_gaussian_moments() {
    for (seed, &(mu, shape)) in [(0.5, 2.0), (3.0, 1.0), (1.0, 20.0)].iter().enumerate() {
        let mut r = rng(20 + seed as u64);
        let xs: Vec<f64> = (0..N).map(|_| draw_inverse_gaussian(mu, shape, &mut r).unwrap()).collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        let (m, v) = mean_var(&xs);
        assert!((m - mu).abs() < 3.0 * iid_se(&xs), "mu={mu}: mean {m}");
        let target = mu.powi(3) / shape;
        assert!((v - target).abs() < 3.0 * var_se(&xs), "mu={mu}: var {v} vs {target}");
    }
}

#[test]
fn lambda_gamma_moments() {
    let beta = [0.3, -1.2, 0.0, 0.5];
    let (a, b) = (2.0, 0.1);
    let mut r = rng(30);
    let xs: Vec<f64> = (0..N).map(|_| draw_lambda(&beta, a, b, &mut r).unwrap()).collect();
    let (m, v) = mean_var(&xs);
    let rate = b + 2.0;
    let shape = a + 4.0;
    assert!((m - shape / rate).abs() < 3.0 * iid_se(&xs));
    assert!((v - shape / rate / rate).abs() < 3.0 * var_se(&xs));
}

#[test]
fn omega_proposal_mean_half_integer_series() {
    let prop = OmegaProposal::new(OmegaSeries::HalfInteger, 100).unwrap();
    let mut r = rng(40);
    let xs: Vec<f64> = (0..N).map(|_| prop.propose(&mut r)).collect();
    let (m, _) = mean_var(&xs);
    let se = iid_se(&xs);
    assert!((m - prop.mean()).abs() < 3.0 * se);
    assert!((m - 1.0).abs() < 3.0 * se, "{m}");
}

fn latent_draws(series: OmegaSeries, seed: u64) -> Vec<f64> {
    // beta = 0: omega always accepts, z | omega is half-normal.
    let mut r = rng(seed);
    let mut w = 1.0;
    (0..N)
        .map(|_| {
            let (nw, acc) = draw_omega(0.0, w, 100, series, &mut r).unwrap();
            assert!(acc);
            w = nw;
            draw_truncated_normal_plus(0.0, w, &mut r).unwrap()
        })
        .collect()
}

#[test]
fn omega_mixture_is_logistic() {
    let half_logistic = |x: f64| (x / 2.0).tanh();
    let mut xs = latent_draws(OmegaSeries::Logistic, 50);
    let d = ks_distance(&mut xs, half_logistic);
    assert!(d < 0.02, "KS {d}");

    // The half-integer series mixes to the hyperbolic secant law instead.
    let pi = std::f64::consts::PI;
    let half_sech = |x: f64| 4.0 / pi * (pi * x / 2.0).exp().atan() - 1.0;
    let mut ys = latent_draws(OmegaSeries::HalfInteger, 51);
    assert!(ks_distance(&mut ys, half_sech) < 0.02);
    assert!(ks_distance(&mut ys, half_logistic) > 0.05);
}

#[test]
fn beta_conditional_prior_only() {
    let d = SparseDesign::from_parts(0, vec![], vec![], players(2)).unwrap();
    let pen = PenaltySpec::new(vec![Penalty::Ridge { sigma: 1.5 }, Penalty::Laplace { lambda: 1.0 }]).unwrap();
    let mut r = rng(60);
    let draws: Vec<Vec<f64>> =
        (0..N).map(|_| draw_beta_conditional(&d, &[], &[], &[1.0, 1.0], 2.0, &pen, &mut r).unwrap()).collect();
    for (j, var) in [(0, 2.25), (1, 0.25)] {
        let xs: Vec<f64> = draws.iter().map(|b| b[j]).collect();
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 3.0 * iid_se(&xs));
        assert!((v - var).abs() < 3.0 * var_se(&xs), "col {j}: {v} vs {var}");
    }
}

#[test]
fn beta_conditional_two_coordinates() {
    let rows = vec![vec![1, 1], vec![1, -1], vec![0, 1], vec![1, 0]];
    let y = vec![1, -1, 1, 1];
    let d = dense_design(&rows, &y);
    let z = [0.7, 1.3, 0.2, 2.0];
    let omega = [1.0, 2.5, 0.8, 3.0];
    let tau2 = [1.0, 0.6];
    let lambda = 1.5;
    let pen = PenaltySpec::new(vec![Penalty::Ridge { sigma: 2.0 }, Penalty::GammaLasso { s: 1.0, r: 1.0 }]).unwrap();

    // Q = P + sum_i x_i x_i' / omega_i with folded rows y_i x_i
    let mut q = [[0.25, 0.0], [0.0, lambda * lambda / tau2[1]]];
    let mut rhs = [0.0; 2];
    for (i, row) in rows.iter().enumerate() {
        let x = [(row[0] * y[i]) as f64, (row[1] * y[i]) as f64];
        for a in 0..2 {
            rhs[a] += x[a] * z[i] / omega[i];
            for b in 0..2 {
                q[a][b] += x[a] * x[b] / omega[i];
            }
        }
    }
    let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
    let v = [[q[1][1] / det, -q[0][1] / det], [-q[1][0] / det, q[0][0] / det]];
    let mean = [v[0][0] * rhs[0] + v[0][1] * rhs[1], v[1][0] * rhs[0] + v[1][1] * rhs[1]];

    let mut r = rng(61);
    let draws: Vec<Vec<f64>> =
        (0..N).map(|_| draw_beta_conditional(&d, &z, &omega, &tau2, lambda, &pen, &mut r).unwrap()).collect();
    let cols: Vec<Vec<f64>> = (0..2).map(|j| draws.iter().map(|b| b[j]).collect()).collect();
    for j in 0..2 {
        let (m, var) = mean_var(&cols[j]);
        assert!((m - mean[j]).abs() < 3.0 * iid_se(&cols[j]), "mean {j}: {m} vs {}", mean[j]);
        assert!((var - v[j][j]).abs() < 3.0 * var_se(&cols[j]), "var {j}: {var} vs {}", v[j][j]);
    }
    let prods: Vec<f64> = draws.iter().map(|b| (b[0] - mean[0]) * (b[1] - mean[1])).collect();
    let (cov, _) = mean_var(&prods);
    assert!((cov - v[0][1]).abs() < 3.0 * iid_se(&prods), "cov {cov} vs {}", v[0][1]);
}

#[test]
fn beta_conditional_orthogonal_columns_decouple() {
    let rows = vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]];
    let d = dense_design(&rows, &[1, 1, -1, 1]);
    let pen = PenaltySpec::new(vec![Penalty::Ridge { sigma: 1.0 }; 2]).unwrap();
    let mut r = rng(62);
    let draws: Vec<Vec<f64>> = (0..N)
        .map(|_| draw_beta_conditional(&d, &[1.0, 0.5, 0.3, 2.0], &[1.0; 4], &[1.0; 2], 1.0, &pen, &mut r).unwrap())
        .collect();
    let a: Vec<f64> = draws.iter().map(|b| b[0]).collect();
    let b: Vec<f64> = draws.iter().map(|b| b[1]).collect();
    let (ma, va) = mean_var(&a);
    let (mb, vb) = mean_var(&b);
    let corr = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (N as f64 - 1.0) / (va * vb).sqrt();
    assert!(corr.abs() < 3.0 / (N as f64).sqrt(), "{corr}");
}

#[test]
fn beta_conditional_rejects_bad_latents() {
    let d = dense_design(&[vec![1]], &[1]);
    let pen = PenaltySpec::new(vec![Penalty::Laplace { lambda: 1.0 }]).unwrap();
    let mut r = rng(63);
    assert!(draw_beta_conditional(&d, &[1.0], &[0.0], &[1.0], 1.0, &pen, &mut r).is_err());
    assert!(draw_beta_conditional(&d, &[1.0, 2.0], &[1.0], &[1.0], 1.0, &pen, &mut r).is_err());
}

fn joint_check(pen: PenaltySpec, seed: u64) {
    let d = logistic_problem(&[0.6, -0.4], 200, seed);
    let cfg = GibbsConfig { n_samples: 10_000, burnin: 1_000, seed, ..Default::default() };
    let start = Instant::now();
    let draws = sample_posterior(&d, &pen, &cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "{elapsed}s");
    let fine = oracle_posterior_quadrature(&d, &pen, QuadGrid { lo: -3.0, hi: 3.0, n: 601 }, (cfg.a, cfg.b)).unwrap();
    let coarse = oracle_posterior_quadrature(&d, &pen, QuadGrid { lo: -3.0, hi: 3.0, n: 301 }, (cfg.a, cfg.b)).unwrap();
    for j in 0..2 {
        let col = draws.column(j);
        let (m, _) = mean_var(&col);
        let se = (batch_se(&col, 50).powi(2) + (fine.mean[j] - coarse.mean[j]).powi(2)).sqrt();
        assert!((m - fine.mean[j]).abs() < 3.0 * se, "coef {j}: gibbs {m} vs quadrature {} (se {se})", fine.mean[j]);
    }
    let rate = draws.omega_acceptance().unwrap();
    assert!(rate > 0.0 && rate <= 1.0);
}

#[test]
fn joint_posterior_matches_quadrature_l1_only() {
    joint_check(PenaltySpec::new(vec![Penalty::GammaLasso { s: 1.0, r: 0.5 }; 2]).unwrap(), 70);
}

#[test]
fn joint_posterior_matches_quadrature_mixed() {
    let pen = PenaltySpec::new(vec![Penalty::Ridge { sigma: 1.0 }, Penalty::GammaLasso { s: 1.0, r: 0.5 }]).unwrap();
    joint_check(pen, 71);
}

#[test]
fn two_seeds_agree() {
    let d = logistic_problem(&[0.8, 0.0, -0.5], 150, 80);
    let pen = PenaltySpec::new(vec![Penalty::GammaLasso { s: 1.0, r: 0.5 }; 3]).unwrap();
    let run = |seed| sample_posterior(&d, &pen, &GibbsConfig { n_samples: 5_000, burnin: 500, seed, ..Default::default() }).unwrap();
    let (a, b) = (run(1), run(2));
    assert_ne!(a.draw(0), b.draw(0));
    for j in 0..3 {
        let (ca, cb) = (a.column(j), b.column(j));
        let se = (batch_se(&ca, 50).powi(2) + batch_se(&cb, 50).powi(2)).sqrt();
        let diff = (mean_var(&ca).0 - mean_var(&cb).0).abs();
        assert!(diff < 4.0 * se, "coef {j}: {diff} vs se {se}");
    }
}

#[test]
fn single_positive_row_shifts_posterior_up() {
    let pen = PenaltySpec::new(vec![Penalty::Laplace { lambda: 1.0 }]).unwrap();
    let cfg = GibbsConfig { n_samples: 10_000, burnin: 500, seed: 90, ..Default::default() };
    let post = sample_posterior(&dense_design(&[vec![1]], &[1]), &pen, &cfg).unwrap();
    let empty = SparseDesign::from_parts(0, vec![], vec![], players(1)).unwrap();
    let prior = sample_posterior(&empty, &pen, &GibbsConfig { seed: 91, ..cfg }).unwrap();
    let p = mann_whitney_greater(&post.column(0), &prior.column(0));
    assert!(p < 0.01, "p = {p}");
}

#[test]
fn better_than_on_sampled_draws_is_complementary() {
    let d = logistic_problem(&[1.5, 0.0, -1.5], 600, 100);
    let pen = PenaltySpec::new(vec![Penalty::GammaLasso { s: 1.0, r: 0.5 }; 3]).unwrap();
    let draws = sample_posterior(&d, &pen, &GibbsConfig { n_samples: 2_000, burnin: 200, seed: 3, ..Default::default() }).unwrap();
    let ids: Vec<String> = (0..3).map(|k| format!("p{k}")).collect();
    let m = better_than_matrix(&draws, &ids).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(m.probability[i][j] + m.probability[j][i], 1.0);
        }
    }
    // ordered by posterior mean
    let mean = draws.mean();
    assert!(mean[0] > mean[1] && mean[1] > mean[2], "{mean:?}");
    assert!(m.probability[0][1] > 0.5 && m.probability[1][2] > 0.5 && m.probability[0][2] >= m.probability[0][1]);
}
