mod common;

use common::{random_causal_params, random_gaussian_params, random_mvn_params};
use mceif::fdcheck::{check_score, FD_STEP, FD_TOLERANCE};
use mceif::models::*;
use mceif::{CausalGlm, Cholesky, Gaussian1D, Matrix, Model, MvnCov, Params, SeededRng};
use proptest::prelude::*;

/// Every coordinate of the sample mean of the score lies within `z` standard
/// errors of zero.
fn score_mean_in_band(model: &dyn Model<f64>, phi: &[f64], k: usize, seed: u64, z: f64) -> bool {
    let data = model.sample(phi, &mut SeededRng::new(seed), k).unwrap();
    let p = model.param_dim();
    let mut sum = vec![0.0; p];
    let mut sq = vec![0.0; p];
    for x in data.rows() {
        for (j, s) in model.score(phi, x).unwrap().into_iter().enumerate() {
            sum[j] += s;
            sq[j] += s * s;
        }
    }
    let n = k as f64;
    (0..p).all(|j| {
        let mean = sum[j] / n;
        let sd = (sq[j] / n - mean * mean).max(0.0).sqrt();
        mean.abs() <= z * sd / n.sqrt() + 1e-12
    })
}

#[test]
fn scores_have_mean_zero() {
    let mut rng = SeededRng::new(100);
    let gauss = Gaussian1D::unknown_sigma();
    let known = Gaussian1D::known_sigma(1.5).unwrap();
    let glm = CausalGlm::new(3).unwrap();
    let mvn = MvnCov::new(3).unwrap();
    // 4-sigma bands: each check covers several coordinates over 10 draws of phi.
    for i in 0..10 {
        let seed = 1000 + i;
        let g = random_gaussian_params(&mut rng);
        assert!(score_mean_in_band(&gauss, &g, 20_000, seed, 4.0));
        assert!(score_mean_in_band(&known, &g[..1], 20_000, seed, 4.0));
        let c = random_causal_params(&glm, &mut rng);
        assert!(score_mean_in_band(&glm, &c, 20_000, seed, 4.0));
        let m = random_mvn_params(&mvn, &mut rng);
        assert!(score_mean_in_band(&mvn, &m, 20_000, seed, 4.0));
    }
}

#[test]
fn scores_pass_finite_difference_checks() {
    let mut rng = SeededRng::new(200);
    let gauss = Gaussian1D::unknown_sigma();
    let glm = CausalGlm::new(4).unwrap();
    let mvn = MvnCov::with_mean(vec![0.5, -1.0, 0.0]).unwrap();
    for i in 0..10 {
        let g = random_gaussian_params(&mut rng);
        let x = gauss.sample(&g, &mut SeededRng::new(i), 1).unwrap();
        let r = check_score(&gauss, &g, x.row(0), FD_STEP).unwrap();
        assert!(r.passes(FD_TOLERANCE), "gaussian {r:?}");

        let c = random_causal_params(&glm, &mut rng);
        for t in [0.0, 1.0] {
            let mut x = glm.sample(&c, &mut SeededRng::new(i), 1).unwrap().row(0).to_vec();
            x[4] = t;
            let r = check_score(&glm, &c, &x, FD_STEP).unwrap();
            assert!(r.passes(FD_TOLERANCE), "glm {r:?}");
        }

        let m = random_mvn_params(&mvn, &mut rng);
        let x = mvn.sample(&m, &mut SeededRng::new(i), 1).unwrap();
        let r = check_score(&mvn, &m, x.row(0), FD_STEP).unwrap();
        assert!(r.passes(FD_TOLERANCE), "mvn {r:?}");
    }
}

#[test]
fn propensity_score_block_at_treated() {
    let glm = CausalGlm::new(2).unwrap();
    let phi = Params::from_f64(&[0.0, 0.0, 0.0, 0.7, -0.4, 0.0]).unwrap();
    let c = [1.2, 0.5];
    let u: f64 = 0.7 * 1.2 - 0.4 * 0.5;
    let sig = 1.0 / (1.0 + (-u).exp());
    let s = glm.score(&phi, &[c[0], c[1], 1.0, 0.0]).unwrap();
    let lay = glm.layout();
    for (j, cj) in c.iter().enumerate() {
        assert!((s[lay.propensity_weights().start + j] - (1.0 - sig) * cj).abs() < 1e-14);
    }
}

#[test]
fn treatment_rate_matches_propensity_by_bin() {
    let glm = CausalGlm::new(3).unwrap();
    let phi = Params::from_f64(&[0.0, 0.0, 0.0, 0.0, 0.8, -0.5, 0.6, 0.0]).unwrap();
    let data = glm.sample(&phi, &mut SeededRng::new(5), 60_000).unwrap();
    let mut rows: Vec<(f64, f64)> = data
        .rows()
        .map(|x| (glm.propensity(&phi, &x[..3]), x[3]))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for bin in rows.chunks(rows.len() / 10) {
        let n = bin.len() as f64;
        let expect = bin.iter().map(|r| r.0).sum::<f64>() / n;
        let seen = bin.iter().map(|r| r.1).sum::<f64>() / n;
        let var = bin.iter().map(|r| r.0 * (1.0 - r.0)).sum::<f64>() / (n * n);
        assert!((seen - expect).abs() <= 4.0 * var.sqrt(), "{seen} vs {expect}");
    }
}

#[test]
fn mvn_identity_score_at_origin() {
    let mvn = MvnCov::new(3).unwrap();
    let phi = Params::zeros(6);
    let s = mvn.score(&phi, &[0.0, 0.0, 0.0]).unwrap();
    for i in 0..3 {
        for j in 0..i {
            assert_eq!(s[MvnCov::index(i, j)], 0.0);
        }
        // d/d log L_ii of -log|Sigma|/2 at x = 0.
        assert_eq!(s[MvnCov::index(i, i)], -1.0);
    }
}

#[test]
fn lkj_draws_are_correlation_matrices() {
    let mut rng = SeededRng::new(6);
    for d in [2, 5, 25] {
        let r: Matrix<f64> = lkj_onion(d, &mut rng).unwrap();
        for i in 0..d {
            assert!((r[(i, i)] - 1.0).abs() < 1e-12);
            for j in 0..d {
                assert!((r[(i, j)] - r[(j, i)]).abs() < 1e-14);
            }
        }
        assert!(Cholesky::factor(&r).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mvn_round_trip(seed in 0u64..10_000, d in 1usize..6) {
        let mvn = MvnCov::new(d).unwrap();
        let phi = random_mvn_params(&mvn, &mut SeededRng::new(seed));
        let sigma = mvn.covariance(&phi).unwrap();
        let back = mvn.params_from_covariance(&sigma).unwrap();
        for (a, b) in phi.iter().zip(back.iter()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn gaussian_rejects_non_positive_scale(mu in -5.0f64..5.0, s in -3.0f64..=0.0) {
        let g = Gaussian1D::unknown_sigma();
        prop_assert!(g.log_prob(&[mu, s], &[0.0]).is_err());
        prop_assert!(g.score(&[mu, s], &[0.0]).is_err());
    }
}
