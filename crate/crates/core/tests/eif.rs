mod common;

use common::rel_err;
use mceif::analytic::{causal_glm_fisher, expected_density_eif, gaussian_fisher, ExactEif};
use mceif::{
    AteFunctional, CausalGlm, Cholesky, EifConfig, EifEvaluator, ExpectedDensity, FisherMode, FisherOperator, Functional,
    Gaussian1D, GradientMode, InfluenceFunction, Matrix, Model, ObservationBatch, Params, SeededRng,
};

const GRID: [f64; 7] = [-3.0, -2.0, -0.5, 0.0, 0.5, 2.0, 3.0];

fn standard() -> (Gaussian1D, Params) {
    (Gaussian1D::unknown_sigma(), Params::from_f64(&[0.0, 1.0]).unwrap())
}

#[test]
fn mc_eif_matches_closed_form_for_unknown_scale() {
    let (model, phi) = standard();
    for mode in [GradientMode::Analytic, GradientMode::MonteCarlo] {
        let f = ExpectedDensity::new(model, mode);
        let eif = EifEvaluator::build(&model, &f, &phi, 10_000, &mut SeededRng::new(1), &EifConfig::default()).unwrap();
        let mut errs: Vec<f64> = GRID
            .iter()
            .map(|&x| {
                let exact = expected_density_eif(0.0, 1.0, x);
                (eif.evaluate(&[x]).unwrap()[0] - exact).abs() / exact.abs()
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        assert!(errs[3] <= 0.05, "{mode:?}: median {}", errs[3]);
        assert!(eif.evaluate(&[1.0]).unwrap()[0].abs() <= 0.02);
        let at0 = eif.evaluate(&[0.0]).unwrap()[0];
        assert!((at0 - 0.141_047).abs() / 0.141_047 <= 0.05);
        assert!(eif.diagnostics().all_converged());
        assert_eq!(eif.diagnostics().cg_iters_per_row.len(), 1);
    }
}

#[test]
fn known_scale_gives_an_identically_zero_eif() {
    let model = Gaussian1D::known_sigma(1.0).unwrap();
    let f = ExpectedDensity::new(model, GradientMode::Analytic);
    let phi = Params::from_f64(&[0.3]).unwrap();
    let eif = EifEvaluator::build(&model, &f, &phi, 1_000, &mut SeededRng::new(2), &EifConfig::default()).unwrap();
    for x in [-5.0, -1.0, 0.0, 0.3, 2.0, 7.5] {
        assert_eq!(eif.evaluate(&[x]).unwrap(), vec![0.0]);
    }
    let check = eif.mean_zero_check(&mut SeededRng::new(3), 1_000).unwrap();
    assert_eq!(check.mean, vec![0.0]);
}

#[test]
fn coordinate_gradient_with_identity_fisher_returns_the_score() {
    // Scores chosen so that J^T J / M = I exactly.
    let model = CausalGlm::new(1).unwrap();
    let p = model.layout().param_dim();
    let phi = model.sparse_truth::<f64>(1);
    let mut j = vec![0.0; p * p];
    for i in 0..p {
        j[i * p + i] = (p as f64).sqrt();
    }
    let fisher = FisherOperator::from_scores(p, j, mceif::Damping::Absolute(0.0)).unwrap();
    let functional = AteFunctional::new(model, GradientMode::Analytic);
    let grad = Functional::<f64>::gradient(&functional, &phi, 1, &mut SeededRng::new(0)).unwrap();
    let eif = EifEvaluator::from_fisher(&model, &phi, &grad, &fisher, &Default::default()).unwrap();
    let data = model.sample(&phi, &mut SeededRng::new(4), 20).unwrap();
    let tau = model.layout().treatment();
    for x in data.rows() {
        let s = model.score(&phi, x).unwrap();
        assert!((eif.evaluate(x).unwrap()[0] - s[tau]).abs() < 1e-12);
    }
}

#[test]
fn batch_evaluation_equals_pointwise() {
    let (model, phi) = standard();
    let f = ExpectedDensity::new(model, GradientMode::MonteCarlo);
    let eif = EifEvaluator::build(&model, &f, &phi, 500, &mut SeededRng::new(5), &EifConfig::default()).unwrap();
    let xs = ObservationBatch::from_rows(&GRID.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap();
    let batch = eif.evaluate_batch(&xs).unwrap();
    for (i, x) in xs.rows().enumerate() {
        assert_eq!(batch.row(i), eif.evaluate(x).unwrap().as_slice());
    }
}

#[test]
fn transpose_solve_equals_per_point_formula() {
    for &(f, m) in &[(1usize, 60usize), (3, 100)] {
        let model = CausalGlm::new(f).unwrap();
        let p = model.layout().param_dim();
        assert!(p <= 8);
        let phi = model.sparse_truth::<f64>(f);
        let functional = AteFunctional::new(model, GradientMode::Analytic);
        let grad = Functional::<f64>::gradient(&functional, &phi, 1, &mut SeededRng::new(0)).unwrap();
        let fisher = FisherOperator::build(&model, &phi, m, &mut SeededRng::new(6), FisherMode::Cached, Default::default())
            .unwrap();
        let cfg = mceif::CgConfig {
            rel_tolerance: 1e-12,
            ..Default::default()
        };
        let eif = EifEvaluator::from_fisher(&model, &phi, &grad, &fisher, &cfg).unwrap();
        let ch = Cholesky::factor(&fisher.to_dense().unwrap()).unwrap();
        let data = model.sample(&phi, &mut SeededRng::new(7), 50).unwrap();
        let (mut got, mut want) = (Vec::new(), Vec::new());
        for x in data.rows() {
            let s = model.score(&phi, x).unwrap();
            let is = ch.solve(&s).unwrap();
            want.push(grad.row(0).iter().zip(&is).map(|(a, b)| a * b).sum::<f64>());
            got.push(eif.evaluate(x).unwrap()[0]);
        }
        assert!(rel_err(&got, &want) <= 1e-6, "p = {p}");
    }
}

#[test]
fn mean_zero_band_for_gaussian() {
    let (model, phi) = standard();
    let f = ExpectedDensity::new(model, GradientMode::MonteCarlo);
    let eif = EifEvaluator::build(&model, &f, &phi, 10_000, &mut SeededRng::new(8), &EifConfig::default()).unwrap();
    let check = eif.mean_zero_check(&mut SeededRng::new(9), 100_000).unwrap();
    assert!(check.within_band(3.0), "{check:?}");
}

#[test]
fn mean_zero_band_for_causal_glm() {
    let model = CausalGlm::new(5).unwrap();
    assert_eq!(model.layout().param_dim(), 12);
    let phi = model.sparse_truth::<f64>(5);
    let f = AteFunctional::new(model, GradientMode::MonteCarlo);
    let eif = EifEvaluator::build(&model, &f, &phi, 10_000, &mut SeededRng::new(10), &EifConfig::default()).unwrap();
    let check = eif.mean_zero_check(&mut SeededRng::new(11), 100_000).unwrap();
    assert!(check.within_band(3.0), "{check:?}");
}

#[test]
fn exact_eif_reproduces_the_closed_form() {
    let (model, phi) = standard();
    let f = ExpectedDensity::new(model, GradientMode::Analytic);
    let grad = Functional::<f64>::gradient(&f, &phi, 1, &mut SeededRng::new(0)).unwrap();
    let exact = ExactEif::new(&model, &phi, &grad, &gaussian_fisher(&model, &phi).unwrap()).unwrap();
    for &x in &GRID {
        assert!((exact.evaluate(&[x]).unwrap()[0] - expected_density_eif(0.0, 1.0, x)).abs() < 1e-14);
    }
}

#[test]
fn exact_causal_fisher_matches_a_large_sample() {
    let model = CausalGlm::new(3).unwrap();
    let phi = Params::from_f64(&[0.2, 0.5, -0.3, 0.1, 0.8, -0.6, 0.4, -0.4]).unwrap();
    let exact = causal_glm_fisher(&model, &phi).unwrap();
    let op = FisherOperator::build(&model, &phi, 400_000, &mut SeededRng::new(12), FisherMode::Cached, mceif::Damping::Absolute(0.0))
        .unwrap();
    let mc = op.to_dense().unwrap();
    assert!(mc.max_abs_diff(&exact) < 0.02, "{}", mc.max_abs_diff(&exact));
    assert!(exact.max_abs_diff(&exact.transpose()) == 0.0);
}

#[test]
fn builds_are_reproducible() {
    let model = CausalGlm::new(4).unwrap();
    let phi = model.sparse_truth::<f64>(4);
    let f = AteFunctional::new(model, GradientMode::MonteCarlo);
    let a = EifEvaluator::build(&model, &f, &phi, 2_000, &mut SeededRng::new(13), &EifConfig::default()).unwrap();
    let b = EifEvaluator::build(&model, &f, &phi, 2_000, &mut SeededRng::new(13), &EifConfig::default()).unwrap();
    assert_eq!(a.directions(), b.directions());
    let streaming = EifConfig {
        fisher_mode: FisherMode::Streaming,
        ..EifConfig::default()
    };
    let c = EifEvaluator::build(&model, &f, &phi, 2_000, &mut SeededRng::new(13), &streaming).unwrap();
    assert!(a.directions().max_abs_diff(c.directions()) <= 1e-12);
}

#[test]
fn solve_diagnostics_serialize() {
    let (model, phi) = standard();
    let f = ExpectedDensity::new(model, GradientMode::Analytic);
    let eif = EifEvaluator::build(&model, &f, &phi, 100, &mut SeededRng::new(14), &EifConfig::default()).unwrap();
    let json = serde_json::to_value(eif.diagnostics()).unwrap();
    assert_eq!(json["M"], 100);
    assert_eq!(json["L"], 1);
    assert_eq!(json["p"], 2);
}

#[test]
fn works_in_single_precision() {
    let model = Gaussian1D::unknown_sigma();
    let f = ExpectedDensity::new(model, GradientMode::Analytic);
    let phi = mceif::ParamVector::<f32>::from_f64(&[0.0, 1.0]).unwrap();
    let eif = EifEvaluator::build(&model, &f, &phi, 10_000, &mut SeededRng::new(15), &EifConfig::<f32>::default()).unwrap();
    let v = eif.evaluate(&[0.0f32]).unwrap()[0];
    assert!((v - 0.141_047).abs() < 0.01, "{v}");
    let m: Matrix<f32> = Matrix::identity(2);
    assert_eq!(m.trace(), 2.0f32);
}
