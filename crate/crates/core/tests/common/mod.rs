#![allow(dead_code)]

use mceif::{CausalGlm, Gaussian1D, Matrix, MvnCov, Params, SeededRng};

pub fn normal_vec(rng: &mut SeededRng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.standard_normal()).collect()
}

pub fn random_gaussian_params(rng: &mut SeededRng) -> Params {
    Params::from_f64(&[rng.standard_normal(), 0.5 + 1.5 * rng.uniform()]).unwrap()
}

pub fn random_causal_params(model: &CausalGlm, rng: &mut SeededRng) -> Params {
    let p = model.layout().param_dim();
    let scale = 1.0 / (model.confounders() as f64).sqrt();
    Params::from_f64(&normal_vec(rng, p, scale)).unwrap()
}

pub fn random_mvn_params(model: &MvnCov, rng: &mut SeededRng) -> Params {
    let p = MvnCov::param_count(model.dim());
    Params::from_f64(&normal_vec(rng, p, 0.3)).unwrap()
}

pub fn unknown_sigma() -> Gaussian1D {
    Gaussian1D::unknown_sigma()
}

/// Dense `(1/M) J^T J + lambda I` from an explicit score matrix.
pub fn dense_fisher(scores: &[f64], p: usize, lambda: f64) -> Matrix<f64> {
    let m = scores.len() / p;
    Matrix::from_fn(p, p, |i, j| {
        let s: f64 = scores.chunks_exact(p).map(|g| g[i] * g[j]).sum();
        s / m as f64 + if i == j { lambda } else { 0.0 }
    })
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}
