//! Empirical Gateaux influence approximation for one-dimensional densities.
//!
//! The base density is mixed with a Gaussian kernel centred at the query
//! point, `(1 - eps) p + eps K_lambda(. - x0)`, and the finite difference of
//! `int p^2` along that path is reported. Integrals use the trapezoid rule on
//! a fixed uniform grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateauxConfig {
    /// Mixture weight of the kernel perturbation, in `(0, 1)`.
    pub epsilon: f64,
    /// Kernel bandwidth (standard deviation).
    pub bandwidth: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_nodes: usize,
}

impl GateauxConfig {
    pub fn new(epsilon: f64, bandwidth: f64) -> Result<Self> {
        let cfg = Self {
            epsilon,
            bandwidth,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "perturbation mass must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "kernel bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        if !(self.grid_max > self.grid_min) || self.grid_nodes < 2 {
            return Err(Error::InvalidConfig("quadrature grid is empty".into()));
        }
        Ok(())
    }
}

impl Default for GateauxConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            bandwidth: 0.1,
            grid_min: -8.0,
            grid_max: 8.0,
            grid_nodes: 4001,
        }
    }
}

/// Density values on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

const MASS_TOLERANCE: f64 = 1e-6;

fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn uniform_nodes(cfg: &GateauxConfig) -> Vec<f64> {
    let h = (cfg.grid_max - cfg.grid_min) / (cfg.grid_nodes - 1) as f64;
    (0..cfg.grid_nodes)
        .map(|i| cfg.grid_min + h * i as f64)
        .collect()
}

impl DensityGrid {
    /// Tabulates `values` on the grid of `cfg`; rejects negative or
    /// improperly normalized densities.
    pub fn new(cfg: &GateauxConfig, values: Vec<f64>) -> Result<Self> {
        cfg.validate()?;
        if values.len() != cfg.grid_nodes {
            return Err(Error::DimensionMismatch {
                what: "density grid",
                expected: cfg.grid_nodes,
                got: values.len(),
            });
        }
        let grid = Self {
            nodes: uniform_nodes(cfg),
            values,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn gaussian(mu: f64, sigma: f64, cfg: &GateauxConfig) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("scale must be positive, got {sigma}")));
        }
        cfg.validate()?;
        let values = uniform_nodes(cfg)
            .iter()
            .map(|&x| normal_pdf(x, mu, sigma))
            .collect();
        Self::new(cfg, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn validate(&self) -> Result<()> {
        if self.values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("density is negative or non-finite on the grid".into()));
        }
        let mass = self.integrate(|v| v);
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Domain(format!(
                "density integrates to {mass} on the grid"
            )));
        }
        Ok(())
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        trapezoid(&self.nodes, self.values.iter().map(|&v| f(v)))
    }

    /// `int p^2` by the trapezoid rule.
    pub fn expected_density(&self) -> f64 {
        self.integrate(|v| v * v)
    }

    /// Mixture `(1 - eps) p + eps N(x0, lambda^2)`.
    pub fn perturbed(&self, x0: f64, cfg: &GateauxConfig) -> Result<Self> {
        cfg.validate()?;
        let eps = cfg.epsilon;
        let values = self
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&x, &p)| (1.0 - eps) * p + eps * normal_pdf(x, x0, cfg.bandwidth))
            .collect();
        let out = Self {
            nodes: self.nodes.clone(),
            values,
        };
        out.validate()?;
        Ok(out)
    }

    /// Mass of the density on the grid.
    pub fn mass(&self) -> f64 {
        self.integrate(|v| v)
    }
}

fn trapezoid(nodes: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let h = nodes[1] - nodes[0];
    let n = nodes.len();
    let mut acc = 0.0;
    for (i, v) in values.enumerate() {
        acc += if i == 0 || i + 1 == n { 0.5 * v } else { v };
    }
    acc * h
}

/// Finite-difference influence of `int p^2` at `x0` along the kernel mixture.
pub fn gateaux_if(base: &DensityGrid, x0: f64, cfg: &GateauxConfig) -> Result<f64> {
    if !x0.is_finite() {
        return Err(Error::NonFinite("query point"));
    }
    let pert = base.perturbed(x0, cfg)?;
    Ok((pert.expected_density() - base.expected_density()) / cfg.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::nonparametric_expected_density_if;

    #[test]
    fn gaussian_grid_has_unit_mass_and_exact_functional() {
        let cfg = GateauxConfig::default();
        let g = DensityGrid::gaussian(0.0, 1.0, &cfg).unwrap();
        assert!((g.mass() - 1.0).abs() < 1e-12);
        let want = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
        assert!((g.expected_density() - want).abs() < 1e-10);
    }

    #[test]
    fn small_kernel_and_mass_approach_the_nonparametric_if() {
        let cfg = GateauxConfig::new(1e-4, 0.01).unwrap();
        let g = DensityGrid::gaussian(0.0, 1.0, &cfg).unwrap();
        let got = gateaux_if(&g, 0.0, &cfg).unwrap();
        let want = nonparametric_expected_density_if(0.0, 1.0, 0.0);
        assert!((want - 0.2337).abs() < 1e-4);
        // Leading bias terms are eps * int K^2 and O(lambda^2).
        let k2 = 1.0 / (2.0 * 0.01 * std::f64::consts::PI.sqrt());
        assert!((got - want - 1e-4 * k2).abs() < 1e-3, "{got} vs {want}");
    }

    #[test]
    fn hyperparameters_move_the_answer() {
        let g = DensityGrid::gaussian(0.0, 1.0, &GateauxConfig::default()).unwrap();
        let a = gateaux_if(&g, 0.0, &GateauxConfig::new(0.05, 0.5).unwrap()).unwrap();
        let b = gateaux_if(&g, 0.0, &GateauxConfig::new(0.005, 0.1).unwrap()).unwrap();
        assert!((a - b).abs() / b.abs() > 0.1, "{a} vs {b}");
    }

    #[test]
    fn perturbed_mass_is_one() {
        let g = DensityGrid::gaussian(0.3, 1.2, &GateauxConfig::default()).unwrap();
        for &(eps, lam) in &[(0.5, 0.5), (0.1, 0.02), (0.004, 0.004), (0.9, 1.0)] {
            let cfg = GateauxConfig::new(eps, lam).unwrap();
            let p = g.perturbed(-1.5, &cfg).unwrap();
            assert!((p.mass() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(GateauxConfig::new(0.0, 0.1).is_err());
        assert!(GateauxConfig::new(1.0, 0.1).is_err());
        assert!(GateauxConfig::new(0.1, 0.0).is_err());
        let cfg = GateauxConfig::default();
        let mut v = DensityGrid::gaussian(0.0, 1.0, &cfg).unwrap().values().to_vec();
        v[2000] = -1.0;
        assert!(matches!(DensityGrid::new(&cfg, v), Err(Error::Domain(_))));
        let half: Vec<f64> = DensityGrid::gaussian(0.0, 1.0, &cfg)
            .unwrap()
            .values()
            .iter()
            .map(|v| v * 0.5)
            .collect();
        assert!(matches!(DensityGrid::new(&cfg, half), Err(Error::Domain(_))));
    }
}
