//! The mixture posterior family: each component is an independent product of
//! two Dirichlets (growth and evolution weights) and two Gammas (event rates).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::special::lgamma;
use crate::error::{Error, Result};
use crate::generator::{sample_categorical, sample_dirichlet, sample_gamma, Theta};

/// Lower clamp applied to simplex coordinates before taking logs.
pub const SIMPLEX_FLOOR: f64 = 1e-6;

pub fn dirichlet_log_pdf(x: &[f64; 3], conc: &[f64; 3]) -> f64 {
    let total: f64 = conc.iter().sum();
    lgamma(total)
        + conc
            .iter()
            .zip(x)
            .map(|(&a, &xj)| (a - 1.0) * xj.ln() - lgamma(a))
            .sum::<f64>()
}

/// Gamma log-density with shape `a` and rate `b`.
pub fn gamma_log_pdf(x: f64, a: f64, b: f64) -> f64 {
    a * b.ln() - lgamma(a) + (a - 1.0) * x.ln() - b * x
}

/// Clamps a simplex point away from the boundary and renormalizes.
pub fn clamp_simplex(x: &[f64; 3]) -> [f64; 3] {
    let mut y = x.map(|v| v.clamp(SIMPLEX_FLOOR, 1.0 - 2.0 * SIMPLEX_FLOOR));
    let s: f64 = y.iter().sum();
    y.iter_mut().for_each(|v| *v /= s);
    y
}

/// Theta prepared for density evaluation; errors when a rate is not positive
/// or a weight vector is not a probability vector.
pub fn density_point(theta: &Theta) -> Result<(f64, f64, [f64; 3], [f64; 3])> {
    for (name, x) in [("lambda_g", theta.lambda_g), ("lambda_e", theta.lambda_e)] {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Contract(format!(
                "{name} = {x} outside the density support"
            )));
        }
    }
    for (name, w) in [("alpha", theta.alpha), ("beta", theta.beta)] {
        let s: f64 = w.iter().sum();
        if w.iter().any(|&v| !(v >= 0.0)) || (s - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!(
                "{name} = {w:?} is not a probability vector"
            )));
        }
    }
    Ok((
        theta.lambda_g,
        theta.lambda_e,
        clamp_simplex(&theta.alpha),
        clamp_simplex(&theta.beta),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub alpha_conc: [f64; 3],
    pub beta_conc: [f64; 3],
    pub g_shape: f64,
    pub g_rate: f64,
    pub e_shape: f64,
    pub e_rate: f64,
}

impl MixtureComponent {
    /// Log-density of this component alone (mixture weight excluded).
    pub fn log_density(&self, lg: f64, le: f64, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        dirichlet_log_pdf(a, &self.alpha_conc)
            + dirichlet_log_pdf(b, &self.beta_conc)
            + gamma_log_pdf(lg, self.g_shape, self.g_rate)
            + gamma_log_pdf(le, self.e_shape, self.e_rate)
    }

    /// Marginal means in [`Theta::to_array`] order.
    pub fn mean(&self) -> [f64; 8] {
        let sa: f64 = self.alpha_conc.iter().sum();
        let sb: f64 = self.beta_conc.iter().sum();
        [
            self.g_shape / self.g_rate,
            self.e_shape / self.e_rate,
            self.alpha_conc[0] / sa,
            self.alpha_conc[1] / sa,
            self.alpha_conc[2] / sa,
            self.beta_conc[0] / sb,
            self.beta_conc[1] / sb,
            self.beta_conc[2] / sb,
        ]
    }
}

/// A fitted approximate posterior for one observed graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureDensityParams {
    pub components: Vec<MixtureComponent>,
}

impl MixtureDensityParams {
    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    /// `log sum_k w_k p_k(theta)`, via log-sum-exp.
    pub fn log_prob(&self, theta: &Theta) -> Result<f64> {
        let (lg, le, a, b) = density_point(theta)?;
        let terms: Vec<f64> = self
            .components
            .iter()
            .map(|c| c.weight.ln() + c.log_density(lg, le, &a, &b))
            .collect();
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return Ok(m);
        }
        Ok(m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Theta {
        let k = sample_categorical(&self.weights(), rng);
        let c = &self.components[k];
        Theta {
            lambda_g: sample_gamma(c.g_shape, 1.0 / c.g_rate, rng),
            lambda_e: sample_gamma(c.e_shape, 1.0 / c.e_rate, rng),
            alpha: sample_dirichlet(&c.alpha_conc, rng),
            beta: sample_dirichlet(&c.beta_conc, rng),
        }
    }

    /// Analytic marginal means of the mixture.
    pub fn mean(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for c in &self.components {
            for (o, m) in out.iter_mut().zip(c.mean()) {
                *o += c.weight * m;
            }
        }
        out
    }
}
