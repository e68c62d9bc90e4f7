use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter names in the order used by [`Theta::to_array`] and every table.
pub const PARAM_NAMES: [&str; 8] = [
    "lambda_g",
    "lambda_e",
    "alpha_ra",
    "alpha_pa",
    "alpha_npa",
    "beta_tf",
    "beta_npa_pa",
    "beta_ra_pa",
];

const SIMPLEX_TOL: f64 = 1e-12;

/// Event rates and mechanism weights of the mixture-of-mechanisms model.
///
/// `alpha` weights growth mechanisms (RA, PA, NPA); `beta` weights evolution
/// mechanisms (TF, NPA-PA, RA-PA).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub lambda_g: f64,
    pub lambda_e: f64,
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
}

impl Theta {
    pub fn new(lambda_g: f64, lambda_e: f64, alpha: [f64; 3], beta: [f64; 3]) -> Result<Self> {
        let t = Theta {
            lambda_g,
            lambda_e,
            alpha,
            beta,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("lambda_g", self.lambda_g), ("lambda_e", self.lambda_e)] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::Contract(format!(
                    "{name} = {x} is not a nonnegative rate"
                )));
            }
        }
        for (name, w) in [("alpha", self.alpha), ("beta", self.beta)] {
            let s: f64 = w.iter().sum();
            if w.iter().any(|&x| !(x >= 0.0)) || (s - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::Contract(format!(
                    "{name} = {w:?} is not on the simplex"
                )));
            }
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 8] {
        let (a, b) = (self.alpha, self.beta);
        [
            self.lambda_g,
            self.lambda_e,
            a[0],
            a[1],
            a[2],
            b[0],
            b[1],
            b[2],
        ]
    }

    pub fn from_array(x: [f64; 8]) -> Self {
        Theta {
            lambda_g: x[0],
            lambda_e: x[1],
            alpha: [x[2], x[3], x[4]],
            beta: [x[5], x[6], x[7]],
        }
    }

    /// Simulation scenarios with one dominant mechanism of each kind.
    /// Scenario 1: RA + NPA-PA; 2: PA + TF; 3: PA + RA-PA.
    pub fn scenario(n: usize) -> Option<Theta> {
        let (hi, lo) = (0.95, 0.025);
        let (alpha, beta) = match n {
            1 => ([hi, lo, lo], [lo, hi, lo]),
            2 => ([lo, hi, lo], [hi, lo, lo]),
            3 => ([lo, hi, lo], [lo, lo, hi]),
            _ => return None,
        };
        Some(Theta {
            lambda_g: 5.0,
            lambda_e: 5.0,
            alpha,
            beta,
        })
    }
}

/// How the two numbers of a `Gamma(a, b)` prior are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaParameterization {
    ShapeScale,
    ShapeRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Prior {
    pub rate_shape: f64,
    pub rate_second: f64,
    pub parameterization: GammaParameterization,
    pub dirichlet_concentration: f64,
}

impl Default for Prior {
    /// Gamma(2, 2) on both rates (shape/scale, mean 4), Dirichlet(0.5, 0.5, 0.5) on both weight vectors.
    fn default() -> Self {
        Prior {
            rate_shape: 2.0,
            rate_second: 2.0,
            parameterization: GammaParameterization::ShapeScale,
            dirichlet_concentration: 0.5,
        }
    }
}

impl Prior {
    pub fn rate_scale(&self) -> f64 {
        match self.parameterization {
            GammaParameterization::ShapeScale => self.rate_second,
            GammaParameterization::ShapeRate => 1.0 / self.rate_second,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.rate_shape) && ok(self.rate_second) && ok(self.dirichlet_concentration) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "prior parameters must be positive: {self:?}"
            )))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Theta {
        let scale = self.rate_scale();
        let c = self.dirichlet_concentration;
        Theta {
            lambda_g: sample_gamma(self.rate_shape, scale, rng),
            lambda_e: sample_gamma(self.rate_shape, scale, rng),
            alpha: sample_dirichlet(&[c; 3], rng),
            beta: sample_dirichlet(&[c; 3], rng),
        }
    }
}

pub fn sample_prior<R: Rng + ?Sized>(rng: &mut R) -> Theta {
    Prior::default().sample(rng)
}

pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, scale)
        .expect("gamma parameters")
        .sample(rng)
}

/// `ln G` for `G ~ Gamma(shape, 1)`, accurate for shapes far below 1 where
/// `G` itself underflows.
fn sample_log_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        return sample_gamma(shape, 1.0, rng).ln();
    }
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    let g = sample_gamma(shape + 1.0, 1.0, rng).ln();
    let u: f64 = rng.random::<f64>();
    g + u.max(f64::MIN_POSITIVE).ln() / shape
}

/// Dirichlet draw via normalized log-gammas; stable for tiny concentrations.
pub fn sample_dirichlet<R: Rng + ?Sized, const N: usize>(conc: &[f64; N], rng: &mut R) -> [f64; N] {
    let mut logs = [0.0; N];
    for (l, &a) in logs.iter_mut().zip(conc) {
        *l = sample_log_gamma(a, rng);
    }
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; N];
    let mut s = 0.0;
    for (o, l) in out.iter_mut().zip(&logs) {
        *o = (l - m).exp();
        s += *o;
    }
    out.iter_mut().for_each(|o| *o /= s);
    out
}

/// Poisson draw; zero rate gives zero.
pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda < 30.0 {
        // inversion by sequential search
        let mut k = 0u64;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        let u: f64 = rng.random();
        while u > cdf {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
            if p < 1e-300 && cdf < u {
                break;
            }
        }
        return k;
    }
    rand_distr::Poisson::new(lambda)
        .expect("poisson rate")
        .sample(rng) as u64
}

/// Index drawn from unnormalized nonnegative weights.
pub fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}
