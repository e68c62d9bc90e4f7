//! Central finite differences, used as an independent check of `backward`.

use super::Tensor;
use crate::error::Result;

/// Relative disagreement between the step-`h` and step-`h/2` central
/// differences above which a coordinate's stencil is taken to straddle a kink.
pub const KINK_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, floor)`
    /// over the smooth coordinates.
    pub max_rel_error: f64,
    pub worst_tensor: usize,
    pub worst_index: usize,
    pub checked: usize,
    /// Coordinates skipped because the two step sizes disagreed, which
    /// happens when a relu input lies within `h` of zero.
    pub nonsmooth: usize,
}

/// Compares `analytic` gradients against central differences of `f` with
/// step `h`, perturbing every element of every tensor in `params`.
pub fn check_gradients<F>(
    params: &mut [Tensor],
    analytic: &[Vec<f64>],
    h: f64,
    floor: f64,
    mut f: F,
) -> Result<GradCheck>
where
    F: FnMut(&[Tensor]) -> Result<f64>,
{
    let mut out = GradCheck {
        max_rel_error: 0.0,
        worst_tensor: 0,
        worst_index: 0,
        checked: 0,
        nonsmooth: 0,
    };
    let mut central = |params: &mut [Tensor], t: usize, k: usize, step: f64| -> Result<f64> {
        let orig = params[t].values[k];
        params[t].values[k] = orig + step;
        let up = f(params)?;
        params[t].values[k] = orig - step;
        let down = f(params)?;
        params[t].values[k] = orig;
        Ok((up - down) / (2.0 * step))
    };
    for t in 0..params.len() {
        for k in 0..params[t].len() {
            let numeric = central(params, t, k, h)?;
            let half = central(params, t, k, h / 2.0)?;
            out.checked += 1;
            if (numeric - half).abs() > KINK_THRESHOLD * numeric.abs().max(half.abs()).max(floor) {
                out.nonsmooth += 1;
                continue;
            }
            let a = analytic[t][k];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
            if rel > out.max_rel_error {
                out.max_rel_error = rel;
                out.worst_tensor = t;
                out.worst_index = k;
            }
        }
    }
    Ok(out)
}
