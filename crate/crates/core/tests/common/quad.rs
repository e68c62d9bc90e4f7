use mechnet::model::density::gamma_log_pdf;
use statrs::function::gamma::ln_gamma;

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Integral of a Gamma(shape, rate) density. For shape < 1 the variable on
/// `[0, 1]` is changed to `t = x^shape`, which removes the singularity at 0.
pub fn gamma_mass(shape: f64, rate: f64) -> f64 {
    let x_max = (shape + 40.0 * shape.sqrt() + 60.0) / rate;
    let direct = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            gamma_log_pdf(x, shape, rate).exp()
        }
    };
    let m = 1.0 / shape;
    let head = if shape >= 1.0 {
        simpson(direct, 0.0, 1.0, 200_000)
    } else {
        simpson(
            |t| {
                if t == 0.0 {
                    // limit of f(t^m) m t^(m-1) as t -> 0
                    return (shape * rate.ln() - ln_gamma(shape)).exp() * m;
                }
                let x = t.powf(m);
                (gamma_log_pdf(x, shape, rate) + m.ln() + (m - 1.0) * t.ln()).exp()
            },
            0.0,
            1.0,
            20_000,
        )
    };
    let tail = simpson(direct, 1.0, x_max.max(2.0), 200_000);
    head + tail
}

/// Midpoint rule over the 2-simplex in the (x1, x2) chart.
pub fn simplex_mass(density: impl Fn(&[f64; 3]) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n - i {
            // the lower triangle of cell (i, j); its upper partner when it fits
            let lower = [(i as f64 + 1.0 / 3.0) * h, (j as f64 + 1.0 / 3.0) * h];
            s += density(&[lower[0], lower[1], 1.0 - lower[0] - lower[1]]);
            if i + j + 1 < n {
                let upper = [(i as f64 + 2.0 / 3.0) * h, (j as f64 + 2.0 / 3.0) * h];
                s += density(&[upper[0], upper[1], 1.0 - upper[0] - upper[1]]);
            }
        }
    }
    s * h * h / 2.0
}
