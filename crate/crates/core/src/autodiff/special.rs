//! Log-gamma and its first two derivatives.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln |Γ(x)|` (Lanczos, g = 7, with reflection below 1/2).
pub fn lgamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.5 {
        // Γ(x) Γ(1 - x) = π / sin(πx)
        return (PI / (PI * x).sin()).abs().ln() - lgamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// ψ(x), the derivative of `lgamma`.
pub fn digamma(x: f64) -> f64 {
    if x.is_nan() || (x <= 0.0 && x == x.floor()) {
        return f64::NAN;
    }
    if x < 0.0 {
        // ψ(1 - x) - ψ(x) = π cot(πx)
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number asymptotic series
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    acc + x.ln() - 0.5 * inv - series
}

/// ψ'(x), the derivative of `digamma`. Defined for `x > 0`.
pub fn trigamma(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        + 0.5 * inv2
        + inv
            * inv2
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))));
    acc + series
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        assert_relative_eq!(lgamma(3.0), 2f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(lgamma(1.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(lgamma(0.5), PI.sqrt().ln(), epsilon = 1e-14);
        assert_relative_eq!(digamma(1.0), -0.577_215_664_901_532_9, epsilon = 1e-13);
        assert_relative_eq!(trigamma(1.0), PI * PI / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn lgamma_recurrence() {
        let mut x = 0.1;
        while x <= 50.0 {
            let lhs = lgamma(x + 1.0);
            let rhs = lgamma(x) + x.ln();
            assert!((lhs - rhs).abs() < 1e-10, "x = {x}: {lhs} vs {rhs}");
            x += 0.037;
        }
    }

    #[test]
    fn against_statrs() {
        for i in 1..400 {
            let x = i as f64 * 0.137;
            assert_relative_eq!(
                lgamma(x),
                statrs::function::gamma::ln_gamma(x),
                epsilon = 1e-12,
                max_relative = 1e-12
            );
            assert_relative_eq!(
                digamma(x),
                statrs::function::gamma::digamma(x),
                epsilon = 1e-11,
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn derivatives_by_central_differences() {
        for &x in &[1e-3f64, 0.04, 0.7, 1.0, 3.3, 12.0, 80.0] {
            let h = 1e-6 * x.max(1.0);
            let d = (lgamma(x + h) - lgamma(x - h)) / (2.0 * h);
            assert_relative_eq!(digamma(x), d, max_relative = 1e-6);
            let t = (digamma(x + h) - digamma(x - h)) / (2.0 * h);
            assert_relative_eq!(trigamma(x), t, max_relative = 1e-5);
        }
    }
}
