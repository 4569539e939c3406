//! Gamma-family special functions on the real line.
//!
//! `ln_gamma` uses a Lanczos sum on [0.5, 15) and the Stirling series above,
//! `digamma`/`trigamma` use upward recurrence into the asymptotic regime.
//! The reciprocal Gamma function `1/Γ` is entire; [`rgamma_jet`] evaluates it
//! with its first two derivatives at any real argument, which is what the
//! Gamma-ratio Laplace exponents need at their removable singularities.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::Jet;

const LANCZOS_R: f64 = 10.900511;

const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_655_46e-5,
    1.051_423_785_817_219_742_10,
    -3.456_870_972_220_162_354_69,
    4.512_277_094_668_948_237_00,
    -2.982_852_253_235_766_557_21,
    1.056_397_115_771_267_130_77,
    -1.954_287_731_916_458_695_83e-1,
    1.709_705_434_044_412_243_07e-2,
    -5.719_261_174_043_056_812_83e-4,
    4.633_994_733_599_056_367_08e-6,
    -2.719_949_084_886_077_039_10e-9,
];

// ln(2 sqrt(e / pi))
const LN_TWO_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Natural log of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "ln_gamma requires finite x > 0, got {x}"
        )));
    }
    Ok(lgamma(x))
}

/// Unchecked `ln Γ(x)`; caller guarantees finite `x > 0`.
pub(crate) fn lgamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps full relative accuracy down to tiny x.
        return lgamma_lanczos(x + 1.0) - x.ln();
    }
    if x < 15.0 {
        lgamma_lanczos(x)
    } else {
        lgamma_stirling(x)
    }
}

fn lgamma_lanczos(x: f64) -> f64 {
    let s = LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |s, (i, &dk)| s + dk / (x + i as f64 - 1.0));
    s.ln() + LN_TWO_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_R).ln() - 1.0)
}

fn lgamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0)))));
    (x - 0.5) * (x.ln() - 1.0) - 0.5 + HALF_LN_2PI + series
}

/// Γ(x) for x > 0 (caller-checked).
pub(crate) fn gamma_pos(x: f64) -> f64 {
    lgamma(x).exp()
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Digamma Ψ(x) = Γ'(x)/Γ(x) away from the poles {0, −1, −2, …}.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("digamma requires finite x, got {x}")));
    }
    if is_pole(x) {
        return Err(Error::Domain(format!("digamma pole at x = {x}")));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    if x <= 0.0 {
        // Ψ(x) = Ψ(1 − x) − π cot(πx); reduce the angle first so that
        // large negative arguments do not lose the fractional part.
        let frac = x - x.round();
        return digamma_pos(1.0 - x) - PI / (PI * frac).tan();
    }
    digamma_pos(x)
}

fn digamma_pos(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    acc + x.ln() - 0.5 * inv - tail
}

/// Trigamma Ψ'(x) for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "trigamma requires finite x > 0, got {x}"
        )));
    }
    Ok(trigamma_pos(x))
}

pub(crate) fn trigamma_pos(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let tail = inv
        + 0.5 * inv2
        + inv
            * inv2
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))));
    acc + tail
}

/// Γ at a positive argument with derivatives: (Γ, ΓΨ, Γ(Ψ² + Ψ')).
pub(crate) fn gamma_jet(x: f64) -> Jet {
    let g = gamma_pos(x);
    let psi = digamma_pos(x);
    let psi1 = trigamma_pos(x);
    Jet::new(g, g * psi, g * (psi * psi + psi1))
}

/// 1/Γ(x) with first and second derivatives, for any real x.
///
/// For x < 0.5 the argument is shifted to y = x + n ≥ 0.5 and
/// 1/Γ(x) = P(x)/Γ(y) with P(x) = x(x+1)…(x+n−1), so zeros at the
/// non-positive integers come out exactly from the polynomial factor.
pub(crate) fn rgamma_jet(x: f64) -> Jet {
    if x < -30.0 {
        // Reflection: 1/Γ(x) = Γ(1 − x) sin(πx) / π.
        let n = x.round();
        let sign = if n.rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
        let f = PI * (x - n);
        let s = Jet::new(sign * f.sin() / PI, sign * f.cos(), -sign * PI * f.sin());
        return gamma_jet(1.0 - x).chain_affine(-1.0) * s;
    }
    let (poly, y) = if x < 0.5 {
        let n = (0.5 - x).ceil() as usize;
        let mut p = Jet::constant(1.0);
        for k in 0..n {
            p = p * Jet::new(x + k as f64, 1.0, 0.0);
        }
        (p, x + n as f64)
    } else {
        (Jet::constant(1.0), x)
    };
    let r = (-lgamma(y)).exp();
    let psi = digamma_pos(y);
    let psi1 = trigamma_pos(y);
    poly * Jet::new(r, -psi * r, (psi * psi - psi1) * r)
}

/// 1/Γ(x) for any real x.
pub fn rgamma(x: f64) -> f64 {
    rgamma_jet(x).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn ln_gamma_known_values() {
        assert_abs_diff_eq!(ln_gamma(1.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ln_gamma(2.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ln_gamma(4.0).unwrap(), 6f64.ln(), epsilon = 1e-13);
        assert_abs_diff_eq!(ln_gamma(0.5).unwrap(), 0.5 * PI.ln(), epsilon = 1e-13);
    }

    #[test]
    fn ln_gamma_rejects_non_positive() {
        assert!(matches!(ln_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(ln_gamma(-1.5), Err(Error::Domain(_))));
        assert!(matches!(ln_gamma(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn ln_gamma_against_high_precision_values() {
        // Reference values computed with mpmath at 50 digits.
        let cases = [
            (1e-3, 6.907_178_885_383_853_7),
            (0.1, 2.252_712_651_734_206),
            (3.7, 1.428_072_326_665_387_9),
            (14.999, 25.188_546_870_546_926),
            (15.0, 25.191_221_182_738_68),
            (123.4, 469.336_097_442_190_56),
            (1000.0, 5_905.220_423_209_181),
        ];
        for (x, want) in cases {
            assert_abs_diff_eq!(lgamma(x), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn digamma_examples() {
        assert_abs_diff_eq!(
            digamma(2.0).unwrap(),
            digamma(1.0).unwrap() + 1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(digamma(1.0).unwrap(), -EULER_GAMMA, epsilon = 1e-13);
        assert_abs_diff_eq!(
            digamma(0.5).unwrap(),
            -EULER_GAMMA - 2.0 * 2f64.ln(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn digamma_poles_are_errors() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(digamma(x), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn digamma_negative_arguments() {
        // mpmath.digamma
        assert_abs_diff_eq!(
            digamma(-0.5).unwrap(),
            0.036_489_973_978_576_52,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            digamma(-2.3).unwrap(),
            3.317_323_157_561_820_1,
            epsilon = 1e-11
        );
        assert_abs_diff_eq!(
            digamma(-49.9).unwrap(),
            -5.748_820_413_350_331,
            epsilon = 1e-10
        );
    }

    #[test]
    fn trigamma_values() {
        assert_abs_diff_eq!(trigamma(1.0).unwrap(), PI * PI / 6.0, epsilon = 1e-13);
        assert_abs_diff_eq!(trigamma(0.5).unwrap(), PI * PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rgamma_zeros_and_values() {
        for n in 0..6 {
            assert_eq!(rgamma(-(n as f64)), 0.0);
        }
        assert_abs_diff_eq!(rgamma(3.0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(rgamma(0.5), 1.0 / PI.sqrt(), epsilon = 1e-14);
        // d/dx 1/Γ(x) at 0 equals 1, and at −1 equals −1.
        assert_abs_diff_eq!(rgamma_jet(0.0).d1, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rgamma_jet(-1.0).d1, -1.0, epsilon = 1e-14);
        // Second derivative at 0: 2γ.
        assert_abs_diff_eq!(rgamma_jet(0.0).d2, 2.0 * EULER_GAMMA, epsilon = 1e-13);
    }

    #[test]
    fn rgamma_reflection_branch_is_continuous() {
        // 1/Γ(x) = x/Γ(x + 1) across the switch at x = −30.
        let a = rgamma(-30.5);
        let b = rgamma(-29.5);
        assert!((a - (-30.5) * b).abs() <= 1e-12 * a.abs());
        assert_eq!(rgamma(-40.0), 0.0);
    }

    #[test]
    fn rgamma_jet_matches_finite_differences() {
        for &x in &[-41.3, -3.7, -1.2, -0.4, 0.2, 1.3, 6.5] {
            let h = 1e-5;
            let j = rgamma_jet(x);
            let fd1 = (rgamma(x + h) - rgamma(x - h)) / (2.0 * h);
            let fd2 = (rgamma(x + h) - 2.0 * rgamma(x) + rgamma(x - h)) / (h * h);
            assert_abs_diff_eq!(j.d1, fd1, epsilon = 1e-8 * (1.0 + fd1.abs()));
            assert_abs_diff_eq!(j.d2, fd2, epsilon = 1e-4 * (1.0 + fd2.abs()));
        }
    }
}
