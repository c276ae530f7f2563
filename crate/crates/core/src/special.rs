//! Gamma function family.
//!
//! Lanczos approximation (g = 7, nine terms) with reflection for the left
//! half plane. Complex arguments are needed for the Knapp-Stein eigenvalues,
//! where the twist parameter may be complex.

use num_complex::Complex64;
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

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Returns true if `x` is a pole of Gamma (a nonpositive integer).
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `ln |Gamma(x)|` together with the sign of `Gamma(x)`.
///
/// At poles the magnitude is `+inf` and the sign is reported as `+1`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if is_gamma_pole(x) {
        return (f64::INFINITY, 1.0);
    }
    if x < 0.5 {
        // Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let s = (PI * x).sin();
        let (lg, _) = ln_gamma_signed(1.0 - x);
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        return (PI.ln() - s.abs().ln() - lg, sign);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln(), 1.0)
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_signed(x).0
}

pub fn gamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return f64::NAN;
    }
    let (lg, s) = ln_gamma_signed(x);
    s * lg.exp()
}

/// Reciprocal Gamma, entire: exactly zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return 0.0;
    }
    let (lg, s) = ln_gamma_signed(x);
    s * (-lg).exp()
}

/// A branch of `ln Gamma(z)` for complex `z` away from the poles.
///
/// Only `exp` of the result is meaningful; the imaginary part is defined
/// modulo `2 pi`.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        let s = (pi * z).sin();
        return pi.ln() - s.ln() - ln_gamma_complex(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (z + i as f64);
    }
    let t = z + (LANCZOS_G + 0.5);
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma_complex(z: Complex64) -> Complex64 {
    ln_gamma_complex(z).exp()
}

/// Binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Surface area of the unit sphere `S^{d-1}` in `R^d`.
pub fn sphere_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}
