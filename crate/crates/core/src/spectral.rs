//! The Yamabe operator of `M` on K-types, its kernel and infinitesimal
//! characters.

use crate::error::{arg, Error, Result};
use crate::geometry::Signature;
use crate::harmonics::{KTypeLabel, SpectralFunction};
use num_complex::Complex64;
use num_rational::Rational64;

/// Four times the Yamabe eigenvalue on `H^a (x) H^b`:
/// `-(2a+p-2)^2 + (2b+q-2)^2`. Exact.
pub fn yamabe_eigenvalue_quarters(sig: Signature, label: KTypeLabel) -> i64 {
    let x = 2 * label.a as i64 + sig.p() as i64 - 2;
    let y = 2 * label.b as i64 + sig.q() as i64 - 2;
    y * y - x * x
}

/// `-(a+(p-2)/2)^2 + (b+(q-2)/2)^2` as an exact rational.
pub fn yamabe_eigenvalue_exact(sig: Signature, label: KTypeLabel) -> Rational64 {
    Rational64::new(yamabe_eigenvalue_quarters(sig, label), 4)
}

pub fn yamabe_eigenvalue(sig: Signature, label: KTypeLabel) -> f64 {
    yamabe_eigenvalue_quarters(sig, label) as f64 / 4.0
}

pub fn is_kernel_label(sig: Signature, label: KTypeLabel) -> bool {
    label.validate(sig).is_ok() && yamabe_eigenvalue_quarters(sig, label) == 0
}

/// Labels `(a,b)`, `a <= a_max`, on which the Yamabe operator vanishes,
/// i.e. `|a+(p-2)/2| = |b+(q-2)/2|`, sorted by `a` then `b`.
///
/// For each `a` the candidates `2b = +-(2a+p-2) - (q-2)` are solved
/// directly. When `p = 1` (`q = 1`) only `a <= 1` (`b <= 1`) occur, so the
/// kernel is also empty for `(1, q)` with `q >= 5`.
pub fn kernel_ktypes(sig: Signature, a_max: usize) -> Vec<KTypeLabel> {
    let (p, q) = (sig.p() as i64, sig.q() as i64);
    let a_top = if sig.p() == 1 { a_max.min(1) } else { a_max };
    let mut out = Vec::new();
    for a in 0..=a_top {
        let s = (2 * a as i64 + p - 2).abs();
        let mut bs: Vec<i64> = [s, -s]
            .iter()
            .map(|t| t - (q - 2))
            .filter(|two_b| *two_b >= 0 && two_b % 2 == 0)
            .map(|two_b| two_b / 2)
            .filter(|b| sig.q() != 1 || *b <= 1)
            .collect();
        bs.sort_unstable();
        bs.dedup();
        out.extend(bs.into_iter().map(|b| KTypeLabel::new(a, b as usize)));
    }
    out
}

/// Multiplies each component by its Yamabe eigenvalue; kernel components
/// become exactly zero.
pub fn apply_yamabe(f: &SpectralFunction) -> SpectralFunction {
    let sig = f.sig();
    let mut out = f.map_diagonal(|l| Complex64::new(yamabe_eigenvalue(sig, l), 0.0));
    out.set_tail_mass(0.0);
    out
}

/// `(1, (p+q)/2 - 2, (p+q)/2 - 3, ..., 1, 0)` for even `p+q`.
///
/// For `p+q <= 4` the descending tail is empty or overlaps the leading
/// entry, and the tuple is reported as ambiguous instead of guessed.
pub fn infinitesimal_character_minrep(sig: Signature) -> Result<Vec<Rational64>> {
    if !sig.parity_even() {
        return Err(Error::Unsupported(format!(
            "{sig}: p+q odd, the kernel of the Yamabe operator is zero"
        )));
    }
    let m = sig.n() as i64 / 2;
    if sig.n() <= 4 {
        return Err(Error::Unsupported(format!(
            "{sig}: the tuple (1, (p+q)/2-2, ..., 1, 0) is ambiguous for p+q <= 4"
        )));
    }
    let mut out = vec![Rational64::from_integer(1)];
    out.extend((0..=m - 2).rev().map(Rational64::from_integer));
    Ok(out)
}

/// `(lambda, (p+q)/2 - 2, (p+q)/2 - 3, ..., (p+q)/2 - floor((p+q)/2))`.
pub fn infinitesimal_character_ps(sig: Signature, lambda: Complex64) -> Vec<Complex64> {
    let half = Rational64::new(sig.n() as i64, 2);
    let top = sig.n() as i64 / 2;
    let mut out = vec![lambda];
    for j in 2..=top {
        let e = half - j;
        out.push(Complex64::new(*e.numer() as f64 / *e.denom() as f64, 0.0));
    }
    out
}

/// Exact version of the principal series character for rational `lambda`.
pub fn infinitesimal_character_ps_exact(sig: Signature, lambda: Rational64) -> Vec<Rational64> {
    let half = Rational64::new(sig.n() as i64, 2);
    let top = sig.n() as i64 / 2;
    std::iter::once(lambda).chain((2..=top).map(|j| half - j)).collect()
}

/// Scalar by which `m0 = -I` acts on a kernel K-type: `(-1)^{a+b}`.
pub fn m0_scalar(sig: Signature, label: KTypeLabel) -> Result<i8> {
    if !is_kernel_label(sig, label) {
        return arg(format!("{label} is not on the kernel line of {sig}"));
    }
    Ok(if (label.a + label.b) % 2 == 0 { 1 } else { -1 })
}

/// `(-1)^{(p-q)/2}` for even `p+q`.
pub fn m0_expected(sig: Signature) -> Result<i8> {
    if !sig.parity_even() {
        return Err(Error::Unsupported(format!("{sig}: p+q odd")));
    }
    let d = (sig.p() as i64 - sig.q() as i64) / 2;
    Ok(if d.rem_euclid(2) == 0 { 1 } else { -1 })
}
