//! The Knapp-Stein operator `A_{lambda,eps}` with kernel
//! `psi_{nu,eps}([x,b])`, `nu = lambda - rho`, on functions on `M`.
//!
//! It is diagonal on K-types. The eigenvalues are available in closed form
//! (see [`ks_eigenvalue_formula`]) and by direct quadrature against the zonal
//! vector of each K-type (see [`ks_eigenvalue_numeric`]).
//!
//! Two conventions for the Gamma arguments are provided. [`KsConvention::Displayed`]
//! uses `Gamma(-B^{++})`, `Gamma(1+B^{..})` literally. Quadrature agrees instead
//! with [`KsConvention::HalfArguments`], where every `B` enters as `B/2`. The two
//! are proportional on the kernel line at `lambda = 1` but not in general.

use crate::error::{arg, Error, Result};
use crate::geometry::Signature;
use crate::harmonics::KTypeLabel;
use crate::quadrature::{gauss_jacobi_symmetric, TanhSinh};
use crate::harmonics::gegenbauer;
use crate::special::{gamma, gamma_complex, is_gamma_pole, sphere_volume};
use num_complex::Complex64;
use num_rational::Rational64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KsConvention {
    /// `Gamma(-B^{++}) / (Gamma(1+B^{--}) Gamma(1+B^{+-}) Gamma(1+B^{-+}))`.
    Displayed,
    /// The same with every `B` replaced by `B/2`; agrees with quadrature.
    #[default]
    HalfArguments,
}

impl KsConvention {
    pub fn name(&self) -> &'static str {
        match self {
            KsConvention::Displayed => "displayed",
            KsConvention::HalfArguments => "half-arguments",
        }
    }
    fn divisor(&self) -> f64 {
        match self {
            KsConvention::Displayed => 1.0,
            KsConvention::HalfArguments => 2.0,
        }
    }
}

impl std::str::FromStr for KsConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "displayed" => Ok(KsConvention::Displayed),
            "half-arguments" => Ok(KsConvention::HalfArguments),
            _ => arg(format!("unknown convention {s:?}; expected displayed or half-arguments")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsParams {
    sig: Signature,
    lambda: Complex64,
    epsilon: i8,
}

impl KsParams {
    pub fn new(sig: Signature, lambda: Complex64, epsilon: i8) -> Result<Self> {
        if epsilon != 1 && epsilon != -1 {
            return arg(format!("epsilon must be +1 or -1, got {epsilon}"));
        }
        Ok(KsParams { sig, lambda, epsilon })
    }
    pub fn sig(&self) -> Signature {
        self.sig
    }
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }
    pub fn epsilon(&self) -> i8 {
        self.epsilon
    }
    /// `rho = (p+q-2)/2`.
    pub fn rho(&self) -> f64 {
        (self.sig.n() as f64 - 2.0) / 2.0
    }
    /// `nu = lambda - rho`, the exponent of the kernel.
    pub fn nu(&self) -> Complex64 {
        self.lambda - self.rho()
    }
}

/// `B^{e1,e2} = lambda - 1 - e1 (a + p/2 - 1) - e2 (b + q/2 - 1)`.
pub fn b_coeff(params: &KsParams, e1: i8, e2: i8, label: KTypeLabel) -> Complex64 {
    let sig = params.sig;
    let x = label.a as f64 + sig.p() as f64 / 2.0 - 1.0;
    let y = label.b as f64 + sig.q() as f64 / 2.0 - 1.0;
    params.lambda - 1.0 - e1 as f64 * x - e2 as f64 * y
}

/// `(-1)^{a-b}` must equal `epsilon`: the kernel has parity `epsilon` under
/// the antipodal map, and so does `H^a (x) H^b` when `(-1)^{a+b} = epsilon`.
pub fn check_parity(params: &KsParams, label: KTypeLabel) -> Result<()> {
    let par = if (label.a + label.b) % 2 == 0 { 1 } else { -1 };
    if par != params.epsilon {
        return arg(format!(
            "label {label} has parity {par:+} but epsilon = {:+}; the operator vanishes there",
            params.epsilon
        ));
    }
    Ok(())
}

/// A closed-form eigenvalue: finite, an exact zero forced by a Gamma pole in
/// the denominator, or a pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KsValue {
    Finite(Complex64),
    Zero,
    Pole,
}

impl KsValue {
    /// The value, with `Zero` as `0` and `None` at a pole.
    pub fn value(&self) -> Option<Complex64> {
        match self {
            KsValue::Finite(z) => Some(*z),
            KsValue::Zero => Some(Complex64::new(0.0, 0.0)),
            KsValue::Pole => None,
        }
    }
}

/// A Gamma factor `Gamma(arg)` depending affinely on lambda with the given slope.
struct GammaFactor {
    arg: Complex64,
    slope: f64,
    numerator: bool,
}

/// Product of Gamma factors, regularized as a function of lambda: factors at
/// poles contribute their residue (numerator) or the derivative of the
/// reciprocal Gamma (denominator), and the net order decides the outcome.
fn gamma_product(prefactor: Complex64, factors: &[GammaFactor]) -> KsValue {
    let mut order: i32 = 0;
    let mut acc = prefactor;
    for f in factors {
        if f.arg.im == 0.0 && is_gamma_pole(f.arg.re) {
            let m = (-f.arg.re) as u32;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let fact: f64 = (1..=m).map(|i| i as f64).product();
            if f.numerator {
                // Gamma(-m + s d) ~ (-1)^m / (m! s d)
                order += 1;
                acc *= sign / (fact * f.slope);
            } else {
                // 1/Gamma(-m + s d) ~ (-1)^m m! s d
                order -= 1;
                acc *= sign * fact * f.slope;
            }
        } else {
            let g = if f.arg.im == 0.0 {
                Complex64::new(gamma(f.arg.re), 0.0)
            } else {
                gamma_complex(f.arg)
            };
            acc = if f.numerator { acc * g } else { acc / g };
        }
    }
    match order {
        o if o > 0 => KsValue::Pole,
        o if o < 0 => KsValue::Zero,
        _ => KsValue::Finite(acc),
    }
}

fn floor_half(k: i64) -> i64 {
    k.div_euclid(2)
}

fn sign_pow(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Closed-form eigenvalue in the default convention.
pub fn ks_eigenvalue_formula(params: &KsParams, label: KTypeLabel) -> Result<KsValue> {
    ks_eigenvalue_formula_with(params, label, KsConvention::default())
}

/// `2^{(p+q+2)/2 - lambda} pi^{(p+q-1)/2} (-1)^{[(a-b)/2]} Gamma(lambda) Gamma(-B^{++})`
/// over `Gamma(1/2) Gamma((-2 lambda + p + q - 1 - eps)/4) Gamma(1+B^{--}) Gamma(1+B^{+-}) Gamma(1+B^{-+})`,
/// with `B` read as `B/2` in [`KsConvention::HalfArguments`].
pub fn ks_eigenvalue_formula_with(params: &KsParams, label: KTypeLabel, conv: KsConvention) -> Result<KsValue> {
    let sig = params.sig;
    label.validate(sig)?;
    check_parity(params, label)?;
    let (p, q) = (sig.p() as f64, sig.q() as f64);
    let lam = params.lambda;
    let s = conv.divisor();
    let bpp = b_coeff(params, 1, 1, label) / s;
    let bmm = b_coeff(params, -1, -1, label) / s;
    let bpm = b_coeff(params, 1, -1, label) / s;
    let bmp = b_coeff(params, -1, 1, label) / s;
    let sign = sign_pow(floor_half(label.a as i64 - label.b as i64));
    let two_pow = (Complex64::new((p + q + 2.0) / 2.0, 0.0) - lam) * 2f64.ln();
    let prefactor = two_pow.exp() * PI.powf((p + q - 1.0) / 2.0) * sign / PI.sqrt();
    let eps = params.epsilon as f64;
    let one = Complex64::new(1.0, 0.0);
    let factors = [
        GammaFactor { arg: lam, slope: 1.0, numerator: true },
        GammaFactor { arg: -bpp, slope: -1.0 / s, numerator: true },
        GammaFactor { arg: (-2.0 * lam + p + q - 1.0 - eps) / 4.0, slope: -0.5, numerator: false },
        GammaFactor { arg: one + bmm, slope: 1.0 / s, numerator: false },
        GammaFactor { arg: one + bpm, slope: 1.0 / s, numerator: false },
        GammaFactor { arg: one + bmp, slope: 1.0 / s, numerator: false },
    ];
    Ok(gamma_product(prefactor, &factors))
}

/// `c_1 = Gamma((p+q-3-(-1)^{(p-q)/2})/4) / (2^{(p+q-2)/2} pi^{(p+q-1)/2})`.
pub fn ks_c1(sig: Signature) -> Result<f64> {
    if !sig.parity_even() {
        return arg(format!("c_1 needs p+q even, got {sig}"));
    }
    let (p, q) = (sig.p() as f64, sig.q() as f64);
    let e = sign_pow((sig.p() as i64 - sig.q() as i64) / 2);
    let g = (p + q - 3.0 - e) / 4.0;
    if is_gamma_pole(g) {
        return Err(Error::Unsupported(format!("c_1 is infinite for {sig}")));
    }
    Ok(gamma(g) / (2f64.powf((p + q - 2.0) / 2.0) * PI.powf((p + q - 1.0) / 2.0)))
}

/// `Gamma(x) / Gamma(y)` for rationals with `y - x` a nonnegative integer and
/// `x` not a pole: `1 / (x (x+1) ... (y-1))`.
pub fn gamma_ratio_exact(x: Rational64, y: Rational64) -> Option<Rational64> {
    let d = y - x;
    if !d.is_integer() || *d.numer() < 0 {
        return None;
    }
    if x.is_integer() && *x.numer() <= 0 {
        return None;
    }
    let mut acc = Rational64::from_integer(1);
    let mut t = x;
    for _ in 0..*d.numer() {
        acc *= t;
        t += 1;
    }
    Some(acc.recip())
}

/// Exact evaluation of the closed form at `lambda = 1`,
/// `eps = (-1)^{(p-q)/2}` on a kernel label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelLineReduction {
    /// `Gamma(-B^{++}) / (Gamma(1+B^{--}) Gamma(1+B^{+-}) Gamma(1+B^{-+}))`, exact.
    pub label_factor: Rational64,
    /// `1 / (a + p/2 - 1)`.
    pub law: Rational64,
    /// `(-1)^{[(a-b)/2]}` from the general formula.
    pub sign_formula: i8,
    /// `(-1)^{[(q-p)/4]}` from the kernel-line formula.
    pub sign_kernel_line: i8,
    /// Remaining label-independent factor of the general formula divided by
    /// `1 / c_1`.
    pub constant_ratio: f64,
}

pub fn ks_kernel_line_reduction(sig: Signature, label: KTypeLabel, conv: KsConvention) -> Result<KernelLineReduction> {
    if !sig.parity_even() || sig.p() < 2 || sig.q() < 2 || (sig.p() == 2 && sig.q() == 2) {
        return Err(Error::Unsupported(format!("kernel-line reduction needs p+q even, p,q >= 2, (p,q) != (2,2); got {sig}")));
    }
    if !crate::spectral::is_kernel_label(sig, label) {
        return arg(format!("{label} is not a kernel label for {sig}"));
    }
    let (p, q) = (sig.p() as i64, sig.q() as i64);
    let (a, b) = (label.a as i64, label.b as i64);
    let s = match conv {
        KsConvention::Displayed => 1,
        KsConvention::HalfArguments => 2,
    };
    // Twice the shifted labels are integers: X = 2a + p - 2 = 2b + q - 2.
    let x2 = 2 * a + p - 2;
    let y2 = 2 * b + q - 2;
    // B^{e1 e2} = lambda - 1 - e1 X/2 - e2 Y/2 at lambda = 1.
    let bb = |e1: i64, e2: i64| Rational64::new(-e1 * x2 - e2 * y2, 2 * s);
    let one = Rational64::from_integer(1);
    let num = -bb(1, 1);
    let den = [one + bb(-1, -1), one + bb(1, -1), one + bb(-1, 1)];
    let mut factor = gamma_ratio_exact(num, den[0])
        .ok_or_else(|| Error::Argument("kernel-line Gamma ratio is not a finite Pochhammer ratio".into()))?;
    for d in &den[1..] {
        // Both are Gamma(1) on the kernel line.
        factor /= gamma_ratio_exact(one, *d).and_then(|r| if r == one { Some(one) } else { None }).ok_or_else(|| {
            Error::Argument("mixed B coefficients do not vanish on the kernel line".into())
        })?;
    }
    let eps = sign_pow((p - q) / 2);
    let pre = 2f64.powf((p + q) as f64 / 2.0) * PI.powf((p + q - 1) as f64 / 2.0) / PI.sqrt();
    let g = ((p + q) as f64 - 3.0 - eps) / 4.0;
    let constant = pre / gamma(g);
    Ok(KernelLineReduction {
        label_factor: factor,
        law: Rational64::new(2, x2),
        sign_formula: sign_pow(floor_half(a - b)) as i8,
        sign_kernel_line: sign_pow(floor_half((q - p) / 2)) as i8,
        constant_ratio: constant * ks_c1(sig)?,
    })
}

/// Quadrature settings for [`ks_eigenvalue_numeric`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KsQuadrature {
    /// Tanh-sinh level (step `2^-level`) for both angular integrals.
    pub level: u32,
}

impl Default for KsQuadrature {
    fn default() -> Self {
        KsQuadrature { level: 6 }
    }
}

fn check_convergent(params: &KsParams) -> Result<()> {
    let nu = params.nu();
    if !(nu.re > -1.0) {
        return Err(Error::Unsupported(format!(
            "Re(lambda - rho) = {} <= -1: the kernel is not locally integrable",
            nu.re
        )));
    }
    if params.sig.p() < 2 || params.sig.q() < 2 {
        return Err(Error::Unsupported(format!("quadrature needs p, q >= 2, got {}", params.sig)));
    }
    Ok(())
}

/// `1 / Gamma((2 nu + 3 - eps)/4)`.
fn psi_normalization(params: &KsParams) -> Complex64 {
    let z = (2.0 * params.nu() + 3.0 - params.epsilon as f64) / 4.0;
    if z.im == 0.0 {
        if is_gamma_pole(z.re) {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(1.0 / gamma(z.re), 0.0)
    } else {
        1.0 / gamma_complex(z)
    }
}

/// `|t|^nu chi_eps(sgn t)` without the Gamma normalization.
fn psi_bare(nu: Complex64, eps: i8, t: f64) -> Complex64 {
    let m = t.abs();
    let mag = if nu.im == 0.0 { Complex64::new(m.powf(nu.re), 0.0) } else { (nu * m.ln()).exp() };
    if eps == -1 && t < 0.0 {
        -mag
    } else {
        mag
    }
}

/// `int_M psi([x0, b]) Y(b) db` for the zonal vector `Y` of type `(a,b)`
/// centered at `x0 = (e_1, e_q)`, `Y(x0) = 1`, with the Riemannian measure.
/// No parity check: for mismatched parity the result vanishes up to quadrature error.
pub fn ks_zonal_integral(params: &KsParams, label: KTypeLabel, quad: KsQuadrature) -> Result<Complex64> {
    check_convergent(params)?;
    label.validate(params.sig)?;
    let (p, q) = (params.sig.p(), params.sig.q());
    let (ap, aq) = ((p as f64 - 2.0) / 2.0, (q as f64 - 2.0) / 2.0);
    let (ka, kb) = (label.a, label.b);
    let (sa, sb) = (gegenbauer(ap, ka, 1.0), gegenbauer(aq, kb, 1.0));
    let nu = params.nu();
    let eps = params.epsilon;
    let rule = TanhSinh::new(quad.level);
    // t = cos(al) - cos(be) = -2 sin((al+be)/2) sin((al-be)/2); the inner
    // integral is split at be = al where t vanishes.
    let inner = |al: f64, da_al: f64, db_al: f64| -> Complex64 {
        let sin_al = if da_al < db_al { da_al.sin() } else { db_al.sin() };
        let w_al = sin_al.powi(p as i32 - 2) * gegenbauer(ap, ka, al.cos()) / sa;
        let piece = |lo: f64, hi: f64, below: bool| -> Complex64 {
            rule.integrate(lo, hi, |be: f64, d_lo: f64, d_hi: f64| {
                // al - be, computed from the endpoint at al without cancellation
                let diff = if below { d_hi } else { -d_lo };
                let t = -2.0 * (0.5 * (al + be)).sin() * (0.5 * diff).sin();
                if t == 0.0 {
                    // only reached where node spacing underflows; null set
                    return Complex64::new(0.0, 0.0);
                }
                let dist_pi = if below { PI - be } else { d_hi };
                let sin_be = if be < dist_pi { be.sin() } else { dist_pi.sin() };
                psi_bare(nu, eps, t) * (sin_be.powi(q as i32 - 2) * gegenbauer(aq, kb, be.cos()) / sb)
            })
        };
        (piece(0.0, al, true) + piece(al, PI, false)) * w_al
    };
    let total: Complex64 = rule.integrate(0.0, PI, inner);
    // vol(S^{p-2}) vol(S^{q-2}), with vol(S^0) = 2
    let vol = sphere_volume(p - 1) * sphere_volume(q - 1);
    Ok(total * vol * psi_normalization(params))
}

/// Eigenvalue of `A_{lambda,eps}` on `H^a (x) H^b` by quadrature: the operator
/// applied to the zonal vector, evaluated at its center.
pub fn ks_eigenvalue_numeric(params: &KsParams, label: KTypeLabel, quad: KsQuadrature) -> Result<Complex64> {
    check_parity(params, label)?;
    ks_zonal_integral(params, label, quad)
}

/// Signature `(2,2)` only: `(A Y)(x)` and `Y(x)` at an arbitrary point
/// `x = (angle_u, angle_v)` of the torus, `Y` the zonal vector centered at `x0`.
///
/// With `phi, psi` the angles of `b` relative to `x`, the kernel factors as
/// `2^nu |sin(s/2)|^nu |sin(d/2)|^nu` in `s = phi+psi`, `d = phi-psi`; a tensor
/// Gauss-Jacobi rule with exponent `nu` absorbs both singular factors.
pub fn ks_offcenter_22(params: &KsParams, label: KTypeLabel, x: (f64, f64), nodes: usize) -> Result<(Complex64, f64)> {
    if params.sig.p() != 2 || params.sig.q() != 2 {
        return Err(Error::Unsupported("off-center quadrature is implemented for signature (2,2)".into()));
    }
    check_convergent(params)?;
    let nu = params.nu();
    if nu.im != 0.0 {
        return Err(Error::Unsupported("off-center quadrature needs real lambda".into()));
    }
    let nu = nu.re;
    let (xj, wj) = gauss_jacobi_symmetric(nodes, nu)?;
    let (a, b) = (label.a as f64, label.b as f64);
    // Y(u, v) = T_a(u_1) T_b(v_2) at angles (th_u, th_v): cos(a th_u) cos(b (th_v - pi/2)).
    let y = |tu: f64, tv: f64| (a * tu).cos() * (b * (tv - 0.5 * PI)).cos();
    // On [c - pi, c + pi] with x = (s - c)/pi: |sin(s/2)| or |cos(s/2)| equals (1 - x^2)^nu times a smooth factor.
    let smooth = |x: f64| {
        let c = (0.5 * PI * x).cos();
        let d = 1.0 - x * x;
        if d <= 0.0 {
            (0.5 * PI).powf(nu)
        } else {
            (c / d).powf(nu)
        }
    };
    let eps = params.epsilon;
    let mut acc = 0.0;
    // s in [0, 4 pi) covered by two intervals centered at pi and 3 pi, d in [0, 2 pi) centered at pi.
    for sc in [PI, 3.0 * PI] {
        for (xs, ws) in xj.iter().zip(&wj) {
            let s = sc + PI * xs;
            let ss = (0.5 * s).sin();
            for (xd, wd) in xj.iter().zip(&wj) {
                let d = PI + PI * xd;
                let sd = (0.5 * d).sin();
                let (phi, psi) = (0.5 * (s + d), 0.5 * (s - d));
                let t_sign = -(ss * sd).signum();
                let chi = if eps == -1 { t_sign } else { 1.0 };
                let mag = 2f64.powf(nu) * smooth(*xs) * smooth(*xd);
                acc += ws * wd * PI * PI * chi * mag * y(x.0 + phi, x.1 + psi);
            }
        }
    }
    // Jacobian of (phi, psi) -> (s, d) is 1/2.
    let val = Complex64::new(0.5 * acc, 0.0) * psi_normalization(params);
    Ok((val, y(x.0, x.1)))
}

/// `max_i |r_i / r_0 - 1|` for a list of ratios.
pub fn ratio_spread(ratios: &[Complex64]) -> f64 {
    let Some(r0) = ratios.first() else { return 0.0 };
    ratios.iter().map(|r| (r / r0 - 1.0).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::kernel_ktypes;

    fn sig(p: usize, q: usize) -> Signature {
        Signature::new(p, q).unwrap()
    }
    fn params(p: usize, q: usize, lam: f64, eps: i8) -> KsParams {
        KsParams::new(sig(p, q), Complex64::new(lam, 0.0), eps).unwrap()
    }
    fn l(a: usize, b: usize) -> KTypeLabel {
        KTypeLabel::new(a, b)
    }
    fn finite(v: KsValue) -> Complex64 {
        match v {
            KsValue::Finite(z) => z,
            other => panic!("expected a finite value, got {other:?}"),
        }
    }

    #[test]
    fn b_coefficients() {
        let pr = params(4, 2, 1.0, 1);
        assert_eq!(b_coeff(&pr, -1, -1, l(0, 1)), Complex64::new(2.0, 0.0));
        assert_eq!(b_coeff(&pr, 1, 1, l(0, 1)), Complex64::new(-2.0, 0.0));
        let pr = params(5, 3, 2.7, 1);
        for (a, b) in [(0, 0), (3, 1), (2, 5)] {
            let s = b_coeff(&pr, 1, 1, l(a, b)) + b_coeff(&pr, -1, -1, l(a, b));
            assert!((s - 2.0 * (2.7 - 1.0)).norm() < 1e-14);
        }
        assert!(KsParams::new(sig(2, 2), Complex64::new(1.0, 0.0), 0).is_err());
    }

    #[test]
    fn parity_precondition() {
        let pr = params(2, 2, 1.5, 1);
        assert!(ks_eigenvalue_formula(&pr, l(1, 0)).is_err());
        assert!(ks_eigenvalue_numeric(&pr, l(1, 0), KsQuadrature::default()).is_err());
        let odd = ks_zonal_integral(&pr, l(1, 0), KsQuadrature::default()).unwrap();
        let even = ks_zonal_integral(&pr, l(1, 1), KsQuadrature::default()).unwrap();
        assert!(odd.norm() <= 1e-10 * even.norm(), "{odd} vs {even}");
    }

    #[test]
    fn convergence_range() {
        let pr = params(3, 3, 0.9, 1); // nu = -1.1
        assert!(matches!(ks_eigenvalue_numeric(&pr, l(0, 0), KsQuadrature::default()), Err(Error::Unsupported(_))));
    }

    fn check_ratios(pr: KsParams, labels: &[KTypeLabel], conv: KsConvention) -> f64 {
        let q = KsQuadrature::default();
        let ratios: Vec<Complex64> = labels
            .iter()
            .map(|lb| ks_eigenvalue_numeric(&pr, *lb, q).unwrap() / finite(ks_eigenvalue_formula_with(&pr, *lb, conv).unwrap()))
            .collect();
        ratio_spread(&ratios)
    }

    #[test]
    fn numeric_matches_half_argument_formula() {
        let cases: Vec<(KsParams, Vec<KTypeLabel>)> = vec![
            (params(2, 2, 1.5, 1), vec![l(0, 0), l(1, 1), l(2, 2), l(0, 2), l(3, 1)]),
            (params(3, 3, 2.2, 1), vec![l(0, 0), l(1, 1), l(2, 0), l(1, 3), l(2, 2)]),
            (params(4, 2, 1.5, -1), vec![l(0, 1), l(1, 0), l(1, 2), l(2, 3), l(3, 0)]),
            (params(3, 3, 2.3, -1), vec![l(0, 1), l(1, 0), l(2, 1), l(1, 2), l(3, 2)]),
            (params(2, 4, 2.5, 1), vec![l(0, 0), l(1, 1), l(0, 2), l(2, 0), l(3, 1)]),
        ];
        for (pr, labels) in cases {
            let spread = check_ratios(pr, &labels, KsConvention::HalfArguments);
            assert!(spread <= 1e-6, "{} lambda={}: spread {spread:e}", pr.sig(), pr.lambda());
        }
    }

    #[test]
    fn displayed_formula_differs_off_the_diagonal() {
        let pr = params(2, 2, 1.5, 1);
        assert!(check_ratios(pr, &[l(0, 0), l(1, 1), l(2, 2)], KsConvention::Displayed) > 1e-2);
        let pr = params(3, 3, 2.2, 1);
        assert!(check_ratios(pr, &[l(0, 0), l(1, 1), l(2, 0)], KsConvention::Displayed) > 1e-2);
    }

    #[test]
    fn normalization_constant_even_signatures() {
        // Observed: for even p, q and eps = +1 the numeric / formula ratio is
        // sqrt(2 pi) independently of lambda, and half that for eps = -1.
        let q = KsQuadrature::default();
        let root = (2.0 * PI).sqrt();
        for (pr, lb, expect) in [
            (params(2, 2, 1.5, 1), l(1, 1), root),
            (params(2, 4, 2.5, 1), l(1, 1), root),
            (params(4, 4, 3.5, 1), l(1, 1), root),
            (params(4, 2, 1.5, -1), l(0, 1), 0.5 * root),
        ] {
            let r = ks_eigenvalue_numeric(&pr, lb, q).unwrap() / finite(ks_eigenvalue_formula(&pr, lb).unwrap());
            assert!((r.re - expect).abs() < 1e-10 && r.im.abs() < 1e-12, "{} {r}", pr.sig());
        }
    }

    #[test]
    fn complex_lambda() {
        let pr = KsParams::new(sig(3, 3), Complex64::new(2.4, 0.3), 1).unwrap();
        let spread = check_ratios(pr, &[l(0, 0), l(1, 1), l(2, 0)], KsConvention::HalfArguments);
        assert!(spread <= 1e-6, "{spread:e}");
    }

    #[test]
    fn quadrature_converges() {
        let pr = params(3, 3, 1.7, 1); // nu = -0.3
        let a = ks_eigenvalue_numeric(&pr, l(1, 1), KsQuadrature { level: 5 }).unwrap();
        let b = ks_eigenvalue_numeric(&pr, l(1, 1), KsQuadrature { level: 7 }).unwrap();
        assert!((a - b).norm() <= 1e-9 * b.norm());
    }

    #[test]
    fn offcenter_eigenvector() {
        let pr = params(2, 2, 1.5, 1);
        let q = KsQuadrature::default();
        for lb in [l(1, 1), l(2, 0)] {
            let base = ks_eigenvalue_numeric(&pr, lb, q).unwrap();
            for x in [(0.3, 1.1), (2.0, -0.4), (-1.2, 2.9)] {
                let (ay, y) = ks_offcenter_22(&pr, lb, x, 60).unwrap();
                assert!(y.abs() > 0.05);
                assert!((ay / y - base).norm() <= 1e-6 * base.norm(), "{lb} {x:?}: {} vs {base}", ay / y);
            }
        }
        let pr = params(2, 2, 1.3, -1);
        let base = ks_eigenvalue_numeric(&pr, l(1, 0), q).unwrap();
        let (ay, y) = ks_offcenter_22(&pr, l(1, 0), (0.7, 0.2), 60).unwrap();
        assert!((ay / y - base).norm() <= 1e-6 * base.norm());
    }

    #[test]
    fn kernel_line_reduction_exact() {
        for &(p, q) in &[(4, 2), (2, 4), (3, 3), (4, 4), (6, 2), (5, 3), (3, 5), (7, 3)] {
            let s = sig(p, q);
            for lb in kernel_ktypes(s, 6) {
                let half = ks_kernel_line_reduction(s, lb, KsConvention::HalfArguments).unwrap();
                assert_eq!(half.label_factor, half.law, "{s} {lb}");
                let disp = ks_kernel_line_reduction(s, lb, KsConvention::Displayed).unwrap();
                assert_eq!(disp.label_factor, half.law / 2, "{s} {lb}");
                assert_eq!(half.sign_formula, half.sign_kernel_line, "{s} {lb}");
                // The general prefactor carries an extra 1/Gamma(1/2) relative to 1/c_1.
                let expect = 2.0 / PI.sqrt();
                assert!((half.constant_ratio - expect).abs() < 1e-13 * expect, "{s}: {}", half.constant_ratio);
            }
        }
        assert!(ks_kernel_line_reduction(sig(2, 2), l(0, 0), KsConvention::HalfArguments).is_err());
    }

    #[test]
    fn kernel_line_float_formula_consistent() {
        let s = sig(4, 2);
        let pr = KsParams::new(s, Complex64::new(1.0, 0.0), -1).unwrap();
        let v01 = finite(ks_eigenvalue_formula(&pr, l(0, 1)).unwrap());
        let v12 = finite(ks_eigenvalue_formula(&pr, l(1, 2)).unwrap());
        assert!((v12 / v01 - 0.5).norm() < 1e-13);
        let red = ks_kernel_line_reduction(s, l(0, 1), KsConvention::HalfArguments).unwrap();
        let c1 = ks_c1(s).unwrap();
        let expect = red.sign_kernel_line as f64 * red.constant_ratio / c1;
        assert!((v01.re - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn off_kernel_zeros_at_lambda_one() {
        for &(p, q) in &[(4, 2), (3, 3), (6, 2), (5, 3)] {
            let s = sig(p, q);
            let eps = sign_pow((p as i64 - q as i64) / 2) as i8;
            let pr = KsParams::new(s, Complex64::new(1.0, 0.0), eps).unwrap();
            for a in 0..6 {
                for b in 0..6 {
                    let lb = l(a, b);
                    if check_parity(&pr, lb).is_err() {
                        continue;
                    }
                    for conv in [KsConvention::Displayed, KsConvention::HalfArguments] {
                        let v = ks_eigenvalue_formula_with(&pr, lb, conv).unwrap();
                        if crate::spectral::is_kernel_label(s, lb) {
                            assert!(matches!(v, KsValue::Finite(z) if z.norm() > 0.0), "{s} {lb}");
                        } else {
                            assert_eq!(v, KsValue::Zero, "{s} {lb} {conv:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pole_bookkeeping() {
        // lambda = 0: Gamma(lambda) has a pole.
        let pr = params(3, 3, 0.0, 1);
        assert_eq!(ks_eigenvalue_formula(&pr, l(0, 0)).unwrap(), KsValue::Pole);
        // Both a numerator and a denominator pole cancel to a finite limit,
        // which matches the value at a nearby lambda.
        let pr = params(4, 2, 1.0, -1);
        let exact = finite(ks_eigenvalue_formula(&pr, l(0, 1)).unwrap());
        let near = finite(ks_eigenvalue_formula(&params(4, 2, 1.0 + 1e-7, -1), l(0, 1)).unwrap());
        assert!((exact - near).norm() < 1e-5 * exact.norm());
        // Off-kernel: limit of the regular values tends to zero.
        let near = finite(ks_eigenvalue_formula(&params(4, 2, 1.0 + 1e-7, -1), l(1, 0)).unwrap());
        assert!(near.norm() < 1e-5);
    }
}
