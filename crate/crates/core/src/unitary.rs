//! The operators `D_p`, `D_q`, the invariant norm on the kernel of the Yamabe
//! operator, and Beckner's coefficient bounds on a single sphere.

use crate::error::{arg, Error, Result};
use crate::geometry::GroupElement;
use crate::harmonics::{HarmonicBasis, KTypeLabel, QuadratureGrid, SpectralFunction};
use crate::quadrature::SphereRule;
use crate::representation::{check_kernel_supported, minrep_act};
use crate::special::ln_gamma;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

fn dp_weight(p: usize, a: usize) -> f64 {
    a as f64 + (p as f64 - 2.0) / 2.0
}

fn require_ge2(n: usize, which: &str) -> Result<()> {
    if n < 2 {
        return arg(format!("{which} needs the sphere factor to have dimension at least 1, got {which} on S^{}", n as i64 - 1));
    }
    Ok(())
}

/// Multiplies the `(a,b)` component by `sqrt(a + (p-2)/2)`.
pub fn apply_dp(f: &SpectralFunction) -> Result<SpectralFunction> {
    let p = f.sig().p();
    require_ge2(p, "D_p")?;
    Ok(f.map_diagonal(|l| Complex64::new(dp_weight(p, l.a).sqrt(), 0.0)))
}

/// Multiplies the `(a,b)` component by `sqrt(b + (q-2)/2)`.
pub fn apply_dq(f: &SpectralFunction) -> Result<SpectralFunction> {
    let q = f.sig().q();
    require_ge2(q, "D_q")?;
    Ok(f.map_diagonal(|l| Complex64::new(dp_weight(q, l.b).sqrt(), 0.0)))
}

#[derive(Debug, Clone)]
pub struct NormReport {
    /// `sum (a + (p-2)/2) ||F_{a,b}||^2`.
    pub norm_sq: f64,
    pub per_ktype: BTreeMap<KTypeLabel, f64>,
    pub tail_mass: f64,
    /// `||D_p F||^2`.
    pub dp_form: f64,
    /// `||(D_p + D_q) F||^2 / 4`.
    pub symmetric_form: f64,
}

impl NormReport {
    /// Largest relative disagreement among the three expressions of the norm.
    pub fn form_disagreement(&self) -> f64 {
        let s = self.norm_sq.abs().max(f64::MIN_POSITIVE);
        ((self.dp_form - self.norm_sq).abs().max((self.symmetric_form - self.norm_sq).abs())) / s
    }
}

/// The invariant norm of a kernel-supported function.
///
/// Signature `(2,2)` is rejected: there the `(0,0)` weight vanishes and the
/// form is only a seminorm, degenerate on the trivial subrepresentation.
pub fn minrep_norm(f: &SpectralFunction) -> Result<NormReport> {
    let sig = f.sig();
    if sig.p() == 2 && sig.q() == 2 {
        return Err(Error::Unsupported(
            "signature (2,2): the weight a+(p-2)/2 vanishes on the constant K-type, so the form is only a seminorm".into(),
        ));
    }
    require_ge2(sig.p(), "D_p")?;
    require_ge2(sig.q(), "D_q")?;
    check_kernel_supported(f)?;
    let p = sig.p();
    let per_ktype: BTreeMap<_, _> = f.components().map(|(l, b)| (l, dp_weight(p, l.a) * b.norm_sq())).collect();
    let norm_sq = per_ktype.values().sum();
    let dp = apply_dp(f)?;
    let dp_form = dp.norm_sq();
    let both = dp.axpy(Complex64::new(1.0, 0.0), &apply_dq(f)?)?;
    Ok(NormReport { norm_sq, per_ktype, tail_mass: f.tail_mass(), dp_form, symmetric_form: 0.25 * both.norm_sq() })
}

#[derive(Debug, Clone, Copy)]
pub struct UnitarityReport {
    /// `|N(g F) - N(F)| / N(F)` with `N` the invariant norm squared.
    pub relative_change: f64,
    pub norm_sq_before: f64,
    pub norm_sq_after: f64,
    pub tail_mass: f64,
    /// Mass of `g F` outside the kernel K-types, discarded before measuring.
    pub non_kernel_mass: f64,
}

/// Change of the invariant norm under the minimal representation. The image
/// is re-expanded with cutoffs `(a_max, b_max)` and projected onto the kernel
/// K-types; the discarded and unresolved masses are reported.
pub fn unitarity_residual(
    g: &GroupElement,
    f: &SpectralFunction,
    grid: &Arc<QuadratureGrid>,
    a_max: usize,
    b_max: usize,
) -> Result<UnitarityReport> {
    let before = minrep_norm(f)?.norm_sq;
    if before == 0.0 {
        return arg("unitarity_residual needs a nonzero function");
    }
    let act = minrep_act(g, f, grid, a_max, b_max)?;
    let after = minrep_norm(&act.kernel_part())?.norm_sq;
    Ok(UnitarityReport {
        relative_change: (after - before).abs() / before,
        norm_sq_before: before,
        norm_sq_after: after,
        tail_mass: act.tail_mass,
        non_kernel_mass: act.non_kernel_mass,
    })
}

fn check_beckner_args(n: usize, delta: f64) -> Result<()> {
    if n == 0 {
        return arg("Beckner coefficients need a sphere of dimension n >= 1");
    }
    if !(1.0..=2.0).contains(&delta) {
        return arg(format!("Beckner exponent delta must lie in [1,2], got {delta}"));
    }
    Ok(())
}

/// `gamma_k = Gamma(n/d) Gamma(k+n-n/d) / (Gamma(n-n/d) Gamma(k+n/d))` for
/// `S^n` and exponent `d = delta`. At `delta = 1` this is `1` for `k = 0`
/// and `0` otherwise.
pub fn beckner_gamma(n: usize, delta: f64, k: usize) -> Result<f64> {
    check_beckner_args(n, delta)?;
    if delta == 2.0 || k == 0 {
        return Ok(1.0);
    }
    let (nf, kf) = (n as f64, k as f64);
    let s = nf / delta;
    let r = nf - s;
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok((ln_gamma(s) + ln_gamma(kf + r) - ln_gamma(r) - ln_gamma(kf + s)).exp())
}

/// Exponent `n(1 - 2/delta)` of the power-law lower bound.
pub fn beckner_exponent(n: usize, delta: f64) -> f64 {
    n as f64 * (1.0 - 2.0 / delta)
}

/// `Gamma(n/delta) / Gamma(n - n/delta)`, the large-`k` limit of
/// `gamma_k / k^{n(1-2/delta)}`.
pub fn beckner_asymptotic_constant(n: usize, delta: f64) -> Result<f64> {
    check_beckner_args(n, delta)?;
    let s = n as f64 / delta;
    let r = n as f64 - s;
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok((ln_gamma(s) - ln_gamma(r)).exp())
}

/// Largest `C` with `C k^{n(1-2/delta)} <= gamma_k` for `1 <= k <= k_max`.
pub fn beckner_fit_constant(n: usize, delta: f64, k_max: usize) -> Result<f64> {
    let e = beckner_exponent(n, delta);
    let mut c = f64::INFINITY;
    for k in 1..=k_max.max(1) {
        c = c.min(beckner_gamma(n, delta, k)? / (k as f64).powf(e));
    }
    Ok(c)
}

/// Samples of a function on `S^n` at the nodes of a sphere rule.
#[derive(Debug, Clone)]
pub struct SphereFunction {
    rule: Arc<SphereRule>,
    values: Vec<Complex64>,
}

impl SphereFunction {
    pub fn from_fn(rule: Arc<SphereRule>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..rule.len()).map(|i| f(rule.node(i))).collect();
        SphereFunction { rule, values }
    }
    pub fn from_values(rule: Arc<SphereRule>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != rule.len() {
            return arg(format!("{} samples for a rule with {} nodes", values.len(), rule.len()));
        }
        Ok(SphereFunction { rule, values })
    }
    pub fn rule(&self) -> &SphereRule {
        &self.rule
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    /// `(int |F|^delta d sigma)^{1/delta}` for the normalized measure.
    pub fn lp_norm(&self, delta: f64) -> f64 {
        let w = self.rule.weights();
        let total: f64 = w.iter().sum();
        let s: f64 = self.values.iter().zip(w).map(|(v, w)| w * v.norm().powf(delta)).sum();
        (s / total).powf(1.0 / delta)
    }
    /// `||F_k||^2` for `k <= max_degree`, normalized measure.
    pub fn degree_norms_sq(&self, max_degree: usize) -> Vec<f64> {
        let rule = &self.rule;
        let basis = HarmonicBasis::new(rule.dim(), max_degree);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.len()];
        let mut y = vec![0.0; basis.len()];
        for (i, (v, w)) in self.values.iter().zip(rule.weights()).enumerate() {
            basis.eval(rule.node(i), &mut y);
            for (c, yj) in coeffs.iter_mut().zip(&y) {
                *c += *v * (w * yj);
            }
        }
        let total: f64 = rule.weights().iter().sum();
        (0..=max_degree).map(|k| basis.degree_range(k).map(|j| coeffs[j].norm_sqr()).sum::<f64>() / total).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BecknerReport {
    /// `sum_k gamma_k ||F_k||^2`.
    pub lhs: f64,
    /// `||F||_{L^delta}^2`.
    pub rhs: f64,
    pub holds: bool,
}

/// Both sides of Beckner's inequality on `S^n`, `n = dim - 1`, with the
/// normalized measure; degrees up to `max_degree` are resolved.
pub fn beckner_check(f: &SphereFunction, delta: f64, max_degree: usize) -> Result<BecknerReport> {
    let n = f.rule().dim() - 1;
    check_beckner_args(n, delta)?;
    if 2 * max_degree > f.rule().exact_degree() {
        return arg(format!(
            "degree {max_degree} is not resolved by a rule exact to degree {}",
            f.rule().exact_degree()
        ));
    }
    let norms = f.degree_norms_sq(max_degree);
    let mut lhs = 0.0;
    for (k, m) in norms.iter().enumerate() {
        lhs += beckner_gamma(n, delta, k)? * m;
    }
    let rhs = f.lp_norm(delta).powi(2);
    // Quadrature of |F|^delta is not exact; allow for rounding at equality.
    let holds = lhs <= rhs * (1.0 + 1e-10);
    Ok(BecknerReport { lhs, rhs, holds })
}
