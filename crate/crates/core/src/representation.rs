//! The family `varpi_lambda` of representations of `O(p,q)` on functions on
//! `M`, twisted pull-backs along conformal maps, and homogeneous functions
//! on the light cone.
//!
//! Convention: `varpi_act(g, lambda, F)` returns `varpi_lambda(g^{-1}) F`,
//! i.e. `x -> Omega(g,x)^lambda F(L_g x)`. Consequently
//! `varpi_act(g1, varpi_act(g2, F)) = varpi_act(g2 g1, F)`.

use crate::error::{arg, Result};
use crate::geometry::{nu, project_to_m, ConePoint, GroupElement, Signature, SpherePoint};
use crate::harmonics::{decompose, eval_points, GridFunction, KTypeLabel, QuadratureGrid, SpectralFunction};
use crate::spectral::{apply_yamabe, is_kernel_label};
use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;
use std::sync::Arc;

/// Relative size of non-kernel components tolerated by kernel-only operations.
pub const KERNEL_SUPPORT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistParameter {
    lambda: Complex64,
    exact: Option<Rational64>,
}

impl TwistParameter {
    pub fn new(lambda: Complex64) -> Self {
        TwistParameter { lambda, exact: None }
    }
    pub fn real(lambda: f64) -> Self {
        Self::new(Complex64::new(lambda, 0.0))
    }
    pub fn rational(r: Rational64) -> Self {
        TwistParameter {
            lambda: Complex64::new(*r.numer() as f64 / *r.denom() as f64, 0.0),
            exact: Some(r),
        }
    }
    /// `(m-2)/2` with `m = dim M = p+q-2`: the source of the Yamabe intertwiner,
    /// and the parameter of the minimal representation.
    pub fn yamabe_source(sig: Signature) -> Self {
        Self::rational(Rational64::new(sig.n() as i64 - 4, 2))
    }
    /// `(m+2)/2`, the target of the Yamabe intertwiner.
    pub fn yamabe_target(sig: Signature) -> Self {
        Self::rational(Rational64::new(sig.n() as i64, 2))
    }
    /// `m = dim M`: densities of this weight transform like the volume element.
    pub fn volume(sig: Signature) -> Self {
        Self::rational(Rational64::from_integer(sig.dim_m() as i64))
    }
    pub fn value(&self) -> Complex64 {
        self.lambda
    }
    pub fn exact(&self) -> Option<Rational64> {
        self.exact
    }

    /// `omega^lambda` for `omega > 0`.
    pub fn pow(&self, omega: f64) -> Complex64 {
        match self.exact {
            Some(r) if r.is_integer() => Complex64::new(omega.powi(*r.numer() as i32), 0.0),
            _ if self.lambda.im == 0.0 => Complex64::new(omega.powf(self.lambda.re), 0.0),
            _ => (self.lambda * omega.ln()).exp(),
        }
    }
}

/// `x -> Omega(g,x)^lambda f(L_g x)` for a function given pointwise.
pub fn varpi_pointwise<F>(g: &GroupElement, lambda: TwistParameter, f: F) -> impl Fn(&SpherePoint) -> Complex64 + '_
where
    F: Fn(&SpherePoint) -> Complex64 + 'static,
{
    move |x| {
        let (gx, om) = crate::geometry::act_with_factor(g, x).expect("point matches signature");
        lambda.pow(om) * f(&gx)
    }
}

fn is_minus_identity(g: &GroupElement) -> bool {
    let n = g.sig().n();
    (0..n).all(|i| (0..n).all(|j| g.mat()[(i, j)] == if i == j { -1.0 } else { 0.0 }))
}

fn is_identity(g: &GroupElement) -> bool {
    let n = g.sig().n();
    (0..n).all(|i| (0..n).all(|j| g.mat()[(i, j)] == if i == j { 1.0 } else { 0.0 }))
}

/// Samples of `varpi_lambda(g^{-1}) F` at the nodes of `grid`, with `F`
/// evaluated through its K-type expansion at the moved points.
fn act_samples(g: &GroupElement, lambda: TwistParameter, f: &SpectralFunction, grid: &QuadratureGrid) -> Result<Vec<Complex64>> {
    let (p, q) = (grid.sig().p(), grid.sig().q());
    let n = grid.len();
    let mut us = vec![0.0; n * p];
    let mut vs = vec![0.0; n * q];
    let mut omega = vec![0.0; n];
    us.par_chunks_mut(p)
        .zip(vs.par_chunks_mut(q))
        .zip(omega.par_iter_mut())
        .enumerate()
        .for_each(|(i, ((u, v), om))| {
            *om = g.apply_lift(grid.u(i), grid.v(i), u, v);
        });
    let vals = eval_points(f, &us, &vs)?;
    Ok(vals.into_iter().zip(omega).map(|(x, om)| x * lambda.pow(om)).collect())
}

/// `varpi_lambda(g^{-1}) F` on the grid of `F`.
///
/// The identity and `-I` permute the nodes and need only the samples.
/// Otherwise `F` must carry a K-type expansion (see [`GridFunction::with_spectral`]
/// or [`decompose_attached`]), which is evaluated at the moved points.
pub fn varpi_act(g: &GroupElement, lambda: TwistParameter, f: &GridFunction) -> Result<GridFunction> {
    let grid = f.grid();
    if g.sig() != grid.sig() {
        return arg(format!("group element of {} acting on a function on M for {}", g.sig(), grid.sig()));
    }
    if is_identity(g) {
        return GridFunction::from_values(grid.clone(), f.values().to_vec());
    }
    if is_minus_identity(g) {
        let vals = (0..grid.len()).map(|i| f.values()[grid.antipode(i)]).collect();
        return GridFunction::from_values(grid.clone(), vals);
    }
    let s = f.spectral().ok_or_else(|| {
        crate::error::Error::Argument(
            "function has no K-type expansion; decompose it before acting with a non-trivial group element".into(),
        )
    })?;
    GridFunction::from_values(grid.clone(), act_samples(g, lambda, s, grid)?)
}

/// Decomposes `F` and attaches the expansion to it.
pub fn decompose_attached(f: &GridFunction, a_max: usize, b_max: usize) -> Result<GridFunction> {
    let s = decompose(f, a_max, b_max)?;
    f.clone().with_spectral(s)
}

/// `b`-cutoff matching an `a`-cutoff along the kernel line, `a_max + (p-q)/2`
/// clamped at zero, or `a_max` for odd `p+q`.
pub fn kernel_b_cutoff(sig: Signature, a_max: usize) -> usize {
    if !sig.parity_even() {
        return a_max;
    }
    let b = a_max as i64 + (sig.p() as i64 - sig.q() as i64) / 2;
    b.max(0) as usize
}

/// Output of [`minrep_act`].
#[derive(Debug, Clone)]
pub struct MinrepAction {
    /// Decomposition of `varpi(g^{-1}) F` up to the cutoffs.
    pub result: SpectralFunction,
    /// `sum ||G_{a,b}||^2` over non-kernel labels within the cutoffs.
    pub non_kernel_mass: f64,
    /// `||G||^2` minus everything resolved within the cutoffs.
    pub tail_mass: f64,
}

impl MinrepAction {
    /// The kernel part of the result.
    pub fn kernel_part(&self) -> SpectralFunction {
        let sig = self.result.sig();
        self.result.filter(|l| is_kernel_label(sig, l))
    }
}

pub fn check_kernel_supported(f: &SpectralFunction) -> Result<()> {
    let sig = f.sig();
    let off: f64 = f.components().filter(|(l, _)| !is_kernel_label(sig, *l)).map(|(_, b)| b.norm_sq()).sum();
    let total = f.norm_sq();
    if off > KERNEL_SUPPORT_TOL * KERNEL_SUPPORT_TOL * total.max(f64::MIN_POSITIVE) && off > 0.0 {
        return arg(format!(
            "function is not supported on the kernel K-types: relative off-kernel norm {:e}",
            (off / total).sqrt()
        ));
    }
    Ok(())
}

/// The minimal representation: `varpi_act` at `lambda = (p+q-4)/2` on a
/// kernel-supported `F`, re-decomposed with cutoffs `(a_max, b_max)`.
pub fn minrep_act(
    g: &GroupElement,
    f: &SpectralFunction,
    grid: &Arc<QuadratureGrid>,
    a_max: usize,
    b_max: usize,
) -> Result<MinrepAction> {
    let sig = f.sig();
    if grid.sig() != sig || g.sig() != sig {
        return arg("minrep_act: signature mismatch");
    }
    check_kernel_supported(f)?;
    if is_minus_identity(g) {
        // -I lies in K and acts on H^a (x) H^b by (-1)^{a+b}.
        let result = f
            .filter(|l| l.a <= a_max && l.b <= b_max)
            .map_diagonal(|l| Complex64::new(ktype_parity(l) as f64, 0.0));
        let tail_mass = f.norm_sq() - result.norm_sq();
        let mut result = result;
        result.set_tail_mass(tail_mass);
        return Ok(MinrepAction { result, non_kernel_mass: 0.0, tail_mass });
    }
    let lambda = TwistParameter::yamabe_source(sig);
    let vals = act_samples(g, lambda, f, grid)?;
    let gf = GridFunction::from_values(grid.clone(), vals)?;
    let result = decompose(&gf, a_max, b_max)?;
    let non_kernel_mass = result
        .components()
        .filter(|(l, _)| !is_kernel_label(sig, *l))
        .map(|(_, b)| b.norm_sq())
        .sum();
    let tail_mass = result.tail_mass();
    Ok(MinrepAction { result, non_kernel_mass, tail_mass })
}

/// Output of [`intertwine_residual`].
#[derive(Debug, Clone, Copy)]
pub struct IntertwineReport {
    /// `||Y varpi_{(m-2)/2}(g^{-1}) F - varpi_{(m+2)/2}(g^{-1}) Y F||` within the cutoffs.
    pub residual: f64,
    pub norm_f: f64,
    pub lhs_tail_mass: f64,
    pub rhs_tail_mass: f64,
}

/// Checks that the Yamabe operator `Y` intertwines `varpi_{(m-2)/2}` with
/// `varpi_{(m+2)/2}`, both sides computed in K-type coordinates.
pub fn intertwine_residual(g: &GroupElement, f: &GridFunction, a_max: usize, b_max: usize) -> Result<IntertwineReport> {
    let grid = f.grid();
    let sig = grid.sig();
    let s = f.spectral().ok_or_else(|| {
        crate::error::Error::Argument("intertwine_residual needs a function with a K-type expansion".into())
    })?;
    let l1 = TwistParameter::yamabe_source(sig);
    let l2 = TwistParameter::yamabe_target(sig);

    let g1 = GridFunction::from_values(grid.clone(), act_samples(g, l1, s, grid)?)?;
    let d1 = decompose(&g1, a_max, b_max)?;
    let lhs = apply_yamabe(&d1);

    let yf = apply_yamabe(s);
    let g2 = GridFunction::from_values(grid.clone(), act_samples(g, l2, &yf, grid)?)?;
    let rhs = decompose(&g2, a_max, b_max)?;

    Ok(IntertwineReport {
        residual: lhs.sub(&rhs)?.norm(),
        norm_f: f.norm(),
        lhs_tail_mass: d1.tail_mass(),
        rhs_tail_mass: rhs.tail_mass(),
    })
}

/// `||varpi_act(g1, varpi_act(g2, F)) - varpi_act(g2 g1, F)||_{L^2}`, the
/// intermediate function re-expanded with cutoffs `(a_max, b_max)`.
pub fn group_law_residual(
    g1: &GroupElement,
    g2: &GroupElement,
    lambda: TwistParameter,
    f: &GridFunction,
    a_max: usize,
    b_max: usize,
) -> Result<f64> {
    let inner = decompose_attached(&varpi_act(g2, lambda, f)?, a_max, b_max)?;
    let lhs = varpi_act(g1, lambda, &inner)?;
    let rhs = varpi_act(&g2.mul(g1)?, lambda, f)?;
    Ok(lhs.sub(&rhs)?.norm())
}

/// `|int varpi_m(g^{-1}) F - int F|` with `m = dim M`: densities of weight
/// `m` transform like the volume element.
pub fn volume_element_residual(g: &GroupElement, f: &GridFunction) -> Result<f64> {
    let moved = varpi_act(g, TwistParameter::volume(f.grid().sig()), f)?;
    Ok((moved.integral() - f.integral()).norm())
}

type PointMap<P> = Arc<dyn Fn(&P) -> P + Send + Sync>;
type Factor<P> = Arc<dyn Fn(&P) -> f64 + Send + Sync>;
/// A scalar function given pointwise.
pub type PointFn<P> = Arc<dyn Fn(&P) -> Complex64 + Send + Sync>;

/// A conformal map `Phi` with `Phi^* g_N = Omega^2 g_M`.
#[derive(Clone)]
pub struct ConformalMap<P> {
    phi: PointMap<P>,
    omega: Factor<P>,
}

impl<P: 'static> ConformalMap<P> {
    pub fn new(phi: impl Fn(&P) -> P + Send + Sync + 'static, omega: impl Fn(&P) -> f64 + Send + Sync + 'static) -> Self {
        ConformalMap { phi: Arc::new(phi), omega: Arc::new(omega) }
    }

    pub fn identity() -> Self
    where
        P: Clone,
    {
        Self::new(|x: &P| x.clone(), |_| 1.0)
    }

    pub fn apply(&self, x: &P) -> P {
        (self.phi)(x)
    }
    pub fn factor(&self, x: &P) -> f64 {
        (self.omega)(x)
    }

    /// `self o inner`, with factor `Omega(inner(x)) Omega_inner(x)`.
    pub fn compose(&self, inner: &ConformalMap<P>) -> ConformalMap<P> {
        let (p1, o1) = (self.phi.clone(), self.omega.clone());
        let (p2, o2) = (inner.phi.clone(), inner.omega.clone());
        let p2b = p2.clone();
        ConformalMap {
            phi: Arc::new(move |x| p1(&p2(x))),
            omega: Arc::new(move |x| o1(&p2b(x)) * o2(x)),
        }
    }

    /// The inverse map, given `Phi^{-1}`; its factor is `1 / Omega(Phi^{-1} y)`.
    pub fn inverse_with(&self, phi_inv: impl Fn(&P) -> P + Send + Sync + 'static) -> ConformalMap<P> {
        let inv: PointMap<P> = Arc::new(phi_inv);
        let (o, inv2) = (self.omega.clone(), inv.clone());
        ConformalMap { phi: inv, omega: Arc::new(move |y| 1.0 / o(&inv2(y))) }
    }
}

/// `x -> Omega(x)^lambda f(Phi(x))`.
pub fn twisted_pullback<P: 'static>(map: &ConformalMap<P>, lambda: TwistParameter, f: PointFn<P>) -> PointFn<P> {
    let (phi, omega) = (map.phi.clone(), map.omega.clone());
    Arc::new(move |x| lambda.pow(omega(x)) * f(&phi(x)))
}

/// `xi -> nu(xi)^{deg} f(xi / nu(xi))` for `f` given by a K-type expansion.
pub struct HomogeneousExtension {
    f: SpectralFunction,
    deg: Complex64,
}

impl HomogeneousExtension {
    pub fn eval(&self, xi: &ConePoint) -> Complex64 {
        let z = project_to_m(xi);
        let t = nu(xi);
        let scale = if self.deg == Complex64::new(0.0, 0.0) { Complex64::new(1.0, 0.0) } else { (self.deg * t.ln()).exp() };
        scale * self.f.evaluator().eval(z.u(), z.v())
    }
}

/// Extension of `f` on `M` to a function on the cone, homogeneous of degree `deg`.
pub fn homogeneous_extension(f: &GridFunction, deg: Complex64) -> Result<HomogeneousExtension> {
    let s = f.spectral().ok_or_else(|| {
        crate::error::Error::Argument("homogeneous_extension needs a function with a K-type expansion".into())
    })?;
    Ok(HomogeneousExtension { f: s.clone(), deg })
}

/// Even and odd parts under `(u,v) -> (-u,-v)`.
pub fn parity_component(f: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    let grid = f.grid();
    for i in 0..grid.len() {
        let j = grid.antipode(i);
        let ok = grid.u(i).iter().zip(grid.u(j)).all(|(a, b)| *a == -*b)
            && grid.v(i).iter().zip(grid.v(j)).all(|(a, b)| *a == -*b);
        if !ok {
            return arg("grid is not symmetric under the antipodal map");
        }
    }
    let vals = f.values();
    let even: Vec<Complex64> = (0..grid.len()).map(|i| 0.5 * (vals[i] + vals[grid.antipode(i)])).collect();
    let odd: Vec<Complex64> = vals.iter().zip(&even).map(|(v, e)| v - e).collect();
    Ok((GridFunction::from_values(grid.clone(), even)?, GridFunction::from_values(grid.clone(), odd)?))
}

/// `(-1)^{a+b}`: the parity of the K-type `(a,b)` under `(u,v) -> (-u,-v)`.
pub fn ktype_parity(label: KTypeLabel) -> i8 {
    if (label.a + label.b) % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boost, boost_in_plane, m0, plane_rotation, random_element, random_sphere_point};
    use crate::harmonics::{build_grid, synthesize};
    use crate::spectral::{kernel_ktypes, m0_expected};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig(p: usize, q: usize) -> Signature {
        Signature::new(p, q).unwrap()
    }
    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn poly(grid: &Arc<QuadratureGrid>) -> GridFunction {
        let f = GridFunction::from_fn(grid.clone(), |u, v| c(u[0] * v[0] + 0.5 * u[1] - 0.25 * v[1] * v[1] + 0.1));
        decompose_attached(&f, 3, 3).unwrap()
    }

    #[test]
    fn identity_and_rotations() {
        let s = sig(3, 2);
        let grid = build_grid(s, 12).unwrap();
        let f = poly(&grid);
        let id = varpi_act(&GroupElement::identity(s), TwistParameter::real(1.3), &f).unwrap();
        assert_eq!(id.values(), f.values());
        let r = plane_rotation(s, 0, 2, 0.8).unwrap().mul(&plane_rotation(s, 3, 4, -0.3).unwrap()).unwrap();
        let rf = varpi_act(&r, TwistParameter::real(0.7), &f).unwrap();
        assert!((rf.norm() - f.norm()).abs() < 1e-12 * f.norm());
    }

    #[test]
    fn needs_spectral_expansion() {
        let s = sig(2, 2);
        let grid = build_grid(s, 6).unwrap();
        let f = GridFunction::from_real_fn(grid, |u, _| u[0]);
        let err = varpi_act(&boost(s, 0.1), TwistParameter::real(0.0), &f).unwrap_err();
        assert!(err.to_string().contains("decompose"));
        assert!(varpi_act(&m0(s), TwistParameter::real(0.0), &f).is_ok());
    }

    #[test]
    fn group_law_and_volume_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(p, q) in &[(2, 2), (3, 2)] {
            let s = sig(p, q);
            let grid = build_grid(s, 40).unwrap();
            let f = poly(&grid);
            for lam in [0.0, 1.0, (p + q) as f64 / 2.0] {
                let g1 = random_element(s, 0.3, &mut rng);
                let g2 = random_element(s, 0.3, &mut rng);
                let r = group_law_residual(&g1, &g2, TwistParameter::real(lam), &f, 22, 22).unwrap();
                assert!(r <= 1e-8 * f.norm(), "{s} lambda={lam}: {r:e}");
            }
            let g = random_element(s, 0.3, &mut rng);
            let r = volume_element_residual(&g, &f).unwrap();
            assert!(r <= 1e-8 * f.integral().norm().max(1.0), "{s}: {r:e}");
        }
    }

    #[test]
    fn minrep_m0_and_rotation() {
        for &(p, q) in &[(4, 2), (3, 3)] {
            let s = sig(p, q);
            let grid = build_grid(s, 10).unwrap();
            let e = m0_expected(s).unwrap() as f64;
            for l in kernel_ktypes(s, 3) {
                let f = SpectralFunction::unit_component(s, l).unwrap();
                let out = minrep_act(&m0(s), &f, &grid, 4, 5).unwrap();
                assert_eq!(out.result.sub(&f.scaled(c(e))).unwrap().norm(), 0.0, "{s} {l}");
                // the sampled path agrees to rounding
                let fs = synthesize(&f, &grid).unwrap();
                let moved = varpi_act(&m0(s), TwistParameter::yamabe_source(s), &fs).unwrap();
                let d = decompose(&moved, 4, 5).unwrap().sub(&f.scaled(c(e))).unwrap();
                assert!(d.norm() <= 1e-13, "{s} {l}: {:e}", d.norm());
            }
            let f = SpectralFunction::unit_component(s, kernel_ktypes(s, 2)[1]).unwrap();
            let r = plane_rotation(s, 0, 1, 0.4).unwrap();
            let out = minrep_act(&r, &f, &grid, 4, 5).unwrap();
            for (l, b) in out.result.components() {
                if l != kernel_ktypes(s, 2)[1] {
                    assert!(b.norm_sq() < 1e-26);
                }
            }
        }
    }

    #[test]
    fn minrep_rejects_non_kernel() {
        let s = sig(4, 2);
        let grid = build_grid(s, 6).unwrap();
        let f = SpectralFunction::unit_component(s, KTypeLabel::new(1, 1)).unwrap();
        assert!(minrep_act(&boost(s, 0.1), &f, &grid, 2, 2).is_err());
    }

    #[test]
    fn kernel_invariance_small() {
        let s = sig(4, 2);
        let grid = build_grid(s, 20).unwrap();
        let f = SpectralFunction::unit_component(s, KTypeLabel::new(0, 1)).unwrap();
        let out = minrep_act(&boost(s, 0.2), &f, &grid, 6, 7).unwrap();
        assert!(out.non_kernel_mass.sqrt() <= 1e-6, "{:e}", out.non_kernel_mass);
    }

    #[test]
    fn intertwining_trivial_cases() {
        let s = sig(2, 2);
        let grid = build_grid(s, 24).unwrap();
        let f = decompose_attached(&GridFunction::from_real_fn(grid.clone(), |u, v| u[0] * v[0] + u[1]), 4, 4).unwrap();
        let r = intertwine_residual(&GroupElement::identity(s), &f, 8, 8).unwrap();
        assert!(r.residual <= 1e-12);
        let r = intertwine_residual(&plane_rotation(s, 0, 1, 0.5).unwrap(), &f, 8, 8).unwrap();
        assert!(r.residual <= 1e-10);
        let s = sig(3, 2);
        let grid = build_grid(s, 30).unwrap();
        let f = decompose_attached(&GridFunction::from_real_fn(grid.clone(), |u, v| u[0] * v[0] + u[1]), 4, 4).unwrap();
        let r = intertwine_residual(&boost_in_plane(s, 1, 0, 0.2).unwrap(), &f, 10, 10).unwrap();
        assert!(r.residual <= 1e-6 * r.norm_f, "{:e}", r.residual);
    }

    #[test]
    fn twisted_pullback_inverse_and_composition() {
        // Inversion in the unit sphere of R^3: Omega = 1/|x|^2, self-inverse.
        type P = Vec<f64>;
        let inv = ConformalMap::<P>::new(
            |x| {
                let r2: f64 = x.iter().map(|a| a * a).sum();
                x.iter().map(|a| a / r2).collect()
            },
            |x| 1.0 / x.iter().map(|a| a * a).sum::<f64>(),
        );
        let inv_inv = inv.inverse_with(|y: &P| {
            let r2: f64 = y.iter().map(|a| a * a).sum();
            y.iter().map(|a| a / r2).collect()
        });
        let lam = TwistParameter::real(0.5);
        let f: PointFn<P> = Arc::new(|x| c((x[0] + 2.0 * x[1]).sin() + x[2]));
        let there = twisted_pullback(&inv, lam, f.clone());
        let back = twisted_pullback(&inv_inv, lam, there);
        let scale = ConformalMap::<P>::new(|x| x.iter().map(|a| 2.0 * a).collect(), |_| 2.0);
        let comp = twisted_pullback(&scale.compose(&inv), lam, f.clone());
        let seq = twisted_pullback(&inv, lam, twisted_pullback(&scale, lam, f.clone()));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let x: P = (0..3).map(|_| rand::Rng::gen_range(&mut rng, -2.0..2.0)).collect();
            assert!((back(&x) - f(&x)).norm() <= 1e-10);
            assert!((comp(&x) - seq(&x)).norm() <= 1e-10);
        }
        let id = twisted_pullback(&ConformalMap::<P>::identity(), lam, f.clone());
        assert_eq!(id(&vec![0.1, 0.2, 0.3]), f(&vec![0.1, 0.2, 0.3]));
    }

    #[test]
    fn squaring_map_preserves_harmonicity() {
        // z -> z^2 on the plane is conformal with Omega = 2|z|; in dimension 2
        // the Yamabe parameter is 0 and harmonic functions pull back to harmonic ones.
        type P = [f64; 2];
        let sq = ConformalMap::<P>::new(|z| [z[0] * z[0] - z[1] * z[1], 2.0 * z[0] * z[1]], |z| 2.0 * z[0].hypot(z[1]));
        let f: PointFn<P> = Arc::new(|w| c(0.5 * (w[0] * w[0] + w[1] * w[1]).ln()));
        let h = twisted_pullback(&sq, TwistParameter::real(0.0), f);
        let (n, lo, hi) = (200usize, 0.6, 1.4);
        let step = (hi - lo) / (n - 1) as f64;
        let mut sup: f64 = 0.0;
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let (x, y) = (lo + i as f64 * step, lo + j as f64 * step);
                let lap = h(&[x + step, y]) + h(&[x - step, y]) + h(&[x, y + step]) + h(&[x, y - step]) - 4.0 * h(&[x, y]);
                sup = sup.max(lap.norm() / (step * step));
            }
        }
        assert!(sup <= 1e-4, "{sup:e}");
    }

    #[test]
    fn homogeneous_extension_properties() {
        let s = sig(3, 2);
        let grid = build_grid(s, 12).unwrap();
        let f = poly(&grid);
        let one = decompose_attached(&GridFunction::from_real_fn(grid.clone(), |_, _| 1.0), 0, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e1 = homogeneous_extension(&one, c(0.0)).unwrap();
        let u1 = decompose_attached(&GridFunction::from_real_fn(grid.clone(), |u, _| u[0]), 1, 1).unwrap();
        let x1 = homogeneous_extension(&u1, c(1.0)).unwrap();
        for _ in 0..10 {
            let z = random_sphere_point(s, &mut rng);
            let xi = ConePoint::from_sphere(&z, 2.0).unwrap();
            assert!((e1.eval(&xi) - c(1.0)).norm() < 1e-13);
            assert!((x1.eval(&xi) - c(xi.x()[0])).norm() < 1e-13);
        }
        // restriction to M
        let ef = homogeneous_extension(&f, c(-0.7)).unwrap();
        for i in (0..grid.len()).step_by(17) {
            let xi = ConePoint::from_sphere(&grid.node(i), 1.0).unwrap();
            assert!((ef.eval(&xi) - f.values()[i]).norm() < 1e-13);
        }
        // equivariance: extension of varpi(g^-1) f at xi equals extension of f at g xi
        let lam = TwistParameter::real(0.7);
        let fs = f.spectral().unwrap().clone();
        let ext = homogeneous_extension(&f, -lam.value()).unwrap();
        for _ in 0..10 {
            let g = random_element(s, 0.5, &mut rng);
            let fs2 = fs.clone();
            let moved = varpi_pointwise(&g, lam, move |z: &SpherePoint| fs2.evaluator().eval(z.u(), z.v()));
            let z = random_sphere_point(s, &mut rng);
            let t = 0.5 + rand::Rng::gen::<f64>(&mut rng);
            let xi = ConePoint::from_sphere(&z, t).unwrap();
            let lhs = (-lam.value() * t.ln()).exp() * moved(&z);
            let rhs = ext.eval(&xi.transform(&g).unwrap());
            assert!((lhs - rhs).norm() <= 1e-10, "{:e}", (lhs - rhs).norm());
        }
    }

    #[test]
    fn parity_examples() {
        let s = sig(4, 2);
        let grid = build_grid(s, 8).unwrap();
        let f = GridFunction::from_real_fn(grid.clone(), |u, v| u[0] * v[0]);
        let (e, o) = parity_component(&f).unwrap();
        assert!(o.norm() == 0.0 && e.sub(&f).unwrap().norm() == 0.0);
        let f = GridFunction::from_real_fn(grid.clone(), |u, _| u[0]);
        let (e, o) = parity_component(&f).unwrap();
        assert!(e.norm() == 0.0 && o.sub(&f).unwrap().norm() == 0.0);
        for l in kernel_ktypes(s, 3) {
            let comp = synthesize(&SpectralFunction::unit_component(s, l).unwrap(), &grid).unwrap();
            let (e, o) = parity_component(&comp).unwrap();
            let eps = m0_expected(s).unwrap();
            assert_eq!(ktype_parity(l), eps);
            let (keep, drop) = if eps == 1 { (e, o) } else { (o, e) };
            assert!(drop.norm() < 1e-13 && (keep.norm() - 1.0).abs() < 1e-12);
        }
    }
}
