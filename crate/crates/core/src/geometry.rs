//! The group `O(p,q)`, its null cone and the quotient `M = S^{p-1} x S^{q-1}`.

use crate::error::{arg, Error, Result};
use nalgebra::DMatrix;
use num_rational::Rational64;
use rand::Rng;

/// Tolerance on `g^T I_{p,q} g = I_{p,q}` accepted by [`GroupElement::new`].
pub const FORM_TOL: f64 = 1e-12;
/// Tolerance on the unit-norm and null-cone invariants.
pub const POINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    p: usize,
    q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return arg(format!("signature ({p},{q}): p and q must be positive"));
        }
        Ok(Signature { p, q })
    }

    pub fn p(&self) -> usize {
        self.p
    }
    pub fn q(&self) -> usize {
        self.q
    }
    /// Dimension of the ambient space `R^{p,q}`.
    pub fn n(&self) -> usize {
        self.p + self.q
    }
    /// Dimension of `M`.
    pub fn dim_m(&self) -> usize {
        self.p + self.q - 2
    }
    pub fn rho(&self) -> Rational64 {
        Rational64::new(self.n() as i64 - 2, 2)
    }
    pub fn parity_even(&self) -> bool {
        self.n() % 2 == 0
    }
    /// `(q, p)`.
    pub fn swapped(&self) -> Signature {
        Signature { p: self.q, q: self.p }
    }

    /// Grid-based computations need both spheres to be connected.
    pub fn require_numeric(&self) -> Result<()> {
        if self.p < 2 || self.q < 2 {
            return Err(Error::Unsupported(format!(
                "signature {self}: numeric operations need p >= 2 and q >= 2"
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// `sum x_i x'_i - sum y_j y'_j`.
pub fn indefinite_form(sig: Signature, z1: &[f64], z2: &[f64]) -> Result<f64> {
    if z1.len() != sig.n() || z2.len() != sig.n() {
        return arg(format!(
            "indefinite_form: expected vectors of length {}, got {} and {}",
            sig.n(),
            z1.len(),
            z2.len()
        ));
    }
    let (x1, y1) = z1.split_at(sig.p);
    let (x2, y2) = z2.split_at(sig.p);
    Ok(dot(x1, x2) - dot(y1, y2))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    sig: Signature,
    mat: DMatrix<f64>,
}

impl GroupElement {
    pub fn new(sig: Signature, mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() != sig.n() || mat.ncols() != sig.n() {
            return arg(format!(
                "group element for {sig} must be {0}x{0}, got {1}x{2}",
                sig.n(),
                mat.nrows(),
                mat.ncols()
            ));
        }
        let g = GroupElement { sig, mat };
        let dev = g.form_defect();
        if !(dev <= FORM_TOL) {
            return arg(format!("matrix does not preserve I_(p,q): defect {dev:e}"));
        }
        Ok(g)
    }

    pub fn identity(sig: Signature) -> Self {
        GroupElement { sig, mat: DMatrix::identity(sig.n(), sig.n()) }
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }
    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// `max |(g^T I g - I)_{ij}|`.
    pub fn form_defect(&self) -> f64 {
        let j = form_matrix(self.sig);
        let d = self.mat.transpose() * &j * &self.mat - j;
        d.amax()
    }

    /// Matrix product; the product of two group elements is one.
    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        same_sig(self.sig, other.sig)?;
        Ok(GroupElement { sig: self.sig, mat: &self.mat * &other.mat })
    }

    /// `g^{-1} = I g^T I`, exact for elements of the group.
    pub fn inverse(&self) -> GroupElement {
        let j = form_matrix(self.sig);
        GroupElement { sig: self.sig, mat: &j * self.mat.transpose() * &j }
    }

    /// Applies the matrix to the lift `(u, v)` of a point of `M` and
    /// returns the projected image together with `Omega = 1/nu(g z)`.
    pub(crate) fn apply_lift(&self, u: &[f64], v: &[f64], out_u: &mut [f64], out_v: &mut [f64]) -> f64 {
        let p = self.sig.p;
        let n = self.sig.n();
        for r in 0..n {
            let mut s = 0.0;
            for c in 0..p {
                s += self.mat[(r, c)] * u[c];
            }
            for c in p..n {
                s += self.mat[(r, c)] * v[c - p];
            }
            if r < p {
                out_u[r] = s;
            } else {
                out_v[r - p] = s;
            }
        }
        let nx = norm(out_u);
        let ny = norm(out_v);
        out_u.iter_mut().for_each(|x| *x /= nx);
        out_v.iter_mut().for_each(|y| *y /= ny);
        1.0 / nx
    }
}

fn same_sig(a: Signature, b: Signature) -> Result<()> {
    if a != b {
        return arg(format!("signature mismatch: {a} vs {b}"));
    }
    Ok(())
}

/// `I_{p,q} = diag(1,...,1,-1,...,-1)`.
pub fn form_matrix(sig: Signature) -> DMatrix<f64> {
    DMatrix::from_fn(sig.n(), sig.n(), |i, j| match (i == j, i < sig.p) {
        (false, _) => 0.0,
        (true, true) => 1.0,
        (true, false) => -1.0,
    })
}

/// A nonzero null vector `(x, y)`, `|x| = |y|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl ConePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let (nx, ny) = (norm(&x), norm(&y));
        if x.is_empty() || y.is_empty() {
            return arg("cone point needs nonempty x and y");
        }
        if !(nx > 0.0) || !((nx - ny).abs() <= POINT_TOL * nx.max(1.0)) {
            return arg(format!("not on the light cone: |x| = {nx}, |y| = {ny}"));
        }
        Ok(ConePoint { x, y })
    }

    /// The point `t (u, v)`.
    pub fn from_sphere(z: &SpherePoint, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return arg(format!("cone scale must be positive, got {t}"));
        }
        Ok(ConePoint {
            x: z.u.iter().map(|a| t * a).collect(),
            y: z.v.iter().map(|a| t * a).collect(),
        })
    }

    /// The base point `(1,0,...,0; 0,...,0,1)`.
    pub fn base(sig: Signature) -> Self {
        let mut x = vec![0.0; sig.p];
        let mut y = vec![0.0; sig.q];
        x[0] = 1.0;
        y[sig.q - 1] = 1.0;
        ConePoint { x, y }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn y(&self) -> &[f64] {
        &self.y
    }
    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    /// Linear action of `g`; the cone is preserved.
    pub fn transform(&self, g: &GroupElement) -> Result<ConePoint> {
        check_dims(g.sig, self.x.len(), self.y.len())?;
        let z = g.mat() * nalgebra::DVector::from_vec(self.coords());
        let (x, y) = z.as_slice().split_at(g.sig.p);
        Ok(ConePoint { x: x.to_vec(), y: y.to_vec() })
    }
}

fn check_dims(sig: Signature, p: usize, q: usize) -> Result<()> {
    if p != sig.p || q != sig.q {
        return arg(format!("point in R^{p} x R^{q} does not match signature {sig}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl SpherePoint {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let (nu_, nv) = (norm(&u), norm(&v));
        if !((nu_ - 1.0).abs() <= POINT_TOL) || !((nv - 1.0).abs() <= POINT_TOL) {
            return arg(format!("not on S^(p-1) x S^(q-1): |u| = {nu_}, |v| = {nv}"));
        }
        Ok(SpherePoint { u, v })
    }

    /// Normalizes both factors; fails on a zero factor.
    pub fn normalized(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let (a, b) = (norm(&u), norm(&v));
        if !(a > 0.0) || !(b > 0.0) {
            return arg("cannot normalize a zero vector");
        }
        Ok(SpherePoint {
            u: u.into_iter().map(|x| x / a).collect(),
            v: v.into_iter().map(|x| x / b).collect(),
        })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }
    pub fn v(&self) -> &[f64] {
        &self.v
    }
    pub fn antipode(&self) -> SpherePoint {
        SpherePoint {
            u: self.u.iter().map(|x| -x).collect(),
            v: self.v.iter().map(|x| -x).collect(),
        }
    }
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        let du: f64 = self.u.iter().zip(&other.u).map(|(a, b)| (a - b).powi(2)).sum();
        let dv: f64 = self.v.iter().zip(&other.v).map(|(a, b)| (a - b).powi(2)).sum();
        (du + dv).sqrt()
    }
}

pub fn project_to_m(xi: &ConePoint) -> SpherePoint {
    let (a, b) = (norm(&xi.x), norm(&xi.y));
    SpherePoint {
        u: xi.x.iter().map(|t| t / a).collect(),
        v: xi.y.iter().map(|t| t / b).collect(),
    }
}

pub fn nu(xi: &ConePoint) -> f64 {
    norm(&xi.x)
}

/// `nu(xi)^{-2}`: the conformal factor (squared) of the projection restricted
/// to any section through `xi` transversal to the rays.
pub fn section_conformal_factor(xi: &ConePoint) -> f64 {
    nu(xi).powi(-2)
}

pub fn act(g: &GroupElement, z: &SpherePoint) -> Result<SpherePoint> {
    Ok(act_with_factor(g, z)?.0)
}

pub fn conformal_factor(g: &GroupElement, z: &SpherePoint) -> Result<f64> {
    Ok(act_with_factor(g, z)?.1)
}

/// `(L_g z, Omega(g, z))` in one pass.
pub fn act_with_factor(g: &GroupElement, z: &SpherePoint) -> Result<(SpherePoint, f64)> {
    check_dims(g.sig, z.u.len(), z.v.len())?;
    let mut u = vec![0.0; g.sig.p];
    let mut v = vec![0.0; g.sig.q];
    let om = g.apply_lift(&z.u, &z.v, &mut u, &mut v);
    Ok((SpherePoint { u, v }, om))
}

/// `|Omega(g1 g2, z) - Omega(g1, L_{g2} z) Omega(g2, z)|`.
pub fn cocycle_residual(g1: &GroupElement, g2: &GroupElement, z: &SpherePoint) -> Result<f64> {
    let g12 = g1.mul(g2)?;
    let lhs = conformal_factor(&g12, z)?;
    let (z2, om2) = act_with_factor(g2, z)?;
    let om1 = conformal_factor(g1, &z2)?;
    Ok((lhs - om1 * om2).abs())
}

/// Rotation by `theta` in the coordinate plane `(i, j)` of `R^{p+q}`;
/// both indices must lie in the same block.
pub fn plane_rotation(sig: Signature, i: usize, j: usize, theta: f64) -> Result<GroupElement> {
    let n = sig.n();
    if i >= n || j >= n || i == j || ((i < sig.p) != (j < sig.p)) {
        return arg(format!("rotation plane ({i},{j}) must lie within one block of {sig}"));
    }
    let mut m = DMatrix::identity(n, n);
    let (s, c) = theta.sin_cos();
    m[(i, i)] = c;
    m[(j, j)] = c;
    m[(i, j)] = -s;
    m[(j, i)] = s;
    Ok(GroupElement { sig, mat: m })
}

/// `exp(t (E_{i,p+j} + E_{p+j,i}))`: hyperbolic rotation mixing `x_i` and `y_j`
/// (zero-based indices within each block).
pub fn boost_in_plane(sig: Signature, i: usize, j: usize, t: f64) -> Result<GroupElement> {
    if i >= sig.p || j >= sig.q {
        return arg(format!("boost plane (x_{i}, y_{j}) out of range for {sig}"));
    }
    let n = sig.n();
    let k = sig.p + j;
    let mut m = DMatrix::identity(n, n);
    let (c, s) = (t.cosh(), t.sinh());
    m[(i, i)] = c;
    m[(k, k)] = c;
    m[(i, k)] = s;
    m[(k, i)] = s;
    Ok(GroupElement { sig, mat: m })
}

/// `exp(tE)` with `E = E_{1,p+q} + E_{p+q,1}`; acts on the base point of the
/// cone by `e^t`.
pub fn boost(sig: Signature, t: f64) -> GroupElement {
    boost_in_plane(sig, 0, sig.q - 1, t).expect("indices in range")
}

/// `-I_{p+q}`.
pub fn m0(sig: Signature) -> GroupElement {
    GroupElement { sig, mat: -DMatrix::identity(sig.n(), sig.n()) }
}

/// Block-diagonal element `diag(r, s)` of `O(p) x O(q)`.
pub fn block_diag(sig: Signature, r: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<GroupElement> {
    let (p, q) = (sig.p, sig.q);
    if r.shape() != (p, p) || s.shape() != (q, q) {
        return arg("block_diag: block shapes do not match the signature");
    }
    let mut m = DMatrix::zeros(p + q, p + q);
    m.view_mut((0, 0), (p, p)).copy_from(r);
    m.view_mut((p, p), (q, q)).copy_from(s);
    GroupElement::new(sig, m)
}

/// Test-sweep generators: a plane rotation in each adjacent coordinate
/// plane of both blocks, the boost `exp(0.3 E)`, a boost in a second plane
/// when available, and `m0`.
pub fn make_generators(sig: Signature) -> Vec<GroupElement> {
    let mut out = Vec::new();
    for i in 0..sig.p.saturating_sub(1) {
        out.push(plane_rotation(sig, i, i + 1, 0.7 + 0.1 * i as f64).unwrap());
    }
    for j in 0..sig.q.saturating_sub(1) {
        out.push(plane_rotation(sig, sig.p + j, sig.p + j + 1, -0.4 - 0.1 * j as f64).unwrap());
    }
    out.push(boost(sig, 0.3));
    if sig.p > 1 {
        out.push(boost_in_plane(sig, sig.p - 1, 0, -0.2).unwrap());
    }
    out.push(m0(sig));
    out
}

/// A random element of `O(p) x O(q)`: products of Givens rotations with
/// uniform angles over every coordinate plane of each block.
pub fn random_rotation<R: Rng + ?Sized>(sig: Signature, rng: &mut R) -> GroupElement {
    let mut g = GroupElement::identity(sig);
    let n = sig.n();
    for i in 0..n {
        for j in i + 1..n {
            if (i < sig.p) == (j < sig.p) {
                let th = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                g = plane_rotation(sig, i, j, th).unwrap().mul(&g).unwrap();
            }
        }
    }
    g
}

/// `k1 exp(tE) k2` with random rotations `k1, k2` and `|t| <= max_boost`.
pub fn random_element<R: Rng + ?Sized>(sig: Signature, max_boost: f64, rng: &mut R) -> GroupElement {
    let k1 = random_rotation(sig, rng);
    let k2 = random_rotation(sig, rng);
    let t = if max_boost > 0.0 { rng.gen_range(-max_boost..=max_boost) } else { 0.0 };
    k1.mul(&boost(sig, t)).unwrap().mul(&k2).unwrap()
}

/// A uniformly distributed point of `M`.
pub fn random_sphere_point<R: Rng + ?Sized>(sig: Signature, rng: &mut R) -> SpherePoint {
    loop {
        let u: Vec<f64> = (0..sig.p).map(|_| gaussian(rng)).collect();
        let v: Vec<f64> = (0..sig.q).map(|_| gaussian(rng)).collect();
        if let Ok(z) = SpherePoint::normalized(u, v) {
            return z;
        }
    }
}

/// Standard normal sample (Box-Muller).
fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::{any, prop_assert, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig(p: usize, q: usize) -> Signature {
        Signature::new(p, q).unwrap()
    }

    #[test]
    fn signature_constants() {
        let s = sig(4, 2);
        assert_eq!(s.rho(), Rational64::new(2, 1));
        assert!(s.parity_even());
        assert_eq!(sig(3, 2).rho(), Rational64::new(3, 2));
        assert!(Signature::new(0, 2).is_err());
        assert!(sig(1, 3).require_numeric().is_err());
    }

    #[test]
    fn form_examples() {
        let s = sig(2, 2);
        assert_eq!(indefinite_form(s, &[1., 0., 0., 1.], &[1., 0., 0., 1.]).unwrap(), 0.0);
        assert_eq!(indefinite_form(s, &[1., 0., 0., 0.], &[0., 0., 0., 1.]).unwrap(), 0.0);
        assert_eq!(indefinite_form(sig(3, 1), &[1., 2., 3., 1.], &[1., 2., 3., 1.]).unwrap(), 13.0);
        assert!(indefinite_form(s, &[1., 0.], &[0., 1.]).is_err());
    }

    #[test]
    fn projection_examples() {
        let xi = ConePoint::new(vec![3., 0.], vec![0., 3.]).unwrap();
        let z = project_to_m(&xi);
        assert_eq!(z.u(), &[1., 0.]);
        assert_eq!(z.v(), &[0., 1.]);
        assert_eq!(nu(&xi), 3.0);
        let base = ConePoint::base(sig(3, 2));
        assert_eq!(nu(&base), 1.0);
        let z = project_to_m(&base);
        assert_eq!(z.u(), &[1., 0., 0.]);
        assert_eq!(z.v(), &[0., 1.]);
        let z = project_to_m(&ConePoint::new(vec![0.6, 0.8], vec![1.0]).unwrap());
        assert_eq!(z.u(), &[0.6, 0.8]);
        assert!(ConePoint::new(vec![1.0, 0.0], vec![2.0]).is_err());
    }

    #[test]
    fn boost_scales_base_point() {
        for &(p, q) in &[(2, 2), (4, 2), (3, 3)] {
            let s = sig(p, q);
            let t = 0.3;
            let g = boost(s, t);
            let xi = ConePoint::base(s).transform(&g).unwrap();
            assert_relative_eq!(nu(&xi), t.exp(), max_relative = 1e-15);
            let z0 = project_to_m(&ConePoint::base(s));
            let (z1, om) = act_with_factor(&g, &z0).unwrap();
            assert!(z1.distance(&z0) < 1e-15);
            assert_relative_eq!(om, (-t).exp(), max_relative = 1e-15);
            assert_relative_eq!(section_conformal_factor(&xi), (-2.0 * t).exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn isometries_have_unit_factor() {
        let s = sig(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = random_rotation(s, &mut rng);
        let z = random_sphere_point(s, &mut rng);
        assert!((conformal_factor(&k, &z).unwrap() - 1.0).abs() < 1e-14);
        let zm = act(&m0(s), &z).unwrap();
        assert_eq!(zm, z.antipode());
        assert_eq!(conformal_factor(&m0(s), &z).unwrap(), 1.0);
        assert_eq!(act(&GroupElement::identity(s), &z).unwrap(), z);
    }

    #[test]
    fn generators_preserve_form() {
        for &(p, q) in &[(2, 2), (4, 2), (3, 3), (1, 3)] {
            let s = sig(p, q);
            let gens = make_generators(s);
            assert!(gens.contains(&m0(s)));
            for g in gens {
                assert!(g.form_defect() <= 1e-13);
            }
        }
        let s = sig(2, 2);
        assert_eq!(boost(s, 0.0), GroupElement::identity(s));
        let prod = boost(s, 0.4).mul(&boost(s, -0.4)).unwrap();
        assert!((prod.mat() - DMatrix::identity(4, 4)).amax() <= 1e-13);
    }

    #[test]
    fn group_element_rejects_non_isometry() {
        let s = sig(2, 2);
        let mut m = DMatrix::identity(4, 4);
        m[(0, 1)] = 1e-6;
        assert!(GroupElement::new(s, m).is_err());
    }

    #[test]
    fn boost_cocycle_closed_form() {
        let s = sig(4, 2);
        let z = project_to_m(&ConePoint::base(s));
        let r = cocycle_residual(&boost(s, 0.2), &boost(s, -0.35), &z).unwrap();
        assert!(r <= 1e-15);
    }

    proptest! {
        #[test]
        fn cocycle_and_equivariance(seed in any::<u64>(), p in 2usize..5, q in 2usize..5) {
            let s = sig(p, q);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g1 = random_element(s, 0.5, &mut rng);
            let g2 = random_element(s, 0.5, &mut rng);
            let z = random_sphere_point(s, &mut rng);
            prop_assert!(cocycle_residual(&g1, &g2, &z).unwrap() <= 1e-10);

            let (gz, om) = act_with_factor(&g1, &z).unwrap();
            let back = conformal_factor(&g1.inverse(), &gz).unwrap();
            prop_assert!((back * om - 1.0).abs() <= 1e-10);

            // group action
            let a = act(&g1, &act(&g2, &z).unwrap()).unwrap();
            let b = act(&g1.mul(&g2).unwrap(), &z).unwrap();
            prop_assert!(a.distance(&b) <= 1e-10);

            // projection equivariance at a point off M
            let t: f64 = 0.5 + 2.0 * rng.gen::<f64>();
            let xi = ConePoint::from_sphere(&z, t).unwrap();
            let lhs = project_to_m(&xi.transform(&g1).unwrap());
            prop_assert!(lhs.distance(&gz) <= 1e-12);
            prop_assert!((nu(&xi.transform(&g1).unwrap()) - t / om).abs() <= 1e-12 * t / om);
        }

        #[test]
        fn form_preserved(seed in any::<u64>(), p in 1usize..5, q in 1usize..5) {
            let s = sig(p, q);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_element(s, 0.5, &mut rng);
            let z1: Vec<f64> = (0..s.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let z2: Vec<f64> = (0..s.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let gz1: Vec<f64> = (g.mat() * nalgebra::DVector::from_vec(z1.clone())).as_slice().to_vec();
            let gz2: Vec<f64> = (g.mat() * nalgebra::DVector::from_vec(z2.clone())).as_slice().to_vec();
            let d = indefinite_form(s, &gz1, &gz2).unwrap() - indefinite_form(s, &z1, &z2).unwrap();
            prop_assert!(d.abs() <= 1e-10 * 10.0);
            prop_assert!(g.form_defect() <= 1e-12);
        }
    }
}
