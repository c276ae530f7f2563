//! One-dimensional rules and product rules on spheres.

use crate::error::{arg, Result};
use crate::special::ln_gamma;
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Three-term coefficient `beta_n` of the monic Gegenbauer recurrence
/// (weight `(1-t^2)^(lambda-1/2)`).
fn gegenbauer_beta(n: usize, lambda: f64) -> f64 {
    let n = n as f64;
    if n == 1.0 {
        return 1.0 / (2.0 * (1.0 + lambda));
    }
    n * (n + 2.0 * lambda - 1.0) / (4.0 * (n + lambda) * (n + lambda - 1.0))
}

/// Gauss rule for the weight `(1-t^2)^(lambda-1/2)` on `[-1,1]`, `lambda > -1/2`.
///
/// Nodes come from the Jacobi matrix (Golub-Welsch), are polished by Newton
/// steps on the orthonormal recurrence, and the weights use the Christoffel
/// formula. The rule is exactly symmetric: `t[n-1-i] == -t[i]`.
pub fn gauss_gegenbauer(n: usize, lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return arg("gauss_gegenbauer: n must be positive");
    }
    if !(lambda > -0.5) {
        return arg(format!("gauss_gegenbauer: lambda = {lambda} must exceed -1/2"));
    }
    let mu0 = (0.5 * PI.ln() + ln_gamma(lambda + 0.5) - ln_gamma(lambda + 1.0)).exp();
    let b: Vec<f64> = (1..n).map(|k| gegenbauer_beta(k, lambda).sqrt()).collect();

    let mut jac = DMatrix::<f64>::zeros(n, n);
    for (k, bk) in b.iter().enumerate() {
        jac[(k, k + 1)] = *bk;
        jac[(k + 1, k)] = *bk;
    }
    let mut t: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    t.sort_by(|x, y| x.partial_cmp(y).unwrap());

    // p_k orthonormal; returns (p_{n-1}(x), p_n(x), sum_{k<n} p_k(x)^2).
    let eval = |x: f64| {
        let mut prev = 0.0;
        let mut cur = 1.0 / mu0.sqrt();
        let mut sum = cur * cur;
        for k in 0..n {
            let bk_prev = if k == 0 { 0.0 } else { b[k - 1] };
            let bk_next = if k + 1 < n { b[k] } else { gegenbauer_beta(n, lambda).sqrt() };
            let next = (x * cur - bk_prev * prev) / bk_next;
            prev = cur;
            cur = next;
            if k + 1 < n {
                sum += cur * cur;
            }
        }
        (prev, cur, sum)
    };
    for x in t.iter_mut() {
        for _ in 0..2 {
            let (pm1, pn, _) = eval(*x);
            let dpn = derivative_orthonormal(n, lambda, *x, pn, pm1);
            if dpn != 0.0 && dpn.is_finite() {
                let step = pn / dpn;
                if step.abs() < 1e-6 {
                    *x -= step;
                }
            }
        }
    }
    let mut w: Vec<f64> = t.iter().map(|&x| 1.0 / eval(x).2).collect();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let tm = 0.5 * (t[j] - t[i]);
        t[i] = -tm;
        t[j] = tm;
        let wm = 0.5 * (w[i] + w[j]);
        w[i] = wm;
        w[j] = wm;
    }
    if n % 2 == 1 {
        t[n / 2] = 0.0;
    }
    Ok((t, w))
}

/// Derivative of the degree-`n` orthonormal Gegenbauer polynomial from
/// `(1-x^2) C_n' = (n+2l-1) C_{n-1} - n x C_n`, rescaled by the norm ratio
/// `h_{n-1}/h_n = n(n+l) / ((n+2l-1)(n+l-1))`.
fn derivative_orthonormal(n: usize, lambda: f64, x: f64, pn: f64, pm1: f64) -> f64 {
    let nn = n as f64;
    let c = (nn * (nn + lambda) * (nn + 2.0 * lambda - 1.0) / (nn + lambda - 1.0)).sqrt();
    (-nn * x * pn + c * pm1) / (1.0 - x * x)
}

/// Gauss-Legendre rule on `[-1,1]`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    gauss_gegenbauer(n, 0.5)
}

/// Gauss-Jacobi rule with equal exponents, weight `(1-t^2)^alpha`, `alpha > -1`.
pub fn gauss_jacobi_symmetric(n: usize, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    gauss_gegenbauer(n, alpha + 0.5)
}

/// A node of a tanh-sinh rule on `[-1,1]`: the abscissa, its distances to
/// `-1` and `+1` computed without cancellation, and the weight.
#[derive(Debug, Clone, Copy)]
pub struct DeNode {
    pub x: f64,
    pub from_left: f64,
    pub from_right: f64,
    pub w: f64,
}

/// Tanh-sinh (double exponential) rule with fixed step. Handles integrable
/// endpoint singularities; integrands receive endpoint distances so that
/// singular factors can be evaluated without cancellation.
#[derive(Debug, Clone)]
pub struct TanhSinh {
    nodes: Vec<DeNode>,
}

impl TanhSinh {
    /// Step `h = 2^-level`; abscissae are kept while the distance to the
    /// endpoint stays above `1e-300`.
    pub fn new(level: u32) -> Self {
        let h = 0.5f64.powi(level as i32);
        let mut nodes = Vec::new();
        let mut k: i64 = 0;
        loop {
            let s = k as f64 * h;
            let u = 0.5 * PI * s.sinh();
            let ch = 0.5 * PI * s.cosh();
            let e = (-2.0 * u).exp();
            // 1 - tanh(u) = 2 e^{-2u} / (1 + e^{-2u})
            let comp = 2.0 * e / (1.0 + e);
            if comp < 1e-300 {
                break;
            }
            let x = (1.0 - e) / (1.0 + e);
            let cu = u.cosh();
            let w = h * ch / (cu * cu);
            if k == 0 {
                nodes.push(DeNode { x: 0.0, from_left: 1.0, from_right: 1.0, w });
            } else {
                nodes.push(DeNode { x, from_left: 2.0 - comp, from_right: comp, w });
                nodes.push(DeNode { x: -x, from_left: comp, from_right: 2.0 - comp, w });
            }
            k += 1;
        }
        TanhSinh { nodes }
    }

    pub fn nodes(&self) -> &[DeNode] {
        &self.nodes
    }

    /// Integrates `f(x, x - a, b - x)` over `[a, b]`.
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64, f64, f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mut acc = T::default();
        for nd in &self.nodes {
            let da = half * nd.from_left;
            let db = half * nd.from_right;
            let x = if nd.x < 0.0 { a + da } else { b - db };
            acc = acc + f(x, da, db) * (nd.w * half);
        }
        acc
    }
}

/// Product rule on the unit sphere `S^{d-1}` in `R^d`, `d >= 2`.
///
/// The circle uses equispaced angles; higher spheres peel off the first
/// coordinate `t = u_1` with a Gauss-Gegenbauer rule in `t` and recurse on
/// the equatorial sphere. The node set is exactly invariant under `u -> -u`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    exact_degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
}

impl SphereRule {
    /// Number of nodes `build(dim, exact_degree)` would produce.
    pub fn node_count(dim: usize, exact_degree: usize) -> usize {
        match dim {
            0 | 1 => 0,
            2 => circle_points(exact_degree),
            _ => (exact_degree + 1).div_ceil(2) * Self::node_count(dim - 1, exact_degree),
        }
    }

    pub fn build(dim: usize, exact_degree: usize) -> Result<Self> {
        if dim < 2 {
            return arg(format!("sphere rule needs ambient dimension >= 2, got {dim}"));
        }
        if dim == 2 {
            let m = circle_points(exact_degree);
            let half = m / 2;
            let mut nodes = vec![0.0; 2 * m];
            for j in 0..half {
                let phi = 2.0 * PI * j as f64 / m as f64;
                let (s, c) = phi.sin_cos();
                nodes[2 * j] = c;
                nodes[2 * j + 1] = s;
                nodes[2 * (j + half)] = -c;
                nodes[2 * (j + half) + 1] = -s;
            }
            let antipode = (0..m).map(|j| (j + half) % m).collect();
            return Ok(SphereRule {
                dim,
                exact_degree,
                nodes,
                weights: vec![2.0 * PI / m as f64; m],
                antipode,
            });
        }
        let nt = (exact_degree + 1).div_ceil(2);
        let (ts, wts) = gauss_gegenbauer(nt, (dim as f64 - 2.0) / 2.0)?;
        let child = SphereRule::build(dim - 1, exact_degree)?;
        let cn = child.len();
        let mut nodes = Vec::with_capacity(nt * cn * dim);
        let mut weights = Vec::with_capacity(nt * cn);
        let mut antipode = Vec::with_capacity(nt * cn);
        for (i, (&t, &wt)) in ts.iter().zip(&wts).enumerate() {
            let s = (1.0 - t * t).max(0.0).sqrt();
            for j in 0..cn {
                nodes.push(t);
                nodes.extend(child.node(j).iter().map(|w| s * w));
                weights.push(wt * child.weights[j]);
                antipode.push((nt - 1 - i) * cn + child.antipode[j]);
            }
        }
        Ok(SphereRule { dim, exact_degree, nodes, weights, antipode })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Index of the node `-u_i`.
    pub fn antipode(&self, i: usize) -> usize {
        self.antipode[i]
    }
}

/// Smallest even count exceeding the degree, so trigonometric polynomials
/// up to `degree` integrate exactly and `phi -> phi + pi` permutes nodes.
fn circle_points(degree: usize) -> usize {
    let m = degree + 1;
    m + m % 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::sphere_volume;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_monomials() {
        let (t, w) = gauss_legendre(7).unwrap();
        for k in 0..=13 {
            let s: f64 = t.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "k={k} s={s}");
        }
    }

    #[test]
    fn gegenbauer_weight_moments() {
        // weight (1-t^2)^{1/2}: int t^2 = pi/8, int 1 = pi/2
        let (t, w) = gauss_gegenbauer(5, 1.0).unwrap();
        let m0: f64 = w.iter().sum();
        let m2: f64 = t.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert_relative_eq!(m0, PI / 2.0, max_relative = 1e-14);
        assert_relative_eq!(m2, PI / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobi_singular_weight() {
        // int (1-t^2)^{-0.7} dt = B(1/2, 0.3)
        let (_, w) = gauss_jacobi_symmetric(12, -0.7).unwrap();
        let m0: f64 = w.iter().sum();
        let exact = (ln_gamma(0.5) + ln_gamma(0.3) - ln_gamma(0.8)).exp();
        assert_relative_eq!(m0, exact, max_relative = 1e-13);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        let ts = TanhSinh::new(6);
        // int_0^1 x^{-1/2} dx = 2, using the exact left distance
        let v: f64 = ts.integrate(0.0, 1.0, |_, da, _| da.powf(-0.5));
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
        let v: f64 = ts.integrate(0.0, PI, |x, _, _| x.sin());
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn sphere_rule_volume_and_moments() {
        for d in 2..=5 {
            let r = SphereRule::build(d, 9).unwrap();
            assert_eq!(r.len(), SphereRule::node_count(d, 9));
            let vol: f64 = r.weights().iter().sum();
            assert_relative_eq!(vol, sphere_volume(d), max_relative = 1e-13);
            let m2: f64 = (0..r.len()).map(|i| r.weights()[i] * r.node(i)[d - 1].powi(2)).sum();
            assert_relative_eq!(m2, sphere_volume(d) / d as f64, max_relative = 1e-13);
        }
    }

    #[test]
    fn sphere_rule_antipodes_are_exact() {
        let r = SphereRule::build(4, 8).unwrap();
        for i in 0..r.len() {
            let j = r.antipode(i);
            let (a, b) = (r.node(i), r.node(j));
            assert!(a.iter().zip(b).all(|(x, y)| *x == -*y));
        }
    }
}
