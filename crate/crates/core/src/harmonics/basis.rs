//! Gegenbauer polynomials, zonal kernels and orthonormal spherical harmonics.

use crate::quadrature::SphereRule;
use crate::special::{binomial, ln_gamma, sphere_volume};
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::ops::Range;

/// `C_k^{(alpha)}(t)` by the three-term recurrence; for `alpha = 0` the
/// Chebyshev limit `cos(k arccos t)`.
pub fn gegenbauer(alpha: f64, k: usize, t: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if alpha == 0.0 {
        let (mut a, mut b) = (1.0, t);
        for _ in 1..k {
            let c = 2.0 * t * b - a;
            a = b;
            b = c;
        }
        return b;
    }
    let (mut a, mut b) = (1.0, 2.0 * alpha * t);
    for n in 2..=k {
        let nf = n as f64;
        let c = (2.0 * t * (nf + alpha - 1.0) * b - (nf + 2.0 * alpha - 2.0) * a) / nf;
        a = b;
        b = c;
    }
    b
}

/// All of `C_0^{(alpha)}(t), ..., C_m^{(alpha)}(t)` into `out[..=m]`.
fn gegenbauer_all(alpha: f64, t: f64, out: &mut [f64]) {
    let m = out.len();
    if m == 0 {
        return;
    }
    out[0] = 1.0;
    if m == 1 {
        return;
    }
    out[1] = 2.0 * alpha * t;
    for n in 2..m {
        let nf = n as f64;
        out[n] = (2.0 * t * (nf + alpha - 1.0) * out[n - 1] - (nf + 2.0 * alpha - 2.0) * out[n - 2]) / nf;
    }
}

/// Normalized zonal polynomial on `S^{d-1}`: `C_k^{((d-2)/2)}(t) / C_k^{((d-2)/2)}(1)`,
/// the Chebyshev polynomial `T_k` for the circle. Equals 1 at `t = 1`.
pub fn zonal(d: usize, k: usize, t: f64) -> f64 {
    gegenbauer(zonal_alpha(d), k, t) / zonal_scale(d, k)
}

fn zonal_alpha(d: usize) -> f64 {
    (d.max(2) as f64 - 2.0) / 2.0
}

/// `C_k^{(alpha)}(1) = Gamma(k + 2 alpha) / (k! Gamma(2 alpha))`, 1 for the circle.
fn zonal_scale(d: usize, k: usize) -> f64 {
    if d <= 2 {
        return 1.0;
    }
    let alpha = zonal_alpha(d);
    (ln_gamma(k as f64 + 2.0 * alpha) - ln_gamma(k as f64 + 1.0) - ln_gamma(2.0 * alpha)).exp()
}

/// Matrix of the projection onto `H^k` on a sphere rule:
/// `P[i][j] = (dim H^k / vol) w_j zonal_k(<u_i, u_j>)`.
pub fn zonal_projection_matrix(rule: &SphereRule, k: usize) -> DMatrix<f64> {
    let d = rule.dim();
    let (alpha, scale) = (zonal_alpha(d), zonal_scale(d, k));
    let c = dim_harmonics(d, k) as f64 / sphere_volume(d);
    DMatrix::from_fn(rule.len(), rule.len(), |i, j| {
        let t: f64 = rule.node(i).iter().zip(rule.node(j)).map(|(a, b)| a * b).sum();
        c * rule.weights()[j] * gegenbauer(alpha, k, t.clamp(-1.0, 1.0)) / scale
    })
}

/// `dim H^k(R^p)`; for `p = 1` the even/odd functions on two points.
pub fn dim_harmonics(p: usize, k: usize) -> usize {
    match p {
        0 => 0,
        1 => usize::from(k <= 1),
        _ => {
            let (p, k) = (p as u64, k as u64);
            let a = binomial(p + k - 2, k);
            let b = if k == 0 { 0 } else { binomial(p + k - 3, k - 1) };
            (a + b) as usize
        }
    }
}

/// `||C_n^{(l)}||^2` for the weight `(1-t^2)^{l-1/2}`.
fn ln_gegenbauer_norm_sq(n: usize, l: f64) -> f64 {
    let nf = n as f64;
    PI.ln() + (1.0 - 2.0 * l) * 2f64.ln() + ln_gamma(nf + 2.0 * l)
        - ln_gamma(nf + 1.0)
        - (nf + l).ln()
        - 2.0 * ln_gamma(l)
}

#[derive(Debug, Clone)]
enum Inner {
    Circle,
    Sphere {
        child: Box<HarmonicBasis>,
        /// `norms[j][m]`: normalizer of `C_m^{(j + (d-2)/2)}` in the degree
        /// `j + m` harmonic built on a degree-`j` equatorial harmonic.
        norms: Vec<Vec<f64>>,
    },
}

/// Real orthonormal basis of `H^0 + ... + H^L` on `S^{d-1}` (unnormalized
/// surface measure), in hyperspherical form
///
/// `Y_{k,j,m}(u) = A (1-t^2)^{j/2} C_{k-j}^{(j+(d-2)/2)}(t) Y_{j,m}(w)`, `u = (t, sqrt(1-t^2) w)`,
///
/// recursing down to Fourier modes on the circle. Functions are ordered by
/// degree; the ordering inside a degree does not depend on `L`.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    dim: usize,
    max_degree: usize,
    offsets: Vec<usize>,
    inner: Inner,
}

impl HarmonicBasis {
    /// Basis on `S^{dim-1}`, `dim >= 2`.
    pub fn new(dim: usize, max_degree: usize) -> Self {
        assert!(dim >= 2, "harmonic basis needs dim >= 2");
        let mut offsets = Vec::with_capacity(max_degree + 2);
        let mut acc = 0;
        for k in 0..=max_degree {
            offsets.push(acc);
            acc += dim_harmonics(dim, k);
        }
        offsets.push(acc);
        let inner = if dim == 2 {
            Inner::Circle
        } else {
            let child = Box::new(HarmonicBasis::new(dim - 1, max_degree));
            let l0 = (dim as f64 - 2.0) / 2.0;
            let norms = (0..=max_degree)
                .map(|j| {
                    let l = j as f64 + l0;
                    (0..=max_degree - j).map(|m| (-0.5 * ln_gegenbauer_norm_sq(m, l)).exp()).collect()
                })
                .collect();
            Inner::Sphere { child, norms }
        };
        HarmonicBasis { dim, max_degree, offsets, inner }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }
    pub fn len(&self) -> usize {
        self.offsets[self.max_degree + 1]
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// Indices of the degree-`k` functions.
    pub fn degree_range(&self, k: usize) -> Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Evaluates every basis function at `u` (normalized internally).
    pub fn eval(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.dim);
        debug_assert!(out.len() >= self.len());
        let r = crate::geometry::norm(u);
        match &self.inner {
            Inner::Circle => {
                let (c, s) = (u[0] / r, u[1] / r);
                out[0] = 1.0 / (2.0 * PI).sqrt();
                let a = 1.0 / PI.sqrt();
                let (mut zr, mut zi) = (1.0, 0.0);
                for k in 1..=self.max_degree {
                    let nr = zr * c - zi * s;
                    let ni = zr * s + zi * c;
                    zr = nr;
                    zi = ni;
                    out[2 * k - 1] = a * zr;
                    out[2 * k] = a * zi;
                }
            }
            Inner::Sphere { child, norms } => {
                let t = (u[0] / r).clamp(-1.0, 1.0);
                let rest = &u[1..];
                let sr = crate::geometry::norm(rest);
                let mut w = vec![0.0; self.dim - 1];
                if sr > 0.0 {
                    w.iter_mut().zip(rest).for_each(|(a, b)| *a = b / sr);
                } else {
                    w[0] = 1.0;
                }
                let s = sr / r;
                let mut cw = vec![0.0; child.len()];
                child.eval(&w, &mut cw);
                let l0 = (self.dim as f64 - 2.0) / 2.0;
                let big_l = self.max_degree;
                let mut geg = vec![0.0; big_l + 1];
                let mut sj = 1.0;
                for j in 0..=big_l {
                    let g = &mut geg[..=big_l - j];
                    gegenbauer_all(j as f64 + l0, t, g);
                    let cr = child.degree_range(j);
                    for m in 0..=big_l - j {
                        let k = j + m;
                        let f = norms[j][m] * sj * g[m];
                        let base = self.offsets[k] + child.offsets[j];
                        for (idx, cv) in cr.clone().enumerate() {
                            out[base + idx] = f * cw[cv];
                        }
                    }
                    sj *= s;
                }
            }
        }
    }

    pub fn eval_vec(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval(u, &mut out);
        out
    }
}
