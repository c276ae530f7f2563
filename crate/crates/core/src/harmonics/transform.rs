//! Analysis and synthesis between grid samples and K-type components.
//!
//! Both directions are separable: the `q`-sphere transform is applied to
//! each row of samples first, then the `p`-sphere basis is accumulated over
//! the `p`-nodes in fixed-size chunks. Partial sums are reduced in chunk
//! order so results do not depend on thread scheduling.

use super::basis::{zonal_projection_matrix, HarmonicBasis};
use super::grid::{GridFunction, QuadratureGrid};
use super::spectral_fn::{Block, KTypeLabel, SpectralFunction};
use crate::error::{arg, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn chunk_len(n: usize) -> usize {
    n.div_ceil(32).max(16)
}

/// Components of `F` for all labels `a <= a_max`, `b <= b_max`, with
/// `tail_mass = ||F||^2 - sum ||F_{a,b}||^2`.
///
/// Components are exact when `F` is a polynomial whose degree plus the
/// cutoff does not exceed the grid's exact degree; otherwise they carry the
/// aliasing error of the quadrature.
pub fn decompose(f: &GridFunction, a_max: usize, b_max: usize) -> Result<SpectralFunction> {
    let grid = f.grid();
    let sig = grid.sig();
    let bp = HarmonicBasis::new(sig.p(), a_max);
    let bq = HarmonicBasis::new(sig.q(), b_max);
    let (n1, n2) = (grid.rule_p().len(), grid.rule_q().len());
    let (b1, b2) = (bp.len(), bq.len());

    // yq[iv * b2 + beta] = w_iv Y_beta(v_iv)
    let mut yq = vec![0.0; n2 * b2];
    for iv in 0..n2 {
        let row = &mut yq[iv * b2..(iv + 1) * b2];
        bq.eval(grid.rule_q().node(iv), row);
        let w = grid.rule_q().weights()[iv];
        row.iter_mut().for_each(|y| *y *= w);
    }

    let vals = f.values();
    let chunk = chunk_len(n1);
    let starts: Vec<usize> = (0..n1).step_by(chunk).collect();
    let partials: Vec<Vec<Complex64>> = starts
        .par_iter()
        .map(|&s| {
            let mut acc = vec![ZERO; b1 * b2];
            let mut yp = vec![0.0; b1];
            let mut t = vec![ZERO; b2];
            for iu in s..(s + chunk).min(n1) {
                t.iter_mut().for_each(|z| *z = ZERO);
                for iv in 0..n2 {
                    let fv = vals[iu * n2 + iv];
                    if fv == ZERO {
                        continue;
                    }
                    for (tz, y) in t.iter_mut().zip(&yq[iv * b2..(iv + 1) * b2]) {
                        *tz += fv * y;
                    }
                }
                bp.eval(grid.rule_p().node(iu), &mut yp);
                let w = grid.rule_p().weights()[iu];
                for (alpha, y) in yp.iter().enumerate() {
                    let c = w * y;
                    let row = &mut acc[alpha * b2..(alpha + 1) * b2];
                    for (r, tz) in row.iter_mut().zip(&t) {
                        *r += tz * c;
                    }
                }
            }
            acc
        })
        .collect();
    let mut coeffs = vec![ZERO; b1 * b2];
    for part in &partials {
        for (c, x) in coeffs.iter_mut().zip(part) {
            *c += x;
        }
    }

    let mut out = SpectralFunction::zero(sig);
    for a in 0..=a_max {
        let ra = bp.degree_range(a);
        for b in 0..=b_max {
            let rb = bq.degree_range(b);
            let mut blk = Vec::with_capacity(ra.len() * rb.len());
            for alpha in ra.clone() {
                blk.extend_from_slice(&coeffs[alpha * b2 + rb.start..alpha * b2 + rb.end]);
            }
            out.insert(KTypeLabel::new(a, b), Block::from_coeffs(ra.len(), rb.len(), blk)?)?;
        }
    }
    let tail = f.norm_sq() - out.norm_sq();
    out.set_tail_mass(tail);
    Ok(out)
}

/// Samples of `F` at the grid nodes; the result carries `F` as its expansion.
pub fn synthesize(f: &SpectralFunction, grid: &Arc<QuadratureGrid>) -> Result<GridFunction> {
    let sig = grid.sig();
    if f.sig() != sig {
        return arg("synthesize: signature mismatch");
    }
    let (a_max, b_max) = f.max_degrees();
    let bp = HarmonicBasis::new(sig.p(), a_max);
    let bq = HarmonicBasis::new(sig.q(), b_max);
    let (n1, n2) = (grid.rule_p().len(), grid.rule_q().len());
    let (b1, b2) = (bp.len(), bq.len());

    let mut dense = vec![ZERO; b1 * b2];
    for (l, blk) in f.components() {
        let ra = bp.degree_range(l.a);
        let rb = bq.degree_range(l.b);
        for (i, alpha) in ra.enumerate() {
            for (j, beta) in rb.clone().enumerate() {
                dense[alpha * b2 + beta] = blk.get(i, j);
            }
        }
    }
    let mut yq = vec![0.0; n2 * b2];
    for iv in 0..n2 {
        bq.eval(grid.rule_q().node(iv), &mut yq[iv * b2..(iv + 1) * b2]);
    }
    let mut values = vec![ZERO; n1 * n2];
    values.par_chunks_mut(n2).enumerate().for_each(|(iu, row)| {
        let yp = bp.eval_vec(grid.rule_p().node(iu));
        let mut t = vec![ZERO; b2];
        for (alpha, y) in yp.iter().enumerate() {
            if *y == 0.0 {
                continue;
            }
            for (tz, c) in t.iter_mut().zip(&dense[alpha * b2..(alpha + 1) * b2]) {
                *tz += c * y;
            }
        }
        for (iv, out) in row.iter_mut().enumerate() {
            let mut s = ZERO;
            for (tz, y) in t.iter().zip(&yq[iv * b2..(iv + 1) * b2]) {
                s += tz * y;
            }
            *out = s;
        }
    });
    GridFunction::from_values(grid.clone(), values)?.with_spectral(f.clone())
}

/// Evaluates `F` at the points `(us[i], vs[i])` given as flattened
/// coordinate arrays.
pub fn eval_points(f: &SpectralFunction, us: &[f64], vs: &[f64]) -> Result<Vec<Complex64>> {
    let (p, q) = (f.sig().p(), f.sig().q());
    if us.len() % p != 0 || vs.len() % q != 0 || us.len() / p != vs.len() / q {
        return arg("eval_points: coordinate arrays do not describe the same number of points");
    }
    let n = us.len() / p;
    let ev = f.evaluator();
    Ok((0..n)
        .into_par_iter()
        .map_init(|| ev.scratch(), |s, i| ev.eval_with(&us[i * p..(i + 1) * p], &vs[i * q..(i + 1) * q], s))
        .collect())
}

/// The component `F_{a,b}` sampled on the grid of `F`.
pub fn project_ktype(f: &GridFunction, label: KTypeLabel) -> Result<GridFunction> {
    let sig = f.grid().sig();
    label.validate(sig)?;
    let full = decompose(f, label.a, label.b)?;
    let single = full.filter(|l| l == label);
    synthesize(&single, f.grid())
}

/// The same projection through the zonal reproducing kernels
/// `(dim H^a / vol) zonal_a(<u,u'>)` on each factor. Quadratic in the number
/// of nodes per factor; used as an independent check.
pub fn project_ktype_zonal(f: &GridFunction, label: KTypeLabel) -> Result<GridFunction> {
    let grid = f.grid();
    label.validate(grid.sig())?;
    let kp = zonal_projection_matrix(grid.rule_p(), label.a);
    let kq = zonal_projection_matrix(grid.rule_q(), label.b);
    let (n1, n2) = (grid.rule_p().len(), grid.rule_q().len());
    let vals = f.values();
    let mut half = vec![ZERO; n1 * n2];
    half.par_chunks_mut(n2).enumerate().for_each(|(iu, row)| {
        for (iv, out) in row.iter_mut().enumerate() {
            *out = (0..n2).map(|jv| vals[iu * n2 + jv] * kq[(iv, jv)]).sum();
        }
    });
    let mut values = vec![ZERO; n1 * n2];
    values.par_chunks_mut(n2).enumerate().for_each(|(iu, row)| {
        for ju in 0..n1 {
            let k = kp[(iu, ju)];
            for (out, h) in row.iter_mut().zip(&half[ju * n2..(ju + 1) * n2]) {
                *out += h * k;
            }
        }
    });
    GridFunction::from_values(grid.clone(), values)
}
