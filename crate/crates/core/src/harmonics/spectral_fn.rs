//! Functions on `M` stored by their K-type components.

use super::basis::{dim_harmonics, HarmonicBasis};
use crate::error::{arg, Result};
use crate::geometry::Signature;
use num_complex::Complex64;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KTypeLabel {
    pub a: usize,
    pub b: usize,
}

impl KTypeLabel {
    pub fn new(a: usize, b: usize) -> Self {
        KTypeLabel { a, b }
    }

    /// For `p = 1` (`q = 1`) only `a <= 1` (`b <= 1`) occur.
    pub fn validate(&self, sig: Signature) -> Result<()> {
        if (sig.p() == 1 && self.a > 1) || (sig.q() == 1 && self.b > 1) {
            return arg(format!("label {self} is not a K-type of O({})xO({})", sig.p(), sig.q()));
        }
        Ok(())
    }
}

impl std::fmt::Display for KTypeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Coefficients of one component `F_{a,b}` in the product of the orthonormal
/// bases of `H^a` and `H^b`, row-major `dim H^a x dim H^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    rows: usize,
    cols: usize,
    coeffs: Vec<Complex64>,
}

impl Block {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Block { rows, cols, coeffs: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }
    pub fn from_coeffs(rows: usize, cols: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != rows * cols {
            return arg(format!("block {rows}x{cols} needs {} coefficients, got {}", rows * cols, coeffs.len()));
        }
        Ok(Block { rows, cols, coeffs })
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.coeffs[i * self.cols + j]
    }
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }
    pub fn scaled(&self, c: Complex64) -> Block {
        Block { rows: self.rows, cols: self.cols, coeffs: self.coeffs.iter().map(|z| z * c).collect() }
    }
    fn axpy(&mut self, c: Complex64, other: &Block) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
    }
}

/// A finite sum of K-type components. Each component is an element of
/// `H^a (x) H^b` held as a coefficient block, so it is exactly of its type.
/// `tail_mass` records the squared `L^2` norm lost to truncation when the
/// function came from a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    sig: Signature,
    components: BTreeMap<KTypeLabel, Block>,
    tail_mass: f64,
}

impl SpectralFunction {
    pub fn zero(sig: Signature) -> Self {
        SpectralFunction { sig, components: BTreeMap::new(), tail_mass: 0.0 }
    }

    /// A single component.
    pub fn from_component(sig: Signature, label: KTypeLabel, block: Block) -> Result<Self> {
        let mut f = Self::zero(sig);
        f.insert(label, block)?;
        Ok(f)
    }

    /// The first basis vector of `H^a (x) H^b`, unit `L^2` norm.
    pub fn unit_component(sig: Signature, label: KTypeLabel) -> Result<Self> {
        let (r, c) = block_shape(sig, label);
        let mut b = Block::zeros(r, c);
        if r * c == 0 {
            return arg(format!("K-type {label} is zero for {sig}"));
        }
        b.coeffs[0] = Complex64::new(1.0, 0.0);
        Self::from_component(sig, label, b)
    }

    pub fn insert(&mut self, label: KTypeLabel, block: Block) -> Result<()> {
        label.validate(self.sig)?;
        if (block.rows, block.cols) != block_shape(self.sig, label) {
            return arg(format!("block shape {}x{} does not match K-type {label}", block.rows, block.cols));
        }
        self.components.insert(label, block);
        Ok(())
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }
    pub fn set_tail_mass(&mut self, t: f64) {
        self.tail_mass = t;
    }
    pub fn labels(&self) -> impl Iterator<Item = KTypeLabel> + '_ {
        self.components.keys().copied()
    }
    pub fn components(&self) -> impl Iterator<Item = (KTypeLabel, &Block)> + '_ {
        self.components.iter().map(|(l, b)| (*l, b))
    }
    pub fn component(&self, label: KTypeLabel) -> Option<&Block> {
        self.components.get(&label)
    }
    pub fn component_norm_sq(&self, label: KTypeLabel) -> f64 {
        self.components.get(&label).map_or(0.0, Block::norm_sq)
    }
    /// `sum ||F_{a,b}||^2` over stored components.
    pub fn norm_sq(&self) -> f64 {
        self.components.values().map(Block::norm_sq).sum()
    }
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Largest `a` and `b` among the stored labels.
    pub fn max_degrees(&self) -> (usize, usize) {
        self.components.keys().fold((0, 0), |(a, b), l| (a.max(l.a), b.max(l.b)))
    }

    /// Multiplies component `(a,b)` by `f(a,b)`: any operator diagonal on K-types.
    pub fn map_diagonal<F: Fn(KTypeLabel) -> Complex64>(&self, f: F) -> SpectralFunction {
        let components = self.components.iter().map(|(l, b)| (*l, b.scaled(f(*l)))).collect();
        SpectralFunction { sig: self.sig, components, tail_mass: self.tail_mass }
    }

    pub fn scaled(&self, c: Complex64) -> SpectralFunction {
        let mut out = self.map_diagonal(|_| c);
        out.tail_mass = self.tail_mass * c.norm_sqr();
        out
    }

    /// Restriction to the labels accepted by `keep`.
    pub fn filter<F: Fn(KTypeLabel) -> bool>(&self, keep: F) -> SpectralFunction {
        let components = self.components.iter().filter(|(l, _)| keep(**l)).map(|(l, b)| (*l, b.clone())).collect();
        SpectralFunction { sig: self.sig, components, tail_mass: self.tail_mass }
    }

    /// `self + c * other`; tail masses are not combined.
    pub fn axpy(&self, c: Complex64, other: &SpectralFunction) -> Result<SpectralFunction> {
        if self.sig != other.sig {
            return arg("spectral functions have different signatures");
        }
        let mut out = self.clone();
        for (l, b) in &other.components {
            out.components
                .entry(*l)
                .or_insert_with(|| Block::zeros(b.rows, b.cols))
                .axpy(c, b);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralFunction) -> Result<SpectralFunction> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// `<F, G>` in `L^2(M)`.
    pub fn inner(&self, other: &SpectralFunction) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, b) in &self.components {
            if let Some(c) = other.components.get(l) {
                for (x, y) in b.coeffs.iter().zip(&c.coeffs) {
                    acc += x * y.conj();
                }
            }
        }
        acc
    }

    /// Point evaluator covering every stored component.
    pub fn evaluator(&self) -> Evaluator<'_> {
        let (a, b) = self.max_degrees();
        Evaluator {
            f: self,
            basis_p: HarmonicBasis::new(self.sig.p(), a),
            basis_q: HarmonicBasis::new(self.sig.q(), b),
        }
    }
}

pub(crate) fn block_shape(sig: Signature, label: KTypeLabel) -> (usize, usize) {
    (dim_harmonics(sig.p(), label.a), dim_harmonics(sig.q(), label.b))
}

/// Evaluates a [`SpectralFunction`] at arbitrary points of `M`.
pub struct Evaluator<'a> {
    f: &'a SpectralFunction,
    basis_p: HarmonicBasis,
    basis_q: HarmonicBasis,
}

/// Per-thread buffers for [`Evaluator::eval_with`].
pub struct EvalScratch {
    yp: Vec<f64>,
    yq: Vec<f64>,
}

impl Evaluator<'_> {
    pub fn scratch(&self) -> EvalScratch {
        EvalScratch { yp: vec![0.0; self.basis_p.len()], yq: vec![0.0; self.basis_q.len()] }
    }

    pub fn eval(&self, u: &[f64], v: &[f64]) -> Complex64 {
        self.eval_with(u, v, &mut self.scratch())
    }

    pub fn eval_with(&self, u: &[f64], v: &[f64], s: &mut EvalScratch) -> Complex64 {
        self.basis_p.eval(u, &mut s.yp);
        self.basis_q.eval(v, &mut s.yq);
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, blk) in &self.f.components {
            let rp = self.basis_p.degree_range(l.a);
            let rq = self.basis_q.degree_range(l.b);
            let yq = &s.yq[rq];
            for (i, yp) in s.yp[rp].iter().enumerate() {
                let row = &blk.coeffs[i * blk.cols..(i + 1) * blk.cols];
                let mut r = Complex64::new(0.0, 0.0);
                for (c, y) in row.iter().zip(yq) {
                    r += c * y;
                }
                acc += r * yp;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_validation() {
        let s = Signature::new(1, 3).unwrap();
        assert!(KTypeLabel::new(2, 0).validate(s).is_err());
        assert!(KTypeLabel::new(1, 5).validate(s).is_ok());
    }

    #[test]
    fn diagonal_ops_and_norms() {
        let s = Signature::new(3, 3).unwrap();
        let f = SpectralFunction::unit_component(s, KTypeLabel::new(1, 1)).unwrap();
        assert_eq!(f.norm_sq(), 1.0);
        let g = f.map_diagonal(|l| Complex64::new(l.a as f64 + 1.0, 0.0));
        assert_eq!(g.norm_sq(), 4.0);
        let d = g.sub(&f).unwrap();
        assert_eq!(d.norm_sq(), 1.0);
        assert!(SpectralFunction::from_component(s, KTypeLabel::new(1, 1), Block::zeros(2, 3)).is_err());
    }
}
