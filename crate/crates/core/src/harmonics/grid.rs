//! Product quadrature grids on `M` and sampled functions.

use super::spectral_fn::SpectralFunction;
use crate::error::{arg, Error, Result};
use crate::geometry::{Signature, SpherePoint};
use crate::quadrature::SphereRule;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Node cap used by [`build_grid`].
pub const DEFAULT_MAX_NODES: usize = 4_000_000;

/// Tensor product of sphere rules on `S^{p-1}` and `S^{q-1}`. Node `i`
/// is the pair `(i / nq, i % nq)`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    sig: Signature,
    exact_degree: usize,
    rule_p: SphereRule,
    rule_q: SphereRule,
}

pub fn build_grid(sig: Signature, exact_degree: usize) -> Result<Arc<QuadratureGrid>> {
    build_grid_capped(sig, exact_degree, DEFAULT_MAX_NODES)
}

pub fn build_grid_capped(sig: Signature, exact_degree: usize, max_nodes: usize) -> Result<Arc<QuadratureGrid>> {
    sig.require_numeric()?;
    if exact_degree == 0 {
        return arg("exact_degree must be at least 1");
    }
    let count = grid_node_count(sig, exact_degree);
    if count > max_nodes {
        return Err(Error::Resource(format!(
            "grid for {sig} at exact degree {exact_degree} needs {count} nodes, cap is {max_nodes}"
        )));
    }
    Ok(Arc::new(QuadratureGrid {
        sig,
        exact_degree,
        rule_p: SphereRule::build(sig.p(), exact_degree)?,
        rule_q: SphereRule::build(sig.q(), exact_degree)?,
    }))
}

pub fn grid_node_count(sig: Signature, exact_degree: usize) -> usize {
    SphereRule::node_count(sig.p(), exact_degree).saturating_mul(SphereRule::node_count(sig.q(), exact_degree))
}

impl QuadratureGrid {
    pub fn sig(&self) -> Signature {
        self.sig
    }
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }
    pub fn len(&self) -> usize {
        self.rule_p.len() * self.rule_q.len()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn rule_p(&self) -> &SphereRule {
        &self.rule_p
    }
    pub fn rule_q(&self) -> &SphereRule {
        &self.rule_q
    }
    pub fn u(&self, i: usize) -> &[f64] {
        self.rule_p.node(i / self.rule_q.len())
    }
    pub fn v(&self, i: usize) -> &[f64] {
        self.rule_q.node(i % self.rule_q.len())
    }
    pub fn node(&self, i: usize) -> SpherePoint {
        SpherePoint::new(self.u(i).to_vec(), self.v(i).to_vec()).expect("grid nodes lie on M")
    }
    pub fn weight(&self, i: usize) -> f64 {
        let nq = self.rule_q.len();
        self.rule_p.weights()[i / nq] * self.rule_q.weights()[i % nq]
    }
    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }
    /// Index of `(-u, -v)`.
    pub fn antipode(&self, i: usize) -> usize {
        let nq = self.rule_q.len();
        self.rule_p.antipode(i / nq) * nq + self.rule_q.antipode(i % nq)
    }
    fn same_as(&self, other: &QuadratureGrid) -> bool {
        self.sig == other.sig && self.exact_degree == other.exact_degree
    }
}

/// Complex samples of a function on `M` at the nodes of a grid, optionally
/// carrying a K-type expansion used to evaluate it away from the nodes.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<QuadratureGrid>,
    values: Vec<Complex64>,
    spectral: Option<Arc<SpectralFunction>>,
}

impl GridFunction {
    pub fn from_values(grid: Arc<QuadratureGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return arg(format!("expected {} values, got {}", grid.len(), values.len()));
        }
        Ok(GridFunction { grid, values, spectral: None })
    }

    pub fn from_fn<F>(grid: Arc<QuadratureGrid>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Complex64 + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|i| f(grid.u(i), grid.v(i))).collect();
        GridFunction { grid, values, spectral: None }
    }

    pub fn from_real_fn<F>(grid: Arc<QuadratureGrid>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Sync,
    {
        Self::from_fn(grid, |u, v| Complex64::new(f(u, v), 0.0))
    }

    pub fn zeros(grid: Arc<QuadratureGrid>) -> Self {
        let n = grid.len();
        GridFunction { grid, values: vec![Complex64::new(0.0, 0.0); n], spectral: None }
    }

    /// Attaches an expansion; the caller asserts it represents these samples.
    pub fn with_spectral(mut self, s: SpectralFunction) -> Result<Self> {
        if s.sig() != self.grid.sig() {
            return arg("spectral representation has a different signature");
        }
        self.spectral = Some(Arc::new(s));
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn spectral(&self) -> Option<&SpectralFunction> {
        self.spectral.as_deref()
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return arg("grid functions live on different grids");
        }
        Ok(())
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, z)| self.grid.weight(i) * z.norm_sqr()).sum()
    }
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction::from_values(self.grid.clone(), self.values.iter().map(|z| z * c).collect()).unwrap()
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        GridFunction::from_values(self.grid.clone(), values)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        GridFunction::from_values(self.grid.clone(), values)
    }

    /// `max_i |F_i|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `sum_i w_i F_i`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().enumerate().map(|(i, z)| z * self.grid.weight(i)).sum()
    }
}

/// `sum_i w_i F_i conj(G_i)`.
pub fn l2_inner(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    f.check_same_grid(g)?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .enumerate()
        .map(|(i, (a, b))| a * b.conj() * f.grid.weight(i))
        .sum())
}
