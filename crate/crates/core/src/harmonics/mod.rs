//! Spherical harmonics on each factor of `M`, product quadrature and the
//! decomposition of functions into K-types `H^a(R^p) (x) H^b(R^q)`.

mod basis;
mod grid;
mod spectral_fn;
mod transform;

pub use basis::{dim_harmonics, gegenbauer, zonal, HarmonicBasis};
pub use grid::{build_grid, build_grid_capped, grid_node_count, l2_inner, GridFunction, QuadratureGrid, DEFAULT_MAX_NODES};
pub use spectral_fn::{Block, EvalScratch, Evaluator, KTypeLabel, SpectralFunction};
pub use transform::{decompose, eval_points, project_ktype, project_ktype_zonal, synthesize};

pub use basis::zonal_projection_matrix;

/// Rank of the Gram matrix of the zonal-kernel projections onto `H^k` of all
/// degree-`k` monomials in `p` variables, computed on a rule exact for
/// degree `2k`. Equals `dim H^k(R^p)`.
pub fn monomial_gram_rank(p: usize, k: usize) -> usize {
    use crate::quadrature::SphereRule;
    use nalgebra::{DMatrix, DVector, SymmetricEigen};
    let rule = SphereRule::build(p, 2 * k + 2).expect("p >= 2");
    let proj = zonal_projection_matrix(&rule, k);
    let mut exps = Vec::new();
    multi_indices(p, k, &mut vec![0; p], 0, &mut exps);
    let cols: Vec<DVector<f64>> = exps
        .iter()
        .map(|e| {
            let f = DVector::from_fn(rule.len(), |i, _| {
                let u = rule.node(i);
                e.iter().enumerate().map(|(j, &n)| u[j].powi(n as i32)).product()
            });
            &proj * f
        })
        .collect();
    let m = cols.len();
    let w = DVector::from_column_slice(rule.weights());
    let gram = DMatrix::from_fn(m, m, |i, j| cols[i].component_mul(&cols[j]).dot(&w));
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let top = eig.iter().cloned().fold(0.0, f64::max);
    eig.iter().filter(|&&x| x > 1e-9 * top).count()
}

fn multi_indices(p: usize, k: usize, cur: &mut Vec<usize>, i: usize, out: &mut Vec<Vec<usize>>) {
    if i + 1 == p {
        cur[i] = k;
        out.push(cur.clone());
        return;
    }
    for n in 0..=k {
        cur[i] = n;
        multi_indices(p, k - n, cur, i + 1, out);
    }
}
