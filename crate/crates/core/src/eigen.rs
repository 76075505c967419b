//! Eigensolvers for the region-coupling matrix.
//!
//! The coupling matrix is row-stochastic but similar to a symmetric
//! positive-semidefinite matrix under a diagonal similarity transform, so
//! both paths here work on the symmetrized form: a dense symmetric
//! eigendecomposition for small problems and a deflated power iteration
//! above [`DENSE_DIM_LIMIT`].

use nalgebra::{DMatrix, DVector};

/// Largest dimension handled by the dense path when auto-selecting.
pub const DENSE_DIM_LIMIT: usize = 64;

/// Iteration cap for one deflated power-iteration solve.
const POWER_MAX_ITER: usize = 500_000;

/// Solver selection for the ECI eigenvector computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSolver {
    /// Dense below [`DENSE_DIM_LIMIT`], power iteration above.
    #[default]
    Auto,
    Dense,
    Power,
}

/// Full spectrum of a symmetric matrix, eigenvalues descending with matching
/// eigenvector columns.
pub fn symmetric_spectrum(t: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = t.nrows();
    let decomp = t.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[b].total_cmp(&decomp.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| decomp.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &decomp.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Top eigenpairs of a symmetric matrix by repeated deflation.
///
/// `known` carries already-known unit eigenpairs to deflate first (for the
/// coupling matrix that is the eigenvalue-1 pair, known analytically).
/// Returns `(eigenvalue, vector, residual)` per extracted pair, largest
/// first; `None` if the iteration hit its cap before reaching `residual_tol`.
pub fn deflated_power_pairs(
    t: &DMatrix<f64>,
    known: &[(f64, DVector<f64>)],
    count: usize,
    residual_tol: f64,
) -> Vec<Option<(f64, DVector<f64>, f64)>> {
    let n = t.nrows();
    let mut deflated: Vec<(f64, DVector<f64>)> = known.to_vec();
    let mut out = Vec::with_capacity(count);
    for extract in 0..count {
        let mut v = seed_vector(n, 0x9E3779B97F4A7C15 ^ (extract as u64 + 1));
        orthogonalize(&mut v, &deflated);
        let norm = v.norm();
        if norm == 0.0 {
            out.push(None);
            continue;
        }
        v /= norm;
        let mut found = None;
        for _ in 0..POWER_MAX_ITER {
            let mut w = t * &v;
            // Project out converged directions: u' T = theta u' for each pair,
            // so removing the u-component of T v applies (T - theta u u') v.
            for (_, u) in &deflated {
                let coeff = u.dot(&w);
                w.axpy(-coeff, u, 1.0);
            }
            let theta = v.dot(&w);
            let residual = (&w - theta * &v).amax();
            let norm = w.norm();
            if norm == 0.0 {
                break;
            }
            v = w / norm;
            if residual < residual_tol * theta.abs().max(1.0) {
                found = Some((theta, v.clone(), residual));
                break;
            }
        }
        match found {
            Some((theta, vec, residual)) => {
                deflated.push((theta, vec.clone()));
                out.push(Some((theta, vec, residual)));
            }
            None => out.push(None),
        }
    }
    out
}

fn orthogonalize(v: &mut DVector<f64>, basis: &[(f64, DVector<f64>)]) {
    for (_, u) in basis {
        let coeff = u.dot(v);
        v.axpy(-coeff, u, 1.0);
    }
}

/// Deterministic start vector; splitmix64 mapped to [-0.5, 0.5).
fn seed_vector(n: usize, seed: u64) -> DVector<f64> {
    let mut state = seed;
    DVector::from_iterator(
        n,
        (0..n).map(|_| {
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_spectrum_sorts_descending() {
        let t = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let (values, vectors) = symmetric_spectrum(&t);
        assert_abs_diff_eq!(values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], -1.0, epsilon = 1e-12);
        let v0 = vectors.column(0);
        assert_abs_diff_eq!(v0[0].abs(), v0[1].abs(), epsilon = 1e-12);
    }

    #[test]
    fn power_matches_dense_on_small_symmetric() {
        let t = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 0.5, 0.1, 0.5, 1.5, 0.2, 0.1, 0.2, 1.0],
        );
        let (values, vectors) = symmetric_spectrum(&t);
        let pairs = deflated_power_pairs(&t, &[], 3, 1e-13);
        for (i, pair) in pairs.iter().enumerate() {
            let (theta, v, _) = pair.as_ref().expect("converged");
            assert_abs_diff_eq!(*theta, values[i], epsilon = 1e-9);
            let dense = vectors.column(i);
            let sign = if dense.dot(v) < 0.0 { -1.0 } else { 1.0 };
            for j in 0..3 {
                assert_abs_diff_eq!(v[j] * sign, dense[j], epsilon = 1e-8);
            }
        }
    }
}
