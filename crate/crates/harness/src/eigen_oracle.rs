//! Dense eigen oracle for matrices up to 8x8, independent of the production
//! eigensolvers.
//!
//! Route: characteristic polynomial by Faddeev-LeVerrier in double-double
//! arithmetic, roots by Durand-Kerner iteration in complex double-double,
//! eigenvectors as nullspaces of (A - lambda I) via full-pivot elimination,
//! again in double-double. Supports real-spectrum diagonalizable inputs,
//! which covers every coupling matrix; a materially complex root is an error
//! rather than a silent truncation.

use thiserror::Error;

use crate::dd::Dd;

/// Hard dimension cap; the polynomial route degrades beyond this.
pub const MAX_ORACLE_DIM: usize = 8;

/// Roots closer than this (relative to the spectral scale) merge into one
/// eigenvalue cluster, which bounds the oracle's resolution.
const CLUSTER_TOL: f64 = 1e-7;
/// Relative imaginary part above which a root counts as genuinely complex.
const IMAG_TOL: f64 = 1e-8;
/// Relative pivot threshold for the nullspace rank decision.
const RANK_TOL: f64 = 5e-7;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle handles dimensions up to {MAX_ORACLE_DIM}, got {got}")]
    DimensionTooLarge { got: usize },
    #[error("matrix has a complex eigenvalue pair (imag {imag:.3e}); oracle covers real spectra only")]
    ComplexSpectrum { imag: f64 },
    #[error("eigenvalue {value} has geometric multiplicity {geometric} below its algebraic multiplicity {algebraic}")]
    Defective {
        value: f64,
        geometric: usize,
        algebraic: usize,
    },
    #[error("durand-kerner iteration failed to settle")]
    RootsDidNotConverge,
    #[error("singular normal equations (pivot {pivot:.3e})")]
    Singular { pivot: f64 },
}

/// One eigenpair; for repeated eigenvalues the vectors span the eigenspace.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Full spectrum of a real square matrix (row-major), eigenvalues descending.
pub fn eigen_oracle(a: &[f64], dim: usize) -> Result<Vec<EigenPair>, OracleError> {
    assert_eq!(a.len(), dim * dim, "matrix shape mismatch");
    assert!(dim >= 1);
    if dim > MAX_ORACLE_DIM {
        return Err(OracleError::DimensionTooLarge { got: dim });
    }
    let coeffs = char_poly(a, dim);
    let roots = durand_kerner(&coeffs)?;
    let scale = roots
        .iter()
        .map(|r| (r.re.hi * r.re.hi + r.im.hi * r.im.hi).sqrt())
        .fold(1.0, f64::max);
    for r in &roots {
        if r.im.hi.abs() > IMAG_TOL * scale {
            return Err(OracleError::ComplexSpectrum { imag: r.im.hi });
        }
    }
    let mut reals: Vec<f64> = roots.iter().map(|r| r.re.to_f64()).collect();
    reals.sort_by(|x, y| y.total_cmp(x));

    let mut pairs = Vec::with_capacity(dim);
    let mut idx = 0;
    while idx < reals.len() {
        let mut end = idx + 1;
        while end < reals.len() && (reals[idx] - reals[end]).abs() <= CLUSTER_TOL * scale {
            end += 1;
        }
        let algebraic = end - idx;
        let value = reals[idx..end].iter().sum::<f64>() / algebraic as f64;
        let basis = nullspace(a, dim, value);
        if basis.len() < algebraic {
            return Err(OracleError::Defective {
                value,
                geometric: basis.len(),
                algebraic,
            });
        }
        for vector in basis.into_iter().take(algebraic) {
            pairs.push(EigenPair { value, vector });
        }
        idx = end;
    }
    Ok(pairs)
}

/// Monic characteristic polynomial coefficients `[1, c1, ..., cn]` with
/// p(x) = x^n + c1 x^{n-1} + ... + cn, by the Faddeev-LeVerrier recurrence
/// in double-double arithmetic.
fn char_poly(a: &[f64], n: usize) -> Vec<Dd> {
    let to_dd = |v: &[Dd], i: usize, j: usize| v[i * n + j];
    let a_dd: Vec<Dd> = a.iter().map(|&v| Dd::from_f64(v)).collect();
    let mut coeffs = vec![Dd::ONE];
    // m = A, c1 = -tr(A); m_{k+1} = A (m_k + c_k I).
    let mut m = a_dd.clone();
    for k in 1..=n {
        let mut trace = Dd::ZERO;
        for i in 0..n {
            trace = trace + to_dd(&m, i, i);
        }
        let c = -(trace / Dd::from_f64(k as f64));
        coeffs.push(c);
        if k == n {
            break;
        }
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[i * n + i] = shifted[i * n + i] + c;
        }
        let mut next = vec![Dd::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Dd::ZERO;
                for l in 0..n {
                    acc = acc + to_dd(&a_dd, i, l) * to_dd(&shifted, l, j);
                }
                next[i * n + j] = acc;
            }
        }
        m = next;
    }
    coeffs
}

/// Complex double-double, just enough for Durand-Kerner.
#[derive(Debug, Clone, Copy)]
struct Cd {
    re: Dd,
    im: Dd,
}

impl Cd {
    fn new(re: f64, im: f64) -> Cd {
        Cd {
            re: Dd::from_f64(re),
            im: Dd::from_f64(im),
        }
    }

    fn sub(self, rhs: Cd) -> Cd {
        Cd {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }

    fn mul(self, rhs: Cd) -> Cd {
        Cd {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }

    fn div(self, rhs: Cd) -> Cd {
        let denom = rhs.re * rhs.re + rhs.im * rhs.im;
        Cd {
            re: (self.re * rhs.re + self.im * rhs.im) / denom,
            im: (self.im * rhs.re - self.re * rhs.im) / denom,
        }
    }

    fn abs_approx(self) -> f64 {
        (self.re.hi * self.re.hi + self.im.hi * self.im.hi).sqrt()
    }
}

/// All roots of a monic polynomial by Durand-Kerner (Weierstrass) iteration.
fn durand_kerner(coeffs: &[Dd]) -> Result<Vec<Cd>, OracleError> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let radius = 1.0
        + coeffs
            .iter()
            .skip(1)
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max);
    // Distinct, asymmetric starting points around a circle.
    let mut roots: Vec<Cd> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.1;
            Cd::new(radius * angle.cos(), radius * angle.sin())
        })
        .collect();
    let eval = |z: Cd| {
        let mut acc = Cd {
            re: coeffs[0],
            im: Dd::ZERO,
        };
        for c in &coeffs[1..] {
            acc = acc.mul(z);
            acc.re = acc.re + *c;
        }
        acc
    };
    for _ in 0..600 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = Cd::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom = denom.mul(roots[i].sub(roots[j]));
                }
            }
            let step = eval(roots[i]).div(denom);
            roots[i] = roots[i].sub(step);
            max_step = max_step.max(step.abs_approx());
        }
        if max_step < 1e-28 * radius {
            return Ok(roots);
        }
    }
    // Multiple roots stall around their cluster; the smeared positions are
    // still accurate enough for clustering.
    Ok(roots)
}

/// Orthonormal-ish nullspace basis of (A - value I) by full-pivot Gaussian
/// elimination in double-double arithmetic. Deterministic component signs.
fn nullspace(a: &[f64], n: usize, value: f64) -> Vec<Vec<f64>> {
    let shift = Dd::from_f64(value);
    let mut b: Vec<Dd> = a.iter().map(|&v| Dd::from_f64(v)).collect();
    for i in 0..n {
        b[i * n + i] = b[i * n + i] - shift;
    }
    let scale = b
        .iter()
        .map(|v| v.to_f64().abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let tol = RANK_TOL * scale;

    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for step in 0..n {
        // Full pivot over the trailing submatrix.
        let mut best = (step, step, 0.0f64);
        for i in step..n {
            for j in step..n {
                let mag = b[i * n + j].to_f64().abs();
                if mag > best.2 {
                    best = (i, j, mag);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        let (pr, pc, _) = best;
        for j in 0..n {
            b.swap(step * n + j, pr * n + j);
        }
        for i in 0..n {
            b.swap(i * n + step, i * n + pc);
        }
        col_perm.swap(step, pc);
        let pivot = b[step * n + step];
        for i in step + 1..n {
            let factor = b[i * n + step] / pivot;
            for j in step..n {
                b[i * n + j] = b[i * n + j] - factor * b[step * n + j];
            }
        }
        rank += 1;
    }

    let free = n - rank;
    let mut basis = Vec::with_capacity(free);
    for f in 0..free {
        // Permuted solution: free variable rank+f set to 1, others 0.
        let mut x = vec![Dd::ZERO; n];
        x[rank + f] = Dd::ONE;
        for i in (0..rank).rev() {
            let mut acc = Dd::ZERO;
            for j in i + 1..n {
                acc = acc + b[i * n + j] * x[j];
            }
            x[i] = -(acc / b[i * n + i]);
        }
        let mut vector = vec![0.0; n];
        for (slot, &orig) in col_perm.iter().enumerate() {
            vector[orig] = x[slot].to_f64();
        }
        let norm: f64 = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        let lead = vector
            .iter()
            .cloned()
            .max_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for v in vector.iter_mut() {
            *v *= sign / norm;
        }
        basis.push(vector);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_has_eigenvalue_one_with_multiplicity_three() {
        let a = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let pairs = eigen_oracle(&a, 3).unwrap();
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            assert_abs_diff_eq!(p.value, 1.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn swap_matrix_has_plus_minus_one() {
        let a = [0.0, 1.0, 1.0, 0.0];
        let pairs = eigen_oracle(&a, 2).unwrap();
        assert_abs_diff_eq!(pairs[0].value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs[1].value, -1.0, epsilon = 1e-12);
        let v = &pairs[0].vector;
        assert_abs_diff_eq!(v[0], v[1], epsilon = 1e-12);
    }

    #[test]
    fn nested_coupling_matrix_spectrum() {
        // Coupling matrix of the 3x3 staircase; exact eigenvalues 1, 1/4, 1/9.
        let a = [
            11.0 / 18.0,
            5.0 / 18.0,
            1.0 / 9.0,
            5.0 / 12.0,
            5.0 / 12.0,
            1.0 / 6.0,
            1.0 / 3.0,
            1.0 / 3.0,
            1.0 / 3.0,
        ];
        let pairs = eigen_oracle(&a, 3).unwrap();
        assert_abs_diff_eq!(pairs[0].value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs[1].value, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs[2].value, 1.0 / 9.0, epsilon = 1e-12);
        // Eigenvalue 1 carries the uniform eigenvector.
        let top = &pairs[0].vector;
        for v in top {
            assert_abs_diff_eq!(*v, top[0], epsilon = 1e-10);
        }
        // Cross-check the characteristic polynomial at the known roots:
        // p(x) = (x - 1)(x - 1/4)(x - 1/9) has c1 = -49/36.
        let coeffs = char_poly(&a, 3);
        assert_abs_diff_eq!(coeffs[1].to_f64(), -49.0 / 36.0, epsilon = 1e-14);
        assert_abs_diff_eq!(coeffs[3].to_f64(), -1.0 / 36.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvector_residuals_are_tiny() {
        let a = [
            0.7, 0.2, 0.1, //
            0.3, 0.5, 0.2, //
            0.25, 0.25, 0.5,
        ];
        let pairs = eigen_oracle(&a, 3).unwrap();
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * p.vector[j]).sum();
                assert_abs_diff_eq!(av, p.value * p.vector[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn dimension_cap() {
        let a = vec![0.0; 81];
        assert!(matches!(
            eigen_oracle(&a, 9),
            Err(OracleError::DimensionTooLarge { got: 9 })
        ));
    }

    #[test]
    fn rotation_matrix_is_reported_complex() {
        let a = [0.0, -1.0, 1.0, 0.0];
        assert!(matches!(
            eigen_oracle(&a, 2),
            Err(OracleError::ComplexSpectrum { .. })
        ));
    }
}
