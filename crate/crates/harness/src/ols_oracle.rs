//! Normal-equations OLS oracle in double-double arithmetic, independent of
//! the production QR route: build X'X and X'y exactly-ish, invert X'X by
//! Gauss-Jordan with partial pivoting, and read standard errors off the
//! explicit inverse.

use crate::dd::Dd;
use crate::eigen_oracle::OracleError;

/// Oracle fit: coefficients and classical standard errors, plus residual
/// diagnostics for exact-fit checks.
#[derive(Debug, Clone)]
pub struct OlsOracleFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
}

/// Solves least squares for `y ~ X` (row-major n x k, full rank, n > k).
pub fn ols_oracle(y: &[f64], x: &[f64], n: usize, k: usize) -> Result<OlsOracleFit, OracleError> {
    assert_eq!(y.len(), n);
    assert_eq!(x.len(), n * k);
    assert!(n > k, "need more observations than columns");

    let at = |r: usize, c: usize| Dd::from_f64(x[r * k + c]);
    let mut xtx = vec![Dd::ZERO; k * k];
    let mut xty = vec![Dd::ZERO; k];
    for i in 0..k {
        for j in i..k {
            let mut acc = Dd::ZERO;
            for r in 0..n {
                acc = acc + at(r, i) * at(r, j);
            }
            xtx[i * k + j] = acc;
            xtx[j * k + i] = acc;
        }
        let mut acc = Dd::ZERO;
        for r in 0..n {
            acc = acc + at(r, i) * Dd::from_f64(y[r]);
        }
        xty[i] = acc;
    }

    let inv = invert(&xtx, k)?;
    let beta: Vec<Dd> = (0..k)
        .map(|i| {
            let mut acc = Dd::ZERO;
            for j in 0..k {
                acc = acc + inv[i * k + j] * xty[j];
            }
            acc
        })
        .collect();

    let mut residuals = Vec::with_capacity(n);
    let mut rss = Dd::ZERO;
    for r in 0..n {
        let mut fitted = Dd::ZERO;
        for j in 0..k {
            fitted = fitted + at(r, j) * beta[j];
        }
        let e = Dd::from_f64(y[r]) - fitted;
        rss = rss + e * e;
        residuals.push(e.to_f64());
    }
    let sigma2 = rss / Dd::from_f64((n - k) as f64);
    let std_errors: Vec<f64> = (0..k)
        .map(|j| (sigma2 * inv[j * k + j]).sqrt().to_f64())
        .collect();
    Ok(OlsOracleFit {
        coefficients: beta.iter().map(|b| b.to_f64()).collect(),
        std_errors,
        residuals,
        rss: rss.to_f64(),
    })
}

/// Gauss-Jordan inverse with partial pivoting in double-double.
fn invert(a: &[Dd], k: usize) -> Result<Vec<Dd>, OracleError> {
    let scale = a.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max).max(1.0);
    let tol = scale * 1e-26;
    let mut m = a.to_vec();
    let mut inv = vec![Dd::ZERO; k * k];
    for i in 0..k {
        inv[i * k + i] = Dd::ONE;
    }
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&i, &j| {
                m[i * k + col]
                    .to_f64()
                    .abs()
                    .total_cmp(&m[j * k + col].to_f64().abs())
            })
            .expect("nonempty");
        let pivot = m[pivot_row * k + col];
        if pivot.to_f64().abs() <= tol {
            return Err(OracleError::Singular {
                pivot: pivot.to_f64(),
            });
        }
        if pivot_row != col {
            for j in 0..k {
                m.swap(col * k + j, pivot_row * k + j);
                inv.swap(col * k + j, pivot_row * k + j);
            }
        }
        let pivot = m[col * k + col];
        for j in 0..k {
            m[col * k + j] = m[col * k + j] / pivot;
            inv[col * k + j] = inv[col * k + j] / pivot;
        }
        for i in 0..k {
            if i == col {
                continue;
            }
            let factor = m[i * k + col];
            if factor.to_f64() == 0.0 && factor.lo == 0.0 {
                continue;
            }
            for j in 0..k {
                m[i * k + j] = m[i * k + j] - factor * m[col * k + j];
                inv[i * k + j] = inv[i * k + j] - factor * inv[col * k + j];
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_fit_has_zero_residuals() {
        // y = 3 + 2 x, fit with intercept column.
        let n = 6;
        let x: Vec<f64> = (0..n).flat_map(|i| [1.0, i as f64]).collect();
        let y: Vec<f64> = (0..n).map(|i| 3.0 + 2.0 * i as f64).collect();
        let fit = ols_oracle(&y, &x, n, 2).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.coefficients[1], 2.0, epsilon = 1e-14);
        for e in &fit.residuals {
            assert!(e.abs() < 1e-14);
        }
        assert!(fit.rss < 1e-28);
    }

    #[test]
    fn orthonormal_design_gives_inner_products() {
        // Columns: indicators of two disjoint halves, scaled to unit norm.
        let n = 8;
        let h = (4.0f64).sqrt();
        let mut x = vec![0.0; n * 2];
        for r in 0..4 {
            x[r * 2] = 1.0 / h;
        }
        for r in 4..8 {
            x[r * 2 + 1] = 1.0 / h;
        }
        let y: Vec<f64> = (0..n).map(|i| (i as f64) - 2.0).collect();
        let fit = ols_oracle(&y, &x, n, 2).unwrap();
        for j in 0..2 {
            let dot: f64 = (0..n).map(|r| x[r * 2 + j] * y[r]).sum();
            assert_abs_diff_eq!(fit.coefficients[j], dot, epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_design_is_rejected() {
        let n = 5;
        let x: Vec<f64> = (0..n).flat_map(|i| [i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..n).map(|i| i as f64).collect();
        assert!(matches!(
            ols_oracle(&y, &x, n, 2),
            Err(OracleError::Singular { .. })
        ));
    }
}
