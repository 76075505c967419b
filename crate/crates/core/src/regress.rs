//! OLS with year fixed effects, classical standard errors, and the Table-style
//! reporting surface (stars, adjusted R², RMSE).

use nalgebra::{DMatrix, DVector};

use crate::stats::{significance_stars, MetricTable, StatsError};
use crate::dist::t_two_sided_p;

/// Relative pivot threshold below which the design matrix counts as rank
/// deficient.
const RANK_TOL: f64 = 1e-10;

/// One reported coefficient.
#[derive(Debug, Clone)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub stars: &'static str,
}

/// Full regression report.
#[derive(Debug, Clone)]
pub struct RegressionResult {
    pub dependent: String,
    pub coefficients: Vec<Coefficient>,
    pub n_observations: usize,
    pub r2: f64,
    pub adjusted_r2: f64,
    /// Root mean square error with denominator n.
    pub rmse: f64,
    pub df_resid: usize,
}

/// Listwise-complete design matrix: intercept, predictors, then year
/// indicator columns with the first (earliest) year dropped as baseline.
#[derive(Debug, Clone)]
pub struct Design {
    pub dependent: String,
    /// Column names, starting with "intercept".
    pub names: Vec<String>,
    /// Response, one entry per kept observation.
    pub y: Vec<f64>,
    /// Row-major n x k design values.
    pub x: Vec<f64>,
    pub n: usize,
    pub k: usize,
    /// (region, year) key of each kept observation, in table order.
    pub keys: Vec<(String, i32)>,
}

/// Builds the year-fixed-effects design from listwise-complete rows.
pub fn design_matrix(
    table: &MetricTable,
    dependent: &str,
    predictors: &[String],
) -> Result<Design, StatsError> {
    let dep = table.column_values(dependent)?;
    let pred_cols: Vec<Vec<Option<f64>>> = predictors
        .iter()
        .map(|p| table.column_values(p))
        .collect::<Result<_, _>>()?;
    let keys: Vec<(String, i32)> = table.keys().cloned().collect();

    let mut kept = Vec::new();
    for row in 0..keys.len() {
        if dep[row].is_some() && pred_cols.iter().all(|c| c[row].is_some()) {
            kept.push(row);
        }
    }
    let mut years: Vec<i32> = kept.iter().map(|&r| keys[r].1).collect();
    years.sort_unstable();
    years.dedup();
    let dummy_years = &years[1.min(years.len())..];

    let mut names = vec!["intercept".to_string()];
    names.extend(predictors.iter().cloned());
    names.extend(dummy_years.iter().map(|y| format!("year={y}")));
    let k = names.len();
    let n = kept.len();
    if n <= k {
        return Err(StatsError::InsufficientData { needed: k + 1, got: n });
    }

    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n * k);
    for &row in &kept {
        y.push(dep[row].unwrap());
        x.push(1.0);
        for col in &pred_cols {
            x.push(col[row].unwrap());
        }
        for &dy in dummy_years {
            x.push(if keys[row].1 == dy { 1.0 } else { 0.0 });
        }
    }
    Ok(Design {
        dependent: dependent.to_string(),
        names,
        y,
        x,
        n,
        k,
        keys: kept.into_iter().map(|r| keys[r].clone()).collect(),
    })
}

/// Least-squares fit of a prepared design via QR, with classical
/// homoskedastic standard errors and two-sided t p-values.
pub fn ols_from_design(design: &Design) -> Result<RegressionResult, StatsError> {
    let n = design.n;
    let k = design.k;
    let x = DMatrix::from_row_slice(n, k, &design.x);
    let y = DVector::from_column_slice(&design.y);

    let qr = x.clone().qr();
    let r = qr.r();
    let max_pivot = (0..k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    for j in 0..k {
        if r[(j, j)].abs() <= RANK_TOL * max_pivot.max(1e-300) {
            return Err(StatsError::RankDeficient {
                column: design.names[j].clone(),
                pivot: r[(j, j)].abs(),
            });
        }
    }
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| StatsError::RankDeficient {
            column: design.names[k - 1].clone(),
            pivot: 0.0,
        })?;

    let fitted = &x * &beta;
    let residuals = &y - &fitted;
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let mean_y = design.y.iter().sum::<f64>() / n as f64;
    let tss: f64 = design.y.iter().map(|v| (v - mean_y).powi(2)).sum();
    if tss == 0.0 {
        return Err(StatsError::ConstantInput);
    }

    let df = n - k;
    let sigma2 = rss / df as f64;
    let r_inv = r
        .try_inverse()
        .ok_or_else(|| StatsError::RankDeficient {
            column: design.names[k - 1].clone(),
            pivot: 0.0,
        })?;
    // (X'X)^{-1} = R^{-1} R^{-T}; only the diagonal is needed.
    let coefficients = (0..k)
        .map(|j| {
            let row_norm2: f64 = (0..k).map(|c| r_inv[(j, c)].powi(2)).sum();
            let std_error = (sigma2 * row_norm2).sqrt();
            let estimate = beta[j];
            let t_stat = estimate / std_error;
            let p_value = t_two_sided_p(t_stat, df as f64);
            Coefficient {
                name: design.names[j].clone(),
                estimate,
                std_error,
                t_stat,
                p_value,
                stars: significance_stars(p_value),
            }
        })
        .collect();

    let r2 = 1.0 - rss / tss;
    let adjusted_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / df as f64;
    Ok(RegressionResult {
        dependent: design.dependent.clone(),
        coefficients,
        n_observations: n,
        r2,
        adjusted_r2,
        rmse: (rss / n as f64).sqrt(),
        df_resid: df,
    })
}

/// OLS of `dependent` on `predictors` plus year fixed effects.
pub fn ols_year_fe(
    table: &MetricTable,
    dependent: &str,
    predictors: &[String],
) -> Result<RegressionResult, StatsError> {
    ols_from_design(&design_matrix(table, dependent, predictors)?)
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    /// CSV dump of the coefficient table plus summary rows.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["term", "estimate", "std_error", "t_stat", "p_value", "stars"])?;
        for c in &self.coefficients {
            w.write_record([
                c.name.as_str(),
                &c.estimate.to_string(),
                &c.std_error.to_string(),
                &c.t_stat.to_string(),
                &c.p_value.to_string(),
                c.stars,
            ])?;
        }
        w.write_record(["n_observations", &self.n_observations.to_string(), "", "", "", ""])?;
        w.write_record(["adjusted_r2", &self.adjusted_r2.to_string(), "", "", "", ""])?;
        w.write_record(["rmse", &self.rmse.to_string(), "", "", "", ""])?;
        w.flush()?;
        Ok(())
    }
}
