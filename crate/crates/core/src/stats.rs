//! Correlation tests, ranking utilities, windows, and the missing-aware
//! region-year metric table they all operate on.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::complexity::{ComplexityScores, ScoreMetric};
use crate::dist::t_two_sided_p;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("input is constant; correlation undefined")]
    ConstantInput,
    #[error("insufficient data: need at least {needed}, have {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("need at least 2 years, have {got}")]
    InsufficientYears { got: usize },
    #[error("ricd denominator (ricr) must be positive, got {got}")]
    NonpositiveDenominator { got: f64 },
    #[error("unknown column `{name}`")]
    UnknownColumn { name: String },
    #[error("design matrix is rank deficient (pivot {pivot:.3e} on column `{column}`)")]
    RankDeficient { column: String, pivot: f64 },
    #[error("column `{column}` must be positive for the log transform; ({region}, {year}) has {value}")]
    NonpositiveLog {
        column: String,
        region: String,
        year: i32,
        value: f64,
    },
}

/// Significance stars for a p-value; boundaries are inclusive on the
/// stricter side, so p = 0.05 earns `**`.
pub fn significance_stars(p: f64) -> &'static str {
    if p <= 0.01 {
        "***"
    } else if p <= 0.05 {
        "**"
    } else if p <= 0.1 {
        "*"
    } else {
        ""
    }
}

/// Pearson correlation with its two-sided p-value and the pair count used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pearson {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Sample Pearson correlation over complete pairs.
///
/// The p-value is two-sided from t = r sqrt((n-2)/(1-r^2)) against Student's
/// t with n-2 degrees of freedom; an exact |r| = 1 maps to p = 0.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Pearson, StatsError> {
    assert_eq!(x.len(), y.len(), "pearson inputs must be paired");
    let n = x.len();
    if n < 3 {
        return Err(StatsError::InsufficientData { needed: 3, got: n });
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(Pearson {
        r,
        p: pearson_p_two_sided(r, n),
        n,
    })
}

/// Two-sided p-value for an observed correlation r over n pairs.
pub fn pearson_p_two_sided(r: f64, n: usize) -> f64 {
    assert!(n >= 3);
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    t_two_sided_p(t, df)
}

/// Pearson over pairwise-complete observations of two missing-aware vectors.
pub fn pearson_pairwise(x: &[Option<f64>], y: &[Option<f64>]) -> Result<Pearson, StatsError> {
    assert_eq!(x.len(), y.len(), "pearson inputs must be paired");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (a, b) in x.iter().zip(y) {
        if let (Some(a), Some(b)) = (a, b) {
            xs.push(*a);
            ys.push(*b);
        }
    }
    if xs.len() < 3 {
        return Err(StatsError::InsufficientData {
            needed: 3,
            got: xs.len(),
        });
    }
    pearson(&xs, &ys)
}

/// Ranking direction; the paper's tables rank 1 = largest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankDirection {
    #[default]
    Descending,
    Ascending,
}

/// Ranks with average ties; missing values get missing ranks.
pub fn rank(
    values: &[Option<f64>],
    direction: RankDirection,
) -> Result<Vec<Option<f64>>, StatsError> {
    let present: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    if present.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut order = present.clone();
    order.sort_by(|&a, &b| {
        let (va, vb) = (values[a].unwrap(), values[b].unwrap());
        match direction {
            RankDirection::Descending => vb.total_cmp(&va),
            RankDirection::Ascending => va.total_cmp(&vb),
        }
    });
    let mut ranks = vec![None; values.len()];
    let mut pos = 0;
    while pos < order.len() {
        let mut end = pos + 1;
        while end < order.len() && values[order[end]] == values[order[pos]] {
            end += 1;
        }
        // Average of the 1-based positions covered by the tie group.
        let avg = (pos + 1 + end) as f64 / 2.0;
        for &idx in &order[pos..end] {
            ranks[idx] = Some(avg);
        }
        pos = end;
    }
    Ok(ranks)
}

/// Per-year ranks of one metric across regions, plus the Pearson correlation
/// between the first and last year's ranks.
#[derive(Debug, Clone)]
pub struct RankEvolution {
    pub metric: ScoreMetric,
    pub years: Vec<i32>,
    pub regions: Vec<String>,
    /// `ranks[region_slot][year_slot]`; missing where the region is absent or
    /// the metric undefined that year.
    pub ranks: Vec<Vec<Option<f64>>>,
    pub endpoint_correlation: Pearson,
}

/// Ranks every region by `metric` within each year and correlates the
/// first-year against the last-year ranks over regions present in both.
pub fn rank_evolution(
    scores_by_year: &[ComplexityScores],
    metric: ScoreMetric,
) -> Result<RankEvolution, StatsError> {
    if scores_by_year.len() < 2 {
        return Err(StatsError::InsufficientYears {
            got: scores_by_year.len(),
        });
    }
    let mut sorted: Vec<&ComplexityScores> = scores_by_year.iter().collect();
    sorted.sort_by_key(|s| s.year);
    let years: Vec<i32> = sorted.iter().map(|s| s.year).collect();

    let mut regions: Vec<String> = sorted
        .iter()
        .flat_map(|s| s.regions.iter().cloned())
        .collect();
    regions.sort();
    regions.dedup();
    let region_slot: BTreeMap<&str, usize> = regions
        .iter()
        .enumerate()
        .map(|(i, r)| (r.as_str(), i))
        .collect();

    let mut ranks = vec![vec![None; years.len()]; regions.len()];
    for (year_slot, scores) in sorted.iter().enumerate() {
        let values: Vec<Option<f64>> = (0..scores.regions.len())
            .map(|slot| scores.metric(metric, slot))
            .collect();
        let year_ranks = rank(&values, RankDirection::Descending)?;
        for (slot, region) in scores.regions.iter().enumerate() {
            ranks[region_slot[region.as_str()]][year_slot] = year_ranks[slot];
        }
    }

    let first: Vec<Option<f64>> = ranks.iter().map(|r| r[0]).collect();
    let last: Vec<Option<f64>> = ranks.iter().map(|r| r[years.len() - 1]).collect();
    let endpoint_correlation = pearson_pairwise(&first, &last)?;
    Ok(RankEvolution {
        metric,
        years,
        regions,
        ranks,
        endpoint_correlation,
    })
}

/// Relative income difference: the urban/rural relative-income ratio.
pub fn ricd(ricu: f64, ricr: f64) -> Result<f64, StatsError> {
    if ricr <= 0.0 {
        return Err(StatsError::NonpositiveDenominator { got: ricr });
    }
    Ok(ricu / ricr)
}

/// Missing-aware numeric table keyed by (region, year) with named columns.
#[derive(Debug, Clone)]
pub struct MetricTable {
    columns: Vec<String>,
    rows: BTreeMap<(String, i32), Vec<Option<f64>>>,
}

impl MetricTable {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> MetricTable {
        MetricTable {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: BTreeMap::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn column_slot(&self, name: &str) -> Result<usize, StatsError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| StatsError::UnknownColumn {
                name: name.to_string(),
            })
    }

    pub fn set(&mut self, region: &str, year: i32, column: &str, value: f64) -> Result<(), StatsError> {
        let slot = self.column_slot(column)?;
        let width = self.columns.len();
        self.rows
            .entry((region.to_string(), year))
            .or_insert_with(|| vec![None; width])[slot] = Some(value);
        Ok(())
    }

    pub fn get(&self, region: &str, year: i32, column: &str) -> Option<f64> {
        let slot = self.column_slot(column).ok()?;
        self.rows.get(&(region.to_string(), year))?[slot]
    }

    pub fn keys(&self) -> impl Iterator<Item = &(String, i32)> {
        self.rows.keys()
    }

    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.rows.keys().map(|(_, y)| *y).collect();
        years.sort_unstable();
        years.dedup();
        years
    }

    /// One column in row-key order.
    pub fn column_values(&self, column: &str) -> Result<Vec<Option<f64>>, StatsError> {
        let slot = self.column_slot(column)?;
        Ok(self.rows.values().map(|row| row[slot]).collect())
    }

    /// Rows restricted to `year_from..=year_to`.
    pub fn filter_years(&self, year_from: i32, year_to: i32) -> MetricTable {
        MetricTable {
            columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .filter(|((_, year), _)| (year_from..=year_to).contains(year))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// CSV dump: `region,year,<columns...>`, blanks for missing values.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["region".to_string(), "year".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for ((region, year), row) in &self.rows {
            let mut rec = vec![region.clone(), year.to_string()];
            rec.extend(
                row.iter()
                    .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
            );
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-region arithmetic means over `year_from..=year_to`, keyed at
/// `year_from`; a cell stays missing when absent in every window year.
pub fn average_window(
    table: &MetricTable,
    columns: &[String],
    year_from: i32,
    year_to: i32,
) -> Result<MetricTable, StatsError> {
    assert!(year_from <= year_to, "empty averaging window");
    for c in columns {
        table.column_slot(c)?;
    }
    let mut sums: BTreeMap<String, Vec<(f64, usize)>> = BTreeMap::new();
    for ((region, year), _) in table.rows.iter() {
        if !(year_from..=year_to).contains(year) {
            continue;
        }
        let acc = sums
            .entry(region.clone())
            .or_insert_with(|| vec![(0.0, 0); columns.len()]);
        for (slot, column) in columns.iter().enumerate() {
            if let Some(v) = table.get(region, *year, column) {
                acc[slot].0 += v;
                acc[slot].1 += 1;
            }
        }
    }
    let mut out = MetricTable::new(columns.to_vec());
    for (region, acc) in sums {
        for (slot, column) in columns.iter().enumerate() {
            let (sum, count) = acc[slot];
            if count > 0 {
                out.set(&region, year_from, column, sum / count as f64)?;
            }
        }
    }
    Ok(out)
}

/// One cell of the correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrCell {
    pub r: f64,
    pub p: f64,
    pub n: usize,
    pub stars: &'static str,
}

/// Pairwise Pearson matrix over named columns; cells where the correlation
/// is undefined are missing.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub columns: Vec<String>,
    /// Row-major, `cells[i * columns.len() + j]`.
    pub cells: Vec<Option<CorrCell>>,
}

impl CorrelationMatrix {
    pub fn at(&self, i: usize, j: usize) -> Option<&CorrCell> {
        self.cells[i * self.columns.len() + j].as_ref()
    }

    /// CSV dump: `column_a,column_b,r,p,n,stars` for every ordered pair.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["column_a", "column_b", "r", "p", "n", "stars"])?;
        for (i, a) in self.columns.iter().enumerate() {
            for (j, b) in self.columns.iter().enumerate() {
                match self.at(i, j) {
                    Some(cell) => w.write_record([
                        a.as_str(),
                        b.as_str(),
                        &cell.r.to_string(),
                        &cell.p.to_string(),
                        &cell.n.to_string(),
                        cell.stars,
                    ])?,
                    None => w.write_record([a.as_str(), b.as_str(), "", "", "", ""])?,
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Pairwise-deletion correlation matrix over the requested columns.
pub fn correlation_matrix(
    table: &MetricTable,
    columns: &[String],
) -> Result<CorrelationMatrix, StatsError> {
    if columns.len() < 2 {
        return Err(StatsError::InsufficientData {
            needed: 2,
            got: columns.len(),
        });
    }
    let vectors: Vec<Vec<Option<f64>>> = columns
        .iter()
        .map(|c| table.column_values(c))
        .collect::<Result<_, _>>()?;
    let k = columns.len();
    let mut cells = vec![None; k * k];
    for i in 0..k {
        for j in 0..k {
            if let Ok(res) = pearson_pairwise(&vectors[i], &vectors[j]) {
                cells[i * k + j] = Some(CorrCell {
                    r: res.r,
                    p: res.p,
                    n: res.n,
                    stars: significance_stars(res.p),
                });
            }
        }
    }
    Ok(CorrelationMatrix {
        columns: columns.to_vec(),
        cells,
    })
}
