//! Per-year orchestration: counts -> prune -> RCA -> advantage -> scores,
//! batched over years (in parallel with the `parallel` feature), plus the
//! assembly of the region-year metric table that feeds correlations and
//! regressions.

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::advantage::{binarize, quadrants, rca, AdvantageError, AdvantageMatrix, Quadrant, RcaMatrix};
use crate::complexity::{complexity_scores, ComplexityError, ComplexityScores, MetricParams};
use crate::ingest::{build_count_matrix, CountMatrix, FirmRecord, IngestError, PanelTable, PruneReport};
use crate::stats::{ricd, MetricTable, StatsError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("year {year}: {source}")]
    Ingest {
        year: i32,
        #[source]
        source: IngestError,
    },
    #[error("year {year}: {source}")]
    Advantage {
        year: i32,
        #[source]
        source: AdvantageError,
    },
    #[error("year {year}: {source}")]
    Complexity {
        year: i32,
        #[source]
        source: ComplexityError,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Everything computed for one year.
#[derive(Debug, Clone)]
pub struct YearMetrics {
    pub year: i32,
    pub counts: CountMatrix,
    pub prune: PruneReport,
    pub rca: RcaMatrix,
    pub advantage: AdvantageMatrix,
    pub quadrants: Vec<Option<Quadrant>>,
    pub scores: ComplexityScores,
}

/// Runs the full metric stage for one year of firm records.
pub fn metrics_for_year(
    records: &[FirmRecord],
    year: i32,
    params: &MetricParams,
) -> Result<YearMetrics, PipelineError> {
    let raw = build_count_matrix(records, year)
        .map_err(|source| PipelineError::Ingest { year, source })?;
    metrics_from_counts(&raw, params)
}

/// Runs the metric stage from an already-built count matrix.
pub fn metrics_from_counts(
    raw: &CountMatrix,
    params: &MetricParams,
) -> Result<YearMetrics, PipelineError> {
    let year = raw.year;
    let (counts, prune) = raw.prune_zero_lines();
    let rca_matrix = rca(&counts).map_err(|source| PipelineError::Advantage { year, source })?;
    let advantage = binarize(&rca_matrix, params.threshold);
    let scores = complexity_scores(&counts, &advantage, params)
        .map_err(|source| PipelineError::Complexity { year, source })?;
    let quadrant_labels = quadrants(&advantage);
    Ok(YearMetrics {
        year,
        counts,
        prune,
        rca: rca_matrix,
        advantage,
        quadrants: quadrant_labels,
        scores,
    })
}

/// Per-year metrics for a batch of years; years are independent, so with the
/// `parallel` feature this fans out across the rayon pool.
#[cfg(feature = "parallel")]
pub fn metrics_for_years(
    records: &[FirmRecord],
    years: &[i32],
    params: &MetricParams,
) -> Vec<(i32, Result<YearMetrics, PipelineError>)> {
    years
        .par_iter()
        .map(|&year| (year, metrics_for_year(records, year, params)))
        .collect()
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn metrics_for_years(
    records: &[FirmRecord],
    years: &[i32],
    params: &MetricParams,
) -> Vec<(i32, Result<YearMetrics, PipelineError>)> {
    metrics_for_years_seq(records, years, params)
}

/// Always-sequential variant, kept callable for benchmarking against the
/// parallel path.
pub fn metrics_for_years_seq(
    records: &[FirmRecord],
    years: &[i32],
    params: &MetricParams,
) -> Vec<(i32, Result<YearMetrics, PipelineError>)> {
    years
        .iter()
        .map(|&year| (year, metrics_for_year(records, year, params)))
        .collect()
}

/// Column names of the assembled metric table.
pub const TABLE_COLUMNS: [&str; 17] = [
    "eci",
    "fitness",
    "diversity",
    "entropy",
    "gdp_pc",
    "ln_gdp_pc",
    "population",
    "ln_population",
    "urbanization",
    "schooling",
    "innovation",
    "ln_innovation",
    "trade",
    "ln_trade",
    "ricu",
    "ricr",
    "ricd",
];

/// Panel columns that enter regressions in logs.
const LOG_COLUMNS: [(&str, &str); 4] = [
    ("gdp_pc", "ln_gdp_pc"),
    ("population", "ln_population"),
    ("innovation", "ln_innovation"),
    ("trade", "ln_trade"),
];

/// Joins per-year scores with the macro panel into one missing-aware table.
///
/// Log transforms are applied here; a present nonpositive value in a
/// log-transformed column is an error, never silently missing. RICD is
/// derived where both incomes are present.
pub fn metric_table(
    years: &[&YearMetrics],
    panel: &PanelTable,
) -> Result<MetricTable, PipelineError> {
    let mut table = MetricTable::new(TABLE_COLUMNS.to_vec());
    for ym in years {
        let scores = &ym.scores;
        for (slot, region) in scores.regions.iter().enumerate() {
            if let Some(v) = scores.eci[slot] {
                table.set(region, ym.year, "eci", v)?;
            }
            if let Some(v) = scores.fitness[slot] {
                table.set(region, ym.year, "fitness", v)?;
            }
            table.set(region, ym.year, "diversity", f64::from(scores.diversity[slot]))?;
            if let Some(v) = scores.entropy[slot] {
                table.set(region, ym.year, "entropy", v)?;
            }
            let Some(row) = panel.get(region, ym.year) else {
                continue;
            };
            for column in ["gdp_pc", "population", "urbanization", "schooling", "innovation", "trade", "ricu", "ricr"] {
                if let Some(v) = row.value(column) {
                    table.set(region, ym.year, column, v)?;
                }
            }
            for (raw, log) in LOG_COLUMNS {
                if let Some(v) = row.value(raw) {
                    if v <= 0.0 {
                        return Err(StatsError::NonpositiveLog {
                            column: raw.to_string(),
                            region: region.clone(),
                            year: ym.year,
                            value: v,
                        }
                        .into());
                    }
                    table.set(region, ym.year, log, v.ln())?;
                }
            }
            if let (Some(u), Some(r)) = (row.ricu, row.ricr) {
                table.set(region, ym.year, "ricd", ricd(u, r)?)?;
            }
        }
    }
    Ok(table)
}
