//! Non-monetary economic complexity metrics from region-industry firm counts.
//!
//! The crate ingests firm registration records, builds yearly region x
//! industry count matrices, derives revealed comparative advantage and the
//! binary advantage matrix, and computes four economic diversity metrics per
//! region: ECI (second eigenvector of the region-coupling matrix), Fitness
//! (nonlinear fixed-point iteration), Diversity, and Shannon Entropy. A
//! statistics layer reproduces the analysis surface around them: Pearson
//! correlations with p-values, rank evolution, windowed averages, and OLS
//! with year fixed effects.
//!
//! Modules follow the pipeline order:
//!
//! - [`ingest`] - CSV parsing, activity windowing, count matrices
//! - [`advantage`] - RCA, binarization, diversity/ubiquity/quadrants
//! - [`complexity`] - coupling matrix, ECI, Fitness, Entropy
//! - [`stats`] / [`regress`] - correlations, ranks, windows, OLS
//! - [`pipeline`] - per-year batching (rayon-parallel with the default
//!   `parallel` feature) and metric-table assembly

pub mod advantage;
pub mod complexity;
pub mod dist;
pub mod eigen;
pub mod ingest;
pub mod pipeline;
pub mod regress;
pub mod stats;

pub use advantage::{binarize, quadrants, rca, AdvantageError, AdvantageMatrix, Quadrant, RcaMatrix};
pub use complexity::{
    complexity_scores, coupling_matrix, coupling_spectrum, eci, eci_with_solver, entropy, fitness,
    fitness_with_init, ComplexityError, ComplexityScores, CouplingMatrix, EciResult, FitnessResult,
    MetricParams, ScoreMetric,
};
pub use eigen::EigenSolver;
pub use ingest::{
    build_count_matrix, is_active, parse_firm_records, parse_panel, CountMatrix, FirmRecord,
    IngestError, PanelRow, PanelTable, PruneReport,
};
pub use pipeline::{
    metric_table, metrics_for_year, metrics_for_years, metrics_for_years_seq, PipelineError,
    YearMetrics,
};
pub use regress::{design_matrix, ols_from_design, ols_year_fe, Coefficient, Design, RegressionResult};
pub use stats::{
    average_window, correlation_matrix, pearson, pearson_p_two_sided, pearson_pairwise, rank,
    rank_evolution, ricd, significance_stars, CorrCell, CorrelationMatrix, MetricTable, Pearson,
    RankDirection, RankEvolution, StatsError,
};
