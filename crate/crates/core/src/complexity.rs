//! ECI, Fitness/Complexity, and Shannon entropy.
//!
//! ECI is the standardized eigenvector for the second-largest eigenvalue of
//! the region-coupling matrix; Fitness/Q-complexity is the fixed point of the
//! mean-normalized nonlinear iteration; entropy measures how a region's firm
//! counts spread across its advantaged industries.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::advantage::AdvantageMatrix;
use crate::eigen::{deflated_power_pairs, symmetric_spectrum, EigenSolver, DENSE_DIM_LIMIT};
use crate::ingest::CountMatrix;

#[derive(Debug, Error)]
pub enum ComplexityError {
    #[error("no region/industry left after excluding zero-diversity and zero-ubiquity lines")]
    EmptyAfterExclusion,
    #[error("bipartite network is disconnected into {} components: {components}", components.0.len())]
    DisconnectedNetwork { components: ComponentList },
    #[error("degenerate spectrum: {detail}")]
    DegenerateSpectrum { detail: String },
    #[error("fitness iteration did not converge after {max_iter} iterations (residual {residual:.3e})")]
    NotConverged { max_iter: usize, residual: f64 },
    #[error("fitness value underflowed to zero at iteration {iteration}")]
    NumericalUnderflow { iteration: usize },
}

/// Connected components of the bipartite region-industry graph, used in the
/// disconnected-network diagnostic.
#[derive(Debug, Clone)]
pub struct ComponentList(pub Vec<(Vec<String>, Vec<String>)>);

impl fmt::Display for ComponentList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, (regions, industries)) in self.0.iter().enumerate() {
            if idx > 0 {
                write!(f, "; ")?;
            }
            write!(f, "[regions {:?} / industries {:?}]", regions, industries)?;
        }
        Ok(())
    }
}

/// Region-coupling matrix on the included (positive-diversity) regions.
///
/// Rows sum to 1 and the spectrum is real in [0, 1]; the all-ones vector is
/// the eigenvector for eigenvalue 1.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    pub year: i32,
    pub regions: Vec<String>,
    /// Row-major m x m values.
    pub values: Vec<f64>,
    /// Diversity of each included region, kept for the similarity transform.
    diversity: Vec<u32>,
}

impl CouplingMatrix {
    #[inline]
    pub fn dim(&self) -> usize {
        self.regions.len()
    }

    #[inline]
    pub fn at(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.regions.len() + q]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|p| (0..self.dim()).map(|q| self.at(p, q)).sum())
            .collect()
    }

    /// Symmetric similarity transform T = D^{1/2} M~ D^{-1/2} with D = diag(diversity).
    fn symmetrized(&self) -> DMatrix<f64> {
        let m = self.dim();
        let sqrt_d: Vec<f64> = self.diversity.iter().map(|&d| f64::from(d).sqrt()).collect();
        DMatrix::from_fn(m, m, |p, q| self.at(p, q) * sqrt_d[p] / sqrt_d[q])
    }

    /// Unit eigenvector of the symmetrized matrix for eigenvalue 1.
    fn top_symmetric_eigenvector(&self) -> DVector<f64> {
        let mut v = DVector::from_iterator(
            self.dim(),
            self.diversity.iter().map(|&d| f64::from(d).sqrt()),
        );
        let norm = v.norm();
        v /= norm;
        v
    }
}

/// Active (included) view of an advantage matrix: regions with positive
/// diversity and industries with positive ubiquity, remembering original
/// row indices.
struct ActiveView<'a> {
    m: &'a AdvantageMatrix,
    region_idx: Vec<usize>,
    industry_idx: Vec<usize>,
}

impl<'a> ActiveView<'a> {
    fn new(m: &'a AdvantageMatrix) -> Result<ActiveView<'a>, ComplexityError> {
        let region_idx: Vec<usize> = (0..m.n_regions()).filter(|&p| m.diversity[p] > 0).collect();
        let industry_idx: Vec<usize> =
            (0..m.n_industries()).filter(|&i| m.ubiquity[i] > 0).collect();
        if region_idx.is_empty() || industry_idx.is_empty() {
            return Err(ComplexityError::EmptyAfterExclusion);
        }
        Ok(ActiveView {
            m,
            region_idx,
            industry_idx,
        })
    }

    fn n_regions(&self) -> usize {
        self.region_idx.len()
    }

    fn n_industries(&self) -> usize {
        self.industry_idx.len()
    }

    #[inline]
    fn at(&self, p: usize, i: usize) -> bool {
        self.m.at(self.region_idx[p], self.industry_idx[i])
    }

    fn diversity(&self, p: usize) -> f64 {
        f64::from(self.m.diversity[self.region_idx[p]])
    }

    fn ubiquity(&self, i: usize) -> f64 {
        f64::from(self.m.ubiquity[self.industry_idx[i]])
    }

    /// Checks that the bipartite graph is connected; returns the components
    /// otherwise.
    fn require_connected(&self) -> Result<(), ComplexityError> {
        let m = self.n_regions();
        let n = self.n_industries();
        let mut seen_region = vec![false; m];
        let mut seen_industry = vec![false; n];
        let mut components = Vec::new();
        for start in 0..m {
            if seen_region[start] {
                continue;
            }
            let mut regions = Vec::new();
            let mut industries = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen_region[start] = true;
            while let Some(p) = queue.pop_front() {
                regions.push(self.m.regions[self.region_idx[p]].clone());
                for i in 0..n {
                    if self.at(p, i) && !seen_industry[i] {
                        seen_industry[i] = true;
                        industries.push(self.m.industries[self.industry_idx[i]].clone());
                        for q in 0..m {
                            if self.at(q, i) && !seen_region[q] {
                                seen_region[q] = true;
                                queue.push_back(q);
                            }
                        }
                    }
                }
            }
            components.push((regions, industries));
        }
        if components.len() > 1 {
            return Err(ComplexityError::DisconnectedNetwork {
                components: ComponentList(components),
            });
        }
        Ok(())
    }
}

/// M~_{p,p'} = (1/k_{p,0}) sum_i M_{p,i} M_{p',i} / k_{i,0} over the included
/// regions and industries. Zero-diversity regions are excluded first and
/// reported missing by the callers that map results back.
pub fn coupling_matrix(m: &AdvantageMatrix) -> Result<CouplingMatrix, ComplexityError> {
    let active = ActiveView::new(m)?;
    let rows = active.n_regions();
    let cols = active.n_industries();
    let mut values = vec![0.0; rows * rows];
    for p in 0..rows {
        for q in 0..rows {
            let mut sum = 0.0;
            for i in 0..cols {
                if active.at(p, i) && active.at(q, i) {
                    sum += 1.0 / active.ubiquity(i);
                }
            }
            values[p * rows + q] = sum / active.diversity(p);
        }
    }
    Ok(CouplingMatrix {
        year: m.year,
        regions: active
            .region_idx
            .iter()
            .map(|&p| m.regions[p].clone())
            .collect(),
        values,
        diversity: active
            .region_idx
            .iter()
            .map(|&p| m.diversity[p])
            .collect(),
    })
}

/// Full real spectrum of the coupling matrix, descending. Dense path.
pub fn coupling_spectrum(c: &CouplingMatrix) -> Vec<f64> {
    symmetric_spectrum(&c.symmetrized()).0
}

/// ECI eigenvector computation result, aligned with the advantage matrix's
/// region order; excluded (zero-diversity) regions are missing.
#[derive(Debug, Clone)]
pub struct EciResult {
    pub eci: Vec<Option<f64>>,
    /// Raw eigenvector entries before standardization.
    pub k: Vec<Option<f64>>,
    pub second_eigenvalue: f64,
}

/// ECI via the second eigenvector of the coupling matrix.
///
/// `tol` bounds the eigenvalue gap below which the spectrum is treated as
/// degenerate. Sign is fixed so the Pearson correlation between ECI and
/// diversity is nonnegative; on an exactly zero correlation the most diverse
/// region gets a nonnegative value.
pub fn eci(m: &AdvantageMatrix, tol: f64) -> Result<EciResult, ComplexityError> {
    eci_with_solver(m, tol, EigenSolver::Auto)
}

/// [`eci`] with an explicit solver choice.
pub fn eci_with_solver(
    m: &AdvantageMatrix,
    tol: f64,
    solver: EigenSolver,
) -> Result<EciResult, ComplexityError> {
    let active = ActiveView::new(m)?;
    active.require_connected()?;
    let coupling = coupling_matrix(m)?;
    let dim = coupling.dim();
    if dim < 2 {
        return Err(ComplexityError::DegenerateSpectrum {
            detail: format!("need at least 2 included regions, have {dim}"),
        });
    }
    let gap_tol = tol.max(1e-12);
    let dense = match solver {
        EigenSolver::Dense => true,
        EigenSolver::Power => false,
        EigenSolver::Auto => dim <= DENSE_DIM_LIMIT,
    };

    let t = coupling.symmetrized();
    let (lambda2, w2) = if dense {
        let (values, vectors) = symmetric_spectrum(&t);
        if dim > 2 && values[1] - values[2] < gap_tol {
            return Err(ComplexityError::DegenerateSpectrum {
                detail: format!(
                    "second eigenvalue {:.6e} within {gap_tol:.1e} of third {:.6e}",
                    values[1], values[2]
                ),
            });
        }
        (values[1], DVector::from_column_slice(vectors.column(1).as_slice()))
    } else {
        let known = vec![(1.0, coupling.top_symmetric_eigenvector())];
        let residual_tol = (tol / 100.0).clamp(1e-14, 1e-10);
        let mut pairs = deflated_power_pairs(&t, &known, 2, residual_tol);
        let third = pairs.pop().expect("requested two pairs");
        let second = pairs.pop().expect("requested two pairs");
        let (lambda2, v2, _) = second.ok_or_else(|| ComplexityError::DegenerateSpectrum {
            detail: "power iteration for the second eigenvalue stalled; \
                     eigenvalue gap below resolution"
                .to_string(),
        })?;
        if let Some((lambda3, _, _)) = third {
            if lambda2 - lambda3 < gap_tol {
                return Err(ComplexityError::DegenerateSpectrum {
                    detail: format!(
                        "second eigenvalue {lambda2:.6e} within {gap_tol:.1e} of third {lambda3:.6e}"
                    ),
                });
            }
        }
        (lambda2, v2)
    };

    // Map back from the symmetrized coordinates: K = D^{-1/2} w2.
    let k_active: Vec<f64> = (0..dim)
        .map(|p| w2[p] / active.diversity(p).sqrt())
        .collect();

    let mean = k_active.iter().sum::<f64>() / dim as f64;
    let variance = k_active.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / dim as f64;
    let std = variance.sqrt();
    if std == 0.0 {
        return Err(ComplexityError::DegenerateSpectrum {
            detail: "second eigenvector is constant; standardization undefined".to_string(),
        });
    }
    let mut eci_active: Vec<f64> = k_active.iter().map(|k| (k - mean) / std).collect();

    // Sign rule: nonnegative correlation with diversity, falling back to a
    // nonnegative value for the most diverse region on an exact tie.
    let div_active: Vec<f64> = (0..dim).map(|p| active.diversity(p)).collect();
    let corr = raw_correlation(&eci_active, &div_active);
    let flip = if corr != 0.0 {
        corr < 0.0
    } else {
        let top = (0..dim)
            .max_by(|&a, &b| div_active[a].total_cmp(&div_active[b]))
            .expect("nonempty");
        eci_active[top] < 0.0
    };
    let mut k_signed = k_active;
    if flip {
        for v in eci_active.iter_mut() {
            *v = -*v;
        }
        for v in k_signed.iter_mut() {
            *v = -*v;
        }
    }

    let mut eci_full = vec![None; m.n_regions()];
    let mut k_full = vec![None; m.n_regions()];
    for (slot, &orig) in active.region_idx.iter().enumerate() {
        eci_full[orig] = Some(eci_active[slot]);
        k_full[orig] = Some(k_signed[slot]);
    }
    Ok(EciResult {
        eci: eci_full,
        k: k_full,
        second_eigenvalue: lambda2,
    })
}

/// Unnormalized correlation (covariance) — only the sign matters for the
/// ECI sign rule. Returns 0.0 when either argument is constant.
fn raw_correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
}

/// Fitness iteration output, aligned with the advantage matrix's axes;
/// excluded regions/industries are missing.
#[derive(Debug, Clone)]
pub struct FitnessResult {
    pub fitness: Vec<Option<f64>>,
    pub q_complexity: Vec<Option<f64>>,
    pub iterations: usize,
    pub residual: f64,
}

/// Fitness/Q-complexity fixed point with unit starts.
pub fn fitness(
    m: &AdvantageMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<FitnessResult, ComplexityError> {
    fitness_with_init(m, 1.0, 1.0, tol, max_iter)
}

/// Fitness iteration from constant starts `f0`, `q0` (both must be positive).
///
/// Each step computes F~_p = sum_i M_{p,i} Q_i and Q~_i = 1 / sum_p M_{p,i}/F_p
/// from the previous normalized vectors, then renormalizes both by their
/// means. Stops when the L-infinity change of both normalized vectors drops
/// below `tol`. The mean normalization makes the fixed point independent of
/// the (constant) starting level.
pub fn fitness_with_init(
    m: &AdvantageMatrix,
    f0: f64,
    q0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FitnessResult, ComplexityError> {
    assert!(f0 > 0.0 && q0 > 0.0, "fitness starts must be positive");
    assert!(max_iter >= 1, "max_iter must be at least 1");
    let active = ActiveView::new(m)?;
    let rows = active.n_regions();
    let cols = active.n_industries();

    let mut f = vec![f0; rows];
    let mut q = vec![q0; cols];
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        let mut f_new = vec![0.0; rows];
        for p in 0..rows {
            let mut sum = 0.0;
            for i in 0..cols {
                if active.at(p, i) {
                    sum += q[i];
                }
            }
            f_new[p] = sum;
        }
        let mut q_new = vec![0.0; cols];
        for i in 0..cols {
            let mut denom = 0.0;
            for p in 0..rows {
                if active.at(p, i) {
                    denom += 1.0 / f[p];
                }
            }
            q_new[i] = 1.0 / denom;
        }
        normalize_by_mean(&mut f_new);
        normalize_by_mean(&mut q_new);
        if f_new.iter().chain(q_new.iter()).any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(ComplexityError::NumericalUnderflow { iteration });
        }
        residual = linf_change(&f, &f_new).max(linf_change(&q, &q_new));
        f = f_new;
        q = q_new;
        if residual < tol {
            let mut fitness_full = vec![None; m.n_regions()];
            let mut q_full = vec![None; m.n_industries()];
            for (slot, &orig) in active.region_idx.iter().enumerate() {
                fitness_full[orig] = Some(f[slot]);
            }
            for (slot, &orig) in active.industry_idx.iter().enumerate() {
                q_full[orig] = Some(q[slot]);
            }
            return Ok(FitnessResult {
                fitness: fitness_full,
                q_complexity: q_full,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(ComplexityError::NotConverged { max_iter, residual })
}

fn normalize_by_mean(values: &mut [f64]) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    for v in values.iter_mut() {
        *v /= mean;
    }
}

fn linf_change(old: &[f64], new: &[f64]) -> f64 {
    old.iter()
        .zip(new)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Shannon entropy (nats) of each region's firm-count shares over its
/// advantaged industries; missing when the advantaged support carries no
/// firms.
///
/// Both inputs must share label axes (the pipeline guarantees this by
/// binarizing the same pruned counts).
pub fn entropy(counts: &CountMatrix, m: &AdvantageMatrix) -> Vec<Option<f64>> {
    assert_eq!(counts.regions, m.regions, "entropy inputs must share region axes");
    assert_eq!(
        counts.industries, m.industries,
        "entropy inputs must share industry axes"
    );
    (0..m.n_regions())
        .map(|p| {
            let support: u64 = (0..m.n_industries())
                .filter(|&i| m.at(p, i))
                .map(|i| counts.at(p, i))
                .sum();
            if support == 0 {
                return None;
            }
            let total = support as f64;
            let mut h = 0.0;
            for i in 0..m.n_industries() {
                if m.at(p, i) && counts.at(p, i) > 0 {
                    let share = counts.at(p, i) as f64 / total;
                    h -= share * share.ln();
                }
            }
            Some(h.max(0.0))
        })
        .collect()
}

/// Solver parameters recorded alongside results for provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricParams {
    pub threshold: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            threshold: 1.0,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

/// All per-year metric vectors for one year, aligned with the pruned count
/// matrix's labels.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexityScores {
    pub year: i32,
    pub regions: Vec<String>,
    pub eci: Vec<Option<f64>>,
    pub k_vector: Vec<Option<f64>>,
    pub fitness: Vec<Option<f64>>,
    pub diversity: Vec<u32>,
    pub entropy: Vec<Option<f64>>,
    pub industries: Vec<String>,
    pub q_complexity: Vec<Option<f64>>,
    pub ubiquity: Vec<u32>,
    pub iterations_used: usize,
    pub second_eigenvalue: f64,
    pub params: MetricParams,
}

/// Runs ECI, fitness, and entropy on an advantage matrix and the counts it
/// was binarized from.
pub fn complexity_scores(
    counts: &CountMatrix,
    m: &AdvantageMatrix,
    params: &MetricParams,
) -> Result<ComplexityScores, ComplexityError> {
    let eci_result = eci(m, params.tol)?;
    let fit = fitness(m, params.tol, params.max_iter)?;
    let entropy = entropy(counts, m);
    Ok(ComplexityScores {
        year: m.year,
        regions: m.regions.clone(),
        eci: eci_result.eci,
        k_vector: eci_result.k,
        fitness: fit.fitness,
        diversity: m.diversity.clone(),
        entropy,
        industries: m.industries.clone(),
        q_complexity: fit.q_complexity,
        ubiquity: m.ubiquity.clone(),
        iterations_used: fit.iterations,
        second_eigenvalue: eci_result.second_eigenvalue,
        params: *params,
    })
}

impl ComplexityScores {
    /// Per-region value of a named metric, for ranking and tables.
    pub fn metric(&self, name: ScoreMetric, region_slot: usize) -> Option<f64> {
        match name {
            ScoreMetric::Eci => self.eci[region_slot],
            ScoreMetric::Fitness => self.fitness[region_slot],
            ScoreMetric::Diversity => Some(f64::from(self.diversity[region_slot])),
            ScoreMetric::Entropy => self.entropy[region_slot],
        }
    }

    /// Tidy CSV: `year,region,metric,value` with missing values as blank cells.
    pub fn write_tidy_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["year", "region", "metric", "value"])?;
        for (slot, region) in self.regions.iter().enumerate() {
            for metric in ScoreMetric::ALL {
                let value = self
                    .metric(metric, slot)
                    .map(|v| v.to_string())
                    .unwrap_or_default();
                w.write_record([&self.year.to_string(), region, metric.name(), &value])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Structured single-file format with every vector and the parameters.
    pub fn write_json<W: Write>(&self, writer: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(writer, self)
    }
}

/// The four per-region metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMetric {
    Eci,
    Fitness,
    Diversity,
    Entropy,
}

impl ScoreMetric {
    pub const ALL: [ScoreMetric; 4] = [
        ScoreMetric::Eci,
        ScoreMetric::Fitness,
        ScoreMetric::Diversity,
        ScoreMetric::Entropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScoreMetric::Eci => "eci",
            ScoreMetric::Fitness => "fitness",
            ScoreMetric::Diversity => "diversity",
            ScoreMetric::Entropy => "entropy",
        }
    }

    pub fn parse(name: &str) -> Option<ScoreMetric> {
        ScoreMetric::ALL.into_iter().find(|m| m.name() == name)
    }
}
