//! Revealed comparative advantage and the derived bipartite-structure vectors.
//!
//! RCA compares a region's local industry share against the industry's global
//! share; binarizing it at a threshold yields the advantage matrix M whose
//! row sums are region diversity and column sums industry ubiquity.

use std::fmt;

use thiserror::Error;

use crate::ingest::CountMatrix;

/// Default binarization threshold: a cell counts as an advantage at RCA >= 1.
pub const DEFAULT_RCA_THRESHOLD: f64 = 1.0;

#[derive(Debug, Error)]
pub enum AdvantageError {
    #[error("zero {axis} marginal for `{label}`; prune zero lines before computing rca")]
    ZeroMarginal { axis: &'static str, label: String },
}

/// Region x industry RCA values on the same label axes as the source counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RcaMatrix {
    pub year: i32,
    pub regions: Vec<String>,
    pub industries: Vec<String>,
    pub values: Vec<f64>,
}

impl RcaMatrix {
    #[inline]
    pub fn at(&self, region: usize, industry: usize) -> f64 {
        self.values[region * self.industries.len() + industry]
    }
}

/// Binary advantage matrix plus the structural vectors derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageMatrix {
    pub year: i32,
    pub regions: Vec<String>,
    pub industries: Vec<String>,
    /// Row-major 0/1 entries.
    pub entries: Vec<u8>,
    /// Row sums: number of advantaged industries per region.
    pub diversity: Vec<u32>,
    /// Column sums: number of advantaged regions per industry.
    pub ubiquity: Vec<u32>,
    /// Mean ubiquity over each region's advantaged industries; missing where
    /// diversity is zero.
    pub avg_ubiquity: Vec<Option<f64>>,
}

/// Fig-1B-style quadrant of a region relative to the cross-region means of
/// diversity and average ubiquity. Ties resolve to the "high" side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrant {
    pub high_diversity: bool,
    pub high_avg_ubiquity: bool,
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = if self.high_diversity { "high" } else { "low" };
        let u = if self.high_avg_ubiquity { "high" } else { "low" };
        write!(f, "{d}_diversity_{u}_ubiquity")
    }
}

impl AdvantageMatrix {
    /// Builds the matrix and all derived vectors from raw 0/1 entries.
    pub fn from_entries(
        year: i32,
        regions: Vec<String>,
        industries: Vec<String>,
        entries: Vec<u8>,
    ) -> AdvantageMatrix {
        assert_eq!(entries.len(), regions.len() * industries.len());
        debug_assert!(entries.iter().all(|&e| e <= 1));
        let n = industries.len();
        let diversity: Vec<u32> = (0..regions.len())
            .map(|p| entries[p * n..(p + 1) * n].iter().map(|&e| u32::from(e)).sum())
            .collect();
        let ubiquity: Vec<u32> = (0..n)
            .map(|i| (0..regions.len()).map(|p| u32::from(entries[p * n + i])).sum())
            .collect();
        let mut m = AdvantageMatrix {
            year,
            regions,
            industries,
            entries,
            diversity,
            ubiquity,
            avg_ubiquity: Vec::new(),
        };
        m.avg_ubiquity = avg_ubiquity(&m);
        m
    }

    #[inline]
    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    #[inline]
    pub fn n_industries(&self) -> usize {
        self.industries.len()
    }

    #[inline]
    pub fn at(&self, region: usize, industry: usize) -> bool {
        self.entries[region * self.industries.len() + industry] == 1
    }

    /// Total number of 1-entries; equals both the diversity and ubiquity sums.
    pub fn ones_count(&self) -> u64 {
        self.entries.iter().map(|&e| u64::from(e)).sum()
    }
}

/// RCA_{p,i} = (x_{p,i} / sum_i' x_{p,i'}) / (sum_p' x_{p',i} / sum_{p',i'} x_{p',i'}).
///
/// Requires strictly positive row and column sums; callers prune zero lines
/// first (see [`CountMatrix::prune_zero_lines`]).
pub fn rca(counts: &CountMatrix) -> Result<RcaMatrix, AdvantageError> {
    let row_sums = counts.row_sums();
    let col_sums = counts.col_sums();
    if let Some(p) = row_sums.iter().position(|&s| s == 0) {
        return Err(AdvantageError::ZeroMarginal {
            axis: "region",
            label: counts.regions[p].clone(),
        });
    }
    if let Some(i) = col_sums.iter().position(|&s| s == 0) {
        return Err(AdvantageError::ZeroMarginal {
            axis: "industry",
            label: counts.industries[i].clone(),
        });
    }
    let total = counts.total() as f64;
    let mut values = Vec::with_capacity(counts.counts.len());
    for p in 0..counts.n_regions() {
        let row_sum = row_sums[p] as f64;
        for i in 0..counts.n_industries() {
            let local_share = counts.at(p, i) as f64 / row_sum;
            let global_share = col_sums[i] as f64 / total;
            values.push(local_share / global_share);
        }
    }
    Ok(RcaMatrix {
        year: counts.year,
        regions: counts.regions.clone(),
        industries: counts.industries.clone(),
        values,
    })
}

/// M_{p,i} = 1 iff RCA_{p,i} >= threshold (the boundary value counts).
pub fn binarize(rca: &RcaMatrix, threshold: f64) -> AdvantageMatrix {
    assert!(
        threshold > 0.0 && threshold.is_finite(),
        "binarization threshold must be a positive finite number"
    );
    let entries: Vec<u8> = rca.values.iter().map(|&v| u8::from(v >= threshold)).collect();
    AdvantageMatrix::from_entries(
        rca.year,
        rca.regions.clone(),
        rca.industries.clone(),
        entries,
    )
}

/// k_{p,1}: mean ubiquity over the industries in which region p holds the
/// advantage; missing for zero-diversity regions.
pub fn avg_ubiquity(m: &AdvantageMatrix) -> Vec<Option<f64>> {
    (0..m.n_regions())
        .map(|p| {
            if m.diversity[p] == 0 {
                return None;
            }
            let total: u64 = (0..m.n_industries())
                .filter(|&i| m.at(p, i))
                .map(|i| u64::from(m.ubiquity[i]))
                .sum();
            Some(total as f64 / f64::from(m.diversity[p]))
        })
        .collect()
}

/// Classifies each region against the means of diversity and average
/// ubiquity, both taken over regions with a defined average ubiquity.
///
/// Regions without a defined average ubiquity (zero diversity) get no
/// quadrant; if no region has one, every label is missing.
pub fn quadrants(m: &AdvantageMatrix) -> Vec<Option<Quadrant>> {
    let defined: Vec<usize> = (0..m.n_regions())
        .filter(|&p| m.avg_ubiquity[p].is_some())
        .collect();
    if defined.is_empty() {
        return vec![None; m.n_regions()];
    }
    let mean_diversity = defined
        .iter()
        .map(|&p| f64::from(m.diversity[p]))
        .sum::<f64>()
        / defined.len() as f64;
    let mean_avg_ubiquity = defined
        .iter()
        .map(|&p| m.avg_ubiquity[p].unwrap())
        .sum::<f64>()
        / defined.len() as f64;
    (0..m.n_regions())
        .map(|p| {
            m.avg_ubiquity[p].map(|k1| Quadrant {
                high_diversity: f64::from(m.diversity[p]) >= mean_diversity,
                high_avg_ubiquity: k1 >= mean_avg_ubiquity,
            })
        })
        .collect()
}
