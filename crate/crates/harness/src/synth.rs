//! Deterministic synthetic bipartite economies.
//!
//! Stands in for the unavailable firm data: nested staircase matrices, their
//! noisy count-matrix variants, and full multi-year firm/panel fixtures. All
//! randomness comes from counter-based splitmix64 streams keyed per
//! (seed, purpose, cell), so identical specs produce identical output on any
//! platform and the generators are reproducible in other languages.

use std::collections::BTreeSet;
use std::io::Write;

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

use ecomplex_core::ingest::{province_codes, CountMatrix, FirmRecord, PanelRow, PanelTable};
use ecomplex_core::AdvantageMatrix;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("staircase for {m} regions x {n} industries has duplicate row sums {widths:?}")]
    DegenerateShape { m: usize, n: usize, widths: Vec<usize> },
    #[error("invalid synth spec: {reason}")]
    InvalidSpec { reason: String },
}

/// Specification of one noisy nested economy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub regions: usize,
    pub industries: usize,
    /// Independent cell-flip probability in [0, 1].
    pub noise: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(regions: usize, industries: usize, noise: f64, seed: u64) -> Result<SynthSpec, SynthError> {
        if regions < 2 || industries < 2 {
            return Err(SynthError::InvalidSpec {
                reason: format!("need at least 2x2, got {regions}x{industries}"),
            });
        }
        if !(0.0..=1.0).contains(&noise) {
            return Err(SynthError::InvalidSpec {
                reason: format!("noise {noise} outside [0, 1]"),
            });
        }
        Ok(SynthSpec {
            regions,
            industries,
            noise,
            seed,
        })
    }
}

/// splitmix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Counter-based stream: a 64-bit value fixed by (seed, tag, a, b, c).
fn stream(seed: u64, tag: u64, a: u64, b: u64, c: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag ^ splitmix64(a ^ splitmix64(b ^ splitmix64(c)))))
}

/// Uniform draw in [0, 1) from the top 53 bits of a stream value.
fn unit(x: u64) -> f64 {
    (x >> 11) as f64 / (1u64 << 53) as f64
}

mod tags {
    pub const FLIP: u64 = 0;
    pub const COUNT: u64 = 1;
    pub const BIRTH: u64 = 2;
    pub const DEATH: u64 = 3;
    pub const GDP: u64 = 4;
    pub const POPULATION: u64 = 5;
    pub const URBANIZATION: u64 = 6;
    pub const SCHOOLING: u64 = 7;
    pub const INNOVATION: u64 = 8;
    pub const TRADE: u64 = 9;
    pub const RICU: u64 = 10;
    pub const RICR: u64 = 11;
    pub const GDP_MISSING: u64 = 12;
}

fn region_label(p: usize) -> String {
    format!("R{p:03}")
}

fn industry_label(i: usize) -> String {
    format!("I{i:03}")
}

/// Staircase row widths: region p (0-indexed) covers the first
/// round(n * (m - p) / m) industries, rounding half up in exact integer
/// arithmetic.
fn staircase_widths(m: usize, n: usize) -> Vec<usize> {
    (0..m)
        .map(|p| {
            let num = 2 * n as u64 * (m - p) as u64 + m as u64;
            (num / (2 * m as u64)) as usize
        })
        .collect()
}

/// Strict nested staircase advantage matrix, most diverse region first.
pub fn gen_nested(m: usize, n: usize) -> Result<AdvantageMatrix, SynthError> {
    assert!(m >= 2 && n >= 2, "staircase needs at least 2x2");
    let widths = staircase_widths(m, n);
    let strict = widths.windows(2).all(|w| w[0] > w[1]) && *widths.last().unwrap() > 0;
    if !strict {
        return Err(SynthError::DegenerateShape { m, n, widths });
    }
    let mut entries = vec![0u8; m * n];
    for (p, &w) in widths.iter().enumerate() {
        for i in 0..w {
            entries[p * n + i] = 1;
        }
    }
    Ok(AdvantageMatrix::from_entries(
        0,
        (0..m).map(region_label).collect(),
        (0..n).map(industry_label).collect(),
        entries,
    ))
}

/// Attempt cap per line before the deterministic fallback kicks in.
const REGEN_CAP: u32 = 64;

/// Noisy nested count matrix.
///
/// Each staircase cell's presence is flipped independently with probability
/// `noise` (flip iff the cell's [0,1) draw is below `noise`); present cells
/// get counts uniform in {1..5}. A line that comes out all-zero is
/// regenerated by bumping its attempt counter, which shifts every cell of the
/// line onto a fresh stream; after [`REGEN_CAP`] attempts the first staircase
/// cell of the line is forced to count 1 (only reachable at noise close to 1).
pub fn gen_noisy_nested(spec: &SynthSpec) -> CountMatrix {
    let (m, n) = (spec.regions, spec.industries);
    let widths = staircase_widths(m, n);
    let mut row_attempt = vec![0u32; m];
    let mut col_attempt = vec![0u32; n];
    let mut forced: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut counts = vec![0u64; m * n];

    // Bounded: each pass either bumps an attempt counter (at most
    // (m + n) * REGEN_CAP times) or forces a cell (at most m + n times).
    loop {
        for p in 0..m {
            for i in 0..n {
                let attempt = u64::from(row_attempt[p]) + u64::from(col_attempt[i]);
                let on_staircase = i < widths[p];
                let flip = unit(stream(spec.seed, tags::FLIP, p as u64, i as u64, attempt)) < spec.noise;
                let present = on_staircase != flip;
                counts[p * n + i] = if present {
                    1 + stream(spec.seed, tags::COUNT, p as u64, i as u64, attempt) % 5
                } else {
                    0
                };
            }
        }
        for &(p, i) in &forced {
            counts[p * n + i] = 1;
        }
        let zero_row = (0..m).find(|&p| counts[p * n..(p + 1) * n].iter().all(|&c| c == 0));
        if let Some(p) = zero_row {
            if row_attempt[p] < REGEN_CAP {
                row_attempt[p] += 1;
            } else {
                forced.insert((p, 0));
            }
            continue;
        }
        let zero_col = (0..n).find(|&i| (0..m).all(|p| counts[p * n + i] == 0));
        if let Some(i) = zero_col {
            if col_attempt[i] < REGEN_CAP {
                col_attempt[i] += 1;
            } else {
                forced.insert((0, i));
            }
            continue;
        }
        break;
    }

    CountMatrix {
        year: 0,
        regions: (0..m).map(region_label).collect(),
        industries: (0..n).map(industry_label).collect(),
        counts,
    }
}

/// Specification of a multi-year firm/panel fixture pair.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FixtureSpec {
    pub regions: usize,
    pub industries: usize,
    pub noise: f64,
    pub seed: u64,
    pub year_from: i32,
    pub year_to: i32,
    /// Year carrying the relative-income columns (blank elsewhere).
    pub inequality_year: i32,
}

/// Yearly birth probability per (region, industry) cell.
const BIRTH_RATE: f64 = 0.08;
/// Yearly delisting probability per firm.
const DEATH_RATE: f64 = 0.03;
/// Probability that a panel gdp cell is left blank.
const GDP_MISSING_RATE: f64 = 0.02;

impl FixtureSpec {
    fn validate(&self) -> Result<(), SynthError> {
        SynthSpec::new(self.regions, self.industries, self.noise, self.seed)?;
        if self.regions > province_codes().len() {
            return Err(SynthError::InvalidSpec {
                reason: format!(
                    "firm fixtures use province codes; at most {} regions",
                    province_codes().len()
                ),
            });
        }
        if self.year_from > self.year_to {
            return Err(SynthError::InvalidSpec {
                reason: format!("empty year range {}..{}", self.year_from, self.year_to),
            });
        }
        Ok(())
    }

    /// Region codes used by this fixture: the first `regions` province codes,
    /// sorted so staircase row p is the p-th code lexicographically.
    pub fn region_codes(&self) -> Vec<String> {
        let mut codes: Vec<String> = province_codes()
            .into_iter()
            .take(self.regions)
            .map(str::to_string)
            .collect();
        codes.sort();
        codes
    }

    /// Structural score per region: standardized staircase width.
    fn structure_scores(&self) -> Vec<f64> {
        let widths = staircase_widths(self.regions, self.industries);
        let m = widths.len() as f64;
        let mean = widths.iter().map(|&w| w as f64).sum::<f64>() / m;
        let var = widths.iter().map(|&w| (w as f64 - mean).powi(2)).sum::<f64>() / m;
        let std = var.sqrt().max(1e-12);
        widths.iter().map(|&w| (w as f64 - mean) / std).collect()
    }
}

/// Deterministic multi-year firm registry.
///
/// Year `year_from` starts from a noisy nested count matrix; each later year
/// adds births per cell with probability [`BIRTH_RATE`] and delists firms
/// listed in earlier years with probability [`DEATH_RATE`]. Firm ids are
/// sequential in generation order.
pub fn gen_firm_records(spec: &FixtureSpec) -> Result<Vec<FirmRecord>, SynthError> {
    spec.validate()?;
    let codes = spec.region_codes();
    let base = gen_noisy_nested(&SynthSpec::new(spec.regions, spec.industries, spec.noise, spec.seed)?);
    let n = spec.industries;
    let date = |year: i32| NaiveDate::from_ymd_opt(year, 1, 1).expect("valid date");

    let mut records: Vec<FirmRecord> = Vec::new();
    let mut next_id = 0usize;
    let mut push = |records: &mut Vec<FirmRecord>, p: usize, i: usize, year: i32| {
        records.push(FirmRecord {
            firm_id: format!("F{:05}", next_id),
            region: codes[p].clone(),
            industry: industry_label(i),
            list_date: date(year),
            delist_date: None,
        });
        next_id += 1;
    };

    for p in 0..spec.regions {
        for i in 0..n {
            for _ in 0..base.at(p, i) {
                push(&mut records, p, i, spec.year_from);
            }
        }
    }
    for year in spec.year_from + 1..=spec.year_to {
        // Deaths first, applied to firms listed in earlier years.
        for f in 0..records.len() {
            let rec = &records[f];
            if rec.delist_date.is_some() || rec.list_date.year() >= year {
                continue;
            }
            if unit(stream(spec.seed, tags::DEATH, year as u64, f as u64, 0)) < DEATH_RATE {
                records[f].delist_date = Some(date(year));
            }
        }
        for p in 0..spec.regions {
            for i in 0..n {
                let cell = (p * n + i) as u64;
                if unit(stream(spec.seed, tags::BIRTH, year as u64, cell, 0)) < BIRTH_RATE {
                    push(&mut records, p, i, year);
                }
            }
        }
    }
    Ok(records)
}

/// Deterministic macro panel consistent with the firm fixture's structure:
/// development indicators load positively on the staircase score, incomes
/// appear only in the inequality year, and a small share of gdp cells is
/// blanked to exercise missing-value handling.
pub fn gen_panel_table(spec: &FixtureSpec) -> Result<PanelTable, SynthError> {
    spec.validate()?;
    let codes = spec.region_codes();
    let z = spec.structure_scores();
    let mut table = PanelTable::default();
    for (p, code) in codes.iter().enumerate() {
        for year in spec.year_from..=spec.year_to {
            let t = (year - spec.year_from) as f64;
            let e = |tag: u64| unit(stream(spec.seed, tag, p as u64, year as u64, 0)) - 0.5;
            let gdp_missing =
                unit(stream(spec.seed, tags::GDP_MISSING, p as u64, year as u64, 0)) < GDP_MISSING_RATE;
            let gdp_pc = (9.0 + 0.35 * z[p] + 0.03 * t + 0.25 * e(tags::GDP)).exp();
            let row = PanelRow {
                gdp_pc: (!gdp_missing).then_some(gdp_pc),
                population: Some((8.0 + 0.3 * z[p] + 0.8 * e(tags::POPULATION)).exp()),
                urbanization: Some((0.5 + 0.13 * z[p] + 0.1 * e(tags::URBANIZATION)).clamp(0.05, 0.95)),
                schooling: Some((0.2 + 0.06 * z[p] + 0.04 * e(tags::SCHOOLING)).clamp(0.01, 0.9)),
                innovation: Some((7.0 + 0.8 * z[p] + 0.1 * t + 0.5 * e(tags::INNOVATION)).exp().round().max(1.0)),
                trade: Some((10.0 + 0.9 * z[p] + 0.05 * t + 0.6 * e(tags::TRADE)).exp()),
                ricu: (year == spec.inequality_year)
                    .then(|| 1.3 + 0.25 * z[p] + 0.12 * e(tags::RICU)),
                ricr: (year == spec.inequality_year)
                    .then(|| 0.65 + 0.18 * z[p] + 0.08 * e(tags::RICR)),
            };
            table.insert(code.clone(), year, row);
        }
    }
    Ok(table)
}

/// Writes firm records in the documented firms CSV format.
pub fn write_firms_csv<W: Write>(records: &[FirmRecord], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["firm_id", "region", "industry", "list_date", "delist_date"])?;
    for r in records {
        w.write_record([
            r.firm_id.as_str(),
            r.region.as_str(),
            r.industry.as_str(),
            &r.list_date.format("%Y-%m-%d").to_string(),
            &r.delist_date
                .map(|d| d.format("%Y-%m-%d").to_string())
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a panel table in the documented panel CSV format.
pub fn write_panel_csv<W: Write>(table: &PanelTable, writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "region",
        "year",
        "gdp_pc",
        "population",
        "urbanization",
        "schooling",
        "innovation",
        "trade",
        "ricu",
        "ricr",
    ])?;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for ((region, year), row) in table.iter() {
        w.write_record([
            region.as_str(),
            &year.to_string(),
            &cell(row.gdp_pc),
            &cell(row.population),
            &cell(row.urbanization),
            &cell(row.schooling),
            &cell(row.innovation),
            &cell(row.trade),
            &cell(row.ricu),
            &cell(row.ricr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ecomplex_core::ingest::is_active;

    #[test]
    fn nested_3x3_is_the_canonical_staircase() {
        let m = gen_nested(3, 3).unwrap();
        assert_eq!(m.entries, vec![1, 1, 1, 1, 1, 0, 1, 0, 0]);
        assert_eq!(m.diversity, vec![3, 2, 1]);
    }

    #[test]
    fn nested_2x4() {
        let m = gen_nested(2, 4).unwrap();
        assert_eq!(m.entries, vec![1, 1, 1, 1, 1, 1, 0, 0]);
    }

    #[test]
    fn nested_degenerate_shapes_are_rejected() {
        for (m, n) in [(3usize, 2usize), (5, 2), (7, 3)] {
            assert!(
                matches!(gen_nested(m, n), Err(SynthError::DegenerateShape { .. })),
                "{m}x{n} should be degenerate"
            );
        }
    }

    #[test]
    fn nested_staircase_monotonicity() {
        for (m, n) in [(3, 3), (10, 15), (30, 50), (4, 9)] {
            let mat = gen_nested(m, n).unwrap();
            assert!(mat.diversity.windows(2).all(|w| w[0] > w[1]));
            // Ubiquity of the transpose is the diversity vector read back.
            assert!(mat.ubiquity.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(mat.ubiquity[0] as usize, m);
        }
    }

    #[test]
    fn noisy_nested_zero_noise_matches_staircase_support() {
        let spec = SynthSpec::new(5, 8, 0.0, 99).unwrap();
        let counts = gen_noisy_nested(&spec);
        let staircase = gen_nested(5, 8).unwrap();
        for p in 0..5 {
            for i in 0..8 {
                assert_eq!(counts.at(p, i) > 0, staircase.at(p, i), "cell ({p},{i})");
                if counts.at(p, i) > 0 {
                    assert!((1..=5).contains(&counts.at(p, i)));
                }
            }
        }
    }

    #[test]
    fn noisy_nested_is_deterministic() {
        let spec = SynthSpec::new(12, 20, 0.15, 4242).unwrap();
        assert_eq!(gen_noisy_nested(&spec), gen_noisy_nested(&spec));
    }

    #[test]
    fn noisy_nested_has_no_zero_lines() {
        for seed in 0..30 {
            let spec = SynthSpec::new(9, 13, 0.25, seed).unwrap();
            let counts = gen_noisy_nested(&spec);
            assert!(counts.row_sums().iter().all(|&s| s > 0), "seed {seed}");
            assert!(counts.col_sums().iter().all(|&s| s > 0), "seed {seed}");
        }
    }

    #[test]
    fn noisy_nested_survives_full_noise() {
        // noise = 1 inverts the staircase; full rows can never come back and
        // end up forced. The result must still have no zero lines.
        let spec = SynthSpec::new(4, 6, 1.0, 7).unwrap();
        let counts = gen_noisy_nested(&spec);
        assert!(counts.row_sums().iter().all(|&s| s > 0));
        assert!(counts.col_sums().iter().all(|&s| s > 0));
    }

    #[test]
    fn spec_validation() {
        assert!(SynthSpec::new(1, 5, 0.1, 0).is_err());
        assert!(SynthSpec::new(5, 5, 1.5, 0).is_err());
        assert!(SynthSpec::new(5, 5, 0.0, 0).is_ok());
    }

    fn demo_fixture() -> FixtureSpec {
        FixtureSpec {
            regions: 10,
            industries: 14,
            noise: 0.1,
            seed: 7,
            year_from: 2008,
            year_to: 2012,
            inequality_year: 2010,
        }
    }

    #[test]
    fn firm_fixture_first_year_matches_base_matrix() {
        let spec = demo_fixture();
        let records = gen_firm_records(&spec).unwrap();
        let base = gen_noisy_nested(&SynthSpec::new(10, 14, 0.1, 7).unwrap());
        let codes = spec.region_codes();
        let built = ecomplex_core::build_count_matrix(&records, spec.year_from).unwrap();
        assert_eq!(built.regions, codes);
        for p in 0..10 {
            for i in 0..14 {
                assert_eq!(built.at(p, i), base.at(p, i), "cell ({p},{i})");
            }
        }
    }

    #[test]
    fn firm_fixture_delistings_follow_the_activity_rule() {
        let spec = demo_fixture();
        let records = gen_firm_records(&spec).unwrap();
        let delisted: Vec<&FirmRecord> =
            records.iter().filter(|r| r.delist_date.is_some()).collect();
        assert!(!delisted.is_empty(), "expect some churn");
        for r in &delisted {
            assert!(r.delist_date.unwrap() > r.list_date);
            assert!(!is_active(r, r.delist_date.unwrap().year()));
            assert!(is_active(r, r.delist_date.unwrap().year() - 1));
        }
    }

    #[test]
    fn panel_fixture_layout() {
        let spec = demo_fixture();
        let table = gen_panel_table(&spec).unwrap();
        assert_eq!(table.len(), 10 * 5);
        let mut ricu_years = BTreeSet::new();
        for ((_, year), row) in table.iter() {
            if row.ricu.is_some() {
                ricu_years.insert(*year);
            }
            if let Some(u) = row.urbanization {
                assert!((0.0..=1.0).contains(&u));
            }
            if let Some(r) = row.ricr {
                assert!(r > 0.0);
            }
        }
        assert_eq!(ricu_years.into_iter().collect::<Vec<_>>(), vec![2010]);
    }

    #[test]
    fn fixture_csv_round_trip() {
        let spec = demo_fixture();
        let records = gen_firm_records(&spec).unwrap();
        let mut firms_buf = Vec::new();
        write_firms_csv(&records, &mut firms_buf).unwrap();
        let tmp = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(tmp.path(), &firms_buf).unwrap();
        let parsed = ecomplex_core::parse_firm_records(tmp.path()).unwrap();
        assert_eq!(parsed.records.len(), records.len());
        assert_eq!(parsed.records[0], records[0]);
        assert!(parsed.blank_field_rows.is_empty());

        let table = gen_panel_table(&spec).unwrap();
        let mut panel_buf = Vec::new();
        write_panel_csv(&table, &mut panel_buf).unwrap();
        std::fs::write(tmp.path(), &panel_buf).unwrap();
        let parsed = ecomplex_core::parse_panel(tmp.path()).unwrap();
        assert_eq!(parsed.len(), table.len());
        let a = parsed.get("FJ", 2010);
        let b = table.get("FJ", 2010);
        assert_eq!(a, b);
    }
}
