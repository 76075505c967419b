//! Firm-record and macro-panel ingestion.
//!
//! Parses the two documented CSV inputs (firm registrations and the
//! region-year macro panel), resolves which firms are active in a given
//! calendar year, and builds the yearly region x industry count matrices
//! everything downstream works from.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

/// Required header of the firms CSV, in documented order.
pub const FIRMS_HEADER: [&str; 5] = ["firm_id", "region", "industry", "list_date", "delist_date"];

/// Required header of the panel CSV, in documented order.
pub const PANEL_HEADER: [&str; 10] = [
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
];

/// Panel columns that are fractions and must lie in [0, 1].
const FRACTION_COLUMNS: [&str; 2] = ["urbanization", "schooling"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed csv: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: String, column: String },
    #[error("{path}: row {row}, column `{column}`: malformed date `{value}`")]
    MalformedDate {
        path: String,
        row: u64,
        column: String,
        value: String,
    },
    #[error("{path}: row {row}: firm `{firm_id}` delists {delist} on or before its listing {list}")]
    DateOrderViolation {
        path: String,
        row: u64,
        firm_id: String,
        list: NaiveDate,
        delist: NaiveDate,
    },
    #[error("{path}: row {row}: duplicate firm id `{firm_id}`")]
    DuplicateFirmId {
        path: String,
        row: u64,
        firm_id: String,
    },
    #[error("no firm is active in year {year}")]
    EmptyYear { year: i32 },
    #[error("{path}: row {row}: duplicate key ({region}, {year})")]
    DuplicateKey {
        path: String,
        row: u64,
        region: String,
        year: i32,
    },
    #[error("{path}: row {row}, column `{column}`: cell `{value}` is not a finite number")]
    NonNumericCell {
        path: String,
        row: u64,
        column: String,
        value: String,
    },
    #[error("{path}: row {row}, column `{column}`: fraction `{value}` outside [0, 1]")]
    InvalidFraction {
        path: String,
        row: u64,
        column: String,
        value: String,
    },
    #[error("{path}: duplicate label `{label}`")]
    DuplicateLabel { path: String, label: String },
    #[error("{path}: matrix has no strictly positive entry")]
    AllZeroMatrix { path: String },
}

/// One listing spell of a publicly listed firm.
///
/// `firm_id` is treated as unique per listing spell; a duplicate id in the
/// input is an error rather than a relisting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirmRecord {
    pub firm_id: String,
    pub region: String,
    pub industry: String,
    pub list_date: NaiveDate,
    pub delist_date: Option<NaiveDate>,
}

/// Result of parsing a firms CSV.
///
/// Rows with a blank region or industry cannot be attributed to a matrix
/// cell; they are dropped and counted here rather than silently ignored.
#[derive(Debug, Clone)]
pub struct FirmFile {
    pub records: Vec<FirmRecord>,
    /// 1-based data row numbers that were rejected for a blank region/industry.
    pub blank_field_rows: Vec<u64>,
}

/// Yearly region x industry firm-count matrix, row-major.
///
/// Labels are unique and sorted lexicographically so downstream matrices are
/// reproducible bit-exact regardless of input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    pub year: i32,
    pub regions: Vec<String>,
    pub industries: Vec<String>,
    pub counts: Vec<u64>,
}

/// Labels removed by [`CountMatrix::prune_zero_lines`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PruneReport {
    pub removed_regions: Vec<String>,
    pub removed_industries: Vec<String>,
}

impl PruneReport {
    pub fn is_empty(&self) -> bool {
        self.removed_regions.is_empty() && self.removed_industries.is_empty()
    }
}

impl CountMatrix {
    #[inline]
    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    #[inline]
    pub fn n_industries(&self) -> usize {
        self.industries.len()
    }

    #[inline]
    pub fn at(&self, region: usize, industry: usize) -> u64 {
        self.counts[region * self.industries.len() + industry]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.n_regions())
            .map(|p| (0..self.n_industries()).map(|i| self.at(p, i)).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.n_industries())
            .map(|i| (0..self.n_regions()).map(|p| self.at(p, i)).sum())
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Drops all-zero rows and all-zero columns in one pass.
    ///
    /// Removing a zero line never changes the other axis' marginals, so a
    /// single pass leaves every remaining row and column sum strictly
    /// positive. Removed labels are reported and logged.
    pub fn prune_zero_lines(&self) -> (CountMatrix, PruneReport) {
        let row_sums = self.row_sums();
        let col_sums = self.col_sums();
        let keep_rows: Vec<usize> = (0..self.n_regions()).filter(|&p| row_sums[p] > 0).collect();
        let keep_cols: Vec<usize> = (0..self.n_industries()).filter(|&i| col_sums[i] > 0).collect();

        let report = PruneReport {
            removed_regions: (0..self.n_regions())
                .filter(|&p| row_sums[p] == 0)
                .map(|p| self.regions[p].clone())
                .collect(),
            removed_industries: (0..self.n_industries())
                .filter(|&i| col_sums[i] == 0)
                .map(|i| self.industries[i].clone())
                .collect(),
        };
        if !report.is_empty() {
            log::info!(
                "year {}: pruned zero regions {:?} and zero industries {:?}",
                self.year,
                report.removed_regions,
                report.removed_industries
            );
        }

        let mut counts = Vec::with_capacity(keep_rows.len() * keep_cols.len());
        for &p in &keep_rows {
            for &i in &keep_cols {
                counts.push(self.at(p, i));
            }
        }
        let pruned = CountMatrix {
            year: self.year,
            regions: keep_rows.iter().map(|&p| self.regions[p].clone()).collect(),
            industries: keep_cols.iter().map(|&i| self.industries[i].clone()).collect(),
            counts,
        };
        (pruned, report)
    }

    /// Writes the documented matrix CSV: header `region,<industry...>`, one
    /// row per region.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["region".to_string()];
        header.extend(self.industries.iter().cloned());
        w.write_record(&header)?;
        for (p, region) in self.regions.iter().enumerate() {
            let mut rec = vec![region.clone()];
            rec.extend((0..self.n_industries()).map(|i| self.at(p, i).to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the matrix CSV written by [`CountMatrix::write_csv`].
    ///
    /// The year is not part of the file format and must be supplied.
    pub fn read_csv<R: Read>(reader: R, year: i32, path: &str) -> Result<CountMatrix, IngestError> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(|source| IngestError::Csv {
            path: path.to_string(),
            source,
        })?;
        if header.get(0) != Some("region") {
            return Err(IngestError::MissingColumn {
                path: path.to_string(),
                column: "region".to_string(),
            });
        }
        let industries: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut seen = BTreeSet::new();
        for ind in &industries {
            if !seen.insert(ind.clone()) {
                return Err(IngestError::DuplicateLabel {
                    path: path.to_string(),
                    label: ind.clone(),
                });
            }
        }
        let mut regions = Vec::new();
        let mut counts = Vec::new();
        let mut seen_regions = BTreeSet::new();
        for (idx, record) in r.records().enumerate() {
            let row = idx as u64 + 1;
            let record = record.map_err(|source| IngestError::Csv {
                path: path.to_string(),
                source,
            })?;
            let region = record.get(0).unwrap_or("").to_string();
            if !seen_regions.insert(region.clone()) {
                return Err(IngestError::DuplicateLabel {
                    path: path.to_string(),
                    label: region,
                });
            }
            for (i, industry) in industries.iter().enumerate() {
                let cell = record.get(i + 1).unwrap_or("");
                let value: u64 = cell.parse().map_err(|_| IngestError::NonNumericCell {
                    path: path.to_string(),
                    row,
                    column: industry.clone(),
                    value: cell.to_string(),
                })?;
                counts.push(value);
            }
            regions.push(region);
        }
        let matrix = CountMatrix {
            year,
            regions,
            industries,
            counts,
        };
        if matrix.total() == 0 {
            return Err(IngestError::AllZeroMatrix {
                path: path.to_string(),
            });
        }
        Ok(matrix)
    }
}

/// One region-year row of the macro panel; every indicator may be missing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PanelRow {
    pub gdp_pc: Option<f64>,
    pub population: Option<f64>,
    pub urbanization: Option<f64>,
    pub schooling: Option<f64>,
    pub innovation: Option<f64>,
    pub trade: Option<f64>,
    pub ricu: Option<f64>,
    pub ricr: Option<f64>,
}

impl PanelRow {
    /// Looks an indicator up by its panel column name.
    pub fn value(&self, column: &str) -> Option<f64> {
        match column {
            "gdp_pc" => self.gdp_pc,
            "population" => self.population,
            "urbanization" => self.urbanization,
            "schooling" => self.schooling,
            "innovation" => self.innovation,
            "trade" => self.trade,
            "ricu" => self.ricu,
            "ricr" => self.ricr,
            _ => None,
        }
    }
}

/// Region-year macro indicators keyed by `(region, year)`.
#[derive(Debug, Clone, Default)]
pub struct PanelTable {
    rows: BTreeMap<(String, i32), PanelRow>,
}

impl PanelTable {
    pub fn get(&self, region: &str, year: i32) -> Option<&PanelRow> {
        self.rows.get(&(region.to_string(), year))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, i32), &PanelRow)> {
        self.rows.iter()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, region: String, year: i32, row: PanelRow) -> bool {
        self.rows.insert((region, year), row).is_none()
    }
}

/// Parses the firms CSV.
///
/// Rows with a blank region or industry are counted and skipped (see
/// [`FirmFile::blank_field_rows`]); all other malformations are hard errors
/// identifying the offending row and column.
pub fn parse_firm_records(path: &Path) -> Result<FirmFile, IngestError> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: display.clone(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);

    let headers = reader.headers().map_err(|source| IngestError::Csv {
        path: display.clone(),
        source,
    })?;
    let mut col = HashMap::new();
    for (i, name) in headers.iter().enumerate() {
        col.entry(name.to_string()).or_insert(i);
    }
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(FIRMS_HEADER) {
        *slot = *col.get(name).ok_or_else(|| IngestError::MissingColumn {
            path: display.clone(),
            column: name.to_string(),
        })?;
    }

    let mut records = Vec::new();
    let mut blank_field_rows = Vec::new();
    let mut seen_ids: HashMap<String, u64> = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i as u64 + 1;
        let record = record.map_err(|source| IngestError::Csv {
            path: display.clone(),
            source,
        })?;
        let field = |j: usize| record.get(idx[j]).unwrap_or("").to_string();
        let firm_id = field(0);
        let region = field(1);
        let industry = field(2);
        if region.is_empty() || industry.is_empty() {
            blank_field_rows.push(row);
            continue;
        }
        let list_date = parse_date(&field(3), &display, row, "list_date")?;
        let delist_raw = field(4);
        let delist_date = if delist_raw.is_empty() {
            None
        } else {
            Some(parse_date(&delist_raw, &display, row, "delist_date")?)
        };
        if let Some(delist) = delist_date {
            if delist <= list_date {
                return Err(IngestError::DateOrderViolation {
                    path: display,
                    row,
                    firm_id,
                    list: list_date,
                    delist,
                });
            }
        }
        if let Some(&first) = seen_ids.get(&firm_id) {
            log::debug!("firm id `{firm_id}` first seen at row {first}");
            return Err(IngestError::DuplicateFirmId {
                path: display,
                row,
                firm_id,
            });
        }
        seen_ids.insert(firm_id.clone(), row);
        records.push(FirmRecord {
            firm_id,
            region,
            industry,
            list_date,
            delist_date,
        });
    }
    if !blank_field_rows.is_empty() {
        log::warn!(
            "{display}: rejected {} row(s) with blank region/industry",
            blank_field_rows.len()
        );
    }
    Ok(FirmFile {
        records,
        blank_field_rows,
    })
}

fn parse_date(value: &str, path: &str, row: u64, column: &str) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d").map_err(|_| IngestError::MalformedDate {
        path: path.to_string(),
        row,
        column: column.to_string(),
        value: value.to_string(),
    })
}

/// Activity rule: a firm counts in year `t` iff it listed in or before `t`
/// and has not yet delisted at the start of `t` (the delist year itself is
/// excluded).
pub fn is_active(record: &FirmRecord, year: i32) -> bool {
    record.list_date.year() <= year
        && record.delist_date.map_or(true, |delist| delist.year() > year)
}

/// Counts active firms per (region, industry) cell for one year.
///
/// Region and industry labels are the sorted distinct labels of the active
/// records, so the result does not depend on input order.
pub fn build_count_matrix(records: &[FirmRecord], year: i32) -> Result<CountMatrix, IngestError> {
    let active: Vec<&FirmRecord> = records.iter().filter(|r| is_active(r, year)).collect();
    if active.is_empty() {
        return Err(IngestError::EmptyYear { year });
    }
    let regions: Vec<String> = active
        .iter()
        .map(|r| r.region.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let industries: Vec<String> = active
        .iter()
        .map(|r| r.industry.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let region_index: HashMap<&str, usize> = regions
        .iter()
        .enumerate()
        .map(|(i, r)| (r.as_str(), i))
        .collect();
    let industry_index: HashMap<&str, usize> = industries
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut counts = vec![0u64; regions.len() * industries.len()];
    for record in &active {
        let p = region_index[record.region.as_str()];
        let i = industry_index[record.industry.as_str()];
        counts[p * industries.len() + i] += 1;
    }
    Ok(CountMatrix {
        year,
        regions,
        industries,
        counts,
    })
}

/// Parses the panel CSV. Blank cells become missing values, never zero.
pub fn parse_panel(path: &Path) -> Result<PanelTable, IngestError> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: display.clone(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);

    let headers = reader.headers().map_err(|source| IngestError::Csv {
        path: display.clone(),
        source,
    })?;
    let mut col = HashMap::new();
    for (i, name) in headers.iter().enumerate() {
        col.entry(name.to_string()).or_insert(i);
    }
    let mut idx = [0usize; 10];
    for (slot, name) in idx.iter_mut().zip(PANEL_HEADER) {
        *slot = *col.get(name).ok_or_else(|| IngestError::MissingColumn {
            path: display.clone(),
            column: name.to_string(),
        })?;
    }

    let mut table = PanelTable::default();
    for (i, record) in reader.records().enumerate() {
        let row = i as u64 + 1;
        let record = record.map_err(|source| IngestError::Csv {
            path: display.clone(),
            source,
        })?;
        let field = |j: usize| record.get(idx[j]).unwrap_or("");
        let region = field(0).to_string();
        let year_raw = field(1);
        let year: i32 = year_raw.parse().map_err(|_| IngestError::NonNumericCell {
            path: display.clone(),
            row,
            column: "year".to_string(),
            value: year_raw.to_string(),
        })?;
        let mut values = [None; 8];
        for (j, slot) in values.iter_mut().enumerate() {
            let column = PANEL_HEADER[j + 2];
            let raw = field(j + 2);
            if raw.is_empty() {
                continue;
            }
            let value: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| IngestError::NonNumericCell {
                    path: display.clone(),
                    row,
                    column: column.to_string(),
                    value: raw.to_string(),
                })?;
            if FRACTION_COLUMNS.contains(&column) && !(0.0..=1.0).contains(&value) {
                return Err(IngestError::InvalidFraction {
                    path: display.clone(),
                    row,
                    column: column.to_string(),
                    value: raw.to_string(),
                });
            }
            *slot = Some(value);
        }
        let panel_row = PanelRow {
            gdp_pc: values[0],
            population: values[1],
            urbanization: values[2],
            schooling: values[3],
            innovation: values[4],
            trade: values[5],
            ricu: values[6],
            ricr: values[7],
        };
        if !table.insert(region.clone(), year, panel_row) {
            return Err(IngestError::DuplicateKey {
                path: display,
                row,
                region,
                year,
            });
        }
    }
    Ok(table)
}

static PROVINCES: OnceLock<Vec<(String, String)>> = OnceLock::new();

fn provinces() -> &'static [(String, String)] {
    PROVINCES.get_or_init(|| {
        include_str!("../data/provinces.csv")
            .lines()
            .skip(1)
            .filter(|l| !l.is_empty())
            .map(|line| {
                let mut parts = line.splitn(3, ',');
                let _id = parts.next();
                let code = parts.next().unwrap_or("").to_string();
                let name = parts.next().unwrap_or("").to_string();
                (code, name)
            })
            .collect()
    })
}

/// Full province name for a two-letter code from the bundled reference table.
pub fn province_name(code: &str) -> Option<&'static str> {
    provinces()
        .iter()
        .find(|(c, _)| c == code)
        .map(|(_, n)| n.as_str())
}

/// The two-letter province codes from the bundled reference table, in table order.
pub fn province_codes() -> Vec<&'static str> {
    provinces().iter().map(|(c, _)| c.as_str()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn firm(id: &str, region: &str, industry: &str, list: &str, delist: Option<&str>) -> FirmRecord {
        FirmRecord {
            firm_id: id.to_string(),
            region: region.to_string(),
            industry: industry.to_string(),
            list_date: date(list),
            delist_date: delist.map(date),
        }
    }

    #[test]
    fn parses_row_without_delist_date() {
        let f = write_temp("firm_id,region,industry,list_date,delist_date\nF001,SH,C38,1994-03-01,\n");
        let out = parse_firm_records(f.path()).unwrap();
        assert_eq!(out.records.len(), 1);
        let rec = &out.records[0];
        assert_eq!(rec.firm_id, "F001");
        assert_eq!(rec.region, "SH");
        assert_eq!(rec.industry, "C38");
        assert_eq!(rec.list_date, date("1994-03-01"));
        assert_eq!(rec.delist_date, None);
        assert!(out.blank_field_rows.is_empty());
    }

    #[test]
    fn rejects_delist_before_list() {
        let f = write_temp("firm_id,region,industry,list_date,delist_date\nF001,SH,C38,2001-01-01,1994-03-01\n");
        match parse_firm_records(f.path()) {
            Err(IngestError::DateOrderViolation { row, firm_id, .. }) => {
                assert_eq!(row, 1);
                assert_eq!(firm_id, "F001");
            }
            other => panic!("expected DateOrderViolation, got {other:?}"),
        }
    }

    #[test]
    fn header_only_file_gives_empty_list() {
        let f = write_temp("firm_id,region,industry,list_date,delist_date\n");
        let out = parse_firm_records(f.path()).unwrap();
        assert!(out.records.is_empty());
    }

    #[test]
    fn missing_column_is_reported() {
        let f = write_temp("firm_id,region,list_date,delist_date\nF001,SH,1994-03-01,\n");
        match parse_firm_records(f.path()) {
            Err(IngestError::MissingColumn { column, .. }) => assert_eq!(column, "industry"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn malformed_date_identifies_row_and_column() {
        let f = write_temp(
            "firm_id,region,industry,list_date,delist_date\nF001,SH,C38,1994-03-01,\nF002,BJ,C39,1994-13-01,\n",
        );
        match parse_firm_records(f.path()) {
            Err(IngestError::MalformedDate { row, column, value, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "list_date");
                assert_eq!(value, "1994-13-01");
            }
            other => panic!("expected MalformedDate, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_firm_id_is_an_error() {
        let f = write_temp(
            "firm_id,region,industry,list_date,delist_date\nF001,SH,C38,1994-03-01,\nF001,BJ,C39,1995-03-01,\n",
        );
        assert!(matches!(
            parse_firm_records(f.path()),
            Err(IngestError::DuplicateFirmId { row: 2, .. })
        ));
    }

    #[test]
    fn blank_region_or_industry_is_counted_not_dropped_silently() {
        let f = write_temp(
            "firm_id,region,industry,list_date,delist_date\nF001,,C38,1994-03-01,\nF002,BJ,,1994-03-01,\nF003,BJ,C39,1994-03-01,\n",
        );
        let out = parse_firm_records(f.path()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.blank_field_rows, vec![1, 2]);
    }

    #[test]
    fn activity_window() {
        let r = firm("F1", "SH", "C38", "1995-06-01", Some("2003-06-01"));
        assert!(is_active(&r, 2000));
        assert!(!is_active(&r, 2003));
        assert!(is_active(&r, 1995));
        assert!(!is_active(&r, 1994));
        let unlisted_yet = firm("F2", "SH", "C38", "2005-01-01", None);
        assert!(!is_active(&unlisted_yet, 2000));
        assert!(is_active(&unlisted_yet, 2005));
    }

    #[test]
    fn count_matrix_counts_active_firms() {
        let records = vec![
            firm("F1", "P1", "I1", "1990-01-01", None),
            firm("F2", "P1", "I1", "1990-01-01", None),
            firm("F3", "P2", "I2", "1990-01-01", None),
        ];
        let m = build_count_matrix(&records, 2000).unwrap();
        assert_eq!(m.regions, vec!["P1", "P2"]);
        assert_eq!(m.industries, vec!["I1", "I2"]);
        assert_eq!(m.counts, vec![2, 0, 0, 1]);
        assert_eq!(m.total(), 3);
    }

    #[test]
    fn count_matrix_empty_year() {
        let records = vec![firm("F1", "P1", "I1", "2005-01-01", None)];
        assert!(matches!(
            build_count_matrix(&records, 2000),
            Err(IngestError::EmptyYear { year: 2000 })
        ));
    }

    #[test]
    fn count_matrix_single_firm() {
        let records = vec![firm("F1", "P1", "I1", "1990-01-01", None)];
        let m = build_count_matrix(&records, 1990).unwrap();
        assert_eq!(m.counts, vec![1]);
    }

    #[test]
    fn count_matrix_is_permutation_invariant() {
        let mut records = vec![
            firm("F1", "P2", "I1", "1990-01-01", None),
            firm("F2", "P1", "I2", "1991-01-01", None),
            firm("F3", "P1", "I1", "1992-01-01", None),
            firm("F4", "P3", "I3", "1993-01-01", Some("2010-01-01")),
        ];
        let base = build_count_matrix(&records, 2000).unwrap();
        records.reverse();
        assert_eq!(build_count_matrix(&records, 2000).unwrap(), base);
        records.swap(0, 2);
        assert_eq!(build_count_matrix(&records, 2000).unwrap(), base);
    }

    #[test]
    fn count_matrix_sum_matches_active_firms() {
        let records = vec![
            firm("F1", "P1", "I1", "1990-01-01", Some("1999-01-01")),
            firm("F2", "P1", "I2", "1990-01-01", None),
            firm("F3", "P2", "I1", "2001-01-01", None),
        ];
        let active = records.iter().filter(|r| is_active(r, 2000)).count();
        let m = build_count_matrix(&records, 2000).unwrap();
        assert_eq!(m.total(), active as u64);
    }

    #[test]
    fn prune_removes_zero_lines() {
        let m = CountMatrix {
            year: 2000,
            regions: vec!["A".into(), "B".into(), "C".into()],
            industries: vec!["X".into(), "Y".into(), "Z".into()],
            counts: vec![1, 0, 2, 0, 0, 0, 3, 0, 1],
        };
        let (pruned, report) = m.prune_zero_lines();
        assert_eq!(report.removed_regions, vec!["B"]);
        assert_eq!(report.removed_industries, vec!["Y"]);
        assert_eq!(pruned.regions, vec!["A", "C"]);
        assert_eq!(pruned.industries, vec!["X", "Z"]);
        assert_eq!(pruned.counts, vec![1, 2, 3, 1]);
    }

    #[test]
    fn count_matrix_csv_round_trip() {
        let m = CountMatrix {
            year: 2010,
            regions: vec!["BJ".into(), "SH".into()],
            industries: vec!["C38".into(), "C39".into(), "J66".into()],
            counts: vec![4, 0, 1, 2, 7, 0],
        };
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = CountMatrix::read_csv(buf.as_slice(), 2010, "mem").unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn panel_parses_and_blanks_are_missing() {
        let f = write_temp(
            "region,year,gdp_pc,population,urbanization,schooling,innovation,trade,ricu,ricr\n\
             SH,2010,76074,23.03,0.89,0.3,12000,2.1e11,1.8,0.9\n\
             BJ,2010,,19.6,0.86,0.35,15000,1.9e11,,\n",
        );
        let t = parse_panel(f.path()).unwrap();
        assert_eq!(t.len(), 2);
        let sh = t.get("SH", 2010).unwrap();
        assert_eq!(sh.gdp_pc, Some(76074.0));
        assert_eq!(sh.urbanization, Some(0.89));
        let bj = t.get("BJ", 2010).unwrap();
        assert_eq!(bj.gdp_pc, None);
        assert_eq!(bj.ricu, None);
        assert_eq!(bj.population, Some(19.6));
    }

    #[test]
    fn panel_duplicate_key() {
        let f = write_temp(
            "region,year,gdp_pc,population,urbanization,schooling,innovation,trade,ricu,ricr\n\
             SH,2010,1,,,,,,,\nSH,2010,2,,,,,,,\n",
        );
        assert!(matches!(
            parse_panel(f.path()),
            Err(IngestError::DuplicateKey { row: 2, .. })
        ));
    }

    #[test]
    fn panel_non_numeric_cell() {
        let f = write_temp(
            "region,year,gdp_pc,population,urbanization,schooling,innovation,trade,ricu,ricr\n\
             SH,2010,abc,,,,,,,\n",
        );
        match parse_panel(f.path()) {
            Err(IngestError::NonNumericCell { row, column, value, .. }) => {
                assert_eq!((row, column.as_str(), value.as_str()), (1, "gdp_pc", "abc"));
            }
            other => panic!("expected NonNumericCell, got {other:?}"),
        }
    }

    #[test]
    fn panel_fraction_out_of_range() {
        let f = write_temp(
            "region,year,gdp_pc,population,urbanization,schooling,innovation,trade,ricu,ricr\n\
             SH,2010,,,1.2,,,,,\n",
        );
        assert!(matches!(
            parse_panel(f.path()),
            Err(IngestError::InvalidFraction { .. })
        ));
    }

    #[test]
    fn province_reference_table() {
        assert_eq!(province_name("SH"), Some("Shanghai"));
        assert_eq!(province_name("NM"), Some("Inner Mongolia"));
        assert_eq!(province_name("ZZ"), None);
        assert_eq!(province_codes().len(), 31);
        assert_eq!(province_codes()[0], "BJ");
    }
}
