//! Panel ingestion, HDI composition, normalization, and design matrices.
//!
//! Input data is long-format CSV with header `country,indicator,year,value`;
//! an empty `value` field marks a missing observation. Each
//! `(country, indicator)` pair becomes an [`AnnualSeries`] spanning the years
//! it was observed, with interior gaps kept as explicit missing entries.
//! Nothing is imputed at load time.

use std::collections::BTreeMap;
use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("duplicate cell ({country}, {indicator}, {year})")]
    DuplicateCell {
        country: String,
        indicator: String,
        year: i32,
    },
    #[error("country {0} has no series for target indicator")]
    MissingTarget(String),
    #[error("panel contains no data rows")]
    EmptyPanel,
    #[error("series must cover at least one year")]
    EmptySeries,
    #[error("series values must be finite")]
    NonFiniteValue,
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("goalposts invalid: {0}")]
    BadGoalposts(String),
    #[error("need at least 2 observed values to normalize, got {0}")]
    TooShort(usize),
    #[error("unknown country {0}")]
    UnknownCountry(String),
    #[error("unknown indicator {0} for country {1}")]
    UnknownIndicator(String, String),
    #[error("year range {start}..={end} is empty or outside the panel span")]
    InvalidYearRange { start: i32, end: i32 },
    #[error("no year in range has an observed target value")]
    EmptyDesign,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A sequence indexed by consecutive calendar years. `None` marks a missing
/// value inside the span; years outside the span are simply not represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSeries {
    start_year: i32,
    values: Vec<Option<f64>>,
}

impl AnnualSeries {
    /// Build a series starting at `start_year`. Fails on an empty vector or
    /// any non-finite value.
    pub fn new(start_year: i32, values: Vec<Option<f64>>) -> Result<Self, DataError> {
        if values.is_empty() {
            return Err(DataError::EmptySeries);
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(DataError::NonFiniteValue);
        }
        Ok(Self { start_year, values })
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    /// Number of years in the span, including missing entries.
    pub fn n_years(&self) -> usize {
        self.values.len()
    }

    /// Number of observed (non-missing) values.
    pub fn n_observed(&self) -> usize {
        self.values.iter().flatten().count()
    }

    /// Value observed in `year`, or `None` when missing or out of span.
    pub fn get(&self, year: i32) -> Option<f64> {
        if year < self.start_year || year > self.end_year() {
            return None;
        }
        self.values[(year - self.start_year) as usize]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start_year..=self.end_year()
    }

    /// `(year, value)` pairs for observed entries, in year order.
    pub fn observed(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        let start = self.start_year;
        self.values
            .iter()
            .enumerate()
            .filter_map(move |(i, v)| v.map(|v| (start + i as i32, v)))
    }
}

/// Country x indicator panel of annual series.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    countries: Vec<String>,
    indicators: Vec<String>,
    cells: BTreeMap<String, BTreeMap<String, AnnualSeries>>,
    target_code: String,
    start_year: i32,
    end_year: i32,
}

impl Panel {
    /// Assemble a panel from per-country series maps. Every country must
    /// carry a series for `target_code`.
    pub fn from_cells(
        cells: BTreeMap<String, BTreeMap<String, AnnualSeries>>,
        target_code: &str,
    ) -> Result<Self, DataError> {
        if cells.is_empty() {
            return Err(DataError::EmptyPanel);
        }
        let mut start_year = i32::MAX;
        let mut end_year = i32::MIN;
        let mut indicators: Vec<String> = Vec::new();
        for (country, series_map) in &cells {
            if !series_map.contains_key(target_code) {
                return Err(DataError::MissingTarget(country.clone()));
            }
            for (code, series) in series_map {
                start_year = start_year.min(series.start_year());
                end_year = end_year.max(series.end_year());
                if let Err(pos) = indicators.binary_search(code) {
                    indicators.insert(pos, code.clone());
                }
            }
        }
        let countries = cells.keys().cloned().collect();
        Ok(Self {
            countries,
            indicators,
            cells,
            target_code: target_code.to_string(),
            start_year,
            end_year,
        })
    }

    /// Parse a long-format CSV document (`country,indicator,year,value`).
    pub fn from_csv_str(text: &str, target_code: &str) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| csv_error(&e, 1))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect::<Vec<_>>();
        if headers != ["country", "indicator", "year", "value"] {
            return Err(DataError::MalformedRow {
                line: 1,
                reason: format!("expected header country,indicator,year,value, got {headers:?}"),
            });
        }

        // (country, indicator) -> year -> observed value or missing marker.
        let mut raw: BTreeMap<(String, String), BTreeMap<i32, Option<f64>>> = BTreeMap::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(&e, 0))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 4 {
                return Err(DataError::MalformedRow {
                    line,
                    reason: format!("expected 4 fields, got {}", record.len()),
                });
            }
            let country = record[0].trim().to_string();
            let indicator = record[1].trim().to_string();
            if country.is_empty() || indicator.is_empty() {
                return Err(DataError::MalformedRow {
                    line,
                    reason: "country and indicator must be non-empty".into(),
                });
            }
            let year: i32 = record[2].trim().parse().map_err(|e| DataError::MalformedRow {
                line,
                reason: format!("bad year {:?}: {e}", &record[2]),
            })?;
            let raw_value = record[3].trim();
            let value = if raw_value.is_empty() {
                None
            } else {
                let v: f64 = raw_value.parse().map_err(|e| DataError::MalformedRow {
                    line,
                    reason: format!("bad value {raw_value:?}: {e}"),
                })?;
                if !v.is_finite() {
                    return Err(DataError::MalformedRow {
                        line,
                        reason: format!("value {raw_value:?} is not finite"),
                    });
                }
                Some(v)
            };
            let cell = raw.entry((country.clone(), indicator.clone())).or_default();
            if cell.insert(year, value).is_some() {
                return Err(DataError::DuplicateCell {
                    country,
                    indicator,
                    year,
                });
            }
        }

        let mut cells: BTreeMap<String, BTreeMap<String, AnnualSeries>> = BTreeMap::new();
        for ((country, indicator), by_year) in raw {
            // Span each series over the years it was reported; interior gaps
            // become explicit missing entries.
            let min_year = *by_year.keys().next().expect("non-empty cell");
            let max_year = *by_year.keys().next_back().expect("non-empty cell");
            let values = (min_year..=max_year)
                .map(|y| by_year.get(&y).copied().flatten())
                .collect();
            let series = AnnualSeries::new(min_year, values)?;
            cells.entry(country).or_default().insert(indicator, series);
        }
        Self::from_cells(cells, target_code)
    }

    /// Serialize back to the long CSV format, one row per in-span year of
    /// every series, sorted by `(country, indicator, year)`. Values print in
    /// shortest round-trip form, so `from_csv_str` reproduces the panel
    /// exactly.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("country,indicator,year,value\n");
        for (country, series_map) in &self.cells {
            for (indicator, series) in series_map {
                for year in series.years() {
                    out.push_str(&csv_field(country));
                    out.push(',');
                    out.push_str(&csv_field(indicator));
                    out.push(',');
                    out.push_str(&year.to_string());
                    out.push(',');
                    if let Some(v) = series.get(year) {
                        out.push_str(&format!("{v}"));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    /// All indicator codes present anywhere in the panel, sorted.
    pub fn indicators(&self) -> &[String] {
        &self.indicators
    }

    pub fn target_code(&self) -> &str {
        &self.target_code
    }

    /// Smallest and largest year covered by any series.
    pub fn year_range(&self) -> RangeInclusive<i32> {
        self.start_year..=self.end_year
    }

    pub fn series(&self, country: &str, indicator: &str) -> Option<&AnnualSeries> {
        self.cells.get(country)?.get(indicator)
    }

    pub fn target_series(&self, country: &str) -> Option<&AnnualSeries> {
        self.series(country, &self.target_code)
    }

    /// Indicator codes available for one country, sorted.
    pub fn country_indicators(&self, country: &str) -> Vec<&str> {
        self.cells
            .get(country)
            .map(|m| m.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }
}

fn csv_error(e: &csv::Error, fallback_line: u64) -> DataError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    DataError::MalformedRow {
        line,
        reason: e.to_string(),
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Read a panel CSV from disk.
pub fn load_panel(path: &Path, target_code: &str) -> Result<Panel, DataError> {
    let text = fs::read_to_string(path)?;
    Panel::from_csv_str(&text, target_code)
}

/// Goalposts used to turn raw component indicators into dimension indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HdiGoalposts {
    pub life_min: f64,
    pub life_max: f64,
    pub eys_max: f64,
    pub mys_max: f64,
    pub gni_min: f64,
    pub gni_max: f64,
}

impl Default for HdiGoalposts {
    fn default() -> Self {
        Self {
            life_min: 20.0,
            life_max: 85.0,
            eys_max: 18.0,
            mys_max: 15.0,
            gni_min: 100.0,
            gni_max: 75_000.0,
        }
    }
}

impl HdiGoalposts {
    pub fn validate(&self) -> Result<(), DataError> {
        let all = [
            ("life_min", self.life_min),
            ("life_max", self.life_max),
            ("eys_max", self.eys_max),
            ("mys_max", self.mys_max),
            ("gni_min", self.gni_min),
            ("gni_max", self.gni_max),
        ];
        for (name, v) in all {
            if !v.is_finite() || v <= 0.0 {
                return Err(DataError::BadGoalposts(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.life_max <= self.life_min {
            return Err(DataError::BadGoalposts(
                "life_max must exceed life_min".into(),
            ));
        }
        if self.gni_max <= self.gni_min {
            return Err(DataError::BadGoalposts("gni_max must exceed gni_min".into()));
        }
        Ok(())
    }
}

/// Compose an HDI value from raw components: the geometric mean of the
/// health, education, and income dimension indices, each clamped to [0, 1].
///
/// health = (life - life_min) / (life_max - life_min);
/// education = (mys/mys_max + eys/eys_max) / 2;
/// income = (ln gni - ln gni_min) / (ln gni_max - ln gni_min).
pub fn hdi_compose(
    life_expectancy: f64,
    mean_schooling: f64,
    expected_schooling: f64,
    gni_per_capita: f64,
    goalposts: &HdiGoalposts,
) -> Result<f64, DataError> {
    goalposts.validate()?;
    let inputs = [
        ("life_expectancy", life_expectancy),
        ("mean_schooling", mean_schooling),
        ("expected_schooling", expected_schooling),
        ("gni_per_capita", gni_per_capita),
    ];
    for (name, v) in inputs {
        if !v.is_finite() || v <= 0.0 {
            return Err(DataError::NonPositiveInput { name, value: v });
        }
    }
    let unit = |x: f64| x.clamp(0.0, 1.0);
    let health = unit((life_expectancy - goalposts.life_min) / (goalposts.life_max - goalposts.life_min));
    let education = (unit(mean_schooling / goalposts.mys_max) + unit(expected_schooling / goalposts.eys_max)) / 2.0;
    let income = unit(
        (gni_per_capita.ln() - goalposts.gni_min.ln()) / (goalposts.gni_max.ln() - goalposts.gni_min.ln()),
    );
    Ok((health * education * income).cbrt())
}

/// Z-score a slice using the sample standard deviation (n - 1 denominator).
/// A constant slice maps to all zeros.
pub(crate) fn zscore_slice(values: &[f64]) -> Result<Vec<f64>, DataError> {
    let n = values.len();
    if n < 2 {
        return Err(DataError::TooShort(n));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    if sd == 0.0 {
        return Ok(vec![0.0; n]);
    }
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}

/// Z-score the observed values of a series in place of their originals;
/// missing entries stay missing. Statistics use only observed values, with
/// the sample (n - 1) standard deviation. A constant series maps to zeros.
pub fn zscore_normalize(series: &AnnualSeries) -> Result<AnnualSeries, DataError> {
    let observed: Vec<f64> = series.values().iter().flatten().copied().collect();
    let normalized = zscore_slice(&observed)?;
    let mut iter = normalized.into_iter();
    let values = series
        .values()
        .iter()
        .map(|v| v.map(|_| iter.next().expect("one normalized value per observation")))
        .collect();
    AnnualSeries::new(series.start_year(), values)
}

/// Design matrix for one country: rows are the years inside the requested
/// range where the target is observed, ascending. Missing predictor values
/// are encoded as NaN; the target column has no missing entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub years: Vec<i32>,
}

impl Design {
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    /// Rows whose year is in `years` (which must be a subset of `self.years`).
    pub fn subset_by_years(&self, years: &[i32]) -> Design {
        let mut x = Vec::with_capacity(years.len());
        let mut y = Vec::with_capacity(years.len());
        let mut kept = Vec::with_capacity(years.len());
        for (i, yr) in self.years.iter().enumerate() {
            if years.contains(yr) {
                x.push(self.x[i].clone());
                y.push(self.y[i]);
                kept.push(*yr);
            }
        }
        Design { x, y, years: kept }
    }
}

/// Assemble the design matrix for `country` over `years`, using `features`
/// as predictor columns (in the given order) and the panel target as `y`.
pub fn build_matrix(
    panel: &Panel,
    country: &str,
    features: &[String],
    years: RangeInclusive<i32>,
) -> Result<Design, DataError> {
    let (start, end) = (*years.start(), *years.end());
    let range = panel.year_range();
    if start > end || start < *range.start() || end > *range.end() {
        return Err(DataError::InvalidYearRange { start, end });
    }
    if panel.series(country, panel.target_code()).is_none() {
        if !panel.countries().contains(&country.to_string()) {
            return Err(DataError::UnknownCountry(country.to_string()));
        }
        return Err(DataError::MissingTarget(country.to_string()));
    }
    let mut columns = Vec::with_capacity(features.len());
    for code in features {
        let series = panel
            .series(country, code)
            .ok_or_else(|| DataError::UnknownIndicator(code.clone(), country.to_string()))?;
        columns.push(series);
    }
    let target = panel.target_series(country).expect("target checked above");

    let mut design = Design {
        x: Vec::new(),
        y: Vec::new(),
        years: Vec::new(),
    };
    for year in start..=end {
        let Some(t) = target.get(year) else { continue };
        let row = columns
            .iter()
            .map(|s| s.get(year).unwrap_or(f64::NAN))
            .collect();
        design.x.push(row);
        design.y.push(t);
        design.years.push(year);
    }
    if design.y.is_empty() {
        return Err(DataError::EmptyDesign);
    }
    Ok(design)
}
