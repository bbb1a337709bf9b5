//! Output artifacts: CSV and JSON emitters, content hashing, and the run
//! manifest.
//!
//! Every emitter is a pure function from typed results to a `String`, so
//! artifact bytes depend only on the computed values. Floating-point
//! numbers in CSVs are printed with six significant digits in a fixed
//! format; JSON documents rely on serde_json's exact float round-tripping.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::boosted_trees::BoostedModel;
use crate::data_model::csv_field;
use crate::evaluation::EvalReport;
use crate::forecast::ForecastResult;
use crate::similarity::FeatureRanking;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed ranking file: {0}")]
    MalformedRanking(String),
    #[error("malformed model file: {0}")]
    MalformedModel(String),
}

/// Format with six significant digits, trimming trailing zeros. Values with
/// a decimal exponent outside [-4, 5] switch to scientific notation, like
/// printf's %g.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("{:e} always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    debug_assert_eq!(digits.len(), 6);

    let body = if (-4..=5).contains(&exp) {
        if exp >= 0 {
            let split = exp as usize + 1;
            let int_part = &digits[..split];
            let frac = digits[split..].trim_end_matches('0');
            if frac.is_empty() {
                int_part.to_string()
            } else {
                format!("{int_part}.{frac}")
            }
        } else {
            let frac = digits.trim_end_matches('0');
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), frac)
        }
    } else {
        let head = &digits[..1];
        let rest = digits[1..].trim_end_matches('0');
        if rest.is_empty() {
            format!("{head}e{exp}")
        } else {
            format!("{head}.{rest}e{exp}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// `rank,indicator,edr_distance,selected` — all scored candidates in rank
/// order, with the selection flag marking the first k.
pub fn ranking_csv(ranking: &FeatureRanking) -> String {
    let mut out = String::from("rank,indicator,edr_distance,selected\n");
    for (i, entry) in ranking.entries.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            csv_field(&entry.indicator),
            entry.edr_distance,
            i < ranking.k
        ));
    }
    out
}

/// Read back the selected indicator codes from a ranking CSV, in rank order.
pub fn parse_ranking_csv(text: &str) -> Result<Vec<String>, ReportError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ReportError::MalformedRanking(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["rank", "indicator", "edr_distance", "selected"] {
        return Err(ReportError::MalformedRanking(format!(
            "unexpected header {headers:?}"
        )));
    }
    let mut selected = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ReportError::MalformedRanking(e.to_string()))?;
        if record.len() != 4 {
            return Err(ReportError::MalformedRanking(format!(
                "expected 4 fields, got {}",
                record.len()
            )));
        }
        match record[3].trim() {
            "true" => selected.push(record[1].trim().to_string()),
            "false" => {}
            other => {
                return Err(ReportError::MalformedRanking(format!(
                    "bad selected flag {other:?}"
                )))
            }
        }
    }
    Ok(selected)
}

/// `year,actual,predicted` for every design year of one country.
pub fn eval_csv(report: &EvalReport) -> String {
    let mut out = String::from("year,actual,predicted\n");
    for o in &report.per_year {
        out.push_str(&format!(
            "{},{},{}\n",
            o.year,
            fmt_sig(o.actual),
            fmt_sig(o.predicted)
        ));
    }
    out
}

/// `country,in_sample_mape,out_of_sample_mape,best_params_json` across all
/// evaluated countries. Hyperparameters are embedded as one quoted JSON
/// object per row.
pub fn summary_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("country,in_sample_mape,out_of_sample_mape,best_params_json\n");
    for r in reports {
        let params_json =
            serde_json::to_string(&r.best_params).expect("params serialize infallibly");
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&r.country),
            fmt_sig(r.in_sample_mape),
            fmt_sig(r.out_of_sample_mape),
            csv_field(&params_json)
        ));
    }
    out
}

/// `year,hdi` — the forecast trajectory of one country.
pub fn forecast_csv(result: &ForecastResult) -> String {
    let mut out = String::from("year,hdi\n");
    for (year, hdi) in result.years.iter().zip(&result.hdi) {
        out.push_str(&format!("{},{}\n", year, fmt_sig(*hdi)));
    }
    out
}

/// `year,indicator,value` — simulated predictor paths, year-major and
/// sorted by indicator code within each year.
pub fn predictors_csv(result: &ForecastResult) -> String {
    let mut out = String::from("year,indicator,value\n");
    for (i, year) in result.years.iter().enumerate() {
        for (code, path) in &result.predictor_paths {
            out.push_str(&format!("{},{},{}\n", year, csv_field(code), fmt_sig(path[i])));
        }
    }
    out
}

/// The trained-model artifact tying the ensemble to its feature order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub country: String,
    /// Predictor codes in design-matrix column order.
    pub features: Vec<String>,
    pub model: BoostedModel,
}

pub fn model_json(doc: &ModelDocument) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("model serializes infallibly");
    out.push('\n');
    out
}

pub fn parse_model_json(text: &str) -> Result<ModelDocument, ReportError> {
    serde_json::from_str(text).map_err(|e| ReportError::MalformedModel(e.to_string()))
}

/// Run manifest: the configuration hash plus the SHA-256 of every artifact,
/// keyed by file name (sorted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub files: BTreeMap<String, String>,
}

pub fn manifest_json(manifest: &Manifest) -> String {
    let mut out = serde_json::to_string_pretty(manifest).expect("manifest serializes infallibly");
    out.push('\n');
    out
}
