//! End-to-end orchestration: rank predictors, tune and evaluate the model,
//! simulate predictors forward, and emit every artifact for a run.
//!
//! Countries are processed independently (and concurrently); a failure in
//! one country is reported and never disturbs the others. All file writes
//! happen on the calling thread in a fixed order, so reruns with the same
//! config produce byte-identical outputs.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use thiserror::Error;

use crate::boosted_trees::{train, TrainParams};
use crate::chart::{line_chart, ChartSeries};
use crate::config::{PipelineConfig, Violation};
use crate::data_model::{build_matrix, load_panel, DataError, Panel};
use crate::evaluation::{default_grid, evaluate_country, temporal_split, EvalReport};
use crate::forecast::{forecast_hdi, ForecastResult};
use crate::report::{
    eval_csv, forecast_csv, manifest_json, model_json, parse_model_json, parse_ranking_csv,
    predictors_csv, ranking_csv, sha256_hex, summary_csv, Manifest, ModelDocument,
};
use crate::similarity::rank_features;

/// Pipeline stage names used in per-country failure reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Rank,
    Evaluate,
    Forecast,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Rank => "rank",
            Stage::Evaluate => "evaluate",
            Stage::Forecast => "forecast",
        })
    }
}

/// A failure confined to one country; the run continues for the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountryFailure {
    pub country: String,
    pub stage: Stage,
    pub message: String,
}

impl fmt::Display for CountryFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "country {}, stage {}: {}",
            self.country, self.stage, self.message
        )
    }
}

/// A fatal error: the run could not start (or could not write its outputs).
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config:\n{}", format_violations(.0))]
    Config(Vec<Violation>),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// What a run wrote and which countries failed along the way.
#[derive(Debug)]
pub struct RunSummary {
    /// Paths written, in write order.
    pub outputs: Vec<PathBuf>,
    /// Per-country failures, in config country order.
    pub failures: Vec<CountryFailure>,
}

/// Which artifacts an invocation produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Rankings only.
    Rank,
    /// Rankings (reused when present), eval reports, models, summary.
    Evaluate,
    /// Everything up to forecasts (reusing models/rankings when present).
    Forecast,
    /// The full fresh run, plus the manifest.
    All,
}

/// Run everything from scratch: rank, evaluate, forecast, chart, manifest.
pub fn run_pipeline(config: &PipelineConfig, base_dir: &Path) -> Result<RunSummary, PipelineError> {
    run_mode(config, base_dir, Mode::All)
}

/// Write `ranking_<country>.csv` for every configured country.
pub fn run_rank(config: &PipelineConfig, base_dir: &Path) -> Result<RunSummary, PipelineError> {
    run_mode(config, base_dir, Mode::Rank)
}

/// Tune, evaluate, and serialize the per-country models, reusing existing
/// ranking files when present; writes `eval_summary.csv`.
pub fn run_evaluate(config: &PipelineConfig, base_dir: &Path) -> Result<RunSummary, PipelineError> {
    run_mode(config, base_dir, Mode::Evaluate)
}

/// Produce forecasts and the chart, reusing existing model documents (or
/// ranking files) when present.
pub fn run_forecast(config: &PipelineConfig, base_dir: &Path) -> Result<RunSummary, PipelineError> {
    run_mode(config, base_dir, Mode::Forecast)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn run_mode(
    config: &PipelineConfig,
    base_dir: &Path,
    mode: Mode,
) -> Result<RunSummary, PipelineError> {
    config.validate().map_err(PipelineError::Config)?;
    let data_path = resolve(base_dir, &config.data_path);
    let out_dir = resolve(base_dir, &config.output_dir);
    let panel = load_panel(&data_path, &config.target_code)?;

    let range = panel.year_range();
    if !(range.contains(&config.boundary_year) && config.boundary_year < *range.end()) {
        return Err(PipelineError::Config(vec![Violation::new(
            "boundary_year",
            format!(
                "must leave at least one data year on each side of the split \
                 ({}..={} with a non-empty test window), got {}",
                range.start(),
                range.end(),
                config.boundary_year
            ),
        )]));
    }

    fs::create_dir_all(&out_dir).map_err(|source| PipelineError::Io {
        path: out_dir.clone(),
        source,
    })?;

    let grid = config.grid.clone().unwrap_or_else(default_grid);
    let outcomes: Vec<CountryOutcome> = config
        .countries
        .par_iter()
        .map(|country| country_job(&panel, config, &grid, &out_dir, country, mode))
        .collect();

    // Deterministic merge in config country order.
    let mut files: Vec<(String, String)> = Vec::new();
    let mut reports: Vec<EvalReport> = Vec::new();
    let mut charts: Vec<ChartSeries> = Vec::new();
    let mut failures: Vec<CountryFailure> = Vec::new();
    for outcome in outcomes {
        files.extend(outcome.files);
        reports.extend(outcome.report);
        charts.extend(outcome.chart);
        failures.extend(outcome.failure);
    }
    if matches!(mode, Mode::Evaluate | Mode::All) {
        files.push(("eval_summary.csv".to_string(), summary_csv(&reports)));
    }
    if matches!(mode, Mode::Forecast | Mode::All) {
        files.push((
            "forecast.svg".to_string(),
            line_chart(&charts, "HDI forecast", "year", "HDI"),
        ));
    }

    let mut outputs = Vec::with_capacity(files.len() + 1);
    let mut hashes = BTreeMap::new();
    for (name, content) in &files {
        let path = out_dir.join(name);
        fs::write(&path, content).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })?;
        hashes.insert(name.clone(), sha256_hex(content.as_bytes()));
        outputs.push(path);
    }
    if mode == Mode::All {
        let manifest = Manifest {
            config_sha256: config.sha256(),
            files: hashes,
        };
        let path = out_dir.join("manifest.json");
        fs::write(&path, manifest_json(&manifest)).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })?;
        outputs.push(path);
    }
    Ok(RunSummary { outputs, failures })
}

/// Everything one country contributes to the run. Files are (name, content)
/// pairs; the caller writes them. A failure ends the country's processing
/// but keeps whatever earlier stages produced.
struct CountryOutcome {
    files: Vec<(String, String)>,
    report: Option<EvalReport>,
    chart: Option<ChartSeries>,
    failure: Option<CountryFailure>,
}

fn country_job(
    panel: &Panel,
    config: &PipelineConfig,
    grid: &[TrainParams],
    out_dir: &Path,
    country: &str,
    mode: Mode,
) -> CountryOutcome {
    let mut out = CountryOutcome {
        files: Vec::new(),
        report: None,
        chart: None,
        failure: None,
    };
    let fail = |stage: Stage, message: String| CountryFailure {
        country: country.to_string(),
        stage,
        message,
    };

    // Stage commands reuse the previous stage's artifacts when present.
    let mut model_doc: Option<ModelDocument> = None;
    if mode == Mode::Forecast {
        let path = out_dir.join(format!("model_{country}.json"));
        if path.exists() {
            match read_artifact(&path, |t| parse_model_json(t).map_err(|e| e.to_string())) {
                Ok(doc) => model_doc = Some(doc),
                Err(message) => {
                    out.failure = Some(fail(Stage::Forecast, message));
                    return out;
                }
            }
        }
    }

    let mut selected: Option<Vec<String>> = None;
    if model_doc.is_none() && matches!(mode, Mode::Evaluate | Mode::Forecast) {
        let path = out_dir.join(format!("ranking_{country}.csv"));
        if path.exists() {
            match read_artifact(&path, |t| parse_ranking_csv(t).map_err(|e| e.to_string())) {
                Ok(codes) => selected = Some(codes),
                Err(message) => {
                    out.failure = Some(fail(Stage::Rank, message));
                    return out;
                }
            }
        }
    }
    if model_doc.is_none() && selected.is_none() {
        match rank_features(panel, country, config.epsilon, config.k) {
            Ok(ranking) => {
                out.files
                    .push((format!("ranking_{country}.csv"), ranking_csv(&ranking)));
                selected = Some(ranking.selected);
            }
            Err(e) => {
                out.failure = Some(fail(Stage::Rank, e.to_string()));
                return out;
            }
        }
    }
    if mode == Mode::Rank {
        return out;
    }

    if model_doc.is_none() {
        let features = selected.expect("ranking available when no model was reused");
        let report = match evaluate_country(
            panel,
            country,
            &features,
            config.boundary_year,
            grid,
            &config.cv,
        ) {
            Ok(r) => r,
            Err(e) => {
                out.failure = Some(fail(Stage::Evaluate, e.to_string()));
                return out;
            }
        };
        let doc = match refit_on_train_window(panel, config, country, features, report.best_params)
        {
            Ok(d) => d,
            Err(message) => {
                out.failure = Some(fail(Stage::Evaluate, message));
                return out;
            }
        };
        out.files.push((format!("eval_{country}.csv"), eval_csv(&report)));
        out.files
            .push((format!("model_{country}.json"), model_json(&doc)));
        out.report = Some(report);
        model_doc = Some(doc);
    }
    if mode == Mode::Evaluate {
        return out;
    }

    let doc = model_doc.expect("model available by construction");
    match forecast_hdi(
        &doc.model,
        panel,
        country,
        &doc.features,
        config.forecast.horizon,
        config.forecast.first_year,
    ) {
        Ok(result) => {
            out.files
                .push((format!("forecast_{country}.csv"), forecast_csv(&result)));
            out.files
                .push((format!("predictors_{country}.csv"), predictors_csv(&result)));
            out.chart = Some(history_chart(panel, country, &result));
        }
        Err(e) => {
            out.failure = Some(fail(Stage::Forecast, e.to_string()));
            return out;
        }
    }
    out
}

fn read_artifact<T>(
    path: &Path,
    parse: impl FnOnce(&str) -> Result<T, String>,
) -> Result<T, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot reuse {}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("cannot reuse {}: {e}", path.display()))
}

/// Refit the tuned parameters on the full training window; this model backs
/// both the serialized document and the forecast stage.
fn refit_on_train_window(
    panel: &Panel,
    config: &PipelineConfig,
    country: &str,
    features: Vec<String>,
    params: TrainParams,
) -> Result<ModelDocument, String> {
    let design = build_matrix(panel, country, &features, panel.year_range())
        .map_err(|e| e.to_string())?;
    let (train_years, _) =
        temporal_split(&design.years, config.boundary_year).map_err(|e| e.to_string())?;
    let train_design = design.subset_by_years(&train_years);
    let model =
        train(&train_design.x, &train_design.y, &params).map_err(|e| e.to_string())?;
    Ok(ModelDocument {
        country: country.to_string(),
        features,
        model,
    })
}

/// One polyline per country: the observed target history followed by the
/// forecast path.
fn history_chart(panel: &Panel, country: &str, result: &ForecastResult) -> ChartSeries {
    let first_forecast = result.years.first().copied().unwrap_or(i32::MAX);
    let mut points: Vec<(f64, f64)> = panel
        .target_series(country)
        .map(|s| {
            s.observed()
                .filter(|&(year, _)| year < first_forecast)
                .map(|(year, value)| (year as f64, value))
                .collect()
        })
        .unwrap_or_default();
    points.extend(
        result
            .years
            .iter()
            .zip(&result.hdi)
            .map(|(&year, &value)| (year as f64, value)),
    );
    ChartSeries {
        label: country.to_string(),
        points,
    }
}
