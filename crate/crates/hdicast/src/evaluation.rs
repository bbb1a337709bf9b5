//! Validation machinery: MAPE, temporal train/test splits, expanding-window
//! cross-validation, and exhaustive hyperparameter grid search.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boosted_trees::{train, BoostError, TrainParams};
use crate::data_model::{build_matrix, DataError, Design, Panel};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("actual and forecast lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("actual value at position {0} is zero; MAPE is undefined")]
    ZeroActual(usize),
    #[error("boundary year {0} leaves an empty train or test side")]
    DegenerateSplit(i32),
    #[error("min_train must be at least 1")]
    ZeroMinTrain,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("need at least {needed} years for one fold, got {got}")]
    InsufficientYears { needed: usize, got: usize },
    #[error("validation years must all come after every training year")]
    LeakyFold,
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("no predictor features were provided")]
    NoFeatures,
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Mean absolute percentage error, in percent:
/// (100 / n) * sum of |(actual - forecast) / actual|.
pub fn mape(actual: &[f64], forecast: &[f64]) -> Result<f64, EvalError> {
    if actual.len() != forecast.len() {
        return Err(EvalError::LengthMismatch(actual.len(), forecast.len()));
    }
    if actual.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut sum = 0.0;
    for (i, (&a, &f)) in actual.iter().zip(forecast).enumerate() {
        if a == 0.0 {
            return Err(EvalError::ZeroActual(i));
        }
        sum += ((a - f) / a).abs();
    }
    Ok(100.0 * sum / actual.len() as f64)
}

/// Split an ascending year list at a boundary: years <= `boundary_year`
/// train, later years test. Both sides must be non-empty.
pub fn temporal_split(years: &[i32], boundary_year: i32) -> Result<(Vec<i32>, Vec<i32>), EvalError> {
    let train: Vec<i32> = years.iter().copied().filter(|&y| y <= boundary_year).collect();
    let test: Vec<i32> = years.iter().copied().filter(|&y| y > boundary_year).collect();
    if train.is_empty() || test.is_empty() {
        return Err(EvalError::DegenerateSplit(boundary_year));
    }
    Ok((train, test))
}

/// One cross-validation fold. Construction enforces the temporal ordering:
/// every validation year must come after every training year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fold {
    train_years: Vec<i32>,
    valid_years: Vec<i32>,
}

impl Fold {
    pub fn new(train_years: Vec<i32>, valid_years: Vec<i32>) -> Result<Self, EvalError> {
        if train_years.is_empty() || valid_years.is_empty() {
            return Err(EvalError::Empty);
        }
        let last_train = train_years.iter().max().expect("non-empty");
        let first_valid = valid_years.iter().min().expect("non-empty");
        if last_train >= first_valid {
            return Err(EvalError::LeakyFold);
        }
        Ok(Self {
            train_years,
            valid_years,
        })
    }

    pub fn train_years(&self) -> &[i32] {
        &self.train_years
    }

    pub fn valid_years(&self) -> &[i32] {
        &self.valid_years
    }
}

/// Expanding-window (rolling-origin) folds over an ascending year list.
/// Fold i trains on the first `min_train + i` years and validates on the
/// next `horizon` years, yielding `n - min_train - horizon + 1` folds.
pub fn expanding_cv_folds(
    years: &[i32],
    min_train: usize,
    horizon: usize,
) -> Result<Vec<Fold>, EvalError> {
    if min_train == 0 {
        return Err(EvalError::ZeroMinTrain);
    }
    if horizon == 0 {
        return Err(EvalError::ZeroHorizon);
    }
    let n = years.len();
    if n < min_train + horizon {
        return Err(EvalError::InsufficientYears {
            needed: min_train + horizon,
            got: n,
        });
    }
    let mut folds = Vec::with_capacity(n - min_train - horizon + 1);
    for train_len in min_train..=(n - horizon) {
        folds.push(Fold::new(
            years[..train_len].to_vec(),
            years[train_len..train_len + horizon].to_vec(),
        )?);
    }
    Ok(folds)
}

/// Cross-validation shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvConfig {
    #[serde(default = "default_min_train")]
    pub min_train: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

fn default_min_train() -> usize {
    10
}

fn default_horizon() -> usize {
    1
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            min_train: default_min_train(),
            horizon: default_horizon(),
        }
    }
}

/// The default search grid: learning rate x depth x L2 x leaf cost x
/// rounds, 162 combinations, iterated in that nesting order.
pub fn default_grid() -> Vec<TrainParams> {
    let mut grid = Vec::with_capacity(162);
    for eta in [0.05, 0.1, 0.3] {
        for max_depth in [1usize, 2, 3] {
            for lambda in [0.0, 1.0, 10.0] {
                for gamma in [0.0, 0.1] {
                    for n_rounds in [50usize, 100, 200] {
                        grid.push(TrainParams {
                            n_rounds,
                            eta,
                            max_depth,
                            lambda,
                            gamma,
                            min_child_weight: 1.0,
                        });
                    }
                }
            }
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best: TrainParams,
    /// Index of `best` within the input grid.
    pub best_index: usize,
    /// Mean cross-validated MAPE for every grid point, in grid order.
    pub table: Vec<(TrainParams, f64)>,
    /// Total number of model trainings performed (grid points x folds).
    pub n_trainings: usize,
}

/// Exhaustive grid search: every grid point is scored by its mean MAPE over
/// the expanding-window folds of `design`; the lowest mean wins, with ties
/// resolved to the earliest grid entry. Grid points are evaluated
/// concurrently; results are merged in grid order, so the outcome does not
/// depend on scheduling.
pub fn grid_search(
    design: &Design,
    grid: &[TrainParams],
    cv: &CvConfig,
) -> Result<GridSearchResult, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let folds = expanding_cv_folds(&design.years, cv.min_train, cv.horizon)?;
    // The fold designs are shared by every grid point; cut them once.
    let fold_designs: Vec<(Design, Design)> = folds
        .iter()
        .map(|f| {
            (
                design.subset_by_years(f.train_years()),
                design.subset_by_years(f.valid_years()),
            )
        })
        .collect();
    let trainings = AtomicUsize::new(0);
    let scores: Vec<Result<f64, EvalError>> = grid
        .par_iter()
        .map(|params| {
            let mut total = 0.0;
            for (train_design, valid_design) in &fold_designs {
                let model = train(&train_design.x, &train_design.y, params)?;
                trainings.fetch_add(1, Ordering::Relaxed);
                let preds = valid_design
                    .x
                    .iter()
                    .map(|row| model.predict(row))
                    .collect::<Result<Vec<f64>, BoostError>>()?;
                total += mape(&valid_design.y, &preds)?;
            }
            Ok(total / fold_designs.len() as f64)
        })
        .collect();

    let mut table = Vec::with_capacity(grid.len());
    for (params, score) in grid.iter().zip(scores) {
        table.push((*params, score?));
    }
    // Strict comparison keeps the earliest grid entry on ties.
    let mut best_index = 0usize;
    for (i, entry) in table.iter().enumerate() {
        if entry.1 < table[best_index].1 {
            best_index = i;
        }
    }
    Ok(GridSearchResult {
        best: grid[best_index],
        best_index,
        table,
        n_trainings: trainings.load(Ordering::Relaxed),
    })
}

/// Actual vs predicted target for one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YearOutcome {
    pub year: i32,
    pub actual: f64,
    pub predicted: f64,
}

/// Per-country evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub country: String,
    pub in_sample_mape: f64,
    pub out_of_sample_mape: f64,
    pub best_params: TrainParams,
    /// Actual and fitted target for every design year (train then test).
    pub per_year: Vec<YearOutcome>,
}

/// Tune, refit, and score one country.
///
/// The design matrix covers the full panel span; years up to
/// `boundary_year` are the tuning/training window and later years are held
/// out. Hyperparameters are chosen by [`grid_search`] on the training
/// window only, the winner is refit on that whole window, and MAPE is
/// reported both in-window and on the held-out years.
pub fn evaluate_country(
    panel: &Panel,
    country: &str,
    features: &[String],
    boundary_year: i32,
    grid: &[TrainParams],
    cv: &CvConfig,
) -> Result<EvalReport, EvalError> {
    if features.is_empty() {
        return Err(EvalError::NoFeatures);
    }
    let design = build_matrix(panel, country, features, panel.year_range())?;
    let (train_years, test_years) = temporal_split(&design.years, boundary_year)?;
    let train_design = design.subset_by_years(&train_years);
    let test_design = design.subset_by_years(&test_years);

    let search = grid_search(&train_design, grid, cv)?;
    let model = train(&train_design.x, &train_design.y, &search.best)?;

    let predict_all = |d: &Design| -> Result<Vec<f64>, EvalError> {
        d.x.iter()
            .map(|row| model.predict(row).map_err(EvalError::from))
            .collect()
    };
    let train_preds = predict_all(&train_design)?;
    let test_preds = predict_all(&test_design)?;
    let in_sample_mape = mape(&train_design.y, &train_preds)?;
    let out_of_sample_mape = mape(&test_design.y, &test_preds)?;

    let mut per_year = Vec::with_capacity(design.n_rows());
    for (i, &year) in train_design.years.iter().enumerate() {
        per_year.push(YearOutcome {
            year,
            actual: train_design.y[i],
            predicted: train_preds[i],
        });
    }
    for (i, &year) in test_design.years.iter().enumerate() {
        per_year.push(YearOutcome {
            year,
            actual: test_design.y[i],
            predicted: test_preds[i],
        });
    }
    Ok(EvalReport {
        country: country.to_string(),
        in_sample_mape,
        out_of_sample_mape,
        best_params: search.best,
        per_year,
    })
}
