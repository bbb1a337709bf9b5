//! Predictor ranking by edit distance on real sequences (EDR).
//!
//! Two aligned values match when they differ by at most `epsilon`; the EDR
//! distance is the minimum number of match-failures, insertions, and
//! deletions needed to align the sequences. Candidate indicators are scored
//! against the target series on their co-observed years after z-score
//! normalization, so the threshold acts on comparable scales.

use serde::Serialize;
use thiserror::Error;

use crate::data_model::{zscore_slice, DataError, Panel};

/// Match tolerance applied to z-normalized series.
pub const DEFAULT_EPSILON: f64 = 0.25;
/// How many top-ranked indicators to keep.
pub const DEFAULT_K: usize = 10;
/// Minimum number of co-observed years for a candidate to be scored at all.
pub const MIN_OVERLAP: usize = 10;

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(f64),
    #[error("sequences must not contain non-finite values")]
    NonFiniteValue,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("unknown country {0}")]
    UnknownCountry(String),
    #[error("target series for {0} has {1} observations; need at least {MIN_OVERLAP}")]
    TargetTooShort(String, usize),
    #[error("no candidate indicator shares at least {MIN_OVERLAP} observed years with the target")]
    NoCandidates,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Edit distance on real sequences. Cost model: matched pair
/// (|a[i] - b[j]| <= epsilon) costs 0, substitution costs 1, and each
/// insertion or deletion costs 1. The distance is an integer in
/// [|len(a) - len(b)|, max(len(a), len(b))].
pub fn edr_distance(a: &[f64], b: &[f64], epsilon: f64) -> Result<usize, SimilarityError> {
    if !(epsilon >= 0.0) {
        return Err(SimilarityError::NegativeEpsilon(epsilon));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(SimilarityError::NonFiniteValue);
    }
    // Standard DP over prefixes with two rolling rows:
    // D[i][j] = min(D[i-1][j-1] + cost, D[i-1][j] + 1, D[i][j-1] + 1).
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, &av) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &bv) in b.iter().enumerate() {
            let subst = if (av - bv).abs() <= epsilon { 0 } else { 1 };
            curr[j + 1] = (prev[j] + subst)
                .min(prev[j + 1] + 1)
                .min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[b.len()])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedFeature {
    pub indicator: String,
    pub edr_distance: usize,
}

/// Outcome of ranking every eligible candidate for one country.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRanking {
    /// All scored candidates, ascending by distance, ties by indicator code.
    pub entries: Vec<RankedFeature>,
    /// Codes of the first `k` entries, in rank order.
    pub selected: Vec<String>,
    pub epsilon: f64,
    /// Effective selection size: min(requested k, number of candidates).
    pub k: usize,
}

/// Rank every candidate indicator for `country` by EDR distance to the
/// target series and keep the `k` best.
///
/// For each candidate, both series are restricted to years where *both* have
/// observations; candidates with fewer than [`MIN_OVERLAP`] co-observed
/// years are skipped. The restricted slices are z-score normalized before
/// the distance is computed, which makes the ranking invariant to affine
/// rescaling of any candidate.
pub fn rank_features(
    panel: &Panel,
    country: &str,
    epsilon: f64,
    k: usize,
) -> Result<FeatureRanking, SimilarityError> {
    if !(epsilon >= 0.0) {
        return Err(SimilarityError::NegativeEpsilon(epsilon));
    }
    if k == 0 {
        return Err(SimilarityError::ZeroK);
    }
    if !panel.countries().iter().any(|c| c == country) {
        return Err(SimilarityError::UnknownCountry(country.to_string()));
    }
    let target = panel
        .target_series(country)
        .ok_or_else(|| DataError::MissingTarget(country.to_string()))?;
    if target.n_observed() < MIN_OVERLAP {
        return Err(SimilarityError::TargetTooShort(
            country.to_string(),
            target.n_observed(),
        ));
    }

    let mut entries = Vec::new();
    for code in panel.country_indicators(country) {
        if code == panel.target_code() {
            continue;
        }
        let candidate = panel.series(country, code).expect("listed indicator exists");
        let mut target_vals = Vec::new();
        let mut candidate_vals = Vec::new();
        for (year, tv) in target.observed() {
            if let Some(cv) = candidate.get(year) {
                target_vals.push(tv);
                candidate_vals.push(cv);
            }
        }
        if target_vals.len() < MIN_OVERLAP {
            continue;
        }
        let tz = zscore_slice(&target_vals)?;
        let cz = zscore_slice(&candidate_vals)?;
        let distance = edr_distance(&tz, &cz, epsilon)?;
        entries.push(RankedFeature {
            indicator: code.to_string(),
            edr_distance: distance,
        });
    }
    if entries.is_empty() {
        return Err(SimilarityError::NoCandidates);
    }
    entries.sort_by(|a, b| {
        a.edr_distance
            .cmp(&b.edr_distance)
            .then_with(|| a.indicator.cmp(&b.indicator))
    });
    let k = k.min(entries.len());
    let selected = entries[..k].iter().map(|e| e.indicator.clone()).collect();
    Ok(FeatureRanking {
        entries,
        selected,
        epsilon,
        k,
    })
}
