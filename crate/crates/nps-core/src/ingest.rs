//! Survey-score ingestion, categorization, and posterior-state persistence.
//!
//! Raw 0-10 recommendation scores map to the three categories: 0-6
//! detractor, 7-8 passive, 9-10 promoter. Batches of scores tally into
//! [`Counts`], and a JSON state file carries the running posterior across
//! survey waves so each wave's posterior becomes the next wave's prior.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{update_posterior, Counts, DirichletParams};

/// Version tag written into state files.
pub const STATE_FORMAT_VERSION: u32 = 1;

/// NPS category of a single respondent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    Detractor,
    Passive,
    Promoter,
}

/// One survey response: a 0-10 score plus an optional market/period tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyRecord {
    pub score: u8,
    pub label: Option<String>,
}

/// Map a 0-10 score to its category: 0-6 detractor, 7-8 passive,
/// 9-10 promoter.
pub fn categorize_score(score: u8) -> Result<Category> {
    match score {
        0..=6 => Ok(Category::Detractor),
        7..=8 => Ok(Category::Passive),
        9..=10 => Ok(Category::Promoter),
        _ => Err(Error::ScoreOutOfRange(score as i64)),
    }
}

/// Tally a batch of records into per-category counts.
pub fn tally_scores<'a, I>(records: I) -> Result<Counts>
where
    I: IntoIterator<Item = &'a SurveyRecord>,
{
    let mut counts = Counts::default();
    for record in records {
        match categorize_score(record.score)? {
            Category::Detractor => counts.detractors += 1,
            Category::Passive => counts.passives += 1,
            Category::Promoter => counts.promoters += 1,
        }
    }
    Ok(counts)
}

/// Read survey records from a CSV file.
///
/// A header row is required; scores come from the `score` column and must be
/// integers in 0..=10 (no imputation of missing or malformed values). An
/// optional `label` column tags individual records.
pub fn read_scores_csv<P: AsRef<Path>>(path: P) -> Result<Vec<SurveyRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
    };
    let score_idx = column("score").ok_or_else(|| Error::MissingColumn("score".into()))?;
    let label_idx = column("label");

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let raw = row.get(score_idx).unwrap_or("").trim();
        let score: i64 = raw.parse().map_err(|_| Error::MalformedScore {
            value: raw.to_string(),
            row: line,
        })?;
        if !(0..=10).contains(&score) {
            return Err(Error::AtRow {
                row: line,
                source: Box::new(Error::ScoreOutOfRange(score)),
            });
        }
        let label = label_idx
            .and_then(|i| row.get(i))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from);
        records.push(SurveyRecord {
            score: score as u8,
            label,
        });
    }
    Ok(records)
}

/// One applied update in a state file's history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub label: String,
    pub counts: Counts,
}

/// Persisted posterior for sequential updating.
///
/// Invariant: `params` equals `prior` plus the component-wise sum of all
/// history counts; [`load_state`] rejects files where that fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    pub version: u32,
    pub prior: DirichletParams,
    #[serde(rename = "alpha")]
    pub params: DirichletParams,
    pub history: Vec<HistoryEntry>,
}

impl PosteriorState {
    /// Fresh state holding an untouched prior.
    pub fn new(prior: DirichletParams) -> Self {
        Self {
            version: STATE_FORMAT_VERSION,
            prior,
            params: prior,
            history: Vec::new(),
        }
    }

    /// Fold one labelled batch into the posterior and record it.
    pub fn apply(&mut self, label: impl Into<String>, counts: Counts) {
        self.params = update_posterior(&self.params, &counts);
        self.history.push(HistoryEntry {
            label: label.into(),
            counts,
        });
    }

    /// Verify that the stored parameters replay from prior plus history.
    pub fn check_consistency(&self) -> Result<()> {
        let mut replayed = self.prior;
        for entry in &self.history {
            replayed = update_posterior(&replayed, &entry.counts);
        }
        let stored = self.params.as_array();
        let expected = replayed.as_array();
        for (have, want) in stored.iter().zip(expected.iter()) {
            if (have - want).abs() > 1e-9 * want.abs().max(1.0) {
                return Err(Error::StateInvariant(format!(
                    "stored alpha {stored:?} does not match prior plus history {expected:?}"
                )));
            }
        }
        Ok(())
    }
}

/// Load and validate a state file.
///
/// Malformed JSON and a violated prior-plus-history invariant are reported
/// as distinct errors.
pub fn load_state<P: AsRef<Path>>(path: P) -> Result<PosteriorState> {
    let text = fs::read_to_string(path)?;
    let state: PosteriorState = serde_json::from_str(&text)?;
    if state.version != STATE_FORMAT_VERSION {
        return Err(Error::StateVersion {
            found: state.version,
            expected: STATE_FORMAT_VERSION,
        });
    }
    state.check_consistency()?;
    Ok(state)
}

/// Write a state file as pretty-printed JSON with fixed key order.
pub fn save_state<P: AsRef<Path>>(state: &PosteriorState, path: P) -> Result<()> {
    let mut text = serde_json::to_string_pretty(state)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
