//! Evaluation jobs: their persisted record and the blocking work they run.

use indexmap::IndexMap;
use layout_eval_core::{decode_label_image, evaluate, ClassRegistry, EvaluationReport, Role};
use serde::{Deserialize, Serialize};

use crate::store::{EntryMeta, Store};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Pending,
    Running,
    Done,
    Failed,
}

impl JobState {
    /// Allowed moves: pending to running, running to done or failed.
    pub fn can_become(self, next: JobState) -> bool {
        matches!(
            (self, next),
            (JobState::Pending, JobState::Running)
                | (JobState::Running, JobState::Done)
                | (JobState::Running, JobState::Failed)
        )
    }

    pub fn is_finished(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileResult {
    pub file: String,
    /// Metric name to value, in report column order.
    pub metrics: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileError {
    pub file: String,
    pub error: String,
}

/// One ground-truth image matched with its hypothesis by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImagePair {
    pub gt_collection: String,
    pub gt: EntryMeta,
    pub hypothesis_collection: String,
    pub hypothesis: EntryMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub created_at: u64,
    pub state: JobState,
    pub pairs: Vec<ImagePair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results: Option<Vec<FileResult>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<FileError>>,
}

/// Response body of `GET /jobs/{id}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobView {
    pub id: String,
    pub state: JobState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results: Option<Vec<FileResult>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<FileError>>,
}

impl JobRecord {
    pub fn view(&self) -> JobView {
        JobView {
            id: self.id.clone(),
            state: self.state,
            results: self.results.clone(),
            errors: self.errors.clone(),
        }
    }

    /// Moves to `next`; returns false and leaves the record alone when the
    /// transition is not allowed.
    pub fn advance(&mut self, next: JobState) -> bool {
        if !self.state.can_become(next) {
            return false;
        }
        self.state = next;
        true
    }

    pub fn finish(&mut self, outcome: Result<Vec<FileResult>, Vec<FileError>>) {
        match outcome {
            Ok(results) if self.advance(JobState::Done) => self.results = Some(results),
            Err(errors) if self.advance(JobState::Failed) => self.errors = Some(errors),
            _ => {}
        }
    }
}

/// Report values keyed by the CSV column names.
pub fn metrics_map(report: &EvaluationReport) -> IndexMap<String, f64> {
    report.named_values().into_iter().collect()
}

pub fn evaluate_bytes(gt: &[u8], hypothesis: &[u8], registry: &ClassRegistry) -> layout_eval_core::Result<EvaluationReport> {
    let gt = decode_label_image(gt, registry, Role::GroundTruth)?;
    let pred = decode_label_image(hypothesis, registry, Role::Prediction)?;
    evaluate(&gt, &pred, registry)
}

/// Evaluates every pair. Any failing image fails the whole job, and every
/// failure is reported.
pub fn run_pairs(
    store: &Store,
    registry: &ClassRegistry,
    pairs: &[ImagePair],
) -> Result<Vec<FileResult>, Vec<FileError>> {
    let mut results = Vec::with_capacity(pairs.len());
    let mut errors = Vec::new();
    for pair in pairs {
        let file = pair.hypothesis.file_name();
        let outcome = (|| -> Result<EvaluationReport, String> {
            let gt = store
                .read_entry(&pair.gt_collection, &pair.gt)
                .map_err(|e| format!("reading ground truth: {e}"))?;
            let hyp = store
                .read_entry(&pair.hypothesis_collection, &pair.hypothesis)
                .map_err(|e| format!("reading hypothesis: {e}"))?;
            evaluate_bytes(&gt, &hyp, registry).map_err(|e| e.to_string())
        })();
        match outcome {
            Ok(report) => results.push(FileResult {
                file,
                metrics: metrics_map(&report),
            }),
            Err(error) => errors.push(FileError { file, error }),
        }
    }
    if errors.is_empty() {
        Ok(results)
    } else {
        Err(errors)
    }
}
