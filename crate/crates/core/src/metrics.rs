//! The metric set: exact match, Hamming score, and per-class precision,
//! recall, F1 and Jaccard index with macro and micro averages.
//!
//! Accuracy, `(tp + tn) / n`, is deliberately absent. On large pages with
//! rare classes `tn` dominates and a classifier that rejects every class
//! scores close to 1.
//!
//! When a ratio has a zero denominator the score is 1.0 if the class was
//! neither present nor predicted (`tp == fp == fn == 0`) and 0.0 otherwise.

use crate::codec::{check_labels, validate_pair, LabelImage};
use crate::contingency::{frequencies_from_tables, scan_pair, ClassFrequency, ContingencyTable};
use crate::error::{Error, Result};
use crate::registry::ClassRegistry;

fn ratio(num: u64, den: u64, t: &ContingencyTable) -> f64 {
    if den > 0 {
        num as f64 / den as f64
    } else if t.true_pos == 0 && t.false_pos == 0 && t.false_neg == 0 {
        1.0
    } else {
        0.0
    }
}

/// `tp / (tp + fp)`
pub fn precision(t: &ContingencyTable) -> f64 {
    ratio(t.true_pos, t.true_pos + t.false_pos, t)
}

/// `tp / (tp + fn)`
pub fn recall(t: &ContingencyTable) -> f64 {
    ratio(t.true_pos, t.true_pos + t.false_neg, t)
}

/// `2tp / (2tp + fp + fn)`, the harmonic mean of precision and recall.
pub fn f1(t: &ContingencyTable) -> f64 {
    ratio(2 * t.true_pos, 2 * t.true_pos + t.false_pos + t.false_neg, t)
}

/// Intersection over union, `tp / (tp + fp + fn)`. Never above [`f1`].
pub fn jaccard(t: &ContingencyTable) -> f64 {
    ratio(t.true_pos, t.true_pos + t.false_pos + t.false_neg, t)
}

/// Fraction of pixels whose predicted label set equals the ground truth set.
pub fn exact_match(gt: &LabelImage, pred: &LabelImage) -> Result<f64> {
    validate_pair(gt, pred)?;
    let matches = gt
        .pixels()
        .iter()
        .zip(pred.pixels())
        .filter(|(g, p)| g == p)
        .count();
    Ok(matches as f64 / gt.len() as f64)
}

/// One minus the Hamming loss: wrong label bits over `n * |C|`.
pub fn hamming_score(gt: &LabelImage, pred: &LabelImage, registry: &ClassRegistry) -> Result<f64> {
    validate_pair(gt, pred)?;
    check_labels(gt, registry)?;
    check_labels(pred, registry)?;
    let wrong: u64 = gt
        .pixels()
        .iter()
        .zip(pred.pixels())
        .map(|(g, p)| u64::from(g.symmetric_difference(*p).len()))
        .sum();
    Ok(hamming_from_errors(wrong, gt.len() as u64, registry.len()))
}

// (n|C| - wrong) / n|C| over exact integers, rather than 1 - wrong / n|C|, so
// that rounding can never push the score below the exact match ratio.
fn hamming_from_errors(wrong_bits: u64, n: u64, classes: usize) -> f64 {
    let bits = n * classes as u64;
    (bits - wrong_bits) as f64 / bits as f64
}

/// Unweighted mean over classes. Returns 0 for an empty slice.
pub fn macro_average(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean of per-class scores weighted by class frequency.
pub fn micro_average(values: &[f64], freqs: &[ClassFrequency]) -> Result<f64> {
    let aligned = values.len() == freqs.len()
        && freqs.iter().enumerate().all(|(i, f)| f.class == i);
    if !aligned {
        return Err(Error::MisalignedClasses {
            values: values.len(),
            classes: freqs.len(),
        });
    }
    Ok(values.iter().zip(freqs).map(|(v, f)| v * f.value).sum())
}

/// The four per-class metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Precision,
    Recall,
    F1,
    Jaccard,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Precision, Metric::Recall, Metric::F1, Metric::Jaccard];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
            Metric::Jaccard => "jaccard",
        }
    }

    pub fn of(self, t: &ContingencyTable) -> f64 {
        match self {
            Metric::Precision => precision(t),
            Metric::Recall => recall(t),
            Metric::F1 => f1(t),
            Metric::Jaccard => jaccard(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub jaccard: f64,
}

impl Scores {
    pub fn of_table(t: &ContingencyTable) -> Self {
        Self {
            precision: precision(t),
            recall: recall(t),
            f1: f1(t),
            jaccard: jaccard(t),
        }
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::F1 => self.f1,
            Metric::Jaccard => self.jaccard,
        }
    }

    fn set(&mut self, metric: Metric, value: f64) {
        match metric {
            Metric::Precision => self.precision = value,
            Metric::Recall => self.recall = value,
            Metric::F1 => self.f1 = value,
            Metric::Jaccard => self.jaccard = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub class: usize,
    pub name: String,
    pub scores: Scores,
}

/// How the micro average combines classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MicroAveraging {
    /// Per-class scores weighted by ground-truth label frequency.
    #[default]
    FrequencyWeighted,
    /// Scores of the table obtained by summing all class tables.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvaluationOptions {
    pub micro: MicroAveraging,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub exact_match: f64,
    pub hamming_score: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_avg: Scores,
    pub micro_avg: Scores,
    pub frequencies: Vec<ClassFrequency>,
    pub tables: Vec<ContingencyTable>,
    /// Pixel count.
    pub n: u64,
    pub class_names: Vec<String>,
}

/// Evaluates a prediction against its ground truth with default options.
pub fn evaluate(gt: &LabelImage, pred: &LabelImage, registry: &ClassRegistry) -> Result<EvaluationReport> {
    evaluate_with(gt, pred, registry, &EvaluationOptions::default())
}

pub fn evaluate_with(
    gt: &LabelImage,
    pred: &LabelImage,
    registry: &ClassRegistry,
    options: &EvaluationOptions,
) -> Result<EvaluationReport> {
    let scan = scan_pair(gt, pred, registry.len())?;
    if let Some(index) = scan.first_empty_gt {
        let (x, y) = gt.coords(index);
        return Err(Error::EmptyGroundTruthPixel { x, y });
    }
    let n = gt.len() as u64;
    let tables = scan.tables(n);
    let frequencies = frequencies_from_tables(&tables);

    let per_class: Vec<ClassMetrics> = tables
        .iter()
        .zip(registry.classes())
        .map(|(t, class)| ClassMetrics {
            class: class.index(),
            name: class.name().to_owned(),
            scores: Scores::of_table(t),
        })
        .collect();

    let mut macro_avg = Scores::default();
    let mut micro_avg = Scores::default();
    let pooled = pooled_table(&tables);
    for metric in Metric::ALL {
        let values: Vec<f64> = per_class.iter().map(|c| c.scores.get(metric)).collect();
        macro_avg.set(metric, macro_average(&values));
        let micro = match options.micro {
            MicroAveraging::FrequencyWeighted => micro_average(&values, &frequencies)?,
            MicroAveraging::Pooled => metric.of(&pooled),
        };
        micro_avg.set(metric, micro);
    }

    let wrong_bits: u64 = tables.iter().map(|t| t.false_pos + t.false_neg).sum();
    Ok(EvaluationReport {
        exact_match: scan.exact_matches as f64 / n as f64,
        hamming_score: hamming_from_errors(wrong_bits, n, registry.len()),
        per_class,
        macro_avg,
        micro_avg,
        frequencies,
        tables,
        n,
        class_names: registry.class_names(),
    })
}

fn pooled_table(tables: &[ContingencyTable]) -> ContingencyTable {
    tables.iter().fold(ContingencyTable::default(), |acc, t| ContingencyTable {
        class: 0,
        true_pos: acc.true_pos + t.true_pos,
        false_pos: acc.false_pos + t.false_pos,
        false_neg: acc.false_neg + t.false_neg,
        true_neg: acc.true_neg + t.true_neg,
    })
}
