//! Per-class contingency tables and class frequencies.
//!
//! A multi-label confusion matrix would need a row and column for every
//! combination of classes. Instead each class gets its own 2x2 table, filled
//! in a single pass over the pixels.

use rayon::prelude::*;

use crate::codec::{check_label_bits, check_labels, validate_pair, LabelImage, LabelSet};
use crate::error::{Error, Result};
use crate::registry::ClassRegistry;

/// TP/FP/FN/TN pixel counts for one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContingencyTable {
    /// Registry index of the class.
    pub class: usize,
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl ContingencyTable {
    /// Total pixel count, `tp + fp + fn + tn`.
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    /// Ground-truth support, `tp + fn`.
    pub fn support(&self) -> u64 {
        self.true_pos + self.false_neg
    }

    /// Table with prediction and ground truth exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            false_pos: self.false_neg,
            false_neg: self.false_pos,
            ..*self
        }
    }
}

/// Share of ground-truth labels that belong to a class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassFrequency {
    pub class: usize,
    pub value: f64,
}

/// Everything a single pass over a (ground truth, prediction) pair collects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PairScan {
    pub true_pos: Vec<u64>,
    pub false_pos: Vec<u64>,
    pub false_neg: Vec<u64>,
    pub exact_matches: u64,
    /// Lowest pixel index whose ground truth set is empty.
    pub first_empty_gt: Option<usize>,
    /// Union of every label seen, for range checking.
    pub used: u32,
}

impl PairScan {
    fn new(classes: usize) -> Self {
        Self {
            true_pos: vec![0; classes],
            false_pos: vec![0; classes],
            false_neg: vec![0; classes],
            exact_matches: 0,
            first_empty_gt: None,
            used: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.true_pos.iter_mut().zip(&other.true_pos) {
            *a += b;
        }
        for (a, b) in self.false_pos.iter_mut().zip(&other.false_pos) {
            *a += b;
        }
        for (a, b) in self.false_neg.iter_mut().zip(&other.false_neg) {
            *a += b;
        }
        self.exact_matches += other.exact_matches;
        self.used |= other.used;
        self.first_empty_gt = match (self.first_empty_gt, other.first_empty_gt) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }

    pub fn tables(&self, n: u64) -> Vec<ContingencyTable> {
        (0..self.true_pos.len())
            .map(|class| {
                let (tp, fp, fn_) = (
                    self.true_pos[class],
                    self.false_pos[class],
                    self.false_neg[class],
                );
                ContingencyTable {
                    class,
                    true_pos: tp,
                    false_pos: fp,
                    false_neg: fn_,
                    true_neg: n - tp - fp - fn_,
                }
            })
            .collect()
    }
}

#[inline]
fn add_bits(counts: &mut [u64], bits: u32) {
    let mut rest = bits;
    while rest != 0 {
        counts[rest.trailing_zeros() as usize] += 1;
        rest &= rest - 1;
    }
}

const BAND_PIXELS: usize = 1 << 16;

/// Counts TP/FP/FN per class plus exact matches in one pass. Bands of pixels
/// are reduced independently and summed, so the result does not depend on
/// how the image is split.
pub(crate) fn scan_pair(gt: &LabelImage, pred: &LabelImage, classes: usize) -> Result<PairScan> {
    validate_pair(gt, pred)?;
    let scan = gt
        .pixels()
        .par_chunks(BAND_PIXELS)
        .zip(pred.pixels().par_chunks(BAND_PIXELS))
        .enumerate()
        .map(|(band, (g, p))| scan_band(band * BAND_PIXELS, g, p, classes))
        .reduce(|| PairScan::new(classes), PairScan::merge);
    check_label_bits(scan.used, classes)?;
    Ok(scan)
}

fn scan_band(offset: usize, gt: &[LabelSet], pred: &[LabelSet], classes: usize) -> PairScan {
    let mut scan = PairScan::new(classes);
    let valid = if classes >= 32 { u32::MAX } else { (1u32 << classes) - 1 };
    for (i, (g, p)) in gt.iter().zip(pred).enumerate() {
        let (g, p) = (g.bits(), p.bits());
        if (g | p) & !valid != 0 {
            scan.used |= g | p;
            continue;
        }
        if g == 0 && scan.first_empty_gt.is_none() {
            scan.first_empty_gt = Some(offset + i);
        }
        if g == p {
            scan.exact_matches += 1;
            add_bits(&mut scan.true_pos, g);
            continue;
        }
        add_bits(&mut scan.true_pos, g & p);
        add_bits(&mut scan.false_pos, p & !g);
        add_bits(&mut scan.false_neg, g & !p);
    }
    scan
}

/// One contingency table per registry class, in registry order.
///
/// Classes absent from both images still get a table with `tn == n`.
pub fn build_tables(
    gt: &LabelImage,
    pred: &LabelImage,
    registry: &ClassRegistry,
) -> Result<Vec<ContingencyTable>> {
    let scan = scan_pair(gt, pred, registry.len())?;
    Ok(scan.tables(gt.len() as u64))
}

/// `f_c` = pixels whose ground truth contains `c`, over the total number of
/// ground-truth labels. The denominator counts labels, not pixels, so the
/// frequencies of a multi-label image still sum to one.
pub fn class_frequencies(gt: &LabelImage, registry: &ClassRegistry) -> Result<Vec<ClassFrequency>> {
    check_labels(gt, registry)?;
    if let Some((x, y)) = gt.first_empty() {
        return Err(Error::EmptyGroundTruthPixel { x, y });
    }
    let mut support = vec![0u64; registry.len()];
    for set in gt.pixels() {
        add_bits(&mut support, set.bits());
    }
    Ok(frequencies_from_support(&support))
}

/// Frequencies from the ground-truth support `tp + fn` of each table.
pub fn frequencies_from_tables(tables: &[ContingencyTable]) -> Vec<ClassFrequency> {
    let support: Vec<u64> = tables.iter().map(ContingencyTable::support).collect();
    frequencies_from_support(&support)
}

fn frequencies_from_support(support: &[u64]) -> Vec<ClassFrequency> {
    let labels: u64 = support.iter().sum();
    support
        .iter()
        .enumerate()
        .map(|(class, &count)| ClassFrequency {
            class,
            value: if labels == 0 {
                0.0
            } else {
                count as f64 / labels as f64
            },
        })
        .collect()
}
