//! Flat, named views of an [`EvaluationReport`] and their CSV and text forms.
//!
//! Column order: `exact_match`, `hamming_score`, then for each of precision,
//! recall, f1 and jaccard the macro average, the micro average and one value
//! per class in registry order. That is `4 * |C| + 10` values.

use std::fmt::Write as _;
use std::io::Write;

use crate::metrics::{EvaluationReport, Metric};

/// Number of scalar metrics reported for `classes` classes.
pub const fn metric_count(classes: usize) -> usize {
    4 * classes + 10
}

impl EvaluationReport {
    /// Column names in report order.
    pub fn metric_names(&self) -> Vec<String> {
        let mut names = vec!["exact_match".to_owned(), "hamming_score".to_owned()];
        for metric in Metric::ALL {
            let m = metric.name();
            names.push(format!("{m}_macro"));
            names.push(format!("{m}_micro"));
            names.extend(self.class_names.iter().map(|c| format!("{m}_{c}")));
        }
        names
    }

    pub fn metric_values(&self) -> Vec<f64> {
        let mut values = vec![self.exact_match, self.hamming_score];
        for metric in Metric::ALL {
            values.push(self.macro_avg.get(metric));
            values.push(self.micro_avg.get(metric));
            values.extend(self.per_class.iter().map(|c| c.scores.get(metric)));
        }
        values
    }

    pub fn named_values(&self) -> Vec<(String, f64)> {
        self.metric_names().into_iter().zip(self.metric_values()).collect()
    }
}

/// Fixed six-decimal rendering used by every textual output.
pub fn format_value(value: f64) -> String {
    format!("{value:.6}")
}

/// Writes a header row of metric names and one data row.
pub fn write_csv<W: Write>(report: &EvaluationReport, out: W) -> std::io::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let to_io = |e: csv::Error| std::io::Error::other(e);
    writer.write_record(report.metric_names()).map_err(to_io)?;
    writer
        .write_record(report.metric_values().into_iter().map(format_value))
        .map_err(to_io)?;
    writer.flush()
}

pub fn csv_string(report: &EvaluationReport) -> String {
    let mut out = Vec::new();
    write_csv(report, &mut out).expect("writing to memory");
    String::from_utf8(out).expect("csv output is utf-8")
}

/// Human-readable summary: the two global scores, then one row per metric
/// with macro, micro and per-class columns.
pub fn summary_table(report: &EvaluationReport) -> String {
    let mut headers = vec!["metric".to_owned(), "macro".to_owned(), "micro".to_owned()];
    headers.extend(report.class_names.iter().cloned());
    let mut rows = vec![headers];
    for metric in Metric::ALL {
        let mut row = vec![
            metric.name().to_owned(),
            format_value(report.macro_avg.get(metric)),
            format_value(report.micro_avg.get(metric)),
        ];
        row.extend(report.per_class.iter().map(|c| format_value(c.scores.get(metric))));
        rows.push(row);
    }

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|col| rows.iter().map(|r| r[col].len()).max().unwrap_or(0))
        .collect();

    let mut out = String::new();
    let _ = writeln!(out, "pixels        {}", report.n);
    let _ = writeln!(out, "exact_match   {}", format_value(report.exact_match));
    let _ = writeln!(out, "hamming_score {}", format_value(report.hamming_score));
    out.push('\n');
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (cell, w))| {
                if i == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{evaluate, ClassRegistry, LabelImage, LabelSet};

    fn report(k: usize) -> EvaluationReport {
        let names: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
        let reg = ClassRegistry::sequential(&names).unwrap();
        let gt = LabelImage::new(2, 1, vec![LabelSet::single(0), LabelSet::single(k - 1)]).unwrap();
        let pred = LabelImage::new(2, 1, vec![LabelSet::single(0), LabelSet::single(0)]).unwrap();
        evaluate(&gt, &pred, &reg).unwrap()
    }

    #[test]
    fn value_count_matches_formula() {
        for k in 1..=8 {
            let r = report(k);
            assert_eq!(r.metric_values().len(), metric_count(k));
            assert_eq!(r.metric_names().len(), metric_count(k));
        }
        assert_eq!(metric_count(4), 26);
    }

    #[test]
    fn csv_layout() {
        let r = report(2);
        let csv = csv_string(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
        assert_eq!(
            lines[0],
            "exact_match,hamming_score,precision_macro,precision_micro,precision_c0,precision_c1,\
             recall_macro,recall_micro,recall_c0,recall_c1,f1_macro,f1_micro,f1_c0,f1_c1,\
             jaccard_macro,jaccard_micro,jaccard_c0,jaccard_c1"
        );
        assert!(lines[1].starts_with("0.500000,0.500000,"));
        assert!(lines[1].split(',').all(|v| v.split('.').nth(1).unwrap().len() == 6));
    }

    #[test]
    fn summary_matches_csv_values() {
        let r = report(3);
        let summary = summary_table(&r);
        for v in r.metric_values() {
            assert!(summary.contains(&format_value(v)));
        }
        assert!(summary.contains("jaccard"));
    }
}
