//! Pixel-level evaluation of document layout analysis.
//!
//! Ground truth and predictions are rasters whose pixel values encode a set
//! of classes, one bit per class. A pair of such images is reduced to one
//! contingency table per class, from which the metric suite is computed:
//!
//! - exact match and Hamming score over whole label sets,
//! - precision, recall, F1 and Jaccard index per class,
//! - macro (unweighted) and micro (frequency-weighted) averages of each.
//!
//! Errors can also be rendered as a five-color map and blended over the
//! original page.
//!
//! ```
//! use layout_eval_core::{evaluate, ClassRegistry, LabelImage, LabelSet};
//!
//! let registry = ClassRegistry::diva_hisdb();
//! let text = LabelSet::single(registry.get("main-text").unwrap().index());
//! let gt = LabelImage::filled(4, 4, text).unwrap();
//! let report = evaluate(&gt, &gt, &registry).unwrap();
//! assert_eq!(report.exact_match, 1.0);
//! assert_eq!(report.metric_values().len(), 26);
//! ```

pub mod codec;
pub mod contingency;
pub mod error;
pub mod metrics;
pub mod registry;
pub mod report;
pub mod visualization;

pub use codec::{
    check_labels, decode_label_image, decode_rgb, decode_rgb_labels, encode_label_image, encode_png, validate_pair,
    LabelImage, LabelSet, Role,
};
pub use contingency::{build_tables, class_frequencies, frequencies_from_tables, ClassFrequency, ContingencyTable};
pub use error::{Dimensions, Error, Result};
pub use metrics::{
    evaluate, evaluate_with, exact_match, f1, hamming_score, jaccard, macro_average, micro_average, precision,
    recall, ClassMetrics, EvaluationOptions, EvaluationReport, Metric, MicroAveraging, Scores,
};
pub use registry::{ClassLabel, ClassRegistry, ClassSpec};
pub use report::{csv_string, format_value, metric_count, summary_table, write_csv};
pub use visualization::{classify_pixel, outcome_counts, render_error_map, render_overlay, Palette, PixelOutcome};

pub use image::{Rgb, RgbImage};
