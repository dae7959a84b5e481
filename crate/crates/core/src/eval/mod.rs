//! Classification metrics and inter-annotator agreement.

pub mod agreement;
pub mod metrics;

pub use agreement::{krippendorff_alpha, Alpha, AnnotationSet};
pub use metrics::{classification_metrics, MetricsReport};
