//! Label handling, list auditing, parked-page detection, and synthetic data.

pub mod correlation;
pub mod labels;
pub mod parked;
pub mod survival;
pub mod synthetic;

pub use correlation::{attribute_label_correlation, Correlation};
pub use labels::{
    merge_and_binarize, read_binary_labels, read_label_file, read_labels, write_binary_labels, AbsoluteBias, BinaryLabels, LabelRecord, LabelSource,
    Reliability, ReliabilityGrade, RelativeBias, Task,
};
pub use parked::{match_parked, HttpMeta, ParkedVerdict, PatternSet};
pub use survival::{
    filter_by_backlinks, survival_report, BacklinkFilter, ProbeResult, SurvivalReport,
    DEFAULT_BACKLINK_THRESHOLD,
};
pub use synthetic::{generate_synthetic_webgraph, SyntheticConfig, SyntheticGraph};
