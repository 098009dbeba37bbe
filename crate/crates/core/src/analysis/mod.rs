//! Detection scoring, beat features, feature selection, classifiers,
//! cross-validation and ROC analysis.

mod classifier;
mod cv;
mod detection;
mod features;
mod roc;
mod selection;
mod workflow;

pub use classifier::{predict, train_classifier, ClassifierKind, ClassifierModel, ClassifierParams, SvmKernel};
pub use cv::{cross_validate, fold_assignment, CvReport, FoldMetrics, FoldUnit};
pub use detection::{detection_metrics, evaluate_fiducials, match_detections, DetectionReport, MatchCounts};
pub use features::{extract_features, FeatureMatrix, FEATURE_COUNT, FEATURE_NAMES};
pub use roc::{roc_curve, ConfusionCounts, RocCurve};
pub use selection::{select_features, welch_t_test, FeatureSelection, SELECTED_FEATURES};
pub use workflow::{classify_features, record_features, ClassificationReport, CvSettings, FeatureSummary};
