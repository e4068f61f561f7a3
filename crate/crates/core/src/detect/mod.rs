//! Threshold calibration for the reconstruction-probability test and ROC analysis.

pub mod null;
pub mod roc;
pub mod threshold;

pub use null::{fit_null, fit_null_with, EmpiricalNull, NullMethod, DEFAULT_HISTOGRAM_BINS, MIN_NULL_SAMPLES};
pub use roc::{operating_point, pd_at_pfa, roc, OperatingPoint, RocCurve, RocPoint, ScoreSet};
pub use threshold::{decide, exceedance_rate, threshold_for_pfa, Threshold};
