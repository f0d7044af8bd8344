//! Object-detection evaluation in the COCO convention (IoU matching,
//! 101-point interpolated AP, mAP over IoU 0.50:0.05:0.95, AR@k, area
//! buckets) and debiased exponential smoothing of training-log series.

mod ema;
mod eval;
mod interchange;
mod iou;
mod report;

use thiserror::Error;

pub use ema::{ema_smooth, final_smoothed, read_series_csv, LogSeries, DEFAULT_EMA_WEIGHT};
pub use eval::{
    average_precision, average_recall_at_k, evaluate, match_detections, mean_ap, AreaBucket, DetectionSet,
    GroundTruthSet, MetricsReport, IOU_THRESHOLDS, MAX_DETS, RECALL_POINTS,
};
pub use interchange::{read_boxes_json, write_boxes_json, ImageBoxes, ScoredBox};
pub use iou::iou;
pub use report::{metrics_table, smoothing_table, SmoothedRow};

#[derive(Debug, Error)]
pub enum EvalError {
    /// The metric is undefined: no ground truth falls in the bucket.
    #[error("no ground truth boxes in the evaluated set")]
    NoGroundTruth,
    #[error("log series is empty")]
    EmptySeries,
    #[error("log series steps must be strictly increasing (step {0} follows {1})")]
    NonIncreasingStep(i64, i64),
    #[error("smoothing weight {0} is outside [0, 1)")]
    BadWeight(f64),
    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid box: {0}")]
    Box(#[from] tollgate_plate::BitmapError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
