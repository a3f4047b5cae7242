//! Tracking accuracy: IoU, greedy per-frame matching, and sequence reports.
//!
//! The accuracy scalar is mean IoU normalized by ground-truth count, the
//! rectangle-overlap measure used by the public tracking benchmarks whose
//! annotation formats the loaders accept. Frames with no ground-truth boxes
//! are excluded from the sequence average so empty scenes cannot inflate it.

use crate::annotations::{BoundingBox, DetectionSet, DetectionTrack};
use crate::error::{Error, Result};
use crate::pipeline::PipelineResult;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Intersection over union of two boxes, in `[0, 1]`.
///
/// Areas are computed in integer arithmetic; only the final quotient is
/// floating point, so identical boxes score exactly 1.0.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let left = a.x().max(b.x()) as u128;
    let right = a.right().min(b.right()) as u128;
    let top = a.y().max(b.y()) as u128;
    let bottom = a.bottom().min(b.bottom()) as u128;
    let inter = right.saturating_sub(left) * bottom.saturating_sub(top);
    if inter == 0 {
        return 0.0;
    }
    let union = a.area() as u128 + b.area() as u128 - inter;
    inter as f64 / union as f64
}

/// Match outcome for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScore {
    pub frame_index: usize,
    /// Sum of matched IoUs divided by the ground-truth count; unmatched
    /// truth boxes contribute zero. 1.0 when both sides are empty.
    pub mean_iou: f64,
    pub matched: usize,
    pub missed: usize,
    pub spurious: usize,
}

/// Accuracy over a whole sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    /// Mean of per-frame `mean_iou` over frames with ground truth; defined
    /// as 1.0 when no frame has any (then `scored_frames` is 0).
    pub mean_iou: f64,
    /// Frames with at least one ground-truth box.
    pub scored_frames: usize,
    pub per_frame: Vec<FrameScore>,
}

impl AccuracyReport {
    /// `frame_index,mean_iou,matched,missed,spurious` lines plus a summary.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("frame_index,mean_iou,matched,missed,spurious\n");
        for s in &self.per_frame {
            writeln!(
                out,
                "{},{:.6},{},{},{}",
                s.frame_index, s.mean_iou, s.matched, s.missed, s.spurious
            )
            .expect("string write");
        }
        writeln!(
            out,
            "#mean_iou={:.6},scored_frames={}",
            self.mean_iou, self.scored_frames
        )
        .expect("string write");
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|source| Error::CannotWriteOutput {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Greedy matching of predictions to ground truth for one frame.
///
/// Pairs are taken highest IoU first, requiring `iou >= iou_threshold`;
/// exact ties prefer the lower prediction index, then the lower truth
/// index. Each box matches at most once.
pub fn score_frame(
    pred: &DetectionSet,
    truth: &DetectionSet,
    iou_threshold: f64,
) -> Result<FrameScore> {
    if pred.frame_index() != truth.frame_index() {
        return Err(Error::FrameMismatch {
            pred: pred.frame_index(),
            truth: truth.frame_index(),
        });
    }

    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(pred.len() * truth.len());
    for (pi, p) in pred.boxes().iter().enumerate() {
        for (ti, t) in truth.boxes().iter().enumerate() {
            let overlap = iou(&p.bbox, &t.bbox);
            if overlap >= iou_threshold {
                pairs.push((overlap, pi, ti));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("iou is finite")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut pred_used = vec![false; pred.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut matched = 0usize;
    let mut iou_sum = 0.0f64;
    for (overlap, pi, ti) in pairs {
        if !pred_used[pi] && !truth_used[ti] {
            pred_used[pi] = true;
            truth_used[ti] = true;
            matched += 1;
            iou_sum += overlap;
        }
    }

    let mean_iou = if truth.is_empty() {
        if pred.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        iou_sum / truth.len() as f64
    };
    Ok(FrameScore {
        frame_index: truth.frame_index(),
        mean_iou,
        matched,
        missed: truth.len() - matched,
        spurious: pred.len() - matched,
    })
}

/// Scores a pipeline run against ground truth, frame by frame.
pub fn sequence_accuracy(
    result: &PipelineResult,
    truth: &DetectionTrack,
    iou_threshold: f64,
) -> Result<AccuracyReport> {
    let pred = &result.per_frame_boxes;
    if pred.len() != truth.len() {
        return Err(Error::TrackLengthMismatch {
            result: pred.len(),
            truth: truth.len(),
        });
    }
    let mut per_frame = Vec::with_capacity(truth.len());
    let mut sum = 0.0f64;
    let mut scored_frames = 0usize;
    for f in 0..truth.len() {
        let score = score_frame(pred.frame(f), truth.frame(f), iou_threshold)?;
        if !truth.frame(f).is_empty() {
            sum += score.mean_iou;
            scored_frames += 1;
        }
        per_frame.push(score);
    }
    let mean_iou = if scored_frames == 0 {
        1.0
    } else {
        sum / scored_frames as f64
    };
    Ok(AccuracyReport {
        mean_iou,
        scored_frames,
        per_frame,
    })
}
