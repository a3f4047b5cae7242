//! Detection extrapolation over an anchor schedule.
//!
//! Frame `f` is an anchor when `f % ew == 0`: the detection oracle (a replay
//! of recorded per-frame detections, standing in for running the full
//! detector) is queried there. Every other frame reuses motion: the previous
//! frame's boxes are shifted by the mean motion vector of the blocks they
//! cover, without querying the oracle. Extrapolation chains within a window,
//! each extrapolated frame feeding the next.

use crate::annotations::{BoundingBox, Detection, DetectionSet, DetectionTrack};
use crate::error::{Error, Result};
use crate::frame::FrameSequence;
use crate::motion::{round_half_away, FieldCache, MotionField, MotionParams, MotionVector};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Number of frames covered by one detector query; `ew = 1` means a query
/// on every frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExtrapolationWindow(usize);

impl ExtrapolationWindow {
    pub fn new(ew: usize) -> Result<Self> {
        if ew == 0 {
            return Err(Error::InvalidConfig(
                "extrapolation window must be at least 1".into(),
            ));
        }
        Ok(ExtrapolationWindow(ew))
    }

    pub fn get(&self) -> usize {
        self.0
    }
}

/// Replays a recorded detection track, counting how often it is queried.
#[derive(Debug, Clone)]
pub struct DetectionOracle {
    track: DetectionTrack,
    inference_count: usize,
}

impl DetectionOracle {
    pub fn new(track: DetectionTrack) -> Self {
        DetectionOracle {
            track,
            inference_count: 0,
        }
    }

    /// Detections for `frame_index`; each call counts as one inference.
    pub fn query(&mut self, frame_index: usize) -> &DetectionSet {
        self.inference_count += 1;
        self.track.frame(frame_index)
    }

    pub fn inference_count(&self) -> usize {
        self.inference_count
    }

    pub fn track(&self) -> &DetectionTrack {
        &self.track
    }
}

/// Output of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    /// Boxes emitted for every frame, anchors and extrapolated alike.
    pub per_frame_boxes: DetectionTrack,
    /// Frame indices where the oracle was queried.
    pub inference_frames: Vec<usize>,
    pub ew: ExtrapolationWindow,
}

impl PipelineResult {
    /// Annotation-format CSV plus an `#inference_frames=...` sidecar line.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("#inference_frames=");
        for (i, f) in self.inference_frames.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{f}").expect("string write");
        }
        out.push('\n');
        out.push_str(&self.per_frame_boxes.to_csv_string());
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|source| Error::CannotWriteOutput {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Mean motion of the blocks a box covers, rounded to integers with ties
/// away from zero.
///
/// Blocks vote when their center lies strictly inside the box. A box too
/// small (or placed between centers) to cover any falls back to the mean
/// over the whole field, reading the dominant motion of the scene.
pub fn aggregate_box_motion(field: &MotionField, bbox: &BoundingBox) -> MotionVector {
    let bs = field.params().block_size;
    let half = bs / 2;
    let mut sum_x = 0i64;
    let mut sum_y = 0i64;
    let mut count = 0i64;
    for by in 0..field.blocks_y() {
        let cy = by as u64 * bs as u64 + half as u64;
        if !(cy > bbox.y() as u64 && cy < bbox.bottom()) {
            continue;
        }
        for bx in 0..field.blocks_x() {
            let cx = bx as u64 * bs as u64 + half as u64;
            if cx > bbox.x() as u64 && cx < bbox.right() {
                let v = field.vector(bx, by);
                sum_x += v.dx as i64;
                sum_y += v.dy as i64;
                count += 1;
            }
        }
    }
    if count == 0 {
        return field.mean_vector();
    }
    MotionVector::new(round_half_away(sum_x, count), round_half_away(sum_y, count))
}

/// Advances a detection set by one frame using the motion field between the
/// set's frame and the next.
///
/// Each box is translated by its own aggregated motion vector, then clamped
/// inside the frame with its size unchanged. Labels and scores carry over;
/// the frame index is incremented.
pub fn extrapolate_detections(
    dets: &DetectionSet,
    field: &MotionField,
    frame_w: u32,
    frame_h: u32,
) -> DetectionSet {
    let mut out = DetectionSet::new(dets.frame_index() + 1);
    for det in dets.boxes() {
        let v = aggregate_box_motion(field, &det.bbox);
        let bbox = det
            .bbox
            .translated_clamped(v.dx as i64, v.dy as i64, frame_w, frame_h);
        out.push(Detection::new(bbox, det.label, det.score));
    }
    out
}

/// Runs the anchor/extrapolation schedule over a whole sequence.
///
/// The oracle track must cover every frame of `seq`. Anchors take the
/// oracle's detections verbatim; the remaining frames chain
/// [`extrapolate_detections`] on per-transition motion fields.
pub fn run_pipeline(
    seq: &FrameSequence,
    oracle: &mut DetectionOracle,
    ew: ExtrapolationWindow,
    params: MotionParams,
) -> Result<PipelineResult> {
    let mut cache = FieldCache::new(seq.len(), params);
    run_pipeline_cached(seq, oracle, ew, &mut cache)
}

/// [`run_pipeline`] reusing a shared [`FieldCache`], so sweeps over several
/// windows match each frame transition only once.
pub fn run_pipeline_cached(
    seq: &FrameSequence,
    oracle: &mut DetectionOracle,
    ew: ExtrapolationWindow,
    cache: &mut FieldCache,
) -> Result<PipelineResult> {
    let frames = seq.len();
    if oracle.track().len() < frames {
        return Err(Error::OracleLengthMismatch {
            oracle: oracle.track().len(),
            frames,
        });
    }
    let (width, height) = (seq.width(), seq.height());
    let mut track = DetectionTrack::empty(0);
    let mut inference_frames = Vec::with_capacity(frames.div_ceil(ew.get()));
    for f in 0..frames {
        if f % ew.get() == 0 {
            let set = oracle.query(f).clone();
            inference_frames.push(f);
            track.push_set(set);
        } else {
            let field = cache.get(seq, f)?;
            let next = extrapolate_detections(track.frame(f - 1), field, width, height);
            track.push_set(next);
        }
    }
    Ok(PipelineResult {
        per_frame_boxes: track,
        inference_frames,
        ew,
    })
}
