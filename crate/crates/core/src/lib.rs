//! Desk-scale simulator of a continuous-vision SoC pipeline.
//!
//! Running a detection network on every camera frame is the energy
//! bottleneck of on-device vision. This crate models the alternative:
//! anchor frames query the detector, and the frames in between reuse the
//! block motion vectors an image signal processor already computes for
//! temporal denoising, shifting the previous frame's boxes instead of
//! re-inferring. A companion model routes the accelerator's inter-layer
//! feature maps through the CPU cluster's L3 (reached over the coherency
//! port) so most activation traffic never touches DRAM, and an energy model
//! prices both kinds of frame. Sweeping the extrapolation window produces
//! the accuracy/energy tradeoff as a CSV table.
//!
//! The pieces compose as `frame` -> `motion` -> `pipeline` -> `metrics`,
//! with `traffic` + `energy` pricing each inference and `sweep` driving
//! whole runs. Everything is deterministic: fixed inputs produce
//! byte-identical outputs regardless of thread count.

pub mod annotations;
pub mod energy;
pub mod error;
pub mod frame;
pub mod metrics;
pub mod motion;
pub mod pipeline;
pub mod sweep;
pub mod synth;
pub mod traffic;

pub use annotations::{
    parse_annotations, polygon_to_box, BoundingBox, Detection, DetectionSet, DetectionTrack,
};
pub use energy::{frame_energy, sequence_energy, EnergyConfig, EnergySummary};
pub use error::{Error, Result};
pub use frame::{load_frame_sequence, Frame, FrameSequence};
pub use metrics::{iou, score_frame, sequence_accuracy, AccuracyReport, FrameScore};
pub use motion::{
    block_sad, compute_motion_field, FieldCache, MotionField, MotionParams, MotionVector,
};
pub use pipeline::{
    aggregate_box_motion, extrapolate_detections, run_pipeline, run_pipeline_cached,
    DetectionOracle, ExtrapolationWindow, PipelineResult,
};
pub use sweep::{emit_csv, run_sweep, sweep_csv_string, SweepRow};
pub use traffic::{
    acp_utilization, simulate_network_traffic, LayerSpec, LayerTraffic, MemoryConfig, NetworkSpec,
    TrafficReport,
};
