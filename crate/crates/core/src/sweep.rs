//! Extrapolation-window sweeps joining accuracy and energy.
//!
//! One run of the pipeline per requested window, scored against ground
//! truth and priced by the energy model, emitted as a CSV for external
//! plotting. The `ew = 1` baseline is always computed, even when absent
//! from the request, so the loss and saving columns are well-defined.

use crate::annotations::DetectionTrack;
use crate::energy::{sequence_energy, EnergyConfig};
use crate::error::{Error, Result};
use crate::frame::FrameSequence;
use crate::metrics::sequence_accuracy;
use crate::motion::{FieldCache, MotionParams};
use crate::pipeline::{run_pipeline_cached, DetectionOracle, ExtrapolationWindow};
use crate::traffic::{simulate_network_traffic, MemoryConfig, NetworkSpec};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// One row of the tradeoff table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ew: usize,
    /// Oracle queries made over the sequence: `ceil(frames / ew)`.
    pub inferences: usize,
    pub mean_iou: f64,
    /// Mean-IoU loss against the `ew = 1` baseline, in percentage points.
    pub accuracy_loss_pp: f64,
    pub energy_total: f64,
    /// `1 - energy_total / baseline energy`.
    pub saving_fraction: f64,
}

/// Runs the pipeline at every requested window and joins the results.
///
/// `oracle_track` is replayed as the detector (pass the ground truth for an
/// ideal detector). Windows are deduplicated, the baseline `ew = 1` is
/// added, and rows come back sorted by window. Motion fields are cached
/// across windows, so each frame transition is matched once. Failures carry
/// the offending window.
#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    seq: &FrameSequence,
    truth: &DetectionTrack,
    oracle_track: &DetectionTrack,
    ews: &[usize],
    net: &NetworkSpec,
    mem_cfg: &MemoryConfig,
    energy_cfg: &EnergyConfig,
    motion: MotionParams,
    iou_threshold: f64,
) -> Result<Vec<SweepRow>> {
    if ews.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one extrapolation window is required".into(),
        ));
    }
    if !(iou_threshold > 0.0 && iou_threshold < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "iou threshold must be inside (0,1), got {iou_threshold}"
        )));
    }
    mem_cfg.validate()?;
    energy_cfg.validate()?;
    let traffic = simulate_network_traffic(net, mem_cfg);
    energy_cfg.validate_with_traffic(&traffic)?;

    let mut windows: BTreeSet<usize> = ews.iter().copied().collect();
    windows.insert(1);

    let mut cache = FieldCache::new(seq.len(), motion);
    let mut rows = Vec::with_capacity(windows.len());
    let mut baseline_iou = None;
    for ew in windows {
        let window = ExtrapolationWindow::new(ew).map_err(|e| e.at_window(ew))?;
        let mut oracle = DetectionOracle::new(oracle_track.clone());
        let result = run_pipeline_cached(seq, &mut oracle, window, &mut cache)
            .map_err(|e| e.at_window(ew))?;
        let accuracy =
            sequence_accuracy(&result, truth, iou_threshold).map_err(|e| e.at_window(ew))?;
        let energy = sequence_energy(energy_cfg, &result, &traffic);
        let baseline = *baseline_iou.get_or_insert(accuracy.mean_iou);
        rows.push(SweepRow {
            ew,
            inferences: result.inference_frames.len(),
            mean_iou: accuracy.mean_iou,
            accuracy_loss_pp: (baseline - accuracy.mean_iou) * 100.0,
            energy_total: energy.total,
            saving_fraction: energy.saving_fraction,
        });
    }
    Ok(rows)
}

pub const SWEEP_HEADER: &str =
    "ew,inferences,mean_iou,accuracy_loss_pp,energy_total,saving_fraction";

/// Renders sweep rows as CSV, sorted by window, fractions to six decimals.
/// Identical rows produce byte-identical output.
pub fn sweep_csv_string(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig("no sweep rows to emit".into()));
    }
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.ew);
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in sorted {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            r.ew, r.inferences, r.mean_iou, r.accuracy_loss_pp, r.energy_total, r.saving_fraction
        )
        .expect("string write");
    }
    Ok(out)
}

/// Writes [`sweep_csv_string`] to `out_path`.
pub fn emit_csv(rows: &[SweepRow], out_path: &Path) -> Result<()> {
    let text = sweep_csv_string(rows)?;
    fs::write(out_path, text).map_err(|source| Error::CannotWriteOutput {
        path: out_path.to_path_buf(),
        source,
    })
}
