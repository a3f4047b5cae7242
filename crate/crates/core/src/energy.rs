//! Per-frame and per-sequence energy accounting.
//!
//! Energy units are relative, not joules: only ratios (the saving against
//! an every-frame-inference baseline) are meaningful. Every frame pays for
//! the camera sensor, the image pipeline, and static power, since the
//! capture path runs regardless of what happens downstream. An inference
//! frame adds the accelerator's compute energy plus the memory traffic of
//! one inference; an extrapolated frame adds only the small cost of reusing
//! motion vectors the image pipeline computes anyway for denoising.
//!
//! The default coefficients are calibrated so that one inference frame on
//! the reference detector costs exactly 100 units: sensor 10, image
//! pipeline 4, static 1, accelerator compute 45, memory traffic 40 (8 MiB
//! DRAM at 4 units/MiB plus 8 MiB ACP at 1 unit/MiB). Compute stays at 45%
//! of the frame, below the one-half ceiling enforced by
//! [`EnergyConfig::validate_with_traffic`]. An extrapolated frame costs 16
//! units, so halving the inference rate saves 42% of the baseline.

use crate::error::{Error, Result};
use crate::pipeline::PipelineResult;
use crate::traffic::TrafficReport;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Energy coefficients, in abstract units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConfig {
    /// Camera sensor, per frame.
    pub e_sensor: f64,
    /// Image signal processing, per frame.
    pub e_isp: f64,
    /// Accelerator compute, per inference.
    pub e_nnx_inference: f64,
    /// DRAM transfer, per byte.
    pub e_dram_per_byte: f64,
    /// L3/coherency-port transfer, per byte.
    pub e_acp_per_byte: f64,
    /// Motion-vector extrapolation, per extrapolated frame.
    pub e_extrapolation: f64,
    /// Static/leakage share, per frame.
    pub e_static: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            e_sensor: 10.0,
            e_isp: 4.0,
            e_nnx_inference: 45.0,
            e_dram_per_byte: 1.0 / 262_144.0,  // 4 units per MiB
            e_acp_per_byte: 1.0 / 1_048_576.0, // 1 unit per MiB
            e_extrapolation: 1.0,
            e_static: 1.0,
        }
    }
}

const CONFIG_KEYS: [&str; 7] = [
    "e_sensor",
    "e_isp",
    "e_nnx_inference",
    "e_dram_per_byte",
    "e_acp_per_byte",
    "e_extrapolation",
    "e_static",
];

impl EnergyConfig {
    /// Loads `key = value` lines; keys are exactly the seven field names.
    /// Unknown keys are errors, missing keys keep their defaults. Blank
    /// lines and `#` comments are ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = EnergyConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let wrap = |e: Error| e.at_line(path, lineno + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| wrap(Error::InvalidConfig("expected `key = value`".into())))?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                wrap(Error::InvalidConfig(format!(
                    "bad value for `{key}`: `{}`",
                    value.trim()
                )))
            })?;
            let slot = match key {
                "e_sensor" => &mut cfg.e_sensor,
                "e_isp" => &mut cfg.e_isp,
                "e_nnx_inference" => &mut cfg.e_nnx_inference,
                "e_dram_per_byte" => &mut cfg.e_dram_per_byte,
                "e_acp_per_byte" => &mut cfg.e_acp_per_byte,
                "e_extrapolation" => &mut cfg.e_extrapolation,
                "e_static" => &mut cfg.e_static,
                _ => {
                    return Err(wrap(Error::InvalidConfig(format!(
                        "unknown key `{key}` (known keys: {})",
                        CONFIG_KEYS.join(", ")
                    ))))
                }
            };
            *slot = value;
        }
        cfg.validate().map_err(|e| e.in_file(path))?;
        Ok(cfg)
    }

    /// Coefficients must be finite and non-negative, and on-chip transfer
    /// must be cheaper than DRAM; the latter is the premise of using the L3
    /// as a bandwidth filter at all.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("e_sensor", self.e_sensor),
            ("e_isp", self.e_isp),
            ("e_nnx_inference", self.e_nnx_inference),
            ("e_dram_per_byte", self.e_dram_per_byte),
            ("e_acp_per_byte", self.e_acp_per_byte),
            ("e_extrapolation", self.e_extrapolation),
            ("e_static", self.e_static),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.e_acp_per_byte >= self.e_dram_per_byte {
            return Err(Error::InvalidConfig(format!(
                "e_acp_per_byte ({}) must be below e_dram_per_byte ({})",
                self.e_acp_per_byte, self.e_dram_per_byte
            )));
        }
        Ok(())
    }

    /// Accelerator-compute share of one inference frame.
    pub fn nnx_share(&self, traffic: &TrafficReport) -> f64 {
        self.e_nnx_inference / frame_energy(self, true, traffic)
    }

    /// Rejects calibrations where accelerator compute exceeds half of the
    /// inference-frame energy.
    pub fn validate_with_traffic(&self, traffic: &TrafficReport) -> Result<()> {
        let baseline = frame_energy(self, true, traffic);
        if self.e_nnx_inference > 0.5 * baseline {
            return Err(Error::InvalidConfig(format!(
                "e_nnx_inference ({}) exceeds half the inference-frame energy ({baseline})",
                self.e_nnx_inference
            )));
        }
        Ok(())
    }
}

/// Energy of a single frame.
///
/// Inference frames pay sensor + isp + static + accelerator compute + the
/// memory traffic of one inference; extrapolated frames pay sensor + isp +
/// static + extrapolation. `traffic` is ignored for extrapolated frames.
pub fn frame_energy(cfg: &EnergyConfig, is_inference: bool, traffic: &TrafficReport) -> f64 {
    let capture = cfg.e_sensor + cfg.e_isp + cfg.e_static;
    if is_inference {
        capture
            + cfg.e_nnx_inference
            + traffic.total_dram_bytes as f64 * cfg.e_dram_per_byte
            + traffic.total_acp_bytes as f64 * cfg.e_acp_per_byte
    } else {
        capture + cfg.e_extrapolation
    }
}

/// Sequence energy with a per-component breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySummary {
    /// Sum over all frames; equals the sum of `per_component` exactly.
    pub total: f64,
    pub per_component: BTreeMap<String, f64>,
    /// Energy of the same sequence with an inference on every frame.
    pub baseline_total: f64,
    /// `1 - total / baseline_total`; zero when every frame is an anchor.
    pub saving_fraction: f64,
}

fn component_totals(
    cfg: &EnergyConfig,
    frames: usize,
    inferences: usize,
    traffic: &TrafficReport,
) -> BTreeMap<String, f64> {
    let n = frames as f64;
    let n_inf = inferences as f64;
    let n_ext = (frames - inferences) as f64;
    BTreeMap::from([
        ("sensor".to_string(), n * cfg.e_sensor),
        ("isp".to_string(), n * cfg.e_isp),
        ("static".to_string(), n * cfg.e_static),
        ("nnx".to_string(), n_inf * cfg.e_nnx_inference),
        (
            "dram".to_string(),
            n_inf * (traffic.total_dram_bytes as f64 * cfg.e_dram_per_byte),
        ),
        (
            "acp".to_string(),
            n_inf * (traffic.total_acp_bytes as f64 * cfg.e_acp_per_byte),
        ),
        ("extrapolation".to_string(), n_ext * cfg.e_extrapolation),
    ])
}

/// Totals the energy of a pipeline run.
///
/// The baseline charges every frame as an inference frame; computing both
/// totals from identical component expressions keeps the saving exactly
/// zero when the run itself inferred every frame.
pub fn sequence_energy(
    cfg: &EnergyConfig,
    result: &PipelineResult,
    traffic: &TrafficReport,
) -> EnergySummary {
    let frames = result.per_frame_boxes.len();
    let inferences = result.inference_frames.len();
    let per_component = component_totals(cfg, frames, inferences, traffic);
    let total: f64 = per_component.values().sum();
    let baseline_total: f64 = component_totals(cfg, frames, frames, traffic)
        .values()
        .sum();
    let saving_fraction = if baseline_total > 0.0 {
        1.0 - total / baseline_total
    } else {
        0.0
    };
    EnergySummary {
        total,
        per_component,
        baseline_total,
        saving_fraction,
    }
}
