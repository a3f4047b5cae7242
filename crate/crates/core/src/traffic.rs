//! External memory traffic of one accelerator inference.
//!
//! The accelerator keeps an output feature map on-chip when it fits local
//! SRAM. Anything larger must leave the chip: it is written once and read
//! back once by the next layer. The CPU cluster's L3, reached over the
//! coherency port, absorbs that round trip whenever the whole map fits,
//! acting as a bandwidth filter in front of DRAM. Weights have no reuse
//! within an inference and always stream from DRAM; the input image is read
//! from DRAM once; the final layer's output is written once so results
//! leave the accelerator.
//!
//! Routing is all-or-nothing per feature map. Partial caching, tiling and
//! replacement behavior are deliberately out of scope.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// One layer of the network, sizes in bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSpec {
    pub name: String,
    /// Output feature map size.
    pub ofmap_bytes: u64,
    pub weight_bytes: u64,
    /// Multiply-accumulate count; informational only.
    pub macs: u64,
}

impl LayerSpec {
    pub fn new(name: impl Into<String>, ofmap_bytes: u64, weight_bytes: u64, macs: u64) -> Self {
        LayerSpec {
            name: name.into(),
            ofmap_bytes,
            weight_bytes,
            macs,
        }
    }
}

/// A network in execution order plus its input image size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub layers: Vec<LayerSpec>,
    pub input_bytes: u64,
}

impl NetworkSpec {
    pub fn new(layers: Vec<LayerSpec>, input_bytes: u64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network has no layers".into()));
        }
        Ok(NetworkSpec {
            layers,
            input_bytes,
        })
    }

    /// The four-layer detector backbone the default energy coefficients are
    /// calibrated against: 1 MiB input, 7 MiB of weights, and activation
    /// maps that all pass the 2 MiB L3 filter. Under the default
    /// [`MemoryConfig`] it moves 8 MiB over ACP and 8 MiB over DRAM per
    /// inference.
    pub fn reference_detector() -> Self {
        const MIB: u64 = 1 << 20;
        NetworkSpec {
            layers: vec![
                LayerSpec::new("conv1", MIB, MIB, 57_671_680),
                LayerSpec::new("conv2", MIB, 2 * MIB, 115_343_360),
                LayerSpec::new("conv3", MIB, 2 * MIB, 115_343_360),
                LayerSpec::new("conv4", 2 * MIB, 2 * MIB, 115_343_360),
            ],
            input_bytes: MIB,
        }
    }

    /// Loads a network from CSV: a `name,ofmap_bytes,weight_bytes,macs`
    /// header, then one layer per line in execution order.
    ///
    /// A single optional row named `input` declares the network input size
    /// through its `ofmap_bytes` field (weights and MACs must be 0); it is
    /// not a layer.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        parse_network(&text).map_err(|(line, e)| e.at_line(path, line))
    }
}

const NETWORK_HEADER: &str = "name,ofmap_bytes,weight_bytes,macs";

fn parse_network(text: &str) -> std::result::Result<NetworkSpec, (usize, Error)> {
    let mut layers = Vec::new();
    let mut input_bytes: Option<u64> = None;
    let mut saw_header = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != NETWORK_HEADER {
                return Err((
                    lineno + 1,
                    Error::MalformedLine(format!("expected header `{NETWORK_HEADER}`")),
                ));
            }
            saw_header = true;
            continue;
        }
        let layer = parse_layer_line(line).map_err(|e| (lineno + 1, e))?;
        if layer.name == "input" {
            if layer.weight_bytes != 0 || layer.macs != 0 {
                return Err((
                    lineno + 1,
                    Error::MalformedLine("input row must have zero weights and macs".into()),
                ));
            }
            if input_bytes.replace(layer.ofmap_bytes).is_some() {
                return Err((
                    lineno + 1,
                    Error::MalformedLine("duplicate input row".into()),
                ));
            }
            continue;
        }
        layers.push(layer);
    }
    if !saw_header {
        return Err((1, Error::MalformedLine("missing header line".into())));
    }
    NetworkSpec::new(layers, input_bytes.unwrap_or(0)).map_err(|e| (1, e))
}

fn parse_layer_line(line: &str) -> Result<LayerSpec> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(Error::MalformedLine(format!(
            "expected 4 fields, got {}",
            fields.len()
        )));
    }
    if fields[0].is_empty() {
        return Err(Error::MalformedLine("empty layer name".into()));
    }
    let num = |s: &str, what: &str| -> Result<u64> {
        s.parse()
            .map_err(|_| Error::MalformedLine(format!("bad {what} `{s}`")))
    };
    Ok(LayerSpec::new(
        fields[0],
        num(fields[1], "ofmap_bytes")?,
        num(fields[2], "weight_bytes")?,
        num(fields[3], "macs")?,
    ))
}

/// Memory-system parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryConfig {
    /// CPU-cluster L3 capacity usable by the accelerator.
    pub l3_bytes: u64,
    /// Accelerator-local SRAM capacity.
    pub sram_bytes: u64,
    /// Coherency-port bandwidth.
    pub acp_bw_bytes_per_s: u64,
    /// Target frame rate for the bandwidth check.
    pub fps: u32,
}

impl Default for MemoryConfig {
    /// 2 MiB L3, 512 KiB SRAM, 20 GB/s port bandwidth, 60 fps.
    fn default() -> Self {
        MemoryConfig {
            l3_bytes: 2 * 1024 * 1024,
            sram_bytes: 512 * 1024,
            acp_bw_bytes_per_s: 20_000_000_000,
            fps: 60,
        }
    }
}

impl MemoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l3_bytes == 0
            || self.sram_bytes == 0
            || self.acp_bw_bytes_per_s == 0
            || self.fps == 0
        {
            return Err(Error::InvalidConfig(
                "memory config values must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Traffic attributed to one report row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTraffic {
    pub name: String,
    pub acp_bytes: u64,
    pub dram_bytes: u64,
}

/// Per-inference traffic split between the L3 path and DRAM.
///
/// The first row, named `input`, carries the network input read; the rest
/// follow the layer order. Totals always equal the sum of the rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficReport {
    pub per_layer: Vec<LayerTraffic>,
    pub total_acp_bytes: u64,
    pub total_dram_bytes: u64,
}

impl TrafficReport {
    /// `name,acp_bytes,dram_bytes` rows plus a `total` row.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("name,acp_bytes,dram_bytes\n");
        for row in &self.per_layer {
            writeln!(out, "{},{},{}", row.name, row.acp_bytes, row.dram_bytes)
                .expect("string write");
        }
        writeln!(
            out,
            "total,{},{}",
            self.total_acp_bytes, self.total_dram_bytes
        )
        .expect("string write");
        out
    }
}

/// Routes every byte of one inference to the L3 path or DRAM.
///
/// Per layer: weights stream from DRAM; a non-final output map that
/// exceeds SRAM is written and re-read (twice its size) over ACP if it fits
/// L3, else over DRAM; one that fits SRAM moves nothing. The final output
/// map is written once, via ACP if it fits L3. The network input is a
/// single DRAM read.
pub fn simulate_network_traffic(net: &NetworkSpec, cfg: &MemoryConfig) -> TrafficReport {
    let mut per_layer = vec![LayerTraffic {
        name: "input".into(),
        acp_bytes: 0,
        dram_bytes: net.input_bytes,
    }];
    let last = net.layers.len() - 1;
    for (i, layer) in net.layers.iter().enumerate() {
        let mut acp = 0u64;
        let mut dram = layer.weight_bytes;
        if i == last {
            // Results leave the accelerator exactly once.
            if layer.ofmap_bytes <= cfg.l3_bytes {
                acp += layer.ofmap_bytes;
            } else {
                dram += layer.ofmap_bytes;
            }
        } else if layer.ofmap_bytes > cfg.sram_bytes {
            let round_trip = 2 * layer.ofmap_bytes;
            if layer.ofmap_bytes <= cfg.l3_bytes {
                acp += round_trip;
            } else {
                dram += round_trip;
            }
        }
        per_layer.push(LayerTraffic {
            name: layer.name.clone(),
            acp_bytes: acp,
            dram_bytes: dram,
        });
    }
    let total_acp_bytes = per_layer.iter().map(|l| l.acp_bytes).sum();
    let total_dram_bytes = per_layer.iter().map(|l| l.dram_bytes).sum();
    TrafficReport {
        per_layer,
        total_acp_bytes,
        total_dram_bytes,
    }
}

/// Fraction of the port bandwidth one inference per frame consumes at the
/// configured frame rate; values above 1 mean the filter is infeasible.
pub fn acp_utilization(report: &TrafficReport, cfg: &MemoryConfig) -> f64 {
    report.total_acp_bytes as f64 * cfg.fps as f64 / cfg.acp_bw_bytes_per_s as f64
}
