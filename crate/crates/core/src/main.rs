//! Command-line driver.
//!
//! Exit codes: 0 on success, 1 on validation errors, 2 on I/O errors.

use clap::{Parser, Subcommand};
use mvsim::{
    acp_utilization, compute_motion_field, emit_csv, load_frame_sequence, parse_annotations,
    run_sweep, simulate_network_traffic, EnergyConfig, Error, MemoryConfig, MotionParams,
    NetworkSpec, Result,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mvsim",
    version,
    about = "Continuous-vision SoC simulator: extrapolation-window sweeps, \
             block motion estimation, and accelerator traffic accounting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep extrapolation windows over a frame sequence and emit the
    /// accuracy/energy tradeoff as CSV.
    Run {
        /// Directory of frame_%06d.pgm files.
        #[arg(long)]
        frames: PathBuf,
        /// Ground-truth annotation CSV.
        #[arg(long)]
        truth: PathBuf,
        /// Detection CSV replayed as the detector (defaults to the truth).
        #[arg(long)]
        oracle: Option<PathBuf>,
        /// Comma-separated extrapolation windows, e.g. 1,2,4,8.
        #[arg(long, value_delimiter = ',', required = true)]
        ew: Vec<usize>,
        /// Network description CSV.
        #[arg(long)]
        network: PathBuf,
        /// Energy coefficient file.
        #[arg(long = "energy-config")]
        energy_config: PathBuf,
        /// L3 capacity in bytes.
        #[arg(long = "mem-l3", default_value_t = 2_097_152)]
        mem_l3: u64,
        /// Accelerator SRAM capacity in bytes.
        #[arg(long = "mem-sram", default_value_t = 524_288)]
        mem_sram: u64,
        /// Motion-estimation block size in pixels.
        #[arg(long, default_value_t = 16)]
        block: u32,
        /// Motion-estimation search range in pixels.
        #[arg(long, default_value_t = 8)]
        search: u32,
        /// Matching threshold for accuracy scoring.
        #[arg(long = "iou-threshold", default_value_t = 0.5)]
        iou_threshold: f64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Block-match two frames and write the motion field as CSV.
    Mv {
        /// Previous frame (PGM).
        #[arg(long)]
        prev: PathBuf,
        /// Current frame (PGM).
        #[arg(long)]
        curr: PathBuf,
        #[arg(long, default_value_t = 16)]
        block: u32,
        #[arg(long, default_value_t = 8)]
        search: u32,
        /// Output CSV path (block_x,block_y,dx,dy lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Route one inference's memory traffic and check the port budget.
    Traffic {
        /// Network description CSV.
        #[arg(long)]
        network: PathBuf,
        /// L3 capacity in bytes.
        #[arg(long, default_value_t = 2_097_152)]
        l3: u64,
        /// Accelerator SRAM capacity in bytes.
        #[arg(long, default_value_t = 524_288)]
        sram: u64,
        /// Frame rate for the bandwidth check.
        #[arg(long, default_value_t = 60)]
        fps: u32,
        /// Port bandwidth in bytes per second.
        #[arg(long = "acp-bw", default_value_t = 20_000_000_000)]
        acp_bw: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run {
            frames,
            truth,
            oracle,
            ew,
            network,
            energy_config,
            mem_l3,
            mem_sram,
            block,
            search,
            iou_threshold,
            out,
        } => {
            let seq = load_frame_sequence(&frames)?;
            let truth_track = parse_annotations(&truth, seq.len())?;
            let oracle_track = match &oracle {
                Some(path) => parse_annotations(path, seq.len())?,
                None => truth_track.clone(),
            };
            let net = NetworkSpec::from_csv(&network)?;
            let energy_cfg = EnergyConfig::from_file(&energy_config)?;
            let mem_cfg = MemoryConfig {
                l3_bytes: mem_l3,
                sram_bytes: mem_sram,
                ..MemoryConfig::default()
            };
            let params = MotionParams::new(block, search)?;
            let rows = run_sweep(
                &seq,
                &truth_track,
                &oracle_track,
                &ew,
                &net,
                &mem_cfg,
                &energy_cfg,
                params,
                iou_threshold,
            )?;
            emit_csv(&rows, &out)?;
            println!(
                "{} frames, {} windows -> {}",
                seq.len(),
                rows.len(),
                out.display()
            );
            for row in &rows {
                println!(
                    "  ew={:<3} inferences={:<4} mean_iou={:.4} loss={:+.2}pp energy={:.1} saving={:.1}%",
                    row.ew,
                    row.inferences,
                    row.mean_iou,
                    row.accuracy_loss_pp,
                    row.energy_total,
                    row.saving_fraction * 100.0
                );
            }
            Ok(())
        }
        Command::Mv {
            prev,
            curr,
            block,
            search,
            out,
        } => {
            let prev = mvsim::Frame::from_pgm(&prev)?;
            let curr = mvsim::Frame::from_pgm(&curr)?;
            let params = MotionParams::new(block, search)?;
            let field = compute_motion_field(&prev, &curr, params)?;
            field.write_csv(&out)?;
            println!(
                "{}x{} blocks -> {}",
                field.blocks_x(),
                field.blocks_y(),
                out.display()
            );
            Ok(())
        }
        Command::Traffic {
            network,
            l3,
            sram,
            fps,
            acp_bw,
            out,
        } => {
            let net = NetworkSpec::from_csv(&network)?;
            let cfg = MemoryConfig {
                l3_bytes: l3,
                sram_bytes: sram,
                acp_bw_bytes_per_s: acp_bw,
                fps,
            };
            cfg.validate()?;
            let report = simulate_network_traffic(&net, &cfg);
            let utilization = acp_utilization(&report, &cfg);
            let mut csv = report.to_csv_string();
            csv.push_str(&format!("#acp_utilization={utilization:.6}\n"));
            std::fs::write(&out, csv).map_err(|source| Error::CannotWriteOutput {
                path: out.clone(),
                source,
            })?;
            println!(
                "acp={} B dram={} B utilization={:.4} at {} fps -> {}",
                report.total_acp_bytes,
                report.total_dram_bytes,
                utilization,
                cfg.fps,
                out.display()
            );
            Ok(())
        }
    }
}
