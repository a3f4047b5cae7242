//! Writes a synthetic scene for the `run` subcommand: a noise sequence
//! panning at a fixed velocity, with one ground-truth box moving slightly
//! faster than the pan. The motion field tracks the pan, so extrapolated
//! boxes drift until the next anchor re-seeds them; sweeping the window
//! then shows both sides of the tradeoff.
//!
//! Usage: gen_scene OUT_DIR [FRAMES]

use mvsim::synth::{linear_box_track, translated_sequence};
use mvsim::BoundingBox;
use std::path::PathBuf;

const WIDTH: u32 = 256;
const HEIGHT: u32 = 128;
const PAN: (i32, i32) = (2, 1);
const BOX_VELOCITY: (i32, i32) = (3, 1);

fn main() {
    let mut args = std::env::args().skip(1);
    let out: PathBuf = match args.next() {
        Some(dir) => dir.into(),
        None => {
            eprintln!("usage: gen_scene OUT_DIR [FRAMES]");
            std::process::exit(1);
        }
    };
    let frames: usize = args
        .next()
        .map(|s| s.parse().expect("FRAMES must be an integer"))
        .unwrap_or(60);

    let seq = translated_sequence(2024, WIDTH, HEIGHT, frames, PAN);
    let start = BoundingBox::new(16, 16, 32, 32).unwrap();
    let truth = linear_box_track(start, BOX_VELOCITY, frames, WIDTH, HEIGHT)
        .expect("box escapes the frame; use fewer FRAMES");

    let frames_dir = out.join("frames");
    seq.save(&frames_dir).expect("write frames");
    truth
        .write_csv(&out.join("truth.csv"))
        .expect("write truth");

    println!(
        "wrote {frames} {WIDTH}x{HEIGHT} frames to {} and truth.csv alongside",
        frames_dir.display()
    );
}
