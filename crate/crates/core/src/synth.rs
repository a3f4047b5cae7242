//! Deterministic synthetic scenes.
//!
//! Block matching and the extrapolation pipeline are exercised with
//! fixed-seed noise imagery: a large noise plane is generated once and
//! frames are cut from it through a sliding window, so consecutive frames
//! are exact integer translations of each other. ChaCha8 keeps the pixel
//! stream identical across platforms and runs.

use crate::annotations::{BoundingBox, Detection, DetectionTrack};
use crate::error::{Error, Result};
use crate::frame::{Frame, FrameSequence};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform-noise frame from a fixed seed.
pub fn noise_frame(seed: u64, width: u32, height: u32) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pixels = vec![0u8; width as usize * height as usize];
    rng.fill_bytes(&mut pixels);
    Frame::new(width, height, pixels).expect("valid dimensions")
}

/// A `(prev, curr)` pair where `curr(p) = prev(p + shift)` wherever both
/// samples exist; blocks matched with displacement `shift` have zero SAD.
pub fn translated_pair(seed: u64, width: u32, height: u32, shift: (i32, i32)) -> (Frame, Frame) {
    let seq = translated_sequence(seed, width, height, 2, shift);
    (seq.frame(0).clone(), seq.frame(1).clone())
}

/// A sequence of `frames` windows over one noise plane, each window offset
/// by `shift` pixels from the previous one.
///
/// Consecutive frames satisfy `frame[f](p) = frame[f-1](p + shift)`, so an
/// exhaustive block matcher reports exactly `shift` for every block whose
/// displaced window stays in bounds.
pub fn translated_sequence(
    seed: u64,
    width: u32,
    height: u32,
    frames: usize,
    shift: (i32, i32),
) -> FrameSequence {
    assert!(frames >= 1);
    let steps = (frames - 1) as i64;
    let (sx, sy) = (shift.0 as i64, shift.1 as i64);
    let base_w = width as i64 + steps * sx.abs();
    let base_h = height as i64 + steps * sy.abs();
    let base = noise_frame(seed, base_w as u32, base_h as u32);

    // Window origin of frame f; starts where all later offsets stay inside.
    let origin = |f: i64| -> (i64, i64) {
        let ox = steps * (-sx).max(0) + f * sx;
        let oy = steps * (-sy).max(0) + f * sy;
        (ox, oy)
    };

    let mut out = Vec::with_capacity(frames);
    for f in 0..frames as i64 {
        let (ox, oy) = origin(f);
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height as i64 {
            let row = base.row((y + oy) as u32);
            let start = ox as usize;
            pixels.extend_from_slice(&row[start..start + width as usize]);
        }
        out.push(Frame::new(width, height, pixels).expect("valid dimensions"));
    }
    FrameSequence::new(out).expect("non-empty, uniform")
}

/// A sequence of `frames` identical noise frames.
pub fn static_sequence(seed: u64, width: u32, height: u32, frames: usize) -> FrameSequence {
    let f = noise_frame(seed, width, height);
    FrameSequence::new(vec![f; frames]).expect("non-empty, uniform")
}

/// Ground truth with one box per frame, translated by `shift` each frame.
///
/// Errors if any translated box leaves the `frame_w` x `frame_h` bounds;
/// positions are exact, never clamped.
pub fn linear_box_track(
    start: BoundingBox,
    shift: (i32, i32),
    frames: usize,
    frame_w: u32,
    frame_h: u32,
) -> Result<DetectionTrack> {
    let mut track = DetectionTrack::empty(frames);
    for f in 0..frames {
        let dx = shift.0 as i64 * f as i64;
        let dy = shift.1 as i64 * f as i64;
        let x = start.x() as i64 + dx;
        let y = start.y() as i64 + dy;
        if x < 0
            || y < 0
            || x + start.w() as i64 > frame_w as i64
            || y + start.h() as i64 > frame_h as i64
        {
            return Err(Error::InvalidConfig(format!(
                "box leaves {frame_w}x{frame_h} frame at index {f}"
            )));
        }
        let bbox = BoundingBox::new(x as u32, y as u32, start.w(), start.h())?;
        track.insert(f, Detection::new(bbox, 0, 1.0))?;
    }
    Ok(track)
}
