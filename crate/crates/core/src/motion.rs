//! Per-block motion estimation between consecutive frames.
//!
//! Exhaustive full-search block matching with a sum-of-absolute-differences
//! cost. The frame is tiled into `block_size` squares (residual pixels on the
//! right/bottom edges are not assigned blocks) and every displacement within
//! `search_range` whose window stays inside the previous frame is scored.
//! Candidates falling outside the frame are skipped, not padded, so border
//! blocks are not biased toward zero motion.
//!
//! Ties are broken deterministically: lowest SAD, then smallest `dx*dx +
//! dy*dy`, then first in raster order of `(dy, dx)`. The result is a pure
//! function of the two frames and the parameters, independent of thread
//! count.

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameSequence};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Displacement of a block between two frames, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub fn new(dx: i32, dy: i32) -> Self {
        MotionVector { dx, dy }
    }

    fn magnitude_sq(&self) -> i64 {
        self.dx as i64 * self.dx as i64 + self.dy as i64 * self.dy as i64
    }
}

/// Block-matching parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MotionParams {
    pub block_size: u32,
    pub search_range: u32,
}

impl Default for MotionParams {
    /// 16-pixel macroblocks searched within +/-8 pixels.
    fn default() -> Self {
        MotionParams {
            block_size: 16,
            search_range: 8,
        }
    }
}

impl MotionParams {
    pub fn new(block_size: u32, search_range: u32) -> Result<Self> {
        if block_size < 4 {
            return Err(Error::InvalidConfig(format!(
                "block size must be at least 4, got {block_size}"
            )));
        }
        if search_range < 1 {
            return Err(Error::InvalidConfig(
                "search range must be at least 1".into(),
            ));
        }
        Ok(MotionParams {
            block_size,
            search_range,
        })
    }
}

/// Grid of motion vectors, one per block, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionField {
    blocks_x: usize,
    blocks_y: usize,
    vectors: Vec<MotionVector>,
    params: MotionParams,
}

impl MotionField {
    /// Builds a field from raw vectors; the grid must be non-empty and
    /// `vectors.len()` must equal `blocks_x * blocks_y`.
    pub fn from_vectors(
        blocks_x: usize,
        blocks_y: usize,
        vectors: Vec<MotionVector>,
        params: MotionParams,
    ) -> Result<Self> {
        if blocks_x == 0 || blocks_y == 0 || vectors.len() != blocks_x * blocks_y {
            return Err(Error::InvalidConfig(format!(
                "vector grid {}x{} does not match {} vectors",
                blocks_x,
                blocks_y,
                vectors.len()
            )));
        }
        Ok(MotionField {
            blocks_x,
            blocks_y,
            vectors,
            params,
        })
    }

    pub fn blocks_x(&self) -> usize {
        self.blocks_x
    }

    pub fn blocks_y(&self) -> usize {
        self.blocks_y
    }

    pub fn params(&self) -> MotionParams {
        self.params
    }

    pub fn vector(&self, bx: usize, by: usize) -> MotionVector {
        self.vectors[by * self.blocks_x + bx]
    }

    pub fn vectors(&self) -> &[MotionVector] {
        &self.vectors
    }

    /// Mean vector over the whole grid, rounded to the nearest integer with
    /// ties away from zero.
    pub fn mean_vector(&self) -> MotionVector {
        let n = self.vectors.len() as i64;
        let sum_x: i64 = self.vectors.iter().map(|v| v.dx as i64).sum();
        let sum_y: i64 = self.vectors.iter().map(|v| v.dy as i64).sum();
        MotionVector::new(round_half_away(sum_x, n), round_half_away(sum_y, n))
    }

    /// One `block_x,block_y,dx,dy` line per block, row-major.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for by in 0..self.blocks_y {
            for bx in 0..self.blocks_x {
                let v = self.vector(bx, by);
                writeln!(out, "{bx},{by},{},{}", v.dx, v.dy).expect("string write");
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|source| Error::CannotWriteOutput {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Rounds `sum / count` to the nearest integer, ties away from zero.
/// `count` must be positive.
pub(crate) fn round_half_away(sum: i64, count: i64) -> i32 {
    debug_assert!(count > 0);
    let q = if sum >= 0 {
        (2 * sum + count) / (2 * count)
    } else {
        -((-2 * sum + count) / (2 * count))
    };
    q as i32
}

/// Sum of absolute differences between the block of `curr` at
/// `block_origin` and the block of `prev` displaced by `displacement`.
///
/// Both windows must lie fully inside the frames; callers enumerating
/// candidates are expected to pre-filter out-of-bounds displacements.
pub fn block_sad(
    prev: &Frame,
    curr: &Frame,
    block_origin: (u32, u32),
    displacement: MotionVector,
    block_size: u32,
) -> Result<u64> {
    if prev.width() != curr.width() || prev.height() != curr.height() {
        return Err(Error::FrameSizeMismatch {
            prev_w: prev.width(),
            prev_h: prev.height(),
            curr_w: curr.width(),
            curr_h: curr.height(),
        });
    }
    let (x, y) = block_origin;
    let (w, h) = (curr.width() as i64, curr.height() as i64);
    let bs = block_size as i64;
    let curr_ok = (x as i64) + bs <= w && (y as i64) + bs <= h;
    let px = x as i64 + displacement.dx as i64;
    let py = y as i64 + displacement.dy as i64;
    let prev_ok = px >= 0 && py >= 0 && px + bs <= w && py + bs <= h;
    if !curr_ok || !prev_ok {
        return Err(Error::DisplacementOutOfBounds {
            x,
            y,
            dx: displacement.dx,
            dy: displacement.dy,
        });
    }
    Ok(sad_unchecked(
        prev,
        curr,
        x as usize,
        y as usize,
        displacement.dx,
        displacement.dy,
        block_size as usize,
    ))
}

/// SAD over pre-validated windows. The hot loop of the whole crate.
#[inline]
fn sad_unchecked(
    prev: &Frame,
    curr: &Frame,
    x: usize,
    y: usize,
    dx: i32,
    dy: i32,
    bs: usize,
) -> u64 {
    let w = curr.width() as usize;
    let px = (x as i64 + dx as i64) as usize;
    let py = (y as i64 + dy as i64) as usize;
    let c_start = y * w + x;
    let p_start = py * w + px;
    let c = &curr.pixels()[c_start..];
    let p = &prev.pixels()[p_start..];
    #[cfg(target_arch = "x86_64")]
    if bs.is_multiple_of(16) {
        // Safety: the caller validated that both windows lie inside the
        // frames, so every 16-byte load below stays in bounds.
        return unsafe { sad_rows_sse2(c, p, w, bs) };
    }
    sad_rows_scalar(c, p, w, bs)
}

fn sad_rows_scalar(c: &[u8], p: &[u8], stride: usize, bs: usize) -> u64 {
    let mut total = 0u64;
    for row in 0..bs {
        let c = &c[row * stride..row * stride + bs];
        let p = &p[row * stride..row * stride + bs];
        let mut row_sum = 0u32;
        for (a, b) in c.iter().zip(p) {
            row_sum += a.abs_diff(*b) as u32;
        }
        total += row_sum as u64;
    }
    total
}

/// `psadbw`-based SAD for block sizes that are multiples of 16. SSE2 is
/// part of the x86-64 baseline, so no runtime detection is needed.
#[cfg(target_arch = "x86_64")]
#[inline]
unsafe fn sad_rows_sse2(c: &[u8], p: &[u8], stride: usize, bs: usize) -> u64 {
    use std::arch::x86_64::*;
    debug_assert!(bs.is_multiple_of(16));
    debug_assert!((bs - 1) * stride + bs <= c.len() && (bs - 1) * stride + bs <= p.len());
    let mut acc = _mm_setzero_si128();
    for row in 0..bs {
        for chunk in (0..bs).step_by(16) {
            let off = row * stride + chunk;
            let cv = _mm_loadu_si128(c.as_ptr().add(off) as *const __m128i);
            let pv = _mm_loadu_si128(p.as_ptr().add(off) as *const __m128i);
            acc = _mm_add_epi64(acc, _mm_sad_epu8(cv, pv));
        }
    }
    let low = _mm_cvtsi128_si64(acc) as u64;
    let high = _mm_cvtsi128_si64(_mm_unpackhi_epi64(acc, acc)) as u64;
    low + high
}

/// Best in-bounds displacement for one block, per the documented tie-break.
fn search_block(prev: &Frame, curr: &Frame, x: u32, y: u32, params: MotionParams) -> MotionVector {
    let bs = params.block_size as usize;
    let range = params.search_range as i32;
    let (w, h) = (curr.width() as i64, curr.height() as i64);
    let (xi, yi) = (x as i64, y as i64);

    // A zero SAD at zero displacement cannot be beaten: SAD is non-negative
    // and every other candidate loses the magnitude tie-break.
    let zero_sad = sad_unchecked(prev, curr, x as usize, y as usize, 0, 0, bs);
    if zero_sad == 0 {
        return MotionVector::default();
    }

    let mut best = MotionVector::default();
    let mut best_sad = zero_sad;
    let mut best_mag = 0i64;
    for dy in -range..=range {
        let py = yi + dy as i64;
        if py < 0 || py + bs as i64 > h {
            continue;
        }
        for dx in -range..=range {
            if dx == 0 && dy == 0 {
                continue;
            }
            let px = xi + dx as i64;
            if px < 0 || px + bs as i64 > w {
                continue;
            }
            let sad = sad_unchecked(prev, curr, x as usize, y as usize, dx, dy, bs);
            let cand = MotionVector::new(dx, dy);
            let mag = cand.magnitude_sq();
            // Strict comparison keeps the first candidate in raster order
            // among (sad, magnitude) ties.
            if sad < best_sad || (sad == best_sad && mag < best_mag) {
                best = cand;
                best_sad = sad;
                best_mag = mag;
            }
        }
    }
    best
}

/// Exhaustive block matching between two same-sized frames.
///
/// The grid is `floor(width / block_size)` by `floor(height / block_size)`
/// blocks of `curr`; each gets the displacement into `prev` minimizing the
/// SAD, with the tie-break documented at module level.
pub fn compute_motion_field(
    prev: &Frame,
    curr: &Frame,
    params: MotionParams,
) -> Result<MotionField> {
    if prev.width() != curr.width() || prev.height() != curr.height() {
        return Err(Error::FrameSizeMismatch {
            prev_w: prev.width(),
            prev_h: prev.height(),
            curr_w: curr.width(),
            curr_h: curr.height(),
        });
    }
    let bs = params.block_size;
    let blocks_x = (curr.width() / bs) as usize;
    let blocks_y = (curr.height() / bs) as usize;
    if blocks_x == 0 || blocks_y == 0 {
        return Err(Error::FrameTooSmall {
            w: curr.width(),
            h: curr.height(),
            block: bs,
        });
    }

    // Blocks are independent; each index maps to exactly one output slot,
    // so the parallel map is deterministic.
    let vectors: Vec<MotionVector> = (0..blocks_x * blocks_y)
        .into_par_iter()
        .map(|i| {
            let bx = (i % blocks_x) as u32;
            let by = (i / blocks_x) as u32;
            search_block(prev, curr, bx * bs, by * bs, params)
        })
        .collect();

    MotionField::from_vectors(blocks_x, blocks_y, vectors, params)
}

/// Lazily computed per-transition motion fields for one sequence.
///
/// Entry `f` holds the field between frames `f-1` and `f`. Sweeps over
/// several extrapolation windows share the cache so each transition is
/// matched at most once.
#[derive(Debug)]
pub struct FieldCache {
    params: MotionParams,
    fields: Vec<Option<MotionField>>,
}

impl FieldCache {
    pub fn new(sequence_len: usize, params: MotionParams) -> Self {
        FieldCache {
            params,
            fields: vec![None; sequence_len],
        }
    }

    pub fn params(&self) -> MotionParams {
        self.params
    }

    /// Field between frames `frame - 1` and `frame` of `seq`.
    pub fn get(&mut self, seq: &FrameSequence, frame: usize) -> Result<&MotionField> {
        assert!(
            frame >= 1 && frame < self.fields.len(),
            "frame {frame} has no predecessor"
        );
        if self.fields[frame].is_none() {
            let field = compute_motion_field(seq.frame(frame - 1), seq.frame(frame), self.params)?;
            self.fields[frame] = Some(field);
        }
        Ok(self.fields[frame].as_ref().expect("just computed"))
    }
}
