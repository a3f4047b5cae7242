//! Grayscale frames and binary-PGM sequence I/O.
//!
//! Frames are single-channel 8-bit luma planes. Sequences live on disk as
//! `frame_000000.pgm`, `frame_000001.pgm`, ... in binary PGM (P5, maxval
//! 255), which round-trips bit-exactly and needs no codec.

use crate::error::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};

/// One 8-bit grayscale luma plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Frame {
    /// Builds a frame from row-major pixels; `pixels.len()` must equal
    /// `width * height` and both dimensions must be at least 1.
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedPgm(format!(
                "zero dimension: {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::MalformedPgm(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
        })
    }

    /// A frame filled with a single luma value.
    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        Frame::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Row `y` as a contiguous slice.
    #[inline]
    pub fn row(&self, y: u32) -> &[u8] {
        let w = self.width as usize;
        let start = y as usize * w;
        &self.pixels[start..start + w]
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Reads a binary PGM (P5, maxval 255) file.
    pub fn from_pgm(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        parse_pgm(&bytes).map_err(|e| e.in_file(path))
    }

    /// Writes the frame as binary PGM (P5, maxval 255).
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(self.pixels.len() + 32);
        out.extend_from_slice(format!("P5\n{} {}\n255\n", self.width, self.height).as_bytes());
        out.extend_from_slice(&self.pixels);
        fs::write(path, out).map_err(|source| Error::CannotWriteOutput {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// An ordered, dimension-uniform run of frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
}

impl FrameSequence {
    /// Wraps a non-empty list of frames, verifying uniform dimensions.
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let first = frames.first().ok_or_else(|| Error::EmptySequence {
            dir: PathBuf::from("<memory>"),
        })?;
        let (w, h) = (first.width(), first.height());
        for f in &frames {
            if f.width() != w || f.height() != h {
                return Err(Error::InconsistentFrameSize {
                    got_w: f.width(),
                    got_h: f.height(),
                    want_w: w,
                    want_h: h,
                });
            }
        }
        Ok(FrameSequence { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, index: usize) -> &Frame {
        &self.frames[index]
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn width(&self) -> u32 {
        self.frames[0].width()
    }

    pub fn height(&self) -> u32 {
        self.frames[0].height()
    }

    /// Writes the sequence as `frame_%06d.pgm` files into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for (i, frame) in self.frames.iter().enumerate() {
            frame.write_pgm(&dir.join(format!("frame_{i:06}.pgm")))?;
        }
        Ok(())
    }
}

/// Loads every `frame_%06d.pgm` in `dir`, sorted by index.
///
/// Indices must be contiguous from 0 and all frames must share the same
/// dimensions. Files not matching the naming scheme are ignored.
pub fn load_frame_sequence(dir: &Path) -> Result<FrameSequence> {
    let entries = fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let mut indexed: Vec<(usize, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if let Some(index) = frame_index_of(&path) {
            indexed.push((index, path));
        }
    }
    if indexed.is_empty() {
        return Err(Error::EmptySequence {
            dir: dir.to_path_buf(),
        });
    }
    indexed.sort_by_key(|(i, _)| *i);

    let mut frames = Vec::with_capacity(indexed.len());
    for (position, (index, path)) in indexed.iter().enumerate() {
        if *index != position {
            return Err(Error::NonContiguousSequence {
                dir: dir.to_path_buf(),
                missing: position,
            });
        }
        let frame = Frame::from_pgm(path)?;
        if let Some(first) = frames.first() {
            let first: &Frame = first;
            if frame.width() != first.width() || frame.height() != first.height() {
                return Err(Error::InconsistentFrameSize {
                    got_w: frame.width(),
                    got_h: frame.height(),
                    want_w: first.width(),
                    want_h: first.height(),
                }
                .in_file(path));
            }
        }
        frames.push(frame);
    }
    FrameSequence::new(frames)
}

/// Extracts N from `frame_NNNNNN.pgm` (at least six digits), else None.
fn frame_index_of(path: &Path) -> Option<usize> {
    let name = path.file_name()?.to_str()?;
    let digits = name.strip_prefix("frame_")?.strip_suffix(".pgm")?;
    if digits.len() < 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn parse_pgm(bytes: &[u8]) -> Result<Frame> {
    let mut cursor = Cursor { bytes, pos: 0 };
    let magic = cursor.take(2)?;
    if magic != b"P5" {
        return Err(Error::UnsupportedFormat(format!(
            "expected P5 magic, got {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let width: u32 = cursor.ascii_int()?;
    let height: u32 = cursor.ascii_int()?;
    let maxval: u32 = cursor.ascii_int()?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval}, only 255 supported"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match cursor.next_byte() {
        Some(b) if b.is_ascii_whitespace() => {}
        _ => return Err(Error::MalformedPgm("missing raster separator".into())),
    }
    let expected = width as usize * height as usize;
    let rest = &cursor.bytes[cursor.pos..];
    if rest.len() < expected {
        return Err(Error::MalformedPgm(format!(
            "truncated pixel data: got {} of {expected} bytes",
            rest.len()
        )));
    }
    if rest.len() > expected {
        return Err(Error::MalformedPgm(format!(
            "trailing data: {} extra bytes",
            rest.len() - expected
        )));
    }
    Frame::new(width, height, rest.to_vec())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn next_byte(&mut self) -> Option<u8> {
        let b = self.bytes.get(self.pos).copied();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::MalformedPgm("truncated header".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    /// Skips whitespace and `#` comments, then reads one decimal integer.
    fn ascii_int(&mut self) -> Result<u32> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let start = self.pos;
        while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::MalformedPgm("expected integer in header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("digits are ascii")
            .parse()
            .map_err(|_| Error::MalformedPgm("header integer out of range".into()))
    }
}
