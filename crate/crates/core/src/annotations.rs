//! Bounding boxes, per-frame detection sets, and the CSV annotation format.
//!
//! Annotations are UTF-8 CSV with one detection per line:
//!
//! ```text
//! frame_index,x,y,w,h[,label[,score]]
//! ```
//!
//! Lines starting with `#` are comments. A missing label defaults to 0, a
//! missing score to 1.0. Frames absent from the file simply have no objects.
//! Four-point polygon ground truth is converted up front via
//! [`polygon_to_box`].

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Axis-aligned rectangle in pixel coordinates; width and height are
/// always positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    x: u32,
    y: u32,
    w: u32,
    h: u32,
}

impl BoundingBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::DegenerateBox { w, h });
        }
        Ok(BoundingBox { x, y, w, h })
    }

    pub fn x(&self) -> u32 {
        self.x
    }

    pub fn y(&self) -> u32 {
        self.y
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    /// Exclusive right edge.
    pub fn right(&self) -> u64 {
        self.x as u64 + self.w as u64
    }

    /// Exclusive bottom edge.
    pub fn bottom(&self) -> u64 {
        self.y as u64 + self.h as u64
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    /// Translates by `(dx, dy)` and clamps the result so the box lies fully
    /// inside `[0, frame_w) x [0, frame_h)`. Width and height are preserved.
    pub fn translated_clamped(&self, dx: i64, dy: i64, frame_w: u32, frame_h: u32) -> BoundingBox {
        let max_x = frame_w.saturating_sub(self.w) as i64;
        let max_y = frame_h.saturating_sub(self.h) as i64;
        BoundingBox {
            x: (self.x as i64 + dx).clamp(0, max_x) as u32,
            y: (self.y as i64 + dy).clamp(0, max_y) as u32,
            w: self.w,
            h: self.h,
        }
    }
}

/// One detected object: box plus class label and confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub label: u32,
    pub score: f64,
}

impl Detection {
    pub fn new(bbox: BoundingBox, label: u32, score: f64) -> Self {
        Detection { bbox, label, score }
    }
}

/// All detections for a single frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionSet {
    frame_index: usize,
    boxes: Vec<Detection>,
}

impl DetectionSet {
    pub fn new(frame_index: usize) -> Self {
        DetectionSet {
            frame_index,
            boxes: Vec::new(),
        }
    }

    pub fn with_boxes(frame_index: usize, boxes: Vec<Detection>) -> Self {
        DetectionSet { frame_index, boxes }
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn boxes(&self) -> &[Detection] {
        &self.boxes
    }

    pub fn push(&mut self, det: Detection) {
        self.boxes.push(det);
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }
}

/// One `DetectionSet` per frame, indices contiguous from 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionTrack {
    sets: Vec<DetectionSet>,
}

impl DetectionTrack {
    /// A track of `frame_count` empty sets.
    pub fn empty(frame_count: usize) -> Self {
        DetectionTrack {
            sets: (0..frame_count).map(DetectionSet::new).collect(),
        }
    }

    /// Wraps per-frame sets, verifying indices run 0..n contiguously.
    pub fn from_sets(sets: Vec<DetectionSet>) -> Result<Self> {
        for (i, set) in sets.iter().enumerate() {
            if set.frame_index() != i {
                return Err(Error::IndexOutOfRange {
                    index: set.frame_index(),
                    count: sets.len(),
                });
            }
        }
        Ok(DetectionTrack { sets })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn frame(&self, index: usize) -> &DetectionSet {
        &self.sets[index]
    }

    pub fn frames(&self) -> &[DetectionSet] {
        &self.sets
    }

    /// Appends a detection to the set of its frame.
    pub fn insert(&mut self, frame_index: usize, det: Detection) -> Result<()> {
        let count = self.sets.len();
        let set = self
            .sets
            .get_mut(frame_index)
            .ok_or(Error::IndexOutOfRange {
                index: frame_index,
                count,
            })?;
        set.push(det);
        Ok(())
    }

    pub(crate) fn push_set(&mut self, set: DetectionSet) {
        debug_assert_eq!(set.frame_index(), self.sets.len());
        self.sets.push(set);
    }

    /// Total number of detections across all frames.
    pub fn total_boxes(&self) -> usize {
        self.sets.iter().map(|s| s.len()).sum()
    }

    /// Renders the track in the CSV annotation format, one line per box.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for set in &self.sets {
            for det in set.boxes() {
                let b = &det.bbox;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{:.6}",
                    set.frame_index(),
                    b.x(),
                    b.y(),
                    b.w(),
                    b.h(),
                    det.label,
                    det.score
                )
                .expect("string write");
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

/// Parses a CSV annotation file into a track covering `0..frame_count`.
pub fn parse_annotations(path: &Path, frame_count: usize) -> Result<DetectionTrack> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_annotation_lines(&text, frame_count).map_err(|(line, e)| e.at_line(path, line))
}

/// Line-number-tagged parse over the raw text; split out for testability.
fn parse_annotation_lines(
    text: &str,
    frame_count: usize,
) -> std::result::Result<DetectionTrack, (usize, Error)> {
    let mut track = DetectionTrack::empty(frame_count);
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (frame_index, det) =
            parse_detection_line(line, frame_count).map_err(|e| (lineno + 1, e))?;
        track
            .insert(frame_index, det)
            .expect("frame index validated");
    }
    Ok(track)
}

fn parse_detection_line(line: &str, frame_count: usize) -> Result<(usize, Detection)> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() < 5 || fields.len() > 7 {
        return Err(Error::MalformedLine(format!(
            "expected 5 to 7 fields, got {}",
            fields.len()
        )));
    }
    let frame_index: usize = parse_field(fields[0], "frame_index")?;
    let x: u32 = parse_field(fields[1], "x")?;
    let y: u32 = parse_field(fields[2], "y")?;
    let w: u32 = parse_field(fields[3], "w")?;
    let h: u32 = parse_field(fields[4], "h")?;
    let label: u32 = match fields.get(5) {
        Some(s) => parse_field(s, "label")?,
        None => 0,
    };
    let score: f64 = match fields.get(6) {
        Some(s) => s
            .parse()
            .map_err(|_| Error::MalformedLine(format!("bad score `{s}`")))?,
        None => 1.0,
    };
    if frame_index >= frame_count {
        return Err(Error::IndexOutOfRange {
            index: frame_index,
            count: frame_count,
        });
    }
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::InvalidScore(score));
    }
    let bbox = BoundingBox::new(x, y, w, h)?;
    Ok((frame_index, Detection::new(bbox, label, score)))
}

fn parse_field<T: std::str::FromStr>(s: &str, name: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::MalformedLine(format!("bad {name} `{s}`")))
}

/// Tightest axis-aligned box containing four polygon vertices.
///
/// Errors if the points are collinear (zero-area hull).
pub fn polygon_to_box(points: [(u32, u32); 4]) -> Result<BoundingBox> {
    let p0 = points[0];
    // Pick any point distinct from p0 to define the base direction.
    let base = points[1..].iter().find(|&&p| p != p0);
    let collinear = match base {
        None => true, // all four points coincide
        Some(&b) => {
            let (bx, by) = (b.0 as i64 - p0.0 as i64, b.1 as i64 - p0.1 as i64);
            points[1..].iter().all(|&p| {
                let (px, py) = (p.0 as i64 - p0.0 as i64, p.1 as i64 - p0.1 as i64);
                bx * py - by * px == 0
            })
        }
    };
    if collinear {
        return Err(Error::DegeneratePolygon);
    }
    let min_x = points.iter().map(|p| p.0).min().expect("four points");
    let max_x = points.iter().map(|p| p.0).max().expect("four points");
    let min_y = points.iter().map(|p| p.1).min().expect("four points");
    let max_y = points.iter().map(|p| p.1).max().expect("four points");
    BoundingBox::new(min_x, min_y, max_x - min_x, max_y - min_y)
}
