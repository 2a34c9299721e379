use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::{CanvasSpec, PixelBox};
use crate::ingest::N_LEADS;

use super::{AnnotateError, Result};

/// Class of a lead's waveform region.
pub const REGION_CLASS: u8 = 0;
/// Highest class id: the name box of V6.
pub const MAX_CLASS: u8 = N_LEADS as u8;
/// Records per page: 12 regions plus 12 names.
pub const RECORDS_PER_PAGE: usize = 2 * N_LEADS;

const TOLERANCE: f64 = 1e-9;

/// One object line: class and normalized centre/size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoloRecord {
    pub class_id: u8,
    pub x_center: f64,
    pub y_center: f64,
    pub width: f64,
    pub height: f64,
}

impl YoloRecord {
    /// Box in pixels on a `width` x `height` canvas.
    pub fn to_pixels(&self, canvas_w: f64, canvas_h: f64) -> PixelBox {
        let w = self.width * canvas_w;
        let h = self.height * canvas_h;
        PixelBox::new(self.x_center * canvas_w - w / 2.0, self.y_center * canvas_h - h / 2.0, w, h)
    }
}

/// Name-box class of lead `i` in canonical order (I is 1, V6 is 12).
pub fn name_class(lead_index: usize) -> u8 {
    lead_index as u8 + 1
}

fn unit(v: f64, what: &'static str) -> Result<f64> {
    if !(-TOLERANCE..=1.0 + TOLERANCE).contains(&v) {
        return Err(AnnotateError::BoxOutsideCanvas { what, value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Normalizes a pixel box against the canvas size.
pub fn to_yolo(b: &PixelBox, class_id: u8, canvas: &CanvasSpec) -> Result<YoloRecord> {
    if !(b.w > 0.0 && b.h > 0.0) {
        return Err(AnnotateError::DegenerateBox { w: b.w, h: b.h });
    }
    let (cw, ch) = (f64::from(canvas.width_px), f64::from(canvas.height_px));
    Ok(YoloRecord {
        class_id,
        x_center: unit((b.x + b.w / 2.0) / cw, "x_center")?,
        y_center: unit((b.y + b.h / 2.0) / ch, "y_center")?,
        width: unit(b.w / cw, "width")?,
        height: unit(b.h / ch, "height")?,
    })
}

/// The 24 records of a page: region boxes as class 0, then name boxes.
pub fn page_records(regions: &[PixelBox], names: &[PixelBox], canvas: &CanvasSpec) -> Result<Vec<YoloRecord>> {
    if regions.len() != N_LEADS || names.len() != N_LEADS {
        return Err(AnnotateError::CountMismatch {
            expected: RECORDS_PER_PAGE,
            got: regions.len() + names.len(),
        });
    }
    let mut out = Vec::with_capacity(RECORDS_PER_PAGE);
    for r in regions {
        out.push(to_yolo(r, REGION_CLASS, canvas)?);
    }
    for (i, n) in names.iter().enumerate() {
        out.push(to_yolo(n, name_class(i), canvas)?);
    }
    Ok(out)
}

pub fn format_line(r: &YoloRecord) -> String {
    format!(
        "{} {:.6} {:.6} {:.6} {:.6}",
        r.class_id, r.x_center, r.y_center, r.width, r.height
    )
}

/// Label file text: class-0 lines in the given (lead) order, then the name
/// classes ascending. Requires 12 regions and one record per name class.
pub fn emit_yolo_file(records: &[YoloRecord]) -> Result<String> {
    if records.len() != RECORDS_PER_PAGE {
        return Err(AnnotateError::CountMismatch {
            expected: RECORDS_PER_PAGE,
            got: records.len(),
        });
    }
    let mut per_class = [0usize; N_LEADS + 1];
    for r in records {
        if r.class_id > MAX_CLASS {
            return Err(AnnotateError::BadClass(r.class_id));
        }
        per_class[r.class_id as usize] += 1;
    }
    if per_class[0] != N_LEADS || per_class[1..].iter().any(|&n| n != 1) {
        return Err(AnnotateError::CountMismatch {
            expected: N_LEADS,
            got: per_class[0],
        });
    }
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| r.class_id);
    let mut text = String::with_capacity(RECORDS_PER_PAGE * 40);
    for r in &sorted {
        writeln!(text, "{}", format_line(r)).expect("writing to a String");
    }
    Ok(text)
}

/// Parses label text back into records. Blank lines are ignored.
pub fn parse_yolo_file(text: &str) -> Result<Vec<YoloRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| AnnotateError::YoloSyntax {
            line: line_no,
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(bad("expected 5 fields"));
        }
        let class_id: u8 = fields[0].parse().map_err(|_| bad("class id is not an integer"))?;
        if class_id > MAX_CLASS {
            return Err(AnnotateError::BadClass(class_id));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields[1..]) {
            let x: f64 = f.parse().map_err(|_| bad("coordinate is not a number"))?;
            if !(0.0..=1.0).contains(&x) {
                return Err(bad("coordinate outside [0, 1]"));
            }
            *slot = x;
        }
        out.push(YoloRecord {
            class_id,
            x_center: v[0],
            y_center: v[1],
            width: v[2],
            height: v[3],
        });
    }
    Ok(out)
}
