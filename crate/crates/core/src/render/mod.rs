//! Page rasterization. Everything is drawn onto an RGB image and a binary
//! mask of the same size; only the waveform traces reach the mask.
//!
//! Draw order is grid, calibration pulses, header and labels, then traces,
//! so trace ink always sits on top.

mod grid;
mod stroke;
mod text;

pub use grid::{grid_extent, render_grid, ruling_map, Ruling, MAJOR_ALPHA, MINOR_ALPHA};
pub use stroke::{composite_image, composite_mask, draw_ink, draw_trace, rasterize, Coverage, BOUNDS_TOLERANCE_PX};
pub use text::{glyph_advance, is_supported, measure, render_text, TextBox};

use image::{GrayImage, Rgb, RgbImage};
use thiserror::Error;

use crate::geometry::{
    clip_path, signal_to_path, CalibrationModel, CanvasSpec, GeometryError, LeadGeometry, LeadLayout, PixelBox, Point,
    RenderParams,
};
use crate::ingest::{SignalMatrix, LEAD_NAMES, N_LEADS};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("trace point ({x:.1}, {y:.1}) lies outside its lead region")]
    PathOutOfBounds { x: f64, y: f64 },
    #[error("invalid stroke width {0}")]
    InvalidStroke(f64),
    #[error("glyph {0:?} is not in the embedded font")]
    UnsupportedGlyph(char),
    #[error("empty text")]
    EmptyText,
    #[error("text does not fit on the canvas")]
    TextOutOfBounds,
    #[error("expected {expected} leads, got {got}")]
    LeadCount { expected: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T, E = RenderError> = std::result::Result<T, E>;

/// Lead label glyph height, px.
pub const LABEL_HEIGHT_PX: u32 = 32;
/// Header glyph height, px.
pub const HEADER_HEIGHT_PX: u32 = 36;
/// Calibration pulse stroke width, px.
pub const PULSE_STROKE_PX: f64 = 2.0;
/// Inset of the pulse's baseline ends from the slot edges, px.
const PULSE_INSET_PX: f64 = 4.0;

pub fn blank_canvas(spec: &CanvasSpec) -> RgbImage {
    RgbImage::from_pixel(spec.width_px, spec.height_px, Rgb([255, 255, 255]))
}

pub fn blank_mask(spec: &CanvasSpec) -> GrayImage {
    GrayImage::new(spec.width_px, spec.height_px)
}

/// Polyline of the 1 mV, 0.2 s calibration pulse centred in the lead's
/// pulse slot. The flat top is capped at the slot width minus 20 px.
pub fn pulse_path(lead: &LeadGeometry, cal: &CalibrationModel) -> Vec<Point> {
    let (sx, sw) = lead.pulse_slot();
    let top = (0.2 * cal.px_per_sec).min(sw - 20.0);
    let rise = sx + (sw - top) / 2.0;
    let base = lead.baseline_y;
    let high = base - cal.px_per_mv;
    [
        (sx + PULSE_INSET_PX, base),
        (rise, base),
        (rise, high),
        (rise + top, high),
        (rise + top, base),
        (sx + sw - PULSE_INSET_PX, base),
    ]
    .into_iter()
    .map(|(x, y)| Point { x, y })
    .collect()
}

/// Draws the calibration pulse on the image. The mask is not touched.
pub fn draw_calibration_pulse(canvas: &mut RgbImage, lead: &LeadGeometry, cal: &CalibrationModel) -> Result<()> {
    draw_ink(canvas, &pulse_path(lead, cal), PULSE_STROKE_PX)
}

pub fn header_text(params: &RenderParams, fs_hz: u32) -> String {
    format!(
        "Speed: {} mm/s   Gain: {} mm/mV   Fs: {} Hz",
        params.paper_speed_mm_s, params.voltage_scale_mm_mv, fs_hz
    )
}

/// Draws the settings line centred in the top margin. Returns `None` when
/// the margin is too small to hold legible text.
pub fn render_header(canvas: &mut RgbImage, params: &RenderParams, fs_hz: u32, margin_top: u32) -> Result<Option<TextBox>> {
    let text = header_text(params, fs_hz);
    let per_char = measure(&text, 1).0;
    let height = HEADER_HEIGHT_PX.min(margin_top).min(canvas.width() / per_char);
    if height < 8 {
        return Ok(None);
    }
    let (w, h) = measure(&text, height);
    let anchor = ((canvas.width() - w) / 2, (margin_top - h) / 2);
    render_text(canvas, &text, anchor, height).map(Some)
}

/// A fully rendered page.
#[derive(Debug, Clone)]
pub struct RenderedPage {
    pub image: RgbImage,
    pub mask: GrayImage,
    /// Lead-name label boxes in lead order.
    pub name_boxes: Vec<PixelBox>,
    /// Samples clamped into their region, per lead.
    pub clipped: Vec<usize>,
    pub header: Option<TextBox>,
}

/// Renders one page from normalized signals.
pub fn render_page(
    spec: &CanvasSpec,
    layout: &LeadLayout,
    cal: &CalibrationModel,
    params: &RenderParams,
    signals: &SignalMatrix,
    fs_hz: u32,
) -> Result<RenderedPage> {
    if layout.leads.len() != N_LEADS {
        return Err(RenderError::LeadCount {
            expected: N_LEADS,
            got: layout.leads.len(),
        });
    }
    let mut image = blank_canvas(spec);
    let mut mask = blank_mask(spec);

    render_grid(&mut image, cal, params, layout);
    for lead in &layout.leads {
        draw_calibration_pulse(&mut image, lead, cal)?;
    }
    let header = render_header(&mut image, params, fs_hz, spec.margin_top)?;
    let mut name_boxes = Vec::with_capacity(N_LEADS);
    for (lead, name) in layout.leads.iter().zip(LEAD_NAMES) {
        let anchor = (lead.name_anchor.0 as u32, lead.name_anchor.1 as u32);
        name_boxes.push(render_text(&mut image, name, anchor, LABEL_HEIGHT_PX)?.bbox);
    }
    let mut clipped = Vec::with_capacity(N_LEADS);
    for (lead, values) in layout.leads.iter().zip(signals.leads()) {
        let mut path = signal_to_path(values, cal, lead, f64::from(fs_hz));
        clipped.push(clip_path(&mut path, lead)?);
        draw_trace(&mut image, &mut mask, &path, params.stroke_width_px, &lead.region)?;
    }
    Ok(RenderedPage {
        image,
        mask,
        name_boxes,
        clipped,
        header,
    })
}
