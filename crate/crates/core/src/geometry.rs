//! Page geometry: canvas, calibration (px <-> mm <-> s/mV), the 12x1 lead
//! layout, per-sample render parameters and signal-to-polyline mapping.
//!
//! The horizontal scale is derived from the available trace width rather
//! than the DPI: 10 s at 25 mm/s needs 250 mm, more than an A4 page offers,
//! so one "millimetre" is `trace_width / (speed * duration)` pixels on both
//! axes. Grid boxes stay square and the mm/s/mV relationships hold exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::N_LEADS;
use crate::rng::RecordRng;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("trace width {0} px is not positive")]
    NonPositiveWidth(i64),
    #[error("canvas height {height} px cannot fit 12 lead regions (region height would be {region} px)")]
    LayoutOverflow { height: u32, region: i64 },
    #[error("amplitude overflow: {clipped} of {total} samples clipped")]
    AmplitudeOverflow { clipped: usize, total: usize },
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

/// Regions shorter than this cannot hold a label, pulse and trace.
pub const MIN_REGION_HEIGHT: i64 = 64;

/// Fraction of clipped samples above which a lead is rejected.
pub const MAX_CLIP_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanvasSpec {
    pub dpi: u32,
    pub width_px: u32,
    pub height_px: u32,
    pub margin_top: u32,
    pub margin_bottom: u32,
    pub margin_left: u32,
    pub margin_right: u32,
    pub lead_gap_px: u32,
    pub pulse_slot_px: u32,
}

impl Default for CanvasSpec {
    /// A4 portrait at 300 DPI.
    fn default() -> Self {
        CanvasSpec {
            dpi: 300,
            width_px: 2481,
            height_px: 3507,
            margin_top: 100,
            margin_bottom: 100,
            margin_left: 150,
            margin_right: 150,
            lead_gap_px: 30,
            pulse_slot_px: 70,
        }
    }
}

impl CanvasSpec {
    /// Width between the left and right margins.
    pub fn usable_width(&self) -> i64 {
        i64::from(self.width_px) - i64::from(self.margin_left) - i64::from(self.margin_right)
    }

    /// Usable width minus the calibration-pulse slot.
    pub fn trace_width(&self) -> i64 {
        self.usable_width() - i64::from(self.pulse_slot_px)
    }
}

/// Axis-aligned box in pixels, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl PixelBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        PixelBox { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridColor {
    Red,
    Green,
    Black,
    Gray,
}

impl GridColor {
    pub const ALL: [GridColor; 4] = [GridColor::Red, GridColor::Green, GridColor::Black, GridColor::Gray];

    pub fn rgb(self) -> [u8; 3] {
        match self {
            GridColor::Red => [255, 0, 0],
            GridColor::Green => [0, 160, 0],
            GridColor::Black => [0, 0, 0],
            GridColor::Gray => [128, 128, 128],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GridColor::Red => "red",
            GridColor::Green => "green",
            GridColor::Black => "black",
            GridColor::Gray => "gray",
        }
    }

    pub fn parse(s: &str) -> Option<GridColor> {
        GridColor::ALL.into_iter().find(|c| c.as_str() == s.to_ascii_lowercase())
    }
}

pub const PAPER_SPEEDS: [u32; 2] = [25, 50];
pub const VOLTAGE_SCALES: [u32; 2] = [5, 10];
pub const GRID_OPACITY: f64 = 0.8;
pub const STROKE_WIDTH_RANGE: (f64, f64) = (2.0, 3.0);
pub const DURATION_S: f64 = 10.0;

/// Drawn configuration of one page.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderParams {
    pub paper_speed_mm_s: u32,
    pub voltage_scale_mm_mv: u32,
    pub grid_visible: bool,
    pub grid_color: GridColor,
    pub grid_opacity: f64,
    pub stroke_width_px: f64,
    pub rng_seed: u64,
}

/// Options each randomized parameter is drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDomains {
    pub paper_speed: Vec<u32>,
    pub voltage_scale: Vec<u32>,
    pub grid_visible: Vec<bool>,
    pub grid_color: Vec<GridColor>,
    pub stroke_width: (f64, f64),
}

impl Default for ParamDomains {
    fn default() -> Self {
        ParamDomains {
            paper_speed: PAPER_SPEEDS.to_vec(),
            voltage_scale: VOLTAGE_SCALES.to_vec(),
            grid_visible: vec![true, false],
            grid_color: GridColor::ALL.to_vec(),
            stroke_width: STROKE_WIDTH_RANGE,
        }
    }
}

/// Draws one page's parameters. Always consumes exactly five draws, in the
/// order speed, scale, grid visibility, grid color, stroke width, whatever
/// the domain sizes. Stroke widths are quantized to 1e-6 px.
pub fn sample_params(rng: &mut RecordRng, domains: &ParamDomains) -> RenderParams {
    let paper_speed_mm_s = domains.paper_speed[rng.index(domains.paper_speed.len())];
    let voltage_scale_mm_mv = domains.voltage_scale[rng.index(domains.voltage_scale.len())];
    let grid_visible = domains.grid_visible[rng.index(domains.grid_visible.len())];
    let grid_color = domains.grid_color[rng.index(domains.grid_color.len())];
    let (lo, hi) = domains.stroke_width;
    let width = lo + (hi - lo) * rng.unit();
    let stroke_width_px = ((width * 1e6).round() / 1e6).clamp(lo, hi);
    RenderParams {
        paper_speed_mm_s,
        voltage_scale_mm_mv,
        grid_visible,
        grid_color,
        grid_opacity: GRID_OPACITY,
        stroke_width_px,
        rng_seed: rng.seed(),
    }
}

/// Unit system binding signal values to raster coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub px_per_mm: f64,
    pub px_per_sec: f64,
    pub px_per_mv: f64,
    pub seconds_per_mm: f64,
    pub mv_per_mm: f64,
}

pub fn compute_calibration(canvas: &CanvasSpec, params: &RenderParams, duration_s: f64) -> Result<CalibrationModel> {
    let trace_width = canvas.trace_width();
    if trace_width <= 0 {
        return Err(GeometryError::NonPositiveWidth(trace_width));
    }
    let speed = f64::from(params.paper_speed_mm_s);
    let scale = f64::from(params.voltage_scale_mm_mv);
    let px_per_mm = trace_width as f64 / (speed * duration_s);
    Ok(CalibrationModel {
        px_per_mm,
        px_per_sec: px_per_mm * speed,
        px_per_mv: px_per_mm * scale,
        seconds_per_mm: 1.0 / speed,
        mv_per_mm: 1.0 / scale,
    })
}

/// Geometry of one lead row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadGeometry {
    /// Full usable-width row: pulse slot plus trace.
    pub region: PixelBox,
    pub baseline_y: f64,
    /// Start of the time axis (right edge of the pulse slot).
    pub trace_x0: f64,
    pub trace_x1: f64,
    pub name_anchor: (f64, f64),
}

impl LeadGeometry {
    /// `(x, y)` of the pulse slot's left edge and its width.
    pub fn pulse_slot(&self) -> (f64, f64) {
        (self.region.x, self.trace_x0 - self.region.x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadLayout {
    pub region_height_px: u32,
    pub leads: Vec<LeadGeometry>,
}

/// Label anchor offset from the region's top-left corner.
pub const NAME_OFFSET: (f64, f64) = (8.0, 4.0);

/// Stacks the 12 lead regions top to bottom. Flooring leaves the residue
/// in the bottom margin.
pub fn compute_layout(canvas: &CanvasSpec) -> Result<LeadLayout> {
    let gaps = (N_LEADS as i64 - 1) * i64::from(canvas.lead_gap_px);
    let avail = i64::from(canvas.height_px) - i64::from(canvas.margin_top) - i64::from(canvas.margin_bottom) - gaps;
    let region = avail.div_euclid(N_LEADS as i64);
    if region < MIN_REGION_HEIGHT {
        return Err(GeometryError::LayoutOverflow {
            height: canvas.height_px,
            region,
        });
    }
    let trace_width = canvas.trace_width();
    if trace_width <= 0 {
        return Err(GeometryError::NonPositiveWidth(trace_width));
    }
    let x = f64::from(canvas.margin_left);
    let w = canvas.usable_width() as f64;
    let h = region as f64;
    let pitch = region + i64::from(canvas.lead_gap_px);
    let leads = (0..N_LEADS as i64)
        .map(|i| {
            let top = (i64::from(canvas.margin_top) + i * pitch) as f64;
            let trace_x0 = x + f64::from(canvas.pulse_slot_px);
            LeadGeometry {
                region: PixelBox::new(x, top, w, h),
                baseline_y: top + h / 2.0,
                trace_x0,
                trace_x1: trace_x0 + trace_width as f64,
                name_anchor: (x + NAME_OFFSET.0, top + NAME_OFFSET.1),
            }
        })
        .collect();
    Ok(LeadLayout {
        region_height_px: region as u32,
        leads,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Maps a lead (z-units rendered as mV) to pixel coordinates.
pub fn signal_to_path(signal: &[f64], cal: &CalibrationModel, lead: &LeadGeometry, fs_hz: f64) -> Vec<Point> {
    signal
        .iter()
        .enumerate()
        .map(|(i, v)| Point {
            x: lead.trace_x0 + i as f64 / fs_hz * cal.px_per_sec,
            y: lead.baseline_y - v * cal.px_per_mv,
        })
        .collect()
}

/// Inverse of [`signal_to_path`] for one point: `(seconds, value)`.
pub fn point_to_signal(p: Point, cal: &CalibrationModel, lead: &LeadGeometry) -> (f64, f64) {
    ((p.x - lead.trace_x0) / cal.px_per_sec, (lead.baseline_y - p.y) / cal.px_per_mv)
}

/// Vertical limits a trace is clipped to: 1 px inside the region box.
pub fn clip_limits(lead: &LeadGeometry) -> (f64, f64) {
    (lead.region.y + 1.0, lead.region.bottom() - 1.0)
}

/// Clamps path points into the lead region, returning the clipped count.
/// Fails when more than 20% of the points had to be clipped.
pub fn clip_path(path: &mut [Point], lead: &LeadGeometry) -> Result<usize> {
    let (top, bottom) = clip_limits(lead);
    let mut clipped = 0;
    for p in path.iter_mut() {
        if p.y < top || p.y > bottom {
            p.y = p.y.clamp(top, bottom);
            clipped += 1;
        }
    }
    if clipped as f64 > MAX_CLIP_FRACTION * path.len() as f64 {
        return Err(GeometryError::AmplitudeOverflow {
            clipped,
            total: path.len(),
        });
    }
    Ok(clipped)
}
