use image::RgbImage;

use crate::geometry::{CalibrationModel, LeadLayout, RenderParams};

/// Ruling class of a pixel row or column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ruling {
    None,
    Minor,
    Major,
}

pub const MINOR_ALPHA: f64 = 0.8;
pub const MAJOR_ALPHA: f64 = 1.0;

/// Rulings along one axis of `[lo, hi)` for lines at `anchor + k * pitch`.
/// Minor lines are one pixel wide at `round(p)`; every fifth line is major
/// and also takes the pixel before it.
fn rulings(lo: u32, hi: u32, anchor: f64, pitch: f64) -> Vec<Ruling> {
    let mut out = vec![Ruling::None; (hi - lo) as usize];
    let k_lo = ((f64::from(lo) - 1.0 - anchor) / pitch).floor() as i64;
    let k_hi = ((f64::from(hi) + 1.0 - anchor) / pitch).ceil() as i64;
    for k in k_lo..=k_hi {
        let c = (anchor + k as f64 * pitch + 0.5).floor() as i64;
        let (cols, class) = if k.rem_euclid(5) == 0 {
            (c - 1..=c, Ruling::Major)
        } else {
            (c..=c, Ruling::Minor)
        };
        for col in cols {
            if col >= i64::from(lo) && col < i64::from(hi) {
                let slot = &mut out[(col - i64::from(lo)) as usize];
                *slot = (*slot).max(class);
            }
        }
    }
    out
}

/// Pixel rectangle `(x0, y0, x1, y1)` the grid covers: the union of the
/// lead regions.
pub fn grid_extent(layout: &LeadLayout) -> (u32, u32, u32, u32) {
    let first = &layout.leads[0].region;
    let last = &layout.leads[layout.leads.len() - 1].region;
    (first.x as u32, first.y as u32, first.right() as u32, last.bottom() as u32)
}

/// Per-pixel ruling map over the grid extent, row-major. Lines are anchored
/// at the first lead's time origin and baseline.
pub fn ruling_map(cal: &CalibrationModel, layout: &LeadLayout) -> (Vec<Ruling>, Vec<Ruling>) {
    let (x0, y0, x1, y1) = grid_extent(layout);
    let lead = &layout.leads[0];
    (
        rulings(x0, x1, lead.trace_x0, cal.px_per_mm),
        rulings(y0, y1, lead.baseline_y, cal.px_per_mm),
    )
}

fn blend(base: u8, ink: u8, alpha: f64) -> u8 {
    ((1.0 - alpha) * f64::from(base) + alpha * f64::from(ink)).round() as u8
}

/// Draws 1 mm minor and 5 mm major rulings over the lead area. Each pixel
/// is blended once with the strongest ruling through it. No-op when the
/// grid is hidden.
pub fn render_grid(canvas: &mut RgbImage, cal: &CalibrationModel, params: &RenderParams, layout: &LeadLayout) {
    if !params.grid_visible {
        return;
    }
    let (x0, y0, x1, y1) = grid_extent(layout);
    let (cols, rows) = ruling_map(cal, layout);
    let ink = params.grid_color.rgb();
    let (x1, y1) = (x1.min(canvas.width()), y1.min(canvas.height()));
    for y in y0..y1 {
        let row = rows[(y - y0) as usize];
        for x in x0..x1 {
            let alpha = match row.max(cols[(x - x0) as usize]) {
                Ruling::None => continue,
                Ruling::Minor => MINOR_ALPHA,
                Ruling::Major => MAJOR_ALPHA,
            };
            let px = canvas.get_pixel_mut(x, y);
            for (c, i) in px.0.iter_mut().zip(ink) {
                *c = blend(*c, i, alpha);
            }
        }
    }
}
