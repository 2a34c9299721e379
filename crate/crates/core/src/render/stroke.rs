use image::{GrayImage, RgbImage};

use crate::geometry::{PixelBox, Point};

use super::{RenderError, Result};

/// Subsamples per pixel side; 16 per pixel in total.
pub const SUBSAMPLES: u32 = 4;
const FULL: u16 = u16::MAX;

/// Per-pixel subsample bitmask over a rectangle of the canvas. Bit
/// `sy * 4 + sx` is set when subsample `(sx, sy)` lies inside the stroke.
#[derive(Debug, Clone)]
pub struct Coverage {
    pub x0: u32,
    pub y0: u32,
    pub width: u32,
    pub height: u32,
    bits: Vec<u16>,
}

impl Coverage {
    /// Covered subsamples of canvas pixel `(x, y)`, 0..=16.
    pub fn count(&self, x: u32, y: u32) -> u32 {
        if x < self.x0 || y < self.y0 || x >= self.x0 + self.width || y >= self.y0 + self.height {
            return 0;
        }
        self.bits[((y - self.y0) * self.width + (x - self.x0)) as usize].count_ones()
    }

    /// `(x, y, count)` for every touched pixel, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.bits.iter().enumerate().filter(|(_, b)| **b != 0).map(|(i, b)| {
            let i = i as u32;
            (self.x0 + i % self.width, self.y0 + i / self.width, b.count_ones())
        })
    }
}

fn dist2_to_segment(px: f64, py: f64, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((px - a.x) * dx + (py - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (ex, ey) = (a.x + t * dx - px, a.y + t * dy - py);
    ex * ex + ey * ey
}

/// Supersampled coverage of a round-capped polyline of the given width,
/// restricted to a `canvas_w` x `canvas_h` canvas. Each subsample is tested
/// against every segment (capsule) near it, so joints never double count.
pub fn rasterize(path: &[Point], width: f64, canvas_w: u32, canvas_h: u32) -> Coverage {
    let r = width / 2.0;
    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in path {
        lo_x = lo_x.min(p.x);
        lo_y = lo_y.min(p.y);
        hi_x = hi_x.max(p.x);
        hi_y = hi_y.max(p.y);
    }
    let clamp_x = |v: f64| v.clamp(0.0, f64::from(canvas_w)) as u32;
    let clamp_y = |v: f64| v.clamp(0.0, f64::from(canvas_h)) as u32;
    if path.is_empty() {
        return Coverage { x0: 0, y0: 0, width: 0, height: 0, bits: Vec::new() };
    }
    let x0 = clamp_x((lo_x - r).floor());
    let y0 = clamp_y((lo_y - r).floor());
    let x1 = clamp_x((hi_x + r).ceil() + 1.0);
    let y1 = clamp_y((hi_y + r).ceil() + 1.0);
    let mut cov = Coverage {
        x0,
        y0,
        width: x1 - x0,
        height: y1 - y0,
        bits: vec![0; ((x1 - x0) * (y1 - y0)) as usize],
    };
    if cov.bits.is_empty() {
        return cov;
    }

    let r2 = r * r;
    // Pixel-centre distance bounds that decide a whole pixel at once.
    let half_diag = std::f64::consts::SQRT_2 / 2.0;
    let inner = (r - half_diag).max(0.0).powi(2);
    let outer = (r + half_diag).powi(2);
    let step = 1.0 / f64::from(SUBSAMPLES);

    let segments: Vec<(Point, Point)> = if path.len() == 1 {
        vec![(path[0], path[0])]
    } else {
        path.windows(2).map(|w| (w[0], w[1])).collect()
    };
    for (a, b) in segments {
        let sx0 = clamp_x((a.x.min(b.x) - r).floor()).max(x0);
        let sx1 = clamp_x((a.x.max(b.x) + r).ceil() + 1.0).min(x1);
        let sy0 = clamp_y((a.y.min(b.y) - r).floor()).max(y0);
        let sy1 = clamp_y((a.y.max(b.y) + r).ceil() + 1.0).min(y1);
        for py in sy0..sy1 {
            let row = ((py - y0) * cov.width) as usize;
            for px in sx0..sx1 {
                let cell = &mut cov.bits[row + (px - x0) as usize];
                if *cell == FULL {
                    continue;
                }
                let d2 = dist2_to_segment(f64::from(px) + 0.5, f64::from(py) + 0.5, a, b);
                if d2 > outer {
                    continue;
                }
                if d2 <= inner {
                    *cell = FULL;
                    continue;
                }
                let mut bits = 0u16;
                for sy in 0..SUBSAMPLES {
                    let y = f64::from(py) + (f64::from(sy) + 0.5) * step;
                    for sx in 0..SUBSAMPLES {
                        let x = f64::from(px) + (f64::from(sx) + 0.5) * step;
                        if dist2_to_segment(x, y, a, b) <= r2 {
                            bits |= 1 << (sy * SUBSAMPLES + sx);
                        }
                    }
                }
                *cell |= bits;
            }
        }
    }
    cov
}

/// Darkens the image toward black by coverage: `c * (16 - n) / 16`.
pub fn composite_image(cov: &Coverage, image: &mut RgbImage) {
    for (x, y, n) in cov.iter() {
        let px = image.get_pixel_mut(x, y);
        for c in px.0.iter_mut() {
            *c = (u32::from(*c) * (16 - n) / 16) as u8;
        }
    }
}

/// Sets mask pixels with coverage of at least one half.
pub fn composite_mask(cov: &Coverage, mask: &mut GrayImage) {
    for (x, y, n) in cov.iter() {
        if n >= 8 {
            mask.get_pixel_mut(x, y).0[0] = 255;
        }
    }
}

fn check_width(width: f64) -> Result<()> {
    if !(width.is_finite() && width > 0.0) {
        return Err(RenderError::InvalidStroke(width));
    }
    Ok(())
}

/// Tolerance around the lead region a trace point may fall in.
pub const BOUNDS_TOLERANCE_PX: f64 = 2.0;

/// Strokes a waveform onto both rasters. The image gets antialiased black
/// ink, the mask gets 255 where coverage is at least 0.5.
pub fn draw_trace(image: &mut RgbImage, mask: &mut GrayImage, path: &[Point], width: f64, bounds: &PixelBox) -> Result<()> {
    check_width(width)?;
    if let Some(p) = path.iter().find(|p| {
        !(p.x >= bounds.x - BOUNDS_TOLERANCE_PX
            && p.x <= bounds.right() + BOUNDS_TOLERANCE_PX
            && p.y >= bounds.y - BOUNDS_TOLERANCE_PX
            && p.y <= bounds.bottom() + BOUNDS_TOLERANCE_PX)
    }) {
        return Err(RenderError::PathOutOfBounds { x: p.x, y: p.y });
    }
    let cov = rasterize(path, width, image.width(), image.height());
    composite_image(&cov, image);
    composite_mask(&cov, mask);
    Ok(())
}

/// Strokes a polyline onto the image only.
pub fn draw_ink(image: &mut RgbImage, path: &[Point], width: f64) -> Result<()> {
    check_width(width)?;
    let cov = rasterize(path, width, image.width(), image.height());
    composite_image(&cov, image);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Luma, Rgb};
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    fn blank(w: u32, h: u32) -> (RgbImage, GrayImage) {
        (RgbImage::from_pixel(w, h, Rgb([255, 255, 255])), GrayImage::new(w, h))
    }

    /// Brute force: every subsample of every pixel against every segment.
    fn brute_counts(path: &[Point], width: f64, w: u32, h: u32) -> Vec<u32> {
        let r2 = (width / 2.0).powi(2);
        let mut out = vec![0; (w * h) as usize];
        for py in 0..h {
            for px in 0..w {
                let mut n = 0;
                for sy in 0..4 {
                    for sx in 0..4 {
                        let x = px as f64 + (sx as f64 + 0.5) / 4.0;
                        let y = py as f64 + (sy as f64 + 0.5) / 4.0;
                        if path.windows(2).any(|s| dist2_to_segment(x, y, s[0], s[1]) <= r2) {
                            n += 1;
                        }
                    }
                }
                out[(py * w + px) as usize] = n;
            }
        }
        out
    }

    #[test]
    fn matches_brute_force_on_short_segments() {
        let cases = [
            vec![pt(10.0, 20.0), pt(30.0, 20.0)],
            vec![pt(10.3, 20.7), pt(30.1, 23.2)],
            vec![pt(5.0, 5.0), pt(9.0, 30.0), pt(13.0, 8.0), pt(20.5, 17.25)],
        ];
        for path in cases {
            for width in [2.0, 2.37, 3.0] {
                let cov = rasterize(&path, width, 40, 40);
                let brute = brute_counts(&path, width, 40, 40);
                for y in 0..40 {
                    for x in 0..40 {
                        assert_eq!(cov.count(x, y), brute[(y * 40 + x) as usize], "({x},{y}) w={width}");
                    }
                }
            }
        }
    }

    #[test]
    fn horizontal_segment_mask_count() {
        // L = 20 px at width 2.0: between 2L and 3L mask pixels.
        let (mut img, mut mask) = blank(60, 40);
        let bounds = PixelBox::new(0.0, 0.0, 60.0, 40.0);
        draw_trace(&mut img, &mut mask, &[pt(20.0, 20.3), pt(40.0, 20.3)], 2.0, &bounds).unwrap();
        let white = mask.pixels().filter(|p| p.0[0] == 255).count();
        assert!((40..=60).contains(&white), "{white}");
    }

    #[test]
    fn empty_path_changes_nothing() {
        let (mut img, mut mask) = blank(20, 20);
        let (img0, mask0) = (img.clone(), mask.clone());
        draw_trace(&mut img, &mut mask, &[], 2.5, &PixelBox::new(0.0, 0.0, 20.0, 20.0)).unwrap();
        assert_eq!(img, img0);
        assert_eq!(mask, mask0);
    }

    #[test]
    fn out_of_bounds_and_bad_width() {
        let (mut img, mut mask) = blank(50, 50);
        let bounds = PixelBox::new(10.0, 10.0, 20.0, 20.0);
        let far = [pt(12.0, 12.0), pt(20.0, 33.0)];
        assert!(matches!(
            draw_trace(&mut img, &mut mask, &far, 2.0, &bounds),
            Err(RenderError::PathOutOfBounds { .. })
        ));
        let near = [pt(12.0, 12.0), pt(20.0, 31.5)];
        assert!(draw_trace(&mut img, &mut mask, &near, 2.0, &bounds).is_ok());
        assert!(matches!(
            draw_trace(&mut img, &mut mask, &near, 0.0, &bounds),
            Err(RenderError::InvalidStroke(_))
        ));
    }

    #[test]
    fn mask_pixels_are_dark_over_any_background() {
        let mut img = RgbImage::from_fn(64, 64, |x, y| Rgb([255, (x * 4) as u8, (y * 4) as u8]));
        let mut mask = GrayImage::new(64, 64);
        let path: Vec<Point> = (0..60).map(|i| pt(2.0 + i as f64, 32.0 + 20.0 * (i as f64 * 0.3).sin())).collect();
        draw_trace(&mut img, &mut mask, &path, 2.2, &PixelBox::new(0.0, 0.0, 64.0, 64.0)).unwrap();
        for (x, y, m) in mask.enumerate_pixels() {
            assert!(m.0[0] == 0 || m.0[0] == 255);
            if *m == Luma([255]) {
                let p = img.get_pixel(x, y).0;
                let lum = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
                assert!(lum < 128.0, "({x},{y}) {p:?}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn coverage_agrees_with_brute_force(
            ys in prop::collection::vec(4.0f64..28.0, 2..6),
            width in 2.0f64..3.0,
            x0 in 3.0f64..5.0,
        ) {
            let path: Vec<Point> = ys.iter().enumerate().map(|(i, y)| pt(x0 + 5.5 * i as f64, *y)).collect();
            let cov = rasterize(&path, width, 32, 32);
            let brute = brute_counts(&path, width, 32, 32);
            for y in 0..32 {
                for x in 0..32 {
                    prop_assert_eq!(cov.count(x, y), brute[(y * 32 + x) as usize]);
                }
            }
        }
    }
}
