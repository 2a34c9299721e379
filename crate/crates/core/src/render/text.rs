use font8x8::UnicodeFonts;
use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::geometry::PixelBox;

use super::{RenderError, Result};

/// Glyph cell side in font units.
const CELL: u32 = 8;

/// Characters the label and header text may use.
pub fn is_supported(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, ' ' | '/' | ':' | '.' | ',' | '-')
}

/// Horizontal advance of one glyph drawn `height` pixels tall. Cells are
/// square, so the advance equals the height.
pub fn glyph_advance(height: u32) -> u32 {
    height
}

/// Size of the layout box of `text` at `height`.
pub fn measure(text: &str, height: u32) -> (u32, u32) {
    (text.chars().count() as u32 * glyph_advance(height), height)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextBox {
    pub text: String,
    pub bbox: PixelBox,
}

fn glyph(c: char) -> Result<[u8; 8]> {
    if !is_supported(c) {
        return Err(RenderError::UnsupportedGlyph(c));
    }
    font8x8::BASIC_FONTS.get(c).ok_or(RenderError::UnsupportedGlyph(c))
}

/// Draws `text` in black with its top-left corner at `anchor`, scaling the
/// 8x8 glyphs to `height` by nearest neighbour. The returned box is the
/// text's layout box: `len * advance` wide and `height` tall.
pub fn render_text(canvas: &mut RgbImage, text: &str, anchor: (u32, u32), height: u32) -> Result<TextBox> {
    if text.is_empty() {
        return Err(RenderError::EmptyText);
    }
    if height == 0 {
        return Err(RenderError::TextOutOfBounds);
    }
    let glyphs = text.chars().map(glyph).collect::<Result<Vec<_>>>()?;
    let (w, h) = measure(text, height);
    let (x0, y0) = anchor;
    if u64::from(x0) + u64::from(w) > u64::from(canvas.width()) || u64::from(y0) + u64::from(h) > u64::from(canvas.height()) {
        return Err(RenderError::TextOutOfBounds);
    }
    let advance = glyph_advance(height);
    for (k, rows) in glyphs.iter().enumerate() {
        let gx = x0 + k as u32 * advance;
        for dy in 0..height {
            let bits = rows[(dy * CELL / height) as usize];
            if bits == 0 {
                continue;
            }
            for dx in 0..advance {
                if bits >> (dx * CELL / advance) & 1 == 1 {
                    canvas.put_pixel(gx + dx, y0 + dy, Rgb([0, 0, 0]));
                }
            }
        }
    }
    Ok(TextBox {
        text: text.to_string(),
        bbox: PixelBox::new(f64::from(x0), f64::from(y0), f64::from(w), f64::from(h)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn white(w: u32, h: u32) -> RgbImage {
        RgbImage::from_pixel(w, h, Rgb([255, 255, 255]))
    }

    #[test]
    fn avr_box_at_height_40() {
        let mut c = white(300, 100);
        let b = render_text(&mut c, "aVR", (10, 20), 40).unwrap();
        assert_eq!(b.bbox, PixelBox::new(10.0, 20.0, 3.0 * glyph_advance(40) as f64, 40.0));
    }

    #[test]
    fn ink_stays_inside_the_box() {
        let mut c = white(400, 80);
        let b = render_text(&mut c, "V6 Fs: 500 Hz", (3, 7), 24).unwrap();
        let mut inked = 0;
        for (x, y, p) in c.enumerate_pixels() {
            if p.0 != [255, 255, 255] {
                inked += 1;
                assert!(x as f64 >= b.bbox.x && (x as f64) < b.bbox.right());
                assert!(y as f64 >= b.bbox.y && (y as f64) < b.bbox.bottom());
            }
        }
        assert!(inked > 0);
    }

    #[test]
    fn deterministic() {
        let (mut a, mut b) = (white(200, 60), white(200, 60));
        let ba = render_text(&mut a, "aVL", (5, 5), 32).unwrap();
        let bb = render_text(&mut b, "aVL", (5, 5), 32).unwrap();
        assert_eq!(ba, bb);
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        let mut c = white(100, 50);
        assert!(matches!(render_text(&mut c, "", (0, 0), 10), Err(RenderError::EmptyText)));
        assert!(matches!(render_text(&mut c, "a_b", (0, 0), 10), Err(RenderError::UnsupportedGlyph('_'))));
        assert!(matches!(render_text(&mut c, "é", (0, 0), 10), Err(RenderError::UnsupportedGlyph('é'))));
        assert!(matches!(render_text(&mut c, "abcdefghijk", (0, 0), 10), Err(RenderError::TextOutOfBounds)));
        assert_eq!(c, white(100, 50));
    }

    #[test]
    fn every_supported_glyph_exists() {
        let all: String = ('A'..='Z').chain('a'..='z').chain('0'..='9').chain(" /:.,-".chars()).collect();
        for c in all.chars() {
            assert!(glyph(c).is_ok(), "{c:?}");
            assert_eq!(c != ' ', glyph(c).unwrap().iter().any(|r| *r != 0), "{c:?}");
        }
    }
}
