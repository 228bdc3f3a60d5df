//! Deterministic skeleton renderings on a black canvas.
//!
//! No anti-aliasing and integer-only drawing, so identical inputs give
//! byte-identical images on every platform.

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::skeleton::{HandSkeleton, EDGES, NUM_LANDMARKS};

pub type Color = [u8; 3];

pub const MAX_CANVAS_SIDE: u32 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RasterStyle {
    /// Multicolor: one hue per finger chain, gray palm.
    Type1,
    /// Single tone for every node and edge.
    Type2,
}

impl RasterStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            RasterStyle::Type1 => "type1",
            RasterStyle::Type2 => "type2",
        }
    }
}

/// Per-region colors for [`RasterStyle::Type1`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    pub palm: Color,
    pub thumb: Color,
    pub index: Color,
    pub middle: Color,
    pub ring: Color,
    pub pinky: Color,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            palm: [128, 128, 128],
            thumb: [255, 165, 0],
            index: [160, 32, 240],
            middle: [255, 215, 0],
            ring: [0, 200, 0],
            pinky: [0, 128, 255],
        }
    }
}

impl Palette {
    pub fn colors(&self) -> [Color; 6] {
        [self.palm, self.thumb, self.index, self.middle, self.ring, self.pinky]
    }

    fn finger(&self, finger: usize) -> Color {
        match finger {
            0 => self.thumb,
            1 => self.index,
            2 => self.middle,
            3 => self.ring,
            _ => self.pinky,
        }
    }

    /// Wrist is palm-colored; every other joint takes its finger's color.
    pub fn node_color(&self, i: usize) -> Color {
        if i == 0 {
            self.palm
        } else {
            self.finger((i - 1) / 4)
        }
    }

    /// Edges leaving the wrist or joining knuckles are palm; the rest belong to a finger.
    pub fn edge_color(&self, a: usize, b: usize) -> Color {
        let (lo, hi) = (a.min(b), a.max(b));
        let same_finger = lo != 0 && (lo - 1) / 4 == (hi - 1) / 4;
        if lo == 0 && hi == 1 {
            // thumb base is part of the palm outline
            self.palm
        } else if same_finger {
            self.finger((hi - 1) / 4)
        } else {
            self.palm
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RasterSpec {
    pub width: u32,
    pub height: u32,
    pub node_radius: u32,
    pub line_width: u32,
    pub style: RasterStyle,
    pub background: Color,
    pub palette: Palette,
    pub tone: Color,
}

impl Default for RasterSpec {
    fn default() -> Self {
        RasterSpec {
            width: 224,
            height: 224,
            node_radius: 4,
            line_width: 2,
            style: RasterStyle::Type1,
            background: [0, 0, 0],
            palette: Palette::default(),
            tone: [255, 255, 255],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RasterError {
    #[error("canvas must be between 1x1 and {MAX_CANVAS_SIDE}x{MAX_CANVAS_SIDE}, got {0}x{1}")]
    Canvas(u32, u32),
    #[error("node_radius and line_width must be at least 1")]
    Stroke,
}

impl RasterSpec {
    pub fn with_style(style: RasterStyle) -> Self {
        RasterSpec { style, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        if self.width == 0 || self.height == 0 || self.width > MAX_CANVAS_SIDE || self.height > MAX_CANVAS_SIDE {
            return Err(RasterError::Canvas(self.width, self.height));
        }
        if self.node_radius < 1 || self.line_width < 1 {
            return Err(RasterError::Stroke);
        }
        Ok(())
    }
}

/// Maps an image-relative coordinate to a pixel index, rounding half away
/// from zero and clamping to `[0, side - 1]`.
pub fn to_pixel(coord: f64, side: u32) -> i64 {
    let max = (side - 1) as i64;
    let p = (coord * (side - 1) as f64).round();
    if p.is_nan() || p <= 0.0 {
        0
    } else if p >= max as f64 {
        max
    } else {
        p as i64
    }
}

struct Canvas {
    img: RgbImage,
}

impl Canvas {
    fn put(&mut self, x: i64, y: i64, c: Color) {
        if x >= 0 && y >= 0 && (x as u32) < self.img.width() && (y as u32) < self.img.height() {
            self.img.put_pixel(x as u32, y as u32, Rgb(c));
        }
    }

    fn square(&mut self, cx: i64, cy: i64, side: u32, c: Color) {
        let lo = -((side as i64 - 1) / 2);
        let hi = lo + side as i64 - 1;
        for dy in lo..=hi {
            for dx in lo..=hi {
                self.put(cx + dx, cy + dy, c);
            }
        }
    }

    /// Bresenham centerline with a square pen, which also gives square caps.
    fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64), width: u32, c: Color) {
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        let (mut x, mut y) = (x0, y0);
        loop {
            self.square(x, y, width, c);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    fn disc(&mut self, cx: i64, cy: i64, r: u32, c: Color) {
        let r = r as i64;
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    self.put(cx + dx, cy + dy, c);
                }
            }
        }
    }
}

/// Renders the skeleton: edges first, then filled node discs on top.
pub fn rasterize(skeleton: &HandSkeleton, spec: &RasterSpec) -> Result<RgbImage, RasterError> {
    spec.validate()?;
    let mut canvas = Canvas {
        img: RgbImage::from_pixel(spec.width, spec.height, Rgb(spec.background)),
    };
    let pts: Vec<(i64, i64)> = skeleton
        .landmarks()
        .iter()
        .map(|l| (to_pixel(l.x, spec.width), to_pixel(l.y, spec.height)))
        .collect();

    for &(a, b) in EDGES.iter() {
        let color = match spec.style {
            RasterStyle::Type1 => spec.palette.edge_color(a, b),
            RasterStyle::Type2 => spec.tone,
        };
        canvas.line(pts[a], pts[b], spec.line_width, color);
    }
    for (i, &(x, y)) in pts.iter().enumerate().take(NUM_LANDMARKS) {
        let color = match spec.style {
            RasterStyle::Type1 => spec.palette.node_color(i),
            RasterStyle::Type2 => spec.tone,
        };
        canvas.disc(x, y, spec.node_radius, color);
    }
    Ok(canvas.img)
}

/// PNG bytes for an image produced by [`rasterize`].
pub fn encode_png(img: &RgbImage) -> Vec<u8> {
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .expect("in-memory PNG encoding cannot fail");
    out.into_inner()
}
