//! Binary PPM (P6) rasters of event windows with box and match overlays.
//! Positive events are red, negative events cyan, on a black background;
//! a later event at the same pixel overwrites an earlier one.

use crate::events::{BoundingBox, Event};

pub const POSITIVE: [u8; 3] = [255, 0, 0];
pub const NEGATIVE: [u8; 3] = [0, 255, 255];
pub const BACKGROUND: [u8; 3] = [0, 0, 0];
pub const BOX_COLOR: [u8; 3] = [0, 255, 0];
pub const MATCH_COLOR: [u8; 3] = [255, 255, 0];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Raster {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![BACKGROUND; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = c;
        }
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    /// Plots events shifted right by `x_offset`.
    pub fn draw_events(&mut self, events: &[Event], x_offset: usize) {
        for e in events {
            let c = if e.p { POSITIVE } else { NEGATIVE };
            self.set(e.x as i64 + x_offset as i64, e.y as i64, c);
        }
    }

    /// One-pixel outline.
    pub fn draw_box(&mut self, b: &BoundingBox, x_offset: usize, c: [u8; 3]) {
        let o = x_offset as i64;
        for x in b.x_min..=b.x_max {
            self.set(x as i64 + o, b.y_min as i64, c);
            self.set(x as i64 + o, b.y_max as i64, c);
        }
        for y in b.y_min..=b.y_max {
            self.set(b.x_min as i64 + o, y as i64, c);
            self.set(b.x_max as i64 + o, y as i64, c);
        }
    }

    /// Bresenham segment, both ends included.
    pub fn draw_line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: [u8; 3]) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            self.set(x, y, c);
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

    pub fn to_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.pixels.len() * 3);
        out.extend_from_slice(header.as_bytes());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }
}

/// Events of one window with optional boxes drawn on top.
pub fn render_overlay(events: &[Event], width: u16, height: u16, boxes: &[BoundingBox]) -> Raster {
    let mut r = Raster::new(width as usize, height as usize);
    r.draw_events(events, 0);
    for b in boxes {
        r.draw_box(b, 0, BOX_COLOR);
    }
    r
}

/// Two windows side by side with a line per matched coordinate pair.
pub fn render_matches(
    a: &[Event],
    b: &[Event],
    width: u16,
    height: u16,
    pairs: &[((u16, u16), (u16, u16))],
) -> Raster {
    let w = width as usize;
    let mut r = Raster::new(2 * w, height as usize);
    r.draw_events(a, 0);
    r.draw_events(b, w);
    for &((xa, ya), (xb, yb)) in pairs {
        r.draw_line(
            (xa as i64, ya as i64),
            (xb as i64 + w as i64, yb as i64),
            MATCH_COLOR,
        );
    }
    r
}
