//! Minimal plot rasterizer: auto-scaled axes with ticks and a polyline,
//! written as an 8-bit RGB PNG without metadata chunks.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

type Rgb = [u8; 3];

const WHITE: Rgb = [255, 255, 255];
const AXIS: Rgb = [90, 90, 90];
const GRID: Rgb = [228, 228, 228];
const INK: Rgb = [20, 60, 170];
const MARGIN: i64 = 40;

pub struct Canvas {
    pub width: u32,
    pub height: u32,
    pixels: Vec<u8>,
}

impl Canvas {
    pub fn new(width: u32, height: u32) -> Canvas {
        Canvas {
            width,
            height,
            pixels: WHITE.repeat(width as usize * height as usize),
        }
    }

    fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let i = 3 * (y as usize * self.width as usize + x as usize);
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Bresenham segment.
    fn line(&mut self, (mut x0, mut y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let mut err = dx + dy;
        loop {
            self.put(x0, y0, c);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    pub fn write_png<W: Write>(&self, w: W) -> Result<()> {
        let mut enc = png::Encoder::new(w, self.width, self.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&self.pixels)?;
        writer.finish()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        self.write_png(BufWriter::new(f))
            .with_context(|| format!("writing {}", path.display()))
    }
}

/// Tick spacing 1, 2 or 5 times a power of ten, about `target` ticks.
pub fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let p = 10f64.powf(raw.log10().floor());
    let m = raw / p;
    let f = if m < 1.5 {
        1.0
    } else if m < 3.5 {
        2.0
    } else if m < 7.5 {
        5.0
    } else {
        10.0
    };
    f * p
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn fit(points: &[Option<(f64, f64)>], width: u32, height: u32, equal_aspect: bool) -> Frame {
        let finite = points.iter().flatten().filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in finite {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !(x0 <= x1) {
            (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        let pad = |a: f64, b: f64| {
            let s = (b - a).max(1e-300 + 1e-12 * a.abs().max(b.abs()));
            (a - 0.05 * s, b + 0.05 * s)
        };
        let ((mut x0, mut x1), (mut y0, mut y1)) = (pad(x0, x1), pad(y0, y1));
        let w = (width as i64 - 2 * MARGIN) as f64;
        let h = (height as i64 - 2 * MARGIN) as f64;
        if equal_aspect {
            // widen the short side so one unit has the same length on both axes
            let sx = (x1 - x0) / w;
            let sy = (y1 - y0) / h;
            if sx > sy {
                let extra = (sx * h - (y1 - y0)) / 2.0;
                y0 -= extra;
                y1 += extra;
            } else {
                let extra = (sy * w - (x1 - x0)) / 2.0;
                x0 -= extra;
                x1 += extra;
            }
        }
        Frame { x0, x1, y0, y1, w, h }
    }

    fn to_px(&self, x: f64, y: f64) -> (i64, i64) {
        let px = MARGIN as f64 + (x - self.x0) / (self.x1 - self.x0) * self.w;
        let py = MARGIN as f64 + (self.y1 - y) / (self.y1 - self.y0) * self.h;
        (px.round() as i64, py.round() as i64)
    }
}

fn draw_axes(cv: &mut Canvas, f: &Frame) {
    let (left, top) = (MARGIN, MARGIN);
    let (right, bottom) = (MARGIN + f.w as i64, MARGIN + f.h as i64);
    // axes through 0 when visible, else along the border
    let ax_y = if f.y0 <= 0.0 && 0.0 <= f.y1 { f.to_px(0.0, 0.0).1 } else { bottom };
    let ax_x = if f.x0 <= 0.0 && 0.0 <= f.x1 { f.to_px(0.0, 0.0).0 } else { left };
    let sx = nice_step(f.x1 - f.x0, 6.0);
    let mut t = (f.x0 / sx).ceil() * sx;
    while t <= f.x1 {
        let (px, _) = f.to_px(t, 0.0);
        cv.line((px, top), (px, bottom), GRID);
        cv.line((px, ax_y - 4), (px, ax_y + 4), AXIS);
        t += sx;
    }
    let sy = nice_step(f.y1 - f.y0, 6.0);
    let mut t = (f.y0 / sy).ceil() * sy;
    while t <= f.y1 {
        let (_, py) = f.to_px(0.0, t);
        cv.line((left, py), (right, py), GRID);
        cv.line((ax_x - 4, py), (ax_x + 4, py), AXIS);
        t += sy;
    }
    cv.line((left, ax_y), (right, ax_y), AXIS);
    cv.line((ax_x, top), (ax_x, bottom), AXIS);
}

/// Polyline through `points` in order; None entries break the line.
/// `closed` joins the last point back to the first; `max_jump` (in data
/// units of y) breaks segments across larger jumps.
pub struct PlotSpec {
    pub equal_aspect: bool,
    pub closed: bool,
    pub max_jump: Option<f64>,
}

pub fn plot(points: &[Option<(f64, f64)>], width: u32, height: u32, spec: &PlotSpec) -> Canvas {
    let mut cv = Canvas::new(width, height);
    let f = Frame::fit(points, width, height, spec.equal_aspect);
    draw_axes(&mut cv, &f);
    let n = points.len();
    let segments = if spec.closed { n } else { n.saturating_sub(1) };
    for i in 0..segments {
        let (Some(a), Some(b)) = (points[i], points[(i + 1) % n]) else {
            continue;
        };
        if let Some(j) = spec.max_jump {
            if (b.1 - a.1).abs() > j {
                continue;
            }
        }
        cv.line(f.to_px(a.0, a.1), f.to_px(b.0, b.1), INK);
    }
    if n == 1 {
        if let Some(p) = points[0] {
            let (x, y) = f.to_px(p.0, p.1);
            cv.put(x, y, INK);
        }
    }
    cv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_steps_are_nice() {
        assert_eq!(nice_step(1.0, 5.0), 0.2);
        assert_eq!(nice_step(10.0, 4.0), 2.0);
        assert!((nice_step(0.003, 6.0) - 5e-4).abs() < 1e-18);
    }

    #[test]
    fn polyline_is_drawn_and_gaps_are_left_open() {
        let pts = vec![Some((0.0, 0.0)), Some((1.0, 1.0)), None, Some((2.0, 0.0))];
        let spec = PlotSpec { equal_aspect: false, closed: false, max_jump: None };
        let cv = plot(&pts, 200, 200, &spec);
        let ink = (0..200).flat_map(|x| (0..200).map(move |y| (x, y))).filter(|&(x, y)| cv.pixel(x, y) == INK).count();
        assert!(ink > 50);
    }

    #[test]
    fn png_bytes_are_deterministic() {
        let pts: Vec<_> = (0..50).map(|i| Some(((i as f64).cos(), (i as f64).sin()))).collect();
        let spec = PlotSpec { equal_aspect: true, closed: true, max_jump: None };
        let mut a = Vec::new();
        let mut b = Vec::new();
        plot(&pts, 120, 100, &spec).write_png(&mut a).unwrap();
        plot(&pts, 120, 100, &spec).write_png(&mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(&a[1..4], b"PNG");
    }
}
