//! Text artifact helpers: fixed-precision numbers and a minimal SVG writer.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// Scientific notation with 17 significant digits.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub const SVG_SIZE: f64 = 800.0;
pub const SVG_MARGIN: f64 = 20.0;

/// SVG canvas over a world box. The box is fitted into an 800x800 canvas with a
/// 20 px margin using one uniform scale; world `y` points up.
pub struct Svg {
    lo: [f64; 2],
    scale: f64,
    body: String,
}

impl Svg {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
        Self { lo, scale: (SVG_SIZE - 2.0 * SVG_MARGIN) / span, body: String::new() }
    }

    /// Box covering all points, padded by 5%.
    pub fn fit(points: impl IntoIterator<Item = [f64; 2]>) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        if !lo[0].is_finite() {
            return Self::new([-1.0, -1.0], [1.0, 1.0]);
        }
        let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        Self::new([lo[0] - pad, lo[1] - pad], [hi[0] + pad, hi[1] + pad])
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (SVG_MARGIN + (p[0] - self.lo[0]) * self.scale, SVG_SIZE - SVG_MARGIN - (p[1] - self.lo[1]) * self.scale)
    }

    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], stroke: &str, width: f64) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.4}" y1="{y1:.4}" x2="{x2:.4}" y2="{y2:.4}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], stroke: &str, width: f64) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.4},{y:.4}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            coords.join(" ")
        );
    }

    pub fn dot(&mut self, p: [f64; 2], r: f64, fill: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(self.body, r#"<circle cx="{x:.4}" cy="{y:.4}" r="{r}" fill="{fill}"/>"#);
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            s = SVG_SIZE
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(1.0), "1.0000000000000000e0");
        assert_eq!(sig17(0.1), "1.0000000000000001e-1");
        assert_eq!(sig17(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn viewport_maps_corners() {
        let s = Svg::new([0.0, 0.0], [2.0, 1.0]);
        assert_eq!(s.map([0.0, 0.0]), (20.0, 780.0));
        assert_eq!(s.map([2.0, 0.0]), (780.0, 780.0));
    }
}
