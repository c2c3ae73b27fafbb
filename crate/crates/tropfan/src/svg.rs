//! SVG 1.1 drawing of a planar classifier: regions, decision boundary and data points.
//!
//! Geometry is clipped exactly; coordinates become decimals with 9 significant digits only when written.

use std::fmt::Write;

use tropfan_core::activation::Dataset;
use tropfan_core::classification::Dichotomy;
use tropfan_core::dual::{boundary_segments, region_polygon, vertex_centroid, Segment, Window};
use tropfan_core::rational::{int, to_decimal};
use tropfan_core::{Error, Rational, Result, Sign, TropicalRational};

pub const SIGNIFICANT_DIGITS: usize = 9;
const WIDTH: i64 = 600;

struct Canvas {
    window: Window,
    scale: Rational,
}

impl Canvas {
    fn x(&self, x: &Rational) -> String {
        to_decimal(&((x - &self.window.x0) * &self.scale), SIGNIFICANT_DIGITS)
    }

    fn y(&self, y: &Rational) -> String {
        to_decimal(&((&self.window.y1 - y) * &self.scale), SIGNIFICANT_DIGITS)
    }

    fn height(&self) -> String {
        to_decimal(&((&self.window.y1 - &self.window.y0) * &self.scale), SIGNIFICANT_DIGITS)
    }
}

/// Renders the classifier `num − den` on `window`. Points are colored by `target` when given.
pub fn render_svg(
    f: &TropicalRational,
    data: Option<&Dataset>,
    target: Option<&Dichotomy>,
    window: &Window,
) -> Result<String> {
    let points = data.map_or(&[][..], Dataset::points);
    if f.dim() != 2 || data.is_some_and(|d| d.dim() != 2) {
        return Err(Error::Precondition("drawing needs d = 2".into()));
    }
    if let Some(t) = target {
        if t.len() != points.len() {
            return Err(Error::ShapeMismatch("target length differs from the number of points".into()));
        }
    }
    let segments = boundary_segments(f, window)?;
    let canvas = Canvas { window: window.clone(), scale: int(WIDTH) / (&window.x1 - &window.x0) };
    let merged = f.merged();

    let mut out = String::new();
    let h = canvas.height();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{h}\" viewBox=\"0 0 {WIDTH} {h}\">"
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{h}\" fill=\"white\"/>");

    out.push_str("<g id=\"regions\" stroke=\"#9a9a9a\" stroke-width=\"0.5\">\n");
    let mut labels = String::new();
    for i in 0..merged.len() {
        let poly = region_polygon(&merged, i, window)?;
        if poly.is_empty() {
            continue;
        }
        let fill = if i < f.n() { "#dbe9f6" } else { "#f6dcdb" };
        let points: Vec<String> = poly.iter().map(|p| format!("{},{}", canvas.x(&p[0]), canvas.y(&p[1]))).collect();
        let _ = writeln!(out, "<polygon points=\"{}\" fill=\"{fill}\"/>", points.join(" "));
        if let Some(c) = vertex_centroid(&poly) {
            let _ = writeln!(
                labels,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                canvas.x(&c[0]),
                canvas.y(&c[1]),
                i + 1
            );
        }
    }
    out.push_str("</g>\n");

    out.push_str("<g id=\"boundary\" stroke=\"black\" stroke-width=\"2\">\n");
    for Segment { edge, start, end } in &segments {
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" data-edge=\"{},{}\"/>",
            canvas.x(&start[0]),
            canvas.y(&start[1]),
            canvas.x(&end[0]),
            canvas.y(&end[1]),
            edge.i + 1,
            edge.j + 1
        );
    }
    out.push_str("</g>\n");

    out.push_str("<g id=\"labels\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#444\">\n");
    out.push_str(&labels);
    out.push_str("</g>\n");

    out.push_str("<g id=\"points\" stroke=\"black\" stroke-width=\"0.5\">\n");
    for (k, p) in points.iter().enumerate() {
        let color = match target.map(|t| t.signs()[k]) {
            Some(Sign::Positive) => "#1f77b4",
            Some(Sign::Negative) => "#d62728",
            _ => "#555555",
        };
        let _ = writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/>", canvas.x(&p[0]), canvas.y(&p[1]));
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
