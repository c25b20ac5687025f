use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::frechet::Segment;
use super::weights::CellWeights;
use crate::{Error, Result};

/// Width and height of rendered SVGs, in pixels.
pub const PLOT_SIZE: f64 = 400.0;
const MARGIN: f64 = 40.0;
/// Share of the plotting area covered by all circles together.
const AREA_SHARE: f64 = 0.05;

/// Vertical (`x`) and horizontal (`y`) reference lines in data coordinates.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Gridlines {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn padded_range(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = PLOT_SIZE
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{s}" height="{s}" fill="white"/>"#, s = PLOT_SIZE);
}

/// Bubble plot: circle area ∝ |W_i|, black for positive and hollow for negative weights.
pub fn scatter_svg(x: &[f64], y: &[f64], weights: &[f64], gridlines: Option<&Gridlines>) -> Result<String> {
    if x.len() != y.len() || x.len() != weights.len() {
        return Err(Error::InvalidArgument("x, y and weights differ in length".into()));
    }
    if x.is_empty() {
        return Err(Error::EmptySample);
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidArgument("non-finite weight".into()));
    }
    let side = PLOT_SIZE - 2.0 * MARGIN;
    let (x0, x1) = padded_range(x);
    let (y0, y1) = padded_range(y);
    let px = |v: f64| MARGIN + side * (v - x0) / (x1 - x0);
    let py = |v: f64| PLOT_SIZE - MARGIN - side * (v - y0) / (y1 - y0);

    let mut out = String::new();
    header(&mut out);
    let _ = writeln!(
        out,
        r#"<rect x="{m:.3}" y="{m:.3}" width="{side:.3}" height="{side:.3}" fill="none" stroke="black"/>"#,
        m = MARGIN
    );
    if let Some(g) = gridlines {
        for &v in g.x.iter().filter(|v| (x0..=x1).contains(*v)) {
            let _ = writeln!(
                out,
                r#"<line x1="{a:.3}" y1="{t:.3}" x2="{a:.3}" y2="{b:.3}" stroke="gray" stroke-dasharray="4 3"/>"#,
                a = px(v),
                t = MARGIN,
                b = PLOT_SIZE - MARGIN
            );
        }
        for &v in g.y.iter().filter(|v| (y0..=y1).contains(*v)) {
            let _ = writeln!(
                out,
                r#"<line x1="{l:.3}" y1="{a:.3}" x2="{r:.3}" y2="{a:.3}" stroke="gray" stroke-dasharray="4 3"/>"#,
                a = py(v),
                l = MARGIN,
                r = PLOT_SIZE - MARGIN
            );
        }
    }
    let total: f64 = crate::sum::exact_sum(weights.iter().map(|w| w.abs()));
    if total > 0.0 {
        let budget = AREA_SHARE * side * side;
        for ((&xv, &yv), &w) in x.iter().zip(y).zip(weights) {
            if w == 0.0 {
                continue;
            }
            let r = (budget * w.abs() / total / std::f64::consts::PI).sqrt();
            let style = if w > 0.0 { r#"fill="black""# } else { r#"fill="white" stroke="black""# };
            let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="{:.6}" {style}/>"#, px(xv), py(yv), r);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_scatter_svg(
    path: &Path,
    x: &[f64],
    y: &[f64],
    weights: &[f64],
    gridlines: Option<&Gridlines>,
) -> Result<()> {
    std::fs::write(path, scatter_svg(x, y, weights, gridlines)?)?;
    Ok(())
}

/// Grayscale cell map, darker for positive weights; gray level 127.5(1 − W/max|W|).
pub fn cell_svg(cells: &CellWeights) -> String {
    let (rows, cols) = cells.shape();
    let max = cells.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let side = PLOT_SIZE - 2.0 * MARGIN;
    let (cw, ch) = (side / cols as f64, side / rows as f64);
    let mut out = String::new();
    header(&mut out);
    for r in 0..rows {
        for c in 0..cols {
            let v = cells.values[r * cols + c];
            let level = if max > 0.0 { (127.5 - 127.5 * v / max).round() as u8 } else { 128 };
            let _ = writeln!(
                out,
                r#"<rect x="{:.3}" y="{:.3}" width="{cw:.3}" height="{ch:.3}" fill="rgb({level},{level},{level})" stroke="black"/>"#,
                MARGIN + c as f64 * cw,
                MARGIN + r as f64 * ch
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            MARGIN + (r as f64 + 0.5) * ch + 4.0,
            escape(&cells.row_labels[r])
        );
    }
    for c in 0..cols {
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="middle">{}</text>"#,
            MARGIN + (c as f64 + 0.5) * cw,
            MARGIN - 6.0,
            escape(&cells.col_labels[c])
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn render_cell_svg(path: &Path, cells: &CellWeights) -> Result<()> {
    std::fs::write(path, cell_svg(cells))?;
    Ok(())
}

/// Line segments in the unit square, y pointing up.
pub fn curves_svg(segments: &[Segment]) -> String {
    let side = PLOT_SIZE - 2.0 * MARGIN;
    let px = |v: f64| MARGIN + side * v;
    let py = |v: f64| PLOT_SIZE - MARGIN - side * v;
    let mut out = String::new();
    header(&mut out);
    let _ = writeln!(
        out,
        r#"<rect x="{m:.3}" y="{m:.3}" width="{side:.3}" height="{side:.3}" fill="none" stroke="black"/>"#,
        m = MARGIN
    );
    for s in segments {
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" stroke-width="2"/>"#,
            px(s.x0),
            py(s.y0),
            px(s.x1),
            py(s.y1)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// CSV with header `index,x,y,weight`, 17 significant digits.
pub fn weights_csv(x: &[f64], y: &[f64], weights: &[f64]) -> Result<String> {
    if x.len() != y.len() || x.len() != weights.len() {
        return Err(Error::InvalidArgument("x, y and weights differ in length".into()));
    }
    let mut out = String::from("index,x,y,weight\n");
    for (i, ((a, b), w)) in x.iter().zip(y).zip(weights).enumerate() {
        let _ = writeln!(out, "{i},{a:.16e},{b:.16e},{w:.16e}");
    }
    Ok(out)
}

pub fn write_weights_csv(path: &Path, x: &[f64], y: &[f64], weights: &[f64]) -> Result<()> {
    std::fs::write(path, weights_csv(x, y, weights)?)?;
    Ok(())
}
