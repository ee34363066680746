//! Minimal static SVG line charts laid out as a grid of panels.

use std::fmt::Write;

const PALETTE: [&str; 8] = ["#1f5fbf", "#d9a21b", "#7a4a1f", "#2a9d5c", "#8e44ad", "#c0392b", "#16a0b5", "#555555"];
const PANEL_W: f64 = 340.0;
const PANEL_H: f64 = 260.0;
const MARGIN: (f64, f64, f64, f64) = (52.0, 14.0, 28.0, 40.0); // left, right, top, bottom

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dashed: bool,
    /// Index into the palette; `None` picks by position.
    pub color: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub series: Vec<Series>,
    /// Horizontal reference line, drawn dotted in red.
    pub hline: Option<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn render_panel(out: &mut String, p: &Panel, ox: f64, oy: f64) {
    let (ml, mr, mt, mb) = MARGIN;
    let (w, h) = (PANEL_W - ml - mr, PANEL_H - mt - mb);
    let finite = |v: &f64| v.is_finite();
    let xs: Vec<f64> = p.series.iter().flat_map(|s| s.x.iter().copied()).filter(finite).collect();
    let mut ys: Vec<f64> = p
        .series
        .iter()
        .flat_map(|s| s.y.iter().copied())
        .filter(finite)
        .collect();
    if let Some(hl) = p.hline {
        ys.push(hl);
    }
    let (x0, x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let _ = writeln!(
        out,
        r##"<g transform="translate({ox},{oy})"><text x="{}" y="16" font-size="13" text-anchor="middle">{}</text>"##,
        PANEL_W / 2.0,
        escape(&p.title)
    );
    let _ = writeln!(out, r##"<rect x="{ml}" y="{mt}" width="{w}" height="{h}" fill="none" stroke="#333"/>"##);
    if !(x0.is_finite() && y0.is_finite()) {
        out.push_str("</g>\n");
        return;
    }
    if y1 - y0 < 1e-12 * y1.abs().max(1.0) {
        y0 -= 0.5 * y0.abs().max(1e-6);
        y1 += 0.5 * y1.abs().max(1e-6);
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * w;
    let sy = |y: f64| mt + h - (y - y0) / (y1 - y0) * h;
    for t in ticks(x0, x1) {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#333"/><text x="{0:.2}" y="{3:.2}" font-size="10" text-anchor="middle">{4}</text>"##,
            sx(t),
            mt + h,
            mt + h + 4.0,
            mt + h + 15.0,
            fmt_tick(t)
        );
    }
    for t in ticks(y0, y1) {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="#333"/><text x="{3:.2}" y="{4:.2}" font-size="10" text-anchor="end">{5}</text>"##,
            ml - 4.0,
            sy(t),
            ml,
            ml - 6.0,
            sy(t) + 3.5,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"##,
        ml + w / 2.0,
        PANEL_H - 6.0,
        escape(&p.x_label)
    );
    if let Some(hl) = p.hline {
        let _ = writeln!(
            out,
            r##"<line x1="{ml}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#d62728" stroke-dasharray="2,3"/>"##,
            sy(hl),
            ml + w
        );
    }
    for (i, s) in p.series.iter().enumerate() {
        let color = PALETTE[s.color.unwrap_or(i) % PALETTE.len()];
        let dash = if s.dashed { r#" stroke-dasharray="5,3""# } else { "" };
        // break the polyline at non-finite values
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, out: &mut String| {
            if segment.len() > 1 {
                let _ = writeln!(
                    out,
                    r##"<polyline fill="none" stroke="{color}" stroke-width="1.6"{dash} points="{}"/>"##,
                    segment.join(" ")
                );
            }
            segment.clear();
        };
        for (&x, &y) in s.x.iter().zip(&s.y) {
            if x.is_finite() && y.is_finite() {
                segment.push(format!("{:.2},{:.2}", sx(x), sy(y)));
            } else {
                flush(&mut segment, out);
            }
        }
        flush(&mut segment, out);
        let ly = mt + 12.0 + 12.0 * i as f64;
        let _ = writeln!(
            out,
            r##"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="{color}" stroke-width="1.6"{dash}/><text x="{3:.1}" y="{4:.1}" font-size="9">{5}</text>"##,
            ml + 6.0,
            ly,
            ml + 22.0,
            ml + 25.0,
            ly + 3.0,
            escape(&s.label)
        );
    }
    out.push_str("</g>\n");
}

/// Renders the panels row by row, `columns` per row.
pub fn render(panels: &[Panel], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns).max(1);
    let (width, height) = (PANEL_W * columns as f64, PANEL_H * rows as f64);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        let (c, r) = (i % columns, i / columns);
        render_panel(&mut out, p, c as f64 * PANEL_W, r as f64 * PANEL_H);
    }
    out.push_str("</svg>\n");
    out
}
