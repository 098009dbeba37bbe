//! Static SVG rendering of a record with its fiducial markers.

use scg_core::delineator::FIDUCIALS;
use scg_core::formats::RecordFile;
use scg_core::BeatAnnotation;
use std::fmt::Write;

const WIDTH: f64 = 1200.0;
const PANEL_HEIGHT: f64 = 220.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const PANEL_GAP: f64 = 40.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Sample span actually drawn and whether the request had to be clipped.
pub fn sample_span(n: usize, fs: f64, t0: f64, range_s: Option<(f64, f64)>) -> (usize, usize, bool) {
    let Some((a, b)) = range_s else { return (0, n, false) };
    let to_index = |t: f64| ((t - t0) * fs).round().clamp(0.0, n as f64) as usize;
    let (start, end) = (to_index(a), to_index(b));
    let clipped = a < t0 || b > t0 + (n.saturating_sub(1)) as f64 / fs;
    if end <= start {
        (0, n, true)
    } else {
        (start, end, clipped)
    }
}

/// Min/max decimation to roughly two points per horizontal pixel.
fn decimate(x: &[f64], start: usize, end: usize, pixels: usize) -> Vec<(usize, f64)> {
    let len = end - start;
    if len <= 2 * pixels {
        return (start..end).map(|i| (i, x[i])).collect();
    }
    let mut out = Vec::with_capacity(2 * pixels);
    for p in 0..pixels {
        let lo = start + p * len / pixels;
        let hi = (start + (p + 1) * len / pixels).max(lo + 1);
        let (mut imin, mut imax) = (lo, lo);
        for i in lo..hi {
            if x[i] < x[imin] {
                imin = i;
            }
            if x[i] > x[imax] {
                imax = i;
            }
        }
        let (a, b) = if imin <= imax { (imin, imax) } else { (imax, imin) };
        out.push((a, x[a]));
        if b != a {
            out.push((b, x[b]));
        }
    }
    out
}

struct Panel {
    top: f64,
    lo: f64,
    hi: f64,
    start: usize,
    end: usize,
}

impl Panel {
    fn new(x: &[f64], start: usize, end: usize, top: f64) -> Self {
        let (mut lo, mut hi) = x[start..end].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        if !(hi > lo) {
            lo -= 1.0;
            hi += 1.0;
        }
        Self { top, lo, hi, start, end }
    }

    fn px(&self, i: usize) -> f64 {
        let span = (self.end - self.start).max(2) - 1;
        MARGIN_LEFT + (i - self.start) as f64 / span as f64 * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        self.top + PANEL_HEIGHT * (1.0 - (v - self.lo) / (self.hi - self.lo))
    }
}

fn trace(svg: &mut String, name: &str, x: &[f64], panel: &Panel, color: &str) {
    let pixels = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) as usize;
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_LEFT}" y="{:.2}" width="{:.2}" height="{PANEL_HEIGHT}" fill="none" stroke="#cccccc"/>"##,
        panel.top,
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    );
    let _ = writeln!(svg, r#"<text x="8" y="{:.2}" font-size="14">{name}</text>"#, panel.top + PANEL_HEIGHT / 2.0);
    let points: Vec<String> = decimate(x, panel.start, panel.end, pixels)
        .into_iter()
        .map(|(i, v)| format!("{:.2},{:.2}", panel.px(i), panel.py(v)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline id="trace-{}" fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
        name.to_lowercase(),
        points.join(" ")
    );
}

pub fn render_svg(record: &RecordFile, beats: &[BeatAnnotation], start: usize, end: usize) -> String {
    let height = MARGIN_TOP + 2.0 * PANEL_HEIGHT + PANEL_GAP + 40.0;
    let ppg = &record.ppg.samples;
    let scg = &record.scg.samples;
    let ppg_panel = Panel::new(ppg, start, end, MARGIN_TOP);
    let scg_panel = Panel::new(scg, start, end, MARGIN_TOP + PANEL_HEIGHT + PANEL_GAP);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    trace(&mut svg, "PPG", ppg, &ppg_panel, "#444444");
    trace(&mut svg, "SCG", scg, &scg_panel, "#000000");

    for (k, name) in FIDUCIALS.iter().enumerate() {
        let points: Vec<usize> = beats
            .iter()
            .filter_map(|b| b.points()[k])
            .filter(|&i| i >= start && i < end && i < scg.len())
            .collect();
        if points.is_empty() {
            continue;
        }
        let _ = writeln!(svg, r#"<g id="marker-{name}" class="fiducial" fill="{}" font-size="10">"#, COLORS[k]);
        for i in points {
            let (x, y) = (scg_panel.px(i), scg_panel.py(scg[i]));
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
            let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{name}</text>"#, y - 6.0);
        }
        let _ = writeln!(svg, "</g>");
    }

    let t_start = record.t0 + start as f64 / record.fs;
    let t_end = record.t0 + (end - 1) as f64 / record.fs;
    let axis_y = height - 12.0;
    let _ = writeln!(svg, r#"<text x="{MARGIN_LEFT}" y="{axis_y:.2}" font-size="12">{t_start:.3} s</text>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{axis_y:.2}" font-size="12" text-anchor="end">{t_end:.3} s</text>"#,
        WIDTH - MARGIN_RIGHT
    );
    let _ = writeln!(svg, "</svg>");
    svg
}
