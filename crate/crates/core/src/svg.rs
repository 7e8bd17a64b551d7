//! Plain SVG figures: toolpath maps, line charts and grouped bar panels.

use std::fmt::Write;

use crate::environment::Environment;
use crate::pgf::{Leg, StructureSpec};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Two decimals, trailing zeros dropped.
fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn open(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = num(w),
        h = num(h)
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, extra: &str, s: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="{anchor}"{extra}>{}</text>"#,
        num(x),
        num(y),
        escape(s)
    );
}

/// Workspace, obstacle clearance disks, structure vertices and one `<path>`
/// per planned leg. A failed pair is drawn as a dashed line between its
/// vertices.
pub fn toolpath_svg(
    env: &Environment,
    structure: &StructureSpec,
    legs: &[Leg],
    failed_pair: Option<usize>,
    title: &str,
) -> String {
    let ws = env.workspace();
    let pad = 30.0;
    let (w, h) = (ws.width() + 2.0 * pad, ws.height() + 2.0 * pad);
    let sx = |x: f64| x - ws.min_x + pad;
    let sy = |y: f64| ws.max_y - y + pad;
    let mut out = String::new();
    open(&mut out, w, h);
    text(&mut out, w / 2.0, 20.0, "middle", "", title);
    let _ = writeln!(
        out,
        r#"<rect class="workspace" x="{p}" y="{p}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        num(ws.width()),
        num(ws.height()),
        p = num(pad)
    );
    let _ = writeln!(out, r##"<g class="obstacles" fill="#888" fill-opacity="0.45">"##);
    for o in env.obstacles() {
        let _ = writeln!(
            out,
            r#"<circle class="obstacle" cx="{}" cy="{}" r="{}"/>"#,
            num(sx(o.x)),
            num(sy(o.y)),
            num(env.clearance())
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g class="legs" fill="none" stroke-width="2.5">"#);
    for leg in legs {
        let mut d = String::new();
        for (i, p) in leg.path.waypoints.iter().enumerate() {
            let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, num(sx(p.x)), num(sy(p.y)));
        }
        let _ = writeln!(
            out,
            r#"<path class="leg" data-pair="{}" stroke="{}" d="{}"/>"#,
            leg.pair,
            color(leg.pair),
            d.trim_end()
        );
    }
    let _ = writeln!(out, "</g>");
    if let Some(k) = failed_pair {
        let (a, b) = structure.pair(k);
        let _ = writeln!(
            out,
            r#"<line class="failed" x1="{}" y1="{}" x2="{}" y2="{}" stroke="red" stroke-dasharray="8 6"/>"#,
            num(sx(a.x)),
            num(sy(a.y)),
            num(sx(b.x)),
            num(sy(b.y))
        );
    }
    for (i, v) in structure.vertices().iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<rect class="vertex" x="{}" y="{}" width="10" height="10" fill="black"/>"#,
            num(sx(v.x) - 5.0),
            num(sy(v.y) - 5.0)
        );
        text(&mut out, sx(v.x) + 8.0, sy(v.y) - 8.0, "start", "", &format!("V{}", i + 1));
    }
    out.push_str("</svg>\n");
    out
}

/// Roughly five round tick values covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|i| (i as f64 * step * 1e9).round() / 1e9).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// `None` leaves a gap (e.g. a mean over zero successes).
    pub points: Vec<(f64, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    /// Fixed y range; otherwise fitted to the data with zero included.
    pub y_range: Option<(f64, f64)>,
}

impl LineChart {
    pub fn render(&self, series: &[Series]) -> String {
        let (w, h) = (720.0, 460.0);
        let (left, right, top, bottom) = (70.0, 150.0, 40.0, 60.0);
        let (pw, ph) = (w - left - right, h - top - bottom);
        let tx = |x: f64| if self.log_x { x.max(f64::MIN_POSITIVE).log2() } else { x };

        let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
        let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().filter_map(|p| p.1)).collect();
        let (x0, x1) = bounds(xs.iter().map(|&x| tx(x)));
        let (y0, y1) = self.y_range.unwrap_or_else(|| {
            let (_, hi) = bounds(ys.iter().copied().chain([0.0]));
            (0.0, if hi > 0.0 { hi * 1.1 } else { 1.0 })
        });
        let px = |x: f64| left + if x1 > x0 { (tx(x) - x0) / (x1 - x0) * pw } else { pw / 2.0 };
        let py = |y: f64| top + ph - if y1 > y0 { (y - y0) / (y1 - y0) * ph } else { ph / 2.0 };

        let mut out = String::new();
        open(&mut out, w, h);
        text(&mut out, w / 2.0, 22.0, "middle", r#" font-size="15""#, &self.title);
        let _ = writeln!(
            out,
            r#"<rect class="plot-area" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            num(left),
            num(top),
            num(pw),
            num(ph)
        );
        let mut xticks: Vec<f64> = xs.clone();
        xticks.sort_by(f64::total_cmp);
        xticks.dedup();
        if xticks.len() > 12 {
            xticks = if self.log_x {
                xticks.iter().copied().step_by(xticks.len().div_ceil(10)).collect()
            } else {
                nice_ticks(x0, x1)
            };
        }
        for x in xticks {
            let xp = px(x);
            let _ = writeln!(
                out,
                r#"<line x1="{xp}" y1="{b}" x2="{xp}" y2="{b2}" stroke="black"/>"#,
                xp = num(xp),
                b = num(top + ph),
                b2 = num(top + ph + 5.0)
            );
            text(&mut out, xp, top + ph + 18.0, "middle", "", &num(x));
        }
        for y in nice_ticks(y0, y1) {
            let yp = py(y);
            let _ = writeln!(
                out,
                r##"<line x1="{l}" y1="{yp}" x2="{r}" y2="{yp}" stroke="#ddd"/>"##,
                l = num(left),
                r = num(left + pw),
                yp = num(yp)
            );
            text(&mut out, left - 8.0, yp + 4.0, "end", "", &num(y));
        }
        text(&mut out, left + pw / 2.0, h - 15.0, "middle", "", &self.x_label);
        text(
            &mut out,
            18.0,
            top + ph / 2.0,
            "middle",
            &format!(r#" transform="rotate(-90 18 {})""#, num(top + ph / 2.0)),
            &self.y_label,
        );

        for (i, s) in series.iter().enumerate() {
            let c = color(i);
            let _ = writeln!(out, r#"<g class="series" stroke="{c}" fill="{c}">"#);
            for run in s.points.split(|p| p.1.is_none()).filter(|r| !r.is_empty()) {
                let pts: Vec<String> = run
                    .iter()
                    .map(|&(x, y)| format!("{},{}", num(px(x)), num(py(y.unwrap()))))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke-width="2" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            for &(x, y) in &s.points {
                if let Some(y) = y {
                    let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="3"/>"#, num(px(x)), num(py(y)));
                }
            }
            let _ = writeln!(out, "</g>");
            let ly = top + 10.0 + 20.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="14" height="4" fill="{c}"/>"#,
                num(left + pw + 15.0),
                num(ly - 4.0)
            );
            text(&mut out, left + pw + 35.0, ly + 2.0, "start", "", &s.name);
        }
        out.push_str("</svg>\n");
        out
    }
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// One panel per metric, one bar per group member inside each panel.
/// `values[m][g]` is the value of member `g` for metric `m`; `None` bars
/// are omitted.
pub fn grouped_bars(title: &str, metrics: &[String], members: &[String], values: &[Vec<Option<f64>>]) -> String {
    let panel_w = 150.0;
    let (left, top, ph) = (30.0, 50.0, 260.0);
    let w = left * 2.0 + panel_w * metrics.len() as f64 + 130.0;
    let h = top + ph + 70.0;
    let mut out = String::new();
    open(&mut out, w, h);
    text(&mut out, w / 2.0, 24.0, "middle", r#" font-size="15""#, title);
    for (m, name) in metrics.iter().enumerate() {
        let x0 = left + panel_w * m as f64;
        let row = values.get(m).map(Vec::as_slice).unwrap_or(&[]);
        let hi = row.iter().flatten().copied().fold(0.0, f64::max);
        let scale = if hi > 0.0 { ph / (hi * 1.15) } else { 0.0 };
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/>"#,
            num(x0 + 10.0),
            num(x0 + panel_w - 10.0),
            y = num(top + ph)
        );
        let bw = (panel_w - 30.0) / members.len().max(1) as f64;
        for (g, v) in row.iter().enumerate() {
            let Some(v) = v else { continue };
            let bh = v * scale;
            let bx = x0 + 15.0 + bw * g as f64;
            let _ = writeln!(
                out,
                r#"<rect class="bar" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                num(bx),
                num(top + ph - bh),
                num(bw - 2.0),
                num(bh),
                color(g)
            );
            text(&mut out, bx + bw / 2.0 - 1.0, top + ph - bh - 4.0, "middle", r#" font-size="9""#, &num(*v));
        }
        text(&mut out, x0 + panel_w / 2.0, top + ph + 20.0, "middle", "", name);
    }
    for (g, name) in members.iter().enumerate() {
        let ly = top + 10.0 + 20.0 * g as f64;
        let lx = w - 120.0;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{}"/>"#,
            num(lx),
            num(ly - 10.0),
            color(g)
        );
        text(&mut out, lx + 18.0, ly, "start", "", name);
    }
    out.push_str("</svg>\n");
    out
}
