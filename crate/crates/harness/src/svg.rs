//! Standalone SVG charts built from plain elements.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::report::Report;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];
/// Points per polyline above which curves are thinned.
const MAX_POINTS: usize = 1000;

/// Data range widened by 5% of its span on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
}

impl AxisRange {
    pub fn padded(min: f64, max: f64) -> Self {
        let span = max - min;
        let pad = if span > 0.0 {
            0.05 * span
        } else {
            0.05 * min.abs().max(1.0)
        };
        Self {
            lo: min - pad,
            hi: max + pad,
        }
    }

    fn to_px(self, v: f64, px_lo: f64, px_hi: f64) -> f64 {
        px_lo + (v - self.lo) / (self.hi - self.lo) * (px_hi - px_lo)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x: AxisRange, y: AxisRange, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x.lo + f * (x.hi - x.lo);
        let px = x.to_px(xv, x0, x1);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 20.0,
            tick(xv)
        );
        let yv = y.lo + f * (y.hi - y.lo);
        let py = y.to_px(yv, y0, y1);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(out: &mut String, i: usize, label: &str, color: &str) {
    let y = TOP + 10.0 + 20.0 * i as f64;
    let x = WIDTH - RIGHT + 15.0;
    let _ = writeln!(
        out,
        r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/>"#,
        y - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{y}">{}</text>"#,
        x + 18.0,
        escape(label)
    );
}

/// Axis ranges of the regret chart: steps on x, CI-inclusive cumulative
/// regret on y.
pub fn regret_axes(report: &Report) -> (AxisRange, AxisRange) {
    let pts = report.curves.iter().flat_map(|c| c.points.iter());
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (step, m) in pts {
        xmin = xmin.min(*step as f64);
        xmax = xmax.max(*step as f64);
        ymin = ymin.min(m.low());
        ymax = ymax.max(m.high());
    }
    (AxisRange::padded(xmin, xmax), AxisRange::padded(ymin, ymax))
}

/// Cumulative-regret curves, one polyline per algorithm with a shaded 95%
/// band when available.
pub fn render_regret_svg(report: &Report) -> String {
    let mut out = String::new();
    header(&mut out, "Cumulative regret (mean, 95% CI)");
    let (xr, yr) = regret_axes(report);
    axes(&mut out, xr, yr, "step", "cumulative regret");
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    for (i, c) in report.curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let stride = c.points.len().div_ceil(MAX_POINTS).max(1);
        let mut pts: Vec<_> = c.points.iter().step_by(stride).collect();
        if let Some(last) = c.points.last() {
            if pts.last().map(|p| p.0) != Some(last.0) {
                pts.push(last);
            }
        }
        if pts.iter().any(|(_, m)| m.ci_half.is_some()) {
            let mut d = String::new();
            for (j, (s, m)) in pts.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{:.2},{:.2} ",
                    if j == 0 { "M" } else { "L" },
                    xr.to_px(*s as f64, x0, x1),
                    yr.to_px(m.high(), y0, y1)
                );
            }
            for (s, m) in pts.iter().rev() {
                let _ = write!(
                    d,
                    "L{:.2},{:.2} ",
                    xr.to_px(*s as f64, x0, x1),
                    yr.to_px(m.low(), y0, y1)
                );
            }
            let _ = writeln!(
                out,
                r#"<path d="{}Z" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                d
            );
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|(s, m)| {
                format!(
                    "{:.2},{:.2}",
                    xr.to_px(*s as f64, x0, x1),
                    yr.to_px(m.mean, y0, y1)
                )
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        legend(&mut out, i, &c.algorithm, color);
    }
    out.push_str("</svg>\n");
    out
}

/// Per-block stacked selection shares for one algorithm; `None` when it only
/// ever plays one kind of policy.
pub fn render_selection_svg(report: &Report, algorithm: &str) -> Option<String> {
    let rows: Vec<_> = report
        .selection
        .iter()
        .filter(|s| s.algorithm == algorithm)
        .collect();
    let arms: Vec<&str> = {
        let mut a: Vec<&str> = rows.iter().map(|s| s.arm.as_str()).collect();
        a.sort_unstable();
        a.dedup();
        a
    };
    if arms.len() < 2 {
        return None;
    }
    let mut blocks: BTreeMap<usize, BTreeMap<&str, f64>> = BTreeMap::new();
    for s in &rows {
        blocks
            .entry(s.block)
            .or_default()
            .insert(s.arm.as_str(), s.frequency);
    }
    let mut out = String::new();
    header(
        &mut out,
        &format!("Selection frequency per block: {algorithm}"),
    );
    let nb = blocks.len() as f64;
    let xr = AxisRange::padded(0.5, nb + 0.5);
    let yr = AxisRange::padded(0.0, 1.0);
    axes(&mut out, xr, yr, "block", "share of steps");
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let bar = 0.8 * (xr.to_px(1.0, x0, x1) - xr.to_px(0.0, x0, x1));
    for (i, (_, shares)) in blocks.iter().enumerate() {
        let cx = xr.to_px(i as f64 + 1.0, x0, x1);
        let mut acc = 0.0;
        for (j, arm) in arms.iter().enumerate() {
            let f = shares.get(arm).copied().unwrap_or(0.0);
            if f <= 0.0 {
                continue;
            }
            let top = yr.to_px(acc + f, y0, y1);
            let bottom = yr.to_px(acc, y0, y1);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{top:.2}" width="{bar:.2}" height="{:.2}" fill="{}"/>"#,
                cx - bar / 2.0,
                bottom - top,
                PALETTE[j % PALETTE.len()]
            );
            acc += f;
        }
    }
    for (j, arm) in arms.iter().enumerate() {
        legend(&mut out, j, arm, PALETTE[j % PALETTE.len()]);
    }
    out.push_str("</svg>\n");
    Some(out)
}
