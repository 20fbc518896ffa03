//! Self-contained SVG heatmaps of a sweep metric over the `(i_d, i_q)` plane.
//!
//! Each grid point is drawn as the annular sector it represents in the polar
//! `(θ, i)` grid. Colors use a diverging blue–white–red scale centered at 0
//! and symmetric about it.

use std::fmt::Write as _;
use std::path::Path;

use crate::sweep::{SweepTable, METRIC_COLUMNS};
use crate::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const ARC_SEGMENTS: usize = 8;

const NEGATIVE: (f64, f64, f64) = (33.0, 102.0, 172.0);
const POSITIVE: (f64, f64, f64) = (178.0, 24.0, 43.0);
const MISSING: &str = "#9e9e9e";

/// Diverging color for `t` in [−1, 1].
fn diverging(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let end = if t < 0.0 { NEGATIVE } else { POSITIVE };
    let a = t.abs();
    let mix = |c: f64| (255.0 + (c - 255.0) * a).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(end.0), mix(end.1), mix(end.2))
}

fn unique_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn spacing(values: &[f64], fallback: f64) -> f64 {
    if values.len() < 2 {
        fallback
    } else {
        (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64
    }
}

fn nice_step(span: f64, target_ticks: f64) -> f64 {
    let raw = span / target_ticks;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Sector outline of one grid cell in `(i_d, i_q)`.
fn cell_outline(theta: (f64, f64), radius: (f64, f64)) -> Vec<(f64, f64)> {
    let arc = |r: f64, from: f64, to: f64| {
        (0..=ARC_SEGMENTS).map(move |k| {
            let t = (from + (to - from) * k as f64 / ARC_SEGMENTS as f64).to_radians();
            (r * t.sin(), r * t.cos())
        })
    };
    let mut pts: Vec<(f64, f64)> = arc(radius.1, theta.0, theta.1).collect();
    if radius.0 > 0.0 {
        pts.extend(arc(radius.0, theta.1, theta.0));
    } else {
        pts.push((0.0, 0.0));
    }
    pts
}

/// Render `metric` as an SVG document.
pub fn render_heatmap(table: &SweepTable, metric: &str) -> Result<String> {
    if !METRIC_COLUMNS.contains(&metric) {
        return Err(Error::UnknownColumn(metric.to_string()));
    }
    let thetas = unique_sorted(table.rows.iter().map(|r| r.point.theta_deg));
    let currents = unique_sorted(table.rows.iter().map(|r| r.point.current));
    let d_theta = spacing(&thetas, 10.0);
    let d_current = spacing(
        &currents,
        currents.first().map_or(1.0, |c| c.abs().max(1.0)),
    );
    let theta_bounds = (
        thetas.first().copied().unwrap_or(0.0),
        thetas.last().copied().unwrap_or(0.0),
    );
    let current_bounds = (
        currents.first().copied().unwrap_or(0.0),
        currents.last().copied().unwrap_or(0.0),
    );
    let clip = |v: f64, half: f64, (lo, hi): (f64, f64)| {
        if lo == hi {
            (v - half, v + half)
        } else {
            ((v - half).max(lo), (v + half).min(hi))
        }
    };

    let mut cells = Vec::with_capacity(table.rows.len());
    let mut limit = 0.0f64;
    for row in &table.rows {
        let th = clip(row.point.theta_deg, 0.5 * d_theta, theta_bounds);
        let (r_lo, r_hi) = clip(row.point.current, 0.5 * d_current, current_bounds);
        let outline = cell_outline(th, (r_lo.max(0.0), r_hi.max(0.0)));
        let value = match &row.outcome {
            Ok(v) => Some(v.metric(metric)?),
            Err(_) => None,
        };
        if let Some(v) = value {
            limit = limit.max(v.abs());
        }
        cells.push((row, outline, value));
    }
    if !(limit > 0.0) {
        limit = 1.0;
    }

    // Data extent in amperes, with the origin always shown.
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (_, outline, _) in &cells {
        for &(x, y) in outline {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if x_hi - x_lo < 1e-9 {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    if y_hi - y_lo < 1e-9 {
        y_hi += 1.0;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let scale = (plot_w / (x_hi - x_lo)).min(plot_h / (y_hi - y_lo));
    let px = |x: f64| MARGIN_LEFT + (x - x_lo) * scale;
    let py = |y: f64| MARGIN_TOP + plot_h - (y - y_lo) * scale;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(metric)
    );

    let _ = writeln!(svg, r#"<g id="cells" stroke="none">"#);
    for (row, outline, value) in &cells {
        let points: Vec<String> = outline
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let (fill, label) = match (value, &row.outcome) {
            (Some(v), _) => (diverging(v / limit), format!("{v:.6}")),
            (None, Err(msg)) => (MISSING.to_string(), format!("error: {msg}")),
            (None, Ok(_)) => unreachable!("value present for successful rows"),
        };
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="{}"><title>i_d={:.3} A, i_q={:.3} A: {}</title></polygon>"#,
            points.join(" "),
            fill,
            row.point.i_d,
            row.point.i_q,
            escape(&label)
        );
    }
    let _ = writeln!(svg, "</g>");

    // Axes.
    let (ax0, ax1) = (px(x_lo), px(x_hi));
    let (ay0, ay1) = (py(y_lo), py(y_hi));
    let _ = writeln!(
        svg,
        r#"<g id="axes" stroke="black" fill="none"><line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax1:.2}" y2="{ay0:.2}"/><line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax0:.2}" y2="{ay1:.2}"/></g>"#
    );
    let mut ticks = String::new();
    let x_step = nice_step(x_hi - x_lo, 6.0);
    let mut t = (x_lo / x_step).ceil() * x_step;
    while t <= x_hi + 1e-9 * x_step {
        let x = px(t);
        let _ = write!(
            ticks,
            r#"<line x1="{x:.2}" y1="{ay0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            ay0 + 5.0,
            ay0 + 18.0,
            t + 0.0
        );
        t += x_step;
    }
    let y_step = nice_step(y_hi - y_lo, 5.0);
    let mut t = (y_lo / y_step).ceil() * y_step;
    while t <= y_hi + 1e-9 * y_step {
        let y = py(t);
        let _ = write!(
            ticks,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{ax0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            ax0 - 5.0,
            ax0 - 8.0,
            y + 4.0,
            t + 0.0
        );
        t += y_step;
    }
    let _ = writeln!(svg, r#"<g id="ticks">{ticks}</g>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">i_d (A)</text>"#,
        (ax0 + ax1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">i_q (A)</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0
    );

    // Color bar.
    let bar_x = WIDTH - MARGIN_RIGHT + 40.0;
    let bar_h = plot_h;
    let steps = 64;
    let _ = writeln!(svg, r#"<g id="colorbar">"#);
    for k in 0..steps {
        let t_hi = 1.0 - 2.0 * k as f64 / steps as f64;
        let t_mid = t_hi - 1.0 / steps as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{bar_x:.2}" y="{:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            MARGIN_TOP + bar_h * k as f64 / steps as f64,
            bar_h / steps as f64 + 0.5,
            diverging(t_mid)
        );
    }
    for (frac, value) in [(0.0, limit), (0.5, 0.0), (1.0, -limit)] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            bar_x + 24.0,
            MARGIN_TOP + bar_h * frac + 4.0,
            crate::sweep::format_sig(value)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

pub fn emit_heatmap(table: &SweepTable, metric: &str, path: &Path) -> Result<()> {
    let svg = render_heatmap(table, metric)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
