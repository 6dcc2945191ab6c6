//! Self-contained SVG rendering of dimension profiles: estimate polyline
//! over a translucent confidence band, with labelled axes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::experiment::DimensionProfile;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 65.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 55.0;

struct Axis {
    min: f64,
    max: f64,
}

impl Axis {
    fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            return Self { min: 0.0, max: 1.0 };
        }
        if max - min < 1e-12 {
            // degenerate range: pad so the single value sits mid-plot
            min -= 0.5;
            max += 0.5;
        }
        Self { min, max }
    }

    /// Round tick positions covering the range.
    fn ticks(&self) -> Vec<f64> {
        let span = self.max - self.min;
        let raw_step = span / 6.0;
        let mag = 10f64.powf(raw_step.log10().floor());
        let norm = raw_step / mag;
        let step = mag
            * if norm < 1.5 {
                1.0
            } else if norm < 3.5 {
                2.0
            } else if norm < 7.5 {
                5.0
            } else {
                10.0
            };
        let first = (self.min / step).ceil() * step;
        let mut ticks = Vec::new();
        let mut t = first;
        while t <= self.max + 1e-9 * step {
            ticks.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
            t += step;
        }
        ticks
    }
}

fn fmt_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        format!("{:.3}", v)
    }
}

/// Render a profile to SVG text.
pub fn render_profile_svg(profile: &DimensionProfile) -> String {
    let xs = Axis::from_values(profile.records.iter().map(|r| r.t));
    let ys = Axis::from_values(
        profile
            .records
            .iter()
            .flat_map(|r| [r.ci_low, r.ci_high, r.estimate]),
    );

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |t: f64| MARGIN_LEFT + (t - xs.min) / (xs.max - xs.min) * plot_w;
    let py = |v: f64| MARGIN_TOP + (ys.max - v) / (ys.max - ys.min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(svg, r#"<rect width="{}" height="{}" fill="white"/>"#, WIDTH, HEIGHT);

    // confidence band
    if profile.records.len() > 1 {
        let mut band = String::new();
        for r in &profile.records {
            let _ = write!(band, "{:.2},{:.2} ", px(r.t), py(r.ci_high));
        }
        for r in profile.records.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", px(r.t), py(r.ci_low));
        }
        let _ = writeln!(
            svg,
            r##"<polygon points="{}" fill="#4472c4" fill-opacity="0.25" stroke="none"/>"##,
            band.trim_end()
        );
    }

    // estimate curve (or a lone marker for a single-row profile)
    if profile.records.len() > 1 {
        let mut pts = String::new();
        for r in &profile.records {
            let _ = write!(pts, "{:.2},{:.2} ", px(r.t), py(r.estimate));
        }
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#1f3864" stroke-width="1.5"/>"##,
            pts.trim_end()
        );
    } else {
        let r = &profile.records[0];
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#1f3864"/>"##,
            px(r.t),
            py(r.estimate)
        );
    }

    // axes
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    for t in xs.ticks() {
        let x = px(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            y0 + 20.0,
            fmt_tick(t)
        );
    }
    for v in ys.ticks() {
        let y = py(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            x0 - 9.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{}" font-size="14" text-anchor="middle">t</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 16 {:.2})">dimension</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

pub fn write_profile_svg(profile: &DimensionProfile, path: &Path) -> Result<()> {
    std::fs::write(path, render_profile_svg(profile))?;
    Ok(())
}
