//! Training-history charts as standalone SVG.
//!
//! Each panel is a `<g class="panel">` that records its linear axis mapping in
//! `data-*` attributes, so the plotted points can be mapped back to values:
//! `x = left + (iter - x_min) / (x_max - x_min) * (right - left)` and
//! `y = bottom - (v - y_min) / (y_max - y_min) * (bottom - top)`.

use std::fmt::Write;

use heartq::train::TrainHistory;

pub const WIDTH: f64 = 640.0;
pub const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 36.0;

/// Linear map from data space to one panel's plot area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axes {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub left: f64,
    pub right: f64,
    pub top: f64,
    pub bottom: f64,
}

impl Axes {
    pub fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x_min) / (self.x_max - self.x_min) * (self.right - self.left)
    }

    pub fn py(&self, y: f64) -> f64 {
        self.bottom - (y - self.y_min) / (self.y_max - self.y_min) * (self.bottom - self.top)
    }
}

/// Widens a degenerate range so the mapping stays finite.
fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 0.5 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

fn panel(svg: &mut String, index: usize, title: &str, xs: &[f64], ys: &[f64], y_range: (f64, f64)) {
    let offset = index as f64 * PANEL_HEIGHT;
    let (x_min, x_max) = span(xs[0], xs[xs.len() - 1]);
    let (y_min, y_max) = span(y_range.0, y_range.1);
    let ax = Axes {
        x_min,
        x_max,
        y_min,
        y_max,
        left: MARGIN_LEFT,
        right: WIDTH - MARGIN_RIGHT,
        top: offset + MARGIN_TOP,
        bottom: offset + PANEL_HEIGHT - MARGIN_BOTTOM,
    };
    let _ = writeln!(
        svg,
        r#"<g class="panel" id="{id}" data-x-min="{x_min}" data-x-max="{x_max}" data-y-min="{y_min}" data-y-max="{y_max}" data-left="{l}" data-right="{r}" data-top="{t}" data-bottom="{b}">"#,
        id = title.to_lowercase(),
        l = ax.left,
        r = ax.right,
        t = ax.top,
        b = ax.bottom,
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#999"/>"##,
        ax.left,
        ax.top,
        ax.right - ax.left,
        ax.bottom - ax.top
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{title}</text>"#,
        (ax.left + ax.right) / 2.0,
        ax.top - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{y_max:.4}</text>"#,
        ax.left - 6.0,
        ax.top + 4.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{y_min:.4}</text>"#,
        ax.left - 6.0,
        ax.bottom
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">iteration</text>"#,
        (ax.left + ax.right) / 2.0,
        ax.bottom + 26.0
    );
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{},{}", ax.px(x), ax.py(y)))
        .collect();
    if points.len() == 1 {
        let _ = writeln!(
            svg,
            r##"<circle class="series" cx="{}" cy="{}" r="3" fill="#1f77b4"/>"##,
            ax.px(xs[0]),
            ax.py(ys[0])
        );
    }
    let _ = writeln!(
        svg,
        r##"<polyline class="series" fill="none" stroke="#1f77b4" stroke-width="1.5" points="{}"/>"##,
        points.join(" ")
    );
    svg.push_str("</g>\n");
}

/// Accuracy panel on top, loss panel below. `history` must be non-empty.
pub fn render_history(history: &TrainHistory) -> String {
    let xs: Vec<f64> = history.records.iter().map(|r| r.iter as f64).collect();
    let acc: Vec<f64> = history.records.iter().map(|r| r.train_acc).collect();
    let loss: Vec<f64> = history.records.iter().map(|r| r.loss).collect();
    let lo = loss.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = loss.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{h}" viewBox="0 0 {WIDTH} {h}">"#,
        h = 2.0 * PANEL_HEIGHT
    );
    panel(&mut svg, 0, "Accuracy", &xs, &acc, (0.0, 1.0));
    panel(&mut svg, 1, "Loss", &xs, &loss, (lo, hi));
    svg.push_str("</svg>\n");
    svg
}
