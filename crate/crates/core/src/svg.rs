//! Minimal SVG writer and the three figure layouts.
//!
//! Output depends only on the inputs: coordinates are printed with two
//! decimals and elements are emitted in input order.

use std::fmt::Write as _;

use crate::inference::quantile_sorted;
use crate::metrics::{display4, MetricKind};
use crate::report::{DifferenceRow, IntervalRow};

pub const WIDTH: f64 = 1600.0;
pub const HEIGHT: f64 = 900.0;
const FONT: &str = "sans-serif";
const MAX_BINS: usize = 512;
const MIN_BINS: usize = 10;

pub(crate) fn escape(s: &str) -> String {
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

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

struct Svg {
    buf: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut buf = String::new();
        writeln!(
            buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {} {}" width="{}" height="{}" font-family="{FONT}">"#,
            WIDTH, HEIGHT, WIDTH, HEIGHT
        )
        .unwrap();
        writeln!(buf, "<title>{}</title>", escape(title)).unwrap();
        writeln!(
            buf,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        )
        .unwrap();
        Svg { buf }
    }

    fn raw(&mut self, s: &str) {
        self.buf.push_str(s);
        self.buf.push('\n');
    }

    fn text(&mut self, x: f64, y: f64, size: u32, anchor: &str, content: &str) {
        writeln!(
            self.buf,
            r#"<text x="{}" y="{}" font-size="{size}" text-anchor="{anchor}">{}</text>"#,
            num(x),
            num(y),
            escape(content)
        )
        .unwrap();
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64, extra: &str) {
        writeln!(
            self.buf,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"{extra}/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            num(width)
        )
        .unwrap();
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// Linear map from a data range onto a pixel span.
#[derive(Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    /// Pads `[lo, hi]` by 5% each side; a zero-width range gets a fixed pad.
    fn padded(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let span = hi - lo;
        let pad = if span > 0.0 { span * 0.05 } else { 0.05 };
        Scale {
            lo: lo - pad,
            hi: hi + pad,
            px_lo,
            px_hi,
        }
    }

    fn at(&self, x: f64) -> f64 {
        self.px_lo + (x - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn x_axis(svg: &mut Svg, scale: &Scale, y: f64) {
    svg.line(scale.px_lo, y, scale.px_hi, y, "black", 1.0, "");
    for i in 0..=4 {
        let v = scale.lo + (scale.hi - scale.lo) * i as f64 / 4.0;
        let x = scale.at(v);
        svg.line(x, y, x, y + 6.0, "black", 1.0, "");
        svg.text(x, y + 22.0, 14, "middle", &format!("{v:.3}"));
    }
}

struct Panel {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

fn panels(count: usize) -> Vec<Panel> {
    let w = WIDTH / count.max(1) as f64;
    (0..count)
        .map(|i| Panel {
            left: i as f64 * w + 150.0,
            right: (i + 1) as f64 * w - 25.0,
            top: 80.0,
            bottom: HEIGHT - 70.0,
        })
        .collect()
}

fn row_y(panel: &Panel, i: usize, rows: usize) -> f64 {
    let h = (panel.bottom - panel.top) / rows.max(1) as f64;
    panel.top + (i as f64 + 0.5) * h
}

/// Horizontal interval bars per metric, best team on top.
pub fn interval_plot(sections: &[(MetricKind, Vec<IntervalRow>)]) -> String {
    let mut svg = Svg::new("Ordered bootstrap confidence intervals");
    for ((metric, rows), panel) in sections.iter().zip(panels(sections.len())) {
        svg.raw(&format!(r#"<g class="panel" data-metric="{}">"#, metric.name()));
        svg.text((panel.left + panel.right) / 2.0, 40.0, 22, "middle", metric.title());
        let lo = rows.iter().map(|r| r.lower.min(r.point)).fold(f64::INFINITY, f64::min);
        let hi = rows
            .iter()
            .map(|r| r.upper.max(r.point))
            .fold(f64::NEG_INFINITY, f64::max);
        let scale = Scale::padded(lo, hi, panel.left, panel.right);
        x_axis(&mut svg, &scale, panel.bottom + 10.0);
        for (i, r) in rows.iter().enumerate() {
            let y = row_y(&panel, i, rows.len());
            svg.text(panel.left - 10.0, y + 5.0, 14, "end", &r.team);
            let (x1, x2) = (scale.at(r.lower), scale.at(r.upper));
            let attrs = format!(
                r#" class="ci" data-team="{}" data-lower="{}" data-upper="{}""#,
                escape(&r.team),
                r.lower_display,
                r.upper_display
            );
            svg.line(x1, y, x2, y, "black", 2.0, &attrs);
            svg.line(x1, y - 6.0, x1, y + 6.0, "black", 2.0, "");
            svg.line(x2, y - 6.0, x2, y + 6.0, "black", 2.0, "");
            svg.raw(&format!(
                r#"<circle class="estimate" data-team="{}" cx="{}" cy="{}" r="5" fill="black"/>"#,
                escape(&r.team),
                num(scale.at(r.point)),
                num(y)
            ));
        }
        svg.raw("</g>");
    }
    svg.finish()
}

/// Difference-from-best intervals; red when the interval contains zero,
/// green otherwise, with a dashed reference line at zero.
pub fn difference_plot(sections: &[(MetricKind, String, Vec<DifferenceRow>)]) -> String {
    let mut svg = Svg::new("Bootstrap confidence intervals of differences from the best");
    for ((metric, best, rows), panel) in sections.iter().zip(panels(sections.len())) {
        svg.raw(&format!(
            r#"<g class="panel" data-metric="{}" data-best="{}">"#,
            metric.name(),
            escape(best)
        ));
        svg.text(
            (panel.left + panel.right) / 2.0,
            40.0,
            22,
            "middle",
            &format!("{} (best: {best})", metric.title()),
        );
        let lo = rows.iter().map(|r| r.lower).fold(0.0, f64::min);
        let hi = rows.iter().map(|r| r.upper).fold(0.0, f64::max);
        let scale = Scale::padded(lo, hi, panel.left, panel.right);
        x_axis(&mut svg, &scale, panel.bottom + 10.0);
        let zx = scale.at(0.0);
        svg.line(
            zx,
            panel.top - 10.0,
            zx,
            panel.bottom,
            "gray",
            1.0,
            r#" class="zero" stroke-dasharray="6 4""#,
        );
        for (i, r) in rows.iter().enumerate() {
            let y = row_y(&panel, i, rows.len());
            let color = if r.contains_zero { "red" } else { "green" };
            svg.text(panel.left - 10.0, y + 5.0, 14, "end", &r.team);
            let (x1, x2) = (scale.at(r.lower), scale.at(r.upper));
            let attrs = format!(
                r#" class="diff" data-team="{}" data-contains-zero="{}" data-lower="{}" data-upper="{}""#,
                escape(&r.team),
                r.contains_zero,
                r.lower_display,
                r.upper_display
            );
            svg.line(x1, y, x2, y, color, 3.0, &attrs);
            svg.line(x1, y - 6.0, x1, y + 6.0, color, 2.0, "");
            svg.line(x2, y - 6.0, x2, y + 6.0, color, 2.0, "");
            svg.raw(&format!(
                r#"<circle class="mean" data-team="{}" cx="{}" cy="{}" r="5" fill="{color}"/>"#,
                escape(&r.team),
                num(scale.at(r.mean)),
                num(y)
            ));
        }
        svg.raw("</g>");
    }
    svg.finish()
}

/// Freedman–Diaconis bin count, at least 10 and at most 512; a single bin
/// when all values coincide.
pub fn freedman_diaconis_bins(values: &[f64]) -> usize {
    if values.is_empty() {
        return 1;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let range = sorted[sorted.len() - 1] - sorted[0];
    if range == 0.0 {
        return 1;
    }
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
    if width <= 0.0 {
        return MIN_BINS;
    }
    ((range / width).ceil() as usize).clamp(MIN_BINS, MAX_BINS)
}

/// Counts per equal-width bin over `[min, max]`; the maximum lands in the last bin.
pub fn histogram_counts(values: &[f64], bins: usize) -> (f64, f64, Vec<usize>) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0usize; bins];
    let width = (hi - lo) / bins as f64;
    for &v in values {
        let i = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[i] += 1;
    }
    (lo, hi, counts)
}

/// Histogram of paired differences with markers at 0, delta and 2·delta.
pub fn histogram(diffs: &[f64], delta: f64, title: &str) -> String {
    let mut svg = Svg::new(title);
    svg.text(WIDTH / 2.0, 40.0, 22, "middle", title);
    let bins = freedman_diaconis_bins(diffs);
    let (lo, hi, counts) = histogram_counts(diffs, bins);
    let plot = Panel {
        left: 100.0,
        right: WIDTH - 60.0,
        top: 80.0,
        bottom: HEIGHT - 80.0,
    };
    let scale = Scale::padded(lo.min(0.0).min(delta), hi.max(2.0 * delta), plot.left, plot.right);
    x_axis(&mut svg, &scale, plot.bottom + 10.0);
    let max_count = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let y_of = |c: f64| plot.bottom - c / max_count * (plot.bottom - plot.top);
    svg.line(plot.left, plot.bottom, plot.left, plot.top, "black", 1.0, "");
    svg.text(
        plot.left - 10.0,
        plot.top + 5.0,
        14,
        "end",
        &format!("{}", max_count as usize),
    );
    svg.text(plot.left - 10.0, plot.bottom + 5.0, 14, "end", "0");
    svg.raw(&format!(r#"<g class="bins" data-bins="{bins}">"#));
    let bin_w = (hi - lo) / bins as f64;
    for (i, &c) in counts.iter().enumerate() {
        let (x0, x1) = if bin_w > 0.0 {
            (scale.at(lo + i as f64 * bin_w), scale.at(lo + (i + 1) as f64 * bin_w))
        } else {
            (scale.at(lo) - 4.0, scale.at(lo) + 4.0)
        };
        let y = y_of(c as f64);
        svg.raw(&format!(
            r##"<rect class="bin" data-count="{c}" x="{}" y="{}" width="{}" height="{}" fill="#7f9fbf" stroke="white" stroke-width="0.5"/>"##,
            num(x0),
            num(y),
            num((x1 - x0).max(0.0)),
            num(plot.bottom - y)
        ));
    }
    svg.raw("</g>");
    let markers = [
        ("zero", 0.0, "0".to_string(), "black"),
        ("delta", delta, format!("δ = {}", display4(delta)), "#1f77b4"),
        (
            "two-delta",
            2.0 * delta,
            format!("2δ = {}", display4(2.0 * delta)),
            "#d62728",
        ),
    ];
    for (i, (name, v, label, color)) in markers.iter().enumerate() {
        let x = scale.at(*v);
        svg.line(
            x,
            plot.top - 10.0,
            x,
            plot.bottom,
            color,
            2.0,
            &format!(r#" class="marker" data-marker="{name}""#),
        );
        svg.text(x + 6.0, plot.top + 10.0 + 20.0 * i as f64, 16, "start", label);
    }
    svg.finish()
}
