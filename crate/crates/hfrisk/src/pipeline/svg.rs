//! Minimal deterministic SVG chart builders. Output is a pure function of
//! the input data: fixed canvas, fixed palette, fixed float formatting —
//! regenerating a figure from unchanged artifacts is byte-identical.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 170.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

const PALETTE: [&str; 6] = [
    "#3366cc", "#dc3912", "#ff9900", "#109618", "#990099", "#0099c6",
];

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Area {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

fn plot_area() -> Area {
    Area {
        x0: MARGIN_LEFT,
        y0: MARGIN_TOP,
        w: WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        h: HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
    }
}

/// Horizontal bar chart, items drawn top-down in the given order.
pub fn bar_chart(title: &str, x_label: &str, items: &[(String, f64)]) -> String {
    let mut s = header(title);
    let area = plot_area();
    let max = items.iter().map(|(_, v)| *v).fold(0.0_f64, f64::max).max(1e-12);
    let band = area.h / items.len().max(1) as f64;
    for (i, (name, value)) in items.iter().enumerate() {
        let y = area.y0 + i as f64 * band;
        let w = area.w * (value / max);
        let _ = write!(
            s,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"10\">{}</text>\n",
            fmt(area.x0),
            fmt(y + band * 0.15),
            fmt(w),
            fmt(band * 0.7),
            PALETTE[0],
            fmt(area.x0 - 6.0),
            fmt(y + band * 0.62),
            escape(name),
            fmt(area.x0 + w + 4.0),
            fmt(y + band * 0.62),
            fmt(*value),
        );
    }
    let _ = write!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n</svg>\n",
        area.x0 + area.w / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    s
}

/// Overlaid line chart on the unit square with a reference diagonal
/// (ROC overlays).
pub fn roc_chart(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut s = header(title);
    let area = plot_area();
    let sx = |x: f64| area.x0 + x * area.w;
    let sy = |y: f64| area.y0 + (1.0 - y) * area.h;
    let _ = write!(
        s,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n\
         <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbb\" stroke-dasharray=\"5,5\"/>\n",
        fmt(area.x0),
        fmt(area.y0),
        fmt(area.w),
        fmt(area.h),
        fmt(sx(0.0)),
        fmt(sy(0.0)),
        fmt(sx(1.0)),
        fmt(sy(1.0)),
    );
    for (i, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{},{}", fmt(sx(*x)), fmt(sy(*y))))
            .collect();
        let _ = write!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            path.join(" "),
            fmt(area.x0 + area.w - 150.0),
            fmt(area.y0 + 16.0 + 14.0 * i as f64),
            escape(name),
        );
    }
    let _ = write!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">false positive rate</text>\n\
         <text x=\"16\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 16 {})\">true positive rate</text>\n</svg>\n",
        area.x0 + area.w / 2.0,
        HEIGHT - 18.0,
        area.y0 + area.h / 2.0,
        area.y0 + area.h / 2.0,
    );
    s
}

/// Five-number box summaries per group.
pub struct BoxStats {
    pub low_whisker: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub high_whisker: f64,
}

pub fn box_plot(title: &str, y_label: &str, groups: &[(String, BoxStats)]) -> String {
    let mut s = header(title);
    let area = plot_area();
    let lo = groups
        .iter()
        .map(|(_, b)| b.low_whisker)
        .fold(f64::INFINITY, f64::min);
    let hi = groups
        .iter()
        .map(|(_, b)| b.high_whisker)
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = ((hi - lo) * 0.1).max(1e-6);
    let (lo, hi) = (lo - pad, hi + pad);
    let sy = |v: f64| area.y0 + (1.0 - (v - lo) / (hi - lo)) * area.h;
    let band = area.w / groups.len().max(1) as f64;
    let _ = write!(
        s,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
        fmt(area.x0),
        fmt(area.y0),
        fmt(area.w),
        fmt(area.h)
    );
    for tick in 0..=4 {
        let v = lo + (hi - lo) * tick as f64 / 4.0;
        let _ = write!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
            fmt(area.x0 - 6.0),
            fmt(sy(v) + 3.0),
            format!("{v:.3}")
        );
    }
    for (i, (name, b)) in groups.iter().enumerate() {
        let cx = area.x0 + band * (i as f64 + 0.5);
        let half = band * 0.18;
        let _ = write!(
            s,
            "<line x1=\"{cx0}\" y1=\"{lw}\" x2=\"{cx0}\" y2=\"{q1}\" stroke=\"#333\"/>\n\
             <line x1=\"{cx0}\" y1=\"{q3}\" x2=\"{cx0}\" y2=\"{hw}\" stroke=\"#333\"/>\n\
             <line x1=\"{wx0}\" y1=\"{lw}\" x2=\"{wx1}\" y2=\"{lw}\" stroke=\"#333\"/>\n\
             <line x1=\"{wx0}\" y1=\"{hw}\" x2=\"{wx1}\" y2=\"{hw}\" stroke=\"#333\"/>\n\
             <rect x=\"{bx}\" y=\"{q3}\" width=\"{bw}\" height=\"{bh}\" fill=\"{fill}\" fill-opacity=\"0.5\" stroke=\"#333\"/>\n\
             <line x1=\"{bx}\" y1=\"{med}\" x2=\"{bx1}\" y2=\"{med}\" stroke=\"#000\" stroke-width=\"1.5\"/>\n\
             <text x=\"{cx0}\" y=\"{ly}\" font-size=\"11\" text-anchor=\"middle\">{label}</text>\n",
            cx0 = fmt(cx),
            lw = fmt(sy(b.low_whisker)),
            q1 = fmt(sy(b.q1)),
            q3 = fmt(sy(b.q3)),
            hw = fmt(sy(b.high_whisker)),
            wx0 = fmt(cx - half * 0.6),
            wx1 = fmt(cx + half * 0.6),
            bx = fmt(cx - half),
            bx1 = fmt(cx + half),
            bw = fmt(half * 2.0),
            bh = fmt((sy(b.q1) - sy(b.q3)).max(0.0)),
            med = fmt(sy(b.median)),
            fill = PALETTE[i % PALETTE.len()],
            ly = fmt(area.y0 + area.h + 18.0),
            label = escape(name),
        );
    }
    let _ = write!(
        s,
        "<text x=\"16\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 16 {})\">{}</text>\n</svg>\n",
        area.y0 + area.h / 2.0,
        area.y0 + area.h / 2.0,
        escape(y_label)
    );
    s
}

/// Beeswarm-style strip chart: one horizontal band per feature, a point per
/// row at x = attribution, colored by the normalized feature value
/// (blue = low, red = high, grey = missing). The vertical jitter is a
/// deterministic function of the point index.
pub fn beeswarm(
    title: &str,
    features: &[(String, Vec<(f64, Option<f64>)>)],
) -> String {
    let mut s = header(title);
    let area = plot_area();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, points) in features {
        for (a, _) in points {
            lo = lo.min(*a);
            hi = hi.max(*a);
        }
    }
    if !lo.is_finite() || hi <= lo {
        lo = -1.0;
        hi = 1.0;
    }
    let pad = (hi - lo) * 0.05;
    let (lo, hi) = (lo - pad, hi + pad);
    let sx = |v: f64| area.x0 + (v - lo) / (hi - lo) * area.w;
    let band = area.h / features.len().max(1) as f64;
    let _ = write!(
        s,
        "<line x1=\"{z}\" y1=\"{}\" x2=\"{z}\" y2=\"{}\" stroke=\"#999\"/>\n",
        fmt(area.y0),
        fmt(area.y0 + area.h),
        z = fmt(sx(0.0)),
    );
    for (i, (name, points)) in features.iter().enumerate() {
        let cy = area.y0 + band * (i as f64 + 0.5);
        let _ = write!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
            fmt(area.x0 - 6.0),
            fmt(cy + 3.0),
            escape(name)
        );
        for (k, (attribution, value)) in points.iter().enumerate() {
            // Deterministic jitter from the point index.
            let jitter = ((k * 37 + 11) % 21) as f64 / 20.0 - 0.5;
            let color = match value {
                Some(v) => {
                    let t = v.clamp(0.0, 1.0);
                    let r = (40.0 + 215.0 * t) as u8;
                    let b = (215.0 - 175.0 * t) as u8;
                    format!("#{r:02x}30{b:02x}")
                }
                None => "#aaaaaa".to_string(),
            };
            let _ = write!(
                s,
                "<circle cx=\"{}\" cy=\"{}\" r=\"1.8\" fill=\"{color}\" fill-opacity=\"0.7\"/>\n",
                fmt(sx(*attribution)),
                fmt(cy + jitter * band * 0.7),
            );
        }
    }
    let _ = write!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">attribution (margin space)</text>\n</svg>\n",
        area.x0 + area.w / 2.0,
        HEIGHT - 18.0
    );
    s
}
