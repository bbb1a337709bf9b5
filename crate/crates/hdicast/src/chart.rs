//! Minimal deterministic SVG line charts.
//!
//! No templating or drawing dependencies: the chart is assembled as a
//! string with fixed layout, a fixed palette, and fixed number formatting,
//! so identical inputs always produce identical bytes.

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

/// One labeled polyline. Points are (x, y) in data coordinates; x is
/// typically a year.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn data_bounds(series: &[ChartSeries]) -> ((f64, f64), (f64, f64)) {
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            xs.0 = xs.0.min(x);
            xs.1 = xs.1.max(x);
            ys.0 = ys.0.min(y);
            ys.1 = ys.1.max(y);
        }
    }
    if !xs.0.is_finite() {
        xs = (0.0, 1.0);
        ys = (0.0, 1.0);
    }
    if xs.0 == xs.1 {
        xs = (xs.0 - 0.5, xs.1 + 0.5);
    }
    if ys.0 == ys.1 {
        ys = (ys.0 - 0.05, ys.1 + 0.05);
    } else {
        let pad = 0.05 * (ys.1 - ys.0);
        ys = (ys.0 - pad, ys.1 + pad);
    }
    (xs, ys)
}

/// A tick spacing of the form {1, 2, 5} * 10^k giving roughly `target`
/// steps across `span`.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.abs().log10().floor());
    let norm = raw / mag;
    let factor = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    factor * mag
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    // Integer-valued ticks print without a fraction; others keep 3 places.
    if (v - v.round()).abs() < 1e-9 && v.abs() < 1e9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.3}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render a line chart as a complete SVG document.
pub fn line_chart(series: &[ChartSeries], title: &str, x_label: &str, y_label: &str) -> String {
    let ((x_min, x_max), (y_min, y_max)) = data_bounds(series);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"Helvetica, Arial, sans-serif\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"28\" font-size=\"17\" text-anchor=\"middle\">{}</text>\n",
        fmt_coord(MARGIN_LEFT + plot_w / 2.0),
        xml_escape(title)
    ));

    // Y grid and ticks.
    let y_step = nice_step(y_max - y_min, 5.0);
    let mut tick = (y_min / y_step).ceil() * y_step;
    while tick <= y_max + 1e-12 {
        let y = sy(tick);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            fmt_coord(MARGIN_LEFT),
            fmt_coord(y),
            fmt_coord(MARGIN_LEFT + plot_w),
            fmt_coord(y)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            fmt_coord(MARGIN_LEFT - 8.0),
            fmt_coord(y + 4.0),
            fmt_tick(tick)
        ));
        tick += y_step;
    }

    // X ticks on integer positions (years).
    let x_step = nice_step(x_max - x_min, 8.0).max(1.0);
    let mut tick = (x_min / x_step).ceil() * x_step;
    while tick <= x_max + 1e-12 {
        let x = sx(tick);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            fmt_coord(x),
            fmt_coord(MARGIN_TOP),
            fmt_coord(x),
            fmt_coord(MARGIN_TOP + plot_h)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            fmt_coord(x),
            fmt_coord(MARGIN_TOP + plot_h + 18.0),
            fmt_tick(tick)
        ));
        tick += x_step;
    }

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP),
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP + plot_h)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP + plot_h),
        fmt_coord(MARGIN_LEFT + plot_w),
        fmt_coord(MARGIN_TOP + plot_h)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        fmt_coord(MARGIN_LEFT + plot_w / 2.0),
        fmt_coord(HEIGHT - 12.0),
        xml_escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        fmt_coord(MARGIN_TOP + plot_h / 2.0),
        fmt_coord(MARGIN_TOP + plot_h / 2.0),
        xml_escape(y_label)
    ));

    // Series polylines and legend.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !s.points.is_empty() {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{},{}", fmt_coord(sx(x)), fmt_coord(sy(y))))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                color,
                pts.join(" ")
            ));
        }
        let ly = MARGIN_TOP + 14.0 + 20.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            fmt_coord(WIDTH - MARGIN_RIGHT + 12.0),
            fmt_coord(ly - 4.0),
            fmt_coord(WIDTH - MARGIN_RIGHT + 34.0),
            fmt_coord(ly - 4.0),
            color
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
            fmt_coord(WIDTH - MARGIN_RIGHT + 40.0),
            fmt_coord(ly),
            xml_escape(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
