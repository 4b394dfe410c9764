//! Static SVG of the projected curve `(x, theta_0^j)`.

use std::fmt::Write;

use jetflow_core::dynamics::Sample;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// `[lo, hi]` padded by 5%, or by 0.5 when the data has no spread.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

/// Polyline of `(x, theta_0^component)` with labelled axes; `component` is 0-based.
pub fn svg(samples: &[Sample], component: usize) -> String {
    let (x_lo, x_hi) = padded_range(samples.iter().map(|s| s.x));
    let (y_lo, y_hi) = padded_range(samples.iter().map(|s| s.theta.get(0, component)));
    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut points = String::new();
    for s in samples {
        let _ = write!(points, "{:.3},{:.3} ", sx(s.x), sy(s.theta.get(0, component)));
    }
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let label = format!(
        "θ<tspan dy=\"4\" font-size=\"10\">0</tspan><tspan dy=\"-10\" font-size=\"10\">{}</tspan>",
        component + 1
    );

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<g stroke="black" stroke-width="1"><line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/><line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}"/></g>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{left}" y="{}" text-anchor="middle">{x_lo:.4}</text>"#,
        bottom + 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{right}" y="{}" text-anchor="middle">{x_hi:.4}</text>"#,
        bottom + 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{bottom}" text-anchor="end">{y_lo:.4}</text>"#,
        left - 6.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{y_hi:.4}</text>"#,
        left - 6.0,
        top + 4.0
    );
    let _ = writeln!(
        out,
        r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">x</text>"#,
        0.5 * (left + right),
        HEIGHT - 16.0
    );
    let _ = writeln!(
        out,
        r#"<text class="ylabel" x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{label}</text>"#,
        0.5 * (top + bottom),
        0.5 * (top + bottom)
    );
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        points.trim_end()
    );
    out.push_str("</svg>\n");
    out
}
