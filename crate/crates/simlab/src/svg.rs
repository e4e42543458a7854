//! Minimal static SVG output: heat maps with optional scatter overlays.

use std::fmt::Write;

const CELL_AREA: f64 = 400.0;
const MARGIN: f64 = 60.0;

/// Blue to yellow ramp over `[0, 1]`.
fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (68.0 + t * (253.0 - 68.0)) as u8;
    let g = (1.0 + t * (231.0 - 1.0)) as u8;
    let b = (84.0 + t * (37.0 - 84.0)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Heat map of `values[i * ys.len() + j]` at `(xs[i], ys[j])`. Cells are drawn
/// with equal size regardless of node spacing.
pub fn heat_map(values: &[f64], xs: &[f64], ys: &[f64], x_label: &str, y_label: &str, title: &str, range: Option<(f64, f64)>) -> String {
    plot(values, xs, ys, x_label, y_label, title, range, &[], true)
}

/// Density image with the observations overlaid; points use the axis units.
pub fn density_plot(values: &[f64], xs: &[f64], ys: &[f64], points: &[(f64, f64)], x_label: &str, y_label: &str, title: &str) -> String {
    plot(values, xs, ys, x_label, y_label, title, None, points, false)
}

#[allow(clippy::too_many_arguments)]
fn plot(
    values: &[f64],
    xs: &[f64],
    ys: &[f64],
    x_label: &str,
    y_label: &str,
    title: &str,
    range: Option<(f64, f64)>,
    points: &[(f64, f64)],
    annotate: bool,
) -> String {
    assert_eq!(values.len(), xs.len() * ys.len(), "value count must match the node grid");
    let (lo, hi) = range.unwrap_or_else(|| {
        let lo = values.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (nx, ny) = (xs.len(), ys.len());
    let (cw, ch) = (CELL_AREA / nx as f64, CELL_AREA / ny as f64);
    let size = CELL_AREA + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, size / 2.0, MARGIN / 2.0, escape(title));
    for i in 0..nx {
        for j in 0..ny {
            let v = values[i * ny + j];
            let x = MARGIN + i as f64 * cw;
            let y = MARGIN + CELL_AREA - (j + 1) as f64 * ch;
            let fill = if v.is_finite() { colour((v - lo) / span) } else { "#cccccc".to_string() };
            let _ = writeln!(s, r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#, cw + 0.05, ch + 0.05);
            if annotate {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" fill="white">{v:.3}</text>"#,
                    x + cw / 2.0,
                    y + ch / 2.0 + 4.0
                );
            }
        }
    }
    if !points.is_empty() {
        let (x0, x1) = (xs[0], xs[nx - 1]);
        let (y0, y1) = (ys[0], ys[ny - 1]);
        for &(px, py) in points {
            let u = MARGIN + (px - x0) / (x1 - x0) * CELL_AREA;
            let v = MARGIN + CELL_AREA - (py - y0) / (y1 - y0) * CELL_AREA;
            let _ = writeln!(s, r#"<circle cx="{u:.2}" cy="{v:.2}" r="2" fill="none" stroke="white"/>"#);
        }
    }
    for (k, x) in xs.iter().enumerate().step_by((nx / 5).max(1)) {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{x:.3}</text>"#, MARGIN + (k as f64 + 0.5) * cw, MARGIN + CELL_AREA + 15.0);
    }
    for (k, y) in ys.iter().enumerate().step_by((ny / 5).max(1)) {
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{y:.3}</text>"#, MARGIN - 4.0, MARGIN + CELL_AREA - (k as f64 + 0.5) * ch + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, size / 2.0, size - 15.0, escape(x_label));
    let _ = writeln!(s, r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#, size / 2.0, size / 2.0, escape(y_label));
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_rect_per_cell() {
        let svg = heat_map(&[0.0, 0.5, 1.0, f64::NAN], &[1.0, 2.0], &[1.0, 2.0], "h", "g", "a < b", Some((0.0, 1.0)));
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
