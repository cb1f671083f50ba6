//! Minimal byte-deterministic SVG line plots: fixed canvas, fixed palette,
//! floats printed with six decimals.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 780.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 460.0;

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// One named line of the plot; xs and ys must have equal length.
pub struct Series {
    pub name: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// Render the series to a standalone SVG string with axes and a legend.
/// Non-finite points are dropped; an empty series list yields axes only.
pub fn render_plot(title: &str, series: &[Series]) -> String {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            if x.is_finite() && y.is_finite() {
                xmin = xmin.min(x);
                xmax = xmax.max(x);
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
    }
    if !xmin.is_finite() {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    if xmax == xmin {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if ymax == ymin {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let sx = |x: f64| LEFT + (x - xmin) / (xmax - xmin) * (RIGHT - LEFT);
    let sy = |y: f64| BOTTOM - (y - ymin) / (ymax - ymin) * (BOTTOM - TOP);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"800\" height=\"500\" fill=\"#ffffff\"/>\n");
    out.push_str(&format!(
        "<text x=\"420\" y=\"14\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">{}</text>\n",
        escape(title)
    ));
    out.push_str(&format!(
        "<line x1=\"{LEFT}\" y1=\"{BOTTOM}\" x2=\"{RIGHT}\" y2=\"{BOTTOM}\" stroke=\"#000000\" stroke-width=\"1\"/>\n"
    ));
    out.push_str(&format!(
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{BOTTOM}\" stroke=\"#000000\" stroke-width=\"1\"/>\n"
    ));
    for (x, anchor, label) in
        [(LEFT, "start", fmt(xmin)), (RIGHT, "end", fmt(xmax))]
    {
        out.push_str(&format!(
            "<text x=\"{x}\" y=\"478\" text-anchor=\"{anchor}\" font-family=\"monospace\" font-size=\"11\">{label}</text>\n"
        ));
    }
    for (y, label) in [(BOTTOM, fmt(ymin)), (TOP + 8.0, fmt(ymax))] {
        out.push_str(&format!(
            "<text x=\"56\" y=\"{y}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">{label}</text>\n"
        ));
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            if x.is_finite() && y.is_finite() {
                if !points.is_empty() {
                    points.push(' ');
                }
                points.push_str(&format!("{},{}", fmt(sx(x)), fmt(sy(y))));
            }
        }
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{points}\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"774\" y=\"{}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            32.0 + 16.0 * i as f64,
            escape(&s.name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_list_still_draws_axes() {
        let svg = render_plot("empty", &[]);
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<line ").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 0);
    }

    #[test]
    fn two_point_series_draws_one_polyline_with_two_vertices() {
        let svg = render_plot(
            "pair",
            &[Series { name: "a".into(), xs: vec![0.0, 1.0], ys: vec![0.0, 2.0] }],
        );
        assert_eq!(svg.matches("<polyline").count(), 1);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split(' ').count(), 2);
    }

    #[test]
    fn rendering_is_deterministic() {
        let make = || {
            render_plot(
                "det",
                &[
                    Series { name: "x".into(), xs: vec![0.0, 0.5, 1.0], ys: vec![1.0, -1.0, 3.0] },
                    Series { name: "y".into(), xs: vec![0.0, 1.0], ys: vec![0.0, f64::NAN] },
                ],
            )
        };
        assert_eq!(make(), make());
    }

    #[test]
    fn non_finite_points_are_dropped() {
        let svg = render_plot(
            "nan",
            &[Series { name: "a".into(), xs: vec![0.0, 1.0, 2.0], ys: vec![1.0, f64::NAN, 2.0] }],
        );
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split(' ').count(), 2);
    }

    #[test]
    fn titles_are_escaped() {
        let svg = render_plot("a < b & c", &[]);
        assert!(svg.contains("a &lt; b &amp; c"));
    }
}
