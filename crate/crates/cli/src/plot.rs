//! Dependency-free SVG rendering of value-function curves, one polyline per
//! regime pair in the conventional black/red/green/blue order.

use switchgame::field::PairIndex;
use switchgame::{Grid, ValueField};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

const COLORS: [&str; 8] = [
    "black", "red", "green", "blue", "orange", "purple", "teal", "brown",
];

pub fn render_value_field(field: &ValueField, grid: &Grid) -> String {
    let q = field.q();
    let n = grid.n();
    let (mut v_min, mut v_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in field.iter_pairs() {
        for k in 0..n {
            let v = field.get(p, k);
            v_min = v_min.min(v);
            v_max = v_max.max(v);
        }
    }
    if v_min == v_max {
        v_min -= 1.0;
        v_max += 1.0;
    }
    let pad = 0.05 * (v_max - v_min);
    let (v_min, v_max) = (v_min - pad, v_max + pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - grid.x_min()) / (grid.x_max() - grid.x_min()) * plot_w;
    let sy = |v: f64| MARGIN_TOP + (v_max - v) / (v_max - v_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    svg.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"gray\"/>\n",
        MARGIN_LEFT,
        HEIGHT - MARGIN_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM
    ));
    svg.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"gray\"/>\n",
        MARGIN_LEFT, MARGIN_TOP, MARGIN_LEFT, HEIGHT - MARGIN_BOTTOM
    ));
    // zero lines when inside the ranges
    if grid.x_min() < 0.0 && grid.x_max() > 0.0 {
        svg.push_str(&format!(
            "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"#dddddd\"/>\n",
            sx(0.0),
            MARGIN_TOP,
            HEIGHT - MARGIN_BOTTOM
        ));
    }
    if v_min < 0.0 && v_max > 0.0 {
        svg.push_str(&format!(
            "<line x1=\"{0:.1}\" y1=\"{2:.1}\" x2=\"{1:.1}\" y2=\"{2:.1}\" stroke=\"#dddddd\"/>\n",
            MARGIN_LEFT,
            WIDTH - MARGIN_RIGHT,
            sy(0.0)
        ));
    }

    // ticks
    for t in 0..=4 {
        let x = grid.x_min() + t as f64 / 4.0 * (grid.x_max() - grid.x_min());
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{x:.2}</text>\n",
            sx(x),
            HEIGHT - MARGIN_BOTTOM + 18.0
        ));
        let v = v_min + t as f64 / 4.0 * (v_max - v_min);
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{v:.1}</text>\n",
            MARGIN_LEFT - 6.0,
            sy(v) + 4.0
        ));
    }

    // one polyline per pair
    for p in field.iter_pairs() {
        let color = COLORS[p.0 % COLORS.len()];
        let mut points = String::new();
        for k in 0..n {
            points.push_str(&format!("{:.2},{:.2} ", sx(grid.node(k)), sy(field.get(p, k))));
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.trim_end()
        ));
    }

    // legend
    for p in 0..q * q {
        let color = COLORS[p % COLORS.len()];
        let y = MARGIN_TOP + 16.0 * p as f64 + 10.0;
        svg.push_str(&format!(
            "<line x1=\"{0:.1}\" y1=\"{y:.1}\" x2=\"{1:.1}\" y2=\"{y:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            MARGIN_LEFT + 10.0,
            MARGIN_LEFT + 34.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\">{}</text>\n",
            MARGIN_LEFT + 40.0,
            y + 4.0,
            PairIndex(p).label(q)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">x</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    ));
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline_per_pair() {
        let grid = Grid::new(-1.0, 1.0, 11).unwrap();
        let field = ValueField::from_fn(2, grid.n(), |p, k| p.0 as f64 + (k as f64) * 0.1);
        let svg = render_value_field(&field, &grid);
        assert_eq!(svg.matches("<polyline").count(), 4);
        for color in ["black", "red", "green", "blue"] {
            assert!(svg.contains(color), "missing {color} curve");
        }
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn flat_field_still_produces_a_finite_viewport() {
        let grid = Grid::new(0.0, 1.0, 5).unwrap();
        let field = ValueField::from_fn(2, grid.n(), |_, _| 3.0);
        let svg = render_value_field(&field, &grid);
        assert!(!svg.contains("NaN"));
        assert!(!svg.contains("inf"));
    }
}
