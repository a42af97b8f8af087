//! Minimal deterministic SVG plots.
//!
//! Every plot the CLI emits is backed by a data table file; these images
//! are conveniences, so the emitter stays small: fixed canvas, linear
//! axes, fixed-precision coordinates. Identical data produces identical
//! bytes.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 74.0;
const MARGIN_RIGHT: f64 = 74.0;
const MARGIN_TOP: f64 = 52.0;
const MARGIN_BOTTOM: f64 = 64.0;
const TICKS: usize = 5;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// One named line or point set.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Range {
    min: f64,
    max: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            return Self { min: 0.0, max: 1.0 };
        }
        if min == max {
            // Degenerate span: pad so the point sits mid-plot.
            let pad = if min == 0.0 { 1.0 } else { min.abs() * 0.5 };
            return Self {
                min: min - pad,
                max: max + pad,
            };
        }
        let pad = (max - min) * 0.05;
        Self {
            min: min - pad,
            max: max + pad,
        }
    }

    fn scale(&self, v: f64, lo: f64, hi: f64) -> f64 {
        lo + (v - self.min) / (self.max - self.min) * (hi - lo)
    }
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && (a >= 1e5 || a < 1e-3) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

struct Canvas {
    svg: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n\
             <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
             <text x=\"{x}\" y=\"30\" font-size=\"17\" text-anchor=\"middle\">{title}</text>\n",
            x = WIDTH / 2.0,
            title = escape(title),
        );
        Self { svg }
    }

    fn axes(&mut self, x_label: &str, y_label: &str, x: Range, y: Range) {
        let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        let _ = write!(
            self.svg,
            "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
             <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
        );
        for i in 0..=TICKS {
            let t = i as f64 / TICKS as f64;
            let vx = x.min + t * (x.max - x.min);
            let px = x.scale(vx, x0, x1);
            let _ = write!(
                self.svg,
                "<line x1=\"{px:.2}\" y1=\"{y0}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>\n\
                 <text x=\"{px:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                y0 + 5.0,
                y0 + 20.0,
                fmt_tick(vx),
            );
            let vy = y.min + t * (y.max - y.min);
            let py = y.scale(vy, y0, y1);
            let _ = write!(
                self.svg,
                "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>\n\
                 <text x=\"{}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                x0 - 5.0,
                x0 - 9.0,
                py + 4.0,
                fmt_tick(vy),
            );
        }
        let _ = write!(
            self.svg,
            "<text x=\"{cx}\" y=\"{by}\" font-size=\"13\" text-anchor=\"middle\">{xl}</text>\n\
             <text x=\"18\" y=\"{cy}\" font-size=\"13\" text-anchor=\"middle\" \
             transform=\"rotate(-90 18 {cy})\">{yl}</text>\n",
            cx = (x0 + x1) / 2.0,
            by = HEIGHT - 18.0,
            cy = (y0 + y1) / 2.0,
            xl = escape(x_label),
            yl = escape(y_label),
        );
    }

    fn right_axis(&mut self, label: &str, y: Range) {
        let x1 = WIDTH - MARGIN_RIGHT;
        let (y0, y1v) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        let _ = write!(
            self.svg,
            "<line x1=\"{x1}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y1v}\" stroke=\"black\"/>\n"
        );
        for i in 0..=TICKS {
            let t = i as f64 / TICKS as f64;
            let vy = y.min + t * (y.max - y.min);
            let py = y.scale(vy, y0, y1v);
            let _ = write!(
                self.svg,
                "<line x1=\"{x1}\" y1=\"{py:.2}\" x2=\"{}\" y2=\"{py:.2}\" stroke=\"black\"/>\n\
                 <text x=\"{}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"start\">{}</text>\n",
                x1 + 5.0,
                x1 + 9.0,
                py + 4.0,
                fmt_tick(vy),
            );
        }
        let cx = WIDTH - 16.0;
        let cy = (y0 + y1v) / 2.0;
        let _ = write!(
            self.svg,
            "<text x=\"{cx}\" y=\"{cy}\" font-size=\"13\" text-anchor=\"middle\" \
             transform=\"rotate(90 {cx} {cy})\">{}</text>\n",
            escape(label),
        );
    }

    fn polyline(&mut self, series: &Series, x: Range, y: Range, color: &str, dashed: bool) {
        let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        let dash = if dashed { " stroke-dasharray=\"7,4\"" } else { "" };
        if series.points.len() > 1 {
            let mut points = String::new();
            for &(px, py) in &series.points {
                let _ = write!(
                    points,
                    "{:.2},{:.2} ",
                    x.scale(px, x0, x1),
                    y.scale(py, y0, y1)
                );
            }
            let _ = write!(
                self.svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>\n",
                points.trim_end(),
            );
        }
        for &(px, py) in &series.points {
            let _ = write!(
                self.svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                x.scale(px, x0, x1),
                y.scale(py, y0, y1)
            );
        }
    }

    fn scatter(&mut self, series: &Series, x: Range, y: Range, color: &str) {
        let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        for &(px, py) in &series.points {
            let _ = write!(
                self.svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\" fill-opacity=\"0.75\"/>\n",
                x.scale(px, x0, x1),
                y.scale(py, y0, y1)
            );
        }
    }

    fn legend(&mut self, entries: &[(String, &str, bool)]) {
        let x = WIDTH - MARGIN_RIGHT - 210.0;
        for (i, (label, color, dashed)) in entries.iter().enumerate() {
            let y = MARGIN_TOP + 8.0 + 18.0 * i as f64;
            let dash = if *dashed { " stroke-dasharray=\"7,4\"" } else { "" };
            let _ = write!(
                self.svg,
                "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>\n\
                 <text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
                x + 26.0,
                x + 32.0,
                y + 4.0,
                escape(label),
            );
        }
    }

    fn finish(mut self, path: &Path) -> io::Result<()> {
        self.svg.push_str("</svg>\n");
        std::fs::write(path, self.svg)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn xy_ranges(series: &[Series]) -> (Range, Range) {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series.iter().flat_map(|s| s.points.iter().map(|p| p.1));
    (Range::of(xs), Range::of(ys))
}

/// Connected line chart, one color per series.
pub fn line_plot(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> io::Result<()> {
    let (x, y) = xy_ranges(series);
    let mut canvas = Canvas::new(title);
    canvas.axes(x_label, y_label, x, y);
    let mut legend = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        canvas.polyline(s, x, y, color, false);
        legend.push((s.label.clone(), color, false));
    }
    if series.len() > 1 {
        canvas.legend(&legend);
    }
    canvas.finish(path)
}

/// Line chart with independent left and right y-axes (left solid, right
/// dashed).
pub fn dual_axis_plot(
    path: &Path,
    title: &str,
    x_label: &str,
    left_label: &str,
    right_label: &str,
    left: &[Series],
    right: &[Series],
) -> io::Result<()> {
    let x = Range::of(
        left.iter()
            .chain(right)
            .flat_map(|s| s.points.iter().map(|p| p.0)),
    );
    let y_left = Range::of(left.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let y_right = Range::of(right.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let mut canvas = Canvas::new(title);
    canvas.axes(x_label, left_label, x, y_left);
    canvas.right_axis(right_label, y_right);
    let mut legend = Vec::new();
    for (i, s) in left.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        canvas.polyline(s, x, y_left, color, false);
        legend.push((s.label.clone(), color, false));
    }
    for (i, s) in right.iter().enumerate() {
        let color = PALETTE[(left.len() + i) % PALETTE.len()];
        canvas.polyline(s, x, y_right, color, true);
        legend.push((s.label.clone(), color, true));
    }
    canvas.legend(&legend);
    canvas.finish(path)
}

/// Point cloud.
pub fn scatter_plot(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> io::Result<()> {
    let (x, y) = xy_ranges(series);
    let mut canvas = Canvas::new(title);
    canvas.axes(x_label, y_label, x, y);
    let mut legend = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        canvas.scatter(s, x, y, color);
        legend.push((s.label.clone(), color, false));
    }
    if series.len() > 1 {
        canvas.legend(&legend);
    }
    canvas.finish(path)
}

/// Confusion matrix as a shaded count grid; rows = true class (top to
/// bottom), columns = predicted.
pub fn confusion_grid(
    path: &Path,
    title: &str,
    class_labels: &[String],
    matrix: &[Vec<u64>],
) -> io::Result<()> {
    let c = matrix.len();
    let cell = 52.0f64;
    let left = 110.0;
    let top = 90.0;
    let width = left + cell * c as f64 + 40.0;
    let height = top + cell * c as f64 + 40.0;
    let max = matrix
        .iter()
        .flat_map(|r| r.iter())
        .copied()
        .max()
        .unwrap_or(0)
        .max(1) as f64;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n\
         <text x=\"{tx}\" y=\"26\" font-size=\"16\" text-anchor=\"middle\">{title}</text>\n\
         <text x=\"{tx}\" y=\"52\" font-size=\"12\" text-anchor=\"middle\">columns: predicted class; rows: true class</text>\n",
        tx = width / 2.0,
        title = escape(title),
    );
    for (i, row) in matrix.iter().enumerate() {
        let label = class_labels.get(i).map(String::as_str).unwrap_or("?");
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            left - 10.0,
            top + cell * i as f64 + cell / 2.0 + 4.0,
            escape(label),
        );
        for (j, &count) in row.iter().enumerate() {
            let intensity = count as f64 / max;
            let x = left + cell * j as f64;
            let y = top + cell * i as f64;
            let _ = write!(
                svg,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell}\" height=\"{cell}\" \
                 fill=\"#1f77b4\" fill-opacity=\"{intensity:.3}\" stroke=\"#888\"/>\n\
                 <text x=\"{cx:.2}\" y=\"{cy:.2}\" font-size=\"12\" text-anchor=\"middle\" \
                 fill=\"{text_color}\">{count}</text>\n",
                cx = x + cell / 2.0,
                cy = y + cell / 2.0 + 4.0,
                text_color = if intensity > 0.55 { "white" } else { "black" },
            );
        }
    }
    for (j, label) in class_labels.iter().enumerate().take(c) {
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            left + cell * j as f64 + cell / 2.0,
            top - 10.0,
            escape(label),
        );
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_data_gives_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let series = vec![
            Series::new("a", vec![(1.0, 0.5), (2.0, 0.8), (3.0, 0.7)]),
            Series::new("b", vec![(1.0, 1.5), (2.0, 1.2), (3.0, 1.9)]),
        ];
        let p1 = dir.path().join("one.svg");
        let p2 = dir.path().join("two.svg");
        line_plot(&p1, "t", "x", "y", &series).unwrap();
        line_plot(&p2, "t", "x", "y", &series).unwrap();
        assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
    }

    #[test]
    fn single_point_plot_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("point.svg");
        line_plot(&path, "t", "x", "y", &[Series::new("only", vec![(50.0, 0.9)])]).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("circle"));
        assert!(text.ends_with("</svg>\n"));
    }

    #[test]
    fn confusion_grid_renders_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("confusion.svg");
        let labels = vec!["A+".to_string(), "D".to_string()];
        confusion_grid(&path, "confusion", &labels, &[vec![8, 1], vec![0, 3]]).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.contains(">8<"));
        assert!(text.contains("A+"));
    }
}
