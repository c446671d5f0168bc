//! Minimal SVG 1.1 emission for the experiment figures.
//!
//! The output is a single self-contained document: shapes, paths, and text
//! only, no scripts, stylesheets, or external references. A `Frame` maps
//! data coordinates onto the pixel viewport with the y axis flipped.

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Linear data-to-pixel transform with fixed margins.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub width: f64,
    pub height: f64,
    pub margin: f64,
}

impl Frame {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), width: f64, height: f64) -> Frame {
        assert!(x_range.1 > x_range.0 && y_range.1 > y_range.0);
        Frame {
            x_range,
            y_range,
            width,
            height,
            margin: 54.0,
        }
    }

    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.x_range.0) / (self.x_range.1 - self.x_range.0);
        let fy = (y - self.y_range.0) / (self.y_range.1 - self.y_range.0);
        (
            self.margin + fx * (self.width - 2.0 * self.margin),
            self.height - self.margin - fy * (self.height - 2.0 * self.margin),
        )
    }
}

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Svg {
        let body = format!(
            "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
        );
        Svg {
            width,
            height,
            body,
        }
    }

    pub fn circle(&mut self, center: (f64, f64), r: f64, fill: &str, opacity: f64) {
        self.body.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{r}\" fill=\"{fill}\" fill-opacity=\"{opacity}\"/>\n",
            center.0, center.1
        ));
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64) {
        self.body.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>\n",
            a.0, a.1, b.0, b.1
        ));
    }

    pub fn polyline(
        &mut self,
        points: &[(f64, f64)],
        stroke: &str,
        width: f64,
        dash: Option<&str>,
    ) {
        let coords: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect();
        let dash = dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        self.body.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"{dash}/>\n",
            coords.join(" ")
        ));
    }

    pub fn text(&mut self, at: (f64, f64), size: f64, anchor: &str, content: &str) {
        self.body.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"{size}\" text-anchor=\"{anchor}\">{}</text>\n",
            at.0, at.1, xml_escape(content)
        ));
    }

    /// Like `text` but rotated 90 degrees counterclockwise about its anchor.
    pub fn vtext(&mut self, at: (f64, f64), size: f64, content: &str) {
        self.body.push_str(&format!(
            "<text x=\"{0:.2}\" y=\"{1:.2}\" font-family=\"sans-serif\" font-size=\"{size}\" text-anchor=\"middle\" transform=\"rotate(-90 {0:.2} {1:.2})\">{2}</text>\n",
            at.0, at.1, xml_escape(content)
        ));
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

/// Border, tick marks, tick labels, and axis titles for a frame. Tick
/// label text comes from the supplied formatters so log-scale plots can
/// relabel exponents.
pub fn axes(
    svg: &mut Svg,
    frame: &Frame,
    x_label: &str,
    y_label: &str,
    x_fmt: &dyn Fn(f64) -> String,
    y_fmt: &dyn Fn(f64) -> String,
) {
    let (x0, y0) = frame.map(frame.x_range.0, frame.y_range.0);
    let (x1, y1) = frame.map(frame.x_range.1, frame.y_range.1);
    svg.polyline(
        &[(x0, y1), (x1, y1), (x1, y0), (x0, y0), (x0, y1)],
        "black",
        1.0,
        None,
    );
    for tx in nice_ticks(frame.x_range.0, frame.x_range.1, 6) {
        let (px, py) = frame.map(tx, frame.y_range.0);
        svg.line((px, py), (px, py + 5.0), "black", 1.0);
        svg.text((px, py + 18.0), 11.0, "middle", &x_fmt(tx));
    }
    for ty in nice_ticks(frame.y_range.0, frame.y_range.1, 6) {
        let (px, py) = frame.map(frame.x_range.0, ty);
        svg.line((px - 5.0, py), (px, py), "black", 1.0);
        svg.text((px - 8.0, py + 4.0), 11.0, "end", &y_fmt(ty));
    }
    svg.text(
        ((x0 + x1) / 2.0, frame.height - 12.0),
        13.0,
        "middle",
        x_label,
    );
    svg.vtext((14.0, (y0 + y1) / 2.0), 13.0, y_label);
}

/// Round tick positions: a 1/2/5-scaled step sized for about `target`
/// intervals, clipped to the range.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    assert!(hi > lo && target > 0);
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap();
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        // Snap values like 0.30000000000000004 back onto the grid.
        out.push((t / step).round() * step);
        t += step;
    }
    out
}

/// Default tick label: plain decimal, trailing zeros trimmed.
pub fn tick_label(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_maps_corners_onto_margins() {
        let f = Frame::new((0.0, 10.0), (-1.0, 1.0), 500.0, 400.0);
        assert_eq!(f.map(0.0, -1.0), (54.0, 346.0));
        assert_eq!(f.map(10.0, 1.0), (446.0, 54.0));
        let (mx, my) = f.map(5.0, 0.0);
        assert!((mx - 250.0).abs() < 1e-9 && (my - 200.0).abs() < 1e-9);
    }

    #[test]
    fn ticks_land_on_round_numbers() {
        assert_eq!(
            nice_ticks(0.0, 10.0, 5),
            vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
        );
        // Raw step 0.025 rounds up to 0.05.
        assert_eq!(nice_ticks(0.013, 0.138, 5), vec![0.05, 0.1]);
        assert_eq!(tick_label(2000.0), "2000");
        assert_eq!(tick_label(0.25), "0.25");
    }

    #[test]
    fn document_is_balanced_and_self_contained() {
        let mut svg = Svg::new(300.0, 200.0);
        let frame = Frame::new((0.0, 1.0), (0.0, 1.0), 300.0, 200.0);
        axes(
            &mut svg,
            &frame,
            "x",
            "density < 1 & 2",
            &tick_label,
            &tick_label,
        );
        svg.circle(frame.map(0.5, 0.5), 2.0, PALETTE[0], 0.8);
        svg.polyline(&[(0.0, 0.0), (1.0, 1.0)], PALETTE[1], 1.0, Some("4 2"));
        let doc = svg.finish();
        assert!(doc.starts_with("<?xml"));
        assert!(doc.trim_end().ends_with("</svg>"));
        assert_eq!(doc.matches("<text").count(), doc.matches("</text>").count());
        assert!(doc.contains("&lt; 1 &amp; 2"));
        // The only URL is the SVG namespace declaration.
        assert_eq!(doc.matches("http").count(), 1);
        assert!(!doc.contains("href"));
    }
}
