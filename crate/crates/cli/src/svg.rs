use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 48.0;

/// Minimal self-contained plot in the `(y1, y2)` plane.
pub struct Plot {
    /// `[x_min, x_max, y_min, y_max]`
    bounds: [f64; 4],
    body: String,
}

impl Plot {
    pub fn new(bounds: [f64; 4]) -> Self {
        let [x0, x1, y0, y1] = bounds;
        let fix = |lo: f64, hi: f64| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 1.0, lo + 1.0)
            }
        };
        let (x0, x1) = fix(x0, x1);
        let (y0, y1) = fix(y0, y1);
        Self {
            bounds: [x0, x1, y0, y1],
            body: String::new(),
        }
    }

    /// Bounds covering `points` with a 10% pad, ignoring non-finite values.
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a [f64; 2]>) -> [f64; 4] {
        let mut b = [
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ];
        for p in points {
            if p[0].is_finite() && p[1].is_finite() {
                b = [
                    b[0].min(p[0]),
                    b[1].max(p[0]),
                    b[2].min(p[1]),
                    b[3].max(p[1]),
                ];
            }
        }
        if !b[0].is_finite() {
            return [-1.0, 1.0, -1.0, 1.0];
        }
        let pad = |lo: f64, hi: f64| 0.1 * (hi - lo).max(1e-9);
        let (px, py) = (pad(b[0], b[1]), pad(b[2], b[3]));
        [b[0] - px, b[1] + px, b[2] - py, b[3] + py]
    }

    fn sx(&self, x: f64) -> f64 {
        let [x0, x1, ..] = self.bounds;
        MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        let [.., y0, y1] = self.bounds;
        HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN)
    }

    pub fn polyline(&mut self, points: &[[f64; 2]], color: &str) {
        let mut d = String::new();
        for p in points
            .iter()
            .filter(|p| p[0].is_finite() && p[1].is_finite())
        {
            write!(d, "{:.2},{:.2} ", self.sx(p[0]), self.sy(p[1])).unwrap();
        }
        writeln!(
            self.body,
            r#"<polyline clip-path="url(#frame)" fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            d.trim_end()
        )
        .unwrap();
    }

    pub fn marker(&mut self, p: [f64; 2], radius: f64, color: &str) {
        writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{radius}" fill="{color}"/>"#,
            self.sx(p[0]),
            self.sy(p[1])
        )
        .unwrap();
    }

    /// Axis-aligned cell centred on `p` with half-sizes `half`.
    pub fn cell(&mut self, p: [f64; 2], half: [f64; 2], color: &str) {
        let (x0, x1) = (self.sx(p[0] - half[0]), self.sx(p[0] + half[0]));
        let (y0, y1) = (self.sy(p[1] + half[1]), self.sy(p[1] - half[1]));
        writeln!(
            self.body,
            r#"<rect clip-path="url(#frame)" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
            x1 - x0,
            y1 - y0
        )
        .unwrap();
    }

    pub fn vline(&mut self, x: f64, color: &str) {
        let [.., y0, y1] = self.bounds;
        self.polyline(&[[x, y0], [x, y1]], color);
    }

    pub fn hline(&mut self, y: f64, color: &str) {
        let [x0, x1, ..] = self.bounds;
        self.polyline(&[[x0, y], [x1, y]], color);
    }

    pub fn finish(self, title: &str) -> String {
        let [x0, x1, y0, y1] = self.bounds;
        let (left, right) = (self.sx(x0), self.sx(x1));
        let (top, bottom) = (self.sy(y1), self.sy(y0));
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(
            s,
            r#"<defs><clipPath id="frame"><rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}"/></clipPath></defs>"#,
            right - left,
            bottom - top
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        s.push_str(&self.body);
        if x0 < 0.0 && 0.0 < x1 {
            let x = self.sx(0.0);
            writeln!(s, r##"<line x1="{x:.2}" y1="{top:.2}" x2="{x:.2}" y2="{bottom:.2}" stroke="#888" stroke-dasharray="3 3"/>"##).unwrap();
        }
        if y0 < 0.0 && 0.0 < y1 {
            let y = self.sy(0.0);
            writeln!(s, r##"<line x1="{left:.2}" y1="{y:.2}" x2="{right:.2}" y2="{y:.2}" stroke="#888" stroke-dasharray="3 3"/>"##).unwrap();
        }
        writeln!(
            s,
            r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            right - left,
            bottom - top
        )
        .unwrap();
        let label = |v: f64| format!("{v:.3}");
        writeln!(
            s,
            r#"<text x="{left:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 16.0,
            label(x0)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{right:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 16.0,
            label(x1)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{bottom:.2}" text-anchor="end">{}</text>"#,
            left - 4.0,
            label(y0)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 4.0,
            top + 4.0,
            label(y1)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">y1</text>"#,
            0.5 * (left + right),
            bottom + 32.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="12" y="{:.2}" text-anchor="middle">y2</text>"#,
            0.5 * (top + bottom)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        )
        .unwrap();
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
