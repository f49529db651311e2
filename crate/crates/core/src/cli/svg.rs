use std::fmt::Write as _;

/// Plain-shape SVG canvas over a world box `[x0, x1] × [y0, y1]`, y up.
pub struct Svg {
    size: f64,
    x0: f64,
    y0: f64,
    scale: f64,
    body: String,
}

impl Svg {
    pub fn new(size: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let scale = size / (x1 - x0).max(y1 - y0);
        Svg {
            size,
            x0,
            y0: y1,
            scale,
            body: String::new(),
        }
    }

    /// Square canvas centred at the origin with half-width `a`.
    pub fn centred(size: f64, a: f64) -> Self {
        Self::new(size, -a, a, -a, a)
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) * self.scale, (self.y0 - y) * self.scale)
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], stroke: &str, closed: bool) {
        let mut d = String::new();
        for p in pts {
            let (x, y) = self.px(p[0], p[1]);
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            self.body,
            r#"<{tag} points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
    }

    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], stroke: &str) {
        let (x1, y1) = self.px(a[0], a[1]);
        let (x2, y2) = self.px(b[0], b[1]);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="0.75"/>"#
        );
    }

    /// Axis-aligned world rectangle with lower-left corner `(x, y)`.
    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let (px, py) = self.px(x, y + h);
        let _ = writeln!(
            self.body,
            r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            w * self.scale + 0.05,
            h * self.scale + 0.05
        );
    }

    pub fn text(&mut self, x: f64, y: f64, s: &str) {
        let (px, py) = self.px(x, y);
        let _ = writeln!(
            self.body,
            r#"<text x="{px:.2}" y="{py:.2}" font-family="monospace" font-size="12">{}</text>"#,
            s.replace('&', "&amp;").replace('<', "&lt;")
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            s = self.size
        )
    }
}

/// Viridis-like ramp for `t ∈ [0, 1]`.
pub fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let stops = [[68.0, 1.0, 84.0], [59.0, 82.0, 139.0], [33.0, 145.0, 140.0], [94.0, 201.0, 98.0], [253.0, 231.0, 37.0]];
    let x = t * (stops.len() - 1) as f64;
    let k = (x.floor() as usize).min(stops.len() - 2);
    let f = x - k as f64;
    let c: Vec<u8> = (0..3).map(|i| (stops[k][i] + f * (stops[k + 1][i] - stops[k][i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_polyline_maps_into_canvas() {
        let mut s = Svg::centred(200.0, 2.0);
        let pts: Vec<[f64; 2]> = (0..8).map(|k| {
            let t = k as f64 * std::f64::consts::FRAC_PI_4;
            [t.cos(), t.sin()]
        }).collect();
        s.polyline(&pts, "black", true);
        let out = s.finish();
        assert!(out.starts_with("<svg"));
        assert!(out.contains("150.00,100.00"));
        assert!(out.contains("100.00,50.00"));
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#440154");
        assert_eq!(ramp(1.0), "#fde725");
    }
}
