use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: [f64; 4] = [70.0, 20.0, 30.0, 50.0]; // left, right, top, bottom
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A line plot with one polyline per series.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str, log_y: bool) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), log_y, series: Vec::new() }
    }

    pub fn series(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push((name.into(), points));
        self
    }

    fn y_of(&self, y: f64) -> Option<f64> {
        if self.log_y {
            (y > 0.0).then(|| y.log10())
        } else {
            Some(y)
        }
        .filter(|v| v.is_finite())
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut x = [f64::INFINITY, f64::NEG_INFINITY];
        let mut y = x;
        for (_, pts) in &self.series {
            for &(a, b) in pts {
                if let (true, Some(b)) = (a.is_finite(), self.y_of(b)) {
                    x = [x[0].min(a), x[1].max(a)];
                    y = [y[0].min(b), y[1].max(b)];
                }
            }
        }
        let widen = |r: [f64; 2]| {
            if !r[0].is_finite() {
                [0.0, 1.0]
            } else if r[1] - r[0] < 1e-300 {
                [r[0] - 0.5, r[1] + 0.5]
            } else {
                r
            }
        };
        (widen(x), widen(y))
    }

    /// Self-contained SVG with axis ticks and a legend.
    pub fn to_svg(&self) -> String {
        let (xr, yr) = self.bounds();
        let (l, r, t, b) = (MARGIN[0], MARGIN[1], MARGIN[2], MARGIN[3]);
        let pw = WIDTH - l - r;
        let ph = HEIGHT - t - b;
        let sx = |x: f64| l + (x - xr[0]) / (xr[1] - xr[0]) * pw;
        let sy = |y: f64| t + ph - (y - yr[0]) / (yr[1] - yr[0]) * ph;
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#);
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (xv, yv) = (xr[0] + f * (xr[1] - xr[0]), yr[0] + f * (yr[1] - yr[0]));
            let (px, py) = (sx(xv), sy(yv));
            let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, t + ph, t + ph + 5.0);
            let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, t + ph + 17.0, tick(xv));
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/>"#, l - 5.0);
            let label = if self.log_y { format!("1e{}", tick(yv)) } else { tick(yv) };
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, l - 8.0, py + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, l + pw / 2.0, HEIGHT - 12.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            t + ph / 2.0,
            t + ph / 2.0,
            escape(&self.y_label)
        );
        for (k, (name, pts)) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let coords: Vec<String> = pts
                .iter()
                .filter_map(|&(x, y)| self.y_of(y).filter(|_| x.is_finite()).map(|y| format!("{:.2},{:.2}", sx(x), sy(y))))
                .collect();
            if !coords.is_empty() {
                let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
            }
            let ly = t + 14.0 + 14.0 * k as f64;
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, l + pw - 120.0, l + pw - 100.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, l + pw - 95.0, ly + 4.0, escape(name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.into() }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_polyline_per_series() {
        let p = Plot::new("a < b", "x", "y", true).series("one", vec![(0.0, 1.0), (1.0, 10.0)]).series("two", vec![(0.0, 0.0), (1.0, 1e-3)]);
        let s = p.to_svg();
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("a &lt; b"));
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
    }

    #[test]
    fn ticks_are_compact() {
        assert_eq!(tick(0.5), "0.5");
        assert_eq!(tick(2.0), "2");
        assert_eq!(tick(1e-6), "1.00e-6");
        assert_eq!(tick(-0.0), "0");
    }
}
