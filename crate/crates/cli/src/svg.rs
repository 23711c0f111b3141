//! Minimal SVG line plots.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

struct Series {
    label: String,
    x: Vec<f64>,
    y: Vec<f64>,
    color: String,
    dashed: bool,
}

struct Band {
    x: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    color: String,
}

pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    lines: Vec<Series>,
    bands: Vec<Band>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            lines: Vec::new(),
            bands: Vec::new(),
        }
    }

    pub fn line(&mut self, label: &str, x: &[f64], y: &[f64], color: &str, dashed: bool) {
        self.lines.push(Series { label: label.into(), x: x.to_vec(), y: y.to_vec(), color: color.into(), dashed });
    }

    pub fn band(&mut self, x: &[f64], lo: &[f64], hi: &[f64], color: &str) {
        self.bands.push(Band { x: x.to_vec(), lo: lo.to_vec(), hi: hi.to_vec(), color: color.into() });
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let xs = self.lines.iter().flat_map(|s| s.x.iter()).chain(self.bands.iter().flat_map(|b| b.x.iter()));
        let ys = self
            .lines
            .iter()
            .flat_map(|s| s.y.iter())
            .chain(self.bands.iter().flat_map(|b| b.lo.iter().chain(&b.hi)));
        let (x0, x1) = min_max(xs);
        let (y0, y1) = min_max(ys);
        let pad = if y1 > y0 { 0.05 * (y1 - y0) } else { 1.0 };
        (x0, if x1 > x0 { x1 } else { x0 + 1.0 }, y0 - pad, y1 + pad)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, esc(&self.title));
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(s, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#);
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.2}</text>"#, sx(fx), b + 16.0, fx);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.2}</text>"#, l - 4.0, sy(fy) + 4.0, fy);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            esc(&self.y_label)
        );
        for band in &self.bands {
            let mut d = String::new();
            for (i, (&x, &y)) in band.x.iter().zip(&band.hi).enumerate() {
                let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, sx(x), sy(y));
            }
            for (&x, &y) in band.x.iter().zip(&band.lo).rev() {
                let _ = write!(d, "L{:.2},{:.2} ", sx(x), sy(y));
            }
            let _ = writeln!(s, r#"<path d="{}Z" fill="{}" fill-opacity="0.2" stroke="none"/>"#, d, band.color);
        }
        for (k, line) in self.lines.iter().enumerate() {
            let pts: Vec<String> = line.x.iter().zip(&line.y).map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let dash = if line.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                pts.join(" "),
                line.color
            );
            let ly = t + 14.0 * k as f64;
            let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}"{dash}/>"#, r - 120.0, r - 100.0, line.color);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, r - 95.0, ly + 4.0, esc(&line.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn min_max<'a>(v: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    v.filter(|x| x.is_finite())
        .fold(None, |acc: Option<(f64, f64)>, &x| Some(acc.map_or((x, x), |(a, b)| (a.min(x), b.max(x)))))
        .unwrap_or((0.0, 1.0))
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_lines_and_bands() {
        let mut p = Plot::new("a < b", "t", "y");
        p.line("x", &[0.0, 0.5, 1.0], &[1.0, 2.0, 0.0], "red", false);
        p.band(&[0.0, 1.0], &[0.0, 0.0], &[1.0, 1.0], "blue");
        let s = p.render();
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<polyline").count(), 1);
    }

    #[test]
    fn flat_data_still_has_a_range() {
        let mut p = Plot::new("", "", "");
        p.line("c", &[0.0, 1.0], &[2.0, 2.0], "k", true);
        assert!(!p.render().contains("NaN"));
    }
}
