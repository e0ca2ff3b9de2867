//! Minimal SVG line plots for run outputs.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Optional symmetric error bars; drawn as markers when present.
    pub err: Option<Vec<f64>>,
    pub color: String,
    pub dashed: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, x: &[f64], y: &[f64], color: &str) -> Self {
        Series {
            label: label.into(),
            x: x.to_vec(),
            y: y.to_vec(),
            err: None,
            color: color.to_string(),
            dashed: false,
        }
    }
}

/// Vertical arrow pointing down at `x`. Labels of consecutive pairs are
/// staggered, matching the (E_s, E_c) order used by runs.
#[derive(Debug, Clone)]
pub struct Arrow {
    pub x: f64,
    pub label: String,
    pub color: String,
    pub dashed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub arrows: Vec<Arrow>,
    /// Horizontal reference lines (value, label).
    pub hlines: Vec<(f64, String)>,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    mag * if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    }
}

fn fmt_tick(v: f64, step: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.abs() >= 1e4 || v.abs() < 1e-3 {
        return format!("{v:.1e}");
    }
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut x0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y0 = f64::INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        for s in &self.series {
            for (i, (&x, &y)) in s.x.iter().zip(&s.y).enumerate() {
                if !x.is_finite() || !y.is_finite() || (self.log_y && y <= 0.0) {
                    continue;
                }
                let e = s.err.as_ref().map_or(0.0, |e| e[i]);
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(if self.log_y || y - e <= 0.0 { y } else { y - e });
                y1 = y1.max(y + e);
            }
        }
        for (y, _) in &self.hlines {
            if !self.log_y || *y > 0.0 {
                y0 = y0.min(*y);
                y1 = y1.max(*y);
            }
        }
        if !x0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if self.log_y {
            let (a, b) = (y0.log10().floor(), y1.log10().ceil());
            (x0, x1, a, if b > a { b } else { a + 1.0 })
        } else {
            let lo = y0.min(0.0);
            let hi = if y1 > lo { y1 * 1.08 } else { lo + 1.0 };
            (x0, x1, lo, hi)
        }
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| {
            let v = if self.log_y { y.max(1e-300).log10() } else { y };
            TOP + ph - (v - y0) / (y1 - y0) * ph
        };
        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(o, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            o,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(o, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

        let xs = nice_step(x1 - x0);
        let mut t = (x0 / xs).ceil() * xs;
        while t <= x1 + 1e-9 * xs {
            let x = sx(t);
            let _ = writeln!(o, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
            let _ = writeln!(o, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, fmt_tick(t, xs));
            t += xs;
        }
        if self.log_y {
            let mut d = y0;
            while d <= y1 {
                let y = sy(10f64.powf(d));
                let _ = writeln!(o, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
                let _ = writeln!(o, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{}</text>"#, LEFT - 8.0, y + 4.0, d as i32);
                d += 1.0;
            }
        } else {
            let ys = nice_step(y1 - y0);
            let mut t = (y0 / ys).ceil() * ys;
            while t <= y1 + 1e-9 * ys {
                let y = sy(t);
                let _ = writeln!(o, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
                let _ = writeln!(o, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, fmt_tick(t, ys));
                t += ys;
            }
        }
        let _ = writeln!(
            o,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            o,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        let _ = writeln!(o, r#"<g>"#);
        for (v, label) in &self.hlines {
            if self.log_y && *v <= 0.0 {
                continue;
            }
            let y = sy(*v);
            let _ = writeln!(
                o,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#555" stroke-dasharray="6 4"/>"##,
                LEFT + pw
            );
            let _ = writeln!(o, r##"<text x="{}" y="{:.2}" text-anchor="end" fill="#555">{}</text>"##, LEFT + pw - 4.0, y - 4.0, escape(label));
        }
        for s in &self.series {
            let dash = if s.dashed { r#" stroke-dasharray="5 3""# } else { "" };
            match &s.err {
                None => {
                    let mut path = String::new();
                    let mut pen_up = true;
                    for (&x, &y) in s.x.iter().zip(&s.y) {
                        if !y.is_finite() || (self.log_y && y <= 0.0) {
                            pen_up = true;
                            continue;
                        }
                        let _ = write!(path, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, sx(x), sy(y));
                        pen_up = false;
                    }
                    let _ = writeln!(o, r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#, path.trim_end(), s.color);
                }
                Some(err) => {
                    for ((&x, &y), &e) in s.x.iter().zip(&s.y).zip(err) {
                        if self.log_y && y <= 0.0 {
                            continue;
                        }
                        let (px, py) = (sx(x), sy(y));
                        let lo = if self.log_y && y - e <= 0.0 { y } else { y - e };
                        let _ = writeln!(o, r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{}"/>"#, sy(lo), sy(y + e), s.color);
                        let _ = writeln!(o, r#"<circle cx="{px:.2}" cy="{py:.2}" r="2.5" fill="{}"/>"#, s.color);
                    }
                }
            }
        }
        for (i, a) in self.arrows.iter().enumerate() {
            if a.x < x0 || a.x > x1 {
                continue;
            }
            let x = sx(a.x);
            let lift = 13.0 * ((i / 2) % 2) as f64;
            let dash = if a.dashed { r#" stroke-dasharray="4 3""# } else { "" };
            let _ = writeln!(o, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="{}" stroke-width="1.5"{dash}/>"#, TOP + 27.0, TOP + 57.0, a.color);
            let _ = writeln!(
                o,
                r#"<path d="M{:.2},{} L{:.2},{} L{x:.2},{} Z" fill="{}"/>"#,
                x - 4.0,
                TOP + 51.0,
                x + 4.0,
                TOP + 51.0,
                TOP + 59.0,
                a.color
            );
            let _ = writeln!(o, r#"<text x="{x:.2}" y="{}" text-anchor="middle" fill="{}">{}</text>"#, TOP + 10.0 + lift, a.color, escape(&a.label));
        }
        let _ = writeln!(o, "</g>");

        for (i, s) in self.series.iter().enumerate() {
            let y = TOP + 16.0 + 16.0 * i as f64;
            let x = LEFT + pw - 170.0;
            let _ = writeln!(o, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/>"#, x + 22.0, s.color);
            let _ = writeln!(o, r#"<text x="{}" y="{}">{}</text>"#, x + 28.0, y + 4.0, escape(&s.label));
        }
        o.push_str("</svg>\n");
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_document() {
        let x = [0.0, 1.0, 2.0];
        let plot = Plot {
            title: "a < b".into(),
            log_y: true,
            series: vec![Series::line("s", &x, &[1e-3, 0.0, 1e-1], PALETTE[0])],
            hlines: vec![(5e-3, "bg".into())],
            ..Plot::default()
        };
        let svg = plot.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("1e-3"));
    }

    #[test]
    fn empty_plot_has_finite_axes() {
        let svg = Plot::default().render();
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
