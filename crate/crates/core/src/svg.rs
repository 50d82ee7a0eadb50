// SPDX-License-Identifier: MIT OR Apache-2.0

//! Minimal standalone SVG charts: scatter plots and line charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Blue-white-red colour for `t` in `[-1, 1]`; 0 maps to light grey.
pub fn diverging(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(-1.0, 1.0) } else { 0.0 };
    let neutral = [247.0, 247.0, 247.0];
    let end = if t >= 0.0 { [178.0, 24.0, 43.0] } else { [33.0, 102.0, 172.0] };
    let a = t.abs();
    let c: Vec<u8> = (0..3).map(|k| (neutral[k] + (end[k] - neutral[k]) * a).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn comment(text: &str) -> String {
    // "--" is not allowed inside XML comments
    format!("<!-- {} -->\n", text.replace("--", "- -"))
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self { lo: lo - pad, hi: hi + pad, log }
    }

    fn unit(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        let n = 5;
        (0..=n)
            .map(|t| {
                let u = t as f64 / n as f64;
                let v = self.lo + u * (self.hi - self.lo);
                let label = if self.log { format!("{:.3e}", 10f64.powf(v)) } else { format!("{v:.3}") };
                (u, label)
            })
            .collect()
    }
}

struct Frame {
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, u: f64) -> f64 {
        MARGIN_LEFT + u * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, u: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - u * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    fn map(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        Some((self.px(self.x.unit(x)?), self.py(self.y.unit(y)?)))
    }

    fn open(&self, out: &mut String, header: Option<&str>, title: &str, xlabel: &str, ylabel: &str) {
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        if let Some(h) = header {
            out.push_str(&comment(h));
        }
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">"
        );
        let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(out, "<text x=\"{}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">{}</text>", WIDTH / 2.0, escape(title));
        let (x0, x1, y0, y1) = (self.px(0.0), self.px(1.0), self.py(0.0), self.py(1.0));
        let _ = writeln!(out, "<rect x=\"{x0:.1}\" y=\"{y1:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#444\"/>", x1 - x0, y0 - y1);
        for (u, label) in self.x.ticks() {
            let x = self.px(u);
            let _ = writeln!(out, "<line x1=\"{x:.1}\" y1=\"{y0:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#444\"/>", y0 + 4.0);
            let _ = writeln!(out, "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{label}</text>", y0 + 16.0);
        }
        for (u, label) in self.y.ticks() {
            let y = self.py(u);
            let _ = writeln!(out, "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{x0:.1}\" y2=\"{y:.1}\" stroke=\"#444\"/>", x0 - 4.0);
            let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{label}</text>", x0 - 6.0, y + 4.0);
        }
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", (x0 + x1) / 2.0, HEIGHT - 15.0, escape(xlabel));
        let _ = writeln!(
            out,
            "<text transform=\"translate(16 {:.1}) rotate(-90)\" text-anchor=\"middle\">{}</text>",
            (y0 + y1) / 2.0,
            escape(ylabel)
        );
    }
}

/// Scatter plot with one colour per point.
#[derive(Debug, Clone)]
pub struct ScatterChart {
    title: String,
    xlabel: String,
    ylabel: String,
    points: Vec<(f64, f64, String)>,
}

impl ScatterChart {
    pub fn new(title: impl Into<String>, xlabel: impl Into<String>, ylabel: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            xlabel: xlabel.into(),
            ylabel: ylabel.into(),
            points: Vec::new(),
        }
    }

    pub fn point(&mut self, x: f64, y: f64, colour: String) {
        self.points.push((x, y, colour));
    }

    pub fn render(&self, header: Option<&str>) -> String {
        let frame = Frame {
            x: Axis::fit(self.points.iter().map(|p| p.0), false),
            y: Axis::fit(self.points.iter().map(|p| p.1), false),
        };
        let mut out = String::new();
        frame.open(&mut out, header, &self.title, &self.xlabel, &self.ylabel);
        for (x, y, colour) in &self.points {
            if let Some((px, py)) = frame.map(*x, *y) {
                let _ = writeln!(out, "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3.5\" fill=\"{colour}\" stroke=\"#333\" stroke-width=\"0.4\" fill-opacity=\"0.85\"/>");
            }
        }
        // colour legend
        let lx = WIDTH - MARGIN_RIGHT + 20.0;
        for (n, t) in [1.0, 0.5, 0.0, -0.5, -1.0].iter().enumerate() {
            let y = MARGIN_TOP + 10.0 + 18.0 * n as f64;
            let _ = writeln!(out, "<rect x=\"{lx}\" y=\"{y}\" width=\"12\" height=\"12\" fill=\"{}\" stroke=\"#333\" stroke-width=\"0.4\"/>", diverging(*t));
            let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">{t:+.1} x max|r|</text>", lx + 18.0, y + 10.0);
        }
        out.push_str("</svg>\n");
        out
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

/// Multi-series line chart, optionally log-scaled on either axis.
#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl LineChart {
    pub fn new(title: impl Into<String>, xlabel: impl Into<String>, ylabel: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            xlabel: xlabel.into(),
            ylabel: ylabel.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_axes(mut self, log_x: bool, log_y: bool) -> Self {
        self.log_x = log_x;
        self.log_y = log_y;
        self
    }

    pub fn add(&mut self, name: impl Into<String>, points: Vec<(f64, f64)>, dashed: bool) {
        self.series.push(Series {
            name: name.into(),
            points,
            dashed,
        });
    }

    pub fn render(&self, header: Option<&str>) -> String {
        let all = || self.series.iter().flat_map(|s| s.points.iter());
        let frame = Frame {
            x: Axis::fit(all().map(|p| p.0), self.log_x),
            y: Axis::fit(all().map(|p| p.1), self.log_y),
        };
        let mut out = String::new();
        frame.open(&mut out, header, &self.title, &self.xlabel, &self.ylabel);
        for (n, series) in self.series.iter().enumerate() {
            let colour = PALETTE[n % PALETTE.len()];
            let coords: Vec<String> = series
                .points
                .iter()
                .filter_map(|&(x, y)| frame.map(x, y))
                .map(|(x, y)| format!("{x:.2},{y:.2}"))
                .collect();
            let dash = if series.dashed { " stroke-dasharray=\"6 4\"" } else { "" };
            let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.8\"{dash}/>", coords.join(" "));
            for c in &coords {
                let (x, y) = c.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(out, "<circle cx=\"{x}\" cy=\"{y}\" r=\"2.5\" fill=\"{colour}\"/>");
            }
            let ly = MARGIN_TOP + 10.0 + 18.0 * n as f64;
            let lx = WIDTH - MARGIN_RIGHT + 15.0;
            let _ = writeln!(out, "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{colour}\" stroke-width=\"2\"{dash}/>", lx + 20.0);
            let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">{}</text>", lx + 25.0, ly + 4.0, escape(&series.name));
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diverging_endpoints() {
        assert_eq!(diverging(0.0), "#f7f7f7");
        assert_eq!(diverging(1.0), "#b2182b");
        assert_eq!(diverging(-1.0), "#2166ac");
        assert_eq!(diverging(f64::NAN), "#f7f7f7");
    }

    #[test]
    fn line_chart_renders_series() {
        let mut chart = LineChart::new("t", "x", "y").log_axes(true, true);
        chart.add("a", vec![(1.0, 1.0), (10.0, 0.1)], false);
        chart.add("b <2>", vec![(1.0, 0.0), (10.0, 2.0)], true);
        let svg = chart.render(Some("cfg -- x"));
        assert!(svg.contains("<!-- cfg - - x -->"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b &lt;2&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
