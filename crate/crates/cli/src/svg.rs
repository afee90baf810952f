//! Deterministic SVG scatter of beta against rate of return, with dashed
//! reference lines at the benchmark's return and beta.

use std::fmt::Write;

use crate::num::sig;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 40.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub label: String,
    pub ror_pct: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scatter {
    pub title: String,
    pub benchmark: String,
    pub index_ror_pct: f64,
    pub index_beta: f64,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (-1.0, 1.0);
        }
        let mut span = hi - lo;
        if span <= 0.0 {
            span = if lo == 0.0 { 2.0 } else { lo.abs() * 0.2 };
            lo -= span / 2.0;
            hi += span / 2.0;
        }
        let pad = span * 0.08;
        let (lo, hi) = (lo - pad, hi + pad);
        Self { lo, hi, step: nice_step((hi - lo) / 5.0) }
    }

    fn ticks(&self) -> Vec<f64> {
        let first = (self.lo / self.step).ceil() as i64;
        let last = (self.hi / self.step).floor() as i64;
        (first..=last).map(|k| k as f64 * self.step).collect()
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powi(raw.log10().floor() as i32);
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render(plot: &Scatter) -> String {
    let xs = Axis::fit(plot.points.iter().map(|p| p.ror_pct).chain([plot.index_ror_pct]));
    let ys = Axis::fit(plot.points.iter().map(|p| p.beta).chain([plot.index_beta]));
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let px = |v: f64| xs.map(v, x0, x1);
    let py = |v: f64| ys.map(v, y0, y1);

    let mut s = String::new();
    let w = &mut s;
    // Writing into a String cannot fail.
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&plot.title)
    );
    let _ = writeln!(
        w,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for t in xs.ticks() {
        let x = px(t);
        let _ = writeln!(w, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(
            w,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            sig(t, 6)
        );
    }
    for t in ys.ticks() {
        let y = py(t);
        let _ = writeln!(w, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            y + 4.0,
            sig(t, 6)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Rate of return (%)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        w,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">Beta</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let (rx, ry) = (px(plot.index_ror_pct), py(plot.index_beta));
    let bench = escape(&plot.benchmark);
    let _ = writeln!(
        w,
        r#"<line class="ref-ror" x1="{rx:.2}" y1="{y0:.2}" x2="{rx:.2}" y2="{y1:.2}" stroke="red" stroke-dasharray="6 4"/>"#
    );
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" fill="red">{bench} RoR {}%</text>"#,
        rx + 4.0,
        y1 + 12.0,
        sig(plot.index_ror_pct, 4)
    );
    let _ = writeln!(
        w,
        r#"<line class="ref-beta" x1="{x0:.2}" y1="{ry:.2}" x2="{x1:.2}" y2="{ry:.2}" stroke="blue" stroke-dasharray="6 4"/>"#
    );
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" fill="blue" text-anchor="end">{bench} beta {}</text>"#,
        x1 - 4.0,
        ry - 4.0,
        sig(plot.index_beta, 4)
    );

    for p in &plot.points {
        let (x, y) = (px(p.ror_pct), py(p.beta));
        let _ = writeln!(w, r#"<circle class="member" cx="{x:.2}" cy="{y:.2}" r="3.5" fill="black"/>"#);
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 5.0, y - 5.0, escape(&p.label));
    }
    let _ = writeln!(w, "</svg>");
    s
}
