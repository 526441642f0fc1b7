//! Minimal SVG line charts over perplexity bins, with an optional shaded
//! confidence band. Presentation only; the CSV tables carry the numbers.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub bin: usize,
    pub value: f64,
    pub ci: Option<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn decile_chart(title: &str, y_label: &str, points: &[Point]) -> String {
    let pts: Vec<&Point> = points.iter().filter(|p| p.value.is_finite()).collect();
    let k = points.iter().map(|p| p.bin + 1).max().unwrap_or(1).max(2);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        let (a, b) = p.ci.unwrap_or((p.value, p.value));
        lo = lo.min(a.min(p.value));
        hi = hi.max(b.max(p.value));
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |bin: usize| LEFT + (bin as f64) / ((k - 1) as f64) * (W - LEFT - RIGHT);
    let y = |v: f64| TOP + (hi - v) / (hi - lo) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(s, r#"<path d="M{x0},{y0} V{y1} H{x1}" fill="none" stroke="black"/>"#);
    for b in 0..k {
        let xb = x(b);
        let _ = writeln!(
            s,
            r#"<line x1="{xb:.1}" y1="{y1}" x2="{xb:.1}" y2="{:.1}" stroke="black"/><text x="{xb:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y1 + 5.0,
            y1 + 19.0,
            b + 1
        );
    }
    for i in 0..=4 {
        let v = lo + (hi - lo) * f64::from(i) / 4.0;
        let yv = y(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{yv:.1}" x2="{x0}" y2="{yv:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            yv + 4.0
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">perplexity bin</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        H / 2.0,
        escape(y_label)
    );
    let banded: Vec<(usize, (f64, f64))> = pts.iter().filter_map(|p| p.ci.map(|c| (p.bin, c))).collect();
    if banded.len() >= 2 {
        let mut d = String::new();
        for (i, (b, (_, up))) in banded.iter().enumerate() {
            let _ = write!(d, "{}{:.1},{:.1} ", if i == 0 { "M" } else { "L" }, x(*b), y(*up));
        }
        for (b, (dn, _)) in banded.iter().rev() {
            let _ = write!(d, "L{:.1},{:.1} ", x(*b), y(*dn));
        }
        let _ = writeln!(s, r##"<path d="{}Z" fill="#4477aa" fill-opacity="0.25" stroke="none"/>"##, d);
    }
    if !pts.is_empty() {
        let line: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", x(p.bin), y(p.value))).collect();
        let _ =
            writeln!(s, r##"<polyline points="{}" fill="none" stroke="#4477aa" stroke-width="2"/>"##, line.join(" "));
        for p in &pts {
            let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#4477aa"/>"##, x(p.bin), y(p.value));
        }
    }
    s.push_str("</svg>\n");
    s
}
