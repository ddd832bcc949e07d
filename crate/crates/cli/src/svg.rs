//! Orthographic scatter of the visible hemisphere (`z >= 0`).

use std::fmt::Write as _;

pub fn orthographic(points: &[[f64; 3]], title: &str) -> String {
    const SIZE: f64 = 600.0;
    const RADIUS: f64 = 280.0;
    let c = SIZE / 2.0;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, r#"<circle cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="black" stroke-width="1"/>"#);
    for p in points.iter().filter(|p| p[2] >= 0.0) {
        let x = c + RADIUS * p[0];
        let y = c - RADIUS * p[1];
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.5" fill="steelblue"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
