// SPDX-License-Identifier: MIT OR Apache-2.0

//! Minimal SVG line plot: one panel per dimension, dashed rules at estimated
//! change points, solid rules at known ones.

use energy_cp::TimeSeries;
use std::fmt::Write;

const WIDTH: f64 = 800.0;
const PANEL: f64 = 160.0;
const MARGIN: f64 = 30.0;

pub fn render_svg(x: &TimeSeries, estimated: &[usize], truth: &[usize]) -> String {
    let dim = x.dim();
    let height = dim as f64 * PANEL + MARGIN;
    let n = x.len();
    let xpos = |t: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * (t - 1.0) / (n.max(2) - 1) as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for j in 0..dim {
        let top = MARGIN / 2.0 + j as f64 * PANEL;
        let bottom = top + PANEL - MARGIN;
        let col = x.column(j);
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        let span = if hi > lo { hi - lo } else { 1.0 };
        let ypos = |v: f64| bottom - (bottom - top) * (v - lo) / span;

        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN}" y="{top}" width="{}" height="{}" fill="none" stroke="black" stroke-width="0.5"/>"#,
            WIDTH - 2.0 * MARGIN,
            bottom - top
        );
        let _ = writeln!(
            svg,
            r#"<text x="4" y="{}" font-size="10">x{}</text>"#,
            top + 10.0,
            j + 1
        );
        let points: Vec<String> = col
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", xpos((i + 1) as f64), ypos(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="0.8" points="{}"/>"#,
            points.join(" ")
        );
        for (cps, style) in [(truth, ""), (estimated, r#" stroke-dasharray="4 3""#)] {
            for &cp in cps {
                let px = xpos(cp as f64 - 0.5);
                let _ = writeln!(
                    svg,
                    r#"<line x1="{px:.2}" y1="{top}" x2="{px:.2}" y2="{bottom}" stroke="black"{style}/>"#
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
