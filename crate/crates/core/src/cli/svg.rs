//! Minimal SVG output: polar heatmaps of grid fields and radial profile curves.

use std::fmt::Write;

use crate::flow::grid::Grid;

const SIZE: f64 = 480.0;

/// Blue-white-red ramp on `[0, 1]`.
fn color(x: f64) -> String {
    let x = x.clamp(0.0, 1.0);
    let (r, g, b) = if x < 0.5 {
        let s = 2.0 * x;
        (s, s, 1.0)
    } else {
        let s = 2.0 * (1.0 - x);
        (1.0, s, s)
    };
    format!("#{:02x}{:02x}{:02x}", (255.0 * r) as u8, (255.0 * g) as u8, (255.0 * b) as u8)
}

fn range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if lo < hi {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

/// Annular cells colored by `u`; radial grids are drawn as rings.
pub fn heatmap(grid: &Grid, u: &[f64], title: &str) -> String {
    let (lo, hi) = range(u);
    let c = SIZE / 2.0;
    let scale = 0.45 * SIZE / grid.radius;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{}">"#,
        SIZE + 30.0
    );
    let _ = writeln!(
        out,
        r#"<text x="10" y="20" font-family="sans-serif" font-size="14">{title} [{lo:.4}, {hi:.4}]</text>"#
    );
    let _ = writeln!(out, r#"<g transform="translate(0,30)">"#);
    let point = |r: f64, t: f64| (c + scale * r * t.cos(), c - scale * r * t.sin());
    for i in (1..=grid.nr).rev() {
        let (r0, r1) = (grid.r(i) - 0.5 * grid.h, (grid.r(i) + 0.5 * grid.h).min(grid.radius));
        if grid.is_radial() {
            let fill = color((u[grid.idx(i, 0)] - lo) / (hi - lo));
            let _ = writeln!(out, r#"<circle cx="{c:.2}" cy="{c:.2}" r="{:.2}" fill="{fill}"/>"#, scale * r1);
            continue;
        }
        for j in 0..grid.ntheta {
            let t = grid.theta(j);
            let (ta, tb) = (t - 0.5 * grid.dtheta, t + 0.5 * grid.dtheta);
            let fill = color((u[grid.idx(i, j as isize)] - lo) / (hi - lo));
            let pts = [point(r0, ta), point(r1, ta), point(r1, tb), point(r0, tb)];
            let list: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="{fill}" stroke="{fill}" stroke-width="0.3"/>"#,
                list.join(" ")
            );
        }
    }
    let fill = color((u[0] - lo) / (hi - lo));
    let _ = writeln!(
        out,
        r#"<circle cx="{c:.2}" cy="{c:.2}" r="{:.2}" fill="{fill}"/>"#,
        0.5 * scale * grid.h
    );
    out.push_str("</g>\n</svg>\n");
    out
}

/// Polylines `(x_k, y_k)` for each named curve on shared axes.
pub fn curves(series: &[(&str, &[f64], &[f64])], title: &str) -> String {
    let xs: Vec<f64> = series.iter().flat_map(|s| s.1.iter().cloned()).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.2.iter().cloned()).collect();
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let (w, h, pad) = (SIZE, 0.75 * SIZE, 40.0);
    let map = |x: f64, y: f64| {
        (
            pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad),
            h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad),
        )
    };
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(out, r#"<text x="10" y="20" font-family="sans-serif" font-size="14">{title}</text>"#);
    let (ax, ay) = map(x0, y0);
    let (bx, by) = map(x1, y1);
    let _ = writeln!(
        out,
        r#"<rect x="{ax:.2}" y="{by:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="gray"/>"#,
        bx - ax,
        ay - by
    );
    for (k, (name, x, y)) in series.iter().enumerate() {
        let pts: Vec<String> = x
            .iter()
            .zip(y.iter())
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(&a, &b)| {
                let (px, py) = map(a, b);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let col = palette[k % palette.len()];
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{col}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="{col}">{name}</text>"#,
            w - 140.0,
            40.0 + 16.0 * k as f64
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{pad}" y="{:.2}" font-family="sans-serif" font-size="11">x in [{x0:.3}, {x1:.3}], y in [{y0:.3}, {y1:.3}]</text>"#,
        h - 10.0
    );
    out.push_str("</svg>\n");
    out
}
