//! Minimal SVG heatmaps of phase grids: δ on x, log10 ρ or τ on y,
//! cell shade = P(EFS) (white 0, black 1).

use std::fmt::Write as _;

use ssc_core::experiments::PhaseGrid;
use ssc_core::SecondAxis;

const CELL: f64 = 24.0;
const MARGIN: f64 = 60.0;
const GAP: f64 = 40.0;

fn y_label(axis: &SecondAxis) -> &'static str {
    match axis {
        SecondAxis::Rho(_) => "log10 rho",
        SecondAxis::Tau { .. } => "tau",
    }
}

fn y_value(axis: &SecondAxis, v: f64) -> f64 {
    match axis {
        SecondAxis::Rho(_) => v.log10(),
        SecondAxis::Tau { .. } => v,
    }
}

/// One panel per grid, side by side, each titled with its method.
pub fn heatmap(grids: &[&PhaseGrid]) -> String {
    let cols = grids.first().map_or(0, |g| g.deltas.len()) as f64;
    let rows = grids.first().map_or(0, |g| g.axis.values().len()) as f64;
    let panel_w = cols * CELL;
    let width = MARGIN + grids.len() as f64 * (panel_w + GAP) + MARGIN / 2.0;
    let height = rows * CELL + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#
    );
    for (p, g) in grids.iter().enumerate() {
        let x0 = MARGIN + p as f64 * (panel_w + GAP);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            x0 + panel_w / 2.0,
            MARGIN / 2.0,
            g.method.name()
        );
        let values = g.axis.values();
        for (c, _) in values.iter().enumerate() {
            // larger y values on top
            let y = MARGIN + (values.len() - 1 - c) as f64 * CELL;
            for (r, _) in g.deltas.iter().enumerate() {
                let p_efs = g.p_efs(r, c);
                let fill = if p_efs.is_nan() {
                    "rgb(255,0,0)".to_string()
                } else {
                    let v = (255.0 * (1.0 - p_efs.clamp(0.0, 1.0))).round() as u8;
                    format!("rgb({v},{v},{v})")
                };
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"><title>{:.3}</title></rect>"#,
                    x0 + r as f64 * CELL,
                    p_efs
                );
            }
            if p == 0 {
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="end">{:.2}</text>"#,
                    x0 - 4.0,
                    y + CELL * 0.65,
                    y_value(&g.axis, values[c])
                );
            }
        }
        let base = MARGIN + values.len() as f64 * CELL;
        for (r, d) in g.deltas.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{d:.2}</text>"#,
                x0 + (r as f64 + 0.5) * CELL,
                base + 14.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">delta</text>"#,
            x0 + panel_w / 2.0,
            base + 32.0
        );
    }
    if let Some(g) = grids.first() {
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            height / 2.0,
            height / 2.0,
            y_label(&g.axis)
        );
    }
    s.push_str("</svg>\n");
    s
}
