use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Arc, ContinuumGraph};

/// `arc_id,theta,re,im`, one row per sample, arcs in id order.
pub fn arcs_to_csv(arcs: &[Arc]) -> String {
    let mut out = String::from("arc_id,theta,re,im\n");
    let mut sorted: Vec<&Arc> = arcs.iter().collect();
    sorted.sort_by_key(|a| a.id);
    for a in sorted {
        for (z, th) in a.samples.iter().zip(&a.level_param) {
            writeln!(out, "{},{:.12},{:.15e},{:.15e}", a.id, th, z.re, z.im).unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerKind {
    /// Endpoint, drawn as a filled circle.
    C,
    /// Branch point, drawn as a triangle.
    D,
    /// Tangency point, drawn as a cross.
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub point: Complex64,
    pub kind: MarkerKind,
}

impl Marker {
    /// Leaves as endpoints, vertices of degree three or more as branch points,
    /// conjoined double zeros as tangency points.
    pub fn from_graph(graph: &ContinuumGraph) -> Vec<Marker> {
        let mut out: Vec<Marker> = graph
            .vertices
            .iter()
            .filter_map(|v| match v.degree {
                1 => Some(Marker { point: v.point, kind: MarkerKind::C }),
                d if d >= 3 => Some(Marker { point: v.point, kind: MarkerKind::D }),
                _ => None,
            })
            .collect();
        out.extend(graph.tangency_points.iter().map(|&p| Marker { point: p, kind: MarkerKind::Z }));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    /// Width of the image in pixels; the height follows the aspect ratio.
    pub width: f64,
    /// Padding around the bounding box, as a fraction of its larger side.
    pub padding: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { width: 640.0, padding: 0.08 }
    }
}

/// Arcs as polylines with point markers. The viewBox is the padded bounding
/// box of all samples in the complex plane (imaginary axis pointing up).
pub fn render_svg(arcs: &[Arc], markers: &[Marker], opts: &SvgOptions) -> String {
    let pts = arcs.iter().flat_map(|a| a.samples.iter()).chain(markers.iter().map(|m| &m.point));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in pts {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let side = (x1 - x0).max(y1 - y0).max(1e-9);
    let pad = opts.padding * side;
    let (vx, vy) = (x0 - pad, -(y1 + pad));
    let (vw, vh) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let height = opts.width * vh / vw;
    let unit = side / 200.0;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}">"#,
        opts.width, height
    )
    .unwrap();
    writeln!(out, r#"<rect x="{vx:.6}" y="{vy:.6}" width="{vw:.6}" height="{vh:.6}" fill="white"/>"#).unwrap();
    let mut sorted: Vec<&Arc> = arcs.iter().collect();
    sorted.sort_by_key(|a| a.id);
    for a in sorted {
        let coords: Vec<String> = a.samples.iter().map(|z| format!("{:.6},{:.6}", z.re, -z.im)).collect();
        writeln!(
            out,
            r#"<polyline id="arc{}" fill="none" stroke="black" stroke-width="{:.6}" points="{}"/>"#,
            a.id,
            unit,
            coords.join(" ")
        )
        .unwrap();
    }
    let r = 2.5 * unit;
    for m in markers {
        let (x, y) = (m.point.re, -m.point.im);
        match m.kind {
            MarkerKind::C => {
                writeln!(out, r#"<circle cx="{x:.6}" cy="{y:.6}" r="{r:.6}" fill="black"/>"#).unwrap();
            }
            MarkerKind::D => {
                writeln!(
                    out,
                    r#"<polygon points="{:.6},{:.6} {:.6},{:.6} {:.6},{:.6}" fill="none" stroke="black" stroke-width="{:.6}"/>"#,
                    x,
                    y - 1.4 * r,
                    x - 1.2 * r,
                    y + 0.8 * r,
                    x + 1.2 * r,
                    y + 0.8 * r,
                    0.6 * unit
                )
                .unwrap();
            }
            MarkerKind::Z => {
                writeln!(
                    out,
                    r#"<path d="M{:.6},{:.6}L{:.6},{:.6}M{:.6},{:.6}L{:.6},{:.6}" stroke="black" stroke-width="{:.6}"/>"#,
                    x - r,
                    y - r,
                    x + r,
                    y + r,
                    x - r,
                    y + r,
                    x + r,
                    y - r,
                    0.6 * unit
                )
                .unwrap();
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
