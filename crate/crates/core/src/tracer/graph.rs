use std::f64::consts::PI;

use num_complex::Complex64;
use petgraph::algo::connected_components;
use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};

use super::{crossing_points, Arc, TraceError};
use crate::poly::{cluster_roots_with_radius, ComplexPoly, PolyError};

const ENDPOINT_TOL: f64 = 1e-6;
const SCAN_SAMPLES: usize = 3600;
/// Largest deviation from anti-parallel for two arcs to be conjoined.
const CONJOIN_TOL: f64 = 1e-2;

/// Directions in which the continuum leaves a zero of `T^2 - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    /// Sorted, in `[0, 2 pi)`.
    pub directions: Vec<f64>,
    /// `directions[i + 1] - directions[i]`, the last one wrapping around.
    pub gaps: Vec<f64>,
}

/// Scans a small circle around `vertex` (where `T = ±1`) for the directions
/// along which `T` moves into `[-1, 1]`.
pub fn junction_angles(t: &ComplexPoly, vertex: Complex64) -> Junction {
    let shifted = t.taylor_shift(vertex);
    let level = shifted.coeffs()[0];
    let inward = if level.re >= 0.0 { -1.0 } else { 1.0 };
    let radius = 1e-4 * (1.0 + vertex.norm());
    // T(vertex + h) - T(vertex), without the constant term.
    let delta = |phi: f64| -> Complex64 {
        let h = Complex64::from_polar(radius, phi);
        let c = shifted.coeffs();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..c.len()).rev() {
            acc = (acc + c[k]) * h;
        }
        acc
    };
    let step = 2.0 * PI / SCAN_SAMPLES as f64;
    let mut directions = Vec::new();
    let mut keep = |phi: f64| {
        if delta(phi).re * inward > 0.0 {
            directions.push(phi.rem_euclid(2.0 * PI));
        }
    };
    for i in 0..SCAN_SAMPLES {
        // Offset by half a step so that directions along the axes, where
        // rounding noise decides the sign, fall strictly inside a bracket.
        let (a, b) = ((i as f64 + 0.5) * step, (i as f64 + 1.5) * step);
        let (fa, fb) = (delta(a).im, delta(b).im);
        if fa == 0.0 {
            keep(a);
        } else if fb != 0.0 && fa.signum() != fb.signum() {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = delta(mid).im;
                if fm == 0.0 {
                    (lo, hi) = (mid, mid);
                    break;
                }
                if fm.signum() == fa.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            keep(0.5 * (lo + hi));
        }
    }
    directions.sort_by(f64::total_cmp);
    directions.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let k = directions.len();
    let gaps = (0..k)
        .map(|i| {
            if i + 1 < k {
                directions[i + 1] - directions[i]
            } else {
                directions[0] + 2.0 * PI - directions[i]
            }
        })
        .collect();
    Junction { directions, gaps }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub point: Complex64,
    pub degree: usize,
}

/// A maximal analytic piece between two vertices, possibly several traced
/// arcs conjoined at double zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub arc_ids: Vec<usize>,
    pub samples: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// Double zeros of `T^2 - 1` through which two arcs were conjoined.
    pub tangency_points: Vec<Complex64>,
    /// Interior crossings (critical points of `T` that are not zeros of `T^2 - 1`).
    pub crossing_points: Vec<Complex64>,
}

impl ContinuumGraph {
    pub fn count_degree(&self, degree: usize) -> usize {
        self.vertices.iter().filter(|v| v.degree == degree).count()
    }

    pub fn leaves(&self) -> Vec<Complex64> {
        self.vertices.iter().filter(|v| v.degree == 1).map(|v| v.point).collect()
    }

    pub fn component_count(&self) -> usize {
        let mut g = UnGraph::<(), ()>::new_undirected();
        let nodes: Vec<_> = self.vertices.iter().map(|_| g.add_node(())).collect();
        for e in &self.edges {
            g.add_edge(nodes[e.from], nodes[e.to], ());
        }
        connected_components(&g)
    }

    pub fn is_tree(&self) -> bool {
        !self.vertices.is_empty() && self.edges.len() + 1 == self.vertices.len() && self.component_count() == 1
    }

    pub fn require_tree(&self) -> Result<(), TraceError> {
        if self.is_tree() {
            Ok(())
        } else {
            Err(TraceError::NotATree {
                vertices: self.vertices.len(),
                edges: self.edges.len(),
                components: self.component_count(),
            })
        }
    }
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Direction of the arc leaving `vertex`, snapped to the nearest exact
/// junction direction.
fn leaving_direction(arc: &Arc, at_start: bool, junction: &Junction) -> Option<f64> {
    let s = &arc.samples;
    let (v, next) = if at_start { (s[0], s[1]) } else { (s[s.len() - 1], s[s.len() - 2]) };
    let rough = (next - v).arg();
    junction
        .directions
        .iter()
        .copied()
        .min_by(|a, b| angle_diff(*a, rough).total_cmp(&angle_diff(*b, rough)))
}

/// Clusters arc endpoints into vertices, conjoins pairs of arcs meeting
/// anti-parallel at double zeros, and collects interior crossings.
pub fn build_graph(t: &ComplexPoly, arcs: &[Arc]) -> Result<ContinuumGraph, PolyError> {
    let endpoints: Vec<Complex64> = arcs.iter().flat_map(|a| [a.start(), a.end()]).collect();
    let scale = 1.0 + endpoints.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let clusters = cluster_roots_with_radius(&endpoints, ENDPOINT_TOL * scale);
    let vertex_of = |z: Complex64| -> usize {
        clusters
            .iter()
            .position(|c| c.raw_members.contains(&z))
            .expect("every endpoint is in a cluster")
    };
    // incidences[v] = (arc index, arc starts at v)
    let mut incidences: Vec<Vec<(usize, bool)>> = vec![Vec::new(); clusters.len()];
    let mut arc_ends = Vec::with_capacity(arcs.len());
    for (i, a) in arcs.iter().enumerate() {
        let (u, v) = (vertex_of(a.start()), vertex_of(a.end()));
        incidences[u].push((i, true));
        incidences[v].push((i, false));
        arc_ends.push((u, v));
    }

    let mut conjoined = vec![false; clusters.len()];
    for (v, inc) in incidences.iter().enumerate() {
        if inc.len() != 2 || inc[0].0 == inc[1].0 {
            continue;
        }
        let junction = junction_angles(t, clusters[v].center);
        let d0 = leaving_direction(&arcs[inc[0].0], inc[0].1, &junction);
        let d1 = leaving_direction(&arcs[inc[1].0], inc[1].1, &junction);
        if let (Some(a), Some(b)) = (d0, d1) {
            if (angle_diff(a, b) - PI).abs() < CONJOIN_TOL {
                conjoined[v] = true;
            }
        }
    }

    let mut index = vec![usize::MAX; clusters.len()];
    let mut vertices = Vec::new();
    for (v, c) in clusters.iter().enumerate() {
        if !conjoined[v] {
            index[v] = vertices.len();
            vertices.push(Vertex { point: c.center, degree: 0 });
        }
    }

    let mut used = vec![false; arcs.len()];
    let mut edges = Vec::new();
    // Walk from real vertices first, then close any remaining loops.
    let mut starts: Vec<(usize, usize, bool)> = Vec::new();
    for (v, inc) in incidences.iter().enumerate() {
        if !conjoined[v] {
            starts.extend(inc.iter().map(|&(a, s)| (v, a, s)));
        }
    }
    for (i, &(u, _)) in arc_ends.iter().enumerate() {
        starts.push((u, i, true));
    }
    for (from, first_arc, first_at_start) in starts {
        if used[first_arc] {
            continue;
        }
        let mut samples: Vec<Complex64> = Vec::new();
        let mut arc_ids = Vec::new();
        let (mut arc, mut at_start) = (first_arc, first_at_start);
        let mut here;
        loop {
            used[arc] = true;
            arc_ids.push(arcs[arc].id);
            let mut s = arcs[arc].samples.clone();
            if !at_start {
                s.reverse();
            }
            if !samples.is_empty() {
                s.remove(0);
            }
            samples.extend(s);
            here = if at_start { arc_ends[arc].1 } else { arc_ends[arc].0 };
            if !conjoined[here] {
                break;
            }
            match incidences[here].iter().find(|&&(a, _)| !used[a]) {
                Some(&(a, s)) => {
                    arc = a;
                    at_start = s;
                }
                None => break,
            }
        }
        let (fi, ti) = (resolve(&mut vertices, &mut index, &clusters, from), resolve(&mut vertices, &mut index, &clusters, here));
        vertices[fi].degree += 1;
        vertices[ti].degree += 1;
        edges.push(Edge { from: fi, to: ti, arc_ids, samples });
    }

    let tangency_points = clusters
        .iter()
        .zip(&conjoined)
        .filter(|(_, &c)| c)
        .map(|(c, _)| c.center)
        .filter(|z| !vertices.iter().any(|v| v.point == *z))
        .collect();
    Ok(ContinuumGraph { vertices, edges, tangency_points, crossing_points: crossing_points(t)? })
}

/// Index of cluster `v` among the vertices, promoting a conjoined point to a
/// vertex when a closed loop has to start somewhere.
fn resolve(vertices: &mut Vec<Vertex>, index: &mut [usize], clusters: &[crate::poly::RootCluster], v: usize) -> usize {
    if index[v] == usize::MAX {
        index[v] = vertices.len();
        vertices.push(Vertex { point: clusters[v].center, degree: 0 });
    }
    index[v]
}
