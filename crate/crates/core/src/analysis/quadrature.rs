//! Contour integrals of `P(w) / sqrt(Q(w))` with a continuously tracked
//! square-root branch.
//!
//! The path is cut into pieces short enough that, anchored at the piece start
//! `a`, every factor `sqrt((w - r) / (a - r))` stays on the principal branch.
//! The anchor value of `sqrt(Q)` is carried from piece to piece. Pieces that
//! start or end on a branch point use the substitution `w = e + v s^2`, which
//! turns the inverse square-root singularity into a smooth integrand.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::ComplexPoly;

const GL_NODES: usize = 32;
const PIECE_TOL: f64 = 1e-9;
const MAX_BISECTIONS: usize = 24;
const MAX_PIECES: usize = 200_000;
/// Fraction of the distance to the nearest branch point a regular piece may span.
const REGULAR_REACH: f64 = 0.5;
/// Same, for pieces anchored on a branch point.
const SINGULAR_REACH: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("path needs at least two waypoints")]
    ShortPath,
    #[error("consecutive waypoints coincide at index {0}")]
    RepeatedWaypoint(usize),
    #[error("path passes within {distance:.3e} of branch point {point}")]
    PathTooClose { point: Complex64, distance: f64 },
    #[error("square-root branch ambiguous at {0}")]
    BranchJump(Complex64),
    #[error("no path avoiding the branch points was found from {from} to {to}")]
    NoClearPath { from: Complex64, to: Complex64 },
}

/// `numerator(w) / sqrt(lead * prod (w - r_j))`.
#[derive(Debug, Clone)]
pub struct HyperellipticIntegrand {
    numerator: ComplexPoly,
    branch_points: Vec<Complex64>,
    radicand_lead: Complex64,
}

impl HyperellipticIntegrand {
    pub fn new(numerator: ComplexPoly, branch_points: Vec<Complex64>, radicand_lead: Complex64) -> Self {
        Self {
            numerator,
            branch_points,
            radicand_lead,
        }
    }

    /// `sqrt(prod (w - d_j)) / sqrt(prod (w - c_j))`.
    ///
    /// Repeated `d` points are folded: an even power moves entirely into the
    /// numerator, an odd power leaves a single factor under the root.
    pub fn from_points(cset: &[Complex64], dset: &[Complex64]) -> Self {
        let mut numerator_roots = Vec::new();
        let mut branch_points = cset.to_vec();
        let mut seen = vec![false; dset.len()];
        for i in 0..dset.len() {
            if seen[i] {
                continue;
            }
            let scale = 1.0 + dset[i].norm();
            let group: Vec<usize> = (i..dset.len())
                .filter(|&j| !seen[j] && (dset[j] - dset[i]).norm() <= 1e-9 * scale)
                .collect();
            for &j in &group {
                seen[j] = true;
            }
            let m = group.len();
            let d = dset[i];
            numerator_roots.extend(std::iter::repeat_n(d, m.div_ceil(2)));
            if m % 2 == 1 {
                branch_points.push(d);
            }
        }
        let numerator = ComplexPoly::from_roots(&numerator_roots, Complex64::new(1.0, 0.0))
            .unwrap_or_else(|_| ComplexPoly::one());
        Self::new(numerator, branch_points, Complex64::new(1.0, 0.0))
    }

    pub fn numerator(&self) -> &ComplexPoly {
        &self.numerator
    }

    pub fn branch_points(&self) -> &[Complex64] {
        &self.branch_points
    }

    pub fn radicand(&self, w: Complex64) -> Complex64 {
        self.branch_points
            .iter()
            .fold(self.radicand_lead, |acc, &r| acc * (w - r))
    }

    fn nearest_branch_distance(&self, w: Complex64, skip: Option<usize>) -> f64 {
        self.branch_points
            .iter()
            .enumerate()
            .filter(|&(j, _)| Some(j) != skip)
            .map(|(_, &r)| (w - r).norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn branch_index_at(&self, w: Complex64) -> Option<usize> {
        let scale = 1.0 + w.norm();
        self.branch_points
            .iter()
            .enumerate()
            .map(|(j, &r)| (j, (w - r).norm()))
            .filter(|&(_, d)| d <= 1e-10 * scale)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| j)
    }

    /// `prod_{j != skip} sqrt((w - r_j) / (a - r_j))`, principal branch per factor.
    fn ratio_root(&self, w: Complex64, a: Complex64, skip: Option<usize>) -> Complex64 {
        self.branch_points
            .iter()
            .enumerate()
            .filter(|&(j, _)| Some(j) != skip)
            .fold(Complex64::new(1.0, 0.0), |acc, (_, &r)| acc * ((w - r) / (a - r)).sqrt())
    }

    fn deflated_radicand(&self, w: Complex64, skip: usize) -> Complex64 {
        self.branch_points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != skip)
            .fold(self.radicand_lead, |acc, (_, &r)| acc * (w - r))
    }
}

/// A polyline contour. An end flagged singular sits on a branch point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraturePath {
    pub waypoints: Vec<Complex64>,
    pub samples_per_segment: usize,
    pub start_singular: bool,
    pub end_singular: bool,
}

impl QuadraturePath {
    /// Path through `waypoints`, flagging ends that coincide with a branch
    /// point of `integrand`.
    pub fn new(waypoints: Vec<Complex64>, integrand: &HyperellipticIntegrand) -> Result<Self, QuadratureError> {
        if waypoints.len() < 2 {
            return Err(QuadratureError::ShortPath);
        }
        for (k, w) in waypoints.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(QuadratureError::RepeatedWaypoint(k));
            }
        }
        let start_singular = integrand.branch_index_at(waypoints[0]).is_some();
        let end_singular = integrand.branch_index_at(waypoints[waypoints.len() - 1]).is_some();
        Ok(Self {
            waypoints,
            samples_per_segment: GL_NODES,
            start_singular,
            end_singular,
        })
    }

    pub fn start(&self) -> Complex64 {
        self.waypoints[0]
    }

    pub fn end(&self) -> Complex64 {
        self.waypoints[self.waypoints.len() - 1]
    }

    /// Smallest distance from the path to a branch point other than those at
    /// its ends.
    pub fn clearance(&self, integrand: &HyperellipticIntegrand) -> (f64, Option<Complex64>) {
        let s = integrand.branch_index_at(self.start());
        let e = integrand.branch_index_at(self.end());
        let mut best = (f64::INFINITY, None);
        for (j, &r) in integrand.branch_points.iter().enumerate() {
            if Some(j) == s || Some(j) == e {
                continue;
            }
            for w in self.waypoints.windows(2) {
                let d = point_segment_distance(r, w[0], w[1]);
                if d < best.0 {
                    best = (d, Some(r));
                }
            }
        }
        best
    }
}

/// Last value of `sqrt(Q)` seen along a path; the next sign choice is the
/// one closest to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchState {
    pub previous: Complex64,
}

impl BranchState {
    /// Picks `+root` or `-root`, whichever continues `previous`.
    pub fn continue_with(&mut self, root: Complex64, at: Complex64) -> Result<Complex64, QuadratureError> {
        let plus = (root - self.previous).norm();
        let minus = (root + self.previous).norm();
        if (plus - minus).abs() <= 1e-6 * root.norm().max(self.previous.norm()) {
            return Err(QuadratureError::BranchJump(at));
        }
        let chosen = if plus < minus { root } else { -root };
        self.previous = chosen;
        Ok(chosen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathIntegral {
    pub value: Complex64,
    pub error_estimate: f64,
    /// `sqrt(Q)` at the path end on the branch used (zero at a branch point).
    pub end_root: Complex64,
}

fn gauss_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(GL_NODES)
            .expect("rule with more than one node")
            .as_node_weight_pairs()
            .to_vec()
    })
}

fn gauss(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_rule()
        .iter()
        .map(|&(x, w)| f(mid + half * x) * w)
        .sum::<Complex64>()
        * half
}

/// Bisection-refined composite Gauss-Legendre on `[a, b]`.
pub(crate) fn adaptive(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> (Complex64, f64) {
    fn go(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, whole: Complex64, tol: f64, depth: usize) -> (Complex64, f64) {
        let m = 0.5 * (a + b);
        let left = gauss(f, a, m);
        let right = gauss(f, m, b);
        let err = (left + right - whole).norm();
        if err <= tol || depth >= MAX_BISECTIONS {
            return (left + right, err);
        }
        let (l, el) = go(f, a, m, left, 0.5 * tol, depth + 1);
        let (r, er) = go(f, m, b, right, 0.5 * tol, depth + 1);
        (l + r, el + er)
    }
    go(f, a, b, gauss(f, a, b), tol, 0)
}

/// Integrates along `path`. `start_root` fixes the branch of `sqrt(Q)` at a
/// regular start point; when absent the principal root is used.
pub fn integrate(
    integrand: &HyperellipticIntegrand,
    path: &QuadraturePath,
    start_root: Option<Complex64>,
) -> Result<PathIntegral, QuadratureError> {
    let n_seg = path.waypoints.len() - 1;
    let start_idx = if path.start_singular {
        integrand.branch_index_at(path.start())
    } else {
        None
    };
    let end_idx = if path.end_singular {
        integrand.branch_index_at(path.end())
    } else {
        None
    };

    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut state: Option<BranchState> = start_root.map(|r| BranchState { previous: r });
    let mut pieces = 0usize;

    for seg in 0..n_seg {
        let mut a = path.waypoints[seg];
        let mut b = path.waypoints[seg + 1];

        if seg == 0 {
            if let Some(k) = start_idx {
                let e = integrand.branch_points[k];
                let reach = SINGULAR_REACH * integrand.nearest_branch_distance(e, Some(k));
                let len = (b - e).norm();
                let stop = if len <= reach { b } else { e + (b - e) * (reach / len) };
                let (v, er, root) = singular_start(integrand, k, stop);
                total += v;
                err += er;
                state = Some(BranchState { previous: root });
                a = stop;
            }
        }
        let mut tail: Option<(usize, Complex64)> = None;
        if seg == n_seg - 1 {
            if let Some(k) = end_idx {
                let e = integrand.branch_points[k];
                let reach = SINGULAR_REACH * integrand.nearest_branch_distance(e, Some(k));
                let len = (a - e).norm();
                let from = if len <= reach { a } else { e + (a - e) * (reach / len) };
                tail = Some((k, from));
                b = from;
            }
        }

        // Regular pieces from a to b.
        while (b - a).norm() > 0.0 {
            pieces += 1;
            if pieces > MAX_PIECES {
                let (d, p) = path.clearance(integrand);
                return Err(QuadratureError::PathTooClose {
                    point: p.unwrap_or(a),
                    distance: d,
                });
            }
            let near = integrand.nearest_branch_distance(a, None);
            if near <= 1e-12 * (1.0 + a.norm()) {
                return Err(QuadratureError::PathTooClose { point: a, distance: near });
            }
            let reach = REGULAR_REACH * near;
            let len = (b - a).norm();
            let next = if len <= reach { b } else { a + (b - a) * (reach / len) };
            let st = state.get_or_insert_with(|| BranchState {
                previous: integrand.radicand(a).sqrt(),
            });
            let anchor = st.previous;
            let v = next - a;
            let f = |t: f64| {
                let w = a + v * t;
                integrand.numerator.eval(w) / (anchor * integrand.ratio_root(w, a, None))
            };
            let (val, er) = adaptive(&f, 0.0, 1.0, PIECE_TOL);
            total += val * v;
            err += er * v.norm();
            let propagated = anchor * integrand.ratio_root(next, a, None);
            st.previous = propagated;
            st.continue_with(integrand.radicand(next).sqrt(), next)?;
            a = next;
        }

        if let Some((k, from)) = tail {
            let st = state.get_or_insert_with(|| BranchState {
                previous: integrand.radicand(from).sqrt(),
            });
            let (v, er) = singular_end(integrand, k, from, st.previous);
            total += v;
            err += er;
            st.previous = Complex64::new(0.0, 0.0);
        }
    }

    Ok(PathIntegral {
        value: total,
        error_estimate: err,
        end_root: state.map(|s| s.previous).unwrap_or_default(),
    })
}

/// Integral from branch point `k` to `stop`; returns value, error and the
/// root `sqrt(Q(stop))` on the branch used.
fn singular_start(integrand: &HyperellipticIntegrand, k: usize, stop: Complex64) -> (Complex64, f64, Complex64) {
    let e = integrand.branch_points[k];
    let v = stop - e;
    let sv = v.sqrt();
    let g_e = integrand.deflated_radicand(e, k).sqrt();
    let f = |s: f64| {
        let w = e + v * (s * s);
        let g = g_e * integrand.ratio_root(w, e, Some(k));
        integrand.numerator.eval(w) * sv * 2.0 / g
    };
    let (val, er) = adaptive(&f, 0.0, 1.0, PIECE_TOL);
    let root = sv * g_e * integrand.ratio_root(stop, e, Some(k));
    (val, er, root)
}

/// Integral from `from` to branch point `k`, continuing the branch whose
/// value at `from` is `root_from`.
fn singular_end(integrand: &HyperellipticIntegrand, k: usize, from: Complex64, root_from: Complex64) -> (Complex64, f64) {
    let e = integrand.branch_points[k];
    let v = from - e;
    let sv = v.sqrt();
    let g_from = root_from / sv;
    let f = |s: f64| {
        let w = e + v * (s * s);
        let g = g_from * integrand.ratio_root(w, from, Some(k));
        integrand.numerator.eval(w) * sv * 2.0 / g
    };
    let (val, er) = adaptive(&f, 0.0, 1.0, PIECE_TOL);
    (-val, er)
}

pub fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// A polyline from `from` to `to` keeping at least `margin` away from every
/// branch point not located at either end: the straight segment if it is
/// clear, otherwise a detour through one or two intermediate waypoints.
pub fn clear_path(
    integrand: &HyperellipticIntegrand,
    from: Complex64,
    to: Complex64,
    margin: f64,
) -> Result<QuadraturePath, QuadratureError> {
    let skip_from = integrand.branch_index_at(from);
    let skip_to = integrand.branch_index_at(to);
    let obstacles: Vec<Complex64> = integrand
        .branch_points
        .iter()
        .enumerate()
        .filter(|&(j, _)| Some(j) != skip_from && Some(j) != skip_to)
        .map(|(_, &r)| r)
        .collect();
    // An end lying close to another branch point forces a smaller margin.
    let margin = obstacles
        .iter()
        .flat_map(|&r| [(r - from).norm(), (r - to).norm()])
        .fold(margin, |m, d| m.min(0.5 * d));
    let clear = |pts: &[Complex64]| {
        pts.windows(2).all(|w| {
            obstacles
                .iter()
                .all(|&r| point_segment_distance(r, w[0], w[1]) >= margin)
        })
    };
    let build = |pts: Vec<Complex64>| QuadraturePath::new(pts, integrand);

    if clear(&[from, to]) {
        return build(vec![from, to]);
    }
    let len = (to - from).norm();
    let dir = (to - from) / len;
    let normal = dir * Complex64::new(0.0, 1.0);
    let mid = 0.5 * (from + to);
    for scale in [0.1, 0.2, 0.3, 0.45, 0.6, 0.8, 1.0, 1.3, 1.7, 2.2] {
        for along in [0.0, -0.25, 0.25, -0.4, 0.4] {
            for side in [1.0, -1.0] {
                let w = mid + dir * (along * len) + normal * (side * scale * len);
                if w != from && w != to && clear(&[from, w, to]) {
                    return build(vec![from, w, to]);
                }
            }
        }
    }
    for scale in [0.15, 0.3, 0.5, 0.8, 1.2] {
        for side in [1.0, -1.0] {
            let off = normal * (side * scale * len);
            let w1 = from + (to - from) * 0.25 + off;
            let w2 = from + (to - from) * 0.75 + off;
            if clear(&[from, w1, w2, to]) {
                return build(vec![from, w1, w2, to]);
            }
        }
    }
    Err(QuadratureError::NoClearPath { from, to })
}
