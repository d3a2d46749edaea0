//! Tracing `T^{-1}([-1, 1])` as polylines: for each level `cos(theta)` the
//! `n` roots of `T - cos(theta)` are chained from `theta = 0` to `theta = pi`.

mod graph;
mod render;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{dist_to_interval, ComplexPoly, PolyError};

pub use graph::{build_graph, junction_angles, ContinuumGraph, Edge, Junction, Vertex};
pub use render::{arcs_to_csv, render_svg, Marker, MarkerKind, SvgOptions};

pub const MIN_STEPS: usize = 64;
const MAX_REFINE_DEPTH: usize = 20;
/// Two matchings whose costs differ by less than this (relative) are a tie.
const TIE_TOL: f64 = 1e-9;
/// Roots or predictions closer than this (relative) are treated as one.
const COINCIDENT_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("need at least {MIN_STEPS} level steps, got {0}")]
    TooFewSteps(usize),
    #[error("root matching stays ambiguous near theta = {theta} after {MAX_REFINE_DEPTH} refinements")]
    MatchingAmbiguity { theta: f64 },
    #[error("graph is not a tree: {vertices} vertices, {edges} edges, {components} components")]
    NotATree { vertices: usize, edges: usize, components: usize },
}

/// One chain of roots from a zero of `T - 1` (`theta = 0`) to a zero of
/// `T + 1` (`theta = pi`); `T(samples[i]) = cos(level_param[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub id: usize,
    pub samples: Vec<Complex64>,
    pub level_param: Vec<f64>,
}

impl Arc {
    /// Endpoint on `T = 1`.
    pub fn start(&self) -> Complex64 {
        self.samples[0]
    }

    /// Endpoint on `T = -1`.
    pub fn end(&self) -> Complex64 {
        self.samples[self.samples.len() - 1]
    }
}

struct Chain {
    samples: Vec<Complex64>,
    thetas: Vec<f64>,
}

impl Chain {
    /// Linear extrapolation in `theta`.
    fn predict(&self, theta: f64) -> Complex64 {
        let k = self.samples.len();
        if k < 2 {
            return self.samples[k - 1];
        }
        let (z1, z0) = (self.samples[k - 1], self.samples[k - 2]);
        let (t1, t0) = (self.thetas[k - 1], self.thetas[k - 2]);
        z1 + (z1 - z0) * ((theta - t1) / (t1 - t0))
    }
}

fn expand(clusters: Vec<crate::poly::RootCluster>) -> Vec<Complex64> {
    clusters
        .into_iter()
        .flat_map(|c| std::iter::repeat_n(c.center, c.multiplicity))
        .collect()
}

fn roots_at(t: &ComplexPoly, theta: f64) -> Result<Vec<Complex64>, PolyError> {
    (t - &ComplexPoly::constant(Complex64::new(theta.cos(), 0.0))).find_roots()
}

/// Critical points of `T` lying inside the continuum but not on `T = ±1`,
/// where arcs cross without branching.
pub fn crossing_points(t: &ComplexPoly) -> Result<Vec<Complex64>, PolyError> {
    if t.degree() < 2 {
        return Ok(Vec::new());
    }
    Ok(t.derivative()
        .root_clusters()?
        .into_iter()
        .map(|c| c.center)
        .filter(|&z| {
            let w = t.eval(z);
            dist_to_interval(w) < 1e-8 && (w - 1.0).norm() > 1e-6 && (w + 1.0).norm() > 1e-6
        })
        .collect())
}

/// Greedy global matching of predictions to roots, smallest distance first.
/// Also reports whether some pair of distinct chains could swap targets at
/// no extra cost.
fn greedy_match(preds: &[Complex64], roots: &[Complex64], scale: f64) -> (Vec<usize>, bool) {
    let n = preds.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, p) in preds.iter().enumerate() {
        for (j, r) in roots.iter().enumerate() {
            pairs.push(((p - r).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assign = vec![usize::MAX; n];
    let mut taken = vec![false; roots.len()];
    for (_, i, j) in pairs {
        if assign[i] == usize::MAX && !taken[j] {
            assign[i] = j;
            taken[j] = true;
        }
    }
    let coincide = COINCIDENT_TOL * scale;
    let mut ambiguous = false;
    'outer: for i in 0..n {
        for k in i + 1..n {
            let (a, b) = (assign[i], assign[k]);
            if (preds[i] - preds[k]).norm() <= coincide || (roots[a] - roots[b]).norm() <= coincide {
                continue;
            }
            let same = (preds[i] - roots[a]).norm() + (preds[k] - roots[b]).norm();
            let swap = (preds[i] - roots[b]).norm() + (preds[k] - roots[a]).norm();
            if swap <= same + TIE_TOL * scale {
                ambiguous = true;
                break 'outer;
            }
        }
    }
    (assign, ambiguous)
}

struct Tracer<'a> {
    t: &'a ComplexPoly,
    scale: f64,
    critical_levels: Vec<f64>,
}

impl Tracer<'_> {
    fn crosses_critical_level(&self, a: f64, b: f64) -> bool {
        let slack = 1e-12;
        self.critical_levels.iter().any(|&c| c >= a - slack && c <= b + slack)
    }

    fn advance(&self, chains: &mut [Chain], a: f64, b: f64, roots: &[Complex64], depth: usize) -> Result<(), TraceError> {
        let preds: Vec<Complex64> = chains.iter().map(|c| c.predict(b)).collect();
        let (assign, ambiguous) = greedy_match(&preds, roots, self.scale);
        if ambiguous && !self.crosses_critical_level(a, b) {
            if depth >= MAX_REFINE_DEPTH {
                return Err(TraceError::MatchingAmbiguity { theta: b });
            }
            let mid = 0.5 * (a + b);
            let mid_roots = roots_at(self.t, mid)?;
            self.advance(chains, a, mid, &mid_roots, depth + 1)?;
            return self.advance(chains, mid, b, roots, depth + 1);
        }
        for (chain, &j) in chains.iter_mut().zip(&assign) {
            chain.samples.push(roots[j]);
            chain.thetas.push(b);
        }
        Ok(())
    }
}

/// Chains the roots of `T - cos(m pi / steps)`, `m = 0..=steps`, into `n`
/// arcs oriented from `T = 1` to `T = -1`. Endpoints are the clustered zeros
/// of `T -+ 1`. Steps that stay ambiguous are bisected, except where the
/// level passes a critical value of `T` inside the continuum (an interior
/// crossing, where any pairing is a valid continuation).
pub fn trace(t: &ComplexPoly, steps: usize) -> Result<Vec<Arc>, TraceError> {
    let n = t.degree();
    if n == 0 {
        return Err(PolyError::ConstantPolynomial.into());
    }
    if steps < MIN_STEPS {
        return Err(TraceError::TooFewSteps(steps));
    }
    let one = ComplexPoly::one();
    let starts = expand((t - &one).root_clusters()?);
    let ends = expand((t + &one).root_clusters()?);
    let scale = 1.0 + starts.iter().chain(&ends).fold(0.0f64, |m, z| m.max(z.norm()));
    let critical_levels = crossing_points(t)?
        .into_iter()
        .map(|z| t.eval(z).re.clamp(-1.0, 1.0).acos())
        .collect();
    let tracer = Tracer { t, scale, critical_levels };

    let theta = |m: usize| m as f64 * PI / steps as f64;
    let levels: Vec<Vec<Complex64>> = (1..steps)
        .into_par_iter()
        .map(|m| roots_at(t, theta(m)))
        .collect::<Result<_, _>>()?;

    let mut chains: Vec<Chain> = starts
        .iter()
        .map(|&z| Chain { samples: vec![z], thetas: vec![0.0] })
        .collect();
    for (k, roots) in levels.iter().enumerate() {
        let m = k + 1;
        tracer.advance(&mut chains, theta(m - 1), theta(m), roots, 0)?;
    }
    let preds: Vec<Complex64> = chains.iter().map(|c| c.predict(PI)).collect();
    let (assign, _) = greedy_match(&preds, &ends, scale);
    for (chain, &j) in chains.iter_mut().zip(&assign) {
        chain.samples.push(ends[j]);
        chain.thetas.push(PI);
    }
    Ok(chains
        .into_iter()
        .enumerate()
        .map(|(id, c)| Arc { id, samples: c.samples, level_param: c.thetas })
        .collect())
}
