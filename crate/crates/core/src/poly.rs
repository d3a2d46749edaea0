//! Dense complex polynomials: arithmetic, evaluation, simultaneous root
//! finding and multiplicity clustering.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest degree any polynomial in this crate may have.
pub const MAX_DEGREE: usize = 64;

/// Relative radius used when grouping root approximations into clusters.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

const ROOT_MAX_ITER: usize = 500;
const ROOT_STEP_TOL: f64 = 1e-13;
const ROOT_SEED: u64 = 0x5eed_cafe;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial degree {0} exceeds the supported maximum of {MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("polynomial has no coefficients")]
    Empty,
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("operation needs a polynomial of degree at least 1")]
    ConstantPolynomial,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("exact division failed: remainder {remainder:.3e} exceeds {bound:.3e}")]
    RemainderTooLarge { remainder: f64, bound: f64 },
    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),
}

/// A polynomial with complex coefficients stored in ascending degree order.
///
/// The leading coefficient is nonzero, except for the zero polynomial which is
/// stored as the single coefficient `0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl TryFrom<Vec<Complex64>> for ComplexPoly {
    type Error = PolyError;

    fn try_from(coeffs: Vec<Complex64>) -> Result<Self, Self::Error> {
        ComplexPoly::new(coeffs)
    }
}

impl From<ComplexPoly> for Vec<Complex64> {
    fn from(p: ComplexPoly) -> Self {
        p.coeffs
    }
}

impl ComplexPoly {
    /// Builds a polynomial from ascending coefficients, trimming exact zero
    /// leading terms.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self, PolyError> {
        if coeffs.is_empty() {
            return Err(PolyError::Empty);
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(PolyError::NonFinite);
        }
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == Complex64::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs.len() - 1 > MAX_DEGREE {
            return Err(PolyError::DegreeTooLarge(coeffs.len() - 1));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, PolyError> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// `lead * prod (z - r)` over the given roots.
    pub fn from_roots(roots: &[Complex64], lead: Complex64) -> Result<Self, PolyError> {
        if roots.len() > MAX_DEGREE {
            return Err(PolyError::DegreeTooLarge(roots.len()));
        }
        let mut coeffs = vec![lead];
        for &r in roots {
            coeffs.push(Complex64::new(0.0, 0.0));
            for k in (1..coeffs.len()).rev() {
                coeffs[k] = coeffs[k - 1] - r * coeffs[k];
            }
            coeffs[0] = -r * coeffs[0];
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex64::new(0.0, 0.0)
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |a_k| |z|^k`, the scale of rounding errors in [`Self::eval`].
    pub fn eval_abs_bound(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// Product of two polynomials (coefficient convolution).
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out).unwrap_or_else(|_| Self::zero())
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.multiply(self))
    }

    /// Formal derivative; constants map to the zero polynomial.
    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Self::new(coeffs).unwrap_or_else(|_| Self::zero())
    }

    pub fn nth_derivative(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    /// Coefficients of `p(z0 + h)` as a polynomial in `h`.
    pub fn taylor_shift(&self, z0: Complex64) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for k in (i..n - 1).rev() {
                let next = c[k + 1];
                c[k] += z0 * next;
            }
        }
        Self::new(c).unwrap_or_else(|_| Self::zero())
    }

    /// Long division, returning `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), PolyError> {
        if divisor.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        let dd = divisor.degree();
        if self.degree() < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Complex64::new(0.0, 0.0); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * b;
            }
            rem[k + dd] = Complex64::new(0.0, 0.0);
        }
        rem.truncate(dd.max(1));
        Ok((Self::new(quot)?, Self::new(rem)?))
    }

    /// Quotient of a division that is expected to be exact.
    ///
    /// Fails when some remainder coefficient reaches `tol * (1 + max|p_k|)`.
    pub fn divide_exact(&self, divisor: &Self, tol: f64) -> Result<Self, PolyError> {
        let (q, r) = self.div_rem(divisor)?;
        let remainder = r.max_coeff_abs();
        let bound = tol * (1.0 + self.max_coeff_abs());
        if remainder >= bound {
            return Err(PolyError::RemainderTooLarge { remainder, bound });
        }
        Ok(q)
    }

    /// Largest coefficient difference, after padding the shorter polynomial.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or(zero);
                let b = other.coeffs.get(k).copied().unwrap_or(zero);
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }

    /// All `degree()` roots, repeated according to multiplicity, via
    /// Aberth-Ehrlich simultaneous iteration followed by Newton polishing of
    /// isolated roots.
    pub fn find_roots(&self) -> Result<Vec<Complex64>, PolyError> {
        aberth(self, ROOT_SEED)
    }

    /// Roots grouped by multiplicity.
    ///
    /// Approximations of a multiple root spread out to roughly
    /// `eps^(1/multiplicity)`, which for triple roots is already larger than
    /// the fixed clustering radius. Each approximation therefore also carries
    /// a Weierstrass inclusion radius, and approximations whose disks overlap
    /// are merged. Cluster centers are then polished by Newton iteration on
    /// the derivative in which the root becomes simple.
    pub fn root_clusters(&self) -> Result<Vec<RootCluster>, PolyError> {
        let roots = self.find_roots()?;
        let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
        let base = DEFAULT_CLUSTER_TOL * scale;
        let d = roots.len();
        let lead = self.leading();
        let radii: Vec<f64> = (0..d)
            .map(|i| {
                let denom = roots
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .fold(lead, |acc, (_, &r)| acc * (roots[i] - r));
                // Upper bound on the true |p(z_i)|, including rounding in the evaluation.
                let value = self.eval(roots[i]).norm() + 4.0 * f64::EPSILON * self.eval_abs_bound(roots[i]);
                let rho = 2.0 * d as f64 * value / denom.norm();
                if rho.is_finite() {
                    rho
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let groups = link_groups(&roots, |i, j| {
            (roots[i] - roots[j]).norm() <= base.max(radii[i] + radii[j])
        });
        let mut clusters: Vec<RootCluster> = groups
            .into_iter()
            .map(|members| {
                let raw: Vec<Complex64> = members.iter().map(|&i| roots[i]).collect();
                let center = mean(&raw);
                RootCluster {
                    center: self.polish_multiple(center, raw.len()),
                    multiplicity: raw.len(),
                    raw_members: raw,
                }
            })
            .collect();
        sort_clusters(&mut clusters);
        Ok(clusters)
    }

    fn polish_multiple(&self, start: Complex64, multiplicity: usize) -> Complex64 {
        let q = self.nth_derivative(multiplicity - 1);
        if q.degree() == 0 {
            return start;
        }
        let mut z = start;
        let mut fz = q.eval(z).norm();
        for _ in 0..4 {
            let (v, dv) = q.eval_with_derivative(z);
            if dv.norm() == 0.0 {
                break;
            }
            let cand = z - v / dv;
            let fc = q.eval(cand).norm();
            if !(fc < fz) {
                break;
            }
            z = cand;
            fz = fc;
        }
        z
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;

    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(zero) + rhs.coeffs.get(k).copied().unwrap_or(zero)
            })
            .collect();
        ComplexPoly::new(coeffs).unwrap_or_else(|_| ComplexPoly::zero())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;

    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        self + &(-rhs)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;

    fn neg(self) -> ComplexPoly {
        ComplexPoly {
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;

    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        self.multiply(rhs)
    }
}

/// A group of root approximations treated as one root of multiplicity
/// `multiplicity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
    pub raw_members: Vec<Complex64>,
}

/// Single-linkage grouping with radius `DEFAULT_CLUSTER_TOL * scale`.
pub fn cluster_roots(roots: &[Complex64], scale: f64) -> Vec<RootCluster> {
    cluster_roots_with_radius(roots, DEFAULT_CLUSTER_TOL * scale)
}

pub fn cluster_roots_with_radius(roots: &[Complex64], radius: f64) -> Vec<RootCluster> {
    let groups = link_groups(roots, |i, j| (roots[i] - roots[j]).norm() <= radius);
    let mut clusters: Vec<RootCluster> = groups
        .into_iter()
        .map(|members| {
            let raw: Vec<Complex64> = members.iter().map(|&i| roots[i]).collect();
            RootCluster {
                center: mean(&raw),
                multiplicity: raw.len(),
                raw_members: raw,
            }
        })
        .collect();
    sort_clusters(&mut clusters);
    clusters
}

/// Expands clusters back to `lead * prod (z - center)^multiplicity`.
pub fn poly_from_clusters(clusters: &[RootCluster], lead: Complex64) -> Result<ComplexPoly, PolyError> {
    let roots: Vec<Complex64> = clusters
        .iter()
        .flat_map(|c| std::iter::repeat_n(c.center, c.multiplicity))
        .collect();
    ComplexPoly::from_roots(&roots, lead)
}

/// Euclidean distance from `w` to the real segment `[-1, 1]`.
pub fn dist_to_interval(w: Complex64) -> f64 {
    let dx = if w.re > 1.0 {
        w.re - 1.0
    } else if w.re < -1.0 {
        -1.0 - w.re
    } else {
        0.0
    };
    dx.hypot(w.im)
}

fn mean(zs: &[Complex64]) -> Complex64 {
    zs.iter().sum::<Complex64>() / zs.len() as f64
}

/// Deterministic order: by real part, then imaginary part.
fn sort_clusters(clusters: &mut [RootCluster]) {
    clusters.sort_by(|a, b| {
        a.center
            .re
            .total_cmp(&b.center.re)
            .then(a.center.im.total_cmp(&b.center.im))
    });
}

/// Connected components of the graph on `0..items.len()` with edges given by
/// `linked`. Components come back in order of their smallest member.
fn link_groups<T>(items: &[T], linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if linked(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn aberth(p: &ComplexPoly, seed: u64) -> Result<Vec<Complex64>, PolyError> {
    let d = p.degree();
    if d == 0 {
        return Err(PolyError::ConstantPolynomial);
    }
    let lead = p.leading();
    if d == 1 {
        return Ok(vec![-p.coeffs[0] / lead]);
    }
    let dp = p.derivative();

    // Start on a perturbed circle around the root centroid whose radius is the
    // geometric mean of the root distances from that centroid.
    let center = -p.coeffs[d - 1] / (lead * d as f64);
    let mut radius = (p.eval(center) / lead).norm().powf(1.0 / d as f64);
    if !(radius > 1e-8 * (1.0 + center.norm())) {
        radius = 1.0 + center.norm();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let angle = offset + std::f64::consts::TAU * k as f64 / d as f64 + rng.gen_range(-0.1..0.1);
            let r = radius * (1.0 + rng.gen_range(-0.05..0.05));
            center + Complex64::from_polar(r, angle)
        })
        .collect();
    let mut done = vec![false; d];
    let eps = f64::EPSILON;

    for _ in 0..ROOT_MAX_ITER {
        let scale = 1.0 + z.iter().map(|r| r.norm()).fold(0.0, f64::max);
        let mut max_step: f64 = 0.0;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let (v, dv) = p.eval_with_derivative(zi);
            if v.norm() <= 4.0 * eps * p.eval_abs_bound(zi) {
                done[i] = true;
                continue;
            }
            let ratio = if dv.norm() == 0.0 {
                // Stationary point of p: nudge and retry next sweep.
                z[i] = zi + Complex64::new(1e-3 * scale, 1e-3 * scale);
                max_step = f64::INFINITY;
                continue;
            } else {
                v / dv
            };
            let repulsion: Complex64 = z
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &zj)| {
                    let diff = zi - zj;
                    if diff.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] = zi - step;
            max_step = max_step.max(step.norm());
            if step.norm() < ROOT_STEP_TOL * scale {
                done[i] = true;
            }
        }
        if done.iter().all(|&x| x) || max_step < ROOT_STEP_TOL * scale {
            polish(p, &dp, &mut z);
            return Ok(z);
        }
    }
    Err(PolyError::NoConvergence(ROOT_MAX_ITER))
}

/// Newton steps that are kept only while they reduce `|p|`.
fn polish(p: &ComplexPoly, dp: &ComplexPoly, z: &mut [Complex64]) {
    for zi in z.iter_mut() {
        let mut fz = p.eval(*zi).norm();
        for _ in 0..3 {
            if fz == 0.0 {
                break;
            }
            let dv = dp.eval(*zi);
            if dv.norm() == 0.0 {
                break;
            }
            let cand = *zi - p.eval(*zi) / dv;
            let fc = p.eval(cand).norm();
            if !(fc < fz) {
                break;
            }
            *zi = cand;
            fz = fc;
        }
    }
}
