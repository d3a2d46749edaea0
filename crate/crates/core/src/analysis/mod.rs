//! Capacity, Green function and the hyperelliptic integral `Phi` whose real
//! part vanishes at every endpoint and branch point of a minimal continuum.

pub mod quadrature;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connectivity::{default_tolerance, is_connected};
use crate::factor::{factorize, FactorError, Factorization};
use crate::poly::{ComplexPoly, PolyError};
use quadrature::{clear_path, integrate, HyperellipticIntegrand, PathIntegral, QuadraturePath, QuadratureError};

/// `|Re Phi|` below this counts as zero in condition reports.
pub const CONDITION_TOL: f64 = 1e-6;
/// Largest margin a `Phi` path keeps from branch points.
const MAX_MARGIN: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("inverse image is not connected")]
    NotConnected,
    #[error("path must start at a branch point of the integrand, got {0}")]
    RegularStart(Complex64),
    #[error("base index {index} out of range ({count} endpoints)")]
    BaseIndex { index: usize, count: usize },
}

/// Logarithmic capacity of `T^{-1}([-1, 1])`: `(2 |lead|)^{-1/n}`.
pub fn capacity(t: &ComplexPoly) -> Result<f64, PolyError> {
    let n = t.degree();
    if n == 0 {
        return Err(PolyError::ConstantPolynomial);
    }
    Ok((2.0 * t.leading().norm()).powf(-1.0 / n as f64))
}

/// Sup-norm of the monic rescaling `T / lead` on its own level set, `1 / |lead|`,
/// which equals `2 cap^n`.
pub fn min_deviation(t: &ComplexPoly) -> Result<f64, PolyError> {
    if t.degree() == 0 {
        return Err(PolyError::ConstantPolynomial);
    }
    Ok(1.0 / t.leading().norm())
}

/// Green function of the complement of `T^{-1}([-1, 1])` with pole at
/// infinity: `(1/n) log |q|` where `q + 1/q = 2 T(z)` and `|q| >= 1`.
pub fn green(t: &ComplexPoly, z: Complex64) -> f64 {
    let n = t.degree().max(1) as f64;
    let w = t.eval(z);
    let log_q = if w.norm() > 1e100 {
        // q = w (1 + sqrt(1 - w^-2)) without squaring w.
        let u = w.inv();
        let s = (1.0 - u * u).sqrt();
        w.norm().ln() + (1.0 + s).norm().max((1.0 - s).norm()).ln()
    } else {
        let s = (w * w - 1.0).sqrt();
        (w + s).norm().max((w - s).norm()).ln()
    };
    (log_q / n).max(0.0)
}

/// `Phi` along `path`, which must start at a branch point of `integrand`
/// (an endpoint of the continuum).
pub fn hyperelliptic_phi(
    integrand: &HyperellipticIntegrand,
    path: &QuadraturePath,
) -> Result<PathIntegral, AnalysisError> {
    if !path.start_singular {
        return Err(AnalysisError::RegularStart(path.start()));
    }
    Ok(integrate(integrand, path, None)?)
}

/// Path margin adapted to how tightly the branch points are packed.
pub fn path_margin(integrand: &HyperellipticIntegrand) -> f64 {
    let b = integrand.branch_points();
    let mut closest = f64::INFINITY;
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            closest = closest.min((b[i] - b[j]).norm());
        }
    }
    MAX_MARGIN.min(0.3 * closest)
}

/// `Phi(z)` from `base` along an automatically chosen polyline that avoids
/// the other branch points. Only `|Re Phi|` is independent of the path.
pub fn phi_at(f: &Factorization, base: Complex64, z: Complex64) -> Result<PathIntegral, AnalysisError> {
    let integrand = f.integrand();
    let path = clear_path(&integrand, base, z, path_margin(&integrand))?;
    hyperelliptic_phi(&integrand, &path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    /// Endpoint: simple zero of `T^2 - 1`.
    C,
    /// Branch point of the continuum.
    D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionPoint {
    pub kind: PointKind,
    pub point: Complex64,
    pub re_phi: f64,
    pub error_estimate: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub base_point: Complex64,
    pub points: Vec<ConditionPoint>,
    pub max_abs_re_phi: f64,
    pub max_error_estimate: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Endpoints (simple zeros of `T^2 - 1`) and branch points (distinct roots of
/// `R^2 / prod (z - b)`, `b` the zeros of odd multiplicity >= 3).
pub fn endpoint_sets(f: &Factorization) -> Result<(Vec<Complex64>, Vec<Complex64>), PolyError> {
    let cset = f.simple_zeros();
    let b = f.odd_multiple_zeros();
    let r2 = f.r.multiply(&f.r);
    let q = match ComplexPoly::from_roots(&b, Complex64::new(1.0, 0.0)) {
        Ok(den) if den.degree() <= r2.degree() => r2.divide_exact(&den, 1e-6).unwrap_or_else(|_| f.r.clone()),
        _ => f.r.clone(),
    };
    let dset = if q.degree() == 0 {
        Vec::new()
    } else {
        q.root_clusters()?.into_iter().map(|c| c.center).collect()
    };
    Ok((cset, dset))
}

/// Evaluates `Re Phi` at every endpoint and branch point with `Phi` based at
/// the first endpoint.
pub fn check_chebotarev_conditions(t: &ComplexPoly) -> Result<ConditionReport, AnalysisError> {
    check_chebotarev_conditions_from(t, 0)
}

/// As [`check_chebotarev_conditions`], based at endpoint number `base`.
pub fn check_chebotarev_conditions_from(t: &ComplexPoly, base: usize) -> Result<ConditionReport, AnalysisError> {
    if !is_connected(t, default_tolerance(t))?.connected {
        return Err(AnalysisError::NotConnected);
    }
    let f = factorize(t)?;
    let (cset, dset) = endpoint_sets(&f)?;
    let &base_point = cset.get(base).ok_or(AnalysisError::BaseIndex { index: base, count: cset.len() })?;
    let integrand = f.integrand();
    let margin = path_margin(&integrand);
    let mut points = Vec::with_capacity(cset.len() + dset.len());
    let targets = cset
        .iter()
        .map(|&p| (PointKind::C, p))
        .chain(dset.iter().map(|&p| (PointKind::D, p)));
    for (kind, p) in targets {
        let (re_phi, error_estimate) = if (p - base_point).norm() == 0.0 {
            (0.0, 0.0)
        } else {
            let path = clear_path(&integrand, base_point, p, margin)?;
            let v = hyperelliptic_phi(&integrand, &path)?;
            (v.value.re, v.error_estimate)
        };
        points.push(ConditionPoint {
            kind,
            point: p,
            re_phi,
            error_estimate,
            pass: re_phi.abs() < CONDITION_TOL,
        });
    }
    let max_abs_re_phi = points.iter().fold(0.0f64, |m, p| m.max(p.re_phi.abs()));
    let max_error_estimate = points.iter().fold(0.0f64, |m, p| m.max(p.error_estimate));
    Ok(ConditionReport {
        base_point,
        passed: points.iter().all(|p| p.pass),
        points,
        max_abs_re_phi,
        max_error_estimate,
        threshold: CONDITION_TOL,
    })
}
