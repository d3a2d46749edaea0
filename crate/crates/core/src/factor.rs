//! The unique splitting `T^2 - 1 = H * U^2` of a polynomial `T`, with `H`
//! monic and square-free, and the companion `R` satisfying `T' = n R U`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::quadrature::{self, HyperellipticIntegrand, QuadraturePath, QuadratureError};
use crate::poly::{ComplexPoly, PolyError};

/// Relative tolerance for the identities `T^2 - 1 = H U^2` and `T' = n R U`.
pub const FACTOR_TOL: f64 = 1e-9;
/// Minimum distance a cosh-verification path keeps from branch points.
pub const PATH_MARGIN: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("inconsistent factorization: {check} residual {residual:.3e}")]
    InconsistentFactorization { check: &'static str, residual: f64 },
    #[error("path passes within {distance:.3e} of branch point {point}")]
    PathTooClose { point: Complex64, distance: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// A zero of `T^2 - 1`: where `T = level` (`+1` or `-1`) with the given
/// multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelZero {
    pub point: Complex64,
    pub multiplicity: usize,
    pub level: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub degree: usize,
    pub ell: usize,
    /// Monic, degree `2 ell`, simple zeros `odd_points`.
    pub h: ComplexPoly,
    /// Degree `n - ell`, leading coefficient `tau`.
    pub u: ComplexPoly,
    /// Monic, degree `ell - 1`.
    pub r: ComplexPoly,
    /// Zeros of `T^2 - 1` of odd multiplicity.
    pub odd_points: Vec<Complex64>,
    /// All zeros of `T^2 - 1` with multiplicities.
    pub zeros: Vec<LevelZero>,
    pub tau: Complex64,
}

impl Factorization {
    /// Simple zeros of `T^2 - 1`.
    pub fn simple_zeros(&self) -> Vec<Complex64> {
        self.zeros
            .iter()
            .filter(|z| z.multiplicity == 1)
            .map(|z| z.point)
            .collect()
    }

    /// Zeros of odd multiplicity at least three; they are common zeros of `H`
    /// and `U`.
    pub fn odd_multiple_zeros(&self) -> Vec<Complex64> {
        self.zeros
            .iter()
            .filter(|z| z.multiplicity >= 3 && z.multiplicity % 2 == 1)
            .map(|z| z.point)
            .collect()
    }

    /// `R / sqrt(H)`, the integrand whose primitive gives `T = +-cosh(n Phi)`.
    pub fn integrand(&self) -> HyperellipticIntegrand {
        HyperellipticIntegrand::new(self.r.clone(), self.odd_points.clone(), Complex64::new(1.0, 0.0))
    }
}

/// Splits `T^2 - 1 = H U^2` and recovers `R = T' / (n U)`.
///
/// Multiplicities come from clustering the zeros of `T - 1` and `T + 1`
/// separately (each of degree `n`, better conditioned than `T^2 - 1`).
pub fn factorize(t: &ComplexPoly) -> Result<Factorization, FactorError> {
    let n = t.degree();
    if n == 0 {
        return Err(PolyError::ConstantPolynomial.into());
    }
    let tau = t.leading();
    let one = ComplexPoly::one();

    let mut zeros = Vec::new();
    for (level, shifted) in [(1i8, t - &one), (-1i8, t + &one)] {
        for cl in shifted.root_clusters()? {
            zeros.push(LevelZero {
                point: cl.center,
                multiplicity: cl.multiplicity,
                level,
            });
        }
    }

    let odd_points: Vec<Complex64> = zeros
        .iter()
        .filter(|z| z.multiplicity % 2 == 1)
        .map(|z| z.point)
        .collect();
    let half_roots: Vec<Complex64> = zeros
        .iter()
        .flat_map(|z| std::iter::repeat_n(z.point, z.multiplicity / 2))
        .collect();
    let ell = odd_points.len() / 2;
    if !odd_points.len().is_multiple_of(2) || ell == 0 || ell > n {
        return Err(FactorError::InconsistentFactorization {
            check: "number of odd-multiplicity zeros",
            residual: odd_points.len() as f64,
        });
    }

    let h = ComplexPoly::from_roots(&odd_points, Complex64::new(1.0, 0.0))?;
    let u = ComplexPoly::from_roots(&half_roots, tau)?;
    let dt = t.derivative();
    let nu = u.scale(Complex64::new(n as f64, 0.0));
    let r = dt
        .divide_exact(&nu, 1e-7)
        .map_err(|e| match e {
            PolyError::RemainderTooLarge { remainder, .. } => FactorError::InconsistentFactorization {
                check: "T' divisible by n U",
                residual: remainder,
            },
            other => other.into(),
        })?;

    let tt = &t.multiply(t) - &one;
    let hu2 = h.multiply(&u.multiply(&u));
    let res = tt.max_coeff_diff(&hu2);
    if res >= FACTOR_TOL * (1.0 + tt.max_coeff_abs()) {
        return Err(FactorError::InconsistentFactorization {
            check: "T^2 - 1 = H U^2",
            residual: res,
        });
    }
    let res = dt.max_coeff_diff(&r.multiply(&nu));
    if res >= FACTOR_TOL * (1.0 + dt.max_coeff_abs()) {
        return Err(FactorError::InconsistentFactorization {
            check: "T' = n R U",
            residual: res,
        });
    }
    if r.degree() + 1 != ell || (r.leading() - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(FactorError::InconsistentFactorization {
            check: "R monic of degree ell - 1",
            residual: (r.leading() - Complex64::new(1.0, 0.0)).norm(),
        });
    }
    // Bookkeeping cross-check: a zero of multiplicity k >= 3 is a zero of R of
    // order (k - 1) - floor(k / 2).
    let r_scale = 1.0 + r.max_coeff_abs();
    for z in &zeros {
        let order = (z.multiplicity - 1) - z.multiplicity / 2;
        if order >= 1 {
            let v = r.eval(z.point).norm();
            if v > 1e-6 * r_scale * (1.0 + z.point.norm()).powi(r.degree() as i32) {
                return Err(FactorError::InconsistentFactorization {
                    check: "R vanishes at multiple zeros",
                    residual: v,
                });
            }
        }
    }

    Ok(Factorization {
        degree: n,
        ell,
        h,
        u,
        r,
        odd_points,
        zeros,
        tau,
    })
}

/// `min over sign |+-cosh(n Phi(z)) - T(z)|` with `Phi` integrated along
/// `path`, which must start at a zero of `H` and end at `z`.
pub fn verify_cosh(t: &ComplexPoly, f: &Factorization, z: Complex64, path: &[Complex64]) -> Result<f64, FactorError> {
    let integrand = f.integrand();
    let mut waypoints = path.to_vec();
    if waypoints.last() != Some(&z) {
        waypoints.push(z);
    }
    let qpath = QuadraturePath::new(waypoints, &integrand)?;
    if !qpath.start_singular {
        return Err(FactorError::InconsistentFactorization {
            check: "path starts at a zero of H",
            residual: f64::NAN,
        });
    }
    let (distance, point) = qpath.clearance(&integrand);
    if distance < PATH_MARGIN {
        return Err(FactorError::PathTooClose {
            point: point.unwrap_or(z),
            distance,
        });
    }
    let phi = quadrature::integrate(&integrand, &qpath, None)?;
    let c = (phi.value * f.degree as f64).cosh();
    let tz = t.eval(z);
    Ok((c - tz).norm().min((c + tz).norm()))
}
