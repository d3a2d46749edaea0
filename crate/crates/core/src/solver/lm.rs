//! Levenberg-Marquardt for small dense least-squares problems.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmSettings {
    pub max_iter: usize,
    pub residual_tol: f64,
    pub lambda0: f64,
    /// Extra steps taken after reaching `residual_tol`, to push the residual
    /// down to rounding level; a rejected step ends them early.
    pub polish_steps: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub x: Vec<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
    pub converged: bool,
}

const LAMBDA_MAX: f64 = 1e16;
const LAMBDA_MIN: f64 = 1e-15;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Minimise `|f(x)|^2`, stopping as soon as `|f(x)|_inf < residual_tol`.
///
/// Marquardt scaling of the damping term; `lambda` shrinks tenfold after an
/// accepted step and grows tenfold after a rejected one.
pub(crate) fn minimize<F, J>(x0: &[f64], f: F, jac: J, s: LmSettings) -> LmOutcome
where
    F: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64]) -> DMatrix<f64>,
{
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let mut lambda = s.lambda0;
    let n = x.len();
    let mut polish = 0;
    for iter in 0..s.max_iter {
        let res = inf_norm(&r);
        if n == 0 || (res < s.residual_tol && polish >= s.polish_steps) {
            return LmOutcome { x, residual_inf: res, iterations: iter, converged: res < s.residual_tol };
        }
        if res < s.residual_tol {
            polish += 1;
        }
        let jm = jac(&x);
        let jt = jm.transpose();
        let a = &jt * &jm;
        let g = &jt * DVector::from_column_slice(&r);
        let diag_floor = 1e-12 * (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)])).max(1e-300);
        let cost = sq_norm(&r);
        let mut accepted = false;
        while lambda <= LAMBDA_MAX {
            let mut damped = a.clone();
            for i in 0..n {
                damped[(i, i)] += lambda * a[(i, i)].max(diag_floor);
            }
            let step = match damped.clone().cholesky() {
                Some(ch) => Some(ch.solve(&(-&g))),
                None => damped.lu().solve(&(-&g)),
            };
            let Some(step) = step else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let r_trial = f(&trial);
            if r_trial.iter().all(|v| v.is_finite()) && sq_norm(&r_trial) < cost {
                x = trial;
                r = r_trial;
                lambda = (lambda / 10.0).max(LAMBDA_MIN);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            let res = inf_norm(&r);
            return LmOutcome { x, residual_inf: res, iterations: iter + 1, converged: res < s.residual_tol };
        }
    }
    let res = inf_norm(&r);
    LmOutcome { x, residual_inf: res, iterations: s.max_iter, converged: res < s.residual_tol }
}
