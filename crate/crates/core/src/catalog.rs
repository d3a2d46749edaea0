//! Ready-made polynomials and problem specifications with known answers.

use num_complex::Complex64;

use crate::poly::ComplexPoly;
use crate::solver::{LinkKind, PointVar, ProblemSpec, Role, SignConfig, SolverOptions, VarRef, VarStatus};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn real(coeffs: &[f64]) -> ComplexPoly {
    ComplexPoly::from_real(coeffs).expect("finite coefficients")
}

/// `z^n`: a star of `2n` rays to the `2n`-th roots of unity.
pub fn star(n: usize) -> ComplexPoly {
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    real(&coeffs)
}

/// `2 (z^2 - 1) / (1 + a^2) + 1`: the cross `[-1, 1] ∪ [-ia, ia]`.
pub fn cross(a: f64) -> ComplexPoly {
    let s = 2.0 / (1.0 + a * a);
    real(&[1.0 - s, 0.0, s])
}

/// `-1 - (z - 1)(2z + 1 - a^2)^2 / (1 + a^2)^2`; connected exactly for `a <= sqrt 3`.
pub fn cubic_family(a: f64) -> ComplexPoly {
    let q = 1.0 - a * a;
    let den = (1.0 + a * a).powi(2);
    let square = real(&[q * q, 4.0 * q, 4.0]);
    let prod = real(&[-1.0, 1.0]).multiply(&square);
    &real(&[-1.0]) - &prod.scale(c(1.0 / den, 0.0))
}

/// `(8z^4 - 8z^2 + 1 + 4a^2) / (1 + 4a^2)`.
pub fn quartic_family(a: f64) -> ComplexPoly {
    let den = 1.0 + 4.0 * a * a;
    real(&[(1.0 + 4.0 * a * a) / den, 0.0, -8.0 / den, 0.0, 8.0 / den])
}

/// Chebyshev polynomial of the first kind.
pub fn chebyshev(n: usize) -> ComplexPoly {
    let mut prev = ComplexPoly::one();
    if n == 0 {
        return prev;
    }
    let x = real(&[0.0, 1.0]);
    let mut cur = x.clone();
    for _ in 1..n {
        let next = &x.scale(c(2.0, 0.0)).multiply(&cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `z^2 - 3`, whose inverse image is two disjoint intervals.
pub fn two_intervals() -> ComplexPoly {
    real(&[-3.0, 0.0, 1.0])
}

fn var(role: Role, index: usize, status: VarStatus) -> PointVar {
    PointVar::new(role, index, status)
}

fn link(role: Role, index: usize, kind: LinkKind, target: (Role, usize)) -> PointVar {
    var(role, index, VarStatus::Linked { kind, target: VarRef::new(target.0, target.1) })
}

/// Rectangle corners `±1 ± i beta` with `beta` free, `d` real and symmetric.
fn rectangle_base(beta0: f64, d0: f64) -> Vec<PointVar> {
    vec![
        var(
            Role::C,
            0,
            VarStatus::FreeLine { base: c(1.0, 0.0), direction: c(0.0, 1.0), initial: Some(beta0) },
        ),
        link(Role::C, 1, LinkKind::Conjugate, (Role::C, 0)),
        link(Role::C, 2, LinkKind::NegateConjugate, (Role::C, 0)),
        link(Role::C, 3, LinkKind::Negate, (Role::C, 0)),
        var(Role::D, 0, VarStatus::FreeReal { initial: Some(d0) }),
        link(Role::D, 1, LinkKind::Negate, (Role::D, 0)),
    ]
}

fn free_real(index: usize, t: f64) -> PointVar {
    var(Role::Z, index, VarStatus::FreeReal { initial: Some(t) })
}

fn build(n: usize, alpha: [i8; 4], gamma: [i8; 2], beta: &[i8], vars: Vec<PointVar>, what: &str) -> ProblemSpec {
    let config = SignConfig::new(4, n, alpha.to_vec(), gamma.to_vec(), beta.to_vec()).expect("balanced signs");
    ProblemSpec::new(config, vars, SolverOptions::default())
        .expect("well-formed rectangle spec")
        .with_description(what)
}

/// Four corners `±1 ± i beta` of a rectangle, degree `n` in `5..=8`, with the
/// symmetric ansatz (`d` real, `d_2 = -d_1`, tangency points on the real axis).
pub fn rectangle(n: usize) -> Option<ProblemSpec> {
    let odd = [1, 1, -1, -1];
    let even = [1, 1, 1, 1];
    let spec = match n {
        5 => build(5, odd, [-1, 1], &[], rectangle_base(0.4, 0.6), "rectangle, degree 5"),
        6 => {
            let mut v = rectangle_base(0.3, 0.8);
            v.push(var(Role::Z, 0, VarStatus::Fixed { value: c(0.0, 0.0) }));
            build(6, even, [-1, -1], &[1], v, "rectangle, degree 6")
        }
        7 => {
            let mut v = rectangle_base(0.2, 0.8);
            v.push(free_real(0, 0.3));
            v.push(link(Role::Z, 1, LinkKind::Negate, (Role::Z, 0)));
            build(7, odd, [-1, 1], &[1, -1], v, "rectangle, degree 7")
        }
        8 => {
            let mut v = rectangle_base(0.15, 0.9);
            v.push(free_real(0, 0.45));
            v.push(free_real(1, 0.05));
            v.push(link(Role::Z, 2, LinkKind::Negate, (Role::Z, 0)));
            build(8, even, [-1, -1], &[1, -1, 1], v, "rectangle, degree 8")
        }
        _ => return None,
    };
    Some(spec)
}

/// The two degree-9 rectangle systems: `1` keeps all tangency points real,
/// `2` places them at `±w, ±conj(w)` off the axis.
pub fn rectangle_degree9(system: u8) -> Option<ProblemSpec> {
    let odd = [1, 1, -1, -1];
    match system {
        1 => {
            let mut v = rectangle_base(0.1, 0.9);
            v.push(free_real(0, 0.55));
            v.push(link(Role::Z, 1, LinkKind::Negate, (Role::Z, 0)));
            v.push(free_real(2, 0.2));
            v.push(link(Role::Z, 3, LinkKind::Negate, (Role::Z, 2)));
            Some(build(9, odd, [-1, 1], &[1, -1, -1, 1], v, "rectangle, degree 9, real tangency points"))
        }
        2 => {
            let mut v = rectangle_base(0.6, 0.55);
            v.push(var(Role::Z, 0, VarStatus::FreeComplex { initial: Some(c(0.9, 0.5)) }));
            v.push(link(Role::Z, 1, LinkKind::Conjugate, (Role::Z, 0)));
            v.push(link(Role::Z, 2, LinkKind::NegateConjugate, (Role::Z, 0)));
            v.push(link(Role::Z, 3, LinkKind::Negate, (Role::Z, 0)));
            Some(build(9, odd, [1, -1], &[-1, -1, 1, 1], v, "rectangle, degree 9, complex tangency points"))
        }
        _ => None,
    }
}
