//! Power-sum systems for prescribed endpoint sets, their least-squares
//! solution, and reconstruction of the polynomial from its two level sets.

mod lm;
mod signs;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::poly::{ComplexPoly, PolyError};

pub use signs::{enumerate_sign_configs, SignConfig, SignError};

/// Minimum pairwise distance between solved points.
pub const DISTINCT_TOL: f64 = 1e-6;
/// Relative tolerance of the `T^2 - 1 = tau^2 prod ...` coefficient check.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Gauss-Newton steps taken after convergence so that multiple level points
/// of `T` are resolved to rounding accuracy.
const POLISH_STEPS: usize = 8;
/// Tolerance of the power-sum precondition in [`reconstruct_from_levels`].
pub const POWER_SUM_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Sign(#[from] SignError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("{0} is declared more than once")]
    DuplicateVar(VarRef),
    #[error("{0} is not declared")]
    MissingVar(VarRef),
    #[error("{0} does not exist for this sign configuration")]
    UnknownVar(VarRef),
    #[error("link chain through {0} is cyclic")]
    LinkCycle(VarRef),
    #[error("free_line direction of {0} is zero")]
    DegenerateLine(VarRef),
    #[error("{unknowns} real unknowns exceed the {max} real equations")]
    TooManyUnknowns { unknowns: usize, max: usize },
    #[error("assignment has length {got}, expected {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("non-finite value in assignment")]
    NonFinite,
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("points {a} and {b} collide (distance {distance:.3e})")]
    DegenerateSolution { a: VarRef, b: VarRef, distance: f64 },
    #[error("every sign is +1; no point on the T = -1 level")]
    NoNegativePoint,
    #[error("T + 1 does not vanish at {point} (|T + 1| = {defect:.3e})")]
    LevelMismatch { point: VarRef, defect: f64 },
    #[error("T^2 - 1 differs from the prescribed factorisation by {residual:.3e} (relative)")]
    IdentityViolation { residual: f64 },
    #[error("power sums of the level sets differ at k = {k} by {defect:.3e}")]
    PowerSumViolation { k: usize, defect: f64 },
    #[error("level sets have lengths {plus} and {minus}")]
    LevelLength { plus: usize, minus: usize },
    #[error("level sets intersect")]
    LevelsIntersect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    C,
    D,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarRef {
    pub role: Role,
    pub index: usize,
}

impl VarRef {
    pub fn new(role: Role, index: usize) -> Self {
        Self { role, index }
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.role {
            Role::C => "c",
            Role::D => "d",
            Role::Z => "z",
        };
        write!(f, "{r}[{}]", self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Conjugate,
    Negate,
    NegateConjugate,
}

impl LinkKind {
    fn apply(self, w: Complex64) -> Complex64 {
        match self {
            LinkKind::Conjugate => w.conj(),
            LinkKind::Negate => -w,
            LinkKind::NegateConjugate => -w.conj(),
        }
    }
}

/// How one point enters the unknown vector.
///
/// `FreeLine` is `base + t * direction` with a single real unknown `t`; it
/// expresses constraints such as `c = 1 + i beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VarStatus {
    Fixed {
        value: Complex64,
    },
    FreeComplex {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<Complex64>,
    },
    FreeReal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<f64>,
    },
    FreeLine {
        base: Complex64,
        direction: Complex64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<f64>,
    },
    Linked {
        kind: LinkKind,
        target: VarRef,
    },
}

impl VarStatus {
    fn unknowns(&self) -> usize {
        match self {
            VarStatus::FreeComplex { .. } => 2,
            VarStatus::FreeReal { .. } | VarStatus::FreeLine { .. } => 1,
            VarStatus::Fixed { .. } | VarStatus::Linked { .. } => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointVar {
    pub role: Role,
    pub index: usize,
    #[serde(flatten)]
    pub status: VarStatus,
}

impl PointVar {
    pub fn new(role: Role, index: usize, status: VarStatus) -> Self {
        Self { role, index, status }
    }

    pub fn var_ref(&self) -> VarRef {
        VarRef::new(self.role, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Initial Levenberg damping.
    pub damping: f64,
    /// Infinity-norm target; `None` means `1e-11 * n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            damping: 1e-3,
            residual_tol: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Fixed(Complex64),
    Complex(usize),
    Real(usize),
    Line { offset: usize, base: Complex64, direction: Complex64 },
    Linked { kind: LinkKind, target: usize },
}

/// A power-sum system together with the parametrisation of its points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemDocument", into = "ProblemDocument")]
pub struct ProblemSpec {
    config: SignConfig,
    vars: Vec<PointVar>,
    options: SolverOptions,
    description: Option<String>,
    slots: Vec<Slot>,
    unknowns: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProblemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    n: usize,
    nu: usize,
    alpha: Vec<i8>,
    gamma: Vec<i8>,
    beta: Vec<i8>,
    vars: Vec<PointVar>,
    #[serde(default)]
    options: SolverOptions,
}

impl TryFrom<ProblemDocument> for ProblemSpec {
    type Error = SolverError;

    fn try_from(doc: ProblemDocument) -> Result<Self, SolverError> {
        let config = SignConfig::new(doc.nu, doc.n, doc.alpha, doc.gamma, doc.beta)?;
        let mut spec = ProblemSpec::new(config, doc.vars, doc.options)?;
        spec.description = doc.description;
        Ok(spec)
    }
}

impl From<ProblemSpec> for ProblemDocument {
    fn from(s: ProblemSpec) -> Self {
        ProblemDocument {
            description: s.description,
            n: s.config.n,
            nu: s.config.nu,
            alpha: s.config.alpha,
            gamma: s.config.gamma,
            beta: s.config.beta,
            vars: s.vars,
            options: s.options,
        }
    }
}

/// Resolved point values, one vector per role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub c: Vec<Complex64>,
    pub d: Vec<Complex64>,
    pub z: Vec<Complex64>,
}

impl PointSet {
    fn flat(&self) -> impl Iterator<Item = (VarRef, Complex64)> + '_ {
        let tag = |role: Role, v: &'_ [Complex64]| {
            v.iter()
                .enumerate()
                .map(move |(i, &w)| (VarRef::new(role, i), w))
                .collect::<Vec<_>>()
        };
        tag(Role::C, &self.c)
            .into_iter()
            .chain(tag(Role::D, &self.d))
            .chain(tag(Role::Z, &self.z))
    }

    /// Closest pair of points, if there are at least two.
    pub fn closest_pair(&self) -> Option<(VarRef, VarRef, f64)> {
        let all: Vec<_> = self.flat().collect();
        let mut best: Option<(VarRef, VarRef, f64)> = None;
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let dist = (all[i].1 - all[j].1).norm();
                if best.is_none_or(|b| dist < b.2) {
                    best = Some((all[i].0, all[j].0, dist));
                }
            }
        }
        best
    }
}

impl ProblemSpec {
    pub fn new(config: SignConfig, vars: Vec<PointVar>, options: SolverOptions) -> Result<Self, SolverError> {
        let counts = [config.nu, config.nu - 2, config.tangency_count()];
        let offset_of = |r: VarRef| -> Option<usize> {
            let block = match r.role {
                Role::C => 0,
                Role::D => 1,
                Role::Z => 2,
            };
            (r.index < counts[block]).then(|| counts[..block].iter().sum::<usize>() + r.index)
        };
        let total: usize = counts.iter().sum();
        let mut by_slot: Vec<Option<&PointVar>> = vec![None; total];
        for v in &vars {
            let slot = offset_of(v.var_ref()).ok_or(SolverError::UnknownVar(v.var_ref()))?;
            if by_slot[slot].is_some() {
                return Err(SolverError::DuplicateVar(v.var_ref()));
            }
            by_slot[slot] = Some(v);
        }
        let mut slots = Vec::with_capacity(total);
        let mut unknowns = 0;
        for v in &by_slot {
            let v = v.ok_or_else(|| SolverError::MissingVar(missing_ref(&by_slot, counts)))?;
            let slot = match &v.status {
                VarStatus::Fixed { value } => Slot::Fixed(*value),
                VarStatus::FreeComplex { .. } => Slot::Complex(unknowns),
                VarStatus::FreeReal { .. } => Slot::Real(unknowns),
                VarStatus::FreeLine { base, direction, .. } => {
                    if direction.norm() == 0.0 || !direction.re.is_finite() || !direction.im.is_finite() {
                        return Err(SolverError::DegenerateLine(v.var_ref()));
                    }
                    Slot::Line { offset: unknowns, base: *base, direction: *direction }
                }
                VarStatus::Linked { kind, target } => Slot::Linked {
                    kind: *kind,
                    target: offset_of(*target).ok_or(SolverError::UnknownVar(*target))?,
                },
            };
            unknowns += v.status.unknowns();
            slots.push(slot);
        }
        // Acyclicity: following links from any slot must terminate.
        for start in 0..total {
            let mut cur = start;
            for _ in 0..=total {
                match slots[cur] {
                    Slot::Linked { target, .. } => cur = target,
                    _ => break,
                }
            }
            if matches!(slots[cur], Slot::Linked { .. }) {
                return Err(SolverError::LinkCycle(by_slot[start].unwrap().var_ref()));
            }
        }
        let max = 2 * (config.n - 1);
        if unknowns > max {
            return Err(SolverError::TooManyUnknowns { unknowns, max });
        }
        let mut vars = vars;
        vars.sort_by_key(|v| v.var_ref());
        Ok(Self { config, vars, options, description: None, slots, unknowns })
    }

    pub fn with_description(mut self, text: impl Into<String>) -> Self {
        self.description = Some(text.into());
        self
    }

    pub fn config(&self) -> &SignConfig {
        &self.config
    }

    pub fn vars(&self) -> &[PointVar] {
        &self.vars
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn set_options(&mut self, options: SolverOptions) {
        self.options = options;
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }

    /// Number of real unknowns.
    pub fn unknown_count(&self) -> usize {
        self.unknowns
    }

    pub fn residual_tol(&self) -> f64 {
        self.options.residual_tol.unwrap_or(1e-11 * self.config.n as f64)
    }

    fn check_assignment(&self, x: &[f64]) -> Result<(), SolverError> {
        if x.len() != self.unknowns {
            return Err(SolverError::AssignmentLength { expected: self.unknowns, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite);
        }
        Ok(())
    }

    fn slot_value(&self, slot: usize, x: &[f64]) -> Complex64 {
        match self.slots[slot] {
            Slot::Fixed(v) => v,
            Slot::Complex(o) => Complex64::new(x[o], x[o + 1]),
            Slot::Real(o) => Complex64::new(x[o], 0.0),
            Slot::Line { offset, base, direction } => base + direction * x[offset],
            Slot::Linked { kind, target } => kind.apply(self.slot_value(target, x)),
        }
    }

    /// Sparse derivative of a point with respect to the real unknowns.
    fn slot_gradient(&self, slot: usize) -> Vec<(usize, Complex64)> {
        match self.slots[slot] {
            Slot::Fixed(_) => Vec::new(),
            Slot::Complex(o) => vec![(o, Complex64::new(1.0, 0.0)), (o + 1, Complex64::new(0.0, 1.0))],
            Slot::Real(o) => vec![(o, Complex64::new(1.0, 0.0))],
            Slot::Line { offset, direction, .. } => vec![(offset, direction)],
            Slot::Linked { kind, target } => self
                .slot_gradient(target)
                .into_iter()
                .map(|(o, g)| (o, kind.apply(g)))
                .collect(),
        }
    }

    fn weights(&self) -> Vec<f64> {
        let c = &self.config;
        c.alpha
            .iter()
            .map(|&s| s as f64)
            .chain(c.gamma.iter().map(|&s| 3.0 * s as f64))
            .chain(c.beta.iter().map(|&s| 2.0 * s as f64))
            .collect()
    }

    fn signs(&self) -> Vec<i8> {
        let c = &self.config;
        c.alpha.iter().chain(&c.gamma).chain(&c.beta).copied().collect()
    }

    fn slot_ref(&self, slot: usize) -> VarRef {
        let nu = self.config.nu;
        if slot < nu {
            VarRef::new(Role::C, slot)
        } else if slot < 2 * nu - 2 {
            VarRef::new(Role::D, slot - nu)
        } else {
            VarRef::new(Role::Z, slot - (2 * nu - 2))
        }
    }

    /// Point values for an assignment of the unknowns.
    pub fn resolve(&self, x: &[f64]) -> Result<PointSet, SolverError> {
        self.check_assignment(x)?;
        Ok(self.resolve_unchecked(x))
    }

    fn resolve_unchecked(&self, x: &[f64]) -> PointSet {
        let all: Vec<Complex64> = (0..self.slots.len()).map(|s| self.slot_value(s, x)).collect();
        let nu = self.config.nu;
        PointSet {
            c: all[..nu].to_vec(),
            d: all[nu..2 * nu - 2].to_vec(),
            z: all[2 * nu - 2..].to_vec(),
        }
    }

    /// Starting assignment from the declared `initial` values, falling back to
    /// `d` at the centroid of the `c`s and `z` spread evenly between the two
    /// most distant `c`s.
    pub fn initial_guess(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.unknowns];
        let mut pending = Vec::new();
        for v in &self.vars {
            let slot = self.slot_index(v.var_ref());
            match (&v.status, self.slots[slot]) {
                (VarStatus::FreeComplex { initial: Some(w) }, Slot::Complex(o)) => {
                    x[o] = w.re;
                    x[o + 1] = w.im;
                }
                (VarStatus::FreeReal { initial: Some(t) }, Slot::Real(o)) => x[o] = *t,
                (VarStatus::FreeLine { initial: Some(t), .. }, Slot::Line { offset, .. }) => x[offset] = *t,
                (VarStatus::Fixed { .. } | VarStatus::Linked { .. }, _) => {}
                _ => pending.push(slot),
            }
        }
        if pending.is_empty() {
            return x;
        }
        let cs = self.resolve_unchecked(&x).c;
        let centroid = cs.iter().sum::<Complex64>() / cs.len() as f64;
        let (mut a, mut b) = (cs[0], cs[0]);
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                if (cs[i] - cs[j]).norm() > (a - b).norm() {
                    (a, b) = (cs[i], cs[j]);
                }
            }
        }
        let m = self.config.tangency_count();
        for slot in pending {
            let r = self.slot_ref(slot);
            let target = match r.role {
                Role::C => centroid,
                Role::D => centroid,
                Role::Z => a + (b - a) * ((r.index + 1) as f64 / (m + 1) as f64),
            };
            match self.slots[slot] {
                Slot::Complex(o) => {
                    x[o] = target.re;
                    x[o + 1] = target.im;
                }
                Slot::Real(o) => x[o] = target.re,
                Slot::Line { offset, base, direction } => {
                    x[offset] = ((target - base) * direction.conj()).re / direction.norm_sqr();
                }
                _ => {}
            }
        }
        x
    }

    fn slot_index(&self, r: VarRef) -> usize {
        let nu = self.config.nu;
        match r.role {
            Role::C => r.index,
            Role::D => nu + r.index,
            Role::Z => 2 * nu - 2 + r.index,
        }
    }

    /// Real and imaginary parts of the weighted power sums for `k = 1..n-1`,
    /// interleaved `[Re S_1, Im S_1, Re S_2, ...]`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>, SolverError> {
        self.check_assignment(x)?;
        Ok(self.residual_unchecked(x))
    }

    fn residual_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let n = self.config.n;
        let weights = self.weights();
        let mut sums = vec![Complex64::new(0.0, 0.0); n - 1];
        for (slot, w) in weights.iter().enumerate() {
            let p = self.slot_value(slot, x);
            let mut pk = p;
            for s in sums.iter_mut() {
                *s += pk * w;
                pk *= p;
            }
        }
        sums.iter().flat_map(|s| [s.re, s.im]).collect()
    }

    /// Analytic Jacobian of [`residual`](Self::residual), rows in the same order.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, SolverError> {
        self.check_assignment(x)?;
        Ok(self.jacobian_unchecked(x))
    }

    fn jacobian_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.config.n;
        let mut jm = DMatrix::zeros(2 * (n - 1), self.unknowns);
        for (slot, w) in self.weights().iter().enumerate() {
            let grad = self.slot_gradient(slot);
            if grad.is_empty() {
                continue;
            }
            let p = self.slot_value(slot, x);
            // d(p^k)/dx = k p^(k-1) dp/dx
            let mut pk1 = Complex64::new(1.0, 0.0);
            for k in 1..n {
                let coef = pk1 * (k as f64 * w);
                for &(o, g) in &grad {
                    let v = coef * g;
                    jm[(2 * (k - 1), o)] += v.re;
                    jm[(2 * (k - 1) + 1, o)] += v.im;
                }
                pk1 *= p;
            }
        }
        jm
    }

    /// Sign of each point, in `c, d, z` order matching [`PointSet`].
    fn negative_points(&self, points: &PointSet) -> Vec<(VarRef, Complex64)> {
        let signs = self.signs();
        points
            .flat()
            .zip(signs)
            .filter(|(_, s)| *s < 0)
            .map(|(p, _)| p)
            .collect()
    }
}

fn missing_ref(by_slot: &[Option<&PointVar>], counts: [usize; 3]) -> VarRef {
    let slot = by_slot.iter().position(|v| v.is_none()).unwrap_or(0);
    if slot < counts[0] {
        VarRef::new(Role::C, slot)
    } else if slot < counts[0] + counts[1] {
        VarRef::new(Role::D, slot - counts[0])
    } else {
        VarRef::new(Role::Z, slot - counts[0] - counts[1])
    }
}

/// A solved system with its polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub config: SignConfig,
    pub points: PointSet,
    pub tau: Complex64,
    /// Coefficients of `T`, ascending.
    #[serde(rename = "coefficients")]
    pub t: ComplexPoly,
    pub residual_inf_norm: f64,
    pub capacity: f64,
    pub iterations: usize,
    pub assignment: Vec<f64>,
    /// Relative coefficient defect of `T^2 - 1 = tau^2 prod (z-c)(z-d)^3(z-z)^2`.
    pub identity_residual: f64,
}

/// Solve the system from `initial`, then build and check `T`.
pub fn solve(spec: &ProblemSpec, initial: &[f64]) -> Result<Solution, SolverError> {
    spec.check_assignment(initial)?;
    let tol = spec.residual_tol();
    let out = lm::minimize(
        initial,
        |x| spec.residual_unchecked(x),
        |x| spec.jacobian_unchecked(x),
        lm::LmSettings {
            max_iter: spec.options.max_iter,
            residual_tol: tol,
            lambda0: spec.options.damping,
            polish_steps: POLISH_STEPS,
        },
    );
    if !out.converged {
        return Err(SolverError::NoConvergence { iterations: out.iterations, residual: out.residual_inf });
    }
    let points = spec.resolve_unchecked(&out.x);
    if let Some((a, b, distance)) = points.closest_pair() {
        if distance <= DISTINCT_TOL {
            return Err(SolverError::DegenerateSolution { a, b, distance });
        }
    }
    let (t, tau) = build_polynomial(spec, &points)?;
    let identity_residual = identity_defect(&t, tau, &points)?;
    if identity_residual > IDENTITY_TOL {
        return Err(SolverError::IdentityViolation { residual: identity_residual });
    }
    Ok(Solution {
        config: spec.config.clone(),
        capacity: analysis::capacity(&t)?,
        points,
        tau,
        t,
        residual_inf_norm: out.residual_inf,
        iterations: out.iterations,
        assignment: out.x,
        identity_residual,
    })
}

/// `T = 1 + tau prod_{+} (z - c)(z - d)^3 (z - z)^2`, with `tau` chosen so that
/// `T = -1` at the first negative-sign point; `T + 1` is then checked at every
/// negative-sign point.
pub fn build_polynomial(spec: &ProblemSpec, points: &PointSet) -> Result<(ComplexPoly, Complex64), SolverError> {
    let signs = spec.signs();
    let mult = |slot: usize| match spec.slot_ref(slot).role {
        Role::C => 1,
        Role::D => 3,
        Role::Z => 2,
    };
    let mut plus_roots = Vec::with_capacity(spec.config.n);
    for (slot, (_, p)) in points.flat().enumerate() {
        if signs[slot] > 0 {
            plus_roots.extend(std::iter::repeat_n(p, mult(slot)));
        }
    }
    let negatives = spec.negative_points(points);
    let &(_, zminus) = negatives.first().ok_or(SolverError::NoNegativePoint)?;
    let plus = ComplexPoly::from_roots(&plus_roots, Complex64::new(1.0, 0.0))?;
    let tau = -2.0 / plus.eval(zminus);
    let t = &plus.scale(tau) + &ComplexPoly::one();
    for (r, p) in negatives {
        let defect = (t.eval(p) + 1.0).norm();
        if defect > 1e-8 * t.eval_abs_bound(p).max(1.0) {
            return Err(SolverError::LevelMismatch { point: r, defect });
        }
    }
    Ok((t, tau))
}

fn identity_defect(t: &ComplexPoly, tau: Complex64, points: &PointSet) -> Result<f64, PolyError> {
    let mut roots = points.c.clone();
    for d in &points.d {
        roots.extend([*d; 3]);
    }
    for z in &points.z {
        roots.extend([*z; 2]);
    }
    let rhs = ComplexPoly::from_roots(&roots, tau * tau)?;
    let lhs = &t.multiply(t) - &ComplexPoly::one();
    Ok(lhs.max_coeff_diff(&rhs) / lhs.max_coeff_abs().max(f64::MIN_POSITIVE))
}

/// The polynomial with `T - 1 = tau prod (z - z_plus)` and
/// `T + 1 = tau prod (z - z_minus)`, given two equal-length multisets whose
/// power sums agree for `k = 1..n-1`.
pub fn reconstruct_from_levels(
    z_plus: &[Complex64],
    z_minus: &[Complex64],
) -> Result<(ComplexPoly, Complex64), SolverError> {
    let n = z_plus.len();
    if n == 0 || z_minus.len() != n {
        return Err(SolverError::LevelLength { plus: n, minus: z_minus.len() });
    }
    let scale = z_plus.iter().chain(z_minus).fold(1.0f64, |m, z| m.max(z.norm()));
    for a in z_plus {
        if z_minus.iter().any(|b| (a - b).norm() <= 1e-12 * scale) {
            return Err(SolverError::LevelsIntersect);
        }
    }
    for k in 1..n {
        let sum = |v: &[Complex64]| v.iter().map(|z| z.powu(k as u32)).sum::<Complex64>();
        let mag = |v: &[Complex64]| v.iter().map(|z| z.norm().powi(k as i32)).sum::<f64>();
        let defect = (sum(z_plus) - sum(z_minus)).norm();
        if defect > POWER_SUM_TOL * (mag(z_plus) + mag(z_minus)).max(1.0) {
            return Err(SolverError::PowerSumViolation { k, defect });
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let plus = ComplexPoly::from_roots(z_plus, one)?;
    let tau = -2.0 / plus.eval(z_minus[0]);
    let t_minus_1 = plus.scale(tau);
    let t_plus_1 = ComplexPoly::from_roots(z_minus, tau)?;
    let gap = &(&t_plus_1 - &t_minus_1) - &ComplexPoly::constant(Complex64::new(2.0, 0.0));
    let bound = t_plus_1.max_coeff_abs().max(1.0);
    if gap.max_coeff_abs() > 1e-8 * bound {
        return Err(SolverError::PowerSumViolation { k: 0, defect: gap.max_coeff_abs() });
    }
    Ok((&t_minus_1 + &ComplexPoly::one(), tau))
}

/// Power-sum defect `max_k |sum (z+)^k - sum (z-)^k|` for `k = 1..n-1` over
/// the roots (with multiplicity) of `T - 1` and `T + 1`.
pub fn level_power_sum_defect(t: &ComplexPoly) -> Result<f64, PolyError> {
    let one = ComplexPoly::one();
    let plus = expand_clusters(&(t - &one))?;
    let minus = expand_clusters(&(t + &one))?;
    let mut worst = 0.0f64;
    for k in 1..t.degree() {
        let s = |v: &[Complex64]| v.iter().map(|z| z.powu(k as u32)).sum::<Complex64>();
        worst = worst.max((s(&plus) - s(&minus)).norm());
    }
    Ok(worst)
}

fn expand_clusters(p: &ComplexPoly) -> Result<Vec<Complex64>, PolyError> {
    Ok(p.root_clusters()?
        .into_iter()
        .flat_map(|c| std::iter::repeat_n(c.center, c.multiplicity))
        .collect())
}

/// Solve from the declared initial guess and `count - 1` random perturbations
/// of it (uniform in `[-spread, spread]` per unknown), in parallel.
///
/// Distinct converged solutions are returned in order of increasing capacity.
pub fn solve_sweep(spec: &ProblemSpec, count: usize, seed: u64, spread: f64) -> Vec<Solution> {
    let base = spec.initial_guess();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..count.max(1))
        .map(|i| {
            if i == 0 {
                base.clone()
            } else {
                base.iter().map(|v| v + rng.gen_range(-spread..=spread)).collect()
            }
        })
        .collect();
    let found: Vec<Solution> = starts.par_iter().filter_map(|x0| solve(spec, x0).ok()).collect();
    let mut unique: Vec<Solution> = Vec::new();
    for s in found {
        if !unique.iter().any(|u| same_points(&u.points, &s.points)) {
            unique.push(s);
        }
    }
    unique.sort_by(|a, b| a.capacity.total_cmp(&b.capacity));
    unique
}

fn same_points(a: &PointSet, b: &PointSet) -> bool {
    a.flat().zip(b.flat()).all(|((_, x), (_, y))| (x - y).norm() < DISTINCT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn beta5() -> f64 {
        5f64.sqrt() / (3.0 * 3f64.sqrt())
    }

    #[test]
    fn residual_vanishes_at_known_rectangle_solution() {
        let spec = catalog::rectangle(5).unwrap();
        let r = spec.residual(&[beta5(), 2.0 / 3.0]).unwrap();
        assert_eq!(r.len(), 8);
        assert!(r.iter().all(|v| v.abs() < 1e-12), "{r:?}");
    }

    #[test]
    fn residual_first_power_sum_by_hand() {
        // k = 1: (1+ib) + (1-ib) - (-1+ib) - (-1-ib) - 3d + 3(-d) = 4 - 6d.
        let spec = catalog::rectangle(5).unwrap();
        let r = spec.residual(&[0.4, 0.6]).unwrap();
        assert!((r[0] - 0.4).abs() < 1e-14);
        assert!(r[1].abs() < 1e-14);
    }

    #[test]
    fn all_points_at_origin_give_zero_residual() {
        let config = SignConfig::new(4, 5, vec![1, 1, -1, -1], vec![-1, 1], vec![]).unwrap();
        let zero = VarStatus::Fixed { value: c(0.0, 0.0) };
        let vars = (0..4)
            .map(|i| PointVar::new(Role::C, i, zero.clone()))
            .chain((0..2).map(|i| PointVar::new(Role::D, i, zero.clone())))
            .collect();
        let spec = ProblemSpec::new(config, vars, SolverOptions::default()).unwrap();
        let r = spec.residual(&[]).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
        assert!(spec.resolve(&[]).unwrap().closest_pair().unwrap().2 < DISTINCT_TOL);
    }

    fn fd_jacobian(spec: &ProblemSpec, x: &[f64]) -> DMatrix<f64> {
        let rows = 2 * (spec.config().n - 1);
        let mut jm = DMatrix::zeros(rows, x.len());
        for j in 0..x.len() {
            let h = 1e-6 * (1.0 + x[j].abs());
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let rp = spec.residual(&xp).unwrap();
            let rm = spec.residual(&xm).unwrap();
            for i in 0..rows {
                jm[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        jm
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let specs: Vec<ProblemSpec> = (5..=8)
            .filter_map(catalog::rectangle)
            .chain([1, 2].into_iter().filter_map(catalog::rectangle_degree9))
            .collect();
        let mut checked = 0;
        while checked < 20 {
            let spec = &specs[checked % specs.len()];
            let x: Vec<f64> = (0..spec.unknown_count()).map(|_| rng.gen_range(-1.2..1.2)).collect();
            let analytic = spec.jacobian(&x).unwrap();
            let numeric = fd_jacobian(spec, &x);
            let scale = numeric.amax().max(1.0);
            let err = (&analytic - &numeric).amax() / scale;
            assert!(err < 1e-6, "spec {checked}: relative error {err}");
            checked += 1;
        }
    }

    #[test]
    fn single_free_real_point_monomial_row() {
        // c0 free real with alpha = +1, everything else fixed.
        let config = SignConfig::new(3, 3, vec![1, 1, 1], vec![-1], vec![]).unwrap();
        let vars = vec![
            PointVar::new(Role::C, 0, VarStatus::FreeReal { initial: None }),
            PointVar::new(Role::C, 1, VarStatus::Fixed { value: c(2.0, 0.0) }),
            PointVar::new(Role::C, 2, VarStatus::Fixed { value: c(0.0, 2.0) }),
            PointVar::new(Role::D, 0, VarStatus::Fixed { value: c(1.0, 1.0) }),
        ];
        let spec = ProblemSpec::new(config, vars, SolverOptions::default()).unwrap();
        let x = 0.7;
        let jm = spec.jacobian(&[x]).unwrap();
        for k in 1..3 {
            assert!((jm[(2 * (k - 1), 0)] - k as f64 * x.powi(k as i32 - 1)).abs() < 1e-14);
            assert_eq!(jm[(2 * (k - 1) + 1, 0)], 0.0);
        }
    }

    #[test]
    fn spec_validation() {
        let config = SignConfig::new(4, 5, vec![1, 1, -1, -1], vec![-1, 1], vec![]).unwrap();
        let base = catalog::rectangle(5).unwrap().vars().to_vec();

        let mut dup = base.clone();
        dup.push(base[0].clone());
        assert!(matches!(
            ProblemSpec::new(config.clone(), dup, SolverOptions::default()),
            Err(SolverError::DuplicateVar(_))
        ));

        let missing = base[1..].to_vec();
        assert_eq!(
            ProblemSpec::new(config.clone(), missing, SolverOptions::default()),
            Err(SolverError::MissingVar(VarRef::new(Role::C, 0)))
        );

        let mut cyclic = base.clone();
        cyclic[0] = PointVar::new(
            Role::C,
            0,
            VarStatus::Linked { kind: LinkKind::Negate, target: VarRef::new(Role::C, 3) },
        );
        assert!(matches!(
            ProblemSpec::new(config.clone(), cyclic, SolverOptions::default()),
            Err(SolverError::LinkCycle(_))
        ));

        let mut extra = base.clone();
        extra.push(PointVar::new(Role::Z, 0, VarStatus::FreeReal { initial: None }));
        assert_eq!(
            ProblemSpec::new(config.clone(), extra, SolverOptions::default()),
            Err(SolverError::UnknownVar(VarRef::new(Role::Z, 0)))
        );

        let free: Vec<PointVar> = (0..4)
            .map(|i| PointVar::new(Role::C, i, VarStatus::FreeComplex { initial: None }))
            .chain((0..2).map(|i| PointVar::new(Role::D, i, VarStatus::FreeComplex { initial: None })))
            .collect();
        assert_eq!(
            ProblemSpec::new(config, free, SolverOptions::default()),
            Err(SolverError::TooManyUnknowns { unknowns: 12, max: 8 })
        );

        let spec = catalog::rectangle(5).unwrap();
        assert_eq!(spec.residual(&[1.0]), Err(SolverError::AssignmentLength { expected: 2, got: 1 }));
        assert_eq!(spec.residual(&[f64::NAN, 1.0]), Err(SolverError::NonFinite));
    }

    #[test]
    fn json_round_trip() {
        let spec = catalog::rectangle_degree9(2).unwrap();
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back: ProblemSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert!(text.contains("\"status\": \"negate_conjugate\"") || text.contains("\"kind\": \"negate_conjugate\""));
    }

    #[test]
    fn json_rejects_unbalanced_signs() {
        let doc = r#"{"n":5,"nu":4,"alpha":[1,1,1,-1],"gamma":[-1,1],"beta":[],"vars":[]}"#;
        assert!(serde_json::from_str::<ProblemSpec>(doc).is_err());
    }

    #[test]
    fn initial_guess_heuristic() {
        // Free d and z without initial values: d at the centroid of the c's,
        // z evenly spaced between the two farthest c's.
        let config = SignConfig::new(3, 4, vec![1, 1, -1], vec![-1], vec![1]).unwrap();
        let vars = vec![
            PointVar::new(Role::C, 0, VarStatus::Fixed { value: c(-1.0, 0.0) }),
            PointVar::new(Role::C, 1, VarStatus::Fixed { value: c(1.0, 0.0) }),
            PointVar::new(Role::C, 2, VarStatus::Fixed { value: c(0.0, 0.3) }),
            PointVar::new(Role::D, 0, VarStatus::FreeComplex { initial: None }),
            PointVar::new(Role::Z, 0, VarStatus::FreeComplex { initial: None }),
        ];
        let spec = ProblemSpec::new(config, vars, SolverOptions::default()).unwrap();
        let x = spec.initial_guess();
        assert!((x[0] - 0.0).abs() < 1e-15 && (x[1] - 0.1).abs() < 1e-15);
        assert!(x[2].abs() < 1e-15 && x[3].abs() < 1e-15);
    }

    #[test]
    fn build_polynomial_three_star() {
        // Cube roots of unity on T = 1, triple point 0 on T = -1: T = 2 z^3 - 1.
        let config = SignConfig::new(3, 3, vec![1, 1, 1], vec![-1], vec![]).unwrap();
        let w = c(-0.5, 3f64.sqrt() / 2.0);
        let vars = vec![
            PointVar::new(Role::C, 0, VarStatus::Fixed { value: c(1.0, 0.0) }),
            PointVar::new(Role::C, 1, VarStatus::Fixed { value: w }),
            PointVar::new(Role::C, 2, VarStatus::Fixed { value: w.conj() }),
            PointVar::new(Role::D, 0, VarStatus::Fixed { value: c(0.0, 0.0) }),
        ];
        let spec = ProblemSpec::new(config, vars, SolverOptions::default()).unwrap();
        let points = spec.resolve(&[]).unwrap();
        let (t, tau) = build_polynomial(&spec, &points).unwrap();
        assert!((tau - c(2.0, 0.0)).norm() < 1e-14);
        assert!(t.max_coeff_diff(&ComplexPoly::from_real(&[-1.0, 0.0, 0.0, 2.0]).unwrap()) < 1e-14);
    }

    #[test]
    fn cross_from_level_sets() {
        // The cross with a = 1 has degree 2 < 2 nu - 3, outside the sign-system
        // domain; its level sets {±1} and {±i} still reconstruct T = z^2.
        let (t, tau) = reconstruct_from_levels(&[c(1.0, 0.0), c(-1.0, 0.0)], &[c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        assert!((tau - c(1.0, 0.0)).norm() < 1e-15);
        assert!(t.max_coeff_diff(&catalog::cross(1.0)).abs() < 1e-15);
    }

    #[test]
    fn reconstruct_small_cases() {
        let (t, tau) = reconstruct_from_levels(&[c(1.0, 0.0)], &[c(-1.0, 0.0)]).unwrap();
        assert!((tau - c(1.0, 0.0)).norm() < 1e-15);
        assert!(t.max_coeff_diff(&ComplexPoly::from_real(&[0.0, 1.0]).unwrap()) < 1e-15);

        let (t, tau) = reconstruct_from_levels(&[c(1.0, 0.0), c(-1.0, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((tau - c(2.0, 0.0)).norm() < 1e-15);
        assert!(t.max_coeff_diff(&ComplexPoly::from_real(&[-1.0, 0.0, 2.0]).unwrap()) < 1e-15);
    }

    #[test]
    fn reconstruct_rejects_bad_levels() {
        assert!(matches!(
            reconstruct_from_levels(&[c(1.0, 0.0), c(2.0, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0)]),
            Err(SolverError::PowerSumViolation { k: 1, .. })
        ));
        assert!(matches!(
            reconstruct_from_levels(&[c(1.0, 0.0)], &[c(1.0, 0.0)]),
            Err(SolverError::LevelsIntersect)
        ));
        assert!(matches!(reconstruct_from_levels(&[], &[]), Err(SolverError::LevelLength { .. })));
    }

    #[test]
    fn reconstruct_quartic_family_from_its_level_sets() {
        let t = catalog::quartic_family(2.0);
        let one = ComplexPoly::one();
        let plus = expand_clusters(&(&t - &one)).unwrap();
        let minus = expand_clusters(&(&t + &one)).unwrap();
        let (r, tau) = reconstruct_from_levels(&plus, &minus).unwrap();
        assert!((tau - c(8.0 / 17.0, 0.0)).norm() < 1e-9);
        assert!(r.max_coeff_diff(&t) < 1e-9);
    }
}
