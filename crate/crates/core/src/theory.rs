//! Single systems: states, effects, the unit measure, norms, the maximal
//! effect set, joint measurability and the effect order.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    AffineHalfspace, Certificate, Cone, ConvexBody, DdOptions, Feasibility, GeometryError, Shifted, Sign, Witness,
};
use crate::linalg::{add, dot, fmt_vector, is_zero, sub, zeros, Vector};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TheoryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} is not in the state cone")]
    NotAState(String),
    #[error("{0} is not an effect")]
    NotAnEffect(String),
    #[error("cannot complete measurement: {0}")]
    InvalidCompletion(String),
    #[error("a system needs at least one state")]
    NoStates,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Serialized form of a system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub dim: usize,
    pub states: Vec<Vector>,
    pub effects: Vec<Vector>,
    pub unit: Vector,
}

/// A finite-dimensional system with polyhedral state and effect sets.
///
/// The effect body always contains the zero effect, the unit and the
/// complement `u - e` of every supplied effect.
#[derive(Clone, Debug)]
pub struct GptSystem {
    name: String,
    dim: usize,
    states: ConvexBody,
    state_cone: Cone,
    effects: ConvexBody,
    unit: Vector,
    effect_facets: OnceLock<Vec<AffineHalfspace>>,
}

impl GptSystem {
    pub fn new(name: impl Into<String>, states: &[Vector], effects: &[Vector], unit: Vector) -> Result<Self, TheoryError> {
        let dim = unit.len();
        if states.is_empty() {
            return Err(TheoryError::NoStates);
        }
        for v in states.iter().chain(effects) {
            if v.len() != dim {
                return Err(TheoryError::DimensionMismatch { expected: dim, found: v.len() });
            }
        }
        let mut all = vec![zeros(dim), unit.clone()];
        for e in effects {
            all.push(e.clone());
            all.push(sub(&unit, e));
        }
        let states = ConvexBody::hull(dim, states)?;
        let effects = ConvexBody::hull(dim, &all)?;
        let state_cone = Cone::from_generators(dim, states.vertices())?;
        Ok(GptSystem { name: name.into(), dim, states, state_cone, effects, unit, effect_facets: OnceLock::new() })
    }

    /// Trusts that `states` and `effects` are already the distinct extremal
    /// points and that `effects` is closed under complement and contains the
    /// zero effect and the unit.
    pub fn from_extremal_unchecked(
        name: impl Into<String>,
        states: Vec<Vector>,
        effects: Vec<Vector>,
        unit: Vector,
    ) -> Result<Self, TheoryError> {
        let dim = unit.len();
        if states.is_empty() {
            return Err(TheoryError::NoStates);
        }
        for v in states.iter().chain(&effects) {
            if v.len() != dim {
                return Err(TheoryError::DimensionMismatch { expected: dim, found: v.len() });
            }
        }
        let state_cone = Cone::from_generators(dim, &states)?;
        Ok(GptSystem {
            name: name.into(),
            dim,
            states: ConvexBody::from_vertices_unchecked(dim, states),
            state_cone,
            effects: ConvexBody::from_vertices_unchecked(dim, effects),
            unit,
            effect_facets: OnceLock::new(),
        })
    }

    pub fn from_spec(spec: &SystemSpec) -> Result<Self, TheoryError> {
        if spec.unit.len() != spec.dim {
            return Err(TheoryError::DimensionMismatch { expected: spec.dim, found: spec.unit.len() });
        }
        GptSystem::new(spec.name.clone(), &spec.states, &spec.effects, spec.unit.clone())
    }

    pub fn to_spec(&self) -> SystemSpec {
        SystemSpec {
            name: self.name.clone(),
            dim: self.dim,
            states: self.states.vertices().to_vec(),
            effects: self.effects.vertices().to_vec(),
            unit: self.unit.clone(),
        }
    }

    /// Same states and unit with the effect set replaced.
    pub fn with_effects(&self, effects: &[Vector]) -> Result<Self, TheoryError> {
        GptSystem::new(self.name.clone(), self.states.vertices(), effects, self.unit.clone())
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state_body(&self) -> &ConvexBody {
        &self.states
    }

    pub fn states(&self) -> &[Vector] {
        self.states.vertices()
    }

    pub fn state_cone(&self) -> &Cone {
        &self.state_cone
    }

    pub fn effect_body(&self) -> &ConvexBody {
        &self.effects
    }

    pub fn effects(&self) -> &[Vector] {
        self.effects.vertices()
    }

    pub fn unit(&self) -> &[Scalar] {
        &self.unit
    }

    pub fn zero(&self) -> Vector {
        zeros(self.dim)
    }

    /// Effect vertices other than the zero effect and the unit.
    pub fn nontrivial_effects(&self) -> Vec<Vector> {
        self.effects().iter().filter(|e| !is_zero(e) && e.as_slice() != self.unit()).cloned().collect()
    }

    pub fn pairing(&self, e: &[Scalar], omega: &[Scalar]) -> Scalar {
        dot(e, omega)
    }

    /// Facets of the effect body, computed once.
    pub fn effect_facets(&self) -> Result<&[AffineHalfspace], TheoryError> {
        if let Some(f) = self.effect_facets.get() {
            return Ok(f);
        }
        let facets = self.effects.facets()?;
        Ok(self.effect_facets.get_or_init(|| facets))
    }

    fn check(&self, v: &[Scalar]) -> Result<(), TheoryError> {
        if v.len() == self.dim {
            Ok(())
        } else {
            Err(TheoryError::DimensionMismatch { expected: self.dim, found: v.len() })
        }
    }

    /// Whether `e` is non-negative on every state.
    pub fn in_dual_cone(&self, e: &[Scalar]) -> bool {
        self.states().iter().all(|w| !dot(e, w).is_negative())
    }

    /// Membership in `E^max` without enumerating it.
    pub fn in_emax(&self, e: &[Scalar]) -> bool {
        self.states().iter().all(|w| {
            let p = dot(e, w);
            !p.is_negative() && p <= Scalar::one()
        })
    }
}

/// `u(ω)`.
pub fn state_norm(sys: &GptSystem, omega: &[Scalar]) -> Result<Scalar, TheoryError> {
    sys.check(omega)?;
    if !sys.state_cone.contains(omega)? {
        return Err(TheoryError::NotAState(fmt_vector(omega)));
    }
    Ok(dot(sys.unit(), omega))
}

/// `max_{ω ∈ Ω} e(ω)`.
pub fn effect_norm(sys: &GptSystem, e: &[Scalar]) -> Result<Scalar, TheoryError> {
    sys.check(e)?;
    if !sys.in_dual_cone(e) {
        return Err(TheoryError::NotAnEffect(fmt_vector(e)));
    }
    Ok(sys.states.maximize(e).expect("a system has states").0)
}

/// Halfspaces `e(ω) >= 0` and `(u - e)(ω) >= 0` over the state vertices.
pub fn emax_halfspaces(sys: &GptSystem) -> Vec<AffineHalfspace> {
    let mut hs = Vec::with_capacity(2 * sys.states().len());
    for w in sys.states() {
        hs.push(AffineHalfspace { normal: w.clone(), offset: Scalar::zero() });
        hs.push(AffineHalfspace { normal: w.iter().map(|x| -x).collect(), offset: dot(sys.unit(), w) });
    }
    hs
}

/// Vertices of `E^max = V*_+ ∩ (u - V*_+)` in lexicographic order.
///
/// Fails with a degenerate-input error when the states do not span the space,
/// in which case `E^max` is unbounded.
pub fn compute_emax(sys: &GptSystem) -> Result<ConvexBody, TheoryError> {
    compute_emax_with(sys, &DdOptions::default())
}

pub fn compute_emax_with(sys: &GptSystem, opts: &DdOptions) -> Result<ConvexBody, TheoryError> {
    let body = ConvexBody::from_halfspaces(sys.dim, &emax_halfspaces(sys), opts)?;
    let mut v = body.vertices().to_vec();
    v.sort();
    Ok(ConvexBody::from_vertices_unchecked(sys.dim, v))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoRestriction {
    pub holds: bool,
    /// First vertex of `E^max` (lexicographically) that `E` lacks.
    pub missing: Option<Vector>,
    /// First effect vertex lying outside `E^max`, which makes the system inconsistent.
    pub inconsistent: Option<Vector>,
}

pub fn check_no_restriction(sys: &GptSystem) -> Result<NoRestriction, TheoryError> {
    let emax = compute_emax(sys)?;
    let inconsistent = sys.effects().iter().find(|e| !sys.in_emax(e)).cloned();
    let mut missing = None;
    for v in emax.vertices() {
        if !sys.effects.contains(v)? {
            missing = Some(v.clone());
            break;
        }
    }
    Ok(NoRestriction { holds: missing.is_none() && inconsistent.is_none(), missing, inconsistent })
}

/// The four outcomes of a joint measurement of two binary effects.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BooleanAlgebra {
    pub both: Vector,
    pub first_only: Vector,
    pub second_only: Vector,
    pub neither: Vector,
}

impl BooleanAlgebra {
    pub fn from_and(sys: &GptSystem, ei: &[Scalar], ej: &[Scalar], both: &[Scalar]) -> Self {
        let first_only = sub(ei, both);
        let second_only = sub(ej, both);
        let neither = add(&sub(&sub(sys.unit(), ei), ej), both);
        BooleanAlgebra { both: both.to_vec(), first_only, second_only, neither }
    }

    pub fn outcomes(&self) -> [&Vector; 4] {
        [&self.both, &self.first_only, &self.second_only, &self.neither]
    }

    /// All four outcomes lie in `E`, they sum to `u`, and the marginals are
    /// the original effects.
    pub fn verify(&self, sys: &GptSystem, ei: &[Scalar], ej: &[Scalar]) -> Result<bool, TheoryError> {
        for e in self.outcomes() {
            if !sys.effects.contains(e)? {
                return Ok(false);
            }
        }
        let total = self.outcomes().iter().fold(sys.zero(), |acc, e| add(&acc, e));
        Ok(total == sys.unit()
            && add(&self.both, &self.first_only) == ei
            && add(&self.both, &self.second_only) == ej)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointMeasurability {
    pub feasibility: Feasibility,
    pub algebra: Option<BooleanAlgebra>,
}

impl JointMeasurability {
    pub fn is_jointly_measurable(&self) -> bool {
        self.feasibility.is_feasible()
    }
}

fn joint_sets<'a>(sys: &'a GptSystem, shifts: &'a [Vector; 4]) -> [Shifted<'a>; 4] {
    let body = &sys.effects;
    [
        Shifted { body, shift: &shifts[0], sign: Sign::Plus },
        Shifted { body, shift: &shifts[1], sign: Sign::Minus },
        Shifted { body, shift: &shifts[2], sign: Sign::Minus },
        Shifted { body, shift: &shifts[3], sign: Sign::Plus },
    ]
}

fn joint_shifts(sys: &GptSystem, ei: &[Scalar], ej: &[Scalar]) -> [Vector; 4] {
    [sys.zero(), ei.to_vec(), ej.to_vec(), sub(&add(ei, ej), sys.unit())]
}

/// Decides whether `E ∩ (e_i - E) ∩ (e_j - E) ∩ (e_i + e_j - u + E)` is
/// non-empty. A feasible answer carries the lexicographically smallest
/// `e_{i∧j}` and the verified four-outcome measurement built from it.
pub fn jointly_measurable(sys: &GptSystem, ei: &[Scalar], ej: &[Scalar]) -> Result<JointMeasurability, TheoryError> {
    let lp = joint_program(sys, &joint_halfspaces(sys, ei, ej)?);
    let order: Vec<usize> = (0..sys.dim).collect();
    let feasibility = match lp.lex_min(&order) {
        LpOutcome::Optimal { x, .. } => Feasibility::Feasible(Witness { point: x, weights: Vec::new() }),
        LpOutcome::Infeasible(f) => Feasibility::Infeasible(Certificate::Farkas { multipliers: f.multipliers }),
        LpOutcome::Unbounded { .. } => unreachable!("the effect body is bounded"),
    };
    let algebra = match feasibility.witness() {
        Some(w) => {
            let alg = BooleanAlgebra::from_and(sys, ei, ej, &w.point);
            debug_assert!(alg.verify(sys, ei, ej)?);
            Some(alg)
        }
        None => None,
    };
    Ok(JointMeasurability { feasibility, algebra })
}

/// Halfspaces `n·x + c >= 0` cutting out the four-set intersection, from the
/// facets of `E`: `x ∈ shift + σE` iff `σ(x - shift) ∈ E`.
fn joint_halfspaces(sys: &GptSystem, ei: &[Scalar], ej: &[Scalar]) -> Result<Vec<AffineHalfspace>, TheoryError> {
    sys.check(ei)?;
    sys.check(ej)?;
    let facets = sys.effect_facets()?;
    let shifts = joint_shifts(sys, ei, ej);
    let mut hs = Vec::with_capacity(4 * facets.len());
    for s in joint_sets(sys, &shifts) {
        for f in facets {
            let normal: Vector = match s.sign {
                Sign::Plus => f.normal.clone(),
                Sign::Minus => f.normal.iter().map(|x| -x).collect(),
            };
            let offset = &f.offset - dot(&normal, s.shift);
            hs.push(AffineHalfspace { normal, offset });
        }
    }
    Ok(hs)
}

fn joint_program(sys: &GptSystem, hs: &[AffineHalfspace]) -> LinearProgram {
    let mut lp = LinearProgram::new(sys.dim);
    lp.set_free_range(0..sys.dim);
    for h in hs {
        lp.add(h.normal.clone(), Relation::Ge, -&h.offset);
    }
    lp
}

/// Pairwise joint measurability of `effects` as a symmetric boolean matrix.
/// Decides feasibility only, so no witness is computed.
pub fn joint_measurability_matrix(sys: &GptSystem, effects: &[Vector]) -> Result<Vec<Vec<bool>>, TheoryError> {
    let n = effects.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let decided = pairs
        .par_iter()
        .map(|&(i, j)| {
            let lp = joint_program(sys, &joint_halfspaces(sys, &effects[i], &effects[j])?);
            Ok(lp.feasible().is_feasible())
        })
        .collect::<Result<Vec<bool>, TheoryError>>()?;
    let mut m = vec![vec![true; n]; n];
    for (&(i, j), &ok) in pairs.iter().zip(&decided) {
        m[i][j] = ok;
        m[j][i] = ok;
    }
    Ok(m)
}

/// Every vertex of the region of admissible `e_{i∧j}`; empty when the pair
/// is not jointly measurable.
pub fn joint_measurability_region(sys: &GptSystem, ei: &[Scalar], ej: &[Scalar]) -> Result<ConvexBody, TheoryError> {
    let hs = joint_halfspaces(sys, ei, ej)?;
    match ConvexBody::from_halfspaces(sys.dim, &hs, &DdOptions::default()) {
        Ok(b) => Ok(b),
        Err(GeometryError::DegenerateInput(_)) => Ok(ConvexBody::empty(sys.dim)),
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub effects: Vec<Vector>,
    pub complete: bool,
}

/// Appends the failure effect `u - Σ e_k` when the effects do not already
/// sum to the unit.
pub fn complete_measurement(sys: &GptSystem, effects: &[Vector]) -> Result<Measurement, TheoryError> {
    let mut total = sys.zero();
    for e in effects {
        sys.check(e)?;
        if !sys.effects.contains(e)? {
            return Err(TheoryError::NotAnEffect(fmt_vector(e)));
        }
        total = add(&total, e);
    }
    let mut out = effects.to_vec();
    if total != sys.unit() {
        let failure = sub(sys.unit(), &total);
        if !sys.effects.contains(&failure)? {
            return Err(TheoryError::InvalidCompletion(format!("u - Σe = {} is not in the effect set", fmt_vector(&failure))));
        }
        out.push(failure);
    }
    Ok(Measurement { effects: out, complete: true })
}

/// `e_i <= e_j`, i.e. `e_j - e_i` is non-negative on every state.
pub fn effect_leq(sys: &GptSystem, ei: &[Scalar], ej: &[Scalar]) -> bool {
    sys.in_dual_cone(&sub(ej, ei))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotNormalized { state: Vector, norm: Scalar },
    OutOfRange { effect: Vector, state: Vector, value: Scalar },
    MissingZero,
    MissingUnit,
    MissingComplement { effect: Vector },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NotNormalized { state, norm } => write!(f, "u{} = {norm}, expected 1", fmt_vector(state)),
            Violation::OutOfRange { effect, state, value } => {
                write!(f, "{}{} = {value} outside [0, 1]", fmt_vector(effect), fmt_vector(state))
            }
            Violation::MissingZero => write!(f, "zero effect missing"),
            Violation::MissingUnit => write!(f, "unit missing"),
            Violation::MissingComplement { effect } => write!(f, "complement of {} missing", fmt_vector(effect)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks normalization of every state, `0 <= e(ω) <= 1` on every vertex
/// pair, and that zero, unit and complements are effects.
pub fn validate_system(sys: &GptSystem) -> Result<ValidationReport, TheoryError> {
    let mut violations = Vec::new();
    for w in sys.states() {
        let norm = dot(sys.unit(), w);
        if !norm.is_one() {
            violations.push(Violation::NotNormalized { state: w.clone(), norm });
        }
    }
    for e in sys.effects() {
        for w in sys.states() {
            let value = dot(e, w);
            if value.is_negative() || value > Scalar::one() {
                violations.push(Violation::OutOfRange { effect: e.clone(), state: w.clone(), value });
            }
        }
    }
    if !sys.effects.contains(&sys.zero())? {
        violations.push(Violation::MissingZero);
    }
    if !sys.effects.contains(sys.unit())? {
        violations.push(Violation::MissingUnit);
    }
    for e in sys.effects() {
        if !sys.effects.contains(&sub(sys.unit(), e))? {
            violations.push(Violation::MissingComplement { effect: e.clone() });
        }
    }
    Ok(ValidationReport { violations })
}
