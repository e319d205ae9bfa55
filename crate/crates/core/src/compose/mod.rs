//! Bipartite composition.
//!
//! Joint elements are `n × m` coefficient matrices in the product of the two
//! subsystem bases, so pairing a joint effect with a joint state is the
//! entrywise sum `Σ_ij E_ij W_ij`. Cones over joint elements use the
//! row-major flattening `i * m + j`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Certificate, Cone, ConvexBody, DdOptions, Feasibility, GeometryError, Witness};
use crate::linalg::{dot, neg, Matrix, Vector};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::scalar::Scalar;
use crate::theory::{check_no_restriction, GptSystem, TheoryError};

pub mod qubits;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ComposeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("{side} subsystem is restricted; use the generalized maximal tensor product")]
    RestrictedSubsystem { side: Side },
    #[error("conditioning effect has probability zero")]
    ZeroProbabilityCondition,
    #[error("supplied vectors do not form a basis")]
    SingularBasis,
    #[error("explicit cone rejected: {0}")]
    InvalidExplicitCone(String),
    #[error("vertex enumeration limited to n·m <= {limit}, got {size}")]
    EnumerationLimit { limit: usize, size: usize },
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorRule {
    Min,
    Max,
    #[serde(rename = "genmax")]
    GenMax,
    Explicit,
}

impl std::str::FromStr for TensorRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "min" => Ok(TensorRule::Min),
            "max" => Ok(TensorRule::Max),
            "genmax" => Ok(TensorRule::GenMax),
            "explicit" => Ok(TensorRule::Explicit),
            other => Err(format!("unknown tensor rule {other:?}")),
        }
    }
}

impl std::fmt::Display for TensorRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TensorRule::Min => "min",
            TensorRule::Max => "max",
            TensorRule::GenMax => "genmax",
            TensorRule::Explicit => "explicit",
        })
    }
}

/// Default bound on `n·m` for joint vertex enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 16;

/// Outer product `a bᵀ`.
pub fn product(a: &[Scalar], b: &[Scalar]) -> Matrix {
    Matrix::outer(a, b)
}

/// `Σ_ij E_ij W_ij`.
pub fn joint_eval(effect: &Matrix, state: &Matrix) -> Result<Scalar, ComposeError> {
    if effect.rows() != state.rows() || effect.cols() != state.cols() {
        return Err(ComposeError::DimensionMismatch {
            expected: format!("{}x{}", effect.rows(), effect.cols()),
            found: format!("{}x{}", state.rows(), state.cols()),
        });
    }
    Ok(effect.frobenius(state))
}

fn flat_products(a: &[Vector], b: &[Vector]) -> Vec<Vector> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(Matrix::outer(x, y).into_flat());
        }
    }
    out
}

fn nonzero(v: &[Vector]) -> Vec<Vector> {
    v.iter().filter(|x| x.iter().any(|c| !c.is_zero())).cloned().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestingReport {
    /// Every product of extremal states lies in the joint state cone.
    pub min_included: bool,
    /// Every generator of the joint state cone satisfies the generalized
    /// maximal constraints.
    pub within_genmax: bool,
}

/// Two systems and the cone of joint states allowed between them.
#[derive(Clone, Debug)]
pub struct JointSystem {
    left: GptSystem,
    right: GptSystem,
    rule: TensorRule,
    state_cone: Cone,
    unit: Matrix,
    effect_body: OnceLock<ConvexBody>,
}

impl JointSystem {
    fn build(left: &GptSystem, right: &GptSystem, rule: TensorRule, state_cone: Cone) -> Self {
        JointSystem {
            left: left.clone(),
            right: right.clone(),
            rule,
            state_cone,
            unit: Matrix::outer(left.unit(), right.unit()),
            effect_body: OnceLock::new(),
        }
    }

    pub fn compose(left: &GptSystem, right: &GptSystem, rule: TensorRule) -> Result<Self, ComposeError> {
        match rule {
            TensorRule::Min => Ok(min_tensor(left, right)),
            TensorRule::Max => max_tensor(left, right),
            TensorRule::GenMax => gen_max_tensor(left, right),
            TensorRule::Explicit => Err(ComposeError::InvalidExplicitCone("explicit rule needs a cone".into())),
        }
    }

    pub fn left(&self) -> &GptSystem {
        &self.left
    }

    pub fn right(&self) -> &GptSystem {
        &self.right
    }

    pub fn side(&self, side: Side) -> &GptSystem {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn rule(&self) -> TensorRule {
        self.rule
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.left.dim(), self.right.dim())
    }

    pub fn state_cone(&self) -> &Cone {
        &self.state_cone
    }

    /// `u^A ⊗ u^B`.
    pub fn unit(&self) -> &Matrix {
        &self.unit
    }

    pub fn check_shape(&self, w: &Matrix) -> Result<(), ComposeError> {
        let (n, m) = self.shape();
        if w.rows() != n || w.cols() != m {
            return Err(ComposeError::DimensionMismatch { expected: format!("{n}x{m}"), found: format!("{}x{}", w.rows(), w.cols()) });
        }
        Ok(())
    }

    pub fn contains_state(&self, w: &Matrix) -> Result<bool, ComposeError> {
        self.check_shape(w)?;
        Ok(self.state_cone.contains(w.as_flat())?)
    }

    pub fn norm(&self, w: &Matrix) -> Scalar {
        self.unit.frobenius(w)
    }

    /// Convex hull of products of effect vertices and their complements
    /// `u^A ⊗ u^B - e ⊗ f`.
    pub fn effect_body(&self) -> Result<&ConvexBody, ComposeError> {
        if let Some(b) = self.effect_body.get() {
            return Ok(b);
        }
        let products = flat_products(self.left.effects(), self.right.effects());
        let unit = self.unit.as_flat();
        let mut points = products.clone();
        points.extend(products.iter().map(|p| unit.iter().zip(p).map(|(u, x)| u - x).collect()));
        let (n, m) = self.shape();
        let body = ConvexBody::hull(n * m, &points)?;
        Ok(self.effect_body.get_or_init(|| body))
    }

    /// Normalized extremal joint states, for desk-sized systems only.
    pub fn state_vertices(&self, limit: usize, opts: &DdOptions) -> Result<Vec<Matrix>, ComposeError> {
        let (n, m) = self.shape();
        if n * m > limit {
            return Err(ComposeError::EnumerationLimit { limit, size: n * m });
        }
        let gens = self.state_cone.generators_with(opts)?;
        let irredundant = if self.state_cone.known_halfspaces().is_some() && self.rule != TensorRule::Min {
            gens.to_vec()
        } else {
            Cone::from_generators(n * m, gens)?.irredundant()?.generators()?.to_vec()
        };
        let mut out = Vec::with_capacity(irredundant.len());
        for g in irredundant {
            let w = Matrix::from_flat(n, m, g);
            let norm = self.norm(&w);
            if !norm.is_positive() {
                continue;
            }
            let inv = norm.recip();
            out.push(Matrix::from_flat(n, m, w.as_flat().iter().map(|x| x * &inv).collect()));
        }
        out.sort_by(|a, b| a.as_flat().cmp(b.as_flat()));
        Ok(out)
    }

    /// Checks `min ⊆ cone ⊆ genmax` for this system's state cone.
    pub fn nesting(&self) -> Result<NestingReport, ComposeError> {
        let min = min_tensor(&self.left, &self.right);
        let gen = gen_max_tensor(&self.left, &self.right)?;
        let mut min_included = true;
        for g in min.state_cone.generators()? {
            if !self.state_cone.contains(g)? {
                min_included = false;
                break;
            }
        }
        let within_genmax = gen.state_cone.contains_cone(&self.state_cone)?;
        Ok(NestingReport { min_included, within_genmax })
    }
}

/// Products of extremal states, and products of effects for the effect body.
pub fn min_tensor(left: &GptSystem, right: &GptSystem) -> JointSystem {
    let gens = flat_products(left.states(), right.states());
    let cone = Cone::from_generators(left.dim() * right.dim(), &gens).expect("product dimensions agree");
    JointSystem::build(left, right, TensorRule::Min, cone)
}

fn dual_rays(sys: &GptSystem) -> Result<Vec<Vector>, ComposeError> {
    Ok(sys.state_cone().dual().generators()?.to_vec())
}

/// States non-negative on every product of extremal effects. Both systems
/// must satisfy the no-restriction hypothesis.
pub fn max_tensor(left: &GptSystem, right: &GptSystem) -> Result<JointSystem, ComposeError> {
    for (side, sys) in [(Side::Left, left), (Side::Right, right)] {
        if !check_no_restriction(sys)?.holds {
            return Err(ComposeError::RestrictedSubsystem { side });
        }
    }
    let hs = flat_products(&dual_rays(left)?, &dual_rays(right)?);
    let cone = Cone::from_halfspaces(left.dim() * right.dim(), &hs)?;
    Ok(JointSystem::build(left, right, TensorRule::Max, cone))
}

/// Halfspaces for `(E^A ⊗min V^{B*}_+)* ∩ (V^{A*}_+ ⊗min E^B)*`.
pub fn gen_max_halfspaces(left: &GptSystem, right: &GptSystem) -> Result<Vec<Vector>, ComposeError> {
    let mut hs = flat_products(&nonzero(left.effects()), &dual_rays(right)?);
    hs.extend(flat_products(&dual_rays(left)?, &nonzero(right.effects())));
    Ok(hs)
}

pub fn gen_max_tensor(left: &GptSystem, right: &GptSystem) -> Result<JointSystem, ComposeError> {
    let hs = gen_max_halfspaces(left, right)?;
    let cone = Cone::from_halfspaces(left.dim() * right.dim(), &hs)?;
    Ok(JointSystem::build(left, right, TensorRule::GenMax, cone))
}

/// A user-supplied joint state cone, accepted only if it contains the
/// minimal tensor product, lies inside the generalized maximal one, and
/// yields valid conditional states for every subsystem effect.
pub fn explicit_tensor(left: &GptSystem, right: &GptSystem, cone: Cone) -> Result<JointSystem, ComposeError> {
    let (n, m) = (left.dim(), right.dim());
    if cone.dim() != n * m {
        return Err(ComposeError::DimensionMismatch { expected: format!("{}", n * m), found: format!("{}", cone.dim()) });
    }
    let sys = JointSystem::build(left, right, TensorRule::Explicit, cone);
    let nest = sys.nesting()?;
    if !nest.min_included {
        return Err(ComposeError::InvalidExplicitCone("does not contain the minimal tensor product".into()));
    }
    if !nest.within_genmax {
        return Err(ComposeError::InvalidExplicitCone("exceeds the generalized maximal tensor product".into()));
    }
    for g in sys.state_cone.generators()? {
        let w = Matrix::from_flat(n, m, g.clone());
        for f in right.effects() {
            if !left.state_cone().contains(&w.mul_vec(f))? {
                return Err(ComposeError::InvalidExplicitCone("invalid conditional state on the left".into()));
            }
        }
        for e in left.effects() {
            if !right.state_cone().contains(&w.vec_mul(e))? {
                return Err(ComposeError::InvalidExplicitCone("invalid conditional state on the right".into()));
            }
        }
    }
    Ok(sys)
}

/// Marginal state on `side`: the other side contracted with its unit.
pub fn marginal(sys: &JointSystem, w: &Matrix, side: Side) -> Result<Vector, ComposeError> {
    sys.check_shape(w)?;
    Ok(match side {
        Side::Left => w.mul_vec(sys.right.unit()),
        Side::Right => w.vec_mul(sys.left.unit()),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conditional {
    pub unnormalized: Vector,
    pub normalized: Vector,
    pub probability: Scalar,
}

/// State of the other side given that `effect` was observed on `measured`.
pub fn conditional(sys: &JointSystem, w: &Matrix, effect: &[Scalar], measured: Side) -> Result<Conditional, ComposeError> {
    sys.check_shape(w)?;
    let (unnormalized, probability) = match measured {
        Side::Right => {
            let c = w.mul_vec(effect);
            let p = dot(sys.left.unit(), &c);
            (c, p)
        }
        Side::Left => {
            let c = w.vec_mul(effect);
            let p = dot(sys.right.unit(), &c);
            (c, p)
        }
    };
    if probability.is_zero() {
        return Err(ComposeError::ZeroProbabilityCondition);
    }
    let inv = probability.recip();
    let normalized = unnormalized.iter().map(|x| x * &inv).collect();
    Ok(Conditional { unnormalized, normalized, probability })
}

/// Outcome of a separability test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separability {
    pub feasibility: Feasibility,
    /// Non-zero weights `(λ, i, j)` with `W = Σ λ ω^A_i ⊗ ω^B_j`.
    pub decomposition: Vec<(Scalar, usize, usize)>,
}

impl Separability {
    pub fn is_separable(&self) -> bool {
        self.feasibility.is_feasible()
    }
}

/// Exact membership in the minimal tensor product. A separable state comes
/// with a conic decomposition into products of extremal states; an entangled
/// one with a functional non-negative on all such products and negative on
/// the state.
pub fn is_separable(sys: &JointSystem, w: &Matrix) -> Result<Separability, ComposeError> {
    sys.check_shape(w)?;
    let left = sys.left.states();
    let right = sys.right.states();
    let gens = flat_products(left, right);
    let dim = w.as_flat().len();
    let mut lp = LinearProgram::new(gens.len());
    for d in 0..dim {
        lp.add(gens.iter().map(|g| g[d].clone()).collect(), Relation::Eq, w.as_flat()[d].clone());
    }
    Ok(match lp.feasible() {
        LpOutcome::Optimal { x, .. } => {
            let m = right.len();
            let decomposition = x
                .iter()
                .enumerate()
                .filter(|(_, l)| !l.is_zero())
                .map(|(k, l)| (l.clone(), k / m, k % m))
                .collect();
            Separability {
                feasibility: Feasibility::Feasible(Witness { point: w.as_flat().to_vec(), weights: vec![x] }),
                decomposition,
            }
        }
        LpOutcome::Infeasible(f) => Separability {
            feasibility: Feasibility::Infeasible(Certificate::Separation { normal: neg(&f.multipliers), offset: Scalar::zero() }),
            decomposition: Vec::new(),
        },
        LpOutcome::Unbounded { .. } => unreachable!("feasibility problems have no objective"),
    })
}

/// Coefficients `C` with `W = Σ_ij C_ij a_i ⊗ b_j`.
pub fn product_basis_decomposition(w: &Matrix, basis_a: &[Vector], basis_b: &[Vector]) -> Result<Matrix, ComposeError> {
    if basis_a.len() != w.rows() || basis_b.len() != w.cols() {
        return Err(ComposeError::SingularBasis);
    }
    let a = Matrix::from_columns(basis_a);
    let b = Matrix::from_columns(basis_b);
    if a.rows() != w.rows() || b.rows() != w.cols() {
        return Err(ComposeError::SingularBasis);
    }
    let a_inv = a.inverse().ok_or(ComposeError::SingularBasis)?;
    let bt_inv = b.transpose().inverse().ok_or(ComposeError::SingularBasis)?;
    Ok(a_inv.matmul(w).matmul(&bt_inv))
}

/// `Σ_ij C_ij a_i ⊗ b_j`.
pub fn assemble(coefficients: &Matrix, basis_a: &[Vector], basis_b: &[Vector]) -> Matrix {
    let a = Matrix::from_columns(basis_a);
    let b = Matrix::from_columns(basis_b);
    a.matmul(coefficients).matmul(&b.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ivec;
    use crate::models::{classical, gbit, gbit_effects};
    use crate::scalar::q;

    #[test]
    fn product_pairing_factorizes() {
        let g = gbit();
        let e = gbit_effects();
        let w = product(&g.states()[0], &g.states()[1]);
        let f = product(&e[0], &e[1]);
        let expected = dot(&e[0], &g.states()[0]) * dot(&e[1], &g.states()[1]);
        assert_eq!(joint_eval(&f, &w).unwrap(), expected);
        assert_eq!(expected, Scalar::one());
        let u = product(g.unit(), g.unit());
        assert_eq!(joint_eval(&u, &w).unwrap(), Scalar::one());
    }

    #[test]
    fn classical_min_equals_max() {
        let c = classical(2).unwrap();
        let min = min_tensor(&c, &c);
        let max = max_tensor(&c, &c).unwrap();
        assert!(min.state_cone().same_set(max.state_cone()).unwrap());
        assert!(min.state_cone().same_set(&Cone::orthant(4)).unwrap());
    }

    #[test]
    fn boxworld_has_twenty_four_vertices() {
        let g = gbit();
        let max = max_tensor(&g, &g).unwrap();
        let v = max.state_vertices(DEFAULT_ENUMERATION_LIMIT, &DdOptions::default()).unwrap();
        assert_eq!(v.len(), 24);
        let min = min_tensor(&g, &g);
        let mv = min.state_vertices(DEFAULT_ENUMERATION_LIMIT, &DdOptions::default()).unwrap();
        assert_eq!(mv.len(), 16);
        let entangled: Vec<&Matrix> = v.iter().filter(|w| !is_separable(&min, w).unwrap().is_separable()).collect();
        assert_eq!(entangled.len(), 8);
        let gen = gen_max_tensor(&g, &g).unwrap();
        assert!(gen.state_cone().same_set(max.state_cone()).unwrap());
    }

    #[test]
    fn restricted_max_is_rejected() {
        let g = gbit();
        let r = g.with_effects(&[gbit_effects()[0].clone()]).unwrap();
        let c = classical(2).unwrap();
        assert_eq!(max_tensor(&r, &c).unwrap_err(), ComposeError::RestrictedSubsystem { side: Side::Left });
        assert!(gen_max_tensor(&r, &c).is_ok());
    }

    #[test]
    fn marginals_and_conditionals() {
        let g = gbit();
        let c = classical(2).unwrap();
        let sys = min_tensor(&g, &c);
        let w = product(&g.states()[0], &c.states()[1]);
        assert_eq!(marginal(&sys, &w, Side::Left).unwrap(), g.states()[0]);
        assert_eq!(marginal(&sys, &w, Side::Right).unwrap(), c.states()[1]);
        let cond = conditional(&sys, &w, &ivec(&[0, 1]), Side::Right).unwrap();
        assert_eq!(cond.normalized, g.states()[0]);
        assert_eq!(cond.probability, Scalar::one());
        assert_eq!(conditional(&sys, &w, &ivec(&[1, 0]), Side::Right).unwrap_err(), ComposeError::ZeroProbabilityCondition);
    }

    #[test]
    fn decomposition_round_trip() {
        let g = gbit();
        let basis: Vec<Vector> = g.states()[..3].to_vec();
        let w = product(&g.states()[1], &g.states()[2]);
        let c = product_basis_decomposition(&w, &basis, &basis).unwrap();
        let mut expected = Matrix::zeros(3, 3);
        expected[(1, 2)] = Scalar::one();
        assert_eq!(c, expected);
        assert_eq!(assemble(&c, &basis, &basis), w);
        let singular = vec![ivec(&[1, 0, 1]), ivec(&[2, 0, 2]), ivec(&[0, 1, 1])];
        assert_eq!(product_basis_decomposition(&w, &singular, &basis).unwrap_err(), ComposeError::SingularBasis);
    }

    #[test]
    fn uniform_mixture_is_separable() {
        let g = gbit();
        let sys = min_tensor(&g, &g);
        let mut w = Matrix::zeros(3, 3);
        for a in g.states() {
            for b in g.states() {
                let p = product(a, b);
                for i in 0..3 {
                    for j in 0..3 {
                        w[(i, j)] += &p[(i, j)] * &q(1, 16);
                    }
                }
            }
        }
        let s = is_separable(&sys, &w).unwrap();
        assert!(s.is_separable());
        let total: Scalar = s.decomposition.iter().map(|(l, _, _)| l.clone()).sum();
        assert_eq!(total, Scalar::one());
    }
}
