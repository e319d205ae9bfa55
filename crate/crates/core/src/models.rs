//! Built-in systems and constructions on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, independent_prefix, ivec, unit_vector, Matrix, Vector};
use crate::scalar::{Scalar, NUMERIC_TOLERANCE};
use crate::tablecore::{CoordRep, ProbTable};
use crate::theory::{compute_emax, GptSystem, TheoryError};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// Simplex with `k` distinguishable states and every 0/1 effect.
pub fn classical(k: usize) -> Result<GptSystem, ModelError> {
    if k == 0 {
        return Err(ModelError::InvalidParameter("classical system needs k >= 1".into()));
    }
    if k > 16 {
        return Err(ModelError::InvalidParameter("classical effect hypercube limited to k <= 16".into()));
    }
    let states: Vec<Vector> = (0..k).map(|i| unit_vector(k, i)).collect();
    let effects: Vec<Vector> = (0..1u32 << k)
        .map(|mask| (0..k).map(|i| Scalar::from_integer(i64::from((mask >> i) & 1))).collect())
        .collect();
    Ok(GptSystem::new(format!("classical({k})"), &states, &effects, vec![Scalar::one(); k])?)
}

fn halves(v: &[i64]) -> Vector {
    v.iter().map(|&x| Scalar::new(x, 2)).collect()
}

/// Square state space with its four extremal effects.
pub fn gbit() -> GptSystem {
    let states = [ivec(&[1, 0, 1]), ivec(&[0, 1, 1]), ivec(&[-1, 0, 1]), ivec(&[0, -1, 1])];
    GptSystem::new("gbit", &states, &gbit_effects(), ivec(&[0, 0, 1])).expect("gbit data is consistent")
}

/// `e_1 ... e_4` of the gbit in order.
pub fn gbit_effects() -> [Vector; 4] {
    [halves(&[1, 1, 1]), halves(&[-1, 1, 1]), halves(&[-1, -1, 1]), halves(&[1, -1, 1])]
}

/// Rational point on the unit circle at parameter `t = tan(θ/2)`.
fn circle_point(t: &Scalar) -> (Scalar, Scalar) {
    let t2 = t * t;
    let den = Scalar::one() + &t2;
    ((Scalar::one() - &t2) / &den, (Scalar::from_integer(2) * t) / den)
}

/// Half-angle tangents `tan(π i / k)` for `i = 0..k`, `None` standing for
/// the point `(-1, 0)`. Mirror and (for even `k`) central symmetry are exact.
fn polygon_parameters(k: usize) -> Vec<Option<Scalar>> {
    let mut t: Vec<Option<Scalar>> = vec![None; k];
    let upper = k / 2;
    for i in 0..=upper {
        if 2 * i == k {
            t[i] = None;
            continue;
        }
        let value = if k.is_multiple_of(2) && 4 * i > k {
            let mirror = upper - i;
            let base = if mirror == 0 {
                None
            } else {
                Some(Scalar::approximate((std::f64::consts::PI * mirror as f64 / k as f64).tan(), 1_000))
            };
            base.map(|b| b.recip())
        } else if 4 * i == k {
            Some(Scalar::one())
        } else {
            Some(Scalar::approximate((std::f64::consts::PI * i as f64 / k as f64).tan(), 1_000))
        };
        t[i] = value;
    }
    for i in upper + 1..k {
        t[i] = t[k - i].as_ref().map(|x| -x);
    }
    t
}

/// State vertices `(x_i, y_i, 1)` of the near-regular `k`-gon used by [`polygon`].
pub fn polygon_states(k: usize) -> Vec<Vector> {
    polygon_parameters(k)
        .iter()
        .map(|t| match t {
            Some(t) => {
                let (x, y) = circle_point(t);
                vec![x, y, Scalar::one()]
            }
            None => ivec(&[-1, 0, 1]),
        })
        .collect()
}

/// Polygon system with `k` extremal states on the unit circle and the full
/// set `E^max` of effects. Vertices are the rational circle points closest
/// to the angles `2πi/k` (exact for `k = 4`), so the polygon is regular up to
/// an angular error below `10^-5`.
pub fn polygon(k: usize) -> Result<GptSystem, ModelError> {
    if k < 3 {
        return Err(ModelError::InvalidParameter("polygon needs k >= 3".into()));
    }
    let states = polygon_states(k);
    let unit = ivec(&[0, 0, 1]);
    let bare = GptSystem::from_extremal_unchecked(format!("polygon({k})"), states.clone(), Vec::new(), unit.clone())?;
    let emax = compute_emax(&bare)?;
    Ok(GptSystem::from_extremal_unchecked(format!("polygon({k})"), states, emax.vertices().to_vec(), unit)?)
}

/// Qubit vectors in `(x, y, z, I)` order: a state `(a, b, c, d)` stands for
/// `½(d·1 + aσx + bσy + cσz)` and an effect `(x, y, z, f)` for
/// `½(f·1 + xσx + yσy + zσz)`.
pub type QubitVector = [f64; 4];

/// Numeric qubit with a fixed tolerance on cone membership.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Qubit {
    pub tolerance: f64,
}

impl Default for Qubit {
    fn default() -> Self {
        Qubit { tolerance: NUMERIC_TOLERANCE }
    }
}

/// Serialized form of the numeric qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericSystemSpec {
    pub name: String,
    pub dim: usize,
    pub numeric: bool,
    pub tolerance: f64,
    pub unit: Vec<f64>,
    pub state_cone: String,
}

impl Qubit {
    pub fn new(tolerance: f64) -> Self {
        Qubit { tolerance }
    }

    pub const UNIT: QubitVector = [0.0, 0.0, 0.0, 2.0];

    pub fn unit(&self) -> QubitVector {
        Self::UNIT
    }

    /// `e(ω) = ½(x·a + y·b + z·c + f·d)`.
    pub fn pairing(e: &QubitVector, omega: &QubitVector) -> f64 {
        0.5 * (e[0] * omega[0] + e[1] * omega[1] + e[2] * omega[2] + e[3] * omega[3])
    }

    fn bloch_norm(v: &QubitVector) -> f64 {
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    /// `a² + b² + c² <= d²` with `d >= 0`, within tolerance.
    pub fn in_cone(&self, v: &QubitVector) -> bool {
        v[3] >= -self.tolerance && Self::bloch_norm(v) <= v[3] + self.tolerance
    }

    pub fn is_state(&self, v: &QubitVector) -> bool {
        self.in_cone(v)
    }

    pub fn is_normalized_state(&self, v: &QubitVector) -> bool {
        self.in_cone(v) && (v[3] - 1.0).abs() <= self.tolerance
    }

    /// Both `e` and `u - e` in the positive cone.
    pub fn is_effect(&self, e: &QubitVector) -> bool {
        let u = Self::UNIT;
        let complement = [u[0] - e[0], u[1] - e[1], u[2] - e[2], u[3] - e[3]];
        self.in_cone(e) && self.in_cone(&complement)
    }

    pub fn pure_state(theta: f64, phi: f64) -> QubitVector {
        [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos(), 1.0]
    }

    /// Effect that gives 1 on the pure state with the same Bloch vector.
    pub fn identifying_effect(state: &QubitVector) -> QubitVector {
        [state[0], state[1], state[2], 1.0]
    }

    /// Pure states drawn uniformly from the Bloch sphere.
    pub fn sample_pure_states(&self, count: usize, seed: u64) -> Vec<QubitVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let z: f64 = rng.gen_range(-1.0..=1.0);
                let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = (1.0 - z * z).max(0.0).sqrt();
                [r * phi.cos(), r * phi.sin(), z, 1.0]
            })
            .collect()
    }

    pub fn spec(&self) -> NumericSystemSpec {
        NumericSystemSpec {
            name: "qubit".into(),
            dim: 4,
            numeric: true,
            tolerance: self.tolerance,
            unit: Self::UNIT.to_vec(),
            state_cone: "a^2+b^2+c^2 <= d^2".into(),
        }
    }

    /// A classical simulation would need one dimension per pure state.
    pub fn classical_extension(&self) -> Result<ClassicalExtension, ModelError> {
        Err(ModelError::Unsupported("the qubit has a continuum of extremal states".into()))
    }
}

/// Affine (linear, unit-preserving) isomorphism between two systems.
///
/// `state_map` sends states of the source to states of the target and
/// `effect_map` is its inverse transpose, so every pairing is preserved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Isomorphism {
    pub state_map: Matrix,
    pub effect_map: Matrix,
    /// `state_permutation[i]` is the target index of source state vertex `i`.
    pub state_permutation: Vec<usize>,
    pub effect_permutation: Vec<usize>,
}

impl Isomorphism {
    /// Exhaustive check over all state and effect vertex pairs.
    pub fn verify(&self, source: &GptSystem, target: &GptSystem) -> bool {
        let unit_ok = self.effect_map.mul_vec(source.unit()) == target.unit();
        let states_ok = source
            .states()
            .iter()
            .zip(&self.state_permutation)
            .all(|(w, &j)| self.state_map.mul_vec(w) == target.states()[j]);
        let effects_ok = source
            .effects()
            .iter()
            .zip(&self.effect_permutation)
            .all(|(e, &j)| self.effect_map.mul_vec(e) == target.effects()[j]);
        let pairing_ok = source.effects().iter().enumerate().all(|(i, e)| {
            source.states().iter().enumerate().all(|(k, w)| {
                dot(e, w) == dot(&target.effects()[self.effect_permutation[i]], &target.states()[self.state_permutation[k]])
            })
        });
        unit_ok && states_ok && effects_ok && pairing_ok
    }
}

fn bijection(images: &[Vector], targets: &[Vector]) -> Option<Vec<usize>> {
    if images.len() != targets.len() {
        return None;
    }
    let mut used = vec![false; targets.len()];
    let mut perm = Vec::with_capacity(images.len());
    for img in images {
        let j = targets.iter().position(|t| t == img)?;
        if used[j] {
            return None;
        }
        used[j] = true;
        perm.push(j);
    }
    Some(perm)
}

/// Searches for a linear map carrying the state vertices of `a` onto those of
/// `b` whose inverse transpose carries effects onto effects and the unit onto
/// the unit. Candidates come from every assignment of an independent subset
/// of `a`'s vertices to vertices of `b`.
pub fn find_isomorphism(a: &GptSystem, b: &GptSystem) -> Option<Isomorphism> {
    if a.dim() != b.dim() || a.states().len() != b.states().len() || a.effects().len() != b.effects().len() {
        return None;
    }
    let basis = independent_prefix(a.states());
    if basis.len() != a.dim() {
        return None;
    }
    let source = Matrix::from_columns(&basis.iter().map(|&i| a.states()[i].clone()).collect::<Vec<_>>());
    let source_inv = source.inverse()?;
    let targets = b.states();
    let mut choice = vec![0usize; basis.len()];
    loop {
        let distinct = (0..choice.len()).all(|i| !choice[..i].contains(&choice[i]));
        if distinct {
            let image = Matrix::from_columns(&choice.iter().map(|&j| targets[j].clone()).collect::<Vec<_>>());
            let t = image.matmul(&source_inv);
            if let Some(t_inv) = t.inverse() {
                let mapped: Vec<Vector> = a.states().iter().map(|w| t.mul_vec(w)).collect();
                if let Some(state_permutation) = bijection(&mapped, targets) {
                    let s = t_inv.transpose();
                    let effects: Vec<Vector> = a.effects().iter().map(|e| s.mul_vec(e)).collect();
                    if s.mul_vec(a.unit()) == b.unit() {
                        if let Some(effect_permutation) = bijection(&effects, b.effects()) {
                            return Some(Isomorphism { state_map: t, effect_map: s, state_permutation, effect_permutation });
                        }
                    }
                }
            }
        }
        // Next assignment in lexicographic order.
        let mut pos = choice.len();
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < targets.len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Holevo's restriction of a classical four-level system.
#[derive(Clone, Debug)]
pub struct HolevoConstruction {
    pub classical: GptSystem,
    /// Hypercube effects with `x_1 + x_2 = x_3 + x_4`.
    pub restricted_effects: Vec<Vector>,
    /// States differing by a multiple of this vector are equivalent under the
    /// restricted effects.
    pub equivalence: Vector,
    /// Quotient map `(y_1, ..., y_4) -> (y_1 + y_4, y_2 + y_4, y_3 - y_4)`.
    pub projection: Matrix,
    pub system: GptSystem,
    pub isomorphism: Isomorphism,
}

pub fn holevo_restricted() -> Result<HolevoConstruction, ModelError> {
    let classical = classical(4)?;
    let restricted_effects: Vec<Vector> = classical
        .effects()
        .iter()
        .filter(|e| &e[0] + &e[1] == &e[2] + &e[3])
        .cloned()
        .collect();
    let mut directions = crate::linalg::nullspace(&restricted_effects, 4);
    if directions.len() != 1 {
        return Err(ModelError::InvalidParameter("restriction should leave one invisible direction".into()));
    }
    let d = crate::linalg::primitive(&directions.remove(0));
    // Eliminate the last coordinate: y -> y - (y_4 / d_4) d, then drop y_4.
    let last = 3;
    let rows: Vec<Vector> = (0..last)
        .map(|i| {
            let mut r = unit_vector(4, i);
            r[last] = -(&d[i] / &d[last]);
            r
        })
        .collect();
    let projection = Matrix::from_rows(&rows);
    let states = classical.state_body().project(&projection).map_err(TheoryError::from)?;
    let effects: Vec<Vector> = restricted_effects.iter().map(|e| e[..last].to_vec()).collect();
    let system = GptSystem::new("holevo", states.vertices(), &effects, classical.unit()[..last].to_vec())?;
    let isomorphism = find_isomorphism(&system, &gbit())
        .ok_or_else(|| ModelError::InvalidParameter("projected system is not a gbit".into()))?;
    Ok(HolevoConstruction { classical, restricted_effects, equivalence: d, projection, system, isomorphism })
}

/// A classical system that reproduces every pairing of the original one.
#[derive(Clone, Debug)]
pub struct ClassicalExtension {
    pub system: GptSystem,
    /// Original effect vertex `i` as a coarse-graining of the new
    /// distinguishing effects: its values on every original state vertex.
    pub effect_embedding: Vec<Vector>,
    /// Original state vertex `j` goes to the `j`-th unit vector.
    pub state_embedding: Vec<Vector>,
}

impl ClassicalExtension {
    /// `embedded_e(embedded_ω) = e(ω)` for every original vertex pair.
    pub fn verify(&self, original: &GptSystem) -> bool {
        original.effects().iter().zip(&self.effect_embedding).all(|(e, ee)| {
            original.states().iter().zip(&self.state_embedding).all(|(w, ew)| dot(e, w) == dot(ee, ew))
        })
    }
}

pub fn classical_extension(sys: &GptSystem) -> Result<ClassicalExtension, ModelError> {
    let n = sys.states().len();
    if n > 16 {
        return Err(ModelError::Unsupported(format!("{n} extremal states exceed the classical effect limit")));
    }
    let system = classical(n)?;
    let effect_embedding = sys.effects().iter().map(|e| sys.states().iter().map(|w| dot(e, w)).collect()).collect();
    let state_embedding = (0..n).map(|j| unit_vector(n, j)).collect();
    Ok(ClassicalExtension { system, effect_embedding, state_embedding })
}

/// Appends one perfectly distinguishing effect per state: entry 1 on its own
/// state and 0 elsewhere. New effects are labelled by `label(j)`.
pub fn extend_table(table: &ProbTable, label: impl Fn(usize) -> String) -> ProbTable {
    let mut raw = table.to_raw();
    let n = raw.state_labels.len();
    for j in 0..n {
        raw.effect_labels.push(label(j));
        raw.entries.push((0..n).map(|k| Scalar::from_integer(i64::from(j == k))).collect());
    }
    crate::tablecore::reduce_table(&raw).expect("extension of a non-empty table")
}

/// System spanned by the rows of a coordinate representation, with the
/// effect at `unit_index` as the unit.
pub fn system_from_coords(name: &str, rep: &CoordRep, unit_index: usize) -> Result<GptSystem, ModelError> {
    let unit = rep
        .effect_coords
        .get(unit_index)
        .cloned()
        .ok_or_else(|| ModelError::InvalidParameter(format!("no effect at index {unit_index}")))?;
    Ok(GptSystem::new(name, &rep.state_coords, &rep.effect_coords, unit)?)
}
