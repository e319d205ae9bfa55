//! Two parties, two settings, two outcomes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compose::qubits::TwoQubitState;
use crate::compose::{ComposeError, JointSystem, Side};
use crate::geometry::{AffineHalfspace, ConvexBody, DdOptions, GeometryError};
use crate::linalg::{add, sub, Matrix, Vector};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::models::{Qubit, QubitVector};
use crate::scalar::{Field, Scalar};
use crate::theory::Measurement;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum BellError {
    #[error("measurement {0} is not a complete binary measurement")]
    IncompleteMeasurement(String),
    #[error("objective unbounded over the joint state cone; the joint system is invalid")]
    UnboundedCone,
    #[error("no normalized joint state exists")]
    NoNormalizedState,
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),
    #[error("fiducial effects do not span the effect space")]
    SingularFiducials,
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `p(a, b | x, y)` stored as `p[a][b][x][y]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Behavior<T> {
    p: [[[[T; 2]; 2]; 2]; 2],
}

pub type ExactBehavior = Behavior<Scalar>;

/// `C[x][y]`.
pub type Correlators<T> = [[T; 2]; 2];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignalingViolation {
    /// The party whose marginal depends on the other party's setting.
    pub party: Side,
    pub outcome: usize,
    pub setting: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoSignalingReport {
    pub violations: Vec<SignalingViolation>,
}

impl NoSignalingReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: Field> Behavior<T> {
    pub fn from_fn(f: impl Fn(usize, usize, usize, usize) -> T) -> Self {
        let cell = |a, b| [[f(a, b, 0, 0), f(a, b, 0, 1)], [f(a, b, 1, 0), f(a, b, 1, 1)]];
        Behavior { p: [[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]] }
    }

    pub fn p(&self, a: usize, b: usize, x: usize, y: usize) -> &T {
        &self.p[a][b][x][y]
    }

    pub fn correlators(&self) -> Correlators<T> {
        let c = |x: usize, y: usize| {
            let same = self.p[0][0][x][y].clone() + self.p[1][1][x][y].clone();
            let diff = self.p[0][1][x][y].clone() + self.p[1][0][x][y].clone();
            same - diff
        };
        [[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]]
    }

    /// `C_00 + C_01 + C_10 - C_11` without the absolute value.
    pub fn chsh_signed(&self) -> T {
        let c = self.correlators();
        c[0][0].clone() + c[0][1].clone() + c[1][0].clone() - c[1][1].clone()
    }

    /// `Σ_b p(a,b|x,y)`.
    pub fn alice_marginal(&self, a: usize, x: usize, y: usize) -> T {
        self.p[a][0][x][y].clone() + self.p[a][1][x][y].clone()
    }

    /// `Σ_a p(a,b|x,y)`.
    pub fn bob_marginal(&self, b: usize, x: usize, y: usize) -> T {
        self.p[0][b][x][y].clone() + self.p[1][b][x][y].clone()
    }

    /// Entries non-negative and summing to one for every setting pair, up to
    /// the field's notion of negligible.
    pub fn check_normalized(&self) -> Result<(), BellError> {
        for x in 0..2 {
            for y in 0..2 {
                let mut total = T::zero();
                for a in 0..2 {
                    for b in 0..2 {
                        let v = self.p[a][b][x][y].clone();
                        if v < T::zero() && !v.is_negligible() {
                            return Err(BellError::InvalidBehavior(format!("p({a},{b}|{x},{y}) = {v:?} is negative")));
                        }
                        total = total + v;
                    }
                }
                if !(total.clone() - T::one()).is_negligible() {
                    return Err(BellError::InvalidBehavior(format!("probabilities for setting ({x},{y}) sum to {total:?}")));
                }
            }
        }
        Ok(())
    }

    /// Convex mixture `t·self + (1-t)·other`.
    pub fn mix(&self, other: &Behavior<T>, t: T) -> Behavior<T> {
        Behavior::from_fn(|a, b, x, y| {
            t.clone() * self.p[a][b][x][y].clone() + (T::one() - t.clone()) * other.p[a][b][x][y].clone()
        })
    }

    pub fn to_f64(&self) -> Behavior<f64> {
        Behavior::from_fn(|a, b, x, y| self.p[a][b][x][y].to_f64_lossy())
    }
}

/// `|C_00 + C_01 + C_10 - C_11|`.
pub fn chsh<T: Field>(b: &Behavior<T>) -> T {
    b.chsh_signed().abs_value()
}

/// Checks that each party's marginals ignore the other party's setting.
pub fn no_signaling_check<T: Field>(b: &Behavior<T>) -> NoSignalingReport {
    let mut violations = Vec::new();
    for x in 0..2 {
        for a in 0..2 {
            if !(b.alice_marginal(a, x, 0) - b.alice_marginal(a, x, 1)).is_negligible() {
                violations.push(SignalingViolation { party: Side::Left, outcome: a, setting: x });
            }
        }
    }
    for y in 0..2 {
        for o in 0..2 {
            if !(b.bob_marginal(o, 0, y) - b.bob_marginal(o, 1, y)).is_negligible() {
                violations.push(SignalingViolation { party: Side::Right, outcome: o, setting: y });
            }
        }
    }
    NoSignalingReport { violations }
}

/// `p(a,b|x,y) = ½` if `a ⊕ b = x·y`, else 0.
pub fn pr_box() -> ExactBehavior {
    Behavior::from_fn(|a, b, x, y| if (a ^ b) == (x & y) { Scalar::half() } else { Scalar::zero() })
}

/// Every entry `1/4`.
pub fn uniform_behavior() -> ExactBehavior {
    Behavior::from_fn(|_, _, _, _| Scalar::new(1, 4))
}

/// Local deterministic strategy: Alice answers `alice[x]`, Bob `bob[y]`.
pub fn deterministic(alice: [usize; 2], bob: [usize; 2]) -> ExactBehavior {
    Behavior::from_fn(|a, b, x, y| Scalar::from_integer(i64::from(a == alice[x] && b == bob[y])))
}

fn check_binary(m: &Measurement, unit: &[Scalar], label: &str) -> Result<(), BellError> {
    if m.effects.len() != 2 || add(&m.effects[0], &m.effects[1]) != unit {
        return Err(BellError::IncompleteMeasurement(label.to_string()));
    }
    Ok(())
}

fn check_settings(sys: &JointSystem, alice: &[Measurement; 2], bob: &[Measurement; 2]) -> Result<(), BellError> {
    for (x, m) in alice.iter().enumerate() {
        check_binary(m, sys.left().unit(), &format!("A{x}"))?;
    }
    for (y, m) in bob.iter().enumerate() {
        check_binary(m, sys.right().unit(), &format!("B{y}"))?;
    }
    Ok(())
}

/// `p(a,b|x,y) = [e^A_{x,a} ⊗ e^B_{y,b}](W)`.
pub fn behavior_from(
    sys: &JointSystem,
    w: &Matrix,
    alice: &[Measurement; 2],
    bob: &[Measurement; 2],
) -> Result<ExactBehavior, BellError> {
    sys.check_shape(w)?;
    check_settings(sys, alice, bob)?;
    let b = Behavior::from_fn(|a, b, x, y| {
        let left = w.vec_mul(&alice[x].effects[a]);
        crate::linalg::dot(&left, &bob[y].effects[b])
    });
    b.check_normalized()?;
    Ok(b)
}

/// Coefficient matrix `F` with `Σ F_ij W_ij = C_00 + C_01 + C_10 - C_11`.
pub fn chsh_functional(alice: &[Measurement; 2], bob: &[Measurement; 2]) -> Matrix {
    let da: Vec<Vector> = alice.iter().map(|m| sub(&m.effects[0], &m.effects[1])).collect();
    let db: Vec<Vector> = bob.iter().map(|m| sub(&m.effects[0], &m.effects[1])).collect();
    let mut f = Matrix::zeros(da[0].len(), db[0].len());
    for (x, a) in da.iter().enumerate() {
        for (y, b) in db.iter().enumerate() {
            let term = Matrix::outer(a, b);
            let sign = if x == 1 && y == 1 { Scalar::from_integer(-1) } else { Scalar::one() };
            for i in 0..f.rows() {
                for j in 0..f.cols() {
                    f[(i, j)] += &sign * &term[(i, j)];
                }
            }
        }
    }
    f
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshOptimum {
    pub value: Scalar,
    pub state: Matrix,
    pub behavior: ExactBehavior,
}

fn maximize_linear(sys: &JointSystem, objective: &Matrix) -> Result<(Scalar, Matrix), BellError> {
    let (n, m) = sys.shape();
    let cone = sys.state_cone();
    let unit = sys.unit().as_flat();
    let obj = objective.as_flat();
    if let Some(gens) = cone.known_generators() {
        let mut lp = LinearProgram::new(gens.len());
        lp.add(gens.iter().map(|g| crate::linalg::dot(unit, g)).collect(), Relation::Eq, Scalar::one());
        let c: Vector = gens.iter().map(|g| crate::linalg::dot(obj, g)).collect();
        return match lp.maximize(&c) {
            LpOutcome::Optimal { x, value } => Ok((value, Matrix::from_flat(n, m, crate::linalg::combine(&x, gens, n * m)))),
            LpOutcome::Unbounded { .. } => Err(BellError::UnboundedCone),
            LpOutcome::Infeasible(_) => Err(BellError::NoNormalizedState),
        };
    }
    let hs = cone.halfspaces()?;
    let mut lp = LinearProgram::new(n * m);
    lp.set_free_range(0..n * m);
    for h in hs {
        lp.add(h.clone(), Relation::Ge, Scalar::zero());
    }
    lp.add(unit.to_vec(), Relation::Eq, Scalar::one());
    match lp.maximize(obj) {
        LpOutcome::Optimal { x, value } => Ok((value, Matrix::from_flat(n, m, x))),
        LpOutcome::Unbounded { .. } => Err(BellError::UnboundedCone),
        LpOutcome::Infeasible(_) => Err(BellError::NoNormalizedState),
    }
}

/// Exact maximum of the CHSH value over normalized joint states with an
/// optimizing state. Both signs of the CHSH expression are tried.
pub fn max_chsh(
    sys: &JointSystem,
    alice: &[Measurement; 2],
    bob: &[Measurement; 2],
) -> Result<ChshOptimum, BellError> {
    check_settings(sys, alice, bob)?;
    let f = chsh_functional(alice, bob);
    let (plus, w_plus) = maximize_linear(sys, &f)?;
    let neg = Matrix::from_flat(f.rows(), f.cols(), f.as_flat().iter().map(|x| -x).collect());
    let (minus, w_minus) = maximize_linear(sys, &neg)?;
    let (value, state) = if minus > plus { (minus, w_minus) } else { (plus, w_plus) };
    let behavior = behavior_from(sys, &state, alice, bob)?;
    Ok(ChshOptimum { value, state, behavior })
}

/// Joint state reproducing `behavior` under the given measurements, found
/// by tomography on the effects `e_{0,0}`, `e_{1,0}` and the unit of each
/// side. These must form a basis of the effect space.
pub fn state_from_behavior(
    sys: &JointSystem,
    behavior: &ExactBehavior,
    alice: &[Measurement; 2],
    bob: &[Measurement; 2],
) -> Result<Matrix, BellError> {
    check_settings(sys, alice, bob)?;
    let fa = Matrix::from_rows(&[alice[0].effects[0].clone(), alice[1].effects[0].clone(), sys.left().unit().to_vec()]);
    let fb = Matrix::from_rows(&[bob[0].effects[0].clone(), bob[1].effects[0].clone(), sys.right().unit().to_vec()]);
    if fa.cols() != 3 || fb.cols() != 3 {
        return Err(BellError::SingularFiducials);
    }
    let fa_inv = fa.inverse().ok_or(BellError::SingularFiducials)?;
    let fb_inv_t = fb.transpose().inverse().ok_or(BellError::SingularFiducials)?;
    let mut v = Matrix::zeros(3, 3);
    for x in 0..2 {
        for y in 0..2 {
            v[(x, y)] = behavior.p(0, 0, x, y).clone();
        }
        v[(x, 2)] = behavior.alice_marginal(0, x, 0);
        v[(2, x)] = behavior.bob_marginal(0, 0, x);
    }
    v[(2, 2)] = Scalar::one();
    Ok(fa_inv.matmul(&v).matmul(&fb_inv_t))
}

fn flat_index(a: usize, b: usize, x: usize, y: usize) -> usize {
    ((x * 2 + y) * 2 + a) * 2 + b
}

/// Vertices of the no-signaling polytope, enumerated exactly. Coordinates
/// use the order `((x·2 + y)·2 + a)·2 + b`.
pub fn no_signaling_polytope() -> Result<Vec<ExactBehavior>, BellError> {
    let dim = 16;
    let mut hs = Vec::new();
    let mut equation = |coeffs: Vec<(usize, i64)>, rhs: i64| {
        let mut normal = vec![Scalar::zero(); dim];
        for (i, c) in coeffs {
            normal[i] += Scalar::from_integer(c);
        }
        let offset = Scalar::from_integer(-rhs);
        hs.push(AffineHalfspace { normal: normal.iter().map(|x| -x).collect(), offset: -&offset });
        hs.push(AffineHalfspace { normal, offset });
    };
    for x in 0..2 {
        for y in 0..2 {
            let idx = [(0, 0), (0, 1), (1, 0), (1, 1)].iter().map(|&(a, b)| (flat_index(a, b, x, y), 1)).collect();
            equation(idx, 1);
        }
    }
    for x in 0..2 {
        let terms = (0..2).flat_map(|b| [(flat_index(0, b, x, 0), 1), (flat_index(0, b, x, 1), -1)]).collect();
        equation(terms, 0);
    }
    for y in 0..2 {
        let terms = (0..2).flat_map(|a| [(flat_index(a, 0, 0, y), 1), (flat_index(a, 0, 1, y), -1)]).collect();
        equation(terms, 0);
    }
    for i in 0..dim {
        hs.push(AffineHalfspace { normal: crate::linalg::unit_vector(dim, i), offset: Scalar::zero() });
    }
    let body = ConvexBody::from_halfspaces(dim, &hs, &DdOptions::default())?;
    let mut out: Vec<ExactBehavior> = body
        .vertices()
        .iter()
        .map(|v| Behavior::from_fn(|a, b, x, y| v[flat_index(a, b, x, y)].clone()))
        .collect();
    out.sort_by(|a, b| {
        let fa: Vec<&Scalar> = a.p.iter().flatten().flatten().flatten().collect();
        let fb: Vec<&Scalar> = b.p.iter().flatten().flatten().flatten().collect();
        fa.cmp(&fb)
    });
    Ok(out)
}

/// Report of the kind written by the command-line tool.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshReport {
    #[serde(rename = "S")]
    pub s: Scalar,
    pub correlators: Correlators<Scalar>,
    pub no_signaling: bool,
}

impl ChshReport {
    pub fn new(b: &ExactBehavior) -> Self {
        ChshReport { s: chsh(b), correlators: b.correlators(), no_signaling: no_signaling_check(b).passes() }
    }
}

impl ExactBehavior {
    /// Sixteen lines `a,b,x,y,p` after a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,x,y,p\n");
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        out.push_str(&format!("{a},{b},{x},{y},{}\n", self.p[a][b][x][y]));
                    }
                }
            }
        }
        out
    }

    /// Reads `a,b,x,y,p` lines in any order; an optional header is skipped.
    /// Every one of the sixteen cells must appear exactly once.
    pub fn from_csv_str(text: &str) -> Result<Self, BellError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
        let mut cells: [[[[Option<Scalar>; 2]; 2]; 2]; 2] = Default::default();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| BellError::Csv { line: e.position().map_or(0, |p| p.line() as usize), message: e.to_string() })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.get(0) == Some("a") {
                continue;
            }
            if rec.len() != 5 {
                return Err(BellError::Csv { line, message: format!("expected 5 fields, found {}", rec.len()) });
            }
            let mut idx = [0usize; 4];
            for (k, slot) in idx.iter_mut().enumerate() {
                *slot = match &rec[k] {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(BellError::Csv { line, message: format!("field {} must be 0 or 1, found {other:?}", k + 1) }),
                };
            }
            let p: Scalar = rec[4].parse().map_err(|e: crate::scalar::ParseScalarError| BellError::Csv { line, message: e.to_string() })?;
            let cell = &mut cells[idx[0]][idx[1]][idx[2]][idx[3]];
            if cell.is_some() {
                return Err(BellError::Csv { line, message: "duplicate entry".into() });
            }
            *cell = Some(p);
        }
        for (a, b, x, y) in (0..16).map(|k| (k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1)) {
            if cells[a][b][x][y].is_none() {
                return Err(BellError::Csv { line: 0, message: format!("missing entry for a={a} b={b} x={x} y={y}") });
            }
        }
        let b = Behavior::from_fn(|a, b, x, y| cells[a][b][x][y].clone().unwrap_or_default());
        b.check_normalized()?;
        Ok(b)
    }
}

/// Qubit effect `½(1 + sinθ σx + cosθ σz)`: a projector onto the Bloch
/// direction at angle `θ` from `z` in the x–z plane.
pub fn xz_effect(theta: f64) -> QubitVector {
    [theta.sin(), 0.0, theta.cos(), 1.0]
}

/// Textbook settings reaching Tsirelson's bound on the Bell state:
/// Alice at 0 and π/2, Bob at π/4 and -π/4.
pub fn optimal_qubit_angles() -> ([f64; 2], [f64; 2]) {
    use std::f64::consts::FRAC_PI_4;
    ([0.0, 2.0 * FRAC_PI_4], [FRAC_PI_4, -FRAC_PI_4])
}

fn complement(e: &QubitVector) -> QubitVector {
    let u = Qubit::UNIT;
    [u[0] - e[0], u[1] - e[1], u[2] - e[2], u[3] - e[3]]
}

/// Behavior of a two-qubit state when each party measures `{e, u - e}`
/// with `e` taken from its two settings.
pub fn qubit_behavior(state: &TwoQubitState, alice: &[QubitVector; 2], bob: &[QubitVector; 2]) -> Behavior<f64> {
    Behavior::from_fn(|a, b, x, y| {
        let ea = if a == 0 { alice[x] } else { complement(&alice[x]) };
        let eb = if b == 0 { bob[y] } else { complement(&bob[y]) };
        state.eval(&ea, &eb)
    })
}

/// Largest CHSH value over a finite set of joint states and its index.
pub fn max_chsh_over_states(states: &[TwoQubitState], alice: &[QubitVector; 2], bob: &[QubitVector; 2]) -> Option<(f64, usize)> {
    states
        .iter()
        .enumerate()
        .map(|(i, s)| (chsh(&qubit_behavior(s, alice, bob)), i))
        .max_by(|a, b| a.0.total_cmp(&b.0))
}

/// Exhaustive scan of x–z plane angles on a `steps`-point grid over
/// `[0, 2π)` for each of the four settings. Returns the best value with
/// angles `[a0, a1, b0, b1]`.
pub fn grid_scan_chsh(state: &TwoQubitState, steps: usize) -> (f64, [f64; 4]) {
    let angle = |k: usize| std::f64::consts::TAU * k as f64 / steps as f64;
    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                for l in 0..steps {
                    let (a0, a1, b0, b1) = (angle(i), angle(j), angle(k), angle(l));
                    let b = qubit_behavior(state, &[xz_effect(a0), xz_effect(a1)], &[xz_effect(b0), xz_effect(b1)]);
                    let s = chsh(&b);
                    if s > best.0 {
                        best = (s, [a0, a1, b0, b1]);
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::{max_tensor, min_tensor};
    use crate::models::{classical, gbit, gbit_effects};
    use crate::scalar::int;
    use crate::theory::{complete_measurement, GptSystem};

    fn binary(sys: &GptSystem, e: &Vector) -> Measurement {
        complete_measurement(sys, std::slice::from_ref(e)).unwrap()
    }

    #[test]
    fn reference_values() {
        assert_eq!(chsh(&uniform_behavior()), Scalar::zero());
        assert_eq!(chsh(&deterministic([0, 0], [0, 0])), int(2));
        assert_eq!(deterministic([0, 0], [0, 0]).correlators(), [[int(1), int(1)], [int(1), int(1)]]);
        let pr = pr_box();
        assert_eq!(chsh(&pr), int(4));
        assert!(no_signaling_check(&pr).passes());
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(pr.alice_marginal(0, x, y), Scalar::half());
                assert_eq!(pr.bob_marginal(1, x, y), Scalar::half());
            }
        }
    }

    #[test]
    fn signaling_is_detected() {
        let b = Behavior::from_fn(|a, b, _x, y| Scalar::from_integer(i64::from(a == y && b == 0)));
        let report = no_signaling_check(&b);
        assert!(report.violations.contains(&SignalingViolation { party: Side::Left, outcome: 0, setting: 0 }));
    }

    #[test]
    fn classical_bound() {
        let c = classical(2).unwrap();
        let sys = min_tensor(&c, &c);
        let m = binary(&c, &vec![int(1), int(0)]);
        let settings = [m.clone(), m];
        let opt = max_chsh(&sys, &settings, &settings).unwrap();
        assert_eq!(opt.value, int(2));
    }

    #[test]
    fn boxworld_reaches_four() {
        let g = gbit();
        let sys = max_tensor(&g, &g).unwrap();
        let e = gbit_effects();
        let settings = [binary(&g, &e[0]), binary(&g, &e[1])];
        let opt = max_chsh(&sys, &settings, &settings).unwrap();
        assert_eq!(opt.value, int(4));
        assert!(no_signaling_check(&opt.behavior).passes());
        let w = state_from_behavior(&sys, &opt.behavior, &settings, &settings).unwrap();
        assert_eq!(w, opt.state);
    }

    #[test]
    fn incomplete_measurement_rejected() {
        let g = gbit();
        let sys = max_tensor(&g, &g).unwrap();
        let e = gbit_effects();
        let bad = Measurement { effects: vec![e[0].clone(), e[1].clone()], complete: false };
        let good = binary(&g, &e[0]);
        let err = max_chsh(&sys, &[bad, good.clone()], &[good.clone(), good]).unwrap_err();
        assert!(matches!(err, BellError::IncompleteMeasurement(_)));
    }

    #[test]
    fn csv_round_trip() {
        let pr = pr_box();
        assert_eq!(ExactBehavior::from_csv_str(&pr.to_csv()).unwrap(), pr);
        assert!(ExactBehavior::from_csv_str("0,0,0,0,1\n").is_err());
    }

    #[test]
    fn qubit_tsirelson() {
        let (a, b) = optimal_qubit_angles();
        let alice = [xz_effect(a[0]), xz_effect(a[1])];
        let bob = [xz_effect(b[0]), xz_effect(b[1])];
        let beh = qubit_behavior(&TwoQubitState::bell(), &alice, &bob);
        assert!((chsh(&beh) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(no_signaling_check(&beh).passes());
    }

    #[test]
    fn grid_scan_finds_violation() {
        let (s, _) = grid_scan_chsh(&TwoQubitState::bell(), 8);
        assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn no_signaling_polytope_vertices() {
        let vs = no_signaling_polytope().unwrap();
        assert_eq!(vs.len(), 24);
        let deterministic = vs.iter().filter(|b| b.p.iter().flatten().flatten().flatten().all(|p| p.is_integer())).count();
        assert_eq!(deterministic, 16);
        assert_eq!(vs.iter().filter(|b| chsh(b) == int(4)).count(), 2);
        assert!(vs.iter().all(|b| no_signaling_check(b).passes()));
    }
}
