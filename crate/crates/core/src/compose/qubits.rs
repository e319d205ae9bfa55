//! Numeric two-qubit composition in the correlation representation
//! `T_μν = tr[ρ σ_μ ⊗ σ_ν]` with `σ` in `(x, y, z, I)` order.
//!
//! With single-qubit vectors as in [`Qubit`], a product state `ω^A ⊗ ω^B`
//! has `T = ω^A (ω^B)ᵀ` and a joint effect with coefficient matrix `X` has
//! probability `¼ Σ X_μν T_μν`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::{ComposeError, Side};
use crate::linalg::Vector;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::models::{Qubit, QubitVector};
use crate::scalar::Scalar;

pub type Coefficients = [[f64; 4]; 4];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitState {
    pub t: Coefficients,
}

fn outer(a: &QubitVector, b: &QubitVector) -> Coefficients {
    let mut t = [[0.0; 4]; 4];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = a[i] * b[j];
        }
    }
    t
}

fn to_matrix(c: &Coefficients) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| c[i][j])
}

fn from_matrix(m: &Matrix4<f64>) -> Coefficients {
    let mut c = [[0.0; 4]; 4];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m[(i, j)];
        }
    }
    c
}

impl TwoQubitState {
    pub fn product(a: &QubitVector, b: &QubitVector) -> Self {
        TwoQubitState { t: outer(a, b) }
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell() -> Self {
        let mut t = [[0.0; 4]; 4];
        t[0][0] = 1.0;
        t[1][1] = -1.0;
        t[2][2] = 1.0;
        t[3][3] = 1.0;
        TwoQubitState { t }
    }

    /// `p·self + (1-p)·other`.
    pub fn mix(&self, other: &TwoQubitState, p: f64) -> Self {
        let mut t = [[0.0; 4]; 4];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = p * self.t[i][j] + (1.0 - p) * other.t[i][j];
            }
        }
        TwoQubitState { t }
    }

    /// Probability of the product effect `e^A ⊗ e^B`.
    pub fn eval(&self, ea: &QubitVector, eb: &QubitVector) -> f64 {
        self.eval_joint(&outer(ea, eb))
    }

    pub fn eval_joint(&self, x: &Coefficients) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += x[i][j] * self.t[i][j];
            }
        }
        0.25 * s
    }

    pub fn norm(&self) -> f64 {
        self.eval(&Qubit::UNIT, &Qubit::UNIT)
    }

    /// Half the contraction with the other side's vector, matching the
    /// single-qubit pairing `½ e·ω`.
    fn contract(&self, v: &QubitVector, measured: Side) -> QubitVector {
        let mut out = [0.0; 4];
        for (k, o) in out.iter_mut().enumerate() {
            *o = 0.5
                * (0..4)
                    .map(|l| match measured {
                        Side::Right => self.t[k][l] * v[l],
                        Side::Left => self.t[l][k] * v[l],
                    })
                    .sum::<f64>();
        }
        out
    }

    pub fn marginal(&self, side: Side) -> QubitVector {
        let other = match side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        self.contract(&Qubit::UNIT, other)
    }

    /// `(unnormalized, normalized, probability)` of the state on the other
    /// side after `effect` clicked on `measured`.
    pub fn conditional(&self, effect: &QubitVector, measured: Side, tolerance: f64) -> Result<(QubitVector, QubitVector, f64), ComposeError> {
        let c = self.contract(effect, measured);
        let p = Qubit::pairing(&Qubit::UNIT, &c);
        if p.abs() <= tolerance {
            return Err(ComposeError::ZeroProbabilityCondition);
        }
        Ok((c, c.map(|x| x / p), p))
    }
}

/// The single-qubit states `1/2, (1+σx)/2, (1+σy)/2, (1+σz)/2`.
pub fn pauli_basis_states() -> [QubitVector; 4] {
    [[0.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0]]
}

/// Coefficients `C` with `T = Σ_ij C_ij a_i b_jᵀ`.
pub fn product_basis_decomposition(
    state: &TwoQubitState,
    basis_a: &[QubitVector; 4],
    basis_b: &[QubitVector; 4],
    tolerance: f64,
) -> Result<Coefficients, ComposeError> {
    let a = Matrix4::from_fn(|i, j| basis_a[j][i]);
    let b = Matrix4::from_fn(|i, j| basis_b[j][i]);
    if a.determinant().abs() <= tolerance || b.determinant().abs() <= tolerance {
        return Err(ComposeError::SingularBasis);
    }
    let a_inv = a.try_inverse().ok_or(ComposeError::SingularBasis)?;
    let bt_inv = b.transpose().try_inverse().ok_or(ComposeError::SingularBasis)?;
    Ok(from_matrix(&(a_inv * to_matrix(&state.t) * bt_inv)))
}

/// Result of testing separability against finite nets of local states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetSeparability {
    /// The state is within `tolerance` (max-norm on `T`) of a mixture of
    /// net products. This is an approximation: a finer net may succeed
    /// where a coarse one fails.
    pub separable_within_net: bool,
    pub residual: f64,
    /// Mixture weights over `net_a × net_b`, row-major.
    pub weights: Vec<f64>,
}

fn rational(x: f64) -> Scalar {
    Scalar::approximate(x, 1 << 24)
}

/// Smallest max-norm distance from `state` to the convex hull of products of
/// net states, solved exactly on rational roundings of the inputs.
pub fn separable_within_net(
    state: &TwoQubitState,
    net_a: &[QubitVector],
    net_b: &[QubitVector],
    tolerance: f64,
) -> NetSeparability {
    let gens: Vec<Vector> = net_a
        .iter()
        .flat_map(|a| net_b.iter().map(move |b| outer(a, b).iter().flatten().map(|&x| rational(x)).collect()))
        .collect();
    let target: Vector = state.t.iter().flatten().map(|&x| rational(x)).collect();
    let k = gens.len();
    let mut lp = LinearProgram::new(k + 1);
    for d in 0..16 {
        let mut up: Vector = gens.iter().map(|g| g[d].clone()).collect();
        up.push(Scalar::from_integer(-1));
        lp.add(up, Relation::Le, target[d].clone());
        let mut down: Vector = gens.iter().map(|g| -&g[d]).collect();
        down.push(Scalar::from_integer(-1));
        lp.add(down, Relation::Le, -&target[d]);
    }
    let mut total = vec![Scalar::one(); k];
    total.push(Scalar::zero());
    lp.add(total, Relation::Eq, Scalar::one());
    let mut objective = vec![Scalar::zero(); k + 1];
    objective[k] = Scalar::one();
    match lp.minimize(&objective) {
        LpOutcome::Optimal { x, value } => {
            let residual = value.to_f64();
            NetSeparability {
                separable_within_net: residual <= tolerance,
                residual,
                weights: x[..k].iter().map(Scalar::to_f64).collect(),
            }
        }
        _ => NetSeparability { separable_within_net: false, residual: f64::INFINITY, weights: Vec::new() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_marginal_is_mixed() {
        let b = TwoQubitState::bell();
        assert_eq!(b.marginal(Side::Left), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(b.marginal(Side::Right), [0.0, 0.0, 0.0, 1.0]);
        assert!((b.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_conditional_on_zero() {
        let b = TwoQubitState::bell();
        let (_, normalized, p) = b.conditional(&[0.0, 0.0, 1.0, 1.0], Side::Right, 1e-9).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert_eq!(normalized, [0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn product_state_decomposes_to_one_term() {
        let basis = pauli_basis_states();
        let w = TwoQubitState::product(&basis[1], &basis[3]);
        let c = product_basis_decomposition(&w, &basis, &basis, 1e-9).unwrap();
        for (i, row) in c.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let expected = if (i, j) == (1, 3) { 1.0 } else { 0.0 };
                assert!((x - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn net_separability() {
        let net = [[1.0, 0.0, 0.0, 1.0], [-1.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0], [0.0, 0.0, -1.0, 1.0]];
        let sep = TwoQubitState::product(&net[0], &net[2]).mix(&TwoQubitState::product(&net[1], &net[3]), 0.5);
        assert!(separable_within_net(&sep, &net, &net, 1e-9).separable_within_net);
        let bell = separable_within_net(&TwoQubitState::bell(), &net, &net, 1e-9);
        assert!(!bell.separable_within_net);
        assert!(bell.residual > 0.1);
    }
}
