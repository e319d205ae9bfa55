//! Independent complex density-matrix computations for qubits.

use num_complex::Complex64 as C;

pub type M2 = [[C; 2]; 2];
pub type M4 = [[C; 4]; 4];

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn pauli() -> [M2; 4] {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        [[o, one], [one, o]],
        [[o, -i], [i, o]],
        [[one, o], [o, -one]],
        [[one, o], [o, one]],
    ]
}

/// `½(d·1 + aσx + bσy + cσz)` for `(a, b, c, d)`.
pub fn qubit_matrix(v: &[f64; 4]) -> M2 {
    let p = pauli();
    let mut m = [[c(0.0, 0.0); 2]; 2];
    for (k, coeff) in v.iter().enumerate() {
        for r in 0..2 {
            for s in 0..2 {
                m[r][s] += p[k][r][s] * (0.5 * coeff);
            }
        }
    }
    m
}

/// Eigenvalues of a 2×2 Hermitian matrix, ascending.
pub fn eigenvalues(m: &M2) -> [f64; 2] {
    let tr = (m[0][0] + m[1][1]).re;
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).re;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    [(tr - disc) / 2.0, (tr + disc) / 2.0]
}

pub fn trace_product2(a: &M2, b: &M2) -> f64 {
    let mut t = c(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            t += a[i][j] * b[j][i];
        }
    }
    t.re
}

pub fn kron(a: &M2, b: &M2) -> M4 {
    let mut m = [[c(0.0, 0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

pub fn trace_product4(a: &M4, b: &M4) -> f64 {
    let mut t = c(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            t += a[i][j] * b[j][i];
        }
    }
    t.re
}

/// `|ψ⁺⟩⟨ψ⁺|` with `|ψ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn bell_density() -> M4 {
    let mut m = [[c(0.0, 0.0); 4]; 4];
    for &i in &[0, 3] {
        for &j in &[0, 3] {
            m[i][j] = c(0.5, 0.0);
        }
    }
    m
}

/// Projector `½(1 + sinθ σx + cosθ σz)`.
pub fn xz_projector(theta: f64) -> M2 {
    qubit_matrix(&[theta.sin(), 0.0, theta.cos(), 1.0])
}

/// CHSH value of `rho` for ±1 observables `2P - 1` built from x–z projectors.
pub fn chsh_density(rho: &M4, alice: [f64; 2], bob: [f64; 2]) -> f64 {
    let obs = |t: f64| {
        let p = xz_projector(t);
        let mut o = p;
        for i in 0..2 {
            for j in 0..2 {
                o[i][j] = p[i][j] * 2.0 - if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
            }
        }
        o
    };
    let corr = |x: usize, y: usize| trace_product4(rho, &kron(&obs(alice[x]), &obs(bob[y])));
    (corr(0, 0) + corr(0, 1) + corr(1, 0) - corr(1, 1)).abs()
}
