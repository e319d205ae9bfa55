//! Dense exact linear algebra over [`Scalar`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::{content_scale, Scalar};

/// A coordinate vector. Effects and states share this representation; the
/// pairing between them is the plain dot product in conjugate bases.
pub type Vector = Vec<Scalar>;

pub fn zeros(n: usize) -> Vector {
    vec![Scalar::zero(); n]
}

pub fn unit_vector(n: usize, k: usize) -> Vector {
    let mut v = zeros(n);
    v[k] = Scalar::one();
    v
}

/// Builds a vector from integer entries.
pub fn ivec(values: &[i64]) -> Vector {
    values.iter().map(|&v| Scalar::from_integer(v)).collect()
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Scalar], s: &Scalar) -> Vector {
    a.iter().map(|x| x * s).collect()
}

pub fn neg(a: &[Scalar]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero(a: &[Scalar]) -> bool {
    a.iter().all(Scalar::is_zero)
}

/// `sum_k weights[k] * vectors[k]`.
pub fn combine(weights: &[Scalar], vectors: &[Vector], dim: usize) -> Vector {
    let mut out = zeros(dim);
    for (w, v) in weights.iter().zip(vectors) {
        if w.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    out
}

/// Positive rescaling to a primitive integer vector (integral entries with
/// gcd 1). Direction is preserved; the zero vector is returned unchanged.
pub fn primitive(v: &[Scalar]) -> Vector {
    match content_scale(v) {
        Some(s) => scale(v, &s),
        None => v.to_vec(),
    }
}

pub fn fmt_vector(v: &[Scalar]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vector]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix { rows: rows.len(), cols, data: rows.iter().flatten().cloned().collect() }
    }

    pub fn from_columns(cols: &[Vector]) -> Self {
        Matrix::from_rows(cols).transpose()
    }

    /// Interprets `flat` as a `rows x cols` row-major matrix.
    pub fn from_flat(rows: usize, cols: usize, flat: Vector) -> Self {
        assert_eq!(flat.len(), rows * cols);
        Matrix { rows, cols, data: flat }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_flat(&self) -> &[Scalar] {
        &self.data
    }

    pub fn into_flat(self) -> Vector {
        self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `v^T * self`.
    pub fn vec_mul(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.rows);
        let mut out = zeros(self.cols);
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(self.row(i)) {
                *o += vi * x;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    /// Outer product `a b^T`.
    pub fn outer(a: &[Scalar], b: &[Scalar]) -> Matrix {
        let mut data = Vec::with_capacity(a.len() * b.len());
        for x in a {
            for y in b {
                data.push(x * y);
            }
        }
        Matrix { rows: a.len(), cols: b.len(), data }
    }

    /// Entrywise (Frobenius) pairing `sum_ij a_ij b_ij`.
    pub fn frobenius(&self, other: &Matrix) -> Scalar {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        dot(&self.data, &other.data)
    }

    pub fn rank(&self) -> usize {
        rank(&self.row_vectors())
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug: Vec<Vector> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend(unit_vector(n, i));
                r
            })
            .collect();
        let pivots = rref_in_place(&mut aug, n);
        if pivots.len() < n {
            return None;
        }
        let rows: Vec<Vector> = aug.into_iter().map(|r| r[n..].to_vec()).collect();
        Some(Matrix::from_rows(&rows))
    }

    /// Unique solution of `self * x = b`, if the matrix is square and invertible.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vector> {
        self.inverse().map(|inv| inv.mul_vec(b))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {}", fmt_vector(self.row(i)))?;
        }
        write!(f, "]")
    }
}

/// Reduces `rows` to reduced row echelon form, considering only the first
/// `pivot_cols` columns for pivots. Returns the pivot columns in order.
pub fn rref_in_place(rows: &mut [Vector], pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vector]) -> usize {
    let Some(width) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut work = rows.to_vec();
    rref_in_place(&mut work, width).len()
}

/// Indices of the first maximal linearly independent subsequence, scanning
/// in order (greedy).
pub fn independent_prefix(vectors: &[Vector]) -> Vec<usize> {
    let mut chosen = Vec::new();
    let mut basis: Vec<Vector> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if rank(&trial) == trial.len() {
            basis.push(v.clone());
            chosen.push(i);
        }
    }
    chosen
}

/// Basis of `{x : rows * x = 0}` in canonical (RREF free-variable) form.
pub fn nullspace(rows: &[Vector], dim: usize) -> Vec<Vector> {
    let mut work: Vec<Vector> = rows.to_vec();
    let pivots = rref_in_place(&mut work, dim);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = zeros(dim);
            v[f] = Scalar::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -&work[r][f];
            }
            v
        })
        .collect()
}

/// Coefficients `c` with `sum_k c_k basis[k] = target`, if the target lies in
/// the span. The representation is unique when `basis` is independent.
pub fn express_in(basis: &[Vector], target: &[Scalar]) -> Option<Vector> {
    let k = basis.len();
    let dim = target.len();
    // Augmented system: columns are basis vectors, last column the target.
    let mut rows: Vec<Vector> = (0..dim)
        .map(|i| {
            let mut r: Vector = basis.iter().map(|b| b[i].clone()).collect();
            r.push(target[i].clone());
            r
        })
        .collect();
    let pivots = rref_in_place(&mut rows, k);
    if rows.iter().skip(pivots.len()).any(|r| !r[k].is_zero()) {
        return None;
    }
    let mut coeffs = zeros(k);
    for (r, &p) in pivots.iter().enumerate() {
        coeffs[p] = rows[r][k].clone();
    }
    Some(coeffs)
}
