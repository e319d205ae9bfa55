//! Double description conversion between halfspace and generator
//! representations of polyhedral cones.
//!
//! The cone `{x : a·x >= 0 for every row a}` is split into its lineality
//! space (the common kernel of the rows) and a pointed part living in the row
//! space. The pointed part starts from the simplicial cone cut out by the
//! first maximal independent set of rows and absorbs the remaining rows one
//! at a time in input order. Adjacency of rays is decided combinatorially from
//! their zero sets. Output rays are primitive integer vectors in
//! lexicographic order.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::linalg::{dot, independent_prefix, nullspace, primitive, scale, Matrix, Vector};
use crate::scalar::Scalar;

use super::GeometryError;

/// Cooperative cancellation flag shared between a caller and a running conversion.
#[derive(Clone, Debug, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Clone, Debug)]
pub struct DdOptions {
    pub cancel: Option<CancelToken>,
    /// Abort once the intermediate ray list grows beyond this size.
    pub max_rays: usize,
}

impl Default for DdOptions {
    fn default() -> Self {
        DdOptions { cancel: None, max_rays: 100_000 }
    }
}

/// Generator description `span(lineality) + cone(rays)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generators {
    pub rays: Vec<Vector>,
    pub lineality: Vec<Vector>,
}

impl Generators {
    /// Rays plus both orientations of every lineality direction.
    pub fn into_conic_generators(self) -> Vec<Vector> {
        let mut out = self.rays;
        for l in self.lineality {
            out.push(l.iter().map(|x| -x).collect());
            out.push(l);
        }
        out.sort();
        out
    }
}

#[derive(Clone)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(bits: usize) -> Self {
        BitSet(vec![0; bits.div_ceil(64).max(1)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn intersection(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn is_subset(&self, other: &BitSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

struct Ray {
    v: Vector,
    zeros: BitSet,
}

fn check_cancel(opts: &DdOptions) -> Result<(), GeometryError> {
    match &opts.cancel {
        Some(c) if c.is_cancelled() => Err(GeometryError::Cancelled),
        _ => Ok(()),
    }
}

/// Generators of `{x in R^dim : a·x >= 0 for every a in halfspaces}`.
pub fn hrep_to_vrep(
    dim: usize,
    halfspaces: &[Vector],
    opts: &DdOptions,
) -> Result<Generators, GeometryError> {
    for h in halfspaces {
        if h.len() != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: h.len() });
        }
    }
    let rows: Vec<Vector> = halfspaces.iter().filter(|h| h.iter().any(|x| !x.is_zero())).cloned().collect();
    let lineality: Vec<Vector> = {
        let mut l: Vec<Vector> = nullspace(&rows, dim).iter().map(|v| primitive(v)).collect();
        l.sort();
        l
    };
    if rows.is_empty() {
        return Ok(Generators { rays: Vec::new(), lineality });
    }

    let basis_rows = independent_prefix(&rows);
    let k = basis_rows.len();
    let mut order = basis_rows.clone();
    order.extend((0..rows.len()).filter(|i| !basis_rows.contains(i)));

    // Initial simplicial cone: r_i in the row space with a_s·r_i = delta_si.
    let a_s = Matrix::from_rows(&basis_rows.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>());
    let gram = a_s.matmul(&a_s.transpose());
    let gram_inv = gram.inverse().expect("independent rows have invertible Gram matrix");
    let mut rays: Vec<Ray> = (0..k)
        .map(|i| {
            let coeffs = gram_inv.column(i);
            let v = primitive(&a_s.vec_mul(&coeffs));
            let mut zeros = BitSet::new(rows.len());
            for (pos, _) in basis_rows.iter().enumerate().filter(|&(p, _)| p != i) {
                zeros.insert(pos);
            }
            Ray { v, zeros }
        })
        .collect();

    for (pos, &row_idx) in order.iter().enumerate().skip(k) {
        check_cancel(opts)?;
        let a = &rows[row_idx];
        let values: Vec<Scalar> = rays.iter().map(|r| dot(a, &r.v)).collect();
        if values.iter().all(|v| !v.is_negative()) {
            for (r, v) in rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    r.zeros.insert(pos);
                }
            }
            continue;
        }
        let positive: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let negative: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();

        let mut created = Vec::new();
        for &p in &positive {
            for &n in &negative {
                let common = rays[p].zeros.intersection(&rays[n].zeros);
                if common.len() + 2 < k {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(i, r)| i != p && i != n && common.is_subset(&r.zeros));
                if blocked {
                    continue;
                }
                let mut v = scale(&rays[n].v, &values[p]);
                for (x, y) in v.iter_mut().zip(&rays[p].v) {
                    *x -= &values[n] * y;
                }
                let mut zeros = common;
                zeros.insert(pos);
                created.push(Ray { v: primitive(&v), zeros });
            }
        }

        let mut next = Vec::with_capacity(rays.len() + created.len());
        for (r, v) in rays.into_iter().zip(values) {
            if v.is_negative() {
                continue;
            }
            let mut r = r;
            if v.is_zero() {
                r.zeros.insert(pos);
            }
            next.push(r);
        }
        next.extend(created);
        if next.len() > opts.max_rays {
            return Err(GeometryError::TooManyRays(opts.max_rays));
        }
        rays = next;
    }

    let mut out: Vec<Vector> = rays.into_iter().map(|r| r.v).collect();
    out.sort();
    out.dedup();
    Ok(Generators { rays: out, lineality })
}

/// Irredundant halfspace normals `a` (with `a·x >= 0`) describing `cone(generators)`.
/// Implicit equations appear as a pair `a`, `-a`.
pub fn vrep_to_hrep(
    dim: usize,
    generators: &[Vector],
    opts: &DdOptions,
) -> Result<Vec<Vector>, GeometryError> {
    Ok(hrep_to_vrep(dim, generators, opts)?.into_conic_generators())
}
