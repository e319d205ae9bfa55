use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, neg, Matrix, Vector};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::scalar::Scalar;

use super::dd::{hrep_to_vrep, vrep_to_hrep, DdOptions};
use super::{check_dim, Certificate, Feasibility, GeometryError, Witness};

/// `normal·x + offset >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineHalfspace {
    pub normal: Vector,
    pub offset: Scalar,
}

impl AffineHalfspace {
    pub fn value(&self, x: &[Scalar]) -> Scalar {
        dot(&self.normal, x) + &self.offset
    }
}

/// Convex hull of finitely many points, stored by its vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvexBody {
    dim: usize,
    vertices: Vec<Vector>,
}

fn hull_lp(points: &[&Vector], dim: usize, x: &[Scalar]) -> LinearProgram {
    let mut lp = LinearProgram::new(points.len());
    for d in 0..dim {
        lp.add(points.iter().map(|p| p[d].clone()).collect(), Relation::Eq, x[d].clone());
    }
    lp.add(vec![Scalar::one(); points.len()], Relation::Eq, Scalar::one());
    lp
}

impl ConvexBody {
    /// Convex hull of `points`; duplicates and non-extremal points are
    /// dropped, survivors keep their input order.
    pub fn hull(dim: usize, points: &[Vector]) -> Result<Self, GeometryError> {
        let mut distinct: Vec<Vector> = Vec::with_capacity(points.len());
        for p in points {
            check_dim(dim, p)?;
            if !distinct.contains(p) {
                distinct.push(p.clone());
            }
        }
        let keep: Vec<bool> = (0..distinct.len())
            .into_par_iter()
            .map(|i| {
                let others: Vec<&Vector> = distinct.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).collect();
                !hull_lp(&others, dim, &distinct[i]).feasible().is_feasible()
            })
            .collect();
        let vertices = distinct.into_iter().zip(keep).filter(|(_, k)| *k).map(|(v, _)| v).collect();
        Ok(ConvexBody { dim, vertices })
    }

    /// Trusts the caller that `vertices` are distinct and extremal.
    pub fn from_vertices_unchecked(dim: usize, vertices: Vec<Vector>) -> Self {
        ConvexBody { dim, vertices }
    }

    pub fn empty(dim: usize) -> Self {
        ConvexBody { dim, vertices: Vec::new() }
    }

    /// Vertices of the bounded polyhedron `{x : normal·x + offset >= 0}`.
    /// Empty or unbounded regions are rejected.
    pub fn from_halfspaces(dim: usize, halfspaces: &[AffineHalfspace], opts: &DdOptions) -> Result<Self, GeometryError> {
        let mut rows: Vec<Vector> = Vec::with_capacity(halfspaces.len() + 1);
        for h in halfspaces {
            check_dim(dim, &h.normal)?;
            let mut r = h.normal.clone();
            r.push(h.offset.clone());
            rows.push(r);
        }
        rows.push(crate::linalg::unit_vector(dim + 1, dim));
        let g = hrep_to_vrep(dim + 1, &rows, opts)?;
        if !g.lineality.is_empty() || g.rays.iter().any(|r| r[dim].is_zero()) {
            return Err(GeometryError::DegenerateInput("halfspaces describe an unbounded region".into()));
        }
        if g.rays.is_empty() {
            return Err(GeometryError::DegenerateInput("halfspaces describe an empty region".into()));
        }
        let vertices = g
            .rays
            .iter()
            .map(|r| {
                let t = r[dim].recip();
                r[..dim].iter().map(|x| x * &t).collect()
            })
            .collect();
        Ok(ConvexBody { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Irredundant facet description. Implicit equations appear as a pair of
    /// opposite halfspaces; an empty body yields the single halfspace `-1 >= 0`.
    pub fn facets(&self) -> Result<Vec<AffineHalfspace>, GeometryError> {
        self.facets_with(&DdOptions::default())
    }

    pub fn facets_with(&self, opts: &DdOptions) -> Result<Vec<AffineHalfspace>, GeometryError> {
        if self.vertices.is_empty() {
            return Ok(vec![AffineHalfspace { normal: crate::linalg::zeros(self.dim), offset: Scalar::from_integer(-1) }]);
        }
        let lifted: Vec<Vector> = self
            .vertices
            .iter()
            .map(|v| {
                let mut r = v.clone();
                r.push(Scalar::one());
                r
            })
            .collect();
        let hs = vrep_to_hrep(self.dim + 1, &lifted, opts)?;
        Ok(hs
            .into_iter()
            .map(|mut h| {
                let offset = h.pop().expect("lifted dimension");
                AffineHalfspace { normal: h, offset }
            })
            .collect())
    }

    pub fn contains(&self, x: &[Scalar]) -> Result<bool, GeometryError> {
        Ok(self.member(x)?.is_feasible())
    }

    /// Membership with convex weights over the vertices, or a separating
    /// affine functional.
    pub fn member(&self, x: &[Scalar]) -> Result<Feasibility, GeometryError> {
        check_dim(self.dim, x)?;
        let refs: Vec<&Vector> = self.vertices.iter().collect();
        let lp = hull_lp(&refs, self.dim, x);
        Ok(match lp.feasible() {
            LpOutcome::Optimal { x: w, .. } => Feasibility::Feasible(Witness { point: x.to_vec(), weights: vec![w] }),
            LpOutcome::Infeasible(f) => {
                let mut y = f.multipliers;
                let y0 = y.pop().expect("normalization row");
                Feasibility::Infeasible(Certificate::Separation { normal: neg(&y), offset: -y0 })
            }
            LpOutcome::Unbounded { .. } => unreachable!("feasibility problems have no objective"),
        })
    }

    pub fn same_set(&self, other: &ConvexBody) -> Result<bool, GeometryError> {
        for v in &other.vertices {
            if !self.contains(v)? {
                return Ok(false);
            }
        }
        for v in &self.vertices {
            if !other.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Maximum of `functional·x` over the body with the first maximizing vertex.
    pub fn maximize(&self, functional: &[Scalar]) -> Option<(Scalar, usize)> {
        let mut best: Option<(Scalar, usize)> = None;
        for (i, v) in self.vertices.iter().enumerate() {
            let val = dot(functional, v);
            if best.as_ref().is_none_or(|(b, _)| val > *b) {
                best = Some((val, i));
            }
        }
        best
    }

    pub fn minimize(&self, functional: &[Scalar]) -> Option<(Scalar, usize)> {
        let negated = neg(functional);
        self.maximize(&negated).map(|(v, i)| (-v, i))
    }

    /// Image under `x -> map * x`, reduced to its vertices.
    pub fn project(&self, map: &Matrix) -> Result<ConvexBody, GeometryError> {
        if map.cols() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, found: map.cols() });
        }
        let images: Vec<Vector> = self.vertices.iter().map(|v| map.mul_vec(v)).collect();
        ConvexBody::hull(map.rows(), &images)
    }

    /// `shift + sign * self` as an explicit body.
    pub fn shifted(&self, shift: &[Scalar], sign: Sign) -> ConvexBody {
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(shift).map(|(x, s)| s + &sign.apply(x)).collect())
            .collect();
        ConvexBody { dim: self.dim, vertices }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn apply(self, x: &Scalar) -> Scalar {
        match self {
            Sign::Plus => x.clone(),
            Sign::Minus => -x,
        }
    }
}

/// The set `shift + sign * body`.
#[derive(Clone, Copy, Debug)]
pub struct Shifted<'a> {
    pub body: &'a ConvexBody,
    pub shift: &'a [Scalar],
    pub sign: Sign,
}

/// Feasibility program behind [`intersect_shifted`]. Variables are the common
/// point `x` (free, first `dim` entries) followed by convex weights for each
/// set in turn.
pub fn intersection_program(dim: usize, sets: &[Shifted<'_>]) -> Result<LinearProgram, GeometryError> {
    let total: usize = dim + sets.iter().map(|s| s.body.vertices.len()).sum::<usize>();
    let mut lp = LinearProgram::new(total);
    lp.set_free_range(0..dim);
    let mut offset = dim;
    for s in sets {
        if s.body.dim != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: s.body.dim });
        }
        check_dim(dim, s.shift)?;
        let k = s.body.vertices.len();
        for d in 0..dim {
            let mut row = vec![Scalar::zero(); total];
            row[d] = Scalar::one();
            for (j, v) in s.body.vertices.iter().enumerate() {
                row[offset + j] = -s.sign.apply(&v[d]);
            }
            lp.add(row, Relation::Eq, s.shift[d].clone());
        }
        let mut norm = vec![Scalar::zero(); total];
        for w in &mut norm[offset..offset + k] {
            *w = Scalar::one();
        }
        lp.add(norm, Relation::Eq, Scalar::one());
        offset += k;
    }
    Ok(lp)
}

/// Decides whether `∩_k (shift_k + sign_k * body_k)` is non-empty. The
/// returned point is the lexicographically smallest one in the intersection.
pub fn intersect_shifted(dim: usize, sets: &[Shifted<'_>]) -> Result<Feasibility, GeometryError> {
    let lp = intersection_program(dim, sets)?;
    let order: Vec<usize> = (0..dim).collect();
    Ok(match lp.lex_min(&order) {
        LpOutcome::Optimal { x, .. } => {
            let mut weights = Vec::with_capacity(sets.len());
            let mut offset = dim;
            for s in sets {
                let k = s.body.vertices.len();
                weights.push(x[offset..offset + k].to_vec());
                offset += k;
            }
            Feasibility::Feasible(Witness { point: x[..dim].to_vec(), weights })
        }
        LpOutcome::Infeasible(f) => Feasibility::Infeasible(Certificate::from_farkas(f)),
        LpOutcome::Unbounded { .. } => unreachable!("the point is pinned by the weights"),
    })
}
