//! Exact polyhedral geometry: cones, polytopes, membership oracles,
//! representation conversion and intersections of shifted bodies.

mod body;
mod cone;
pub mod dd;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{dot, Vector};
use crate::lp::Farkas;
use crate::scalar::Scalar;

pub use body::{intersect_shifted, intersection_program, AffineHalfspace, ConvexBody, Shifted, Sign};
pub use cone::{dual_cone, Cone};
pub use dd::{hrep_to_vrep, vrep_to_hrep, CancelToken, DdOptions, Generators};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("conversion cancelled")]
    Cancelled,
    #[error("conversion exceeded {0} intermediate rays")]
    TooManyRays(usize),
}

/// A point inside the queried set together with the non-negative weights
/// that produce it from each participating generator or vertex list.
/// `weights` is empty when membership was decided from halfspaces alone.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vector,
    pub weights: Vec<Vector>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `normal·z + offset >= 0` on the whole set and `< 0` at the query point.
    Separation { normal: Vector, offset: Scalar },
    /// Farkas multipliers for the feasibility program built by
    /// [`intersection_program`].
    Farkas { multipliers: Vector },
}

impl Certificate {
    pub(crate) fn from_farkas(f: Farkas) -> Self {
        Certificate::Farkas { multipliers: f.multipliers }
    }

    /// Value of a separating functional at `z`; `None` for Farkas certificates.
    pub fn evaluate(&self, z: &[Scalar]) -> Option<Scalar> {
        match self {
            Certificate::Separation { normal, offset } => Some(dot(normal, z) + offset),
            Certificate::Farkas { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Feasibility {
    Feasible(Witness),
    Infeasible(Certificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Feasibility::Feasible(w) => Some(w),
            Feasibility::Infeasible(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Feasibility::Feasible(_) => None,
            Feasibility::Infeasible(c) => Some(c),
        }
    }
}

pub(crate) fn check_dim(expected: usize, v: &[Scalar]) -> Result<(), GeometryError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, found: v.len() })
    }
}
