use std::sync::OnceLock;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::linalg::{dot, neg, primitive, Matrix, Vector};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::scalar::Scalar;

use super::dd::{hrep_to_vrep, vrep_to_hrep, DdOptions};
use super::{check_dim, Certificate, Feasibility, GeometryError, Witness};

/// Polyhedral cone held in generator form, halfspace form (`a·x >= 0`), or
/// both. A missing representation is computed on first use and cached.
#[derive(Clone, Debug)]
pub struct Cone {
    dim: usize,
    generators: OnceLock<Vec<Vector>>,
    halfspaces: OnceLock<Vec<Vector>>,
}

fn canonical_rays(dim: usize, vectors: &[Vector]) -> Result<Vec<Vector>, GeometryError> {
    let mut out = Vec::with_capacity(vectors.len());
    for v in vectors {
        check_dim(dim, v)?;
        if v.iter().any(|x| !x.is_zero()) {
            out.push(primitive(v));
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|v| seen.insert(v.clone()));
    Ok(out)
}

impl Cone {
    pub fn from_generators(dim: usize, generators: &[Vector]) -> Result<Self, GeometryError> {
        let gens = canonical_rays(dim, generators)?;
        Ok(Cone { dim, generators: OnceLock::from(gens), halfspaces: OnceLock::new() })
    }

    pub fn from_halfspaces(dim: usize, halfspaces: &[Vector]) -> Result<Self, GeometryError> {
        let hs = canonical_rays(dim, halfspaces)?;
        Ok(Cone { dim, generators: OnceLock::new(), halfspaces: OnceLock::from(hs) })
    }

    /// Both representations supplied by the caller; no consistency check is made
    /// here (see [`Cone::representations_agree`]).
    pub fn from_both(dim: usize, generators: &[Vector], halfspaces: &[Vector]) -> Result<Self, GeometryError> {
        let gens = canonical_rays(dim, generators)?;
        let hs = canonical_rays(dim, halfspaces)?;
        Ok(Cone { dim, generators: OnceLock::from(gens), halfspaces: OnceLock::from(hs) })
    }

    pub fn orthant(dim: usize) -> Self {
        let unit: Vec<Vector> = (0..dim).map(|i| crate::linalg::unit_vector(dim, i)).collect();
        Cone::from_both(dim, &unit, &unit).expect("unit vectors have the right length")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn known_generators(&self) -> Option<&[Vector]> {
        self.generators.get().map(Vec::as_slice)
    }

    pub fn known_halfspaces(&self) -> Option<&[Vector]> {
        self.halfspaces.get().map(Vec::as_slice)
    }

    pub fn generators(&self) -> Result<&[Vector], GeometryError> {
        self.generators_with(&DdOptions::default())
    }

    pub fn generators_with(&self, opts: &DdOptions) -> Result<&[Vector], GeometryError> {
        if let Some(g) = self.generators.get() {
            return Ok(g);
        }
        let hs = self.halfspaces.get().expect("a cone always holds one representation");
        let gens = hrep_to_vrep(self.dim, hs, opts)?.into_conic_generators();
        Ok(self.generators.get_or_init(|| gens))
    }

    pub fn halfspaces(&self) -> Result<&[Vector], GeometryError> {
        self.halfspaces_with(&DdOptions::default())
    }

    pub fn halfspaces_with(&self, opts: &DdOptions) -> Result<&[Vector], GeometryError> {
        if let Some(h) = self.halfspaces.get() {
            return Ok(h);
        }
        let gens = self.generators.get().expect("a cone always holds one representation");
        let hs = vrep_to_hrep(self.dim, gens, opts)?;
        Ok(self.halfspaces.get_or_init(|| hs))
    }

    /// Exact membership test. Uses halfspaces when they are already known,
    /// otherwise a conic-combination LP over the generators.
    pub fn contains(&self, x: &[Scalar]) -> Result<bool, GeometryError> {
        check_dim(self.dim, x)?;
        if let Some(hs) = self.halfspaces.get() {
            return Ok(hs.iter().all(|a| !dot(a, x).is_negative()));
        }
        Ok(self.member(x)?.is_feasible())
    }

    /// Membership with a witness (conic weights over the generators) or a
    /// separating functional `normal` with `normal·g >= 0` on every
    /// generator and `normal·x < 0`.
    pub fn member(&self, x: &[Scalar]) -> Result<Feasibility, GeometryError> {
        check_dim(self.dim, x)?;
        let Some(gens) = self.generators.get() else {
            let hs = self.halfspaces.get().expect("a cone always holds one representation");
            return Ok(match hs.iter().find(|a| dot(a, x).is_negative()) {
                Some(a) => Feasibility::Infeasible(Certificate::Separation { normal: a.clone(), offset: Scalar::zero() }),
                None => Feasibility::Feasible(Witness { point: x.to_vec(), weights: Vec::new() }),
            });
        };
        let mut lp = LinearProgram::new(gens.len());
        for d in 0..self.dim {
            lp.add(gens.iter().map(|g| g[d].clone()).collect(), Relation::Eq, x[d].clone());
        }
        Ok(match lp.feasible() {
            LpOutcome::Optimal { x: w, .. } => Feasibility::Feasible(Witness { point: x.to_vec(), weights: vec![w] }),
            LpOutcome::Infeasible(f) => Feasibility::Infeasible(Certificate::Separation {
                normal: neg(&f.multipliers),
                offset: Scalar::zero(),
            }),
            LpOutcome::Unbounded { .. } => unreachable!("feasibility problems have no objective"),
        })
    }

    /// `{y : y·x >= 0 for all x in self}`.
    pub fn dual(&self) -> Cone {
        let gens = self.generators.get().cloned();
        let hs = self.halfspaces.get().cloned();
        Cone {
            dim: self.dim,
            generators: hs.map(OnceLock::from).unwrap_or_default(),
            halfspaces: gens.map(OnceLock::from).unwrap_or_default(),
        }
    }

    /// True when every generator of `other` lies in `self`.
    pub fn contains_cone(&self, other: &Cone) -> Result<bool, GeometryError> {
        check_dim_eq(self.dim, other.dim)?;
        for g in other.generators()? {
            if !self.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn same_set(&self, other: &Cone) -> Result<bool, GeometryError> {
        Ok(self.contains_cone(other)? && other.contains_cone(self)?)
    }

    /// Whether the stored generator and halfspace lists describe the same cone.
    pub fn representations_agree(&self) -> Result<bool, GeometryError> {
        let (Some(gens), Some(hs)) = (self.generators.get(), self.halfspaces.get()) else {
            return Ok(true);
        };
        if gens.iter().any(|g| hs.iter().any(|a| dot(a, g).is_negative())) {
            return Ok(false);
        }
        let from_gens = Cone::from_generators(self.dim, gens)?;
        let from_hs = Cone::from_halfspaces(self.dim, hs)?;
        from_gens.same_set(&from_hs)
    }

    /// The same cone with every redundant generator removed.
    pub fn irredundant(&self) -> Result<Cone, GeometryError> {
        let mut gens: Vec<Vector> = self.generators()?.to_vec();
        let mut i = 0;
        while i < gens.len() {
            let candidate = gens.remove(i);
            let rest = Cone::from_generators(self.dim, &gens)?;
            if rest.member(&candidate)?.is_feasible() {
                continue;
            }
            gens.insert(i, candidate);
            i += 1;
        }
        let mut out = Cone::from_generators(self.dim, &gens)?;
        if let Some(h) = self.halfspaces.get() {
            out.halfspaces = OnceLock::from(h.clone());
        }
        Ok(out)
    }

    /// Image under the linear map `x -> map * x`, in irredundant form.
    pub fn project(&self, map: &Matrix) -> Result<Cone, GeometryError> {
        check_dim_eq(self.dim, map.cols())?;
        let images: Vec<Vector> = self.generators()?.iter().map(|g| map.mul_vec(g)).collect();
        Cone::from_generators(map.rows(), &images)?.irredundant()
    }
}

/// `{e : e·x >= 0 for every x in c}`.
pub fn dual_cone(c: &Cone) -> Cone {
    c.dual()
}

fn check_dim_eq(expected: usize, found: usize) -> Result<(), GeometryError> {
    if expected == found {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, found })
    }
}

impl Serialize for Cone {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Cone", 3)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("generators", &self.generators.get())?;
        st.serialize_field("halfspaces", &self.halfspaces.get())?;
        st.end()
    }
}
