//! JSON documents exchanged with the command-line tool.
//!
//! Scalars are written as `"p/q"` strings; decimals are accepted on input.
//! Joint states and joint cone elements are `n × m` matrices written as a
//! list of rows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::BellError;
use crate::compose::{explicit_tensor, ComposeError, JointSystem, NestingReport, TensorRule};
use crate::geometry::{Cone, DdOptions};
use crate::linalg::{Matrix, Vector};
use crate::theory::{GptSystem, Measurement, SystemSpec, TheoryError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("matrix rows have unequal lengths")]
    RaggedMatrix,
    #[error("explicit rule needs state generators or halfspaces")]
    MissingCone,
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Bell(#[from] BellError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, IoError> {
    Ok(serde_json::from_str(text)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn matrix_from_rows(rows: &[Vector]) -> Result<Matrix, IoError> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(IoError::RaggedMatrix);
    }
    Ok(Matrix::from_rows(rows))
}

fn as_matrices(flat: &[Vector], rows: usize, cols: usize) -> Vec<Vec<Vector>> {
    flat.iter().map(|v| Matrix::from_flat(rows, cols, v.clone()).row_vectors()).collect()
}

fn flatten_all(ms: &[Vec<Vector>], shape: (usize, usize)) -> Result<Vec<Vector>, IoError> {
    ms.iter()
        .map(|rows| {
            let m = matrix_from_rows(rows)?;
            if (m.rows(), m.cols()) != shape {
                return Err(IoError::Compose(ComposeError::DimensionMismatch {
                    expected: format!("{}x{}", shape.0, shape.1),
                    found: format!("{}x{}", m.rows(), m.cols()),
                }));
            }
            Ok(m.into_flat())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointSystemDoc {
    pub left: SystemSpec,
    pub right: SystemSpec,
    pub rule: TensorRule,
    pub shape: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_generators: Option<Vec<Vec<Vector>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_halfspaces: Option<Vec<Vec<Vector>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nesting: Option<NestingReport>,
}

impl JointSystemDoc {
    /// Records whichever cone representations are already known. With
    /// `enumerate`, extremal rays are computed when `n·m` is within `limit`.
    pub fn from_joint(sys: &JointSystem, enumerate: Option<(usize, &DdOptions)>, nesting: bool) -> Result<Self, IoError> {
        let (n, m) = sys.shape();
        let cone = sys.state_cone();
        let mut generators = cone.known_generators().map(|g| as_matrices(g, n, m));
        if generators.is_none() {
            if let Some((limit, opts)) = enumerate {
                generators = Some(sys.state_vertices(limit, opts)?.iter().map(Matrix::row_vectors).collect());
            }
        }
        Ok(JointSystemDoc {
            left: sys.left().to_spec(),
            right: sys.right().to_spec(),
            rule: sys.rule(),
            shape: [n, m],
            state_generators: generators,
            state_halfspaces: cone.known_halfspaces().map(|h| as_matrices(h, n, m)),
            nesting: if nesting { Some(sys.nesting()?) } else { None },
        })
    }

    /// Rebuilds the joint system. The named rules are recomputed from the
    /// subsystems; an explicit rule uses the stored representation.
    pub fn to_joint(&self) -> Result<JointSystem, IoError> {
        let left = GptSystem::from_spec(&self.left)?;
        let right = GptSystem::from_spec(&self.right)?;
        if self.rule != TensorRule::Explicit {
            return Ok(JointSystem::compose(&left, &right, self.rule)?);
        }
        let shape = (left.dim(), right.dim());
        let dim = shape.0 * shape.1;
        let gens = self.state_generators.as_ref().map(|g| flatten_all(g, shape)).transpose()?;
        let hs = self.state_halfspaces.as_ref().map(|h| flatten_all(h, shape)).transpose()?;
        let cone = match (gens, hs) {
            (Some(g), Some(h)) => Cone::from_both(dim, &g, &h),
            (Some(g), None) => Cone::from_generators(dim, &g),
            (None, Some(h)) => Cone::from_halfspaces(dim, &h),
            (None, None) => return Err(IoError::MissingCone),
        }
        .map_err(ComposeError::from)?;
        Ok(explicit_tensor(&left, &right, cone)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointStateDoc {
    pub coords: Vec<Vector>,
}

impl JointStateDoc {
    pub fn new(w: &Matrix) -> Self {
        JointStateDoc { coords: w.row_vectors() }
    }

    pub fn matrix(&self) -> Result<Matrix, IoError> {
        matrix_from_rows(&self.coords)
    }
}

/// Two binary measurements per party, each a pair of effects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementsDoc {
    pub alice: [Vec<Vector>; 2],
    pub bob: [Vec<Vector>; 2],
}

impl MeasurementsDoc {
    pub fn new(alice: &[Measurement; 2], bob: &[Measurement; 2]) -> Self {
        MeasurementsDoc {
            alice: [alice[0].effects.clone(), alice[1].effects.clone()],
            bob: [bob[0].effects.clone(), bob[1].effects.clone()],
        }
    }

    pub fn settings(&self) -> ([Measurement; 2], [Measurement; 2]) {
        let m = |e: &Vec<Vector>| Measurement { effects: e.clone(), complete: true };
        ([m(&self.alice[0]), m(&self.alice[1])], [m(&self.bob[0]), m(&self.bob[1])])
    }
}
