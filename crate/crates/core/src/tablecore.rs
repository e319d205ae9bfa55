//! Probability tables: ingestion, reduction to equivalence classes, convex
//! redundancy, rank and coordinate representation in conjugate bases.
//!
//! Tables are stored effect-major: `entries[i][j] = e_i(ω_j)`. The CSV layout
//! follows the usual printed form with one state per line and one effect per
//! column, so reading and writing transposes.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, express_in, independent_prefix, rank, Matrix, Vector};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("table has no rows or no columns")]
    EmptyTable,
    #[error("line {line}: expected {expected} cells, found {found}")]
    Shape { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("entry for effect {effect:?} on state {state:?} is {value}, outside [0, 1]")]
    OutOfRange { effect: String, state: String, value: Scalar },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("selected states do not determine a conjugate basis")]
    SingularSystem,
    #[error("csv: {0}")]
    Csv(String),
}

/// Table as measured: one row per effect (1-bit measurement), one column per
/// state (preparation).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTable {
    pub effect_labels: Vec<String>,
    pub state_labels: Vec<String>,
    pub entries: Vec<Vec<Scalar>>,
}

impl RawTable {
    pub fn new(effect_labels: Vec<String>, state_labels: Vec<String>, entries: Vec<Vec<Scalar>>) -> Result<Self, TableError> {
        if entries.len() != effect_labels.len() {
            return Err(TableError::DimensionMismatch { left: entries.len(), right: effect_labels.len() });
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != state_labels.len() {
                return Err(TableError::Shape { line: i + 1, expected: state_labels.len(), found: row.len() });
            }
            for (j, p) in row.iter().enumerate() {
                if p.is_negative() || *p > Scalar::one() {
                    return Err(TableError::OutOfRange {
                        effect: effect_labels[i].clone(),
                        state: state_labels[j].clone(),
                        value: p.clone(),
                    });
                }
            }
        }
        Ok(RawTable { effect_labels, state_labels, entries })
    }

    pub fn from_csv_str(text: &str) -> Result<Self, TableError> {
        Self::from_csv_reader(text.as_bytes())
    }

    /// First line: a corner cell followed by effect labels. Every further
    /// line: a state label followed by `e(ω)` for each effect, written as
    /// `p/q`, an integer or a decimal.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, TableError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(r) => r.map_err(|e| TableError::Csv(e.to_string()))?,
            None => return Err(TableError::EmptyTable),
        };
        let effect_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let width = header.len();
        let mut state_labels = Vec::new();
        let mut by_state: Vec<Vec<Scalar>> = Vec::new();
        for rec in records {
            let rec = rec.map_err(|e| TableError::Csv(e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != width {
                return Err(TableError::Shape { line, expected: width, found: rec.len() });
            }
            state_labels.push(rec[0].to_string());
            let mut row = Vec::with_capacity(width - 1);
            for (c, cell) in rec.iter().enumerate().skip(1) {
                let v: Scalar = cell.parse().map_err(|e: crate::scalar::ParseScalarError| TableError::Parse {
                    line,
                    column: c + 1,
                    message: e.to_string(),
                })?;
                if v.is_negative() || v > Scalar::one() {
                    return Err(TableError::Parse { line, column: c + 1, message: format!("probability {v} outside [0, 1]") });
                }
                row.push(v);
            }
            by_state.push(row);
        }
        if effect_labels.is_empty() || state_labels.is_empty() {
            return Err(TableError::EmptyTable);
        }
        let entries = (0..effect_labels.len()).map(|i| by_state.iter().map(|r| r[i].clone()).collect()).collect();
        RawTable::new(effect_labels, state_labels, entries)
    }

    pub fn to_csv(&self) -> String {
        write_csv(&self.effect_labels, &self.state_labels, &self.entries)
    }
}

fn write_csv(effects: &[String], states: &[String], entries: &[Vec<Scalar>]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(effects.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (j, s) in states.iter().enumerate() {
        let mut rec = vec![s.clone()];
        rec.extend(entries.iter().map(|row| row[j].to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 labels")
}

/// Table with operationally equivalent rows and columns merged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbTable {
    entries: Vec<Vec<Scalar>>,
    effect_classes: Vec<Vec<String>>,
    state_classes: Vec<Vec<String>>,
    rank: usize,
}

impl ProbTable {
    pub fn entries(&self) -> &[Vec<Scalar>] {
        &self.entries
    }

    pub fn entry(&self, effect: usize, state: usize) -> &Scalar {
        &self.entries[effect][state]
    }

    pub fn num_effects(&self) -> usize {
        self.entries.len()
    }

    pub fn num_states(&self) -> usize {
        self.state_classes.len()
    }

    /// Representative label of each effect class (its first member).
    pub fn effect_labels(&self) -> Vec<String> {
        self.effect_classes.iter().map(|c| c[0].clone()).collect()
    }

    pub fn state_labels(&self) -> Vec<String> {
        self.state_classes.iter().map(|c| c[0].clone()).collect()
    }

    pub fn effect_classes(&self) -> &[Vec<String>] {
        &self.effect_classes
    }

    pub fn state_classes(&self) -> &[Vec<String>] {
        &self.state_classes
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn effect_row(&self, i: usize) -> &[Scalar] {
        &self.entries[i]
    }

    pub fn state_column(&self, j: usize) -> Vector {
        self.entries.iter().map(|r| r[j].clone()).collect()
    }

    /// Copy without the listed effects and states.
    pub fn without(&self, effects: &[usize], states: &[usize]) -> ProbTable {
        let keep_e: Vec<usize> = (0..self.num_effects()).filter(|i| !effects.contains(i)).collect();
        let keep_s: Vec<usize> = (0..self.num_states()).filter(|j| !states.contains(j)).collect();
        let entries: Vec<Vec<Scalar>> =
            keep_e.iter().map(|&i| keep_s.iter().map(|&j| self.entries[i][j].clone()).collect()).collect();
        let rank = rank(&entries);
        ProbTable {
            entries,
            effect_classes: keep_e.iter().map(|&i| self.effect_classes[i].clone()).collect(),
            state_classes: keep_s.iter().map(|&j| self.state_classes[j].clone()).collect(),
            rank,
        }
    }

    /// Drops every element flagged by [`find_convex_redundant`].
    pub fn without_redundant(&self, redundant: &[Redundancy]) -> ProbTable {
        let effects: Vec<usize> = redundant.iter().filter(|r| r.axis == Axis::Effect).map(|r| r.index).collect();
        let states: Vec<usize> = redundant.iter().filter(|r| r.axis == Axis::State).map(|r| r.index).collect();
        self.without(&effects, &states)
    }

    pub fn to_raw(&self) -> RawTable {
        RawTable { effect_labels: self.effect_labels(), state_labels: self.state_labels(), entries: self.entries.clone() }
    }

    pub fn to_csv(&self) -> String {
        write_csv(&self.effect_labels(), &self.state_labels(), &self.entries)
    }
}

/// Merges identical rows and identical columns, keeping first occurrences in
/// input order and recording the labels of every merged class.
pub fn reduce_table(raw: &RawTable) -> Result<ProbTable, TableError> {
    if raw.effect_labels.is_empty() || raw.state_labels.is_empty() {
        return Err(TableError::EmptyTable);
    }
    let columns: Vec<Vector> = (0..raw.state_labels.len()).map(|j| raw.entries.iter().map(|r| r[j].clone()).collect()).collect();
    let (state_keep, state_classes) = classes(&columns, &raw.state_labels);
    let rows: Vec<Vector> = raw.entries.iter().map(|r| state_keep.iter().map(|&j| r[j].clone()).collect()).collect();
    let (effect_keep, effect_classes) = classes(&rows, &raw.effect_labels);
    let entries: Vec<Vec<Scalar>> = effect_keep.iter().map(|&i| rows[i].clone()).collect();
    let rank = rank(&entries);
    Ok(ProbTable { entries, effect_classes, state_classes, rank })
}

fn classes(items: &[Vector], labels: &[String]) -> (Vec<usize>, Vec<Vec<String>>) {
    let mut keep: Vec<usize> = Vec::new();
    let mut groups: Vec<Vec<String>> = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match keep.iter().position(|&k| items[k] == *item) {
            Some(g) => groups[g].push(labels[i].clone()),
            None => {
                keep.push(i);
                groups.push(vec![labels[i].clone()]);
            }
        }
    }
    (keep, groups)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Effect,
    State,
}

/// An element equal to a convex combination of other elements on the same
/// axis. `combination` lists the non-zero weights by index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Redundancy {
    pub axis: Axis,
    pub index: usize,
    pub label: String,
    pub combination: Vec<(usize, Scalar)>,
}

impl Redundancy {
    /// Checks weights are non-negative, sum to one and reproduce the element.
    pub fn verify(&self, table: &ProbTable) -> bool {
        let vectors: Vec<Vector> = match self.axis {
            Axis::Effect => table.entries.clone(),
            Axis::State => (0..table.num_states()).map(|j| table.state_column(j)).collect(),
        };
        let total: Scalar = self.combination.iter().map(|(_, w)| w.clone()).sum();
        if !total.is_one() || self.combination.iter().any(|(k, w)| w.is_negative() || *k == self.index) {
            return false;
        }
        let dim = vectors[self.index].len();
        let mut acc = vec![Scalar::zero(); dim];
        for (k, w) in &self.combination {
            for (a, x) in acc.iter_mut().zip(&vectors[*k]) {
                *a += w * x;
            }
        }
        acc == vectors[self.index]
    }
}

fn convex_certificate(vectors: &[Vector], target: usize) -> Option<Vec<(usize, Scalar)>> {
    let others: Vec<usize> = (0..vectors.len()).filter(|&k| k != target).collect();
    if others.is_empty() {
        return None;
    }
    let dim = vectors[target].len();
    let mut lp = LinearProgram::new(others.len());
    for d in 0..dim {
        lp.add(others.iter().map(|&k| vectors[k][d].clone()).collect(), Relation::Eq, vectors[target][d].clone());
    }
    lp.add(vec![Scalar::one(); others.len()], Relation::Eq, Scalar::one());
    let order: Vec<usize> = (0..others.len()).collect();
    match lp.lex_min(&order) {
        LpOutcome::Optimal { x, .. } => {
            Some(others.iter().zip(x).filter(|(_, w)| !w.is_zero()).map(|(&k, w)| (k, w)).collect())
        }
        _ => None,
    }
}

/// Every effect and every state that is a convex combination of the other
/// elements on its axis, effects first, each with exact weights.
pub fn find_convex_redundant(table: &ProbTable) -> Vec<Redundancy> {
    let effects: Vec<Vector> = table.entries.clone();
    let states: Vec<Vector> = (0..table.num_states()).map(|j| table.state_column(j)).collect();
    let effect_labels = table.effect_labels();
    let state_labels = table.state_labels();
    let jobs: Vec<(Axis, usize)> =
        (0..effects.len()).map(|i| (Axis::Effect, i)).chain((0..states.len()).map(|j| (Axis::State, j))).collect();
    jobs.par_iter()
        .filter_map(|&(axis, index)| {
            let (vectors, labels) = match axis {
                Axis::Effect => (&effects, &effect_labels),
                Axis::State => (&states, &state_labels),
            };
            convex_certificate(vectors, index).map(|combination| Redundancy {
                axis,
                index,
                label: labels[index].clone(),
                combination,
            })
        })
        .collect()
}

pub fn compute_rank(table: &ProbTable) -> usize {
    rank(&table.entries)
}

/// Coordinates of a reduced table in a basis of effects and the conjugate
/// basis of states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordRep {
    pub dim: usize,
    pub effect_labels: Vec<String>,
    pub state_labels: Vec<String>,
    #[serde(rename = "effects")]
    pub effect_coords: Vec<Vector>,
    #[serde(rename = "states")]
    pub state_coords: Vec<Vector>,
    pub basis_effect_indices: Vec<usize>,
    pub basis_state_indices: Vec<usize>,
    /// Row `k` expresses the conjugate basis vector `ω̂_k` as a combination of
    /// the tabled states.
    #[serde(rename = "conjugate_basis")]
    pub conjugate_basis_expansion: Vec<Vector>,
}

/// A linear dependency of one element on the chosen basis elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub index: usize,
    pub coefficients: Vec<(usize, Scalar)>,
}

impl CoordRep {
    /// Each non-basis effect as a combination of the basis effects.
    pub fn effect_dependencies(&self) -> Vec<Dependency> {
        (0..self.effect_coords.len())
            .filter(|i| !self.basis_effect_indices.contains(i))
            .map(|i| Dependency {
                index: i,
                coefficients: self.basis_effect_indices.iter().copied().zip(self.effect_coords[i].iter().cloned()).collect(),
            })
            .collect()
    }

    /// Each non-basis state as a combination of the first independent states.
    pub fn state_dependencies(&self) -> Vec<Dependency> {
        let basis: Vec<Vector> = self.basis_state_indices.iter().map(|&j| self.state_coords[j].clone()).collect();
        (0..self.state_coords.len())
            .filter(|j| !self.basis_state_indices.contains(j))
            .map(|j| {
                let c = express_in(&basis, &self.state_coords[j]).expect("states span the state space");
                Dependency { index: j, coefficients: self.basis_state_indices.iter().copied().zip(c).collect() }
            })
            .collect()
    }

    /// Table entry reproduced from coordinates.
    pub fn pairing(&self, effect: usize, state: usize) -> Scalar {
        dot(&self.effect_coords[effect], &self.state_coords[state])
    }
}

/// Basis effects are the first linearly independent rows in table order and
/// get canonical coordinates; states are their columns restricted to those
/// rows; the conjugate basis is solved for exactly.
pub fn coordinate_rep(table: &ProbTable) -> Result<CoordRep, TableError> {
    let basis_e = independent_prefix(&table.entries);
    let n = basis_e.len();
    let basis_rows: Vec<Vector> = basis_e.iter().map(|&i| table.entries[i].clone()).collect();
    let effect_coords: Vec<Vector> = table
        .entries
        .iter()
        .map(|row| express_in(&basis_rows, row).ok_or(TableError::SingularSystem))
        .collect::<Result<_, _>>()?;
    let state_coords: Vec<Vector> =
        (0..table.num_states()).map(|j| basis_e.iter().map(|&i| table.entries[i][j].clone()).collect()).collect();
    let basis_s = independent_prefix(&state_coords);
    if basis_s.len() != n {
        return Err(TableError::SingularSystem);
    }
    let p_s = Matrix::from_columns(&basis_s.iter().map(|&j| state_coords[j].clone()).collect::<Vec<_>>());
    let inv = p_s.inverse().ok_or(TableError::SingularSystem)?;
    let conjugate: Vec<Vector> = (0..n)
        .map(|k| {
            let lambda = inv.column(k);
            let mut full = vec![Scalar::zero(); table.num_states()];
            for (&j, l) in basis_s.iter().zip(lambda) {
                full[j] = l;
            }
            full
        })
        .collect();
    Ok(CoordRep {
        dim: n,
        effect_labels: table.effect_labels(),
        state_labels: table.state_labels(),
        effect_coords,
        state_coords,
        basis_effect_indices: basis_e,
        basis_state_indices: basis_s,
        conjugate_basis_expansion: conjugate,
    })
}

pub fn evaluate(e: &[Scalar], omega: &[Scalar]) -> Result<Scalar, TableError> {
    if e.len() != omega.len() {
        return Err(TableError::DimensionMismatch { left: e.len(), right: omega.len() });
    }
    Ok(dot(e, omega))
}

/// Output of the full reduction pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub merged: ProbTable,
    pub redundant: Vec<Redundancy>,
    pub extremal: ProbTable,
    pub rank: usize,
    pub coords: CoordRep,
}

/// reduce_table, find_convex_redundant, compute_rank and coordinate_rep in turn.
pub fn reduce_pipeline(raw: &RawTable) -> Result<Reduction, TableError> {
    let merged = reduce_table(raw)?;
    let redundant = find_convex_redundant(&merged);
    let extremal = merged.without_redundant(&redundant);
    let rank = compute_rank(&extremal);
    let coords = coordinate_rep(&extremal)?;
    Ok(Reduction { merged, redundant, extremal, rank, coords })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ivec;
    use crate::scalar::q;

    const TABLE1: &str = "\
,e1,e2,e3,e4,e5
w1,1,0,1,1,1
w2,1/2,0,1,2/3,3/4
w3,1/2,1/2,1,1/3,0.75
w4,0,1/2,1,0,1/2
";

    fn table1() -> ProbTable {
        reduce_table(&RawTable::from_csv_str(TABLE1).unwrap()).unwrap()
    }

    #[test]
    fn csv_is_transposed() {
        let raw = RawTable::from_csv_str(TABLE1).unwrap();
        assert_eq!(raw.effect_labels.len(), 5);
        assert_eq!(raw.state_labels.len(), 4);
        assert_eq!(raw.entries[3][1], q(2, 3));
        assert_eq!(raw.entries[4][2], q(3, 4));
        let again = RawTable::from_csv_str(&raw.to_csv()).unwrap();
        assert_eq!(again, raw);
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = RawTable::from_csv_str(",a,b\ns,1,x\n").unwrap_err();
        assert!(matches!(err, TableError::Parse { line: 2, column: 3, .. }), "{err:?}");
        let err = RawTable::from_csv_str(",a,b\ns,1\n").unwrap_err();
        assert!(matches!(err, TableError::Shape { line: 2, expected: 3, found: 2 }), "{err:?}");
        let err = RawTable::from_csv_str(",a\ns,3/2\n").unwrap_err();
        assert!(matches!(err, TableError::Parse { line: 2, column: 2, .. }), "{err:?}");
    }

    #[test]
    fn duplicates_merge() {
        let raw = RawTable::from_csv_str(",a,b,c\ns,1,0,1\nt,0,1,0\nr,0,1,0\n").unwrap();
        let t = reduce_table(&raw).unwrap();
        assert_eq!(t.num_effects(), 2);
        assert_eq!(t.num_states(), 2);
        assert_eq!(t.effect_classes()[0], vec!["a".to_string(), "c".to_string()]);
        assert_eq!(t.state_classes()[1], vec!["t".to_string(), "r".to_string()]);
        assert_eq!(reduce_table(&t.to_raw()).unwrap().entries(), t.entries());
    }

    #[test]
    fn trivial_table() {
        let raw = RawTable::from_csv_str(",e\nw,1\n").unwrap();
        let t = reduce_table(&raw).unwrap();
        assert_eq!(t.rank(), 1);
        assert!(find_convex_redundant(&t).is_empty());
    }

    #[test]
    fn empty_table_is_rejected() {
        let raw = RawTable { effect_labels: vec![], state_labels: vec![], entries: vec![] };
        assert_eq!(reduce_table(&raw).unwrap_err(), TableError::EmptyTable);
    }

    #[test]
    fn table1_redundancy() {
        let t = table1();
        let red = find_convex_redundant(&t);
        assert_eq!(red.len(), 1);
        assert_eq!(red[0].axis, Axis::Effect);
        assert_eq!(red[0].index, 4);
        assert_eq!(red[0].combination, vec![(0, q(1, 2)), (2, q(1, 2))]);
        assert!(red[0].verify(&t));
    }

    #[test]
    fn table1_coordinates() {
        let r = reduce_pipeline(&RawTable::from_csv_str(TABLE1).unwrap()).unwrap();
        assert_eq!(r.rank, 3);
        let c = &r.coords;
        assert_eq!(c.state_coords[1], vec![q(1, 2), q(0, 1), q(1, 1)]);
        assert_eq!(c.effect_coords[3], vec![q(2, 3), q(-2, 3), q(1, 3)]);
        assert_eq!(c.conjugate_basis_expansion[0], ivec(&[2, -2, 0, 0]));
        assert_eq!(c.conjugate_basis_expansion[1], ivec(&[0, -2, 2, 0]));
        assert_eq!(c.conjugate_basis_expansion[2], ivec(&[-1, 2, 0, 0]));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(&c.pairing(i, j), r.extremal.entry(i, j));
            }
        }
    }

    #[test]
    fn identity_table() {
        let entries: Vec<Vec<Scalar>> = (0..3).map(|i| (0..3).map(|j| Scalar::from_integer((i == j) as i64)).collect()).collect();
        let labels = |p: &str| (0..3).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let raw = RawTable::new(labels("e"), labels("w"), entries).unwrap();
        let r = reduce_pipeline(&raw).unwrap();
        assert!(r.redundant.is_empty());
        assert_eq!(r.rank, 3);
        for (j, s) in r.coords.state_coords.iter().enumerate() {
            assert_eq!(*s, crate::linalg::unit_vector(3, j));
        }
    }

    #[test]
    fn evaluate_checks_dimension() {
        assert_eq!(evaluate(&ivec(&[1, 0, 0]), &[q(1, 2), q(0, 1), q(1, 1)]).unwrap(), q(1, 2));
        assert!(evaluate(&ivec(&[1]), &ivec(&[1, 2])).is_err());
    }
}
