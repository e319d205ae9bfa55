#![allow(dead_code)]

pub mod oracle;
pub mod suites;

use gptkit::compose::{ComposeError, JointSystem, TensorRule};
use gptkit::linalg::Vector;
use gptkit::models::{classical, gbit, gbit_effects, holevo_restricted, polygon, system_from_coords};
use gptkit::tablecore::{reduce_pipeline, RawTable};
use gptkit::theory::GptSystem;
use gptkit::Scalar;
use rand::Rng;

pub const TABLE1: &str = include_str!("../../../../data/table1.csv");

pub fn q(n: i64, d: i64) -> Scalar {
    Scalar::new(n, d)
}

pub fn v(values: &[(i64, i64)]) -> Vector {
    values.iter().map(|&(n, d)| q(n, d)).collect()
}

pub fn table1_system() -> GptSystem {
    let r = reduce_pipeline(&RawTable::from_csv_str(TABLE1).unwrap()).unwrap();
    let unit = r.coords.effect_labels.iter().position(|l| l == "e3").unwrap();
    system_from_coords("table1", &r.coords, unit).unwrap()
}

pub fn restricted_gbit() -> GptSystem {
    gbit().with_effects(&[gbit_effects()[0].clone()]).unwrap().renamed("restricted-gbit")
}

/// Built-in systems with small exact coordinates.
pub fn small_systems() -> Vec<GptSystem> {
    let mut out: Vec<GptSystem> = (1..=4).map(|k| classical(k).unwrap()).collect();
    out.push(gbit());
    out.push(restricted_gbit());
    out.push(holevo_restricted().unwrap().system);
    out.push(polygon(3).unwrap());
    out.push(table1_system());
    out
}

/// Every built-in system, including those with large rational coordinates.
pub fn all_systems() -> Vec<GptSystem> {
    let mut out = small_systems();
    out.push(polygon(5).unwrap());
    out.push(polygon(6).unwrap());
    out
}

pub fn compositions() -> Vec<JointSystem> {
    let c2 = classical(2).unwrap();
    let g = gbit();
    let r = restricted_gbit();
    let h = holevo_restricted().unwrap().system;
    let t = table1_system();
    let mut out = Vec::new();
    for (a, b) in [(&c2, &c2), (&g, &g), (&c2, &g), (&h, &g), (&t, &c2)] {
        for rule in [TensorRule::Min, TensorRule::Max, TensorRule::GenMax] {
            match JointSystem::compose(a, b, rule) {
                Ok(j) => out.push(j),
                Err(ComposeError::RestrictedSubsystem { .. }) if rule == TensorRule::Max => {}
                Err(e) => panic!("{} {} {rule}: {e}", a.name(), b.name()),
            }
        }
    }
    for (a, b) in [(&r, &g), (&g, &r), (&r, &r)] {
        out.push(JointSystem::compose(a, b, TensorRule::Min).unwrap());
        out.push(JointSystem::compose(a, b, TensorRule::GenMax).unwrap());
    }
    out
}

/// Random weights with small denominators summing to one.
pub fn random_weights(rng: &mut impl Rng, k: usize) -> Vec<Scalar> {
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(0..6)).collect();
    let total: i64 = raw.iter().sum();
    if total == 0 {
        let mut w = vec![Scalar::from_integer(0); k];
        w[rng.gen_range(0..k)] = Scalar::from_integer(1);
        return w;
    }
    raw.iter().map(|&r| q(r, total)).collect()
}

pub fn mix(weights: &[Scalar], points: &[Vector]) -> Vector {
    gptkit::linalg::combine(weights, points, points[0].len())
}

/// A valid system with state vertices on random lattice points of the
/// plane `z = 1` and effects affine in the state coordinates, rescaled to
/// take values in `[0, 1]`.
pub fn random_system(rng: &mut impl Rng) -> GptSystem {
    let unit = v(&[(0, 1), (0, 1), (1, 1)]);
    let n = rng.gen_range(3..7);
    let mut states: Vec<Vector> = Vec::new();
    while states.len() < n {
        let s = v(&[(rng.gen_range(-4..=4), 4), (rng.gen_range(-4..=4), 4), (1, 1)]);
        if !states.contains(&s) {
            states.push(s);
        }
    }
    let mut effects = Vec::new();
    for _ in 0..rng.gen_range(1..4) {
        let (a, b) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        let values: Vec<Scalar> = states.iter().map(|s| &s[0] * q(a, 1) + &s[1] * q(b, 1)).collect();
        let lo = values.iter().min().unwrap().clone();
        let hi = values.iter().max().unwrap().clone();
        if lo == hi {
            continue;
        }
        let span = &hi - &lo;
        effects.push(vec![q(a, 1) / &span, q(b, 1) / &span, -&lo / &span]);
    }
    GptSystem::new("random", &states, &effects, unit).unwrap()
}
