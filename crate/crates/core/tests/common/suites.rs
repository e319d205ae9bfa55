//! Invariant checks shared by the property tests and the acceptance run.

use gptkit::bell::{behavior_from, no_signaling_check};
use gptkit::compose::{JointSystem, DEFAULT_ENUMERATION_LIMIT};
use gptkit::geometry::{Cone, DdOptions};
use gptkit::linalg::{add, dot, sub, Matrix, Vector};
use gptkit::models::Qubit;
use gptkit::theory::{jointly_measurable, validate_system, GptSystem, Measurement};
use gptkit::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle;
use super::*;

pub type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn probabilities_in_range(sys: &GptSystem) -> Result<(), String> {
    ensure(validate_system(sys).map_err(|e| e.to_string())?.is_valid(), || format!("{} invalid", sys.name()))?;
    for e in sys.effects() {
        for w in sys.states() {
            let p = dot(e, w);
            ensure(p >= Scalar::zero() && p <= Scalar::one(), || format!("{}: e(ω) = {p}", sys.name()))?;
        }
    }
    Ok(())
}

/// One random valid system, plus a random mixed state and effect on it.
pub fn random_system_in_range(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = random_system(&mut rng);
    probabilities_in_range(&sys)?;
    let w = mix(&random_weights(&mut rng, sys.states().len()), sys.states());
    let e = mix(&random_weights(&mut rng, sys.effects().len()), sys.effects());
    let p = dot(&e, &w);
    ensure(p >= Scalar::zero() && p <= Scalar::one(), || format!("mixture gives {p}"))
}

pub fn probability_range(random: usize, seed: u64) -> Outcome {
    let builtin = all_systems();
    for sys in &builtin {
        probabilities_in_range(sys)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        random_system_in_range(rng.gen())?;
    }
    Ok(format!("{} built-in and {random} random systems", builtin.len()))
}

fn cone_round_trip(cone: &Cone, label: &str) -> Result<(), String> {
    let err = |e: gptkit::geometry::GeometryError| format!("{label}: {e}");
    let dim = cone.dim();
    let gens = cone.generators().map_err(err)?.to_vec();
    let hs = cone.halfspaces().map_err(err)?.to_vec();
    ensure(cone.dual().dual().same_set(cone).map_err(err)?, || format!("{label}: double dual differs"))?;
    let from_v = Cone::from_generators(dim, &gens).map_err(err)?;
    let back = Cone::from_halfspaces(dim, from_v.halfspaces().map_err(err)?).map_err(err)?;
    ensure(back.same_set(cone).map_err(err)?, || format!("{label}: V -> H -> V differs"))?;
    let from_h = Cone::from_halfspaces(dim, &hs).map_err(err)?;
    let back = Cone::from_generators(dim, from_h.generators().map_err(err)?).map_err(err)?;
    ensure(back.same_set(cone).map_err(err)?, || format!("{label}: H -> V -> H differs"))?;
    ensure(cone.representations_agree().map_err(err)?, || format!("{label}: representations disagree"))
}

pub fn cone_round_trips() -> Outcome {
    let mut n = 0;
    for sys in all_systems() {
        cone_round_trip(sys.state_cone(), sys.name())?;
        cone_round_trip(&sys.state_cone().dual(), &format!("{} dual", sys.name()))?;
        n += 2;
    }
    for joint in compositions() {
        let (a, b) = joint.shape();
        if a * b <= 9 {
            cone_round_trip(joint.state_cone(), &label(&joint))?;
            n += 1;
        }
    }
    Ok(format!("{n} cones"))
}

pub fn label(joint: &JointSystem) -> String {
    format!("{} ⊗{} {}", joint.left().name(), joint.rule(), joint.right().name())
}

pub struct Extremes {
    pub joint: JointSystem,
    pub states: Vec<Matrix>,
}

pub fn corpus_extremes() -> Vec<Extremes> {
    compositions()
        .into_iter()
        .filter(|j| j.shape().0 * j.shape().1 <= DEFAULT_ENUMERATION_LIMIT)
        .map(|joint| {
            let states = joint.state_vertices(DEFAULT_ENUMERATION_LIMIT, &DdOptions::default()).unwrap();
            Extremes { joint, states }
        })
        .collect()
}

fn binary(sys: &GptSystem, weights: &[Scalar]) -> Measurement {
    let e = mix(weights, sys.effects());
    Measurement { effects: vec![e.clone(), sub(sys.unit(), &e)], complete: true }
}

/// Random mixed joint state and random binary measurements on one corpus
/// composition; the resulting behavior must be normalized and no-signaling.
pub fn random_behavior_is_no_signaling(ex: &Extremes, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat: Vec<Vector> = ex.states.iter().map(|m| m.as_flat().to_vec()).collect();
    let (n, m) = ex.joint.shape();
    let w = Matrix::from_flat(n, m, mix(&random_weights(&mut rng, flat.len()), &flat));
    let left = ex.joint.left();
    let right = ex.joint.right();
    let alice = [0, 1].map(|_| binary(left, &random_weights(&mut rng, left.effects().len())));
    let bob = [0, 1].map(|_| binary(right, &random_weights(&mut rng, right.effects().len())));
    let b = behavior_from(&ex.joint, &w, &alice, &bob).map_err(|e| format!("{}: {e}", label(&ex.joint)))?;
    let report = no_signaling_check(&b);
    ensure(report.passes(), || format!("{}: signaling {:?}", label(&ex.joint), report.violations))
}

pub fn no_signaling(cases: usize, seed: u64) -> Outcome {
    let corpus = corpus_extremes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..cases {
        random_behavior_is_no_signaling(&corpus[k % corpus.len()], rng.gen())?;
    }
    Ok(format!("{cases} behaviors over {} compositions", corpus.len()))
}

pub fn joint_measurability_witnesses() -> Outcome {
    let mut feasible = 0;
    for sys in small_systems() {
        let effects = sys.nontrivial_effects();
        for a in &effects {
            for b in &effects {
                let jm = jointly_measurable(&sys, a, b).map_err(|e| e.to_string())?;
                let Some(alg) = &jm.algebra else { continue };
                let [both, first, second, neither] = alg.outcomes();
                for o in alg.outcomes() {
                    ensure(sys.effect_body().contains(o).unwrap(), || format!("{}: outcome outside E", sys.name()))?;
                }
                ensure(&add(both, first) == a && &add(both, second) == b, || format!("{}: wrong marginals", sys.name()))?;
                let total = add(&add(both, first), &add(second, neither));
                ensure(total == sys.unit(), || format!("{}: outcomes do not sum to u", sys.name()))?;
                feasible += 1;
            }
        }
    }
    Ok(format!("{feasible} feasible pairs reconstructed"))
}

pub fn nesting() -> Outcome {
    let all = compositions();
    for joint in &all {
        let r = joint.nesting().map_err(|e| e.to_string())?;
        ensure(r.min_included && r.within_genmax, || format!("{}: {r:?}", label(joint)))?;
    }
    Ok(format!("{} compositions", all.len()))
}

/// Sampled rays of the qubit state cone are exactly the functionals that are
/// non-negative on all states, checked against density-matrix eigenvalues.
pub fn qubit_self_duality(rays: usize, seed: u64) -> Outcome {
    let tol = 1e-9;
    let qubit = Qubit::new(tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probes = qubit.sample_pure_states(200, seed ^ 0x5eed);
    for _ in 0..rays {
        let dir = qubit.sample_pure_states(1, rng.gen())[0];
        let radius: f64 = rng.gen_range(0.0..1.5);
        let scale: f64 = rng.gen_range(0.1..3.0);
        let r = [dir[0] * radius * scale, dir[1] * radius * scale, dir[2] * radius * scale, scale];
        let inside = radius <= 1.0;
        let lambda_min = oracle::eigenvalues(&oracle::qubit_matrix(&r))[0];
        // Smallest pairing with a pure state is attained at the antipode.
        let antipode = [-dir[0], -dir[1], -dir[2], 1.0];
        let worst = Qubit::pairing(&r, &antipode);
        ensure((worst - lambda_min).abs() <= tol, || format!("pairing {worst} vs eigenvalue {lambda_min}"))?;
        ensure(qubit.in_cone(&r) == inside, || format!("cone membership of {r:?}"))?;
        ensure((lambda_min >= -tol) == inside, || format!("oracle disagrees on {r:?}"))?;
        for s in &probes {
            let p = Qubit::pairing(&r, s);
            let o = oracle::trace_product2(&oracle::qubit_matrix(&r), &oracle::qubit_matrix(s));
            ensure((p - o).abs() <= tol, || format!("pairing {p} vs trace {o}"))?;
            if inside {
                ensure(p >= -tol, || format!("dual pairing {p} < 0"))?;
            }
        }
    }
    Ok(format!("{rays} rays"))
}
