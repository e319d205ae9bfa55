//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! A criterion listed in `EXPECTED_FAILURES` is still evaluated and
//! reported as FAIL, but does not fail the process unless
//! `ACCEPTANCE_STRICT` is set. If it starts passing the run fails, so the
//! list cannot go stale.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{oracle, q, suites, table1_system, v, TABLE1};
use gptkit::bell::{
    behavior_from, chsh, max_chsh, optimal_qubit_angles, pr_box, qubit_behavior, state_from_behavior, xz_effect,
};
use gptkit::compose::qubits::{pauli_basis_states, product_basis_decomposition, TwoQubitState};
use gptkit::compose::{is_separable, max_tensor, min_tensor, product, Side};
use gptkit::geometry::Certificate;
use gptkit::linalg::{dot, sub, Matrix, Vector};
use gptkit::models::{classical, classical_extension, extend_table, gbit, gbit_effects, holevo_restricted};
use gptkit::tablecore::{reduce_pipeline, reduce_table, Axis, RawTable};
use gptkit::theory::{check_no_restriction, compute_emax, GptSystem, Measurement};
use gptkit::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criterion number and clause name.
const EXPECTED_FAILURES: &[(usize, &str)] = &[(1, "w4 = -w1 + w2 - w3")];

struct Clause {
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Clauses(Vec<Clause>);

impl Clauses {
    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.0.push(Clause { name: name.into(), ok, detail: detail.into() });
    }
}

fn int(n: i64) -> Scalar {
    Scalar::from_integer(n)
}

fn table_pipeline(c: &mut Clauses) {
    let raw = RawTable::from_csv_str(TABLE1).unwrap();
    let r = reduce_pipeline(&raw).unwrap();
    c.check("rank 3", r.rank == 3, format!("rank {}", r.rank));
    let e5 = r.redundant.iter().find(|x| x.axis == Axis::Effect && x.label == "e5");
    let cert: Vec<(String, Scalar)> = e5
        .map(|x| x.combination.iter().map(|(i, w)| (r.merged.effect_labels()[*i].clone(), w.clone())).collect())
        .unwrap_or_default();
    c.check(
        "e5 = (e1 + e3)/2",
        cert == [("e1".to_string(), q(1, 2)), ("e3".to_string(), q(1, 2))] && r.redundant.len() == 1,
        format!("{cert:?}"),
    );
    let eff = r.coords.effect_dependencies();
    let e4: Vec<(usize, Scalar)> = eff.iter().find(|d| d.index == 3).map(|d| d.coefficients.clone()).unwrap_or_default();
    c.check("e4 = 2/3 e1 - 2/3 e2 + 1/3 e3", e4 == [(0, q(2, 3)), (1, q(-2, 3)), (2, q(1, 3))], format!("{e4:?}"));

    // The stated relation, checked both against the pipeline and directly on
    // the table columns.
    let stated = [int(-1), int(1), int(-1)];
    let columns: Vec<Vector> = (0..4).map(|j| r.extremal.state_column(j)).collect();
    let combo = (0..3).fold(vec![Scalar::zero(); columns[0].len()], |acc, k| {
        acc.iter().zip(&columns[k]).map(|(a, x)| a + &stated[k] * x).collect()
    });
    let w4: Vec<(usize, Scalar)> = r
        .coords
        .state_dependencies()
        .iter()
        .find(|d| d.index == 3)
        .map(|d| d.coefficients.clone())
        .unwrap_or_default();
    let stated_pairs: Vec<(usize, Scalar)> = stated.iter().cloned().enumerate().collect();
    c.check(
        "w4 = -w1 + w2 - w3",
        w4 == stated_pairs && combo == columns[3],
        format!(
            "pipeline gives w4 = {}; -w1 + w2 - w3 has column {} but w4 is {}",
            w4.iter().map(|(i, x)| format!("({x})·w{}", i + 1)).collect::<Vec<_>>().join(" + "),
            gptkit::linalg::fmt_vector(&combo),
            gptkit::linalg::fmt_vector(&columns[3]),
        ),
    );
    let expected = [v(&[(2, 1), (-2, 1), (0, 1), (0, 1)]), v(&[(0, 1), (-2, 1), (2, 1), (0, 1)]), v(&[(-1, 1), (2, 1), (0, 1), (0, 1)])];
    c.check(
        "conjugate basis",
        r.coords.conjugate_basis_expansion == expected,
        format!("{:?}", r.coords.conjugate_basis_expansion.iter().map(|x| gptkit::linalg::fmt_vector(x)).collect::<Vec<_>>()),
    );
}

fn half(x: i64, y: i64) -> Vector {
    v(&[(x, 2), (y, 2), (1, 2)])
}

fn gbit_emax(c: &mut Clauses) {
    let g = gbit();
    let emax = compute_emax(&g).unwrap();
    let mut expected = vec![v(&[(0, 1), (0, 1), (0, 1)]), v(&[(0, 1), (0, 1), (1, 1)])];
    for (x, y) in [(1, 1), (-1, 1), (-1, -1), (1, -1)] {
        expected.push(half(x, y));
    }
    expected.sort();
    let mut got = emax.vertices().to_vec();
    got.sort();
    c.check("E^max vertices", got == expected, format!("{} vertices", got.len()));
    let nr = check_no_restriction(&g).unwrap();
    c.check("no-restriction", nr.holds, format!("{nr:?}"));
}

fn holevo(c: &mut Clauses) {
    let h = holevo_restricted().unwrap();
    let g = gbit();
    c.check("square state body", h.system.states().len() == 4, format!("{} vertices", h.system.states().len()));
    c.check("isomorphism verifies", h.isomorphism.verify(&h.system, &g), "");
    let mut mismatches = 0;
    let mut pairs = 0;
    for w in h.system.states() {
        let tw = h.isomorphism.state_map.mul_vec(w);
        let in_target = g.states().contains(&tw);
        for e in h.system.effects() {
            let te = h.isomorphism.effect_map.mul_vec(e);
            pairs += 1;
            if !in_target || !g.effects().contains(&te) || dot(&te, &tw) != dot(e, w) {
                mismatches += 1;
            }
        }
    }
    c.check(
        "all state × effect pairings preserved",
        mismatches == 0 && pairs == 4 * h.system.effects().len(),
        format!("{pairs} pairs, {mismatches} mismatches"),
    );
}

fn classicalization(c: &mut Clauses) {
    let table = reduce_table(&RawTable::from_csv_str(TABLE1).unwrap()).unwrap();
    let extended = extend_table(&table, |j| format!("e{}", 6 + j));
    let rows: [[(i64, i64); 4]; 9] = [
        [(1, 1), (1, 2), (1, 2), (0, 1)],
        [(0, 1), (0, 1), (1, 2), (1, 2)],
        [(1, 1), (1, 1), (1, 1), (1, 1)],
        [(1, 1), (2, 3), (1, 3), (0, 1)],
        [(1, 1), (3, 4), (3, 4), (1, 2)],
        [(1, 1), (0, 1), (0, 1), (0, 1)],
        [(0, 1), (1, 1), (0, 1), (0, 1)],
        [(0, 1), (0, 1), (1, 1), (0, 1)],
        [(0, 1), (0, 1), (0, 1), (1, 1)],
    ];
    let expected: Vec<Vector> = rows.iter().map(|r| v(r)).collect();
    let labels: Vec<String> = (1..=9).map(|k| format!("e{k}")).collect();
    c.check(
        "extended table pattern",
        extended.entries() == expected.as_slice() && extended.effect_labels() == labels,
        format!("{} x {}", extended.num_effects(), extended.num_states()),
    );

    let sys = table1_system();
    let ext = classical_extension(&sys).unwrap();
    let rep = reduce_pipeline(&RawTable::from_csv_str(TABLE1).unwrap()).unwrap();
    let mut preserved = 0;
    for (i, e) in rep.coords.effect_coords.iter().enumerate() {
        for (j, w) in rep.coords.state_coords.iter().enumerate() {
            let (Some(k), Some(l)) = (sys.effects().iter().position(|x| x == e), sys.states().iter().position(|x| x == w)) else {
                continue;
            };
            let embedded = dot(&ext.effect_embedding[k], &ext.state_embedding[l]);
            if embedded == *rep.extremal.entry(i, j) && embedded == dot(e, w) {
                preserved += 1;
            }
        }
    }
    c.check("16 original pairings preserved", preserved == 16, format!("{preserved} of 16"));
    c.check("every vertex pairing preserved", ext.verify(&sys), "");
    c.check("extension is classical(4)", ext.system.states().len() == 4 && ext.system.dim() == 4, "");
}

fn bell_decomposition(c: &mut Clauses) {
    let basis = pauli_basis_states();
    let coeffs = product_basis_decomposition(&TwoQubitState::bell(), &basis, &basis, 1e-12).unwrap();
    let expected = [[2.0, -1.0, 1.0, -1.0], [-1.0, 1.0, 0.0, 0.0], [1.0, 0.0, -1.0, 0.0], [-1.0, 0.0, 0.0, 1.0]];
    let err = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| (coeffs[i][j] - expected[i][j]).abs()).fold(0.0, f64::max);
    let nonzero = coeffs.iter().flatten().filter(|x| x.abs() > 1e-9).count();
    c.check("ten coefficients", err <= 1e-9 && nonzero == 10, format!("max error {err:.2e}, {nonzero} nonzero"));

    // Rebuild the state from the coefficients with density matrices.
    let rho = oracle::bell_density();
    let mut rebuilt = [[num_complex::Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let k = oracle::kron(&oracle::qubit_matrix(&basis[i]), &oracle::qubit_matrix(&basis[j]));
            for r in 0..4 {
                for s in 0..4 {
                    rebuilt[r][s] += k[r][s] * coeffs[i][j];
                }
            }
        }
    }
    let dev = (0..16).map(|k| (rebuilt[k / 4][k % 4] - rho[k / 4][k % 4]).norm()).fold(0.0, f64::max);
    c.check("density-matrix reconstruction", dev <= 1e-9, format!("max deviation {dev:.2e}"));
    for side in [Side::Left, Side::Right] {
        let m = TwoQubitState::bell().marginal(side);
        let dev = m.iter().zip([0.0, 0.0, 0.0, 1.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        c.check(&format!("{side} marginal maximally mixed"), dev <= 1e-9, format!("{m:?}"));
    }
}

fn binary(sys: &GptSystem, e: &Vector) -> Measurement {
    Measurement { effects: vec![e.clone(), sub(sys.unit(), e)], complete: true }
}

fn chsh_triad(c: &mut Clauses) {
    let c2 = classical(2).unwrap();
    let m = binary(&c2, &v(&[(1, 1), (0, 1)]));
    let cl = max_chsh(&min_tensor(&c2, &c2), &[m.clone(), m.clone()], &[m.clone(), m]).unwrap();
    c.check("classical = 2", cl.value == int(2), format!("{}", cl.value));

    let g = gbit();
    let e = gbit_effects();
    let fid = [binary(&g, &e[0]), binary(&g, &e[1])];
    let bw = max_chsh(&max_tensor(&g, &g).unwrap(), &fid, &fid).unwrap();
    c.check("boxworld = 4", bw.value == int(4), format!("{}", bw.value));

    let (a, b) = optimal_qubit_angles();
    let beh = qubit_behavior(&TwoQubitState::bell(), &[xz_effect(a[0]), xz_effect(a[1])], &[xz_effect(b[0]), xz_effect(b[1])]);
    let s = chsh(&beh);
    let tsirelson = 2.0 * 2f64.sqrt();
    c.check("qubits = 2√2", (s - tsirelson).abs() <= 1e-3, format!("{s:.12}"));
    let o = oracle::chsh_density(&oracle::bell_density(), a, b);
    c.check("density-matrix oracle agrees", (o - s).abs() <= 1e-9, format!("oracle {o:.12}"));
}

type Suite = (&'static str, fn() -> suites::Outcome);

fn property_suites(c: &mut Clauses) {
    let suites: [Suite; 6] = [
        ("probability range", || suites::probability_range(200, 14)),
        ("double duality and round trips", suites::cone_round_trips),
        ("no-signaling", || suites::no_signaling(600, 21)),
        ("joint measurability witnesses", suites::joint_measurability_witnesses),
        ("min ⊆ genmax nesting", suites::nesting),
        ("qubit self-duality", || suites::qubit_self_duality(1000, 3)),
    ];
    for (name, run) in suites {
        match run() {
            Ok(detail) => c.check(name, true, detail),
            Err(detail) => c.check(name, false, detail),
        }
    }
}

fn separability(c: &mut Clauses) {
    let g = gbit();
    let sys = max_tensor(&g, &g).unwrap();
    let e = gbit_effects();
    let fid = [binary(&g, &e[0]), binary(&g, &e[1])];
    let w = state_from_behavior(&sys, &pr_box(), &fid, &fid).unwrap();
    let reproduced = behavior_from(&sys, &w, &fid, &fid).map(|b| b == pr_box()).unwrap_or(false);
    c.check("PR-box state reproduces the PR box", reproduced && sys.contains_state(&w).unwrap(), "");
    let sep = is_separable(&sys, &w).unwrap();
    let certified = match sep.feasibility.certificate() {
        Some(cert @ Certificate::Separation { .. }) => {
            let at_w = cert.evaluate(w.as_flat()).unwrap();
            let products_ok = g
                .states()
                .iter()
                .flat_map(|a| g.states().iter().map(move |b| product(a, b)))
                .all(|p| cert.evaluate(p.as_flat()).unwrap() >= Scalar::zero());
            at_w < Scalar::zero() && products_ok
        }
        _ => false,
    };
    c.check("PR-box state certified entangled", !sep.is_separable() && certified, "");

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let products: Vec<Matrix> =
        g.states().iter().flat_map(|a| g.states().iter().map(move |b| product(a, b))).collect();
    let mut decomposed = 0;
    for _ in 0..100 {
        let k = rng.gen_range(1..=6);
        let picks: Vec<usize> = (0..k).map(|_| rng.gen_range(0..products.len())).collect();
        let weights = common::random_weights(&mut rng, k);
        let mut w = Matrix::zeros(3, 3);
        for (p, l) in picks.iter().zip(&weights) {
            for r in 0..3 {
                for s in 0..3 {
                    w[(r, s)] += l * &products[*p][(r, s)];
                }
            }
        }
        let sep = is_separable(&sys, &w).unwrap();
        let mut rebuilt = Matrix::zeros(3, 3);
        let mut total = Scalar::zero();
        let mut nonneg = true;
        for (l, i, j) in &sep.decomposition {
            nonneg &= *l >= Scalar::zero();
            total += l;
            let p = product(&g.states()[*i], &g.states()[*j]);
            for r in 0..3 {
                for s in 0..3 {
                    rebuilt[(r, s)] += l * &p[(r, s)];
                }
            }
        }
        if sep.is_separable() && nonneg && total == int(1) && rebuilt == w {
            decomposed += 1;
        }
    }
    c.check("100 product mixtures decomposed", decomposed == 100, format!("{decomposed} of 100"));
}

type Criterion = (usize, &'static str, Duration, fn(&mut Clauses));

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "table pipeline", Duration::from_secs(1), table_pipeline),
        (2, "gbit E^max", Duration::from_secs(1), gbit_emax),
        (3, "Holevo isomorphism", Duration::from_secs(1), holevo),
        (4, "classicalization round trip", Duration::MAX, classicalization),
        (5, "Bell decomposition", Duration::MAX, bell_decomposition),
        (6, "CHSH triad", Duration::from_secs(10), chsh_triad),
        (7, "property suites", Duration::MAX, property_suites),
        (8, "separability certification", Duration::from_secs(30), separability),
    ];
    let strict = std::env::var_os("ACCEPTANCE_STRICT").is_some();
    let mut fatal = Vec::new();
    let mut passed = 0;
    for (n, title, budget, run) in criteria {
        let mut clauses = Clauses::default();
        let start = Instant::now();
        let panicked = catch_unwind(AssertUnwindSafe(|| run(&mut clauses))).err().map(|p| {
            p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        });
        let elapsed = start.elapsed();
        let mut failing: Vec<&Clause> = clauses.0.iter().filter(|c| !c.ok).collect();
        let timing = Clause { name: "time budget".into(), ok: elapsed <= budget, detail: format!("{elapsed:.2?} > {budget:?}") };
        if !timing.ok {
            failing.push(&timing);
        }
        let panic_clause = panicked.map(|m| Clause { name: "completed".into(), ok: false, detail: m });
        if let Some(p) = &panic_clause {
            failing.push(p);
        }
        if failing.is_empty() {
            passed += 1;
            println!("[{n}] {title}: PASS ({elapsed:.2?}, {} clauses)", clauses.0.len());
        } else {
            println!("[{n}] {title}: FAIL ({elapsed:.2?})");
            for f in &failing {
                let expected = EXPECTED_FAILURES.contains(&(n, f.name.as_str()));
                println!("      {}: {}{}", f.name, f.detail, if expected { " [expected]" } else { "" });
                if strict || !expected {
                    fatal.push(format!("[{n}] {}", f.name));
                }
            }
        }
        for (m, name) in EXPECTED_FAILURES {
            if *m == n && clauses.0.iter().any(|c| c.name == *name && c.ok) {
                fatal.push(format!("[{n}] {name} passes but is listed as an expected failure"));
            }
        }
    }
    if fatal.is_empty() {
        println!("acceptance: {passed} of {} criteria pass, no unexpected failures", criteria.len());
    } else {
        println!("acceptance: failing {}", fatal.join(", "));
        std::process::exit(1);
    }
}
