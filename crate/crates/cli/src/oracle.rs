//! The oracle suite: cross-method equivalences, exact identities, graph
//! structure and mixing checks with a computed λ₂. One pass/fail line per
//! check; any disagreement reports its first counterexample and fails the
//! run. Also hosts the fault-injection mode that proves the suite can
//! detect a broken adjacency.

use ffincidence::counting::{count_incidences, Method};
use ffincidence::geometry::{
    full_line_pairs, full_points, multiset_random_line_pairs, multiset_random_points,
    random_line_pairs, random_plane_points, random_points,
};
use ffincidence::gf::{field_for_order, FieldSpec};
use ffincidence::spectral::{
    build_graph, mixing_check, mixing_check_l2, second_eigenvalue, verify_neighbor_formula,
    verify_square_decomposition,
};
use ffincidence::theorems::{build_energy_reduction, verify_vinh, LambdaMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct OracleOptions {
    pub q_list: Vec<u64>,
    pub inject_fault: bool,
    pub tol: f64,
}

struct Harness {
    failures: usize,
    checks: usize,
    first_failure: Option<String>,
}

impl Harness {
    fn record(&mut self, name: &str, outcome: Result<String, String>) {
        self.checks += 1;
        match outcome {
            Ok(detail) => println!("ok   {name} {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                self.failures += 1;
                if self.first_failure.is_none() {
                    self.first_failure = Some(format!("{name}: {detail}"));
                }
            }
        }
    }
}

/// Runs the whole suite; returns the process exit code.
pub fn run_oracle(opts: &OracleOptions) -> i32 {
    let mut h = Harness {
        failures: 0,
        checks: 0,
        first_failure: None,
    };
    for (i, &q) in opts.q_list.iter().enumerate() {
        let field = match field_for_order(q) {
            Ok(f) => f,
            Err(e) => {
                h.record(&format!("field q={q}"), Err(e.to_string()));
                continue;
            }
        };
        counting_equivalence(&mut h, &field);
        full_space_identity(&mut h, &field);
        graph_checks(&mut h, &field, opts.tol, opts.inject_fault && i == 0);
        vinh_checks(&mut h, &field, opts.tol);
        energy_checks(&mut h, &field);
    }
    println!(
        "oracle: {} checks, {} failure(s)",
        h.checks, h.failures
    );
    if let Some(first) = &h.first_failure {
        eprintln!("first counterexample: {first}");
    }
    if h.failures == 0 {
        0
    } else {
        1
    }
}

fn counting_equivalence(h: &mut Harness, field: &FieldSpec) {
    let q = field.q() as u64;
    let population = (q * q * q * q).min(30) as usize;
    let mut outcome = Ok(format!("(50 instances, q={q})"));
    for seed in 0..50u64 {
        let result = (|| -> Result<(), String> {
            let (p, l) = if seed % 2 == 0 {
                (
                    random_points(field, 2, 2, population, seed).map_err(|e| e.to_string())?,
                    random_line_pairs(field, population, false, seed + 10_000)
                        .map_err(|e| e.to_string())?,
                )
            } else {
                (
                    multiset_random_points(field, 2, 2, population / 2 + 1, 5, seed)
                        .map_err(|e| e.to_string())?,
                    multiset_random_line_pairs(field, population / 2 + 1, false, 5, seed + 10_000)
                        .map_err(|e| e.to_string())?,
                )
            };
            let naive = count_incidences(field, &p, &l, Method::Naive).count;
            let indexed = count_incidences(field, &p, &l, Method::Indexed).count;
            if naive != indexed {
                return Err(format!("seed {seed}: naive {naive} != indexed {indexed}"));
            }
            Ok(())
        })();
        if let Err(e) = result {
            outcome = Err(e);
            break;
        }
    }
    h.record("counting-equivalence", outcome);
}

fn full_space_identity(h: &mut Harness, field: &FieldSpec) {
    let q = u64::from(field.q());
    let outcome = (|| {
        let p = full_points(field, 2, 2).map_err(|e| e.to_string())?;
        let l = full_line_pairs(field).map_err(|e| e.to_string())?;
        let i = count_incidences(field, &p, &l, Method::Indexed).count;
        if i != l.weight() * q * q {
            return Err(format!("I = {i}, expected |L|·q² = {}", l.weight() * q * q));
        }
        Ok(format!("(I = |L|·q² = {i}, q={q})"))
    })();
    h.record("full-space-identity", outcome);
}

fn graph_checks(h: &mut Harness, field: &FieldSpec, tol: f64, inject: bool) {
    let q = field.q();
    let mut graph = match build_graph(field, 2, 2) {
        Ok(g) => g,
        Err(e) => {
            h.record(&format!("graph-build q={q}"), Err(e.to_string()));
            return;
        }
    };
    if inject {
        graph.inject_adjacency_fault();
        println!("note injected one adjacency fault into the q={q} graph");
    }
    h.record(
        &format!("neighbor-formula q={q}"),
        verify_neighbor_formula(&graph)
            .map(|_| "(all vertex pairs)".to_string())
            .map_err(|e| e.to_string()),
    );
    if graph.n() <= ffincidence::spectral::DENSE_CAP {
        h.record(
            &format!("square-decomposition q={q}"),
            verify_square_decomposition(&graph)
                .map(|d| format!("(E is {}-regular)", d.e_degree))
                .map_err(|e| e.to_string()),
        );
    } else {
        println!(
            "note square-decomposition q={q} skipped ({} vertices exceed the entrywise cap)",
            graph.n()
        );
    }
    let lambda = match second_eigenvalue(&graph, tol) {
        Ok(r) => {
            h.record(
                &format!("second-eigenvalue q={q}"),
                Ok(format!("(λ₂ = {:.6}, residual {:.2e})", r.lambda2, r.residual)),
            );
            r.lambda2
        }
        Err(e) => {
            h.record(&format!("second-eigenvalue q={q}"), Err(e.to_string()));
            return;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(31_337 + u64::from(q));
    let mut mixing = Ok("(100 subset pairs)".to_string());
    for case in 0..100 {
        let pick = |rng: &mut ChaCha8Rng| {
            let density = rng.random_range(0.1..0.9);
            (0..graph.n() as u32)
                .filter(|_| rng.random_bool(density))
                .collect::<Vec<_>>()
        };
        let u = pick(&mut rng);
        let v = pick(&mut rng);
        let r = mixing_check(&graph, &u, &v, lambda);
        if !r.ok {
            mixing = Err(format!(
                "case {case}: |U|={} |V|={} discrepancy {} > bound {}",
                u.len(),
                v.len(),
                r.discrepancy,
                r.bound
            ));
            break;
        }
    }
    h.record(&format!("mixing q={q}"), mixing);

    let mut l2 = Ok("(50 weight functions)".to_string());
    for case in 0..50 {
        let weights = |rng: &mut ChaCha8Rng| -> Vec<u64> {
            (0..graph.n()).map(|_| rng.random_range(0..6)).collect()
        };
        let f = weights(&mut rng);
        let g = weights(&mut rng);
        match mixing_check_l2(&graph, &f, &g, lambda) {
            Ok(r) if r.ok => {}
            Ok(r) => {
                l2 = Err(format!(
                    "case {case}: discrepancy {} > bound {}",
                    r.discrepancy, r.bound
                ));
                break;
            }
            Err(e) => {
                l2 = Err(e.to_string());
                break;
            }
        }
    }
    h.record(&format!("mixing-l2 q={q}"), l2);
}

fn vinh_checks(h: &mut Harness, field: &FieldSpec, tol: f64) {
    let q = field.q();
    let outcome = (|| {
        let ctx = ffincidence::theorems::spectral_context(field, 2, 2, tol)
            .map_err(|e| e.to_string())?;
        for seed in 0..20u64 {
            let p = multiset_random_points(field, 2, 2, 10, 3, seed).map_err(|e| e.to_string())?;
            let l = multiset_random_line_pairs(field, 10, false, 3, seed + 404)
                .map_err(|e| e.to_string())?;
            verify_vinh(field, &p, &l, LambdaMode::Computed, Some(&ctx))
                .map_err(|e| format!("seed {seed}: {e}"))?;
        }
        let p = full_points(field, 2, 2).map_err(|e| e.to_string())?;
        let l = full_line_pairs(field).map_err(|e| e.to_string())?;
        let r = verify_vinh(field, &p, &l, LambdaMode::Paper, None).map_err(|e| e.to_string())?;
        if !r.discrepancy_is_zero() {
            return Err(format!("full-space discrepancy {} != 0", r.discrepancy));
        }
        Ok("(20 seeded + full space)".to_string())
    })();
    h.record(&format!("vinh-mixing q={q}"), outcome);
}

fn energy_checks(h: &mut Harness, field: &FieldSpec) {
    let q = field.q();
    let mut outcome = Ok("(25 instances)".to_string());
    for seed in 0..25u64 {
        let result = (|| {
            let a = random_plane_points(field, 3, seed).map_err(|e| e.to_string())?;
            let l = random_line_pairs(field, 4, true, seed + 17).map_err(|e| e.to_string())?;
            build_energy_reduction(field, &a, &l).map_err(|e| format!("seed {seed}: {e}"))?;
            Ok(())
        })();
        if let Err(e) = result {
            outcome = Err(e);
            break;
        }
    }
    h.record(&format!("energy-reduction q={q}"), outcome);
}
