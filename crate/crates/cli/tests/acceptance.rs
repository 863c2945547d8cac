//! The acceptance suite: one test per criterion, each printing a pass/fail
//! line. Exact identities are checked in integer arithmetic (tolerance 0);
//! spectral quantities carry the stated tolerances. Criterion 9 drives the
//! actual binary and compares reruns byte for byte.

use std::collections::HashSet;
use std::process::{Command, Output};

use ffincidence::apps::{
    dot_product_4d, dot_product_pair_count, dot_product_single, sum_product, vector_valued,
    PredicateVariant,
};
use ffincidence::counting::{count_incidences, phi_solutions, Method};
use ffincidence::geometry::{
    full_hyperplane_pairs, full_line_pairs, full_points, multiset_random_line_pairs,
    multiset_random_points, random_line_pairs, random_plane_points, random_points,
};
use ffincidence::gf::{build_field, FieldElement, FieldSpec};
use ffincidence::spectral::{
    build_graph, lambda_bound, mixing_check, mixing_check_l2, second_eigenvalue,
    verify_neighbor_formula, verify_square_decomposition,
};
use ffincidence::theorems::{build_energy_reduction, verify_hyperplane, verify_vinh, LambdaMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field(q: u64) -> FieldSpec {
    match q {
        4 => build_field(2, 2),
        8 => build_field(2, 3),
        9 => build_field(3, 2),
        _ => build_field(q, 1),
    }
    .unwrap()
}

fn pass(criterion: u32, name: &str, detail: &str) {
    println!("criterion {criterion} ({name}): PASS — {detail}");
}

#[test]
fn criterion_1_field_axioms() {
    let orders = [2u64, 3, 4, 5, 7, 8, 9];
    for &q in &orders {
        let f = field(q);
        for a in f.elements() {
            if !a.is_zero() {
                let inv = f.inv(a).unwrap();
                assert_eq!(f.mul(a, inv), FieldElement::ONE, "inverse fails in GF({q})");
            }
            for b in f.elements() {
                assert_eq!(f.add(a, b), f.add(b, a), "GF({q}) + not commutative");
                assert_eq!(f.mul(a, b), f.mul(b, a), "GF({q}) · not commutative");
                for c in f.elements() {
                    assert_eq!(
                        f.add(f.add(a, b), c),
                        f.add(a, f.add(b, c)),
                        "GF({q}) + not associative"
                    );
                    assert_eq!(
                        f.mul(f.mul(a, b), c),
                        f.mul(a, f.mul(b, c)),
                        "GF({q}) · not associative"
                    );
                    assert_eq!(
                        f.mul(a, f.add(b, c)),
                        f.add(f.mul(a, b), f.mul(a, c)),
                        "GF({q}) not distributive"
                    );
                }
            }
        }
    }
    pass(
        1,
        "field axioms",
        "exhaustive associativity/commutativity/distributivity/inverses for q in {2,3,4,5,7,8,9}, 0 failures",
    );
}

#[test]
fn criterion_2_oracle_equivalence() {
    let mut instances = 0u64;
    for q in [2u64, 3, 4, 5, 7, 9] {
        let f = field(q);
        let population = (q * q * q * q).min(40) as usize;
        for seed in 0..200u64 {
            let (p, l) = if seed % 2 == 0 {
                (
                    random_points(&f, 2, 2, population, seed).unwrap(),
                    random_line_pairs(&f, population, seed % 4 == 0, seed + 10_000).unwrap(),
                )
            } else {
                (
                    multiset_random_points(&f, 2, 2, population / 2 + 1, 6, seed).unwrap(),
                    multiset_random_line_pairs(&f, population / 2 + 1, false, 6, seed + 10_000)
                        .unwrap(),
                )
            };
            let naive = count_incidences(&f, &p, &l, Method::Naive).count;
            let indexed = count_incidences(&f, &p, &l, Method::Indexed).count;
            assert_eq!(naive, indexed, "q={q} seed={seed}");
            instances += 1;
        }
    }
    pass(
        2,
        "oracle equivalence",
        &format!("naive == indexed on {instances} seeded instances (200 per q, multisets included), 0 disagreements"),
    );
}

#[test]
fn criterion_3_full_space_identities() {
    // I(full, full) = |L|·q², exactly.
    for q in [2u64, 3, 4, 5, 7] {
        let f = field(q);
        let p = full_points(&f, 2, 2).unwrap();
        let l = full_line_pairs(&f).unwrap();
        let i = count_incidences(&f, &p, &l, Method::Indexed).count;
        assert_eq!(i, l.weight() * q * q, "q={q}");
    }

    // Line-pair main-term identity on full spaces, discrepancy exactly 0.
    for q in [2u64, 3, 5] {
        let f = field(q);
        let p = full_points(&f, 2, 2).unwrap();
        let l = full_line_pairs(&f).unwrap();
        let r = verify_vinh(&f, &p, &l, LambdaMode::Paper, None).unwrap();
        assert!(r.discrepancy_is_zero(), "q={q}: {}", r.discrepancy);
        if q == 2 {
            assert_eq!(r.lhs, 144);
        }
    }

    // Hyperplane-pair analogue at d1 = d2 = 3.
    for q in [2u64, 3] {
        let f = field(q);
        let p = full_points(&f, 3, 3).unwrap();
        let h = full_hyperplane_pairs(&f, 3, 3).unwrap();
        let r = verify_hyperplane(&f, &p, &h, LambdaMode::Paper, None).unwrap();
        assert!(r.discrepancy_is_zero(), "q={q}: {}", r.discrepancy);
    }
    pass(
        3,
        "full-space identities",
        "I = |L|·q² for q in {2,3,4,5,7} (q=2: I=144); line-pair and d=3 hyperplane-pair discrepancies exactly 0",
    );
}

#[test]
fn criterion_4_graph_structure() {
    for q in [2u64, 3, 5] {
        let f = field(q);
        // build_graph verifies (q+1)²-regularity at every vertex.
        let g = build_graph(&f, 2, 2).unwrap();
        assert_eq!(g.k(), (q + 1) * (q + 1), "q={q}");
        verify_neighbor_formula(&g).unwrap_or_else(|e| panic!("q={q}: {e}"));
        let d = verify_square_decomposition(&g).unwrap_or_else(|e| panic!("q={q}: {e}"));
        assert_eq!(d.e_degree, 2 * q * (q + 1), "q={q}");
    }
    pass(
        4,
        "graph structure",
        "regularity, three-case neighbor formula, and A² = J + ((q+1)²-1)I + qE entrywise for q in {2,3,5}, tolerance 0",
    );
}

#[test]
fn criterion_5_spectral_bound() {
    for q in [2u64, 3, 5] {
        let f = field(q);
        let g = build_graph(&f, 2, 2).unwrap();
        // second_eigenvalue errors if λ₂ exceeds the stated bound.
        let r = second_eigenvalue(&g, 1e-10).unwrap();
        let bound = (2.0 * (q as f64).powi(3) + 3.0 * (q as f64).powi(2) + 2.0 * q as f64).sqrt();
        assert!(r.lambda2 <= bound, "q={q}");
        assert!(r.residual <= 1e-8, "q={q}: residual {}", r.residual);
        if q == 2 {
            // Dense-oracle recording: (q+1)√q = 3√2.
            assert!(
                (r.lambda2 - 4.242640687119285).abs() <= 1e-6,
                "q=2 lambda2 = {}",
                r.lambda2
            );
        }
    }
    for (d1, d2, q) in [(2usize, 3usize, 2u64), (3, 3, 2), (2, 3, 3)] {
        let f = field(q);
        let g = build_graph(&f, d1, d2).unwrap();
        let r = second_eigenvalue(&g, 1e-10).unwrap();
        assert!(
            r.lambda2 <= lambda_bound(&f, d1, d2),
            "({d1},{d2},{q}): {} > {}",
            r.lambda2,
            lambda_bound(&f, d1, d2)
        );
        assert!(r.residual <= 1e-8);
    }
    pass(
        5,
        "spectral bound",
        "λ₂ ≤ √(2q³+3q²+2q) for q in {2,3,5} (q=2 matches 4.2426407 within 1e-6, residual ≤ 1e-8); generalized bound holds for (2,3,2),(3,3,2),(2,3,3)",
    );
}

#[test]
fn criterion_6_mixing_lemmas() {
    for q in [2u64, 3, 5] {
        let f = field(q);
        let g = build_graph(&f, 2, 2).unwrap();
        let lambda = second_eigenvalue(&g, 1e-10).unwrap().lambda2;
        let mut rng = ChaCha8Rng::seed_from_u64(600 + q);
        for case in 0..500 {
            let pick = |rng: &mut ChaCha8Rng| {
                let density = rng.random_range(0.02..0.98);
                (0..g.n() as u32)
                    .filter(|_| rng.random_bool(density))
                    .collect::<Vec<_>>()
            };
            let u = pick(&mut rng);
            let v = pick(&mut rng);
            let r = mixing_check(&g, &u, &v, lambda);
            assert!(r.ok, "q={q} case={case}: {} > {}", r.discrepancy, r.bound);
        }
        for case in 0..200 {
            let weights = |rng: &mut ChaCha8Rng| -> Vec<u64> {
                (0..g.n())
                    .map(|_| if rng.random_bool(0.6) { rng.random_range(0..9) } else { 0 })
                    .collect()
            };
            let fw = weights(&mut rng);
            let gw = weights(&mut rng);
            let r = mixing_check_l2(&g, &fw, &gw, lambda).unwrap();
            assert!(r.ok, "q={q} L2 case={case}: {} > {}", r.discrepancy, r.bound);
        }
    }
    pass(
        6,
        "mixing lemmas",
        "500 random (U,V) pairs and 200 multiplicity-function pairs per graph (q in {2,3,5}) at computed λ₂, 0 violations",
    );
}

#[test]
fn criterion_7_energy_lemma_and_reduction() {
    // The solution/energy inequality on arbitrary random maps.
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    for case in 0..500 {
        let domain_len = rng.random_range(1..=80usize);
        let codomain = rng.random_range(1..=25u32);
        let table: Vec<u32> = (0..domain_len)
            .map(|_| rng.random_range(0..codomain))
            .collect();
        let target: HashSet<u32> = (0..codomain).filter(|_| rng.random_bool(0.5)).collect();
        let domain: Vec<usize> = (0..domain_len).collect();
        let r = phi_solutions(&domain, &target, |&i| table[i]).unwrap();
        assert!(r.bound_ok, "case {case}");
    }

    // Both energy counters agree on 100 instances per q.
    for q in [2u64, 3, 5] {
        let f = field(q);
        for seed in 0..100u64 {
            let a = random_plane_points(&f, 3, seed).unwrap();
            let l = random_line_pairs(&f, 4, true, seed + 19).unwrap();
            // Internal cross-check errors on disagreement.
            let r = build_energy_reduction(&f, &a, &l).unwrap();
            assert_eq!(r.q_set.weight(), 12, "q={q} seed={seed}");
            assert_eq!(r.r_set.weight(), 12, "q={q} seed={seed}");
        }
    }
    pass(
        7,
        "energy lemma and reductions",
        "solutions² ≤ |Y|·energy on 500 random maps; I(Q,R) equals quadruple enumeration on 100 instances per q in {2,3,5}",
    );
}

#[test]
fn criterion_8_applications() {
    // Corrected-variant reduction equals direct enumeration (asserted
    // inside the call) on 50 seeds per q.
    for q in [2u64, 3, 5] {
        let f = field(q);
        for seed in 0..50u64 {
            let e = random_points(&f, 2, 2, ((q * q * q * q) / 2).clamp(4, 20) as usize, seed)
                .unwrap();
            dot_product_pair_count(
                &f,
                &e,
                FieldElement(1 % f.q()),
                FieldElement((seed % u64::from(f.q())) as u32),
                PredicateVariant::Corrected,
            )
            .unwrap_or_else(|err| panic!("q={q} seed={seed}: {err}"));
        }
    }

    // Full-space as-written count at q = 3.
    let f3 = field(3);
    let e_full = full_points(&f3, 2, 2).unwrap();
    let r = dot_product_pair_count(
        &f3,
        &e_full,
        FieldElement(1),
        FieldElement(1),
        PredicateVariant::AsWritten,
    )
    .unwrap();
    assert_eq!(r.count, 648);

    // 4d decomposition equals the direct count for every t.
    for q in [2u64, 3] {
        let f = field(q);
        let e = ffincidence::geometry::enumerate_affine_points(&f, 4).unwrap();
        let mut total = 0u64;
        for t in f.elements() {
            total += dot_product_4d(&f, &e, t)
                .unwrap_or_else(|err| panic!("q={q} t={t}: {err}"))
                .count;
        }
        assert_eq!(total, (e.len() * e.len()) as u64, "q={q} partition identity");
    }

    // Single dot-product sanity at the stated example.
    let all2 = ffincidence::geometry::enumerate_affine_points(&f3, 2).unwrap();
    assert_eq!(dot_product_single(&f3, &all2, FieldElement(1)).unwrap().count, 24);

    // |A|³ ≤ I(P, L), exactly, on 50 seeded A per q (asserted inside).
    for q in [3u64, 5] {
        let f = field(q);
        for seed in 0..50u64 {
            let a = random_plane_points(&f, 6, seed).unwrap();
            sum_product(&f, &a).unwrap_or_else(|err| panic!("q={q} seed={seed}: {err}"));
        }
    }

    // |A||B| ≤ √(|F|·|E|), exactly, on 50 seeds (asserted inside).
    for seed in 0..50u64 {
        let f = field(5);
        let a = random_plane_points(&f, 5, seed).unwrap();
        let b = random_plane_points(&f, 7, seed + 1_000).unwrap();
        vector_valued(&f, &a, &b).unwrap_or_else(|err| panic!("seed={seed}: {err}"));
    }
    pass(
        8,
        "applications",
        "dot-pair reduction == direct (50 seeds/q, q=3 as_written full = 648), 4d split == direct for all t, |A|³ ≤ I on 50 seeds/q, image chain exact on 50 seeds",
    );
}

fn ffincidence(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffincidence"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_9_report_regressions() {
    let grids: Vec<(&str, Vec<&str>)> = vec![
        (
            "cs",
            vec!["verify", "--theorem", "cs", "--q", "2,3,4,5,7", "--gen", "random_points:n=20", "--gen-lines", "random_linepairs:n=20", "--seeds", "0..99", "--out", "csv"],
        ),
        (
            "vinh",
            vec!["verify", "--theorem", "vinh", "--q", "2,3,4,5,7", "--gen", "random_points:n=20", "--gen-lines", "random_linepairs:n=20", "--seeds", "0..99", "--lambda", "paper", "--out", "csv"],
        ),
        (
            "hyperplane",
            vec!["verify", "--theorem", "hyperplane", "--q", "2,3,4,5,7", "--d1", "2", "--d2", "3", "--gen", "random_points:n=20", "--gen-lines", "random_hyperplanepairs:n=20", "--seeds", "0..99", "--out", "csv"],
        ),
        (
            "cartesian-statement",
            vec!["verify", "--theorem", "cartesian", "--q", "2,3,4,5,7", "--gen", "random_plane:n=4", "--gen-b", "random_plane:n=8", "--gen-lines", "random_linepairs:n=8,nonvertical=true", "--seeds", "0..99", "--threshold-exponent", "3.5", "--out", "csv"],
        ),
        (
            "cartesian-proof",
            vec!["verify", "--theorem", "cartesian", "--q", "2,3,4,5,7", "--gen", "random_plane:n=4", "--gen-b", "random_plane:n=8", "--gen-lines", "random_linepairs:n=8,nonvertical=true", "--seeds", "0..99", "--threshold-exponent", "2.0", "--out", "csv"],
        ),
        (
            "sdz",
            vec!["verify", "--theorem", "sdz", "--q", "2,3,4,5,7", "--gen", "random_points:n=20", "--gen-lines", "random_linepairs:n=20", "--seeds", "0..99", "--out", "csv"],
        ),
    ];
    for (name, args) in &grids {
        let first = ffincidence(args);
        assert!(
            first.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&first.stderr)
        );
        let expected_rows = if *name == "cs" { 1000 } else { 500 };
        let line_count = first.stdout.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count();
        assert_eq!(line_count, expected_rows + 1, "{name}: row count");
        let second = ffincidence(args);
        assert_eq!(first.stdout, second.stdout, "{name}: rerun not byte-identical");
    }

    // The documented known exceedance: CS part 2 on full spaces at q = 2
    // has ratio 144/132 = 12/11 ≈ 1.09.
    let full = ffincidence(&[
        "verify", "--theorem", "cs", "--q", "2", "--gen", "full_points", "--gen-lines",
        "full_linepairs", "--seeds", "0", "--out", "csv",
    ]);
    assert!(full.status.success());
    let text = String::from_utf8_lossy(&full.stdout);
    let cs2 = text
        .lines()
        .find(|l| l.contains(",cs2,"))
        .expect("cs2 row present");
    let ratio: f64 = cs2.split(',').nth(10).unwrap().parse().unwrap();
    assert!(
        (ratio - 12.0 / 11.0).abs() < 1e-9,
        "cs2 full-space ratio {ratio}"
    );
    pass(
        9,
        "report regressions",
        "six report tables over q in {2,3,4,5,7} x 100 seeds emitted as CSV, reruns byte-identical, CS part-2 exceedance 12/11 reproduced",
    );
}
