//! Applications of the incidence machinery: two-parameter dot-product
//! counts, the componentwise sum-product experiment, and the vector-valued
//! image bound. Every count here is exact; asymptotic statements surface as
//! recorded ratios and flags.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::counting::{count_incidences, Method};
use crate::error::{Error, Result};
use crate::geometry::{
    cartesian_product, Line, LinePair, LinePairSet, PlanePoint, PointSet,
};
use crate::gf::{FieldElement, FieldSpec};

/// Which reading of the pair predicate is counted: the display's
/// `x·z = a, y·z = b` (as written, second pair component unused) or the
/// reduction-matching `x·z = a, y·t = b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PredicateVariant {
    AsWritten,
    Corrected,
}

impl std::fmt::Display for PredicateVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PredicateVariant::AsWritten => write!(f, "as_written"),
            PredicateVariant::Corrected => write!(f, "corrected"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DotProductReport {
    pub a: u32,
    pub b: u32,
    pub count: u64,
    /// |E|²/q².
    pub main_term: f64,
    /// |E|²/q² + q^{3/2}|E|.
    pub bound: f64,
    pub predicate_variant: PredicateVariant,
}

/// The solution set of u·X = a in F_q²: a line when u ≠ 0, everything when
/// u = 0 = a, empty when u = 0 ≠ a.
enum DualSolutions {
    Line(Line),
    All,
    Empty,
}

impl DualSolutions {
    fn of(field: &FieldSpec, u: &[FieldElement], a: FieldElement) -> DualSolutions {
        if u[1].is_zero() {
            if u[0].is_zero() {
                if a.is_zero() {
                    DualSolutions::All
                } else {
                    DualSolutions::Empty
                }
            } else {
                let inv = field.inv(u[0]).expect("nonzero");
                DualSolutions::Line(Line::Vertical {
                    x0: field.mul(a, inv),
                })
            }
        } else {
            let inv = field.inv(u[1]).expect("nonzero");
            DualSolutions::Line(Line::Slant {
                slope: field.neg(field.mul(u[0], inv)),
                icept: field.mul(a, inv),
            })
        }
    }

    fn contains(&self, field: &FieldSpec, p: PlanePoint) -> bool {
        match self {
            DualSolutions::Line(l) => l.contains(field, p),
            DualSolutions::All => true,
            DualSolutions::Empty => false,
        }
    }
}

/// Exact D(E, a, b): ordered pairs of E x E satisfying the chosen predicate
/// variant, counted by direct quadruple enumeration. The corrected variant
/// is additionally recomputed through the dual line-pair multiset
/// {(u·X = a, v·Y = b) : (u, v) in E} and the incidence engine; the two
/// routes must agree.
pub fn dot_product_pair_count(
    field: &FieldSpec,
    e_set: &PointSet,
    a: FieldElement,
    b: FieldElement,
    variant: PredicateVariant,
) -> Result<DotProductReport> {
    if e_set.is_weighted() {
        return Err(Error::WeightedUnsupported("dot_product_pair_count"));
    }
    let elems: Vec<_> = e_set.iter().map(|(p, _)| p).collect();
    if let Some(p) = elems.first() {
        if p.dims() != (2, 2) {
            let (d1, d2) = p.dims();
            return Err(Error::UnsupportedDims { d1, d2 });
        }
    }
    let mut as_written = 0u64;
    let mut corrected = 0u64;
    for first in &elems {
        let (x, y) = (&first.first, &first.second);
        for second in &elems {
            let (z, t) = (&second.first, &second.second);
            if field.dot(x, z) == a {
                if field.dot(y, z) == b {
                    as_written += 1;
                }
                if field.dot(y, t) == b {
                    corrected += 1;
                }
            }
        }
    }

    // Reduction route: degenerate duals (u = 0 or v = 0) are handled by
    // membership scans, genuine line-pairs go through the incidence engine.
    let mut dual_lines = LinePairSet::new();
    let mut reduction = 0u64;
    for second in &elems {
        let su = DualSolutions::of(field, &second.first, a);
        let sv = DualSolutions::of(field, &second.second, b);
        match (su, sv) {
            (DualSolutions::Empty, _) | (_, DualSolutions::Empty) => {}
            (DualSolutions::Line(lu), DualSolutions::Line(lv)) => {
                dual_lines.push(LinePair::new(lu, lv), 1)?;
            }
            (su, sv) => {
                // At least one side is the whole plane.
                reduction += elems
                    .iter()
                    .filter(|p| {
                        su.contains(field, [p.first[0], p.first[1]])
                            && sv.contains(field, [p.second[0], p.second[1]])
                    })
                    .count() as u64;
            }
        }
    }
    if !dual_lines.is_empty() {
        reduction += count_incidences(field, e_set, &dual_lines, Method::Indexed).count;
    }
    if reduction != corrected {
        return Err(Error::OracleMismatch {
            left_name: "line-pair reduction",
            left: reduction,
            right_name: "direct corrected count",
            right: corrected,
        });
    }

    let q = f64::from(field.q());
    let size = e_set.weight() as f64;
    let main_term = size * size / (q * q);
    Ok(DotProductReport {
        a: a.0,
        b: b.0,
        count: match variant {
            PredicateVariant::AsWritten => as_written,
            PredicateVariant::Corrected => corrected,
        },
        main_term,
        bound: main_term + q.powf(1.5) * size,
        predicate_variant: variant,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DotSingleReport {
    pub a: u32,
    pub count: u64,
    /// |E|²/q.
    pub main_term: f64,
    /// |E|²/q + q^{(d-1)/2}|E|.
    pub bound: f64,
    pub ratio: f64,
}

/// Exact |{(x, y) in E x E : x·y = a}| for E in F_q^d, d in {2, 4}, with
/// the stated nonzero-product bound.
pub fn dot_product_single(
    field: &FieldSpec,
    points: &[Vec<FieldElement>],
    a: FieldElement,
) -> Result<DotSingleReport> {
    if a.is_zero() {
        return Err(Error::ZeroTarget);
    }
    let d = points.first().map(|p| p.len()).unwrap_or(2);
    if d != 2 && d != 4 {
        return Err(Error::UnsupportedDims { d1: d, d2: d });
    }
    let count = points
        .iter()
        .map(|x| points.iter().filter(|y| field.dot(x, y) == a).count() as u64)
        .sum();
    let q = f64::from(field.q());
    let size = points.len() as f64;
    let main_term = size * size / q;
    let bound = main_term + q.powf((d as f64 - 1.0) / 2.0) * size;
    Ok(DotSingleReport {
        a: a.0,
        count,
        main_term,
        bound,
        ratio: if bound > 0.0 { count as f64 / bound } else { 0.0 },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Dot4dReport {
    pub t: u32,
    pub count: u64,
    /// |E|²/q.
    pub main_term: f64,
    /// |E|²/q + q^{1/2}|E|.
    pub bound: f64,
}

/// |{(x, y) in E x E : x·y = t}| for E in F_q^4, computed directly and by
/// splitting the dot product into two half-sums bucketed over (a, b) with
/// a + b = t; the routes must agree.
pub fn dot_product_4d(
    field: &FieldSpec,
    points: &[Vec<FieldElement>],
    t: FieldElement,
) -> Result<Dot4dReport> {
    if points.iter().any(|p| p.len() != 4) {
        return Err(Error::UnsupportedDims { d1: 4, d2: 4 });
    }
    let direct = points
        .iter()
        .map(|x| points.iter().filter(|y| field.dot(x, y) == t).count() as u64)
        .sum::<u64>();

    let q = field.q() as usize;
    let mut table = vec![0u64; q * q];
    for x in points {
        for y in points {
            let half1 = field.add(field.mul(x[0], y[0]), field.mul(x[1], y[1]));
            let half2 = field.add(field.mul(x[2], y[2]), field.mul(x[3], y[3]));
            table[half1.0 as usize * q + half2.0 as usize] += 1;
        }
    }
    let decomposed: u64 = field
        .elements()
        .map(|a| table[a.0 as usize * q + field.sub(t, a).0 as usize])
        .sum();
    if direct != decomposed {
        return Err(Error::OracleMismatch {
            left_name: "direct 4d count",
            left: direct,
            right_name: "half-sum decomposition",
            right: decomposed,
        });
    }
    let qf = f64::from(field.q());
    let size = points.len() as f64;
    let main_term = size * size / qf;
    Ok(Dot4dReport {
        t: t.0,
        count: direct,
        main_term,
        bound: main_term + qf.sqrt() * size,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SumProductReport {
    pub size_a: u64,
    pub sumset: u64,
    pub otimes_set: u64,
    pub min_side: u64,
    pub max_side: u64,
    /// min ≤ q^{7/2}/|A|² with constant 1.
    pub hypothesis_ok: bool,
    /// max_side / (q^{-3/8}|A|).
    pub conclusion_ratio: f64,
    /// I(P, L) of the proof instance; at least |A|³ always.
    pub incidences: u64,
}

/// Exact |A+A| and |A⊗A| with the proof's incidence instance:
/// P = (A+A) x (A⊗A) under the coordinate-mixing product and L the multiset
/// of line-pairs (Y = u1(X - v1), Y = u2(X - v2)) over (u, v) in A². Each
/// (u, v) contributes at least |A| incidences, so |A|³ ≤ I(P, L) exactly;
/// a violation is an error.
pub fn sum_product(field: &FieldSpec, a_points: &[PlanePoint]) -> Result<SumProductReport> {
    if a_points.is_empty() {
        return Err(Error::EmptyInput("A"));
    }
    let mut sums = HashSet::new();
    let mut products = HashSet::new();
    for x in a_points {
        for y in a_points {
            sums.insert([field.add(x[0], y[0]), field.add(x[1], y[1])]);
            products.insert([field.mul(x[0], y[0]), field.mul(x[1], y[1])]);
        }
    }
    let mut sums: Vec<PlanePoint> = sums.into_iter().collect();
    let mut products: Vec<PlanePoint> = products.into_iter().collect();
    sums.sort();
    products.sort();

    let point_set = cartesian_product(&sums, &products)?;
    let mut lines = LinePairSet::new();
    for u in a_points {
        for v in a_points {
            lines.push(
                LinePair::new(
                    Line::Slant {
                        slope: u[0],
                        icept: field.neg(field.mul(u[0], v[0])),
                    },
                    Line::Slant {
                        slope: u[1],
                        icept: field.neg(field.mul(u[1], v[1])),
                    },
                ),
                1,
            )?;
        }
    }
    let incidences = count_incidences(field, &point_set, &lines, Method::Indexed).count;
    let cube = (a_points.len() as u64).pow(3);
    if incidences < cube {
        return Err(Error::ChainViolation {
            lhs: cube,
            bound: incidences as f64,
            context: "sum-product incidence lower bound |A|^3 <= I(P,L)",
        });
    }

    let q = f64::from(field.q());
    let size_a = a_points.len() as u64;
    let (sum_len, prod_len) = (sums.len() as u64, products.len() as u64);
    let min_side = sum_len.min(prod_len);
    let max_side = sum_len.max(prod_len);
    Ok(SumProductReport {
        size_a,
        sumset: sum_len,
        otimes_set: prod_len,
        min_side,
        max_side,
        hypothesis_ok: (min_side as f64) <= q.powf(3.5) / (size_a as f64 * size_a as f64),
        conclusion_ratio: max_side as f64 / (q.powf(-0.375) * size_a as f64),
        incidences,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VectorValuedReport {
    pub image_size: u64,
    /// |{(a,b,a',b') : F(a,b) = F(a',b')}|, diagonal included.
    pub energy: u64,
    /// I(P, L) for P = B x B and the sign-filtered line-pair family.
    pub incidences: u64,
    /// energy ≤ 2·I(P, L), as stated; degenerate inputs can fail it, which
    /// is recorded here rather than asserted.
    pub le_two_incidences_ok: bool,
    /// |A|²|B| ≤ q^{7/2}.
    pub hypothesis_ok: bool,
    /// image_size / (q^{-3/8}|A||B|).
    pub ratio: f64,
    /// In characteristic 2 the a ≠ ±a' filter collapses to a ≠ a'.
    pub char_two_filter_collapsed: bool,
}

/// The image F(x, y) = (x1² - x1y1, x2² - x2y2) on A x B: exact image size
/// and energy, the unconditional chain |A||B| ≤ √(|F|·|E|) asserted in
/// integers, and the proof's incidence comparison recorded.
pub fn vector_valued(
    field: &FieldSpec,
    a_points: &[PlanePoint],
    b_points: &[PlanePoint],
) -> Result<VectorValuedReport> {
    if a_points.is_empty() {
        return Err(Error::EmptyInput("A"));
    }
    if b_points.is_empty() {
        return Err(Error::EmptyInput("B"));
    }
    let f_map = |x: &PlanePoint, y: &PlanePoint| {
        [
            field.mul(x[0], field.sub(x[0], y[0])),
            field.mul(x[1], field.sub(x[1], y[1])),
        ]
    };
    let mut classes: HashMap<PlanePoint, u64> = HashMap::new();
    for x in a_points {
        for y in b_points {
            *classes.entry(f_map(x, y)).or_insert(0) += 1;
        }
    }
    let image_size = classes.len() as u64;
    let energy: u64 = classes.values().map(|&c| c * c).sum();
    let domain = (a_points.len() as u128) * (b_points.len() as u128);
    if domain * domain > u128::from(image_size) * u128::from(energy) {
        return Err(Error::ChainViolation {
            lhs: (a_points.len() * b_points.len()) as u64,
            bound: (image_size as f64 * energy as f64).sqrt(),
            context: "solution-energy chain for |F(A,B)|",
        });
    }

    // The proof's incidence instance: solutions of F(a,b) = F(a',b') with
    // the sign filter on (a, a') are incidences between (b, b') in B x B and
    // the line-pair with components a_i² - a_i·X = a'_i² - a'_i·Y.
    let char_two = field.p() == 2;
    let point_set = cartesian_product(b_points, b_points)?;
    let mut constraints: Vec<[VvConstraint; 2]> = Vec::new();
    for a in a_points {
        for a_prime in a_points {
            let differs = |i: usize| {
                a[i] != a_prime[i] && a[i] != field.neg(a_prime[i])
            };
            if !(differs(0) || differs(1)) {
                continue;
            }
            constraints.push([
                VvConstraint::of(field, a[0], a_prime[0]),
                VvConstraint::of(field, a[1], a_prime[1]),
            ]);
        }
    }
    let mut incidences = 0u64;
    for (p, _) in point_set.iter() {
        let first = [p.first[0], p.first[1]];
        let second = [p.second[0], p.second[1]];
        for c in &constraints {
            if c[0].contains(field, first) && c[1].contains(field, second) {
                incidences += 1;
            }
        }
    }

    let q = f64::from(field.q());
    let (na, nb) = (a_points.len() as f64, b_points.len() as f64);
    Ok(VectorValuedReport {
        image_size,
        energy,
        incidences,
        le_two_incidences_ok: energy <= 2 * incidences,
        hypothesis_ok: na * na * nb <= q.powf(3.5),
        ratio: image_size as f64 / (q.powf(-0.375) * na * nb),
        char_two_filter_collapsed: char_two,
    })
}

/// One component constraint a² - a·X = a'² - a'·Y, resolved to a line, the
/// whole plane, or a single vertical.
enum VvConstraint {
    Line(Line),
    All,
}

impl VvConstraint {
    fn of(field: &FieldSpec, a: FieldElement, a_prime: FieldElement) -> VvConstraint {
        let a_sq = field.mul(a, a);
        let ap_sq = field.mul(a_prime, a_prime);
        if !a_prime.is_zero() {
            // Y = (a/a')X + (a'² - a²)/a'.
            let inv = field.inv(a_prime).expect("nonzero");
            VvConstraint::Line(Line::Slant {
                slope: field.mul(a, inv),
                icept: field.mul(field.sub(ap_sq, a_sq), inv),
            })
        } else if !a.is_zero() {
            // a(a - X) = 0 with a ≠ 0: X = a.
            VvConstraint::Line(Line::Vertical { x0: a })
        } else {
            VvConstraint::All
        }
    }

    fn contains(&self, field: &FieldSpec, p: PlanePoint) -> bool {
        match self {
            VvConstraint::Line(l) => l.contains(field, p),
            VvConstraint::All => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{full_points, random_plane_points};
    use crate::gf::build_field;

    fn fe(v: u32) -> FieldElement {
        FieldElement(v)
    }

    fn full_plane(field: &FieldSpec) -> Vec<PlanePoint> {
        crate::geometry::enumerate_affine_points(field, 2)
            .unwrap()
            .into_iter()
            .map(|v| [v[0], v[1]])
            .collect()
    }

    #[test]
    fn dot_pair_full_space_q3() {
        let f3 = build_field(3, 1).unwrap();
        let e = full_points(&f3, 2, 2).unwrap();
        let written =
            dot_product_pair_count(&f3, &e, fe(1), fe(1), PredicateVariant::AsWritten).unwrap();
        // Closed form (q²-1)·q⁴ = 8·81.
        assert_eq!(written.count, 648);
        let corrected =
            dot_product_pair_count(&f3, &e, fe(1), fe(1), PredicateVariant::Corrected).unwrap();
        // Closed form (q(q²-1))² = 24², confirmed by the reduction oracle.
        assert_eq!(corrected.count, 576);
    }

    #[test]
    fn dot_pair_empty() {
        let f3 = build_field(3, 1).unwrap();
        let r = dot_product_pair_count(
            &f3,
            &PointSet::new(),
            fe(0),
            fe(0),
            PredicateVariant::Corrected,
        )
        .unwrap();
        assert_eq!(r.count, 0);
    }

    #[test]
    fn dot_pair_reduction_agrees_on_seeds() {
        for q in [2u64, 3, 5] {
            let field = build_field(q, 1).unwrap();
            for seed in 0..15 {
                let e = crate::geometry::random_points(&field, 2, 2, 12, seed).unwrap();
                for a in 0..2u32 {
                    // Internal reduction-vs-direct agreement is asserted
                    // inside the call.
                    dot_product_pair_count(
                        &field,
                        &e,
                        fe(a),
                        fe(1),
                        PredicateVariant::Corrected,
                    )
                    .unwrap();
                }
            }
        }
    }

    #[test]
    fn dot_single_examples() {
        let f3 = build_field(3, 1).unwrap();
        let all: Vec<Vec<FieldElement>> =
            crate::geometry::enumerate_affine_points(&f3, 2).unwrap();
        let r = dot_product_single(&f3, &all, fe(1)).unwrap();
        assert_eq!(r.count, 24); // q(q²-1)

        // Single point with a = e·e.
        let e = vec![vec![fe(1), fe(1)]];
        let r = dot_product_single(&f3, &e, fe(2)).unwrap();
        assert_eq!(r.count, 1);

        assert!(matches!(
            dot_product_single(&f3, &all, fe(0)),
            Err(Error::ZeroTarget)
        ));
    }

    #[test]
    fn dot_4d_decomposition() {
        for q in [2u64, 3] {
            let field = build_field(q, 1).unwrap();
            let all = crate::geometry::enumerate_affine_points(&field, 4).unwrap();
            let size = all.len() as u64;
            let mut total = 0u64;
            for t in field.elements() {
                // Internal direct-vs-decomposed equality asserted in the call.
                total += dot_product_4d(&field, &all, t).unwrap().count;
            }
            // Partition identity: every ordered pair lands at exactly one t.
            assert_eq!(total, size * size, "q={q}");
        }

        let f2 = build_field(2, 1).unwrap();
        let zero = vec![vec![fe(0); 4]];
        assert_eq!(dot_product_4d(&f2, &zero, fe(0)).unwrap().count, 1);
    }

    #[test]
    fn sum_product_examples() {
        let f3 = build_field(3, 1).unwrap();
        let r = sum_product(&f3, &[[fe(0), fe(0)]]).unwrap();
        assert_eq!((r.sumset, r.otimes_set), (1, 1));
        assert!(r.incidences >= 1);

        let r = sum_product(&f3, &full_plane(&f3)).unwrap();
        assert_eq!((r.sumset, r.otimes_set), (9, 9));
        assert!(r.incidences >= 729);

        assert!(matches!(sum_product(&f3, &[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn sum_product_lower_bound_on_seeds() {
        for q in [3u64, 5] {
            let field = build_field(q, 1).unwrap();
            for seed in 0..15 {
                let a = random_plane_points(&field, 5, seed).unwrap();
                let r = sum_product(&field, &a).unwrap();
                assert!(r.incidences >= 125, "q={q} seed={seed}");
            }
        }
    }

    #[test]
    fn vector_valued_examples() {
        let f2 = build_field(2, 1).unwrap();
        let origin = [[fe(0), fe(0)]];
        let r = vector_valued(&f2, &origin, &origin).unwrap();
        assert_eq!(r.image_size, 1);
        // Degenerate A: the filter removes every line-pair, so the stated
        // comparison fails and is recorded, not asserted.
        assert!(!r.le_two_incidences_ok);

        let all = full_plane(&f2);
        let r = vector_valued(&f2, &all, &all).unwrap();
        assert_eq!(r.image_size, 4); // exhaustive over all 16 (x, y) pairs
        assert!(r.char_two_filter_collapsed);
    }

    #[test]
    fn vector_valued_chain_on_seeds() {
        let f3 = build_field(3, 1).unwrap();
        for seed in 0..20 {
            let a = random_plane_points(&f3, 4, seed).unwrap();
            let b = random_plane_points(&f3, 4, seed + 100).unwrap();
            // |A||B| ≤ √(|F|·|E|) is asserted exactly inside the call.
            let r = vector_valued(&f3, &a, &b).unwrap();
            assert!(
                u128::from(r.image_size) * u128::from(r.energy) >= 16u128 * 16,
                "seed={seed}"
            );
        }
    }
}
