//! The incidence-counting engine: I(P, L) with and without multiplicities by
//! two independent methods, per-object degree profiles, and the
//! Cauchy-Schwarz solution/energy inequality for arbitrary finite maps.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{
    lines_through, HyperplanePair, LinePair, PointPair, PointSet, WeightedSet,
};
use crate::gf::FieldSpec;

/// Anything a point-pair can be incident to: line-pairs and hyperplane-pairs.
pub trait Block: Hash + Eq + Clone + Send + Sync {
    fn incident(&self, field: &FieldSpec, p: &PointPair) -> bool;

    /// All point-pairs on the block.
    fn points_on(&self, field: &FieldSpec) -> Vec<PointPair>;

    /// All blocks through a given point-pair.
    fn through(field: &FieldSpec, p: &PointPair) -> Vec<Self>;

    /// Size of `points_on` (for the indexed-direction cost model).
    fn points_on_len(field: &FieldSpec, p_example: &PointPair) -> u64;

    /// Size of `through` for the same cost model.
    fn through_len(field: &FieldSpec, p_example: &PointPair) -> u64;
}

impl Block for LinePair {
    fn incident(&self, field: &FieldSpec, p: &PointPair) -> bool {
        self.contains(field, p)
    }

    fn points_on(&self, field: &FieldSpec) -> Vec<PointPair> {
        self.points(field)
    }

    fn through(field: &FieldSpec, p: &PointPair) -> Vec<Self> {
        let a = lines_through(field, [p.first[0], p.first[1]]);
        let b = lines_through(field, [p.second[0], p.second[1]]);
        let mut out = Vec::with_capacity(a.len() * b.len());
        for &x in &a {
            for &y in &b {
                out.push(LinePair::new(x, y));
            }
        }
        out
    }

    fn points_on_len(field: &FieldSpec, _p: &PointPair) -> u64 {
        u64::from(field.q()) * u64::from(field.q())
    }

    fn through_len(field: &FieldSpec, _p: &PointPair) -> u64 {
        let per = u64::from(field.q()) + 1;
        per * per
    }
}

impl Block for HyperplanePair {
    fn incident(&self, field: &FieldSpec, p: &PointPair) -> bool {
        self.contains(field, p)
    }

    fn points_on(&self, field: &FieldSpec) -> Vec<PointPair> {
        self.points(field)
    }

    fn through(field: &FieldSpec, p: &PointPair) -> Vec<Self> {
        let a = hyperplanes_through(field, &p.first);
        let b = hyperplanes_through(field, &p.second);
        let mut out = Vec::with_capacity(a.len() * b.len());
        for x in &a {
            for y in &b {
                out.push(HyperplanePair::new(x.clone(), y.clone()));
            }
        }
        out
    }

    fn points_on_len(field: &FieldSpec, p: &PointPair) -> u64 {
        let q = u64::from(field.q());
        q.pow(p.first.len() as u32 - 1) * q.pow(p.second.len() as u32 - 1)
    }

    fn through_len(field: &FieldSpec, p: &PointPair) -> u64 {
        let q = u64::from(field.q());
        let count = |d: u32| (q.pow(d) - 1) / (q - 1);
        count(p.first.len() as u32) * count(p.second.len() as u32)
    }
}

/// The (q^d - 1)/(q - 1) hyperplanes through an affine point: one canonical
/// normal direction each, offset forced by the point.
fn hyperplanes_through(
    field: &FieldSpec,
    point: &[crate::gf::FieldElement],
) -> Vec<crate::geometry::Hyperplane> {
    crate::projective::enumerate_proj_points(field, point.len() - 1)
        .expect("hyperplane normal enumeration within caps")
        .into_iter()
        .map(|n| {
            let offset = field.dot(n.coords(), point);
            crate::geometry::Hyperplane::new(field, n.coords(), offset)
                .expect("projective point is a nonzero normal")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Naive,
    Indexed,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Naive => write!(f, "naive"),
            Method::Indexed => write!(f, "indexed"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IncidenceReport {
    pub count: u64,
    pub method: Method,
    pub elapsed: f64,
}

/// Exact weighted incidence count Σ m(p)·m(b) over incident pairs.
///
/// `Naive` scans P x B. `Indexed` compares the cost of walking the blocks
/// through each point against streaming each block's points, hash-indexing
/// the other side, and takes the cheaper direction. Both methods return the
/// same count on every input.
pub fn count_incidences<B: Block>(
    field: &FieldSpec,
    points: &PointSet,
    blocks: &WeightedSet<B>,
    method: Method,
) -> IncidenceReport {
    let start = Instant::now();
    let count = match method {
        Method::Naive => count_naive(field, points, blocks),
        Method::Indexed => count_indexed(field, points, blocks),
    };
    IncidenceReport {
        count,
        method,
        elapsed: start.elapsed().as_secs_f64(),
    }
}

fn count_naive<B: Block>(field: &FieldSpec, points: &PointSet, blocks: &WeightedSet<B>) -> u64 {
    let blocks: Vec<(&B, u64)> = blocks.iter().collect();
    let points: Vec<(&PointPair, u64)> = points.iter().collect();
    // Partial sums per point are independent; integer addition commutes, so
    // the total is schedule-independent.
    points
        .par_iter()
        .map(|(p, mp)| {
            let mut acc = 0u64;
            for (b, mb) in &blocks {
                if b.incident(field, p) {
                    acc += mp * mb;
                }
            }
            acc
        })
        .sum()
}

fn count_indexed<B: Block>(field: &FieldSpec, points: &PointSet, blocks: &WeightedSet<B>) -> u64 {
    let Some((p0, _)) = points.iter().next() else {
        return 0;
    };
    let by_points = points.support_len() as u64 * B::through_len(field, p0);
    let by_blocks = blocks.support_len() as u64 * B::points_on_len(field, p0);
    if by_points <= by_blocks {
        let index: HashMap<&B, u64> = blocks.iter().collect();
        points
            .iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|(p, mp)| {
                let mut acc = 0u64;
                for b in B::through(field, p) {
                    if let Some(mb) = index.get(&b) {
                        acc += mp * mb;
                    }
                }
                acc
            })
            .sum()
    } else {
        let index: HashMap<&PointPair, u64> = points.iter().collect();
        blocks
            .iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|(b, mb)| {
                let mut acc = 0u64;
                for p in b.points_on(field) {
                    if let Some(mp) = index.get(&p) {
                        acc += mp * mb;
                    }
                }
                acc
            })
            .sum()
    }
}

/// Per-object incidence degrees. Degrees are weighted by the opposite side's
/// multiplicities (|L_u| = Σ_{l incident to u} m(l)), and the sums weight
/// each object by its own multiplicity, so Σ m(u)|L_u| = Σ m(l)|P_l| = I
/// holds for multisets as well; for plain sets everything reduces to the
/// unweighted counts.
#[derive(Debug, Clone)]
pub struct DegreeProfile<B> {
    pub per_point: Vec<(PointPair, u64)>,
    pub per_block: Vec<(B, u64)>,
    /// Σ m(u)·|L_u| — equals the incidence count.
    pub sum_point: u64,
    /// Σ m(l)·|P_l| — equals the incidence count.
    pub sum_block: u64,
    /// Σ m(u)·|L_u|^2.
    pub sum_sq_point: u128,
    /// Σ m(l)·|P_l|^2.
    pub sum_sq_block: u128,
}

pub fn degree_profile<B: Block>(
    field: &FieldSpec,
    points: &PointSet,
    blocks: &WeightedSet<B>,
) -> DegreeProfile<B> {
    let mut per_point = Vec::with_capacity(points.support_len());
    let mut sum_point = 0u64;
    let mut sum_sq_point = 0u128;
    for (p, mp) in points.iter() {
        let deg: u64 = blocks
            .iter()
            .filter(|(b, _)| b.incident(field, p))
            .map(|(_, mb)| mb)
            .sum();
        sum_point += mp * deg;
        sum_sq_point += u128::from(mp) * u128::from(deg) * u128::from(deg);
        per_point.push((p.clone(), deg));
    }
    let mut per_block = Vec::with_capacity(blocks.support_len());
    let mut sum_block = 0u64;
    let mut sum_sq_block = 0u128;
    for (b, mb) in blocks.iter() {
        let deg: u64 = points
            .iter()
            .filter(|(p, _)| b.incident(field, p))
            .map(|(_, mp)| mp)
            .sum();
        sum_block += mb * deg;
        sum_sq_block += u128::from(mb) * u128::from(deg) * u128::from(deg);
        per_block.push((b.clone(), deg));
    }
    DegreeProfile {
        per_point,
        per_block,
        sum_point,
        sum_block,
        sum_sq_point,
        sum_sq_block,
    }
}

/// Counts for a map φ on a finite domain: `solutions` is the number of
/// domain elements landing in the target, `energy` the number of ordered
/// pairs (x, x') with φ(x) = φ(x'), diagonal included. `bound_ok` asserts
/// solutions ≤ √(|target|·energy), checked exactly in integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhiReport {
    pub solutions: u64,
    pub energy: u64,
    pub bound_ok: bool,
}

pub fn phi_solutions<X, Z, F>(domain: &[X], target: &HashSet<Z>, phi: F) -> Result<PhiReport>
where
    Z: Hash + Eq,
    F: Fn(&X) -> Z,
{
    let mut class_sizes: HashMap<Z, u64> = HashMap::new();
    for x in domain {
        *class_sizes.entry(phi(x)).or_insert(0) += 1;
    }
    let mut solutions = 0u64;
    let mut energy = 0u64;
    for (z, &c) in &class_sizes {
        energy += c * c;
        if target.contains(z) {
            solutions += c;
        }
    }
    let bound_ok =
        u128::from(solutions) * u128::from(solutions) <= target.len() as u128 * u128::from(energy);
    Ok(PhiReport {
        solutions,
        energy,
        bound_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        full_line_pairs, full_points, multiset_random_line_pairs, multiset_random_points,
        random_line_pairs, random_points, Line, LinePair,
    };
    use crate::gf::{build_field, FieldElement};

    fn fe(v: u32) -> FieldElement {
        FieldElement(v)
    }

    #[test]
    fn full_space_count_q2() {
        // Each of the 36 line-pairs holds q^2 = 4 of the 16 points: I = 144.
        let f2 = build_field(2, 1).unwrap();
        let p = full_points(&f2, 2, 2).unwrap();
        let l = full_line_pairs(&f2).unwrap();
        assert_eq!(count_incidences(&f2, &p, &l, Method::Naive).count, 144);
        assert_eq!(count_incidences(&f2, &p, &l, Method::Indexed).count, 144);
    }

    #[test]
    fn empty_sets_count_zero() {
        let f2 = build_field(2, 1).unwrap();
        let p = full_points(&f2, 2, 2).unwrap();
        let l = full_line_pairs(&f2).unwrap();
        let empty_p = PointSet::new();
        let empty_l = crate::geometry::LinePairSet::new();
        for method in [Method::Naive, Method::Indexed] {
            assert_eq!(count_incidences(&f2, &empty_p, &l, method).count, 0);
            assert_eq!(count_incidences(&f2, &p, &empty_l, method).count, 0);
        }
    }

    #[test]
    fn multiplicities_multiply() {
        let f2 = build_field(2, 1).unwrap();
        let mut p = PointSet::new();
        p.push(
            PointPair::new(vec![fe(0), fe(0)], vec![fe(0), fe(0)]),
            2,
        )
        .unwrap();
        let mut l = crate::geometry::LinePairSet::new();
        let y0 = Line::Slant { slope: fe(0), icept: fe(0) };
        l.push(LinePair::new(y0, y0), 3).unwrap();
        for method in [Method::Naive, Method::Indexed] {
            assert_eq!(count_incidences(&f2, &p, &l, method).count, 6);
        }
    }

    #[test]
    fn methods_agree_on_seeded_instances() {
        for q in [2u64, 3, 4, 5] {
            let field = match q {
                4 => build_field(2, 2).unwrap(),
                _ => build_field(q, 1).unwrap(),
            };
            let max = (q * q * q * q).min(30) as usize;
            for seed in 0..20 {
                let (p, l) = if seed % 2 == 0 {
                    (
                        random_points(&field, 2, 2, max, seed).unwrap(),
                        random_line_pairs(&field, max, false, seed + 1000).unwrap(),
                    )
                } else {
                    (
                        multiset_random_points(&field, 2, 2, max / 2 + 1, 5, seed).unwrap(),
                        multiset_random_line_pairs(&field, max / 2 + 1, false, 5, seed + 1000)
                            .unwrap(),
                    )
                };
                let a = count_incidences(&field, &p, &l, Method::Naive).count;
                let b = count_incidences(&field, &p, &l, Method::Indexed).count;
                assert_eq!(a, b, "q={q} seed={seed}");
                assert!(a <= p.weight() * l.weight());
            }
        }
    }

    #[test]
    fn hyperplane_counting_agrees_between_methods() {
        let f3 = build_field(3, 1).unwrap();
        for seed in 0..10 {
            let p = random_points(&f3, 3, 3, 40, seed).unwrap();
            let h = crate::geometry::random_hyperplane_pairs(&f3, 3, 3, 40, seed + 77).unwrap();
            let a = count_incidences(&f3, &p, &h, Method::Naive).count;
            let b = count_incidences(&f3, &p, &h, Method::Indexed).count;
            assert_eq!(a, b, "seed={seed}");
        }
    }

    #[test]
    fn degree_profile_full_space_q2() {
        let f2 = build_field(2, 1).unwrap();
        let p = full_points(&f2, 2, 2).unwrap();
        let l = full_line_pairs(&f2).unwrap();
        let profile = degree_profile(&f2, &p, &l);
        // Every point lies on (q+1)^2 = 9 line-pairs: Σ|L_u|^2 = 16·81.
        assert!(profile.per_point.iter().all(|(_, d)| *d == 9));
        assert_eq!(profile.sum_sq_point, 1296);
        // Every line-pair holds 4 points: Σ|P_l|^2 = 36·16.
        assert!(profile.per_block.iter().all(|(_, d)| *d == 4));
        assert_eq!(profile.sum_sq_block, 576);
        let i = count_incidences(&f2, &p, &l, Method::Naive).count;
        assert_eq!(profile.sum_point, i);
        assert_eq!(profile.sum_block, i);
    }

    #[test]
    fn degree_profile_single_incident_pair() {
        let f3 = build_field(3, 1).unwrap();
        let mut p = PointSet::new();
        p.push(
            PointPair::new(vec![fe(0), fe(1)], vec![fe(0), fe(2)]),
            1,
        )
        .unwrap();
        let mut l = crate::geometry::LinePairSet::new();
        l.push(
            LinePair::new(
                Line::Slant { slope: fe(0), icept: fe(1) },
                Line::Slant { slope: fe(0), icept: fe(2) },
            ),
            1,
        )
        .unwrap();
        let profile = degree_profile(&f3, &p, &l);
        assert_eq!(profile.sum_sq_point, 1);
        assert_eq!(profile.sum_sq_block, 1);
    }

    #[test]
    fn cauchy_schwarz_chain_holds() {
        // I^2 <= |P|·Σ m(u)|L_u|^2 and I^2 <= |L|·Σ m(l)|P_l|^2.
        for q in [2u64, 3, 5] {
            let field = build_field(q, 1).unwrap();
            for seed in 0..20 {
                let p = multiset_random_points(&field, 2, 2, 8, 3, seed).unwrap();
                let l = multiset_random_line_pairs(&field, 8, false, 3, seed + 500).unwrap();
                let i = count_incidences(&field, &p, &l, Method::Naive).count;
                let profile = degree_profile(&field, &p, &l);
                assert_eq!(profile.sum_point, i);
                assert_eq!(profile.sum_block, i);
                let i2 = u128::from(i) * u128::from(i);
                assert!(i2 <= u128::from(p.weight()) * profile.sum_sq_point);
                assert!(i2 <= u128::from(l.weight()) * profile.sum_sq_block);
            }
        }
    }

    #[test]
    fn phi_examples() {
        // Constant map: equality case of the bound.
        let domain = [1u32, 2];
        let target: HashSet<u32> = [5].into_iter().collect();
        let r = phi_solutions(&domain, &target, |_| 5u32).unwrap();
        assert_eq!((r.solutions, r.energy), (2, 4));
        assert!(r.bound_ok);

        // Identity map: again equality.
        let domain = [1u32, 2, 3];
        let target: HashSet<u32> = [1, 2, 3].into_iter().collect();
        let r = phi_solutions(&domain, &target, |&x| x).unwrap();
        assert_eq!((r.solutions, r.energy), (3, 3));
        assert!(r.bound_ok);

        // Parity map onto {0}: solutions 2, energy 8, bound √8.
        let domain = [1u32, 2, 3, 4];
        let target: HashSet<u32> = [0].into_iter().collect();
        let r = phi_solutions(&domain, &target, |&x| x % 2).unwrap();
        assert_eq!((r.solutions, r.energy), (2, 8));
        assert!(r.bound_ok);
    }
}
