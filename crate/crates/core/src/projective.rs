//! Projective spaces over GF(q): canonical class representatives, the
//! orthogonality predicate, and the affine embeddings that turn points and
//! hyperplanes into projective classes.

use crate::error::{Error, Result};
use crate::gf::{FieldElement, FieldSpec};

/// Cap on the number of projective points a single enumeration may produce.
pub const ENUM_CAP: u128 = 10_000_000;

/// A point of PF_q^d in canonical form: the first (lowest-index) nonzero
/// coordinate equals 1. Two classes are equal iff their canonical coordinate
/// vectors are equal, so derived equality and hashing are correct.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint {
    coords: Vec<FieldElement>,
}

impl ProjPoint {
    /// Homogeneous coordinates, length d+1.
    pub fn coords(&self) -> &[FieldElement] {
        &self.coords
    }

    /// Projective dimension.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }
}

/// Scales a nonzero vector to its canonical representative; canonicalize(λv)
/// equals canonicalize(v) for every λ ≠ 0.
pub fn canonicalize(field: &FieldSpec, v: &[FieldElement]) -> Result<ProjPoint> {
    let lead = v.iter().position(|c| !c.is_zero()).ok_or(Error::ZeroVector)?;
    let scale = field.inv(v[lead])?;
    let coords = v.iter().map(|&c| field.mul(c, scale)).collect();
    Ok(ProjPoint { coords })
}

/// True iff Σ x_i·y_i = 0; scalar-invariant, hence well defined on classes.
pub fn orthogonal(field: &FieldSpec, x: &ProjPoint, y: &ProjPoint) -> Result<bool> {
    if x.coords.len() != y.coords.len() {
        return Err(Error::DimensionMismatch {
            left: x.coords.len(),
            right: y.coords.len(),
        });
    }
    Ok(field.dot(&x.coords, &y.coords).is_zero())
}

/// All canonical points of PF_q^d exactly once, in lexicographic order on
/// the canonical coordinate vectors. Count: (q^{d+1}-1)/(q-1).
pub fn enumerate_proj_points(field: &FieldSpec, d: usize) -> Result<Vec<ProjPoint>> {
    let q = field.q() as u128;
    let total = (q.pow(d as u32 + 1) - 1) / (q - 1);
    if total > ENUM_CAP {
        return Err(Error::EnumerationTooLarge {
            size: total,
            cap: ENUM_CAP,
        });
    }
    let mut out = Vec::with_capacity(total as usize);
    // Lexicographic order puts longer zero prefixes first, so the pivot
    // (position of the leading 1) walks from d down to 0; within a pivot the
    // free tail counts up with its leftmost digit most significant.
    for pivot in (0..=d).rev() {
        let free = d - pivot;
        let mut tail = vec![FieldElement::ZERO; free];
        loop {
            let mut coords = vec![FieldElement::ZERO; d + 1];
            coords[pivot] = FieldElement::ONE;
            coords[pivot + 1..].copy_from_slice(&tail);
            out.push(ProjPoint { coords });
            // Advance the odometer, rightmost digit fastest.
            let mut i = free;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                tail[i] = FieldElement(tail[i].0 + 1);
                if tail[i].0 < field.q() {
                    break;
                }
                tail[i] = FieldElement::ZERO;
            }
            if tail.iter().all(|c| c.is_zero()) {
                break;
            }
        }
    }
    Ok(out)
}

/// Embeds an affine point (x_1, ..., x_d) as the class of (x_1, ..., x_d, 1).
pub fn embed_affine(field: &FieldSpec, point: &[FieldElement]) -> ProjPoint {
    let mut v = Vec::with_capacity(point.len() + 1);
    v.extend_from_slice(point);
    v.push(FieldElement::ONE);
    canonicalize(field, &v).expect("affine vector with appended 1 is nonzero")
}

/// Embeds the hyperplane Σ a_i x_i = c as the class of (a_1, ..., a_d, -c).
/// An affine point lies on the hyperplane iff its embedding is orthogonal to
/// the hyperplane's.
pub fn embed_hyperplane(
    field: &FieldSpec,
    normal: &[FieldElement],
    offset: FieldElement,
) -> Result<ProjPoint> {
    if normal.iter().all(|c| c.is_zero()) {
        return Err(Error::ZeroNormal);
    }
    let mut v = Vec::with_capacity(normal.len() + 1);
    v.extend_from_slice(normal);
    v.push(field.neg(offset));
    canonicalize(field, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;
    use proptest::prelude::*;

    fn fe(v: &[u32]) -> Vec<FieldElement> {
        v.iter().map(|&c| FieldElement(c)).collect()
    }

    #[test]
    fn canonicalize_examples() {
        let f5 = build_field(5, 1).unwrap();
        let p = canonicalize(&f5, &fe(&[0, 2, 4])).unwrap();
        assert_eq!(p.coords(), &fe(&[0, 1, 2])[..]); // scale by inv(2) = 3

        let f3 = build_field(3, 1).unwrap();
        let p = canonicalize(&f3, &fe(&[1, 0, 2])).unwrap();
        assert_eq!(p.coords(), &fe(&[1, 0, 2])[..]);

        let f2 = build_field(2, 1).unwrap();
        assert!(matches!(
            canonicalize(&f2, &fe(&[0, 0, 0])),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn orthogonality_examples() {
        let f3 = build_field(3, 1).unwrap();
        let x = canonicalize(&f3, &fe(&[1, 0, 0])).unwrap();
        let y = canonicalize(&f3, &fe(&[0, 1, 0])).unwrap();
        assert!(orthogonal(&f3, &x, &y).unwrap());

        // Characteristic-3 self-orthogonality: 1 + 1 + 1 = 0.
        let z = canonicalize(&f3, &fe(&[1, 1, 1])).unwrap();
        assert!(orthogonal(&f3, &z, &z).unwrap());

        let f5 = build_field(5, 1).unwrap();
        let w = canonicalize(&f5, &fe(&[1, 0, 0])).unwrap();
        assert!(!orthogonal(&f5, &w, &w).unwrap());

        let short = canonicalize(&f3, &fe(&[1, 0])).unwrap();
        assert!(matches!(
            orthogonal(&f3, &x, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn enumeration_counts() {
        let f2 = build_field(2, 1).unwrap();
        assert_eq!(enumerate_proj_points(&f2, 2).unwrap().len(), 7);
        assert_eq!(enumerate_proj_points(&f2, 1).unwrap().len(), 3);
        let f3 = build_field(3, 1).unwrap();
        assert_eq!(enumerate_proj_points(&f3, 3).unwrap().len(), 40); // (3^4-1)/2
    }

    #[test]
    fn enumeration_is_sorted_and_duplicate_free() {
        for (p, k, d) in [(2u64, 1, 2), (3, 1, 2), (2, 2, 2), (5, 1, 3), (3, 1, 3)] {
            let f = build_field(p, k).unwrap();
            let pts = enumerate_proj_points(&f, d).unwrap();
            let q = f.q() as u128;
            let expect = (q.pow(d as u32 + 1) - 1) / (q - 1);
            assert_eq!(pts.len() as u128, expect);
            for w in pts.windows(2) {
                assert!(w[0].coords() < w[1].coords(), "not strictly increasing");
            }
            for pt in &pts {
                assert_eq!(canonicalize(&f, pt.coords()).unwrap(), *pt);
            }
        }
    }

    #[test]
    fn canonicalize_is_idempotent_and_scalar_invariant() {
        // Exhaustive over all vectors and all nonzero scalars, q <= 5, d <= 3.
        for (p, k) in [(2u64, 1), (3, 1), (2, 2), (5, 1)] {
            let f = build_field(p, k).unwrap();
            let q = f.q();
            for d in 1..=3usize {
                let n = (q as u64).pow(d as u32 + 1);
                for enc in 1..n {
                    let mut v = Vec::with_capacity(d + 1);
                    let mut e = enc;
                    for _ in 0..=d {
                        v.push(FieldElement((e % q as u64) as u32));
                        e /= q as u64;
                    }
                    let canon = canonicalize(&f, &v).unwrap();
                    assert_eq!(canonicalize(&f, canon.coords()).unwrap(), canon);
                    for lambda in f.elements().skip(1) {
                        let scaled: Vec<_> = v.iter().map(|&c| f.mul(c, lambda)).collect();
                        assert_eq!(canonicalize(&f, &scaled).unwrap(), canon);
                    }
                }
            }
        }
    }

    #[test]
    fn embedding_examples() {
        let f3 = build_field(3, 1).unwrap();
        let p = embed_affine(&f3, &fe(&[1, 2]));
        assert_eq!(p.coords(), &fe(&[1, 2, 1])[..]);

        // Line X + 2Y = 1 embeds as the class of (1, 2, -1) = (1, 2, 2); the
        // point (1, 0) lies on it and the embeddings are orthogonal.
        let h = embed_hyperplane(&f3, &fe(&[1, 2]), FieldElement(1)).unwrap();
        assert_eq!(h.coords(), &fe(&[1, 2, 2])[..]);
        let on = embed_affine(&f3, &fe(&[1, 0]));
        assert!(orthogonal(&f3, &on, &h).unwrap());

        let f2 = build_field(2, 1).unwrap();
        assert!(matches!(
            embed_hyperplane(&f2, &fe(&[0, 0]), FieldElement(1)),
            Err(Error::ZeroNormal)
        ));
    }

    #[test]
    fn embedding_compatibility_exhaustive() {
        // p on h <=> orthogonal(embed_affine(p), embed_hyperplane(h)),
        // over all affine points and hyperplanes for q <= 5, d <= 3.
        for (p, k) in [(2u64, 1), (3, 1), (2, 2), (5, 1)] {
            let f = build_field(p, k).unwrap();
            let q = f.q() as u64;
            for d in 1..=3usize {
                let points: Vec<Vec<FieldElement>> = (0..q.pow(d as u32))
                    .map(|enc| {
                        let mut v = Vec::with_capacity(d);
                        let mut e = enc;
                        for _ in 0..d {
                            v.push(FieldElement((e % q) as u32));
                            e /= q;
                        }
                        v
                    })
                    .collect();
                for normal_enc in 1..q.pow(d as u32) {
                    let mut normal = Vec::with_capacity(d);
                    let mut e = normal_enc;
                    for _ in 0..d {
                        normal.push(FieldElement((e % q) as u32));
                        e /= q;
                    }
                    for c in f.elements() {
                        let h = embed_hyperplane(&f, &normal, c).unwrap();
                        for pt in &points {
                            let affine_incident = f.dot(&normal, pt) == c;
                            let projective =
                                orthogonal(&f, &embed_affine(&f, pt), &h).unwrap();
                            assert_eq!(affine_incident, projective);
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn scalar_invariance_random(qsel in 0usize..4, raw in proptest::collection::vec(0u32..25, 3..=5), lambda in 1u32..25) {
            let specs = [(2u64, 1u32), (3, 1), (5, 1), (5, 2)];
            let (p, k) = specs[qsel];
            let f = build_field(p, k).unwrap();
            let v: Vec<FieldElement> = raw.iter().map(|&c| FieldElement(c % f.q())).collect();
            prop_assume!(v.iter().any(|c| !c.is_zero()));
            let lambda = FieldElement(1 + lambda % (f.q() - 1));
            let scaled: Vec<FieldElement> = v.iter().map(|&c| f.mul(c, lambda)).collect();
            prop_assert_eq!(canonicalize(&f, &v).unwrap(), canonicalize(&f, &scaled).unwrap());
        }
    }
}
