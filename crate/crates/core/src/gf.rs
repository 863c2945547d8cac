//! Exact arithmetic in GF(q), q = p^k, with deterministic construction.
//!
//! Elements are encoded as integers in `[0, q)` read as base-p digit vectors,
//! digit i being the coefficient of x^i (for k = 1, the residue itself). The
//! reduction modulus is the lexicographically smallest monic irreducible of
//! degree k, coefficients compared low-to-high, so the same (p, k) always
//! yields the same field on every machine and thread.

use crate::error::{Error, Result};

/// Hard cap on the field order; the geometry layers enumerate up to q^4 and
/// q^6 objects, so larger fields are not usable at desk scale anyway.
pub const MAX_ORDER: u64 = 1 << 20;

/// Orders up to this get dense multiplication and inverse tables.
pub const TABLE_ORDER: u64 = 1 << 12;

/// An element of GF(q), stored as its integer encoding in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(transparent)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Tables {
    mul: Vec<u16>,
    inv: Vec<u16>,
}

/// A fully constructed field GF(p^k).
///
/// Immutable after construction; all operations are pure, so a spec can be
/// shared freely across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus coefficients, low-to-high, length k+1; empty when k = 1.
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

/// Deterministic primality test; q caps keep inputs tiny, so trial division
/// is plenty.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Builds the field of a given order, factoring q as p^k.
pub fn field_for_order(q: u64) -> Result<FieldSpec> {
    if q < 2 {
        return Err(Error::NotPrimePower(q));
    }
    let mut p = 2u64;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut rest = q;
            let mut k = 0u32;
            while rest.is_multiple_of(p) {
                rest /= p;
                k += 1;
            }
            if rest != 1 || k > 4 {
                return Err(Error::NotPrimePower(q));
            }
            return build_field(p, k);
        }
        p += 1;
    }
    build_field(q, 1) // q itself is prime
}

/// Builds GF(p^k). Fails on non-prime p, k outside 1..=4, or p^k > 2^20.
pub fn build_field(p: u64, k: u32) -> Result<FieldSpec> {
    if !is_prime(p) {
        return Err(Error::NonPrime(p));
    }
    if !(1..=4).contains(&k) {
        return Err(Error::DegreeOutOfRange(k));
    }
    let q = (p as u128).pow(k);
    if q > MAX_ORDER as u128 {
        return Err(Error::FieldTooLarge {
            q,
            cap: MAX_ORDER as u128,
        });
    }
    let p = p as u32;
    let q = q as u32;
    let modulus = if k == 1 {
        Vec::new()
    } else {
        smallest_irreducible(p, k)
    };
    let mut spec = FieldSpec {
        p,
        k,
        q,
        modulus,
        tables: None,
    };
    if u64::from(q) <= TABLE_ORDER {
        let mut mul = vec![0u16; (q as usize) * (q as usize)];
        for a in 0..q {
            for b in a..q {
                let prod = spec.mul_raw(a, b) as u16;
                mul[a as usize * q as usize + b as usize] = prod;
                mul[b as usize * q as usize + a as usize] = prod;
            }
        }
        let mut inv = vec![0u16; q as usize];
        for a in 1..q {
            inv[a as usize] = spec.inv_raw(a)? as u16;
        }
        spec.tables = Some(Tables { mul, inv });
    }
    Ok(spec)
}

/// The lexicographically smallest monic irreducible of degree k over GF(p),
/// coefficients compared low-to-high (constant term first). Returned as the
/// full coefficient vector (c0, ..., c_{k-1}, 1).
fn smallest_irreducible(p: u32, k: u32) -> Vec<u32> {
    let k = k as usize;
    // Odometer with the constant term as the most significant position.
    let mut coeffs = vec![0u32; k];
    loop {
        let mut poly = coeffs.clone();
        poly.push(1);
        if is_irreducible(p, &poly) {
            return poly;
        }
        let mut i = k;
        loop {
            assert!(i > 0, "no irreducible of degree {k} over GF({p})");
            i -= 1;
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
        }
    }
}

/// Exhaustive irreducibility check for degree <= 4: trial division by every
/// monic polynomial of degree 1..=deg/2.
fn is_irreducible(p: u32, poly: &[u32]) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        // All monic divisor candidates of degree d, low-to-high coefficients.
        let count = (p as u64).pow(d as u32);
        for enc in 0..count {
            let mut div = Vec::with_capacity(d + 1);
            let mut e = enc;
            for _ in 0..d {
                div.push((e % p as u64) as u32);
                e /= p as u64;
            }
            div.push(1);
            if poly_rem(p, poly, &div).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Remainder of a by b over GF(p); b must be monic.
fn poly_rem(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut rem: Vec<u32> = a.to_vec();
    let db = b.len() - 1;
    while rem.len() > db {
        let lead = *rem.last().unwrap();
        let shift = rem.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().take(db).enumerate() {
                let sub = (lead as u64 * bc as u64) % p as u64;
                let idx = shift + i;
                rem[idx] = ((rem[idx] as u64 + p as u64 - sub) % p as u64) as u32;
            }
        }
        rem.pop();
    }
    rem
}

impl FieldSpec {
    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Monic modulus coefficients low-to-high (empty for prime fields).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Validates an encoding.
    pub fn element(&self, enc: u64) -> Result<FieldElement> {
        if enc < u64::from(self.q) {
            Ok(FieldElement(enc as u32))
        } else {
            Err(Error::BadEncoding {
                enc,
                q: u64::from(self.q),
            })
        }
    }

    /// Embeds an integer through the prime subfield (n mod p).
    pub fn scalar(&self, n: u64) -> FieldElement {
        FieldElement((n % u64::from(self.p)) as u32)
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.k == 1 {
            let s = a.0 as u64 + b.0 as u64;
            FieldElement(if s >= self.q as u64 { (s - self.q as u64) as u32 } else { s as u32 })
        } else {
            // Digit-wise addition mod p.
            let (mut a, mut b, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
            while a != 0 || b != 0 {
                let d = (a % self.p + b % self.p) % self.p;
                out += d * place;
                a /= self.p;
                b /= self.p;
                place *= self.p;
            }
            FieldElement(out)
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if self.k == 1 {
            FieldElement(if a.0 == 0 { 0 } else { self.q - a.0 })
        } else {
            let (mut a, mut out, mut place) = (a.0, 0u32, 1u32);
            while a != 0 {
                let d = a % self.p;
                out += if d == 0 { 0 } else { self.p - d } * place;
                a /= self.p;
                place *= self.p;
            }
            FieldElement(out)
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.tables {
            Some(t) => FieldElement(t.mul[a.0 as usize * self.q as usize + b.0 as usize] as u32),
            None => FieldElement(self.mul_raw(a.0, b.0)),
        }
    }

    /// Table-free multiplication; the table path is checked against this.
    pub fn mul_on_the_fly(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.mul_raw(a.0, b.0))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::ZeroInverse(u64::from(self.q)));
        }
        match &self.tables {
            Some(t) => Ok(FieldElement(t.inv[a.0 as usize] as u32)),
            None => Ok(FieldElement(self.inv_raw(a.0)?)),
        }
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Dot product of coordinate slices (panics on length mismatch upstream).
    pub fn dot(&self, xs: &[FieldElement], ys: &[FieldElement]) -> FieldElement {
        debug_assert_eq!(xs.len(), ys.len());
        let mut acc = FieldElement::ZERO;
        for (&x, &y) in xs.iter().zip(ys) {
            acc = self.add(acc, self.mul(x, y));
        }
        acc
    }

    fn mul_raw(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return ((a as u64 * b as u64) % self.q as u64) as u32;
        }
        let k = self.k as usize;
        let da = digits(a, self.p, k);
        let db = digits(b, self.p, k);
        // Schoolbook product, then reduce by the monic modulus.
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] += x as u64 * y as u64;
            }
        }
        for c in prod.iter_mut() {
            *c %= self.p as u64;
        }
        for idx in (k..2 * k - 1).rev() {
            let lead = prod[idx];
            if lead == 0 {
                continue;
            }
            prod[idx] = 0;
            for j in 0..k {
                let sub = (lead * self.modulus[j] as u64) % self.p as u64;
                prod[idx - k + j] = (prod[idx - k + j] + self.p as u64 - sub) % self.p as u64;
            }
        }
        let mut out = 0u32;
        let mut place = 1u32;
        for &c in prod.iter().take(k) {
            out += c as u32 * place;
            place = place.saturating_mul(self.p);
        }
        out
    }

    fn inv_raw(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroInverse(u64::from(self.q)));
        }
        // a^(q-2); fine at these sizes and works uniformly for k >= 1.
        let mut e = u64::from(self.q) - 2;
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        Ok(acc)
    }
}

#[inline]
fn digits(mut n: u32, p: u32, k: usize) -> Vec<u32> {
    let mut out = vec![0u32; k];
    for d in out.iter_mut() {
        *d = n % p;
        n /= p;
    }
    out
}
