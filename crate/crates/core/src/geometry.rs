//! Affine objects of the product space F_q^{d1} x F_q^{d2}: points and
//! point-pairs, lines in slope-intercept-or-vertical form, hyperplanes in
//! canonical normal form, the pair types built from them, weighted sets, and
//! seeded deterministic generators for experiment inputs.

use std::collections::HashSet;
use std::hash::Hash;
use std::io::{BufRead, Write};

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::{FieldElement, FieldSpec};

/// Cap on the field order for full line enumeration.
pub const LINE_ENUM_CAP: u64 = 1 << 10;

/// Cap on any population a generator is asked to enumerate.
pub const POPULATION_CAP: u128 = 10_000_000;

/// Multiplicities stay below 2^16 so weighted incidence counts fit in u64.
pub const MAX_MULTIPLICITY: u64 = (1 << 16) - 1;

/// Total weight of a single set stays below 2^32 for the same reason.
pub const MAX_WEIGHT: u64 = u32::MAX as u64;

/// An affine point of F_q^2.
pub type PlanePoint = [FieldElement; 2];

/// A line in F_q^2. Non-vertical lines are Y = slope·X + icept; vertical
/// lines are X = x0. Exactly one representation exists per line, so derived
/// equality and hashing are canonical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Line {
    Slant { slope: FieldElement, icept: FieldElement },
    Vertical { x0: FieldElement },
}

impl Line {
    pub fn is_vertical(&self) -> bool {
        matches!(self, Line::Vertical { .. })
    }

    pub fn contains(&self, field: &FieldSpec, p: PlanePoint) -> bool {
        match *self {
            Line::Slant { slope, icept } => field.add(field.mul(slope, p[0]), icept) == p[1],
            Line::Vertical { x0 } => p[0] == x0,
        }
    }

    /// The q points on the line, in coordinate order.
    pub fn points(&self, field: &FieldSpec) -> Vec<PlanePoint> {
        match *self {
            Line::Slant { slope, icept } => field
                .elements()
                .map(|x| [x, field.add(field.mul(slope, x), icept)])
                .collect(),
            Line::Vertical { x0 } => field.elements().map(|y| [x0, y]).collect(),
        }
    }

    /// Normal form as a hyperplane in F_q^2.
    pub fn to_hyperplane(&self, field: &FieldSpec) -> Hyperplane {
        let (normal, offset) = match *self {
            // Y = sX + t  <=>  -sX + Y = t
            Line::Slant { slope, icept } => (vec![field.neg(slope), FieldElement::ONE], icept),
            Line::Vertical { x0 } => (vec![FieldElement::ONE, FieldElement::ZERO], x0),
        };
        Hyperplane::new(field, &normal, offset).expect("line normal is nonzero")
    }
}

/// A pair of lines, one per factor of F_q^2 x F_q^2; contains exactly q^2
/// of the q^4 point-pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinePair {
    pub first: Line,
    pub second: Line,
}

impl LinePair {
    pub fn new(first: Line, second: Line) -> Self {
        LinePair { first, second }
    }

    pub fn is_nonvertical(&self) -> bool {
        !self.first.is_vertical() && !self.second.is_vertical()
    }

    pub fn contains(&self, field: &FieldSpec, p: &PointPair) -> bool {
        debug_assert!(p.first.len() == 2 && p.second.len() == 2);
        self.first.contains(field, [p.first[0], p.first[1]])
            && self.second.contains(field, [p.second[0], p.second[1]])
    }

    /// The q^2 point-pairs on the pair.
    pub fn points(&self, field: &FieldSpec) -> Vec<PointPair> {
        let a = self.first.points(field);
        let b = self.second.points(field);
        let mut out = Vec::with_capacity(a.len() * b.len());
        for &x in &a {
            for &y in &b {
                out.push(PointPair::new(x.to_vec(), y.to_vec()));
            }
        }
        out
    }
}

/// A hyperplane normal·x = offset in F_q^d, stored in canonical form: the
/// first nonzero normal coordinate equals 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hyperplane {
    normal: Vec<FieldElement>,
    offset: FieldElement,
}

impl Hyperplane {
    pub fn new(field: &FieldSpec, normal: &[FieldElement], offset: FieldElement) -> Result<Self> {
        let lead = normal
            .iter()
            .position(|c| !c.is_zero())
            .ok_or(Error::ZeroNormal)?;
        let scale = field.inv(normal[lead])?;
        Ok(Hyperplane {
            normal: normal.iter().map(|&c| field.mul(c, scale)).collect(),
            offset: field.mul(offset, scale),
        })
    }

    pub fn normal(&self) -> &[FieldElement] {
        &self.normal
    }

    pub fn offset(&self) -> FieldElement {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn contains(&self, field: &FieldSpec, point: &[FieldElement]) -> bool {
        field.dot(&self.normal, point) == self.offset
    }

    /// The q^{d-1} points of the hyperplane: free coordinates run over the
    /// field, the pivot coordinate is solved for.
    pub fn points(&self, field: &FieldSpec) -> Vec<Vec<FieldElement>> {
        let d = self.normal.len();
        let pivot = self
            .normal
            .iter()
            .position(|c| !c.is_zero())
            .expect("canonical hyperplane has a pivot");
        let q = field.q() as u64;
        let free = d - 1;
        let total = q.pow(free as u32);
        let mut out = Vec::with_capacity(total as usize);
        for enc in 0..total {
            let mut point = vec![FieldElement::ZERO; d];
            let mut e = enc;
            for (i, slot) in point.iter_mut().enumerate() {
                if i == pivot {
                    continue;
                }
                *slot = FieldElement((e % q) as u32);
                e /= q;
            }
            // pivot coefficient is 1 in canonical form.
            let mut rest = FieldElement::ZERO;
            for (i, &c) in self.normal.iter().enumerate() {
                if i != pivot {
                    rest = field.add(rest, field.mul(c, point[i]));
                }
            }
            point[pivot] = field.sub(self.offset, rest);
            out.push(point);
        }
        out
    }
}

/// A pair of hyperplanes, one per factor of F_q^{d1} x F_q^{d2}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HyperplanePair {
    pub first: Hyperplane,
    pub second: Hyperplane,
}

impl HyperplanePair {
    pub fn new(first: Hyperplane, second: Hyperplane) -> Self {
        HyperplanePair { first, second }
    }

    pub fn contains(&self, field: &FieldSpec, p: &PointPair) -> bool {
        self.first.contains(field, &p.first) && self.second.contains(field, &p.second)
    }

    pub fn points(&self, field: &FieldSpec) -> Vec<PointPair> {
        let a = self.first.points(field);
        let b = self.second.points(field);
        let mut out = Vec::with_capacity(a.len() * b.len());
        for x in &a {
            for y in &b {
                out.push(PointPair::new(x.clone(), y.clone()));
            }
        }
        out
    }
}

/// A point of the product space: one affine point per factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointPair {
    pub first: Vec<FieldElement>,
    pub second: Vec<FieldElement>,
}

impl PointPair {
    pub fn new(first: Vec<FieldElement>, second: Vec<FieldElement>) -> Self {
        PointPair { first, second }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.first.len(), self.second.len())
    }
}

/// A finite multiset: distinct elements with positive multiplicities. The
/// convention |X| = Σ m(x) is the total weight; plain sets are the m ≡ 1
/// case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedSet<T: Hash + Eq> {
    items: IndexMap<T, u64>,
    weight: u64,
}

impl<T: Hash + Eq> Default for WeightedSet<T> {
    fn default() -> Self {
        WeightedSet {
            items: IndexMap::new(),
            weight: 0,
        }
    }
}

impl<T: Hash + Eq> WeightedSet<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `mult` copies of an element, merging with any existing copies.
    pub fn push(&mut self, item: T, mult: u64) -> Result<()> {
        if mult == 0 || mult > MAX_MULTIPLICITY {
            return Err(Error::BadMultiplicity(mult));
        }
        let slot = self.items.entry(item).or_insert(0);
        if *slot + mult > MAX_MULTIPLICITY {
            return Err(Error::BadMultiplicity(*slot + mult));
        }
        *slot += mult;
        self.weight += mult;
        if self.weight > MAX_WEIGHT {
            return Err(Error::SetTooHeavy);
        }
        Ok(())
    }

    pub fn from_elements<I: IntoIterator<Item = T>>(iter: I) -> Result<Self> {
        let mut set = Self::new();
        for item in iter {
            set.push(item, 1)?;
        }
        Ok(set)
    }

    /// Number of distinct elements (the support size).
    pub fn support_len(&self) -> usize {
        self.items.len()
    }

    /// Total weight Σ m(x); equals the support size for plain sets.
    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_weighted(&self) -> bool {
        self.weight != self.items.len() as u64
    }

    pub fn multiplicity(&self, item: &T) -> u64 {
        self.items.get(item).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, u64)> {
        self.items.iter().map(|(t, &m)| (t, m))
    }

    /// Σ m(x)^2, the multiset weight entering the mixing bounds.
    pub fn sum_sq_mult(&self) -> u64 {
        self.items.values().map(|&m| m * m).sum()
    }
}

pub type PointSet = WeightedSet<PointPair>;
pub type LinePairSet = WeightedSet<LinePair>;
pub type HyperplanePairSet = WeightedSet<HyperplanePair>;

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// All q^d affine points of F_q^d in encoding order.
pub fn enumerate_affine_points(field: &FieldSpec, d: usize) -> Result<Vec<Vec<FieldElement>>> {
    let q = field.q() as u128;
    let total = q.pow(d as u32);
    if total > POPULATION_CAP {
        return Err(Error::EnumerationTooLarge {
            size: total,
            cap: POPULATION_CAP,
        });
    }
    let q = field.q() as u64;
    Ok((0..total as u64)
        .map(|enc| {
            let mut v = Vec::with_capacity(d);
            let mut e = enc;
            for _ in 0..d {
                v.push(FieldElement((e % q) as u32));
                e /= q;
            }
            v
        })
        .collect())
}

/// All q^{d1+d2} point-pairs, first factor slowest.
pub fn enumerate_point_pairs(field: &FieldSpec, d1: usize, d2: usize) -> Result<Vec<PointPair>> {
    let q = field.q() as u128;
    let total = q.pow((d1 + d2) as u32);
    if total > POPULATION_CAP {
        return Err(Error::EnumerationTooLarge {
            size: total,
            cap: POPULATION_CAP,
        });
    }
    let a = enumerate_affine_points(field, d1)?;
    let b = enumerate_affine_points(field, d2)?;
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in &a {
        for y in &b {
            out.push(PointPair::new(x.clone(), y.clone()));
        }
    }
    Ok(out)
}

/// All q^2 + q lines of F_q^2: the q^2 non-vertical ones ordered by
/// (slope, intercept), then the q vertical ones by abscissa.
pub fn enumerate_lines(field: &FieldSpec) -> Result<Vec<Line>> {
    if u64::from(field.q()) > LINE_ENUM_CAP {
        return Err(Error::EnumerationTooLarge {
            size: u128::from(field.q()),
            cap: LINE_ENUM_CAP as u128,
        });
    }
    let mut out = Vec::with_capacity((field.q() as usize + 1) * field.q() as usize);
    for slope in field.elements() {
        for icept in field.elements() {
            out.push(Line::Slant { slope, icept });
        }
    }
    for x0 in field.elements() {
        out.push(Line::Vertical { x0 });
    }
    Ok(out)
}

/// The q + 1 lines through an affine point.
pub fn lines_through(field: &FieldSpec, p: PlanePoint) -> Vec<Line> {
    let mut out = Vec::with_capacity(field.q() as usize + 1);
    for slope in field.elements() {
        out.push(Line::Slant {
            slope,
            icept: field.sub(p[1], field.mul(slope, p[0])),
        });
    }
    out.push(Line::Vertical { x0: p[0] });
    out
}

/// All (q^2 + q)^2 line-pairs, first factor slowest.
pub fn enumerate_line_pairs(field: &FieldSpec) -> Result<Vec<LinePair>> {
    let lines = enumerate_lines(field)?;
    let total = (lines.len() as u128) * (lines.len() as u128);
    if total > POPULATION_CAP {
        return Err(Error::EnumerationTooLarge {
            size: total,
            cap: POPULATION_CAP,
        });
    }
    let mut out = Vec::with_capacity(lines.len() * lines.len());
    for &a in &lines {
        for &b in &lines {
            out.push(LinePair::new(a, b));
        }
    }
    Ok(out)
}

/// All q·(q^d - 1)/(q - 1) hyperplanes of F_q^d: canonical normals in
/// projective enumeration order, each with every offset.
pub fn enumerate_hyperplanes(field: &FieldSpec, d: usize) -> Result<Vec<Hyperplane>> {
    let normals = crate::projective::enumerate_proj_points(field, d - 1)?;
    let total = normals.len() as u128 * field.q() as u128;
    if total > POPULATION_CAP {
        return Err(Error::EnumerationTooLarge {
            size: total,
            cap: POPULATION_CAP,
        });
    }
    let mut out = Vec::with_capacity(total as usize);
    for n in &normals {
        for offset in field.elements() {
            out.push(Hyperplane {
                normal: n.coords().to_vec(),
                offset,
            });
        }
    }
    Ok(out)
}

/// All hyperplane-pairs for factors of dimension d1 and d2.
pub fn enumerate_hyperplane_pairs(
    field: &FieldSpec,
    d1: usize,
    d2: usize,
) -> Result<Vec<HyperplanePair>> {
    let a = enumerate_hyperplanes(field, d1)?;
    let b = enumerate_hyperplanes(field, d2)?;
    let total = a.len() as u128 * b.len() as u128;
    if total > POPULATION_CAP {
        return Err(Error::EnumerationTooLarge {
            size: total,
            cap: POPULATION_CAP,
        });
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in &a {
        for y in &b {
            out.push(HyperplanePair::new(x.clone(), y.clone()));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Seeded generators
// ---------------------------------------------------------------------------

/// Draws n distinct elements by a seeded partial Fisher-Yates shuffle of the
/// deterministic enumeration, then sorts them so set iteration order is
/// canonical. Pure function of (population, n, seed).
fn sample_without_replacement<T: Ord + Clone>(
    mut population: Vec<T>,
    n: usize,
    seed: u64,
) -> Result<Vec<T>> {
    if n > population.len() {
        return Err(Error::SampleTooLarge {
            requested: n as u64,
            population: population.len() as u64,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n {
        let j = rng.random_range(i..population.len());
        population.swap(i, j);
    }
    population.truncate(n);
    population.sort();
    Ok(population)
}

/// Multiplicities for a sampled support: uniform in 1..=max_mult, assigned in
/// sorted support order from a stream derived from the same seed.
fn assign_multiplicities(count: usize, max_mult: u64, seed: u64) -> Result<Vec<u64>> {
    if max_mult == 0 || max_mult > MAX_MULTIPLICITY {
        return Err(Error::BadMultiplicity(max_mult));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    Ok((0..count).map(|_| rng.random_range(1..=max_mult)).collect())
}

/// The full point set of F_q^{d1} x F_q^{d2}.
pub fn full_points(field: &FieldSpec, d1: usize, d2: usize) -> Result<PointSet> {
    WeightedSet::from_elements(enumerate_point_pairs(field, d1, d2)?)
}

/// The full line-pair set of F_q^2 x F_q^2.
pub fn full_line_pairs(field: &FieldSpec) -> Result<LinePairSet> {
    WeightedSet::from_elements(enumerate_line_pairs(field)?)
}

/// The full hyperplane-pair set.
pub fn full_hyperplane_pairs(field: &FieldSpec, d1: usize, d2: usize) -> Result<HyperplanePairSet> {
    WeightedSet::from_elements(enumerate_hyperplane_pairs(field, d1, d2)?)
}

/// n distinct point-pairs, uniform without replacement.
pub fn random_points(
    field: &FieldSpec,
    d1: usize,
    d2: usize,
    n: usize,
    seed: u64,
) -> Result<PointSet> {
    let population = enumerate_point_pairs(field, d1, d2)?;
    WeightedSet::from_elements(sample_without_replacement(population, n, seed)?)
}

/// n distinct line-pairs; with `nonvertical_only` the population is the
/// q^4 pairs with both components non-vertical.
pub fn random_line_pairs(
    field: &FieldSpec,
    n: usize,
    nonvertical_only: bool,
    seed: u64,
) -> Result<LinePairSet> {
    let mut population = enumerate_line_pairs(field)?;
    if nonvertical_only {
        population.retain(LinePair::is_nonvertical);
    }
    WeightedSet::from_elements(sample_without_replacement(population, n, seed)?)
}

/// n distinct hyperplane-pairs.
pub fn random_hyperplane_pairs(
    field: &FieldSpec,
    d1: usize,
    d2: usize,
    n: usize,
    seed: u64,
) -> Result<HyperplanePairSet> {
    let population = enumerate_hyperplane_pairs(field, d1, d2)?;
    WeightedSet::from_elements(sample_without_replacement(population, n, seed)?)
}

/// n distinct affine points of F_q^2 (the A and B of the Cartesian-product
/// instances).
pub fn random_plane_points(field: &FieldSpec, n: usize, seed: u64) -> Result<Vec<PlanePoint>> {
    let population: Vec<PlanePoint> = enumerate_affine_points(field, 2)?
        .into_iter()
        .map(|v| [v[0], v[1]])
        .collect();
    sample_without_replacement(population, n, seed)
}

/// n distinct affine points of F_q^d.
pub fn random_affine_points(
    field: &FieldSpec,
    d: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<FieldElement>>> {
    sample_without_replacement(enumerate_affine_points(field, d)?, n, seed)
}

/// A multiset with n distinct support point-pairs and multiplicities uniform
/// in 1..=max_mult. Its weight Σ m generally exceeds n.
pub fn multiset_random_points(
    field: &FieldSpec,
    d1: usize,
    d2: usize,
    n: usize,
    max_mult: u64,
    seed: u64,
) -> Result<PointSet> {
    let support = sample_without_replacement(enumerate_point_pairs(field, d1, d2)?, n, seed)?;
    let mults = assign_multiplicities(support.len(), max_mult, seed)?;
    let mut set = WeightedSet::new();
    for (item, m) in support.into_iter().zip(mults) {
        set.push(item, m)?;
    }
    Ok(set)
}

/// Line-pair analogue of [`multiset_random_points`].
pub fn multiset_random_line_pairs(
    field: &FieldSpec,
    n: usize,
    nonvertical_only: bool,
    max_mult: u64,
    seed: u64,
) -> Result<LinePairSet> {
    let mut population = enumerate_line_pairs(field)?;
    if nonvertical_only {
        population.retain(LinePair::is_nonvertical);
    }
    let support = sample_without_replacement(population, n, seed)?;
    let mults = assign_multiplicities(support.len(), max_mult, seed)?;
    let mut set = WeightedSet::new();
    for (item, m) in support.into_iter().zip(mults) {
        set.push(item, m)?;
    }
    Ok(set)
}

/// The A x B point set. The coordinates mix: a product point is
/// ((x1, y1), (x2, y2)) with the X-coordinates (x1, x2) drawn from A and the
/// Y-coordinates (y1, y2) from B, so an incidence with the line-pair
/// (Y = s1·X + t1, Y = s2·X + t2) reads s_i·x_i + t_i = y_i.
pub fn cartesian_product(a: &[PlanePoint], b: &[PlanePoint]) -> Result<PointSet> {
    let mut set = WeightedSet::new();
    for x in a {
        for y in b {
            set.push(PointPair::new(vec![x[0], y[0]], vec![x[1], y[1]]), 1)?;
        }
    }
    Ok(set)
}

// ---------------------------------------------------------------------------
// Set files
// ---------------------------------------------------------------------------

/// Element kinds carried in the set-file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    Points,
    LinePairs,
    HyperplanePairs,
    PlanePoints,
}

impl SetKind {
    fn token(self) -> &'static str {
        match self {
            SetKind::Points => "points",
            SetKind::LinePairs => "linepairs",
            SetKind::HyperplanePairs => "hyperplanepairs",
            SetKind::PlanePoints => "planepoints",
        }
    }
}

fn header(q: u32, kind: SetKind, dims: Option<(usize, usize)>) -> String {
    let mut line = format!("# ffincidence-set v1 q={} kind={}", q, kind.token());
    if let Some((d1, d2)) = dims {
        line.push_str(&format!(" d1={d1} d2={d2}"));
    }
    line
}

fn parse_header(line: &str, want_kind: SetKind) -> Result<(u32, usize, usize)> {
    let mut q = None;
    let mut kind = None;
    let (mut d1, mut d2) = (2usize, 2usize);
    let mut words = line.split_whitespace();
    if words.next() != Some("#")
        || words.next() != Some("ffincidence-set")
        || words.next() != Some("v1")
    {
        return Err(Error::ParseSet(format!("bad header: {line}")));
    }
    for w in words {
        match w.split_once('=') {
            Some(("q", v)) => q = v.parse::<u32>().ok(),
            Some(("kind", v)) => kind = Some(v.to_string()),
            Some(("d1", v)) => d1 = v.parse().map_err(|_| Error::ParseSet(line.into()))?,
            Some(("d2", v)) => d2 = v.parse().map_err(|_| Error::ParseSet(line.into()))?,
            _ => return Err(Error::ParseSet(format!("bad header token: {w}"))),
        }
    }
    let q = q.ok_or_else(|| Error::ParseSet("header missing q".into()))?;
    match kind {
        Some(k) if k == want_kind.token() => Ok((q, d1, d2)),
        other => Err(Error::ParseSet(format!(
            "expected kind={}, found {:?}",
            want_kind.token(),
            other
        ))),
    }
}

fn line_fields(line: &Line) -> [u32; 3] {
    match *line {
        Line::Slant { slope, icept } => [0, slope.0, icept.0],
        Line::Vertical { x0 } => [1, x0.0, 0],
    }
}

fn line_from_fields(field: &FieldSpec, f: &[u64]) -> Result<Line> {
    match f[0] {
        0 => Ok(Line::Slant {
            slope: field.element(f[1])?,
            icept: field.element(f[2])?,
        }),
        1 => Ok(Line::Vertical {
            x0: field.element(f[1])?,
        }),
        t => Err(Error::ParseSet(format!("bad line tag {t}"))),
    }
}

/// Writes a point set: one `x...,y...,m` row of integer encodings per
/// support element.
pub fn write_point_set<W: Write>(w: &mut W, field: &FieldSpec, set: &PointSet) -> Result<()> {
    let (d1, d2) = set.iter().next().map(|(p, _)| p.dims()).unwrap_or((2, 2));
    writeln!(w, "{}", header(field.q(), SetKind::Points, Some((d1, d2))))?;
    for (p, m) in set.iter() {
        let fields: Vec<String> = p
            .first
            .iter()
            .chain(&p.second)
            .map(|c| c.0.to_string())
            .chain(std::iter::once(m.to_string()))
            .collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_point_set<R: BufRead>(r: R, field: &FieldSpec) -> Result<PointSet> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::ParseSet("empty file".into()))??;
    let (q, d1, d2) = parse_header(&head, SetKind::Points)?;
    if q != field.q() {
        return Err(Error::ParseSet(format!("file is for q={q}")));
    }
    let mut set = WeightedSet::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = parse_fields(&line, d1 + d2 + 1)?;
        let first = fields[..d1]
            .iter()
            .map(|&v| field.element(v))
            .collect::<Result<Vec<_>>>()?;
        let second = fields[d1..d1 + d2]
            .iter()
            .map(|&v| field.element(v))
            .collect::<Result<Vec<_>>>()?;
        set.push(PointPair::new(first, second), fields[d1 + d2])?;
    }
    Ok(set)
}

/// Writes a line-pair set: rows `tag,a,b,tag,a,b,m` with tag 0 for
/// Y = aX + b and tag 1 for X = a.
pub fn write_line_pair_set<W: Write>(
    w: &mut W,
    field: &FieldSpec,
    set: &LinePairSet,
) -> Result<()> {
    writeln!(w, "{}", header(field.q(), SetKind::LinePairs, None))?;
    for (lp, m) in set.iter() {
        let a = line_fields(&lp.first);
        let b = line_fields(&lp.second);
        let fields: Vec<String> = a
            .iter()
            .chain(b.iter())
            .map(|v| v.to_string())
            .chain(std::iter::once(m.to_string()))
            .collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_line_pair_set<R: BufRead>(r: R, field: &FieldSpec) -> Result<LinePairSet> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::ParseSet("empty file".into()))??;
    let (q, _, _) = parse_header(&head, SetKind::LinePairs)?;
    if q != field.q() {
        return Err(Error::ParseSet(format!("file is for q={q}")));
    }
    let mut set = WeightedSet::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = parse_fields(&line, 7)?;
        let first = line_from_fields(field, &fields[0..3])?;
        let second = line_from_fields(field, &fields[3..6])?;
        set.push(LinePair::new(first, second), fields[6])?;
    }
    Ok(set)
}

/// Writes a hyperplane-pair set: rows `n1...,c1,n2...,c2,m`.
pub fn write_hyperplane_pair_set<W: Write>(
    w: &mut W,
    field: &FieldSpec,
    set: &HyperplanePairSet,
) -> Result<()> {
    let (d1, d2) = set
        .iter()
        .next()
        .map(|(h, _)| (h.first.dim(), h.second.dim()))
        .unwrap_or((2, 2));
    writeln!(
        w,
        "{}",
        header(field.q(), SetKind::HyperplanePairs, Some((d1, d2)))
    )?;
    for (h, m) in set.iter() {
        let fields: Vec<String> = h
            .first
            .normal()
            .iter()
            .map(|c| c.0.to_string())
            .chain(std::iter::once(h.first.offset().0.to_string()))
            .chain(h.second.normal().iter().map(|c| c.0.to_string()))
            .chain(std::iter::once(h.second.offset().0.to_string()))
            .chain(std::iter::once(m.to_string()))
            .collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_hyperplane_pair_set<R: BufRead>(r: R, field: &FieldSpec) -> Result<HyperplanePairSet> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::ParseSet("empty file".into()))??;
    let (q, d1, d2) = parse_header(&head, SetKind::HyperplanePairs)?;
    if q != field.q() {
        return Err(Error::ParseSet(format!("file is for q={q}")));
    }
    let mut set = WeightedSet::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = parse_fields(&line, d1 + d2 + 3)?;
        let to_elems = |range: &[u64]| -> Result<Vec<FieldElement>> {
            range.iter().map(|&v| field.element(v)).collect()
        };
        let first = Hyperplane::new(field, &to_elems(&fields[..d1])?, field.element(fields[d1])?)?;
        let second = Hyperplane::new(
            field,
            &to_elems(&fields[d1 + 1..d1 + 1 + d2])?,
            field.element(fields[d1 + 1 + d2])?,
        )?;
        set.push(HyperplanePair::new(first, second), fields[d1 + d2 + 2])?;
    }
    Ok(set)
}

/// Writes a plane point set (the A and B inputs): rows `x,y`.
pub fn write_plane_points<W: Write>(
    w: &mut W,
    field: &FieldSpec,
    points: &[PlanePoint],
) -> Result<()> {
    writeln!(w, "{}", header(field.q(), SetKind::PlanePoints, None))?;
    for p in points {
        writeln!(w, "{},{}", p[0].0, p[1].0)?;
    }
    Ok(())
}

pub fn read_plane_points<R: BufRead>(r: R, field: &FieldSpec) -> Result<Vec<PlanePoint>> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::ParseSet("empty file".into()))??;
    let (q, _, _) = parse_header(&head, SetKind::PlanePoints)?;
    if q != field.q() {
        return Err(Error::ParseSet(format!("file is for q={q}")));
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = parse_fields(&line, 2)?;
        let p = [field.element(fields[0])?, field.element(fields[1])?];
        if seen.insert(p) {
            out.push(p);
        }
    }
    Ok(out)
}

fn parse_fields(line: &str, want: usize) -> Result<Vec<u64>> {
    let fields: Vec<u64> = line
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::ParseSet(format!("bad integer field in: {line}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if fields.len() != want {
        return Err(Error::ParseSet(format!(
            "expected {want} fields, found {} in: {line}",
            fields.len()
        )));
    }
    Ok(fields)
}
