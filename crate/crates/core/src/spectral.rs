//! The product polarity-type graph on pairs of projective points, its exact
//! structural identities (regularity, common-neighbor counts, the adjacency
//! square decomposition), second-eigenvalue estimation by dense solve or
//! power iteration, and both expander mixing checks.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{HyperplanePair, LinePair, PointPair};
use crate::gf::{FieldElement, FieldSpec};
use crate::projective::{embed_affine, embed_hyperplane, enumerate_proj_points, ProjPoint};

/// Cap on the vertex count of a built graph.
pub const GRAPH_CAP: u128 = 100_000;

/// Dense eigensolves are limited to this many vertices.
pub const DENSE_CAP: usize = 5_000;

/// Power iteration gives up after this many rounds.
pub const MAX_ITERATIONS: usize = 100_000;

/// One factor: the polarity adjacency on PF_q^d, vertex u adjacent to v iff
/// u·v = 0. Loops (absolute points) are kept; they are what makes the graph
/// exactly regular.
struct Factor {
    points: Vec<ProjPoint>,
    index: HashMap<ProjPoint, u32>,
    /// Sorted neighbor lists, self included when u·u = 0.
    adj: Vec<Vec<u32>>,
    degree: u64,
}

impl Factor {
    fn build(field: &FieldSpec, d: usize) -> Result<Factor> {
        let points = enumerate_proj_points(field, d)?;
        let index: HashMap<ProjPoint, u32> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        let q = u64::from(field.q());
        let degree = (q.pow(d as u32) - 1) / (q - 1);
        // Directions of the dual flat are enumerated once: the solution set
        // of u·z = 0 is a d-dimensional subspace, and its projective points
        // are in bijection with canonical coefficient vectors over a basis.
        let coeffs = enumerate_proj_points(field, d - 1)?;
        let mut adj = Vec::with_capacity(points.len());
        for u in &points {
            let pivot = u
                .coords()
                .iter()
                .position(|c| !c.is_zero())
                .expect("canonical point is nonzero");
            // Basis of {z : u·z = 0}: e_f - u_f·e_pivot for each f != pivot.
            let mut basis: Vec<Vec<FieldElement>> = Vec::with_capacity(d);
            for f in 0..=d {
                if f == pivot {
                    continue;
                }
                let mut b = vec![FieldElement::ZERO; d + 1];
                b[f] = FieldElement::ONE;
                b[pivot] = field.neg(u.coords()[f]);
                basis.push(b);
            }
            let mut row: Vec<u32> = coeffs
                .iter()
                .map(|c| {
                    let mut z = vec![FieldElement::ZERO; d + 1];
                    for (ci, b) in c.coords().iter().zip(&basis) {
                        if ci.is_zero() {
                            continue;
                        }
                        for (zi, bi) in z.iter_mut().zip(b) {
                            *zi = field.add(*zi, field.mul(*ci, *bi));
                        }
                    }
                    let canon = crate::projective::canonicalize(field, &z)
                        .expect("independent basis combination is nonzero");
                    index[&canon]
                })
                .collect();
            row.sort_unstable();
            if row.len() as u64 != degree || row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Irregular {
                    vertex: adj.len(),
                    got: row.len() as u64,
                    want: degree,
                });
            }
            adj.push(row);
        }
        Ok(Factor {
            points,
            index,
            adj,
            degree,
        })
    }
}

/// The graph on pairs of projective points, adjacent when both componentwise
/// inner products vanish. Vertex (i1, i2) has index i1·n2 + i2; adjacency is
/// the tensor product of the factor adjacencies, stored as CSR with sorted
/// rows. Immutable after build.
pub struct IncidenceGraph {
    field: FieldSpec,
    d1: usize,
    d2: usize,
    factor1: Factor,
    factor2: Factor,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    k: u64,
}

/// Builds the graph for PF_q^{d1} x PF_q^{d2}, verifying exact regularity at
/// every vertex.
pub fn build_graph(field: &FieldSpec, d1: usize, d2: usize) -> Result<IncidenceGraph> {
    if d1 < 1 || d2 < 1 {
        return Err(Error::UnsupportedDims { d1, d2 });
    }
    let q = field.q() as u128;
    let count = |d: u32| (q.pow(d + 1) - 1) / (q - 1);
    let n = count(d1 as u32) * count(d2 as u32);
    if n > GRAPH_CAP {
        return Err(Error::GraphTooLarge { n, cap: GRAPH_CAP });
    }
    let factor1 = Factor::build(field, d1)?;
    let factor2 = Factor::build(field, d2)?;
    let n1 = factor1.points.len();
    let n2 = factor2.points.len();
    let k = factor1.degree * factor2.degree;
    let mut offsets = Vec::with_capacity(n1 * n2 + 1);
    let mut neighbors = Vec::with_capacity(n1 * n2 * k as usize);
    offsets.push(0);
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            // Factor rows are sorted, so the product row comes out sorted.
            for &j1 in &factor1.adj[i1] {
                let base = j1 as usize * n2;
                for &j2 in &factor2.adj[i2] {
                    neighbors.push((base + j2 as usize) as u32);
                }
            }
            offsets.push(neighbors.len());
            let got = (offsets[offsets.len() - 1] - offsets[offsets.len() - 2]) as u64;
            if got != k {
                return Err(Error::Irregular {
                    vertex: i1 * n2 + i2,
                    got,
                    want: k,
                });
            }
        }
    }
    Ok(IncidenceGraph {
        field: field.clone(),
        d1,
        d2,
        factor1,
        factor2,
        offsets,
        neighbors,
        k,
    })
}

impl IncidenceGraph {
    pub fn n(&self) -> usize {
        self.factor1.points.len() * self.factor2.points.len()
    }

    /// Common degree, loops counted once.
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// The projective point pair at a vertex.
    pub fn vertex(&self, v: usize) -> (&ProjPoint, &ProjPoint) {
        let n2 = self.factor2.points.len();
        (&self.factor1.points[v / n2], &self.factor2.points[v % n2])
    }

    fn combine(&self, i1: u32, i2: u32) -> u32 {
        i1 * self.factor2.points.len() as u32 + i2
    }

    /// Vertex representing an affine point-pair.
    pub fn vertex_of_point(&self, p: &PointPair) -> Option<u32> {
        let a = embed_affine(&self.field, &p.first);
        let b = embed_affine(&self.field, &p.second);
        Some(self.combine(*self.factor1.index.get(&a)?, *self.factor2.index.get(&b)?))
    }

    /// Vertex representing a line-pair (d1 = d2 = 2 graphs).
    pub fn vertex_of_line_pair(&self, lp: &LinePair) -> Result<u32> {
        let ha = lp.first.to_hyperplane(&self.field);
        let hb = lp.second.to_hyperplane(&self.field);
        let a = embed_hyperplane(&self.field, ha.normal(), ha.offset())?;
        let b = embed_hyperplane(&self.field, hb.normal(), hb.offset())?;
        Ok(self.combine(self.factor1.index[&a], self.factor2.index[&b]))
    }

    /// Vertex representing a hyperplane-pair.
    pub fn vertex_of_hyperplane_pair(&self, hp: &HyperplanePair) -> Result<u32> {
        let a = embed_hyperplane(&self.field, hp.first.normal(), hp.first.offset())?;
        let b = embed_hyperplane(&self.field, hp.second.normal(), hp.second.offset())?;
        Ok(self.combine(self.factor1.index[&a], self.factor2.index[&b]))
    }

    /// One row of A²: entry v counts walks u -> w -> v, i.e. common
    /// neighbors of u and v.
    fn square_row(&self, u: usize, out: &mut [u64]) {
        out.fill(0);
        for &w in self.row(u) {
            for &v in self.row(w as usize) {
                out[v as usize] += 1;
            }
        }
    }

    /// Flips one adjacency entry (test hook for fault-detection checks):
    /// vertex 0's first neighbor is redirected to a different vertex, which
    /// breaks symmetry and every structural identity downstream.
    pub fn inject_adjacency_fault(&mut self) {
        let start = self.offsets[0];
        let old = self.neighbors[start];
        self.neighbors[start] = (old + 1) % self.n() as u32;
    }
}

/// Exact number of common neighbors of two vertices, by sorted-list
/// intersection (independent of the A²-row route used by the verifiers).
pub fn common_neighbors(g: &IncidenceGraph, u: usize, v: usize) -> u64 {
    let (a, b) = (g.row(u), g.row(v));
    let (mut i, mut j, mut count) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// The four-case common-neighbor count: the dual flats of equal components
/// coincide and those of distinct components meet in a flat one dimension
/// lower, giving (q^d - 1)/(q - 1) or (q^{d-1} - 1)/(q - 1) per factor.
pub fn expected_common_neighbors(g: &IncidenceGraph, u: usize, v: usize) -> u64 {
    let q = u64::from(g.q());
    let per = |d: usize, equal: bool| -> u64 {
        if equal {
            (q.pow(d as u32) - 1) / (q - 1)
        } else {
            (q.pow(d as u32 - 1) - 1) / (q - 1)
        }
    };
    let n2 = g.factor2.points.len();
    let (i1, i2) = (u / n2, u % n2);
    let (j1, j2) = (v / n2, v % n2);
    per(g.d1, i1 == j1) * per(g.d2, i2 == j2)
}

/// Checks the common-neighbor formula at every vertex pair; returns the
/// first offending pair on failure.
pub fn verify_neighbor_formula(g: &IncidenceGraph) -> Result<()> {
    let n = g.n();
    let mut row = vec![0u64; n];
    for u in 0..n {
        g.square_row(u, &mut row);
        for (v, &got) in row.iter().enumerate() {
            let want = expected_common_neighbors(g, u, v);
            if got != want {
                return Err(Error::NeighborFormula { u, v, got, want });
            }
        }
    }
    Ok(())
}

/// Outcome of the A² = J + ((q+1)² - 1)I + qE check.
#[derive(Debug, Clone, Copy)]
pub struct SquareDecomposition {
    /// Common row sum of E; 2q(q+1) when the identity holds.
    pub e_degree: u64,
}

/// Verifies, entrywise, that A² - J - ((q+1)² - 1)I is q times a symmetric
/// 0/1 matrix E with zero diagonal and constant row sum 2q(q+1). Only the
/// d1 = d2 = 2 graph satisfies this shape.
pub fn verify_square_decomposition(g: &IncidenceGraph) -> Result<SquareDecomposition> {
    if g.dims() != (2, 2) {
        let (d1, d2) = g.dims();
        return Err(Error::UnsupportedDims { d1, d2 });
    }
    let n = g.n();
    if n > DENSE_CAP {
        return Err(Error::DenseTooLarge { n, cap: DENSE_CAP });
    }
    let q = u64::from(g.q());
    let loop_term = (q + 1) * (q + 1) - 1;
    let want_degree = 2 * q * (q + 1);
    let words = n.div_ceil(64);
    let mut e_rows: Vec<Vec<u64>> = vec![vec![0u64; words]; n];
    let mut row = vec![0u64; n];
    for (u, e_row) in e_rows.iter_mut().enumerate() {
        g.square_row(u, &mut row);
        let mut degree = 0u64;
        for (v, &got) in row.iter().enumerate() {
            let base = 1 + if u == v { loop_term } else { 0 };
            let rem = got as i128 - base as i128;
            if rem < 0 || !(rem as u64).is_multiple_of(q) {
                return Err(Error::Decomposition {
                    u,
                    v,
                    detail: format!("A² entry {got} is not 1 + {loop_term}·δ + q·e"),
                });
            }
            let e = rem as u64 / q;
            if e > 1 {
                return Err(Error::Decomposition {
                    u,
                    v,
                    detail: format!("E entry {e} is not 0/1"),
                });
            }
            if e == 1 {
                if u == v {
                    return Err(Error::Decomposition {
                        u,
                        v,
                        detail: "E has a nonzero diagonal entry".into(),
                    });
                }
                e_row[v / 64] |= 1 << (v % 64);
                degree += 1;
            }
        }
        if degree != want_degree {
            return Err(Error::Decomposition {
                u,
                v: usize::MAX,
                detail: format!("E row sum {degree}, expected {want_degree}"),
            });
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            let uv = e_rows[u][v / 64] >> (v % 64) & 1;
            let vu = e_rows[v][u / 64] >> (u % 64) & 1;
            if uv != vu {
                return Err(Error::Decomposition {
                    u,
                    v,
                    detail: "E is not symmetric".into(),
                });
            }
        }
    }
    Ok(SquareDecomposition {
        e_degree: want_degree,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigMethod {
    Dense,
    PowerIteration,
}

impl std::fmt::Display for EigMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EigMethod::Dense => write!(f, "dense"),
            EigMethod::PowerIteration => write!(f, "power-iteration"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralReport {
    /// Largest |eigenvalue| of A on the subspace orthogonal to all-ones.
    pub lambda2: f64,
    pub method: EigMethod,
    pub residual: f64,
    pub iterations: usize,
}

/// The explicit eigenvalue bound of the square decomposition: λ² is at most
/// the loop term plus the two off-factor terms, specializing to
/// 2q³ + 3q² + 2q for d1 = d2 = 2 and O(q^{(d1+2d2-3)/2}) in general.
pub fn lambda_bound(field: &FieldSpec, d1: usize, d2: usize) -> f64 {
    let q = field.q() as f64;
    let count = |d: usize| (q.powi(d as i32 + 1) - 1.0) / (q - 1.0);
    let kcount = |d: usize| (q.powi(d as i32) - 1.0) / (q - 1.0);
    let sub = |d: usize| (q.powi(d as i32 - 1) - 1.0) / (q - 1.0);
    let k = kcount(d1) * kcount(d2);
    let n_min = sub(d1) * sub(d2);
    let t1 = q.powi(d2 as i32 - 1) * sub(d1) * (count(d2) - 1.0);
    let t2 = q.powi(d1 as i32 - 1) * sub(d2) * (count(d1) - 1.0);
    (k - n_min + t1 + t2).sqrt()
}

/// Measures λ₂ and asserts it against [`lambda_bound`]. Dense solve when the
/// graph fits, power iteration on the deflated A² otherwise.
pub fn second_eigenvalue(g: &IncidenceGraph, tol: f64) -> Result<SpectralReport> {
    let method = if g.n() <= DENSE_CAP {
        EigMethod::Dense
    } else {
        EigMethod::PowerIteration
    };
    second_eigenvalue_with(g, tol, method)
}

/// Same with the method forced; used to cross-check the two paths.
pub fn second_eigenvalue_with(
    g: &IncidenceGraph,
    tol: f64,
    method: EigMethod,
) -> Result<SpectralReport> {
    if tol <= 0.0 {
        return Err(Error::BadTolerance);
    }
    let report = match method {
        EigMethod::Dense => dense_lambda2(g)?,
        EigMethod::PowerIteration => power_lambda2(g, tol)?,
    };
    let bound = lambda_bound(&g.field, g.d1, g.d2);
    if report.lambda2 > bound + 1e-9 {
        return Err(Error::SpectralBound {
            lambda2: report.lambda2,
            bound,
        });
    }
    Ok(report)
}

fn dense_lambda2(g: &IncidenceGraph) -> Result<SpectralReport> {
    let n = g.n();
    if n > DENSE_CAP {
        return Err(Error::DenseTooLarge { n, cap: DENSE_CAP });
    }
    // B = A - (k/n)J has the all-ones eigenvalue shifted to 0 and every
    // other eigenpair untouched.
    let shift = g.k() as f64 / n as f64;
    let mut m = DMatrix::from_element(n, n, -shift);
    for u in 0..n {
        for &v in g.row(u) {
            m[(u, v as usize)] += 1.0;
        }
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut best = 0usize;
    for i in 0..n {
        if eig.eigenvalues[i].abs() > eig.eigenvalues[best].abs() {
            best = i;
        }
    }
    let lambda2 = eig.eigenvalues[best].abs();
    let v = eig.eigenvectors.column(best);
    let residual = (&m * v - eig.eigenvalues[best] * v).norm();
    Ok(SpectralReport {
        lambda2,
        method: EigMethod::Dense,
        residual,
        iterations: 0,
    })
}

fn power_lambda2(g: &IncidenceGraph, tol: f64) -> Result<SpectralReport> {
    let n = g.n();
    // Row partition: each output entry is one sequential dot product, so
    // the result is bitwise identical regardless of worker count.
    let matvec = |x: &[f64], out: &mut [f64]| {
        out.par_iter_mut().enumerate().for_each(|(u, slot)| {
            let mut acc = 0.0;
            for &v in g.row(u) {
                acc += x[v as usize];
            }
            *slot = acc;
        });
    };
    let project = |x: &mut [f64]| {
        let mean = x.iter().sum::<f64>() / n as f64;
        for v in x.iter_mut() {
            *v -= mean;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_START_SEED);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    project(&mut x);
    normalize(&mut x);
    let mut tmp = vec![0.0; n];
    let mut y = vec![0.0; n];
    for iter in 1..=MAX_ITERATIONS {
        // One application of the deflated A²: x is kept in the all-ones
        // complement, which A² preserves.
        matvec(&x, &mut tmp);
        matvec(&tmp, &mut y);
        project(&mut y);
        let mu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let residual: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - mu * a) * (b - mu * a))
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            return Ok(SpectralReport {
                lambda2: mu.max(0.0).sqrt(),
                method: EigMethod::PowerIteration,
                residual,
                iterations: iter,
            });
        }
        std::mem::swap(&mut x, &mut y);
        normalize(&mut x);
    }
    // Report the final residual on failure.
    matvec(&x, &mut tmp);
    matvec(&tmp, &mut y);
    project(&mut y);
    let mu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let residual: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - mu * a) * (b - mu * a))
        .sum::<f64>()
        .sqrt();
    Err(Error::NoConvergence {
        residual,
        iterations: MAX_ITERATIONS,
    })
}

/// Fixed, arbitrary stream for the power-iteration start vector.
const POWER_START_SEED: u64 = 0x0ff1_dc1d_e5ee_d001;

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
}

/// Edge count e(U, V) between vertex subsets — ordered adjacent pairs, loops
/// counted once per ordered pair — with the mixing inequality evaluated at
/// the supplied λ. The discrepancy is computed exactly in integers before
/// conversion.
#[derive(Debug, Clone, Copy)]
pub struct MixingReport {
    pub edges: u64,
    pub main_term: f64,
    pub discrepancy: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn mixing_check(g: &IncidenceGraph, u_set: &[u32], v_set: &[u32], lambda: f64) -> MixingReport {
    let n = g.n();
    let mut in_v = vec![false; n];
    for &v in v_set {
        in_v[v as usize] = true;
    }
    let mut edges = 0u64;
    for &u in u_set {
        for &w in g.row(u as usize) {
            if in_v[w as usize] {
                edges += 1;
            }
        }
    }
    let exact = i128::from(edges) * n as i128
        - g.k() as i128 * u_set.len() as i128 * v_set.len() as i128;
    let discrepancy = exact.unsigned_abs() as f64 / n as f64;
    let main_term = g.k() as f64 * u_set.len() as f64 * v_set.len() as f64 / n as f64;
    let bound = lambda * ((u_set.len() as f64) * (v_set.len() as f64)).sqrt();
    MixingReport {
        edges,
        main_term,
        discrepancy,
        bound,
        ok: discrepancy <= bound,
    }
}

/// The function form of the mixing inequality for non-negative integer
/// weights: |⟨f, Ag⟩ - (k/n)(Σf)(Σg)| ≤ λ·‖f‖₂‖g‖₂ with Euclidean norms.
#[derive(Debug, Clone, Copy)]
pub struct L2MixingReport {
    pub inner: u128,
    pub main_term: f64,
    pub discrepancy: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn mixing_check_l2(
    g: &IncidenceGraph,
    f: &[u64],
    g_fn: &[u64],
    lambda: f64,
) -> Result<L2MixingReport> {
    let n = g.n();
    if f.len() != n || g_fn.len() != n {
        return Err(Error::DimensionMismatch {
            left: f.len().max(g_fn.len()),
            right: n,
        });
    }
    let mut inner = 0u128;
    for (u, &fu) in f.iter().enumerate() {
        if fu == 0 {
            continue;
        }
        let mut acc = 0u128;
        for &v in g.row(u) {
            acc += u128::from(g_fn[v as usize]);
        }
        inner += u128::from(fu) * acc;
    }
    let sum_f: u128 = f.iter().map(|&v| u128::from(v)).sum();
    let sum_g: u128 = g_fn.iter().map(|&v| u128::from(v)).sum();
    let exact = inner as i128 * n as i128 - g.k() as i128 * (sum_f * sum_g) as i128;
    let discrepancy = exact.unsigned_abs() as f64 / n as f64;
    let main_term = g.k() as f64 * sum_f as f64 * sum_g as f64 / n as f64;
    let norm = |xs: &[u64]| {
        xs.iter()
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt()
    };
    let bound = lambda * norm(f) * norm(g_fn);
    Ok(L2MixingReport {
        inner,
        main_term,
        discrepancy,
        bound,
        ok: discrepancy <= bound,
    })
}

/// Adjacency-list dump: `u v` per undirected edge with u ≤ v, loops as
/// `u u`.
pub fn write_graph<W: Write>(w: &mut W, g: &IncidenceGraph) -> Result<()> {
    writeln!(
        w,
        "# ffincidence-graph v1 q={} d1={} d2={}",
        g.q(),
        g.d1,
        g.d2
    )?;
    for u in 0..g.n() {
        for &v in g.row(u) {
            if u as u32 <= v {
                writeln!(w, "{u} {v}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;

    fn graph(q: u64, d1: usize, d2: usize) -> IncidenceGraph {
        let field = match q {
            4 => build_field(2, 2).unwrap(),
            9 => build_field(3, 2).unwrap(),
            _ => build_field(q, 1).unwrap(),
        };
        build_graph(&field, d1, d2).unwrap()
    }

    #[test]
    fn graph_sizes() {
        let g = graph(2, 2, 2);
        assert_eq!((g.n(), g.k()), (49, 9));
        let g = graph(3, 2, 2);
        assert_eq!((g.n(), g.k()), (169, 16));
        let g = graph(3, 3, 3);
        assert_eq!((g.n(), g.k()), (1600, 169)); // ((3^4-1)/2)^2, ((3^3-1)/2)^2
    }

    #[test]
    fn adjacency_is_symmetric_and_matches_orthogonality() {
        for (q, d1, d2) in [(2u64, 2, 2), (3, 2, 2), (2, 2, 3)] {
            let g = graph(q, d1, d2);
            let field = g.field().clone();
            for u in 0..g.n() {
                for &v in g.row(u) {
                    assert!(g.row(v as usize).binary_search(&(u as u32)).is_ok());
                    let (a1, a2) = g.vertex(u);
                    let (b1, b2) = g.vertex(v as usize);
                    assert!(crate::projective::orthogonal(&field, a1, b1).unwrap());
                    assert!(crate::projective::orthogonal(&field, a2, b2).unwrap());
                }
            }
        }
    }

    #[test]
    fn common_neighbor_cases_q2() {
        let g = graph(2, 2, 2);
        // Same vertex: k = 9.
        assert_eq!(common_neighbors(&g, 5, 5), 9);
        // Same first component, different second: vertices i*7+a vs i*7+b.
        assert_eq!(common_neighbors(&g, 7, 8), 3);
        // Both components distinct.
        assert_eq!(common_neighbors(&g, 0, 8), 1);
    }

    #[test]
    fn neighbor_formula_exhaustive_small() {
        for (q, d1, d2) in [(2u64, 2, 2), (3, 2, 2), (2, 2, 3), (2, 3, 3)] {
            verify_neighbor_formula(&graph(q, d1, d2)).unwrap();
        }
    }

    #[test]
    fn square_decomposition_small() {
        assert_eq!(
            verify_square_decomposition(&graph(2, 2, 2)).unwrap().e_degree,
            12
        );
        assert_eq!(
            verify_square_decomposition(&graph(3, 2, 2)).unwrap().e_degree,
            24
        );
        assert!(matches!(
            verify_square_decomposition(&graph(2, 2, 3)),
            Err(Error::UnsupportedDims { .. })
        ));
    }

    #[test]
    fn lambda2_q2_matches_dense_oracle() {
        // Dense oracle recording: (q+1)√q = 3√2 for q = 2.
        let g = graph(2, 2, 2);
        let r = second_eigenvalue(&g, 1e-10).unwrap();
        assert_eq!(r.method, EigMethod::Dense);
        assert!((r.lambda2 - 3.0 * 2.0_f64.sqrt()).abs() < 1e-6, "{}", r.lambda2);
        assert!(r.residual <= 1e-8);
        // Stated bound √(2q³+3q²+2q) = √32.
        assert!((lambda_bound(g.field(), 2, 2) - 32.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lambda2_q3() {
        let g = graph(3, 2, 2);
        let r = second_eigenvalue(&g, 1e-10).unwrap();
        assert!((r.lambda2 - 4.0 * 3.0_f64.sqrt()).abs() < 1e-6);
        assert!((lambda_bound(g.field(), 2, 2) - 87.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dense_and_power_paths_agree() {
        for (q, d1, d2) in [(2u64, 2, 2), (3, 2, 2), (2, 2, 3)] {
            let g = graph(q, d1, d2);
            let tol = 1e-9;
            let dense = second_eigenvalue_with(&g, tol, EigMethod::Dense).unwrap();
            let power = second_eigenvalue_with(&g, tol, EigMethod::PowerIteration).unwrap();
            assert!(
                (dense.lambda2 - power.lambda2).abs() <= 10.0 * tol,
                "q={q} dense={} power={}",
                dense.lambda2,
                power.lambda2
            );
            assert!(power.residual <= tol);
        }
    }

    #[test]
    fn zero_tolerance_is_rejected() {
        let g = graph(2, 2, 2);
        assert!(matches!(
            second_eigenvalue(&g, 0.0),
            Err(Error::BadTolerance)
        ));
    }

    #[test]
    fn mixing_full_sets_and_empty() {
        let g = graph(2, 2, 2);
        let lambda = second_eigenvalue(&g, 1e-10).unwrap().lambda2;
        let all: Vec<u32> = (0..g.n() as u32).collect();
        let r = mixing_check(&g, &all, &all, lambda);
        assert_eq!(r.edges, g.n() as u64 * g.k());
        assert_eq!(r.discrepancy, 0.0);
        assert!(r.ok);

        let r = mixing_check(&g, &[], &all, lambda);
        assert_eq!(r.edges, 0);
        assert!(r.ok);
    }

    #[test]
    fn mixing_random_subsets_never_violate() {
        use rand::{Rng, SeedableRng};
        for q in [2u64, 3] {
            let g = graph(q, 2, 2);
            let lambda = second_eigenvalue(&g, 1e-10).unwrap().lambda2;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
            for _ in 0..200 {
                let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
                    (0..g.n() as u32)
                        .filter(|_| rng.random_bool(0.3))
                        .collect::<Vec<_>>()
                };
                let u = pick(&mut rng);
                let v = pick(&mut rng);
                let r = mixing_check(&g, &u, &v, lambda);
                assert!(r.ok, "q={q}: {} > {}", r.discrepancy, r.bound);
            }
        }
    }

    #[test]
    fn l2_mixing_indicators_reduce_to_edge_count() {
        let g = graph(3, 2, 2);
        let lambda = second_eigenvalue(&g, 1e-10).unwrap().lambda2;
        let u_set: Vec<u32> = (0..40).collect();
        let v_set: Vec<u32> = (30..100).collect();
        let mut f = vec![0u64; g.n()];
        let mut h = vec![0u64; g.n()];
        for &u in &u_set {
            f[u as usize] = 1;
        }
        for &v in &v_set {
            h[v as usize] = 1;
        }
        let set_form = mixing_check(&g, &u_set, &v_set, lambda);
        let fn_form = mixing_check_l2(&g, &f, &h, lambda).unwrap();
        assert_eq!(fn_form.inner, u128::from(set_form.edges));
        assert!((fn_form.discrepancy - set_form.discrepancy).abs() < 1e-9);
        assert!(fn_form.ok);

        // All-ones against all-ones: zero discrepancy by regularity.
        let ones = vec![1u64; g.n()];
        let r = mixing_check_l2(&g, &ones, &ones, lambda).unwrap();
        assert_eq!(r.discrepancy, 0.0);
    }

    #[test]
    fn injected_fault_is_detected() {
        let mut g = graph(2, 2, 2);
        g.inject_adjacency_fault();
        assert!(
            verify_neighbor_formula(&g).is_err() || verify_square_decomposition(&g).is_err()
        );
    }

    #[test]
    fn graph_dump_format() {
        let g = graph(2, 2, 2);
        let mut buf = Vec::new();
        write_graph(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# ffincidence-graph v1 q=2 d1=2 d2=2");
        // Undirected edges once each plus loops: (nk - loops)/2 + loops.
        let loops = (0..g.n())
            .filter(|&u| g.row(u).binary_search(&(u as u32)).is_ok())
            .count() as u64;
        let expect = (g.n() as u64 * g.k() - loops) / 2 + loops;
        assert_eq!(lines.count() as u64, expect);
    }
}
