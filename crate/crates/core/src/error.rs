use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("unsupported field order {0} (not a prime power p^k, k <= 4)")]
    NotPrimePower(u64),
    #[error("extension degree {0} outside the supported range 1..=4")]
    DegreeOutOfRange(u32),
    #[error("field order {q} exceeds the cap {cap}")]
    FieldTooLarge { q: u128, cap: u128 },
    #[error("inversion of zero in GF({0})")]
    ZeroInverse(u64),
    #[error("element encoding {enc} out of range for GF({q})")]
    BadEncoding { enc: u64, q: u64 },
    #[error("the zero vector has no projective class")]
    ZeroVector,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("an all-zero normal vector does not define a hyperplane")]
    ZeroNormal,
    #[error("enumeration of {size} objects exceeds the cap {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },
    #[error("requested {requested} distinct elements from a population of {population}")]
    SampleTooLarge { requested: u64, population: u64 },
    #[error("multiplicity {0} outside 1..=65535")]
    BadMultiplicity(u64),
    #[error("set weight would exceed 2^32-1 (incidence counts must fit in u64)")]
    SetTooHeavy,
    #[error("{0} requires an unweighted set")]
    WeightedUnsupported(&'static str),
    #[error("operation requires only non-vertical line components")]
    VerticalComponent,
    #[error("|A| = {a} exceeds |B| = {b}")]
    SizeOrder { a: u64, b: u64 },
    #[error("|A||L| = {size} exceeds the energy-reduction cap {cap}")]
    EnergyTooLarge { size: u128, cap: u128 },
    #[error("dot-product target a = 0 lies outside the estimate's hypothesis")]
    ZeroTarget,
    #[error("unsupported dimension pair ({d1},{d2})")]
    UnsupportedDims { d1: usize, d2: usize },
    #[error("graph on {n} vertices exceeds the cap {cap}")]
    GraphTooLarge { n: u128, cap: u128 },
    #[error("dense eigensolver capped at {cap} vertices, graph has {n}")]
    DenseTooLarge { n: usize, cap: usize },
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("power iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("adjacency square decomposition fails at entry ({u},{v}): {detail}")]
    Decomposition { u: usize, v: usize, detail: String },
    #[error("neighbor-count formula fails at pair ({u},{v}): counted {got}, formula gives {want}")]
    NeighborFormula { u: usize, v: usize, got: u64, want: u64 },
    #[error("degree invariant fails at vertex {vertex}: degree {got}, expected {want}")]
    Irregular { vertex: usize, got: u64, want: u64 },
    #[error("second eigenvalue {lambda2} exceeds the stated bound {bound}")]
    SpectralBound { lambda2: f64, bound: f64 },
    #[error("mixing inequality violated: discrepancy {discrepancy} > bound {bound} ({context})")]
    MixingViolation {
        discrepancy: f64,
        bound: f64,
        context: String,
    },
    #[error("unconditional inequality violated: {lhs} > {bound} ({context})")]
    ChainViolation {
        lhs: u64,
        bound: f64,
        context: &'static str,
    },
    #[error("independent counts disagree: {left_name} = {left} vs {right_name} = {right}")]
    OracleMismatch {
        left_name: &'static str,
        left: u64,
        right_name: &'static str,
        right: u64,
    },
    #[error("{0} must be nonempty")]
    EmptyInput(&'static str),
    #[error("malformed set file: {0}")]
    ParseSet(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
