//! Config resolution: command-line flags, optional JSON config file (flags
//! win), generator specs, and the seed/q list grammars.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use ffincidence::error::Error as CoreError;
use ffincidence::geometry::{self, HyperplanePairSet, LinePairSet, PlanePoint, PointSet};
use ffincidence::gf::FieldSpec;
use serde::Deserialize;

#[derive(Debug)]
pub enum ConfigError {
    Message(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Message(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

pub fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Message(msg.into()))
}

/// Seed lists: `a..b` (inclusive), `a..=b`, comma lists, or one value.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, ConfigError> {
    let spec = spec.trim();
    let parse_one = |s: &str| -> Result<u64, ConfigError> {
        s.trim()
            .parse::<u64>()
            .map_err(|_| ConfigError::Message(format!("bad seed value: {s}")))
    };
    let range = |from: &str, to: &str| -> Result<Vec<u64>, ConfigError> {
        let (a, b) = (parse_one(from)?, parse_one(to)?);
        if a > b {
            return err(format!("empty seed range {spec}"));
        }
        Ok((a..=b).collect())
    };
    if let Some((from, to)) = spec.split_once("..=") {
        return range(from, to);
    }
    if let Some((from, to)) = spec.split_once("..") {
        return range(from, to);
    }
    let seeds: Vec<u64> = spec
        .split(',')
        .map(parse_one)
        .collect::<Result<_, _>>()?;
    if seeds.is_empty() {
        return err("empty seed list");
    }
    Ok(seeds)
}

/// Comma-separated field orders, each a prime power.
pub fn parse_q_list(spec: &str) -> Result<Vec<u64>, ConfigError> {
    let list: Vec<u64> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| ConfigError::Message(format!("bad field order: {s}")))
        })
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return err("empty q list");
    }
    Ok(list)
}

/// Retries a sampling generator with n clamped to the population size, so
/// grids spanning several q values can share one n.
fn clamp_sample<T>(
    make: impl Fn(usize) -> Result<T, CoreError>,
    n: usize,
) -> Result<T, CoreError> {
    match make(n) {
        Err(CoreError::SampleTooLarge { population, .. }) => make(population as usize),
        other => other,
    }
}

/// A set generator: a deterministic recipe applied per (field, seed).
/// Sampling sizes are clamped to the available population.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    FullPoints,
    FullLinePairs,
    FullHyperplanePairs,
    RandomPoints { n: usize },
    RandomLinePairs { n: usize, nonvertical: bool },
    RandomHyperplanePairs { n: usize },
    MultisetRandomPoints { n: usize, max_mult: u64 },
    MultisetRandomLinePairs { n: usize, max_mult: u64, nonvertical: bool },
    RandomPlane { n: usize },
    RandomAffine { n: usize, d: usize },
    Load { path: PathBuf },
}

impl GenSpec {
    pub fn parse(spec: &str) -> Result<GenSpec, ConfigError> {
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), a),
            None => (spec.trim(), ""),
        };
        let mut n = None;
        let mut max_mult = None;
        let mut nonvertical = false;
        let mut d = None;
        let mut path = None;
        for kv in args.split(',').filter(|s| !s.trim().is_empty()) {
            let Some((k, v)) = kv.split_once('=') else {
                return err(format!("bad generator argument: {kv}"));
            };
            let (k, v) = (k.trim(), v.trim());
            match k {
                "n" => n = v.parse::<usize>().ok(),
                "max_mult" => max_mult = v.parse::<u64>().ok(),
                "nonvertical" => {
                    nonvertical = v
                        .parse::<bool>()
                        .map_err(|_| ConfigError::Message(format!("bad bool: {v}")))?
                }
                "d" => d = v.parse::<usize>().ok(),
                "path" => path = Some(PathBuf::from(v)),
                _ => return err(format!("unknown generator argument: {k}")),
            }
        }
        let need_n = || n.ok_or_else(|| ConfigError::Message(format!("{name} needs n=<count>")));
        match name {
            "full_points" => Ok(GenSpec::FullPoints),
            "full_linepairs" => Ok(GenSpec::FullLinePairs),
            "full_hyperplanepairs" => Ok(GenSpec::FullHyperplanePairs),
            "random_points" => Ok(GenSpec::RandomPoints { n: need_n()? }),
            "random_linepairs" => Ok(GenSpec::RandomLinePairs {
                n: need_n()?,
                nonvertical,
            }),
            "random_hyperplanepairs" => Ok(GenSpec::RandomHyperplanePairs { n: need_n()? }),
            "multiset_random" => Ok(GenSpec::MultisetRandomPoints {
                n: need_n()?,
                max_mult: max_mult.unwrap_or(4),
            }),
            "multiset_random_linepairs" => Ok(GenSpec::MultisetRandomLinePairs {
                n: need_n()?,
                max_mult: max_mult.unwrap_or(4),
                nonvertical,
            }),
            "random_plane" => Ok(GenSpec::RandomPlane { n: need_n()? }),
            "random_affine" => Ok(GenSpec::RandomAffine {
                n: need_n()?,
                d: d.unwrap_or(2),
            }),
            "load" => match path {
                Some(path) => Ok(GenSpec::Load { path }),
                None => err("load needs path=<file>"),
            },
            _ => err(format!("unknown generator kind: {name}")),
        }
    }

    pub fn points(
        &self,
        field: &FieldSpec,
        d1: usize,
        d2: usize,
        seed: u64,
    ) -> Result<PointSet, CoreError> {
        match self {
            GenSpec::FullPoints => geometry::full_points(field, d1, d2),
            GenSpec::RandomPoints { n } => {
                clamp_sample(|n| geometry::random_points(field, d1, d2, n, seed), *n)
            }
            GenSpec::MultisetRandomPoints { n, max_mult } => clamp_sample(
                |n| geometry::multiset_random_points(field, d1, d2, n, *max_mult, seed),
                *n,
            ),
            GenSpec::Load { path } => {
                let file = fs::File::open(path)?;
                geometry::read_point_set(std::io::BufReader::new(file), field)
            }
            other => Err(CoreError::ParseSet(format!(
                "{other:?} does not generate a point set"
            ))),
        }
    }

    pub fn line_pairs(
        &self,
        field: &FieldSpec,
        seed: u64,
        force_nonvertical: bool,
    ) -> Result<LinePairSet, CoreError> {
        match self {
            GenSpec::FullLinePairs => geometry::full_line_pairs(field),
            GenSpec::RandomLinePairs { n, nonvertical } => clamp_sample(
                |n| geometry::random_line_pairs(field, n, *nonvertical || force_nonvertical, seed),
                *n,
            ),
            GenSpec::MultisetRandomLinePairs {
                n,
                max_mult,
                nonvertical,
            } => clamp_sample(
                |n| {
                    geometry::multiset_random_line_pairs(
                        field,
                        n,
                        *nonvertical || force_nonvertical,
                        *max_mult,
                        seed,
                    )
                },
                *n,
            ),
            GenSpec::Load { path } => {
                let file = fs::File::open(path)?;
                geometry::read_line_pair_set(std::io::BufReader::new(file), field)
            }
            other => Err(CoreError::ParseSet(format!(
                "{other:?} does not generate a line-pair set"
            ))),
        }
    }

    pub fn hyperplane_pairs(
        &self,
        field: &FieldSpec,
        d1: usize,
        d2: usize,
        seed: u64,
    ) -> Result<HyperplanePairSet, CoreError> {
        match self {
            GenSpec::FullHyperplanePairs => geometry::full_hyperplane_pairs(field, d1, d2),
            GenSpec::RandomHyperplanePairs { n } => clamp_sample(
                |n| geometry::random_hyperplane_pairs(field, d1, d2, n, seed),
                *n,
            ),
            GenSpec::Load { path } => {
                let file = fs::File::open(path)?;
                geometry::read_hyperplane_pair_set(std::io::BufReader::new(file), field)
            }
            other => Err(CoreError::ParseSet(format!(
                "{other:?} does not generate a hyperplane-pair set"
            ))),
        }
    }

    pub fn plane_points(
        &self,
        field: &FieldSpec,
        seed: u64,
    ) -> Result<Vec<PlanePoint>, CoreError> {
        match self {
            GenSpec::RandomPlane { n } => {
                clamp_sample(|n| geometry::random_plane_points(field, n, seed), *n)
            }
            GenSpec::Load { path } => {
                let file = fs::File::open(path)?;
                geometry::read_plane_points(std::io::BufReader::new(file), field)
            }
            other => Err(CoreError::ParseSet(format!(
                "{other:?} does not generate a plane point set"
            ))),
        }
    }

    pub fn affine_points(
        &self,
        field: &FieldSpec,
        d_default: usize,
        seed: u64,
    ) -> Result<Vec<Vec<ffincidence::gf::FieldElement>>, CoreError> {
        match self {
            GenSpec::RandomAffine { n, d } => {
                clamp_sample(|n| geometry::random_affine_points(field, *d, n, seed), *n)
            }
            GenSpec::RandomPlane { n } => clamp_sample(
                |n| geometry::random_affine_points(field, d_default, n, seed),
                *n,
            ),
            other => Err(CoreError::ParseSet(format!(
                "{other:?} does not generate an affine point set"
            ))),
        }
    }
}

/// JSON config file; every field optional, command-line flags override.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub theorem: Option<String>,
    pub app: Option<String>,
    pub q: Option<String>,
    pub d1: Option<usize>,
    pub d2: Option<usize>,
    pub gen: Option<String>,
    pub gen_lines: Option<String>,
    pub gen_b: Option<String>,
    pub seeds: Option<String>,
    pub lambda: Option<String>,
    pub variant: Option<String>,
    pub threshold_exponent: Option<f64>,
    pub out: Option<String>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub dump_sets: Option<PathBuf>,
    pub timing: Option<bool>,
    pub tol: Option<f64>,
    pub a: Option<u64>,
    pub b: Option<u64>,
    pub t: Option<u64>,
    pub c: Option<f64>,
    pub c_prime: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &PathBuf) -> Result<FileConfig, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Message(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ConfigError::Message(format!("bad config {}: {e}", path.display())))
    }
}

/// Default seed base: FFINCIDENCE_SEED when set, else 0.
pub fn default_seed_base() -> u64 {
    std::env::var("FFINCIDENCE_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}
