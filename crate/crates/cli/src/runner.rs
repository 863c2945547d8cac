//! Grid execution: one verifier or application over every (q, seed) cell,
//! in parallel, with deterministic output order. Results land in
//! pre-assigned slots indexed by grid position, so the emitted rows do not
//! depend on worker count or schedule.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use ffincidence::apps::{
    dot_product_4d, dot_product_pair_count, dot_product_single, sum_product, vector_valued,
    PredicateVariant,
};
use ffincidence::counting::{count_incidences, Method};
use ffincidence::error::Error as CoreError;
use ffincidence::geometry::{
    cartesian_product, write_line_pair_set, write_plane_points, write_point_set,
    write_hyperplane_pair_set,
};
use ffincidence::gf::{field_for_order, FieldSpec};
use ffincidence::theorems::{
    spectral_context, verify_cartesian, verify_cs, verify_hyperplane, verify_sdz, verify_vinh,
    LambdaMode, SdzParams, SpectralContext,
};
use rayon::prelude::*;

use crate::config::GenSpec;
use crate::rows::ResultRow;

/// Seed salts keep the point, line, and second-plane streams of one trial
/// independent while staying pure functions of the trial seed.
const LINE_SEED_SALT: u64 = 0x4c49_4e45;
const B_SEED_SALT: u64 = 0x4253_4554;

/// Spot-check cadence: every Nth trial re-derives its left side by
/// serializing the input sets, parsing them back and re-counting naively.
const SPOT_CHECK_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremId {
    Cs,
    Vinh,
    Hyperplane,
    Cartesian,
    Sdz,
}

impl TheoremId {
    pub fn parse(s: &str) -> Option<TheoremId> {
        match s {
            "cs" => Some(TheoremId::Cs),
            "vinh" => Some(TheoremId::Vinh),
            "hyperplane" => Some(TheoremId::Hyperplane),
            "cartesian" => Some(TheoremId::Cartesian),
            "sdz" => Some(TheoremId::Sdz),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            TheoremId::Cs => "cs",
            TheoremId::Vinh => "vinh",
            TheoremId::Hyperplane => "hyperplane",
            TheoremId::Cartesian => "cartesian",
            TheoremId::Sdz => "sdz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppId {
    DotPair,
    DotSingle,
    Dot4d,
    SumProduct,
    VectorValued,
}

impl AppId {
    pub fn parse(s: &str) -> Option<AppId> {
        match s {
            "dot_pair" => Some(AppId::DotPair),
            "dot_single" => Some(AppId::DotSingle),
            "dot_4d" => Some(AppId::Dot4d),
            "sum_product" => Some(AppId::SumProduct),
            "vector_valued" => Some(AppId::VectorValued),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            AppId::DotPair => "dot_pair",
            AppId::DotSingle => "dot_single",
            AppId::Dot4d => "dot_4d",
            AppId::SumProduct => "sum_product",
            AppId::VectorValued => "vector_valued",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum RunCommand {
    Verify(TheoremId),
    Apps(AppId),
}

#[derive(Debug, Clone)]
pub struct RunPlan {
    pub command: RunCommand,
    pub q_list: Vec<u64>,
    pub seeds: Vec<u64>,
    pub d1: usize,
    pub d2: usize,
    pub gen_points: GenSpec,
    pub gen_lines: GenSpec,
    pub gen_b: GenSpec,
    pub lambda: LambdaMode,
    pub variant: PredicateVariant,
    pub threshold_exponent: f64,
    pub sdz: SdzParams,
    pub a: u64,
    pub b: u64,
    pub t: u64,
    pub tol: f64,
    pub dump_dir: Option<PathBuf>,
    pub timing: bool,
}

impl RunPlan {
    fn run_id(&self) -> String {
        match self.command {
            RunCommand::Verify(t) => format!("verify-{}", t.name()),
            RunCommand::Apps(a) => format!("apps-{}", a.name()),
        }
    }
}

struct QContext {
    q: u64,
    field: FieldSpec,
    spectral: Option<SpectralContext>,
}

/// Executes the grid; rows come back sorted by (q, seed) position.
pub fn run(plan: &RunPlan) -> Result<Vec<ResultRow>, CoreError> {
    if let Some(dir) = &plan.dump_dir {
        fs::create_dir_all(dir)?;
    }
    let mut contexts = Vec::with_capacity(plan.q_list.len());
    for &q in &plan.q_list {
        let field = field_for_order(q)?;
        let spectral = match plan.command {
            RunCommand::Verify(TheoremId::Vinh | TheoremId::Hyperplane)
                if plan.lambda == LambdaMode::Computed =>
            {
                Some(spectral_context(&field, plan.d1, plan.d2, plan.tol)?)
            }
            _ => None,
        };
        contexts.push(QContext { q, field, spectral });
    }

    let trials: Vec<(usize, u64)> = contexts
        .iter()
        .enumerate()
        .flat_map(|(qi, _)| plan.seeds.iter().map(move |&s| (qi, s)))
        .collect();
    let results: Vec<Result<Vec<ResultRow>, CoreError>> = trials
        .par_iter()
        .enumerate()
        .map(|(ti, &(qi, seed))| run_trial(plan, &contexts[qi], seed, ti))
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

fn run_trial(
    plan: &RunPlan,
    ctx: &QContext,
    seed: u64,
    trial_index: usize,
) -> Result<Vec<ResultRow>, CoreError> {
    let start = Instant::now();
    let mut rows = match plan.command {
        RunCommand::Verify(theorem) => run_verify(plan, ctx, seed, trial_index, theorem)?,
        RunCommand::Apps(app) => run_app(plan, ctx, seed, app)?,
    };
    let elapsed = if plan.timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    for row in &mut rows {
        row.elapsed_ms = elapsed;
    }
    Ok(rows)
}

fn run_verify(
    plan: &RunPlan,
    ctx: &QContext,
    seed: u64,
    trial_index: usize,
    theorem: TheoremId,
) -> Result<Vec<ResultRow>, CoreError> {
    let field = &ctx.field;
    let run_id = plan.run_id();
    let line_seed = seed ^ LINE_SEED_SALT;
    let row = |report: &ffincidence::theorems::BoundReport| {
        ResultRow::from_report(&run_id, field.q(), plan.d1, plan.d2, seed, report, 0)
    };
    match theorem {
        TheoremId::Cs | TheoremId::Vinh | TheoremId::Sdz => {
            let points = plan.gen_points.points(field, 2, 2, seed)?;
            let lines = plan.gen_lines.line_pairs(field, line_seed, false)?;
            if let Some(dir) = &plan.dump_dir {
                let mut f = fs::File::create(dir.join(format!("q{}-s{seed}-points.txt", ctx.q)))?;
                write_point_set(&mut f, field, &points)?;
                let mut f = fs::File::create(dir.join(format!("q{}-s{seed}-lines.txt", ctx.q)))?;
                write_line_pair_set(&mut f, field, &lines)?;
            }
            let rows = match theorem {
                TheoremId::Cs => {
                    let (r1, r2) = verify_cs(field, &points, &lines);
                    vec![row(&r1), row(&r2)]
                }
                TheoremId::Vinh => {
                    let r = verify_vinh(field, &points, &lines, plan.lambda, ctx.spectral.as_ref())?;
                    vec![row(&r)]
                }
                _ => {
                    let r = verify_sdz(field, &points, &lines, plan.sdz);
                    vec![row(&r)]
                }
            };
            if trial_index.is_multiple_of(SPOT_CHECK_EVERY) {
                let mut pbuf = Vec::new();
                write_point_set(&mut pbuf, field, &points)?;
                let mut lbuf = Vec::new();
                write_line_pair_set(&mut lbuf, field, &lines)?;
                let p2 = ffincidence::geometry::read_point_set(&pbuf[..], field)?;
                let l2 = ffincidence::geometry::read_line_pair_set(&lbuf[..], field)?;
                let recount = count_incidences(field, &p2, &l2, Method::Naive).count;
                if recount != rows[0].lhs {
                    return Err(CoreError::OracleMismatch {
                        left_name: "serialized-set recount",
                        left: recount,
                        right_name: "row lhs",
                        right: rows[0].lhs,
                    });
                }
            }
            Ok(rows)
        }
        TheoremId::Hyperplane => {
            let points = plan.gen_points.points(field, plan.d1, plan.d2, seed)?;
            let planes = plan
                .gen_lines
                .hyperplane_pairs(field, plan.d1, plan.d2, line_seed)?;
            if let Some(dir) = &plan.dump_dir {
                let mut f = fs::File::create(dir.join(format!("q{}-s{seed}-points.txt", ctx.q)))?;
                write_point_set(&mut f, field, &points)?;
                let mut f =
                    fs::File::create(dir.join(format!("q{}-s{seed}-hyperplanes.txt", ctx.q)))?;
                write_hyperplane_pair_set(&mut f, field, &planes)?;
            }
            let r = verify_hyperplane(field, &points, &planes, plan.lambda, ctx.spectral.as_ref())?;
            if trial_index.is_multiple_of(SPOT_CHECK_EVERY) {
                let mut pbuf = Vec::new();
                write_point_set(&mut pbuf, field, &points)?;
                let mut hbuf = Vec::new();
                write_hyperplane_pair_set(&mut hbuf, field, &planes)?;
                let p2 = ffincidence::geometry::read_point_set(&pbuf[..], field)?;
                let h2 = ffincidence::geometry::read_hyperplane_pair_set(&hbuf[..], field)?;
                let recount = count_incidences(field, &p2, &h2, Method::Naive).count;
                if recount != r.lhs {
                    return Err(CoreError::OracleMismatch {
                        left_name: "serialized-set recount",
                        left: recount,
                        right_name: "row lhs",
                        right: r.lhs,
                    });
                }
            }
            Ok(vec![row(&r)])
        }
        TheoremId::Cartesian => {
            let a = plan.gen_points.plane_points(field, seed)?;
            let b = plan.gen_b.plane_points(field, seed ^ B_SEED_SALT)?;
            let lines = plan.gen_lines.line_pairs(field, line_seed, true)?;
            if let Some(dir) = &plan.dump_dir {
                let mut f = fs::File::create(dir.join(format!("q{}-s{seed}-a.txt", ctx.q)))?;
                write_plane_points(&mut f, field, &a)?;
                let mut f = fs::File::create(dir.join(format!("q{}-s{seed}-b.txt", ctx.q)))?;
                write_plane_points(&mut f, field, &b)?;
                let mut f = fs::File::create(dir.join(format!("q{}-s{seed}-lines.txt", ctx.q)))?;
                write_line_pair_set(&mut f, field, &lines)?;
            }
            let outcome = verify_cartesian(field, &a, &b, &lines, plan.threshold_exponent)?;
            if trial_index.is_multiple_of(SPOT_CHECK_EVERY) {
                let roundtrip = |pts: &[ffincidence::geometry::PlanePoint]| {
                    let mut buf = Vec::new();
                    write_plane_points(&mut buf, field, pts)?;
                    ffincidence::geometry::read_plane_points(&buf[..], field)
                };
                let mut lbuf = Vec::new();
                write_line_pair_set(&mut lbuf, field, &lines)?;
                let l2 = ffincidence::geometry::read_line_pair_set(&lbuf[..], field)?;
                let product = cartesian_product(&roundtrip(&a)?, &roundtrip(&b)?)?;
                let recount = count_incidences(field, &product, &l2, Method::Naive).count;
                if recount != outcome.report.lhs {
                    return Err(CoreError::OracleMismatch {
                        left_name: "serialized-set recount",
                        left: recount,
                        right_name: "row lhs",
                        right: outcome.report.lhs,
                    });
                }
            }
            Ok(vec![row(&outcome.report)])
        }
    }
}

fn run_app(
    plan: &RunPlan,
    ctx: &QContext,
    seed: u64,
    app: AppId,
) -> Result<Vec<ResultRow>, CoreError> {
    let field = &ctx.field;
    let q = f64::from(field.q());
    let run_id = plan.run_id();
    let base = |theorem_id: &str| ResultRow {
        run_id: run_id.clone(),
        q: field.q(),
        d1: plan.d1,
        d2: plan.d2,
        theorem_id: theorem_id.to_string(),
        seed,
        lhs: 0,
        main_term: 0.0,
        bound_term: 0.0,
        discrepancy: 0.0,
        ratio: 0.0,
        hypothesis_ok: true,
        elapsed_ms: 0,
    };
    match app {
        AppId::DotPair => {
            let e = plan.gen_points.points(field, 2, 2, seed)?;
            let a = field.element(plan.a)?;
            let b = field.element(plan.b)?;
            let r = dot_product_pair_count(field, &e, a, b, plan.variant)?;
            let mut row = base("dot_pair");
            row.lhs = r.count;
            row.main_term = r.main_term;
            row.bound_term = r.bound;
            row.discrepancy = (r.count as f64 - r.main_term).abs();
            row.ratio = if r.bound > 0.0 { r.count as f64 / r.bound } else { 0.0 };
            row.hypothesis_ok = e.weight() as f64 >= q.powf(3.5);
            Ok(vec![row])
        }
        AppId::DotSingle => {
            let e = plan.gen_points.affine_points(field, plan.d1, seed)?;
            let a = field.element(plan.a)?;
            let r = dot_product_single(field, &e, a)?;
            let mut row = base("dot_single");
            row.lhs = r.count;
            row.main_term = r.main_term;
            row.bound_term = r.bound;
            row.discrepancy = (r.count as f64 - r.main_term).abs();
            row.ratio = r.ratio;
            Ok(vec![row])
        }
        AppId::Dot4d => {
            let e = plan.gen_points.affine_points(field, 4, seed)?;
            let t = field.element(plan.t)?;
            let r = dot_product_4d(field, &e, t)?;
            let mut row = base("dot_4d");
            row.lhs = r.count;
            row.main_term = r.main_term;
            row.bound_term = r.bound;
            row.discrepancy = (r.count as f64 - r.main_term).abs();
            row.ratio = if r.bound > 0.0 { r.count as f64 / r.bound } else { 0.0 };
            Ok(vec![row])
        }
        AppId::SumProduct => {
            let a = plan.gen_points.plane_points(field, seed)?;
            let r = sum_product(field, &a)?;
            let mut row = base("sum_product");
            row.lhs = r.max_side;
            row.main_term = q.powf(-0.375) * r.size_a as f64;
            row.bound_term = row.main_term;
            row.ratio = r.conclusion_ratio;
            row.hypothesis_ok = r.hypothesis_ok;
            row.discrepancy = (r.max_side as f64 - row.main_term).abs();
            Ok(vec![row])
        }
        AppId::VectorValued => {
            let a = plan.gen_points.plane_points(field, seed)?;
            let b = plan.gen_b.plane_points(field, seed ^ B_SEED_SALT)?;
            let r = vector_valued(field, &a, &b)?;
            let mut row = base("vector_valued");
            row.lhs = r.image_size;
            row.main_term = q.powf(-0.375) * (a.len() * b.len()) as f64;
            row.bound_term = row.main_term;
            row.ratio = r.ratio;
            row.hypothesis_ok = r.hypothesis_ok;
            row.discrepancy = (r.image_size as f64 - row.main_term).abs();
            Ok(vec![row])
        }
    }
}
