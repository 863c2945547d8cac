//! Batch experiment runner for the incidence-geometry engine: drives the
//! theorem verifiers and applications over (q, seed) grids, measures and
//! checks graph spectra, and runs the oracle suite. Outputs are
//! byte-identical for identical configs regardless of worker count.

mod config;
mod oracle;
mod rows;
mod runner;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ffincidence::apps::PredicateVariant;
use ffincidence::gf::field_for_order;
use ffincidence::spectral::{build_graph, lambda_bound, second_eigenvalue, write_graph};
use ffincidence::theorems::{LambdaMode, SdzParams};

use config::{default_seed_base, parse_q_list, parse_seeds, ConfigError, FileConfig, GenSpec};
use rows::{write_rows, OutputFormat};
use runner::{AppId, RunCommand, RunPlan, TheoremId};

#[derive(Parser)]
#[command(
    name = "ffincidence",
    about = "Exact incidence-geometry experiments over finite fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one theorem verifier over a q x seed grid.
    Verify(GridArgs),
    /// Build a product polarity-type graph and measure its second eigenvalue.
    Spectrum(SpectrumArgs),
    /// Run one application over a q x seed grid.
    Apps(GridArgs),
    /// Run the oracle suite (cross-method equivalences and exact identities).
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Theorem to verify: cs | vinh | hyperplane | cartesian | sdz.
    #[arg(long)]
    theorem: Option<String>,
    /// Application to run: dot_pair | dot_single | dot_4d | sum_product |
    /// vector_valued.
    #[arg(long)]
    app: Option<String>,
    /// Comma-separated field orders, e.g. 2,3,4,5.
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    d1: Option<usize>,
    #[arg(long)]
    d2: Option<usize>,
    /// Point-side generator, e.g. random_points:n=20 or full_points.
    #[arg(long)]
    gen: Option<String>,
    /// Line/hyperplane-side generator, e.g. random_linepairs:n=20.
    #[arg(long = "gen-lines")]
    gen_lines: Option<String>,
    /// Second plane-set generator (B of cartesian and vector_valued).
    #[arg(long = "gen-b")]
    gen_b: Option<String>,
    /// Seed list: a..b (inclusive), a..=b, comma list, or one seed.
    /// Defaults to 10 seeds from $FFINCIDENCE_SEED.
    #[arg(long)]
    seeds: Option<String>,
    /// Lambda for vinh/hyperplane: paper | computed.
    #[arg(long)]
    lambda: Option<String>,
    /// Dot-product predicate: as_written | corrected.
    #[arg(long)]
    variant: Option<String>,
    /// Exponent in the |A||L| <= q^e hypothesis of the cartesian bound.
    #[arg(long = "threshold-exponent")]
    threshold_exponent: Option<f64>,
    /// Output format: csv | json.
    #[arg(long)]
    out: Option<String>,
    /// Write output to a file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Directory to dump the generated input sets per trial.
    #[arg(long = "dump-sets")]
    dump_sets: Option<PathBuf>,
    /// Emit measured per-trial elapsed_ms instead of 0 (breaks byte-identical
    /// reruns).
    #[arg(long)]
    timing: bool,
    /// Eigensolver tolerance for computed-lambda runs.
    #[arg(long)]
    tol: Option<f64>,
    /// Dot-product target a.
    #[arg(long)]
    a: Option<u64>,
    /// Dot-product target b.
    #[arg(long)]
    b: Option<u64>,
    /// Dot-product target t (4d split).
    #[arg(long)]
    t: Option<u64>,
    /// C constant of the sdz bound.
    #[arg(long)]
    c: Option<f64>,
    /// C' constant of the sdz hypothesis.
    #[arg(long = "c-prime")]
    c_prime: Option<f64>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 2)]
    d1: usize,
    #[arg(long, default_value_t = 2)]
    d2: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Dump the adjacency list to a file.
    #[arg(long = "dump-graph")]
    dump_graph: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Comma-separated field orders (default 2,3,4,5).
    #[arg(long, default_value = "2,3,4,5")]
    q: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Test mode: flip one adjacency bit and expect the suite to fail.
    #[arg(long = "inject-fault", hide = true)]
    inject_fault: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Verify(args) => run_grid(args, false),
        Command::Apps(args) => run_grid(args, true),
        Command::Spectrum(args) => run_spectrum(args),
        Command::Oracle(args) => run_oracle_cmd(args),
    };
    match code {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Merges file config under explicit flags and builds the run plan.
fn build_plan(args: &GridArgs, apps: bool) -> Result<(RunPlan, OutputFormat, Option<PathBuf>, Option<usize>), ConfigError> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let pick = |cli: &Option<String>, file: &Option<String>| -> Option<String> {
        cli.clone().or_else(|| file.clone())
    };
    let command = if apps {
        let name = pick(&args.app, &file.app)
            .ok_or_else(|| ConfigError::Message("missing --app".into()))?;
        RunCommand::Apps(
            AppId::parse(&name)
                .ok_or_else(|| ConfigError::Message(format!("unknown app: {name}")))?,
        )
    } else {
        let name = pick(&args.theorem, &file.theorem)
            .ok_or_else(|| ConfigError::Message("missing --theorem".into()))?;
        RunCommand::Verify(
            TheoremId::parse(&name)
                .ok_or_else(|| ConfigError::Message(format!("unknown theorem: {name}")))?,
        )
    };
    let q_spec = pick(&args.q, &file.q).ok_or_else(|| ConfigError::Message("missing --q".into()))?;
    let q_list = parse_q_list(&q_spec)?;
    for &q in &q_list {
        field_for_order(q).map_err(|e| ConfigError::Message(e.to_string()))?;
    }
    let seeds = match pick(&args.seeds, &file.seeds) {
        Some(s) => parse_seeds(&s)?,
        None => {
            let base = default_seed_base();
            (base..base + 10).collect()
        }
    };
    let gen_points = GenSpec::parse(
        &pick(&args.gen, &file.gen).unwrap_or_else(|| "random_points:n=20".into()),
    )?;
    let gen_lines = GenSpec::parse(
        &pick(&args.gen_lines, &file.gen_lines).unwrap_or_else(|| default_line_gen(command)),
    )?;
    let gen_b = match pick(&args.gen_b, &file.gen_b) {
        Some(s) => GenSpec::parse(&s)?,
        None => gen_points.clone(),
    };
    let lambda = match pick(&args.lambda, &file.lambda).as_deref() {
        None | Some("paper") => LambdaMode::Paper,
        Some("computed") => LambdaMode::Computed,
        Some(other) => return err_config(format!("unknown lambda mode: {other}")),
    };
    let variant = match pick(&args.variant, &file.variant).as_deref() {
        None | Some("corrected") => PredicateVariant::Corrected,
        Some("as_written") => PredicateVariant::AsWritten,
        Some(other) => return err_config(format!("unknown predicate variant: {other}")),
    };
    let out = match pick(&args.out, &file.out).as_deref() {
        None => OutputFormat::Csv,
        Some(s) => OutputFormat::parse(s)
            .ok_or_else(|| ConfigError::Message(format!("unknown output format: {s}")))?,
    };
    let plan = RunPlan {
        command,
        q_list,
        seeds,
        d1: args.d1.or(file.d1).unwrap_or(2),
        d2: args.d2.or(file.d2).unwrap_or(2),
        gen_points,
        gen_lines,
        gen_b,
        lambda,
        variant,
        threshold_exponent: args
            .threshold_exponent
            .or(file.threshold_exponent)
            .unwrap_or(3.5),
        sdz: SdzParams {
            c: args.c.or(file.c).unwrap_or(1.0),
            c_prime: args.c_prime.or(file.c_prime).unwrap_or(1.0),
        },
        a: args.a.or(file.a).unwrap_or(1),
        b: args.b.or(file.b).unwrap_or(1),
        t: args.t.or(file.t).unwrap_or(0),
        tol: args.tol.or(file.tol).unwrap_or(1e-8),
        dump_dir: args.dump_sets.clone().or(file.dump_sets),
        timing: args.timing || file.timing.unwrap_or(false),
    };
    let output = args.output.clone().or(file.output);
    let workers = args.workers.or(file.workers);
    Ok((plan, out, output, workers))
}

fn err_config<T>(msg: String) -> Result<T, ConfigError> {
    Err(ConfigError::Message(msg))
}

fn default_line_gen(command: RunCommand) -> String {
    match command {
        RunCommand::Verify(TheoremId::Hyperplane) => "random_hyperplanepairs:n=20".into(),
        RunCommand::Verify(TheoremId::Cartesian) => "random_linepairs:n=10,nonvertical=true".into(),
        _ => "random_linepairs:n=20".into(),
    }
}

fn run_grid(args: GridArgs, apps: bool) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let (plan, format, output, workers) = build_plan(&args, apps)?;
    let start = Instant::now();
    let rows = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| runner::run(&plan)),
        None => runner::run(&plan),
    };
    let rows = match rows {
        Ok(rows) => rows,
        Err(e) => {
            // Hard-assertion failures (mixing violations, oracle
            // disagreements) exit 1; they are findings, not config noise.
            eprintln!("verification failure: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    match &output {
        Some(path) => {
            let file = fs::File::create(path)?;
            write_rows(file, format, &rows)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_rows(stdout.lock(), format, &rows)?;
        }
    }
    eprintln!(
        "{} rows in {:.1} ms",
        rows.len(),
        start.elapsed().as_secs_f64() * 1e3
    );
    Ok(ExitCode::SUCCESS)
}

fn run_spectrum(args: SpectrumArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let field = field_for_order(args.q)?;
    let graph = build_graph(&field, args.d1, args.d2)?;
    let report = match second_eigenvalue(&graph, args.tol) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("verification failure: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    if let Some(path) = &args.dump_graph {
        let mut file = fs::File::create(path)?;
        write_graph(&mut file, &graph)?;
    }
    let object = serde_json::json!({
        "q": args.q,
        "d1": args.d1,
        "d2": args.d2,
        "n": graph.n(),
        "k": graph.k(),
        "lambda2": report.lambda2,
        "bound": lambda_bound(&field, args.d1, args.d2),
        "method": report.method.to_string(),
        "residual": report.residual,
        "iterations": report.iterations,
    });
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &object)?;
    writeln!(stdout)?;
    Ok(ExitCode::SUCCESS)
}

fn run_oracle_cmd(args: OracleArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let q_list = parse_q_list(&args.q)?;
    let code = oracle::run_oracle(&oracle::OracleOptions {
        q_list,
        inject_fault: args.inject_fault,
        tol: args.tol,
    });
    Ok(ExitCode::from(code as u8))
}
