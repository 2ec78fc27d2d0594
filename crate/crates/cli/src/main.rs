//! `medsched`: generate synthetic worlds, solve single requests and run
//! batch benchmarks of the GA scheduler against its baselines.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use medsched_core::bench::{run_bench, solve, stats_from_rows, Algorithm, BenchConfig};
use medsched_core::datagen::{sample_request, World, WorldConfig};
use medsched_core::ga::GaConfig;
use medsched_core::io::{
    ensure_dir, read_csv, read_json, read_world, write_csv, write_json, WORLD_FILE,
};
use medsched_core::model::{format_instant, FacilityId, PractitionerId, ScheduleRequest};
use medsched_core::{BenchError, ConfigError, GenerateError, SolveError};

const EXIT_USAGE: u8 = 1;
const EXIT_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "medsched", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world (exam catalog, rules, facilities, slots)
    GenWorld(GenWorldArgs),
    /// Solve one request with one algorithm
    Solve(SolveArgs),
    /// Run every selected algorithm over a batch of random requests
    Bench(BenchArgs),
    /// Recompute pairwise Mann-Whitney statistics from itr.csv and trips.csv
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenWorldArgs {
    #[arg(long, env = "MEDSCHED_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory; receives world.json
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    rule_count: Option<usize>,
    #[arg(long)]
    horizon_days: Option<u32>,
    #[arg(long)]
    facilities: Option<u32>,
}

#[derive(Args)]
struct GaArgs {
    #[arg(long, default_value_t = 200)]
    generations: usize,
    #[arg(long, default_value_t = 100)]
    population: usize,
    #[arg(long, default_value_t = 7)]
    tournament_k: usize,
    #[arg(long, default_value_t = 0.10)]
    mutation_rate: f64,
}

impl GaArgs {
    fn config(&self, seed: u64) -> GaConfig {
        GaConfig {
            population: self.population,
            generations: self.generations,
            tournament_k: self.tournament_k,
            mutation_rate: self.mutation_rate,
            seed,
            ..GaConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Ordered,
    Unordered,
}

#[derive(Args)]
struct SolveArgs {
    /// world.json, or a directory containing it
    #[arg(long)]
    world: PathBuf,
    #[arg(long, default_value = "ga-ordered")]
    algo: Algorithm,
    /// Overrides the initialization variant of a GA algorithm
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    /// Number of acts in a sampled request
    #[arg(long, default_value_t = 5)]
    acts: usize,
    /// Seeds both request sampling and the solver
    #[arg(long, env = "MEDSCHED_SEED", default_value_t = 0)]
    seed: u64,
    /// Solve this request.json instead of sampling one
    #[arg(long)]
    request: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    prefer_facility: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    prefer_practitioner: Vec<u32>,
    #[arg(long)]
    start_day: Option<u32>,
    /// Output directory for request.json, solution.json and convergence.csv
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    ga: GaArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    world: PathBuf,
    /// Comma-separated subset of ga-ordered, ga-unordered, fcfs, random
    #[arg(long, value_delimiter = ',', default_values_t = Algorithm::ALL)]
    algo: Vec<Algorithm>,
    #[arg(long, default_value_t = 25)]
    trials: usize,
    #[arg(long, default_value_t = 5)]
    acts: usize,
    /// Base seed for per-trial requests and solvers
    #[arg(long, env = "MEDSCHED_SEED", default_value_t = 0)]
    seed: u64,
    /// Only sample requests in which some rule links two requested exams
    #[arg(long)]
    require_active_rules: bool,
    #[arg(long, default_value = "bench")]
    out: PathBuf,
    #[command(flatten)]
    ga: GaArgs,
}

#[derive(Args)]
struct StatsArgs {
    /// Bench output directory holding itr.csv and trips.csv; stats.csv is written there
    #[arg(long, default_value = "bench")]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        let code = match e {
            BenchError::Config(_) | BenchError::Generate(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::usage(e)
    }
}

impl From<GenerateError> for Failure {
    fn from(e: GenerateError) -> Self {
        Self::usage(e)
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::Config(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::GenWorld(args) => gen_world(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Stats(args) => cmd_stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn gen_world(args: GenWorldArgs) -> Result<(), Failure> {
    let defaults = WorldConfig::default();
    let config = WorldConfig {
        seed: args.seed,
        rule_count: args.rule_count.unwrap_or(defaults.rule_count),
        horizon_days: args.horizon_days.unwrap_or(defaults.horizon_days),
        facilities: args.facilities.unwrap_or(defaults.facilities),
        ..defaults
    };
    let world = World::generate(config)?;
    ensure_dir(&args.out)?;
    let path = args.out.join(WORLD_FILE);
    write_json(&path, &world)?;
    println!(
        "wrote {} ({} exams, {} rules, {} facilities, {} slots)",
        path.display(),
        world.exams.len(),
        world.rules.len(),
        world.facilities.len(),
        world.slots.len()
    );
    Ok(())
}

fn resolve_algorithm(algo: Algorithm, variant: Option<Variant>) -> Result<Algorithm, Failure> {
    match (variant, algo.is_ga()) {
        (None, _) => Ok(algo),
        (Some(_), false) => Err(Failure::usage(format!(
            "--variant only applies to GA algorithms, not {algo}"
        ))),
        (Some(Variant::Ordered), true) => Ok(Algorithm::GaOrdered),
        (Some(Variant::Unordered), true) => Ok(Algorithm::GaUnordered),
    }
}

fn build_request(args: &SolveArgs, world: &World) -> Result<ScheduleRequest, Failure> {
    let mut request = match &args.request {
        Some(path) => read_json::<ScheduleRequest>(path)?,
        None => sample_request(&world.exams, args.seed, args.acts)?,
    };
    if let Some(day) = args.start_day {
        request.start_date = day;
    }
    if !args.prefer_facility.is_empty() {
        request = request.with_facilities(args.prefer_facility.iter().copied().map(FacilityId));
    }
    if !args.prefer_practitioner.is_empty() {
        request = request
            .with_practitioners(args.prefer_practitioner.iter().copied().map(PractitionerId));
    }
    if request.acts.is_empty() {
        return Err(Failure::usage("request has no acts"));
    }
    Ok(request)
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let algorithm = resolve_algorithm(args.algo, args.variant)?;
    let world = read_world(&args.world)?;
    let request = build_request(&args, &world)?;
    let ga = args.ga.config(args.seed);
    ga.validate()?;

    ensure_dir(&args.out)?;
    write_json(&args.out.join("request.json"), &request)?;
    let mut outcome = solve(&world, &request, algorithm, &ga)?;
    let convergence = std::mem::take(&mut outcome.convergence);
    write_json(&args.out.join("solution.json"), &outcome)?;
    if algorithm.is_ga() {
        write_csv(&args.out.join("convergence.csv"), &convergence)?;
    }

    let m = &outcome.metrics;
    println!(
        "{algorithm}: fitness {:.6}, penalty {:.1}, trips {}, itr {}, overlap_ok={} compatibility_ok={} travel_ok={} fully_scheduled={}",
        outcome.fitness.score(),
        outcome.penalty_total,
        m.trips,
        m.itr.map_or("-".to_string(), |v| format!("{v:.3}")),
        m.overlap_ok,
        m.compatibility_ok,
        m.travel_ok,
        m.fully_scheduled
    );
    for a in &outcome.assignments {
        println!(
            "  act {} exam {} -> slot {} facility {} room {} practitioner {} {}+{}min",
            a.act,
            a.slot.exam.0,
            a.slot.id.0,
            a.slot.facility.0,
            a.slot.room.0,
            a.slot.practitioner.0,
            format_instant(a.slot.start),
            a.slot.duration_minutes
        );
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let world = read_world(&args.world)?;
    let config = BenchConfig {
        world: world.config.clone(),
        trials: args.trials,
        acts_per_request: args.acts,
        algorithms: args.algo,
        ga: args.ga.config(args.seed),
        seed: args.seed,
        require_active_rules: args.require_active_rules,
        output_dir: args.out.clone(),
    };
    let report = run_bench(&world, &config)?;
    report.write(&args.out)?;

    let failed = report.results.iter().filter(|r| r.outcome.is_err()).count();
    for row in report.fulfillment_rows() {
        println!(
            "{:<13} {:<16} {:>6.1}% ({}/{})",
            row.algorithm.name(),
            row.constraint,
            row.percent,
            row.fulfilled,
            row.trials
        );
    }
    if failed > 0 {
        eprintln!("warning: {failed} trial run(s) failed; see trials.csv");
    }
    println!("wrote CSVs to {}", args.out.display());
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), Failure> {
    let dir: &Path = &args.out;
    let itr = read_csv(&dir.join("itr.csv"))?;
    let trips = read_csv(&dir.join("trips.csv"))?;
    let rows = stats_from_rows(&itr, &trips);
    let path = dir.join("stats.csv");
    write_csv(&path, &rows)?;
    let text = std::fs::read_to_string(&path).map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: format!("i/o error on {}: {e}", path.display()),
    })?;
    print!("{text}");
    Ok(())
}
