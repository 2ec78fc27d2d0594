//! Single solves and multi-trial benchmarks comparing the GA variants with
//! the FCFS and random baselines.
//!
//! A benchmark reuses one world and draws a fresh request per trial. Trials
//! run in parallel; results are collected in trial order so output files are
//! identical across runs with the same configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{fcfs_schedule, random_schedule};
use crate::datagen::{sample_request, World, WorldConfig};
use crate::error::{BenchError, ConfigError, GenerateError, SolveError};
use crate::fitness::{compute_penalties, FitnessValue, PenaltyBreakdown};
use crate::ga::{evolve, filter_search_space, GaConfig, InitVariant};
use crate::io::{ensure_dir, write_csv, CsvRow};
use crate::metrics::{mann_whitney_u, median, solution_metrics, SolutionMetrics};
use crate::model::{Assignment, IncompatibilityRule, ScheduleRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "ga-ordered")]
    GaOrdered,
    #[serde(rename = "ga-unordered")]
    GaUnordered,
    #[serde(rename = "fcfs")]
    Fcfs,
    #[serde(rename = "random")]
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::GaOrdered,
        Algorithm::GaUnordered,
        Algorithm::Fcfs,
        Algorithm::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GaOrdered => "ga-ordered",
            Algorithm::GaUnordered => "ga-unordered",
            Algorithm::Fcfs => "fcfs",
            Algorithm::Random => "random",
        }
    }

    pub fn ga_variant(self) -> Option<InitVariant> {
        match self {
            Algorithm::GaOrdered => Some(InitVariant::Ordered),
            Algorithm::GaUnordered => Some(InitVariant::Unordered),
            Algorithm::Fcfs | Algorithm::Random => None,
        }
    }

    pub fn is_ga(self) -> bool {
        self.ga_variant().is_some()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                ConfigError::invalid(format!(
                    "unknown algorithm {s:?}; expected one of ga-ordered, ga-unordered, fcfs, random"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

/// Everything known about one algorithm's answer to one request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub algorithm: Algorithm,
    pub request: ScheduleRequest,
    pub assignments: Vec<Assignment>,
    pub penalties: PenaltyBreakdown,
    pub penalty_total: f64,
    pub fitness: FitnessValue,
    pub metrics: SolutionMetrics,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub convergence: Vec<ConvergencePoint>,
}

/// Runs `algorithm` on `request`. `ga.seed` also seeds the random baseline.
/// The variant field of `ga` is overridden by the algorithm.
pub fn solve(
    world: &World,
    request: &ScheduleRequest,
    algorithm: Algorithm,
    ga: &GaConfig,
) -> Result<SolveOutcome, SolveError> {
    let space = filter_search_space(&world.slots, request);
    if space.is_unschedulable() {
        return Err(SolveError::Unschedulable);
    }
    let (schedule, convergence) = match algorithm.ga_variant() {
        Some(variant) => {
            let out = evolve(
                &space,
                request,
                &world.rules,
                &ga.clone().with_variant(variant),
            )?;
            let convergence = out
                .history
                .iter()
                .map(|h| ConvergencePoint {
                    generation: h.generation,
                    best_fitness: h.best_fitness,
                    mean_fitness: h.mean_fitness,
                })
                .collect();
            (out.best, convergence)
        }
        None if algorithm == Algorithm::Fcfs => (fcfs_schedule(&space, request), Vec::new()),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(ga.seed);
            (random_schedule(&space, request, &mut rng), Vec::new())
        }
    };
    let penalties = compute_penalties(&schedule, request, &world.rules);
    Ok(SolveOutcome {
        algorithm,
        request: request.clone(),
        metrics: solution_metrics(&schedule, &world.rules, request.act_count()),
        assignments: schedule.chronological(),
        penalty_total: penalties.total(),
        fitness: penalties.fitness(),
        penalties,
        convergence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub world: WorldConfig,
    pub trials: usize,
    pub acts_per_request: usize,
    pub algorithms: Vec<Algorithm>,
    pub ga: GaConfig,
    /// Base seed for per-trial requests.
    pub seed: u64,
    /// Only keep requests in which at least one rule links two requested exams.
    pub require_active_rules: bool,
    pub output_dir: PathBuf,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            trials: 25,
            acts_per_request: 5,
            algorithms: Algorithm::ALL.to_vec(),
            ga: GaConfig::default(),
            seed: 0,
            require_active_rules: false,
            output_dir: PathBuf::from("bench"),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::invalid("trials must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(ConfigError::invalid("at least one algorithm is required"));
        }
        self.world.validate()?;
        self.ga.validate()
    }
}

/// SplitMix64 finalizer over (base, stream, index), used to derive
/// independent per-trial seeds.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SEED_STREAM_REQUEST: u64 = 1;
const SEED_STREAM_SOLVER: u64 = 2;

pub fn rules_link(acts: &[crate::model::ExamId], rules: &[IncompatibilityRule]) -> bool {
    rules
        .iter()
        .any(|r| acts.contains(&r.first) && acts.contains(&r.second))
}

/// Request for a benchmark trial. With `require_active` set, candidate seeds
/// are tried in sequence until a request links at least one rule.
pub fn trial_request(
    world: &World,
    base_seed: u64,
    trial: usize,
    n_acts: usize,
    require_active: bool,
) -> Result<(u64, ScheduleRequest), GenerateError> {
    const MAX_ATTEMPTS: u64 = 10_000;
    for attempt in 0..MAX_ATTEMPTS {
        let seed = derive_seed(
            base_seed,
            SEED_STREAM_REQUEST,
            (trial as u64) * MAX_ATTEMPTS + attempt,
        );
        let request = sample_request(&world.exams, seed, n_acts)?;
        if !require_active || rules_link(&request.acts, &world.rules) {
            return Ok((seed, request));
        }
        if world.rules.is_empty() {
            break;
        }
    }
    Err(GenerateError::Config(ConfigError::invalid(
        "could not sample a request linking any incompatibility rule",
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub algorithm: Algorithm,
    pub request_seed: u64,
    pub solver_seed: u64,
    pub outcome: Result<SolveOutcome, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    /// Trial-major, algorithms in configured order.
    pub results: Vec<TrialResult>,
}

pub fn run_bench(world: &World, config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let per_trial: Vec<Vec<TrialResult>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(world, config, trial))
        .collect();
    Ok(BenchReport {
        config: config.clone(),
        results: per_trial.into_iter().flatten().collect(),
    })
}

fn run_trial(world: &World, config: &BenchConfig, trial: usize) -> Vec<TrialResult> {
    let solver_seed = derive_seed(config.ga.seed, SEED_STREAM_SOLVER, trial as u64);
    let request = trial_request(
        world,
        config.seed,
        trial,
        config.acts_per_request,
        config.require_active_rules,
    );
    config
        .algorithms
        .iter()
        .map(|&algorithm| {
            let (request_seed, outcome) = match &request {
                Ok((seed, req)) => {
                    let ga = GaConfig {
                        seed: solver_seed,
                        ..config.ga.clone()
                    };
                    (
                        *seed,
                        solve(world, req, algorithm, &ga).map_err(|e| e.to_string()),
                    )
                }
                Err(e) => (0, Err(e.to_string())),
            };
            TrialResult {
                trial,
                algorithm,
                request_seed,
                solver_seed,
                outcome,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub algorithm: Algorithm,
    pub generation: usize,
    pub mean_fitness: f64,
    pub best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FulfillmentRow {
    pub algorithm: Algorithm,
    pub constraint: String,
    pub fulfilled: usize,
    pub trials: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItrRow {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub itr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripsRow {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub trips: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub metric: String,
    pub algorithm_a: Algorithm,
    pub algorithm_b: Algorithm,
    pub n_a: usize,
    pub n_b: usize,
    pub median_a: f64,
    pub median_b: f64,
    pub u: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub request_seed: u64,
    pub solver_seed: u64,
    pub fitness: Option<f64>,
    pub penalty_total: Option<f64>,
    pub itr: Option<f64>,
    pub trips: Option<u32>,
    pub overlap_ok: Option<bool>,
    pub compatibility_ok: Option<bool>,
    pub travel_ok: Option<bool>,
    pub fully_scheduled: Option<bool>,
    pub error: Option<String>,
}

impl CsvRow for ConvergencePoint {
    const HEADER: &'static [&'static str] = &["generation", "best_fitness", "mean_fitness"];
}

impl CsvRow for ConvergenceRow {
    const HEADER: &'static [&'static str] =
        &["algorithm", "generation", "mean_fitness", "best_fitness"];
}

impl CsvRow for FulfillmentRow {
    const HEADER: &'static [&'static str] =
        &["algorithm", "constraint", "fulfilled", "trials", "percent"];
}

impl CsvRow for ItrRow {
    const HEADER: &'static [&'static str] = &["algorithm", "trial", "itr"];
}

impl CsvRow for TripsRow {
    const HEADER: &'static [&'static str] = &["algorithm", "trial", "trips"];
}

impl CsvRow for StatsRow {
    const HEADER: &'static [&'static str] = &[
        "metric",
        "algorithm_a",
        "algorithm_b",
        "n_a",
        "n_b",
        "median_a",
        "median_b",
        "u",
        "p",
    ];
}

impl CsvRow for TrialRow {
    const HEADER: &'static [&'static str] = &[
        "algorithm",
        "trial",
        "request_seed",
        "solver_seed",
        "fitness",
        "penalty_total",
        "itr",
        "trips",
        "overlap_ok",
        "compatibility_ok",
        "travel_ok",
        "fully_scheduled",
        "error",
    ];
}

pub const CONSTRAINTS: [&str; 4] = ["overlap", "compatibility", "travel", "fully_scheduled"];

impl BenchReport {
    pub fn outcomes(&self, algorithm: Algorithm) -> impl Iterator<Item = &SolveOutcome> {
        self.results
            .iter()
            .filter(move |r| r.algorithm == algorithm)
            .filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn itr_values(&self, algorithm: Algorithm) -> Vec<f64> {
        self.outcomes(algorithm)
            .filter_map(|o| o.metrics.itr)
            .collect()
    }

    pub fn trip_values(&self, algorithm: Algorithm) -> Vec<f64> {
        self.outcomes(algorithm)
            .map(|o| f64::from(o.metrics.trips))
            .collect()
    }

    pub fn fitness_values(&self, algorithm: Algorithm) -> Vec<f64> {
        self.outcomes(algorithm)
            .map(|o| o.fitness.score())
            .collect()
    }

    /// Fraction of successful trials in which `constraint` holds.
    pub fn fulfillment_rate(&self, algorithm: Algorithm, constraint: &str) -> f64 {
        let flags: Vec<bool> = self
            .outcomes(algorithm)
            .map(|o| constraint_flag(&o.metrics, constraint))
            .collect();
        if flags.is_empty() {
            return 0.0;
        }
        flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64
    }

    pub fn convergence_rows(&self) -> Vec<ConvergenceRow> {
        let generations = self.config.ga.generations;
        let mut rows = Vec::new();
        for &algorithm in &self.config.algorithms {
            let outcomes: Vec<&SolveOutcome> = self.outcomes(algorithm).collect();
            if outcomes.is_empty() {
                continue;
            }
            let n = outcomes.len() as f64;
            if algorithm.is_ga() {
                for g in 0..generations {
                    let (mean, best) = outcomes.iter().fold((0.0, 0.0), |(m, b), o| {
                        let p = &o.convergence[g];
                        (m + p.mean_fitness, b + p.best_fitness)
                    });
                    rows.push(ConvergenceRow {
                        algorithm,
                        generation: g,
                        mean_fitness: mean / n,
                        best_fitness: best / n,
                    });
                }
            } else {
                let level = outcomes.iter().map(|o| o.fitness.score()).sum::<f64>() / n;
                rows.extend((0..generations).map(|g| ConvergenceRow {
                    algorithm,
                    generation: g,
                    mean_fitness: level,
                    best_fitness: level,
                }));
            }
        }
        rows
    }

    pub fn fulfillment_rows(&self) -> Vec<FulfillmentRow> {
        let mut rows = Vec::new();
        for &algorithm in &self.config.algorithms {
            let trials = self.outcomes(algorithm).count();
            for constraint in CONSTRAINTS {
                let fulfilled = self
                    .outcomes(algorithm)
                    .filter(|o| constraint_flag(&o.metrics, constraint))
                    .count();
                rows.push(FulfillmentRow {
                    algorithm,
                    constraint: constraint.to_string(),
                    fulfilled,
                    trials,
                    percent: if trials == 0 {
                        0.0
                    } else {
                        100.0 * fulfilled as f64 / trials as f64
                    },
                });
            }
        }
        rows
    }

    pub fn itr_rows(&self) -> Vec<ItrRow> {
        self.results
            .iter()
            .filter_map(|r| {
                r.outcome.as_ref().ok().map(|o| ItrRow {
                    algorithm: r.algorithm,
                    trial: r.trial,
                    itr: o.metrics.itr,
                })
            })
            .collect()
    }

    pub fn trips_rows(&self) -> Vec<TripsRow> {
        self.results
            .iter()
            .filter_map(|r| {
                r.outcome.as_ref().ok().map(|o| TripsRow {
                    algorithm: r.algorithm,
                    trial: r.trial,
                    trips: o.metrics.trips,
                })
            })
            .collect()
    }

    pub fn trial_rows(&self) -> Vec<TrialRow> {
        self.results
            .iter()
            .map(|r| {
                let ok = r.outcome.as_ref().ok();
                TrialRow {
                    algorithm: r.algorithm,
                    trial: r.trial,
                    request_seed: r.request_seed,
                    solver_seed: r.solver_seed,
                    fitness: ok.map(|o| o.fitness.score()),
                    penalty_total: ok.map(|o| o.penalty_total),
                    itr: ok.and_then(|o| o.metrics.itr),
                    trips: ok.map(|o| o.metrics.trips),
                    overlap_ok: ok.map(|o| o.metrics.overlap_ok),
                    compatibility_ok: ok.map(|o| o.metrics.compatibility_ok),
                    travel_ok: ok.map(|o| o.metrics.travel_ok),
                    fully_scheduled: ok.map(|o| o.metrics.fully_scheduled),
                    error: r.outcome.as_ref().err().cloned(),
                }
            })
            .collect()
    }

    pub fn stats_rows(&self) -> Vec<StatsRow> {
        let itr = samples_by_algorithm(&self.config.algorithms, |a| self.itr_values(a));
        let trips = samples_by_algorithm(&self.config.algorithms, |a| self.trip_values(a));
        let mut rows = pairwise_stats("itr", &itr);
        rows.extend(pairwise_stats("trips", &trips));
        rows
    }

    /// Writes convergence, fulfillment, itr, trips, stats and trials CSVs.
    pub fn write(&self, dir: &Path) -> Result<(), BenchError> {
        ensure_dir(dir)?;
        write_csv(&dir.join("convergence.csv"), &self.convergence_rows())?;
        write_csv(&dir.join("fulfillment.csv"), &self.fulfillment_rows())?;
        write_csv(&dir.join("itr.csv"), &self.itr_rows())?;
        write_csv(&dir.join("trips.csv"), &self.trips_rows())?;
        write_csv(&dir.join("stats.csv"), &self.stats_rows())?;
        write_csv(&dir.join("trials.csv"), &self.trial_rows())
    }
}

fn constraint_flag(m: &SolutionMetrics, constraint: &str) -> bool {
    match constraint {
        "overlap" => m.overlap_ok,
        "compatibility" => m.compatibility_ok,
        "travel" => m.travel_ok,
        "fully_scheduled" => m.fully_scheduled,
        other => panic!("unknown constraint {other}"),
    }
}

fn samples_by_algorithm(
    algorithms: &[Algorithm],
    values: impl Fn(Algorithm) -> Vec<f64>,
) -> Vec<(Algorithm, Vec<f64>)> {
    algorithms.iter().map(|&a| (a, values(a))).collect()
}

/// Mann-Whitney U for every unordered pair of algorithms with non-empty samples.
pub fn pairwise_stats(metric: &str, samples: &[(Algorithm, Vec<f64>)]) -> Vec<StatsRow> {
    let mut rows = Vec::new();
    for (i, (a, xs)) in samples.iter().enumerate() {
        for (b, ys) in &samples[i + 1..] {
            let Ok(test) = mann_whitney_u(xs, ys) else {
                continue;
            };
            rows.push(StatsRow {
                metric: metric.to_string(),
                algorithm_a: *a,
                algorithm_b: *b,
                n_a: xs.len(),
                n_b: ys.len(),
                median_a: median(xs).expect("non-empty"),
                median_b: median(ys).expect("non-empty"),
                u: test.u,
                p: test.p,
            });
        }
    }
    rows
}

/// Recomputes stats rows from previously written `itr.csv` / `trips.csv`.
pub fn stats_from_rows(itr: &[ItrRow], trips: &[TripsRow]) -> Vec<StatsRow> {
    let mut algorithms: Vec<Algorithm> = itr
        .iter()
        .map(|r| r.algorithm)
        .chain(trips.iter().map(|r| r.algorithm))
        .collect();
    algorithms.sort();
    algorithms.dedup();
    let itr_samples = samples_by_algorithm(&algorithms, |a| {
        itr.iter()
            .filter(|r| r.algorithm == a)
            .filter_map(|r| r.itr)
            .collect()
    });
    let trip_samples = samples_by_algorithm(&algorithms, |a| {
        trips
            .iter()
            .filter(|r| r.algorithm == a)
            .map(|r| f64::from(r.trips))
            .collect()
    });
    let mut rows = pairwise_stats("itr", &itr_samples);
    rows.extend(pairwise_stats("trips", &trip_samples));
    rows
}
