//! Genetic algorithm over per-act slot choices.
//!
//! An individual holds one gene per requested act: the position of the chosen
//! slot within that act's candidate block. This is the concatenated one-hot
//! encoding stored compactly; [`Individual::to_one_hot`] expands it. Crossover
//! cuts only at block boundaries, so every offspring still picks exactly one
//! slot per act.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::optimal_act_order;
use crate::error::{ConfigError, SolveError};
use crate::fitness::{compute_penalties, fitness, FitnessValue, PenaltyBreakdown};
use crate::model::{Assignment, IncompatibilityRule, Schedule, ScheduleRequest, TimeSlot};

/// Candidate slots per act, each block sorted by start time then slot id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub per_act: Vec<Vec<TimeSlot>>,
}

impl SearchSpace {
    pub fn act_count(&self) -> usize {
        self.per_act.len()
    }

    pub fn block(&self, act: usize) -> &[TimeSlot] {
        &self.per_act[act]
    }

    pub fn is_unschedulable(&self) -> bool {
        self.per_act.iter().all(Vec::is_empty)
    }

    /// Number of distinct complete assignments (empty blocks count as one choice).
    pub fn combinations(&self) -> u128 {
        self.per_act
            .iter()
            .map(|b| b.len().max(1) as u128)
            .product()
    }
}

/// Candidates for each act: matching exam, on or after the start date, and
/// within the facility/practitioner preferences.
pub fn filter_search_space(slots: &[TimeSlot], request: &ScheduleRequest) -> SearchSpace {
    let per_act = request
        .acts
        .iter()
        .map(|&exam| {
            let mut block: Vec<TimeSlot> = slots
                .iter()
                .filter(|s| s.exam == exam && request.admits(s))
                .copied()
                .collect();
            block.sort_by_key(|s| (s.start, s.id));
            block
        })
        .collect();
    SearchSpace { per_act }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Individual {
    /// Position within each act's block; `None` when the block is empty.
    pub genes: Vec<Option<usize>>,
}

impl Individual {
    pub fn new(genes: Vec<Option<usize>>) -> Self {
        Self { genes }
    }

    pub fn act_count(&self) -> usize {
        self.genes.len()
    }

    /// Concatenated binary blocks, one per act, with exactly one bit set in
    /// every non-empty block.
    pub fn to_one_hot(&self, space: &SearchSpace) -> Vec<bool> {
        let mut bits = Vec::new();
        for (gene, block) in self.genes.iter().zip(&space.per_act) {
            let offset = bits.len();
            bits.resize(offset + block.len(), false);
            if let Some(pos) = gene {
                bits[offset + pos] = true;
            }
        }
        bits
    }

    /// Inverse of [`Individual::to_one_hot`]; `None` unless every non-empty
    /// block has exactly one bit set.
    pub fn from_one_hot(bits: &[bool], space: &SearchSpace) -> Option<Self> {
        let total: usize = space.per_act.iter().map(Vec::len).sum();
        if bits.len() != total {
            return None;
        }
        let mut genes = Vec::with_capacity(space.act_count());
        let mut offset = 0;
        for block in &space.per_act {
            let chunk = &bits[offset..offset + block.len()];
            offset += block.len();
            let mut set = chunk.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i);
            let gene = match (set.next(), set.next()) {
                (None, _) if block.is_empty() => None,
                (Some(i), None) => Some(i),
                _ => return None,
            };
            genes.push(gene);
        }
        Some(Self { genes })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitVariant {
    /// Acts sampled in precedence order, each after the previous act's slot.
    Ordered,
    /// Every gene drawn independently.
    Unordered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament_k: usize,
    pub mutation_rate: f64,
    pub variant: InitVariant,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 200,
            tournament_k: 7,
            mutation_rate: 0.10,
            variant: InitVariant::Unordered,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population == 0 {
            return Err(ConfigError::invalid("population must be at least 1"));
        }
        if self.tournament_k == 0 || self.tournament_k > self.population {
            return Err(ConfigError::invalid(format!(
                "tournament_k must be in 1..={}, got {}",
                self.population, self.tournament_k
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(ConfigError::invalid(format!(
                "mutation_rate must be in [0, 1], got {}",
                self.mutation_rate
            )));
        }
        Ok(())
    }

    pub fn with_variant(mut self, variant: InitVariant) -> Self {
        self.variant = variant;
        self
    }
}

/// A uniformly random gene per act; empty blocks stay unassigned.
pub fn random_individual<R: Rng + ?Sized>(space: &SearchSpace, rng: &mut R) -> Individual {
    Individual::new(
        space
            .per_act
            .iter()
            .map(|block| (!block.is_empty()).then(|| rng.gen_range(0..block.len())))
            .collect(),
    )
}

/// Walks acts in `order`; each act draws uniformly among candidates starting
/// at or after the previous pick's end, or from its whole block when none do.
pub fn ordered_individual<R: Rng + ?Sized>(
    space: &SearchSpace,
    order: &[usize],
    rng: &mut R,
) -> Individual {
    let mut genes = vec![None; space.act_count()];
    let mut prev_end: Option<u32> = None;
    for &act in order {
        let block = space.block(act);
        if block.is_empty() {
            continue;
        }
        let from = prev_end.map_or(0, |end| block.partition_point(|s| s.start < end));
        let pos = if from < block.len() {
            rng.gen_range(from..block.len())
        } else {
            rng.gen_range(0..block.len())
        };
        prev_end = Some(block[pos].end());
        genes[act] = Some(pos);
    }
    Individual::new(genes)
}

pub fn init_population<R: Rng + ?Sized>(
    space: &SearchSpace,
    config: &GaConfig,
    order: &[usize],
    rng: &mut R,
) -> Vec<Individual> {
    (0..config.population)
        .map(|_| match config.variant {
            InitVariant::Unordered => random_individual(space, rng),
            InitVariant::Ordered => ordered_individual(space, order, rng),
        })
        .collect()
}

pub fn decode(
    individual: &Individual,
    space: &SearchSpace,
    request: &ScheduleRequest,
) -> Result<Schedule, SolveError> {
    if individual.act_count() != space.act_count() || space.act_count() != request.act_count() {
        return Err(SolveError::ShapeMismatch {
            genes: individual.act_count(),
            acts: space.act_count().max(request.act_count()),
        });
    }
    let mut assignments = Vec::with_capacity(individual.act_count());
    for (act, gene) in individual.genes.iter().enumerate() {
        let Some(pos) = *gene else { continue };
        let block = space.block(act);
        let slot = block.get(pos).ok_or(SolveError::GeneOutOfRange {
            act,
            position: pos,
            len: block.len(),
        })?;
        assignments.push(Assignment { act, slot: *slot });
    }
    Ok(Schedule::new(assignments))
}

/// Inverse of [`decode`] for schedules drawn from `space`.
pub fn encode(schedule: &Schedule, space: &SearchSpace) -> Option<Individual> {
    let mut genes = vec![None; space.act_count()];
    for a in &schedule.assignments {
        let pos = space
            .per_act
            .get(a.act)?
            .iter()
            .position(|s| s.id == a.slot.id)?;
        genes[a.act] = Some(pos);
    }
    Some(Individual::new(genes))
}

/// Index of the fittest of `k` individuals sampled with replacement; ties go
/// to the lowest population index.
pub fn tournament_select<R: Rng + ?Sized>(fitnesses: &[f64], k: usize, rng: &mut R) -> usize {
    assert!(!fitnesses.is_empty(), "tournament over an empty population");
    let mut best = rng.gen_range(0..fitnesses.len());
    for _ in 1..k {
        let i = rng.gen_range(0..fitnesses.len());
        if fitnesses[i] > fitnesses[best] || (fitnesses[i] == fitnesses[best] && i < best) {
            best = i;
        }
    }
    best
}

/// Single-point crossover at an act-block boundary drawn from `1..acts`.
pub fn crossover<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    rng: &mut R,
) -> (Individual, Individual) {
    let n = a.act_count();
    debug_assert_eq!(n, b.act_count());
    if n < 2 {
        return (a.clone(), b.clone());
    }
    let cut = rng.gen_range(1..n);
    crossover_at(a, b, cut)
}

pub fn crossover_at(a: &Individual, b: &Individual, cut: usize) -> (Individual, Individual) {
    let mut left = a.genes[..cut].to_vec();
    left.extend_from_slice(&b.genes[cut..]);
    let mut right = b.genes[..cut].to_vec();
    right.extend_from_slice(&a.genes[cut..]);
    (Individual::new(left), Individual::new(right))
}

/// With probability `rate`, redraws the gene of one uniformly chosen act.
/// Returns whether a mutation was applied.
pub fn mutate<R: Rng + ?Sized>(
    child: &mut Individual,
    space: &SearchSpace,
    rate: f64,
    rng: &mut R,
) -> bool {
    if child.genes.is_empty() || !rng.gen_bool(rate) {
        return false;
    }
    let act = rng.gen_range(0..child.genes.len());
    let block = space.block(act);
    if !block.is_empty() {
        child.genes[act] = Some(rng.gen_range(0..block.len()));
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_individual: Individual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOutcome {
    pub best: Schedule,
    pub best_individual: Individual,
    pub fitness: FitnessValue,
    pub penalties: PenaltyBreakdown,
    pub history: Vec<GenerationStats>,
}

struct Evaluator<'a> {
    space: &'a SearchSpace,
    request: &'a ScheduleRequest,
    rules: &'a [IncompatibilityRule],
}

impl Evaluator<'_> {
    fn penalties(&self, ind: &Individual) -> PenaltyBreakdown {
        let schedule = decode(ind, self.space, self.request).expect("operators keep genes valid");
        compute_penalties(&schedule, self.request, self.rules)
    }

    fn fitness(&self, ind: &Individual) -> f64 {
        fitness(&self.penalties(ind)).score()
    }
}

/// Runs the generational loop.
///
/// `history` holds one entry per evaluated generation (`config.generations`
/// entries; generation 0 is the initial population). With zero generations
/// the initial population is still evaluated and its best returned.
pub fn evolve(
    space: &SearchSpace,
    request: &ScheduleRequest,
    rules: &[IncompatibilityRule],
    config: &GaConfig,
) -> Result<EvolveOutcome, SolveError> {
    config.validate()?;
    if space.act_count() != request.act_count() {
        return Err(SolveError::ShapeMismatch {
            genes: space.act_count(),
            acts: request.act_count(),
        });
    }
    if space.is_unschedulable() {
        return Err(SolveError::Unschedulable);
    }

    let eval = Evaluator {
        space,
        request,
        rules,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let order = match config.variant {
        InitVariant::Ordered => optimal_act_order(&request.acts, rules).order,
        InitVariant::Unordered => (0..request.act_count()).collect(),
    };
    let mut population = init_population(space, config, &order, &mut rng);
    let mut history = Vec::with_capacity(config.generations);
    let mut best_ever: Option<(Individual, f64)> = None;

    for generation in 0..config.generations.max(1) {
        let fitnesses: Vec<f64> = population.iter().map(|ind| eval.fitness(ind)).collect();
        let best_idx = argmax(&fitnesses);
        let best_fitness = fitnesses[best_idx];
        if best_ever.as_ref().is_none_or(|(_, f)| best_fitness > *f) {
            best_ever = Some((population[best_idx].clone(), best_fitness));
        }
        if generation < config.generations {
            history.push(GenerationStats {
                generation,
                best_fitness,
                mean_fitness: fitnesses.iter().sum::<f64>() / fitnesses.len() as f64,
                best_individual: population[best_idx].clone(),
            });
        }
        if generation + 1 < config.generations {
            population =
                next_generation(&population, &fitnesses, best_idx, space, config, &mut rng);
        }
    }

    let (best_individual, _) = best_ever.expect("at least one generation evaluated");
    let best = decode(&best_individual, space, request)?;
    let penalties = compute_penalties(&best, request, rules);
    Ok(EvolveOutcome {
        best,
        best_individual,
        fitness: fitness(&penalties),
        penalties,
        history,
    })
}

fn next_generation<R: Rng + ?Sized>(
    population: &[Individual],
    fitnesses: &[f64],
    best_idx: usize,
    space: &SearchSpace,
    config: &GaConfig,
    rng: &mut R,
) -> Vec<Individual> {
    let n = population.len();
    let mut next = Vec::with_capacity(n);
    while next.len() < n - 1 {
        let a = &population[tournament_select(fitnesses, config.tournament_k, rng)];
        let b = &population[tournament_select(fitnesses, config.tournament_k, rng)];
        let (mut c1, mut c2) = crossover(a, b, rng);
        mutate(&mut c1, space, config.mutation_rate, rng);
        mutate(&mut c2, space, config.mutation_rate, rng);
        next.push(c1);
        if next.len() < n - 1 {
            next.push(c2);
        }
    }
    next.push(population[best_idx].clone());
    next
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
