//! Canonical binary GA: uniform random initial bitstrings decoded onto a box,
//! k-way tournament selection, two-point crossover, bit-flip mutation and
//! elitist generational replacement, terminated by an evaluation budget.
//!
//! # Reproducibility
//!
//! Each run owns one `ChaCha8Rng` (rand_chacha 0.3) seeded with
//! `seed_from_u64(config.seed)`. Draws happen in this order:
//!
//! 1. initial population, chromosome by chromosome, one `bool` per bit;
//! 2. per generation, per offspring pair: tournament for parent A (k index
//!    draws), tournament for parent B, the crossover draws, then mutation of
//!    child A and child B (one Bernoulli per bit each).
//!
//! Offspring are produced in pairs and truncated to `population_size -
//! elite_count`. Within a generation identical bitstrings are evaluated once.
//! A generation is only run when all of its distinct evaluations fit in the
//! remaining budget.

mod operators;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use operators::{bitflip_mutate, crossover_at, decode, replace, tournament_select, two_point_crossover};

use crate::benchmarks::{budgeted_evaluate_with, EvaluationBudget, FunctionId, Objective};
use crate::geometry::SearchBox;
use crate::scalar::{cmp_fitness, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
    #[error("bit length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("chromosome of length {0} is too short for two-point crossover")]
    ChromosomeTooShort(usize),
    #[error("invalid cut points ({i}, {j}) for length {len}")]
    BadCut { i: usize, j: usize, len: usize },
    #[error("population is empty")]
    EmptyPopulation,
    #[error("chromosome {0} has no fitness")]
    MissingFitness(usize),
    #[error("need {needed} offspring, got {got}")]
    InsufficientOffspring { needed: usize, got: usize },
    #[error("budget already used ({0} evaluations)")]
    BudgetNotFresh(usize),
    #[error("population of {population} does not fit a budget of {cap}")]
    PopulationExceedsBudget { population: usize, cap: usize },
}

/// GA hyperparameters. `mutation_prob = None` means `1 / L` with `L` the total chromosome length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub bits_per_dim: u32,
    pub crossover_prob: f64,
    pub mutation_prob: Option<f64>,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            bits_per_dim: 16,
            crossover_prob: 0.9,
            mutation_prob: None,
            tournament_size: 2,
            elite_count: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn chromosome_len(&self, dim: usize) -> usize {
        dim * self.bits_per_dim as usize
    }

    pub fn mutation_rate(&self, dim: usize) -> f64 {
        self.mutation_prob.unwrap_or_else(|| 1.0 / self.chromosome_len(dim).max(1) as f64)
    }

    pub fn validate(&self) -> Result<(), GaError> {
        let bad = |m: String| Err(GaError::InvalidConfig(m));
        if self.population_size == 0 || !self.population_size.is_multiple_of(2) {
            return bad(format!("population_size must be positive and even, got {}", self.population_size));
        }
        if !(1..=32).contains(&self.bits_per_dim) {
            return bad(format!("bits_per_dim must be in 1..=32, got {}", self.bits_per_dim));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad(format!("crossover_prob must be in [0, 1], got {}", self.crossover_prob));
        }
        if let Some(p) = self.mutation_prob {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("mutation_prob must be in [0, 1], got {p}"));
            }
        }
        if self.tournament_size < 2 {
            return bad(format!("tournament_size must be at least 2, got {}", self.tournament_size));
        }
        if self.elite_count >= self.population_size {
            return bad(format!(
                "elite_count {} must be below population_size {}",
                self.elite_count, self.population_size
            ));
        }
        Ok(())
    }
}

/// A bitstring and its cached fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome<T> {
    pub bits: Vec<bool>,
    pub fitness: Option<T>,
}

impl<T> Chromosome<T> {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits, fitness: None }
    }
}

/// Outcome of one GA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult<T> {
    pub best_value: T,
    pub best_point: Vec<T>,
    pub evaluations_used: usize,
    /// Best fitness in the population after the initial generation and after each
    /// completed generation.
    pub generation_best_history: Vec<T>,
    pub seed: u64,
}

/// Runs the GA on a benchmark function.
pub fn run_ga<T: Scalar>(
    fid: FunctionId,
    bx: &SearchBox<T>,
    config: &GaConfig,
    budget: &mut EvaluationBudget,
) -> Result<RunResult<T>, GaError> {
    run_ga_with(&fid, bx, config, budget)
}

/// Runs the GA on any objective. Exhausting the budget ends the run normally.
pub fn run_ga_with<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    bx: &SearchBox<T>,
    config: &GaConfig,
    budget: &mut EvaluationBudget,
) -> Result<RunResult<T>, GaError> {
    config.validate()?;
    if budget.used() != 0 {
        return Err(GaError::BudgetNotFresh(budget.used()));
    }
    if config.population_size > budget.cap() {
        return Err(GaError::PopulationExceedsBudget {
            population: config.population_size,
            cap: budget.cap(),
        });
    }

    let dim = bx.dim();
    let len = config.chromosome_len(dim);
    let p_m = config.mutation_rate(dim);
    let n_offspring = config.population_size - config.elite_count;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut population: Vec<Chromosome<T>> = (0..config.population_size)
        .map(|_| Chromosome::new((0..len).map(|_| rng.gen::<bool>()).collect()))
        .collect();
    evaluate_generation(objective, bx, config.bits_per_dim, &mut population, budget)?;

    let mut best = best_index(&population);
    let mut best_chrom = population[best].clone();
    let mut history = vec![fitness(&best_chrom)];

    loop {
        let mut offspring = Vec::with_capacity(n_offspring + 1);
        while offspring.len() < n_offspring {
            let a = tournament_select(&population, config.tournament_size, &mut rng)?;
            let b = tournament_select(&population, config.tournament_size, &mut rng)?;
            let (c1, c2) =
                two_point_crossover(&population[a], &population[b], config.crossover_prob, &mut rng)?;
            offspring.push(bitflip_mutate(&c1, p_m, &mut rng));
            offspring.push(bitflip_mutate(&c2, p_m, &mut rng));
        }
        offspring.truncate(n_offspring);

        if distinct_unevaluated(&offspring) > budget.remaining() {
            break;
        }
        evaluate_generation(objective, bx, config.bits_per_dim, &mut offspring, budget)?;
        population = replace(&population, &offspring, config.elite_count)?;

        best = best_index(&population);
        history.push(fitness(&population[best]));
        if cmp_fitness(fitness(&population[best]), fitness(&best_chrom)).is_lt() {
            best_chrom = population[best].clone();
        }
    }

    Ok(RunResult {
        best_value: fitness(&best_chrom),
        best_point: decode(&best_chrom.bits, bx, config.bits_per_dim)?,
        evaluations_used: budget.used(),
        generation_best_history: history,
        seed: config.seed,
    })
}

fn fitness<T: Scalar>(c: &Chromosome<T>) -> T {
    c.fitness.expect("evaluated")
}

/// Lowest index among the minimal fitnesses.
fn best_index<T: Scalar>(population: &[Chromosome<T>]) -> usize {
    (1..population.len()).fold(0, |best, i| {
        if cmp_fitness(fitness(&population[i]), fitness(&population[best])).is_lt() {
            i
        } else {
            best
        }
    })
}

fn distinct_unevaluated<T>(generation: &[Chromosome<T>]) -> usize {
    let mut seen = std::collections::HashSet::new();
    generation
        .iter()
        .filter(|c| c.fitness.is_none())
        .filter(|c| seen.insert(c.bits.as_slice()))
        .count()
}

fn evaluate_generation<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    bx: &SearchBox<T>,
    bits_per_dim: u32,
    generation: &mut [Chromosome<T>],
    budget: &mut EvaluationBudget,
) -> Result<(), GaError> {
    let mut cache: HashMap<Vec<bool>, T> = HashMap::new();
    for c in generation.iter_mut().filter(|c| c.fitness.is_none()) {
        if let Some(&f) = cache.get(&c.bits) {
            c.fitness = Some(f);
            continue;
        }
        let x = decode(&c.bits, bx, bits_per_dim)?;
        let f = budgeted_evaluate_with(budget, objective, &x)
            .expect("generation size checked against remaining budget");
        cache.insert(c.bits.clone(), f);
        c.fitness = Some(f);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_budget;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting {
        inner: FunctionId,
        calls: AtomicUsize,
    }

    impl Objective<f64> for Counting {
        fn evaluate(&self, x: &[f64]) -> f64 {
            self.calls.fetch_add(1, Ordering::Relaxed);
            Objective::<f64>::evaluate(&self.inner, x)
        }
    }

    fn cube30() -> SearchBox<f64> {
        SearchBox::cube(-100.0, 100.0, 30).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let bad = [
            GaConfig { population_size: 49, ..Default::default() },
            GaConfig { population_size: 0, ..Default::default() },
            GaConfig { elite_count: 50, ..Default::default() },
            GaConfig { crossover_prob: 1.5, ..Default::default() },
            GaConfig { mutation_prob: Some(-0.1), ..Default::default() },
            GaConfig { tournament_size: 1, ..Default::default() },
            GaConfig { bits_per_dim: 0, ..Default::default() },
            GaConfig { bits_per_dim: 33, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(GaError::InvalidConfig(_))), "{c:?}");
        }
        assert_eq!(GaConfig::default().mutation_rate(30), 1.0 / 480.0);
    }

    #[test]
    fn protocol_run_respects_budget() {
        let obj = Counting { inner: FunctionId::F12, calls: AtomicUsize::new(0) };
        let mut budget = make_budget(30);
        let r = run_ga_with(&obj, &cube30(), &GaConfig::default().with_seed(7), &mut budget).unwrap();
        assert!(r.evaluations_used <= 1500);
        assert_eq!(r.evaluations_used, obj.calls.load(Ordering::Relaxed));
        assert_eq!(r.evaluations_used, budget.used());
        assert!(r.generation_best_history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.best_value, *r.generation_best_history.last().unwrap());
        // 50 initial + 29 generations of 49 fills the budget to within one generation
        assert!(r.evaluations_used > 1500 - 49);
        assert_eq!(FunctionId::F12.evaluate(&r.best_point), r.best_value);
    }

    #[test]
    fn same_seed_same_result() {
        let cfg = GaConfig::default().with_seed(99);
        let a = run_ga(FunctionId::F14, &cube30(), &cfg, &mut make_budget(30)).unwrap();
        let b = run_ga(FunctionId::F14, &cube30(), &cfg, &mut make_budget(30)).unwrap();
        assert_eq!(a, b);
        let c = run_ga(FunctionId::F14, &cube30(), &cfg.with_seed(100), &mut make_budget(30)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn frozen_operators_keep_initial_best() {
        let cfg = GaConfig { crossover_prob: 0.0, mutation_prob: Some(0.0), seed: 3, ..Default::default() };
        let r = run_ga(FunctionId::F1, &cube30(), &cfg, &mut make_budget(30)).unwrap();
        let first = r.generation_best_history[0];
        assert!(r.generation_best_history.iter().all(|&v| v == first));
        assert!(r.generation_best_history.len() > 1);
    }

    #[test]
    fn rejects_used_budget_and_tiny_cap() {
        let mut b = make_budget(30);
        b.charge().unwrap();
        assert!(matches!(
            run_ga(FunctionId::F1, &cube30(), &GaConfig::default(), &mut b),
            Err(GaError::BudgetNotFresh(1))
        ));
        let mut small = EvaluationBudget::with_cap(10);
        assert!(matches!(
            run_ga(FunctionId::F1, &cube30(), &GaConfig::default(), &mut small),
            Err(GaError::PopulationExceedsBudget { population: 50, cap: 10 })
        ));
    }

    #[test]
    fn budget_equal_to_population_runs_one_generation() {
        let mut b = EvaluationBudget::with_cap(50);
        let r = run_ga(FunctionId::F12, &cube30(), &GaConfig::default(), &mut b).unwrap();
        assert_eq!(r.evaluations_used, 50);
        assert_eq!(r.generation_best_history.len(), 1);
    }

    #[test]
    fn generic_over_f32() {
        let bx = SearchBox::<f32>::cube(-5.0, 5.0, 4).unwrap();
        let r = run_ga(FunctionId::F12, &bx, &GaConfig::default(), &mut make_budget(4)).unwrap();
        assert!(r.best_value.is_finite());
        assert!(bx.contains(&r.best_point));
    }
}
