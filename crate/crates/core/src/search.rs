//! The generational loop: every offspring is an independent sample from `D(P_t)`.
//!
//! `D(P)` is select, select, crossover (one offspring, p_c-gated), mutate.
//! Runtime is counted in fitness evaluations at generation granularity: the
//! initial population costs `lambda` and so does every later generation.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::GaConfig;
use crate::error::{config_err, Result};
use crate::genotype::Genotype;
use crate::operators::crossover::gated_unchecked;
use crate::operators::selection::{select_index, Ranking};
use crate::problems::{LevelPartition, ProblemSpec};
use crate::rng::RunStreams;

/// Populations at least this large produce offspring on the rayon pool.
pub const PARALLEL_THRESHOLD: usize = 4096;

/// `lambda` genotypes with their fitness, evaluated once on creation.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<Genotype>,
    fitness: Vec<u64>,
}

impl Population {
    /// Evaluates `members` on `problem`.
    pub fn evaluate(members: Vec<Genotype>, problem: &ProblemSpec) -> Result<Self> {
        let fitness = members
            .iter()
            .map(|x| problem.evaluate(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Population { members, fitness })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Genotype] {
        &self.members
    }

    pub fn fitness(&self) -> &[u64] {
        &self.fitness
    }

    pub fn member(&self, i: usize) -> (&Genotype, u64) {
        (&self.members[i], self.fitness[i])
    }

    /// Ranking with ties ordered by a shuffle drawn from `rng`.
    pub fn rank<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        Ranking::new(&self.fitness, rng)
    }

    pub fn best_level<P: LevelPartition + ?Sized>(&self, partition: &P) -> usize {
        self.members
            .iter()
            .zip(&self.fitness)
            .map(|(x, &f)| partition.level_of(x, f))
            .max()
            .unwrap_or(0)
    }

    pub fn contains_top<P: LevelPartition + ?Sized>(&self, partition: &P) -> bool {
        self.members
            .iter()
            .zip(&self.fitness)
            .any(|(x, &f)| partition.is_top(x, f))
    }
}

fn check_sizes(problem: &ProblemSpec, lambda: usize) -> Result<()> {
    if lambda == 0 {
        return Err(config_err("lambda must be at least 1"));
    }
    if problem.n == 0 {
        return Err(config_err("problem size n must be at least 1"));
    }
    Ok(())
}

/// `lambda` independent uniform samples from the problem's search space.
pub fn init_population<R: Rng + ?Sized>(
    problem: &ProblemSpec,
    lambda: usize,
    rng: &mut R,
) -> Result<Population> {
    check_sizes(problem, lambda)?;
    let members = (0..lambda)
        .map(|_| Genotype::random(problem.representation(), problem.n, rng))
        .collect();
    Population::evaluate(members, problem)
}

/// Initial population of a run; member `i` comes from stream `(0, i)`.
pub fn init_population_streams(
    problem: &ProblemSpec,
    lambda: usize,
    streams: &RunStreams,
) -> Result<Population> {
    check_sizes(problem, lambda)?;
    let sample = |i: usize| {
        let mut rng = streams.offspring(0, lambda, i);
        let x = Genotype::random(problem.representation(), problem.n, &mut rng);
        let f = problem.fitness(&x);
        (x, f)
    };
    let (members, fitness) = if lambda >= PARALLEL_THRESHOLD {
        (0..lambda).into_par_iter().map(sample).unzip()
    } else {
        (0..lambda).map(sample).unzip()
    };
    Ok(Population { members, fitness })
}

/// One draw from `D(P)`: two selections, gated one-offspring crossover, mutation.
#[inline]
pub fn sample_offspring<R: Rng + ?Sized>(
    parents: &Population,
    ranking: &Ranking,
    config: &GaConfig,
    rng: &mut R,
) -> Genotype {
    let u = &parents.members[select_index(&config.selection, ranking, rng)];
    let v = &parents.members[select_index(&config.selection, ranking, rng)];
    let mut x = gated_unchecked(u, v, &config.crossover, rng);
    config
        .mutation
        .apply(&mut x, rng)
        .expect("mutation matches the validated representation");
    x
}

/// Next population: `lambda` independent samples from `D(parents)`.
///
/// Offspring `i` of generation `generation` uses its own substream, so the
/// result is the same whether offspring are produced serially or in parallel.
pub fn evolve_generation_streams(
    parents: &Population,
    config: &GaConfig,
    streams: &RunStreams,
    generation: u64,
) -> Population {
    let lambda = config.lambda;
    let ranking = parents.rank(&mut streams.generation(generation));
    let sample = |i: usize| {
        let mut rng = streams.offspring(generation, lambda, i);
        let x = sample_offspring(parents, &ranking, config, &mut rng);
        let f = config.problem.fitness(&x);
        (x, f)
    };
    let (members, fitness) = if lambda >= PARALLEL_THRESHOLD {
        (0..lambda).into_par_iter().map(sample).unzip()
    } else {
        (0..lambda).map(sample).unzip()
    };
    Population { members, fitness }
}

/// Serial reference path of [`evolve_generation_streams`].
pub fn evolve_generation_serial(
    parents: &Population,
    config: &GaConfig,
    streams: &RunStreams,
    generation: u64,
) -> Population {
    let lambda = config.lambda;
    let ranking = parents.rank(&mut streams.generation(generation));
    let (members, fitness) = (0..lambda)
        .map(|i| {
            let mut rng = streams.offspring(generation, lambda, i);
            let x = sample_offspring(parents, &ranking, config, &mut rng);
            let f = config.problem.fitness(&x);
            (x, f)
        })
        .unzip();
    Population { members, fitness }
}

/// Next population using substreams keyed by a seed drawn from `rng`.
pub fn evolve_generation<R: Rng + ?Sized>(
    parents: &Population,
    config: &GaConfig,
    rng: &mut R,
) -> Population {
    let streams = RunStreams::new(rng.gen());
    evolve_generation_streams(parents, config, &streams, 1)
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub evaluations: u64,
    pub success: bool,
    /// Populations evaluated, the initial one included.
    pub generations: u64,
    pub best_level_trace: Vec<usize>,
}

impl RunResult {
    pub fn best_level_final(&self) -> usize {
        self.best_level_trace.last().copied().unwrap_or(0)
    }
}

/// Runs until some member reaches the top level or the next generation
/// would exceed `max_evals`.
pub fn run_until_target<P: LevelPartition + ?Sized>(
    config: &GaConfig,
    partition: &P,
    max_evals: u64,
    seed: u64,
) -> Result<RunResult> {
    config.validate()?;
    let lambda = config.lambda as u64;
    if max_evals < lambda {
        return Err(config_err(format!(
            "max_evals ({max_evals}) must be at least lambda ({lambda})"
        )));
    }
    let streams = RunStreams::new(seed);
    let mut population = init_population_streams(&config.problem, config.lambda, &streams)?;
    let mut generations = 1u64;
    let mut trace = vec![population.best_level(partition)];
    loop {
        let evaluations = generations * lambda;
        if population.contains_top(partition) {
            return Ok(RunResult {
                seed,
                evaluations,
                success: true,
                generations,
                best_level_trace: trace,
            });
        }
        if evaluations + lambda > max_evals {
            return Ok(RunResult {
                seed,
                evaluations,
                success: false,
                generations,
                best_level_trace: trace,
            });
        }
        population = evolve_generation_streams(&population, config, &streams, generations);
        generations += 1;
        trace.push(population.best_level(partition));
    }
}
