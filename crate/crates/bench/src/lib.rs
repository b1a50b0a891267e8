//! Benchmark fixtures.

use levelga::search::init_population;
use levelga::{
    CrossoverKind, CrossoverSpec, GaConfig, MutationSpec, Population, ProblemSpec,
    SelectionMechanism,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tournament GA on `problem` with the operators its representation needs.
pub fn config(problem: ProblemSpec, lambda: usize) -> GaConfig {
    let (crossover, mutation) = match problem.kind {
        levelga::ProblemKind::InvSorting => (
            CrossoverSpec::new(CrossoverKind::OnePoint, 0.5).expect("valid"),
            MutationSpec::Exchange,
        ),
        _ => (
            CrossoverSpec::new(CrossoverKind::Uniform, 1.0).expect("valid"),
            MutationSpec::Bitwise { chi: 1.0 },
        ),
    };
    GaConfig {
        problem,
        lambda,
        selection: SelectionMechanism::Tournament { k: 24 },
        crossover,
        mutation,
        seed: 1,
        max_evals: u64::MAX,
        replicates: 1,
    }
}

/// Uniformly random initial population.
pub fn population(config: &GaConfig, seed: u64) -> Population {
    init_population(&config.problem, config.lambda, &mut rng(seed)).expect("valid sizes")
}
