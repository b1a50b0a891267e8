//! Non-elitist genetic algorithms on level-partitioned benchmarks, with
//! closed-form level-based runtime bounds and estimators for their conditions.

pub mod config;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod genotype;
pub mod levelbound;
pub mod operators;
pub mod problems;
pub mod rng;
pub mod search;

pub use config::{GaConfig, DEFAULT_MAX_EVALS};
pub use error::{Error, Result};
pub use estimator::{condition_report, ConditionOptions, ConditionReport, Estimate};
pub use experiment::{bound_vs_empirical_report, run_replicates, BoundComparison, ExperimentStats};
pub use genotype::{BitString, Genotype, Permutation, Representation};
pub use levelbound::{
    benchmark_level_probabilities, benchmark_sj, corollary1_bound, lemma1_selection_threshold,
    theorem1_bound, theorem_config, BoundReport, LevelProbabilities, Theorem, TheoremRequest,
    TheoremSetup,
};
pub use operators::{
    CrossoverKind, CrossoverSpec, MutationSpec, Ranking, SelectionKind, SelectionMechanism,
};
pub use problems::{CanonicalPartition, LevelPartition, ProblemKind, ProblemSpec};
pub use rng::{replicate_seed, RunStreams};
pub use search::{run_until_target, Population, RunResult};
