//! Selection, crossover and mutation operators.

pub mod crossover;
pub mod mutation;
pub mod selection;

pub use crossover::{
    crossover_two_offspring, gated_crossover, one_offspring_crossover, CrossoverKind, CrossoverSpec,
};
pub use mutation::{mutate_bitwise, mutate_exchange, MutationSpec};
pub use selection::{select_index, Ranking, SelectionKind, SelectionMechanism};
