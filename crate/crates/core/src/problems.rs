//! Benchmark fitness functions and their canonical level partitions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::SpecString;
use crate::error::{config_err, Error, Result};
use crate::genotype::{BitString, Genotype, Permutation, Representation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    OneMax,
    LeadingOnes,
    /// Sorting, measured by the number of correctly ordered index pairs.
    InvSorting,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::OneMax => "onemax",
            ProblemKind::LeadingOnes => "leadingones",
            ProblemKind::InvSorting => "inv",
        }
    }

    pub fn representation(self) -> Representation {
        match self {
            ProblemKind::OneMax | ProblemKind::LeadingOnes => Representation::Bits,
            ProblemKind::InvSorting => Representation::Perm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub n: usize,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(config_err("problem size n must be at least 1"));
        }
        Ok(ProblemSpec { kind, n })
    }

    pub fn onemax(n: usize) -> Self {
        ProblemSpec {
            kind: ProblemKind::OneMax,
            n,
        }
    }

    pub fn leading_ones(n: usize) -> Self {
        ProblemSpec {
            kind: ProblemKind::LeadingOnes,
            n,
        }
    }

    pub fn inv_sorting(n: usize) -> Self {
        ProblemSpec {
            kind: ProblemKind::InvSorting,
            n,
        }
    }

    pub fn representation(&self) -> Representation {
        self.kind.representation()
    }

    /// Number of non-top levels of the canonical partition.
    pub fn levels(&self) -> usize {
        match self.kind {
            ProblemKind::OneMax | ProblemKind::LeadingOnes => self.n,
            ProblemKind::InvSorting => self.n * (self.n - 1) / 2,
        }
    }

    /// Fitness of `x`, or an error if its representation or length does not match.
    pub fn evaluate(&self, x: &Genotype) -> Result<u64> {
        if x.representation() != self.representation() {
            return Err(Error::Representation(format!(
                "{} expects {} genotypes, got {}",
                self.kind.name(),
                self.representation(),
                x.representation()
            )));
        }
        if x.len() != self.n {
            return Err(Error::Representation(format!(
                "{} expects length {}, got {}",
                self.kind.name(),
                self.n,
                x.len()
            )));
        }
        Ok(self.fitness(x))
    }

    /// Fitness without the compatibility check. Panics on a representation mismatch.
    pub fn fitness(&self, x: &Genotype) -> u64 {
        match (self.kind, x) {
            (ProblemKind::OneMax, Genotype::Bits(b)) => b.count_ones() as u64,
            (ProblemKind::LeadingOnes, Genotype::Bits(b)) => b.leading_ones() as u64,
            (ProblemKind::InvSorting, Genotype::Perm(p)) => inv(p),
            _ => panic!("{} cannot evaluate {:?}", self.kind.name(), x),
        }
    }

    pub fn canonical_partition(&self) -> CanonicalPartition {
        CanonicalPartition { problem: *self }
    }

    pub fn optimum(&self) -> Genotype {
        match self.kind {
            ProblemKind::OneMax | ProblemKind::LeadingOnes => BitString::ones(self.n).into(),
            ProblemKind::InvSorting => Permutation::identity(self.n).into(),
        }
    }

    /// A fixed genotype in canonical level `level` (1-based).
    ///
    /// OneMax and LeadingOnes use `1^(level-1) 0^(n-level+1)`; sorting uses the
    /// permutation reached from the identity by greedily swapping the leftmost
    /// ascending adjacent pair until the target INV value is reached.
    pub fn representative(&self, level: usize) -> Result<Genotype> {
        let m = self.levels();
        if level == 0 || level > m + 1 {
            return Err(Error::InvalidInput(format!(
                "level {level} outside 1..={}",
                m + 1
            )));
        }
        Ok(match self.kind {
            ProblemKind::OneMax | ProblemKind::LeadingOnes => {
                BitString::prefix_ones(self.n, level - 1).into()
            }
            ProblemKind::InvSorting => {
                let mut p = Permutation::identity(self.n);
                for _ in 0..(m - (level - 1)) {
                    let s = p.as_slice();
                    let i = (0..self.n - 1)
                        .find(|&i| s[i] < s[i + 1])
                        .expect("an ascent exists while INV > 0");
                    p.swap(i, i + 1);
                }
                p.into()
            }
        })
    }
}

/// Number of index pairs `i < j` with `pi(i) < pi(j)`.
pub fn inv(p: &Permutation) -> u64 {
    let s = p.as_slice();
    let mut count = 0u64;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if s[i] < s[j] {
                count += 1;
            }
        }
    }
    count
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:n={}", self.kind.name(), self.n)
    }
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = SpecString::parse(s)?;
        let kind = match spec.name.as_str() {
            "onemax" => ProblemKind::OneMax,
            "leadingones" => ProblemKind::LeadingOnes,
            "inv" | "inv_sorting" => ProblemKind::InvSorting,
            other => {
                return Err(config_err(format!(
                    "unknown problem {other:?}; expected onemax:n=<int>, leadingones:n=<int> or inv:n=<int>"
                )))
            }
        };
        spec.allow_only(&["n"])?;
        let n = spec.required_usize("n")?;
        ProblemSpec::new(kind, n)
    }
}

/// An ordered partition `(A_1, .., A_{m+1})` of the search space.
pub trait LevelPartition: Sync {
    /// Number of non-top levels.
    fn m(&self) -> usize;

    /// Level of `x` in `1..=m+1`, given its cached fitness.
    fn level_of(&self, x: &Genotype, fitness: u64) -> usize;

    fn is_top(&self, x: &Genotype, fitness: u64) -> bool {
        self.level_of(x, fitness) == self.m() + 1
    }
}

/// Partition grouping genotypes of equal fitness; level = fitness + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalPartition {
    problem: ProblemSpec,
}

impl CanonicalPartition {
    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn level_of_genotype(&self, x: &Genotype) -> usize {
        self.level_of_fitness(self.problem.fitness(x))
    }

    pub fn level_of_fitness(&self, fitness: u64) -> usize {
        fitness as usize + 1
    }
}

impl LevelPartition for CanonicalPartition {
    fn m(&self) -> usize {
        self.problem.levels()
    }

    fn level_of(&self, _x: &Genotype, fitness: u64) -> usize {
        self.level_of_fitness(fitness)
    }
}
