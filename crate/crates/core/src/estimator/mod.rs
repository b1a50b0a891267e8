//! Monte Carlo and exhaustive estimators for the quantities the runtime bounds
//! assume: selective pressure, per-level upgrade probabilities, mutation and
//! crossover constants, and the crossover lemma for LeadingOnes/OneMax.

pub mod conditions;
pub mod exact;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::GaConfig;
use crate::error::{input_err, Error, Result};
use crate::genotype::{BitString, Genotype};
use crate::operators::crossover::{enumerate_two_offspring, one_offspring_crossover};
use crate::operators::selection::rank_threshold;
use crate::operators::{CrossoverKind, Ranking, SelectionMechanism};
use crate::problems::{LevelPartition, ProblemSpec};
use crate::rng::{substream, StreamRng};
use crate::search::{sample_offspring, Population};

pub use conditions::{
    condition_report, mutation_reach, selection_gamma0, ConditionOptions, ConditionReport,
    ConditionRow,
};

/// Trials per independently seeded block.
const BLOCK: u64 = 1 << 14;

/// Largest population handled by [`exact_beta_small`].
pub const MAX_EXACT_BETA_LAMBDA: usize = 8;
/// Largest tournament outcome space `lambda^k` enumerated by [`exact_beta_small`].
pub const MAX_TOURNAMENT_DRAWS: u128 = 10_000_000;
/// Largest bitstring length for which the crossover lemma is checked exhaustively.
pub const MAX_LEMMA_ENUMERATION_BITS: usize = 10;

/// A frequency with a 3-sigma normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub trials: u64,
    pub ci_halfwidth: f64,
}

impl Estimate {
    pub fn from_hits(hits: u64, trials: u64) -> Self {
        let value = hits as f64 / trials as f64;
        Estimate {
            value,
            trials,
            ci_halfwidth: 3.0 * (value * (1.0 - value) / trials as f64).sqrt(),
        }
    }

    pub fn lower(&self) -> f64 {
        self.value - self.ci_halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.value + self.ci_halfwidth
    }

    /// Whether `x` lies within the half-width of the estimate.
    pub fn covers(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.ci_halfwidth + 1e-12
    }
}

/// Counts how often `trial` returns true over `trials` draws.
///
/// Trials are split into fixed blocks, each with its own substream of `seed`,
/// so the result does not depend on how blocks are scheduled.
pub fn monte_carlo<F>(trials: u64, seed: u64, trial: F) -> Result<Estimate>
where
    F: Fn(&mut StreamRng) -> bool + Sync,
{
    if trials == 0 {
        return Err(input_err("at least one trial is required"));
    }
    let blocks = trials.div_ceil(BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b);
            let len = BLOCK.min(trials - b * BLOCK);
            (0..len).filter(|_| trial(&mut rng)).count() as u64
        })
        .sum();
    Ok(Estimate::from_hits(hits, trials))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(input_err(format!("gamma must lie in (0,1], got {gamma}")))
    }
}

/// Number of members at least as fit as the member ranked `ceil(gamma lambda)`.
fn good_count(fitness: &[u64], gamma: f64) -> (Ranking, usize) {
    let ranking = Ranking::deterministic(fitness);
    let rank = rank_threshold(gamma, fitness.len());
    let good = ranking.at_least_as_good(rank);
    (ranking, good)
}

/// Monte Carlo selective pressure: how often one selection returns a member at
/// least as fit as the one ranked `ceil(gamma lambda)`.
pub fn estimate_beta(
    mech: &SelectionMechanism,
    fitness: &[u64],
    gamma: f64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    check_gamma(gamma)?;
    if fitness.is_empty() {
        return Err(input_err("population is empty"));
    }
    let lambda = fitness.len();
    mech.validate(lambda)?;
    let (_, good) = good_count(fitness, gamma);
    monte_carlo(trials, seed, |rng| mech.select_rank(lambda, rng) < good)
}

/// Exact selective pressure for `lambda <= 8` by enumerating the outcome space:
/// every ordered tournament draw, the uniform top-`mu` choice, or the rank
/// intervals of the exponential ranking density.
pub fn exact_beta_small(mech: &SelectionMechanism, fitness: &[u64], gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let lambda = fitness.len();
    if lambda == 0 {
        return Err(input_err("population is empty"));
    }
    if lambda > MAX_EXACT_BETA_LAMBDA {
        return Err(Error::TooLarge {
            what: "population for exact selective pressure",
            size: lambda as u128,
            limit: MAX_EXACT_BETA_LAMBDA as u128,
        });
    }
    mech.validate(lambda)?;
    let (_, good) = good_count(fitness, gamma);
    Ok(match *mech {
        SelectionMechanism::Tournament { k } => {
            let draws = (lambda as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
            if draws > MAX_TOURNAMENT_DRAWS {
                return Err(Error::TooLarge {
                    what: "tournament draws",
                    size: draws,
                    limit: MAX_TOURNAMENT_DRAWS,
                });
            }
            let mut hits = 0u64;
            let mut digits = vec![0usize; k];
            for _ in 0..draws {
                if digits.iter().min().is_some_and(|&best| best < good) {
                    hits += 1;
                }
                for d in digits.iter_mut() {
                    *d += 1;
                    if *d < lambda {
                        break;
                    }
                    *d = 0;
                }
            }
            hits as f64 / draws as f64
        }
        SelectionMechanism::MuLambda { mu } => good.min(mu) as f64 / mu as f64,
        SelectionMechanism::ExpRanking { .. } => {
            mech.rank_probabilities(lambda)[..good].iter().sum()
        }
    })
}

/// Full-pipeline and mutation-only upgrade frequencies at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpgradeEstimates {
    /// Offspring reach `A_j^+` from the population with `ceil(gamma0 lambda)` members at level `j`.
    pub z_j: Estimate,
    /// The same with `ceil(gamma lambda)` of those members moved up to level `j+1`.
    pub z0: Estimate,
    /// Mutation alone lifts the level-`j` representative into `A_j^+`.
    pub mutation_up: Estimate,
    /// Mutation alone keeps the level-`j+1` representative in `A_j^+`.
    pub mutation_stay: Estimate,
}

/// Population of `lambda` copies of representatives: `counts[i]` members at
/// `levels[i]`, and the rest at level 1.
pub fn conditioning_population(
    problem: &ProblemSpec,
    lambda: usize,
    groups: &[(usize, usize)],
) -> Result<Population> {
    let placed: usize = groups.iter().map(|g| g.1).sum();
    if placed > lambda {
        return Err(input_err(format!(
            "{placed} conditioned members exceed lambda = {lambda}"
        )));
    }
    let mut members = Vec::with_capacity(lambda);
    for &(level, count) in groups {
        let x = problem.representative(level)?;
        members.extend(std::iter::repeat_n(x, count));
    }
    let base = problem.representative(1)?;
    members.resize(lambda, base);
    Population::evaluate(members, problem)
}

/// Members of `ceil(x lambda)`, at least one.
fn conditioned_count(x: f64, lambda: usize) -> usize {
    rank_threshold(x, lambda)
}

/// Estimates the population-level upgrade probabilities `z_j` and `z0` at
/// level `j` on representative populations, plus the raw mutation frequencies
/// behind the C1 and C2 rows.
///
/// The `z_j` population holds `ceil(gamma0 lambda)` copies of the level-`j`
/// representative and level-1 representatives elsewhere; the `z0` population
/// moves `ceil(gamma lambda)` of those copies up to the level-`j+1` representative.
#[allow(clippy::too_many_arguments)]
pub fn estimate_upgrade_probabilities<P: LevelPartition + ?Sized>(
    config: &GaConfig,
    partition: &P,
    j: usize,
    gamma0: f64,
    gamma: f64,
    trials: u64,
    seed: u64,
) -> Result<UpgradeEstimates> {
    config.validate()?;
    let m = partition.m();
    if j == 0 || j > m {
        return Err(input_err(format!("level {j} outside 1..={m}")));
    }
    if !(gamma0 > 0.0 && gamma0 < 1.0) || !(gamma > 0.0 && gamma <= gamma0) {
        return Err(input_err(format!(
            "need 0 < gamma <= gamma0 < 1, got gamma = {gamma}, gamma0 = {gamma0}"
        )));
    }
    let problem = &config.problem;
    let lambda = config.lambda;
    let upper = conditioned_count(gamma0, lambda);
    let top = conditioned_count(gamma, lambda).min(upper);
    let g1 = conditioning_population(problem, lambda, &[(j, upper)])?;
    let g2 = conditioning_population(problem, lambda, &[(j + 1, top), (j, upper - top)])?;

    let reaches = |y: &Genotype| partition.level_of(y, problem.fitness(y)) > j;
    let full = |pop: &Population, stream: u64| {
        let ranking = Ranking::deterministic(pop.fitness());
        monte_carlo(trials, seed ^ stream, |rng| {
            reaches(&sample_offspring(pop, &ranking, config, rng))
        })
    };
    let mutation_only = |level: usize, stream: u64| -> Result<Estimate> {
        let x = problem.representative(level)?;
        monte_carlo(trials, seed ^ stream, |rng| {
            let mut y = x.clone();
            config
                .mutation
                .apply(&mut y, rng)
                .expect("validated representation");
            reaches(&y)
        })
    };
    Ok(UpgradeEstimates {
        z_j: full(&g1, 0x1)?,
        z0: full(&g2, 0x2)?,
        mutation_up: mutation_only(j, 0x3)?,
        mutation_stay: mutation_only(j + 1, 0x4)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaCase {
    /// Equal leading ones are kept with probability one.
    I,
    /// Unequal leading ones: the offspring beats the smaller with probability at least 1/2.
    Ii,
    /// The offspring reaches the rounded-up mean OneMax value with probability at least 1/2.
    Iii,
}

impl std::str::FromStr for LemmaCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(LemmaCase::I),
            "ii" | "2" => Ok(LemmaCase::Ii),
            "iii" | "3" => Ok(LemmaCase::Iii),
            other => Err(crate::error::config_err(format!(
                "unknown lemma case {other:?}; expected i, ii or iii"
            ))),
        }
    }
}

/// Outcome of [`check_crossover_lemma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub case: LemmaCase,
    /// Required probability: 1 for case i, 1/2 otherwise.
    pub required: f64,
    /// Exact probability when the outcome space was enumerated.
    pub exact: Option<f64>,
    pub estimate: Option<Estimate>,
    pub holds: bool,
}

/// Checks one case of the crossover lemma for parents `u`, `v` under the
/// one-offspring crossover of `kind`. Enumerates every cut or mask for
/// `n <= 10`, otherwise samples `trials` offspring.
pub fn check_crossover_lemma(
    kind: CrossoverKind,
    u: &BitString,
    v: &BitString,
    case: LemmaCase,
    trials: u64,
    seed: u64,
) -> Result<LemmaCheck> {
    if u.len() != v.len() {
        return Err(input_err(format!(
            "parents differ in length ({} vs {})",
            u.len(),
            v.len()
        )));
    }
    let (lu, lv) = (u.leading_ones(), v.leading_ones());
    let accept: Box<dyn Fn(&BitString) -> bool + Sync> = match case {
        LemmaCase::I => {
            if lu != lv {
                return Err(input_err(format!(
                    "case i needs equal leading ones, got {lu} and {lv}"
                )));
            }
            Box::new(move |x: &BitString| x.leading_ones() >= lu)
        }
        LemmaCase::Ii => {
            if lu == lv {
                return Err(input_err(format!(
                    "case ii needs different leading ones, got {lu} twice"
                )));
            }
            let low = lu.min(lv);
            Box::new(move |x: &BitString| x.leading_ones() > low)
        }
        LemmaCase::Iii => {
            let target = (u.count_ones() + v.count_ones()).div_ceil(2);
            Box::new(move |x: &BitString| x.count_ones() >= target)
        }
    };
    let required = if case == LemmaCase::I { 1.0 } else { 0.5 };
    let (gu, gv): (Genotype, Genotype) = (u.clone().into(), v.clone().into());
    if u.len() <= MAX_LEMMA_ENUMERATION_BITS {
        let outcomes = enumerate_two_offspring(kind, &gu, &gv)?;
        let hits: usize = outcomes
            .iter()
            .map(|(a, b)| {
                accept(a.as_bits().expect("bits")) as usize
                    + accept(b.as_bits().expect("bits")) as usize
            })
            .sum();
        let total = 2 * outcomes.len();
        let p = hits as f64 / total as f64;
        let holds = if case == LemmaCase::I {
            hits == total
        } else {
            2 * hits >= total
        };
        return Ok(LemmaCheck {
            case,
            required,
            exact: Some(p),
            estimate: None,
            holds,
        });
    }
    let est = monte_carlo(trials, seed, |rng| {
        let x = one_offspring_crossover(kind, &gu, &gv, rng).expect("parents checked");
        accept(x.as_bits().expect("bits"))
    })?;
    let holds = if case == LemmaCase::I {
        est.value == 1.0
    } else {
        est.upper() >= required
    };
    Ok(LemmaCheck {
        case,
        required,
        exact: None,
        estimate: Some(est),
        holds,
    })
}
