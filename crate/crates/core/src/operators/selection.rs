//! Rank-based parent selection: k-tournament, (mu,lambda) and exponential ranking.
//!
//! All three mechanisms act on a [`Ranking`] of the population. Members are
//! ordered by fitness, best first, and ties are ordered by a uniform shuffle
//! drawn once per generation, so tied members are exchangeable.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::SpecString;
use crate::error::{config_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionMechanism {
    /// Best of `k` members drawn uniformly with replacement.
    Tournament { k: usize },
    /// Uniform among the `mu` best-ranked members.
    MuLambda { mu: usize },
    /// Rank drawn from the density `eta e^(eta (1-x)) / (e^eta - 1)` on `[0,1]`.
    ExpRanking { eta: f64 },
}

/// Which mechanism, without its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionKind {
    Tournament,
    MuLambda,
    ExpRanking,
}

impl SelectionKind {
    pub fn name(self) -> &'static str {
        match self {
            SelectionKind::Tournament => "tournament",
            SelectionKind::MuLambda => "mu_lambda",
            SelectionKind::ExpRanking => "exp_ranking",
        }
    }
}

impl FromStr for SelectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tournament" => Ok(SelectionKind::Tournament),
            "mu_lambda" | "mulambda" => Ok(SelectionKind::MuLambda),
            "exp_ranking" | "ranking" => Ok(SelectionKind::ExpRanking),
            other => Err(config_err(format!(
                "unknown selection {other:?}; expected tournament, mu_lambda or exp_ranking"
            ))),
        }
    }
}

impl fmt::Display for SelectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl SelectionMechanism {
    pub fn kind(&self) -> SelectionKind {
        match self {
            SelectionMechanism::Tournament { .. } => SelectionKind::Tournament,
            SelectionMechanism::MuLambda { .. } => SelectionKind::MuLambda,
            SelectionMechanism::ExpRanking { .. } => SelectionKind::ExpRanking,
        }
    }

    pub fn validate(&self, lambda: usize) -> Result<()> {
        match *self {
            SelectionMechanism::Tournament { k: 0 } => {
                Err(config_err("tournament size k must be at least 1"))
            }
            SelectionMechanism::MuLambda { mu } if mu == 0 || mu > lambda => Err(config_err(
                format!("mu must satisfy 1 <= mu <= lambda ({lambda}), got {mu}"),
            )),
            SelectionMechanism::ExpRanking { eta } if !(eta > 0.0 && eta.is_finite()) => Err(
                config_err(format!("ranking parameter eta must be > 0, got {eta}")),
            ),
            _ => Ok(()),
        }
    }

    /// Draws a rank in `0..lambda` (0 is the best).
    #[inline]
    pub fn select_rank<R: Rng + ?Sized>(&self, lambda: usize, rng: &mut R) -> usize {
        match *self {
            SelectionMechanism::Tournament { k } => {
                let mut best = lambda;
                for _ in 0..k {
                    best = best.min(rng.gen_range(0..lambda));
                }
                best
            }
            SelectionMechanism::MuLambda { mu } => rng.gen_range(0..mu.min(lambda)),
            SelectionMechanism::ExpRanking { eta } => {
                let u: f64 = rng.gen();
                let gamma = -(u * (-eta).exp_m1()).ln_1p() / eta;
                let rank = (gamma * lambda as f64).ceil() as usize;
                rank.clamp(1, lambda) - 1
            }
        }
    }

    /// Probability of each rank (0-based) being selected from `lambda` members.
    pub fn rank_probabilities(&self, lambda: usize) -> Vec<f64> {
        let l = lambda as f64;
        match *self {
            SelectionMechanism::Tournament { k } => (0..lambda)
                .map(|r| {
                    let above = (lambda - r) as f64 / l;
                    let below = (lambda - r - 1) as f64 / l;
                    above.powi(k as i32) - below.powi(k as i32)
                })
                .collect(),
            SelectionMechanism::MuLambda { mu } => (0..lambda)
                .map(|r| if r < mu { 1.0 / mu as f64 } else { 0.0 })
                .collect(),
            SelectionMechanism::ExpRanking { eta } => (0..lambda)
                .map(|r| {
                    exp_ranking_cdf(eta, (r + 1) as f64 / l) - exp_ranking_cdf(eta, r as f64 / l)
                })
                .collect(),
        }
    }

    /// Probability that the selected rank is among the best `top` ranks.
    pub fn prob_top(&self, lambda: usize, top: usize) -> f64 {
        let top = top.min(lambda);
        let frac = top as f64 / lambda as f64;
        match *self {
            SelectionMechanism::Tournament { k } => 1.0 - (1.0 - frac).powi(k as i32),
            SelectionMechanism::MuLambda { mu } => (top.min(mu) as f64 / mu as f64).min(1.0),
            SelectionMechanism::ExpRanking { eta } => exp_ranking_cdf(eta, frac),
        }
    }

    /// Selective pressure of a `lambda`-member population with distinct
    /// fitness values: probability of selecting one of the `ceil(gamma lambda)` best.
    pub fn beta_discrete(&self, gamma: f64, lambda: usize) -> f64 {
        self.prob_top(lambda, rank_threshold(gamma, lambda))
    }

    /// Continuous-rank selective pressure.
    ///
    /// Tournament: `1 - (1-gamma)^k`; (mu,lambda): `min(1, lambda gamma / mu)`;
    /// exponential ranking: `(e^eta / (e^eta - 1)) (1 - e^(-eta gamma))`.
    pub fn beta_closed_form(&self, gamma: f64, lambda: usize) -> f64 {
        match *self {
            SelectionMechanism::Tournament { k } => 1.0 - (1.0 - gamma).powi(k as i32),
            SelectionMechanism::MuLambda { mu } => (lambda as f64 * gamma / mu as f64).min(1.0),
            SelectionMechanism::ExpRanking { eta } => exp_ranking_cdf(eta, gamma),
        }
    }

    /// The weaker closed-form lower bound used in the selection-threshold
    /// argument: `1 - 1/(gamma k + 1)` for tournaments and `1 - 1/(1 + eta gamma)`
    /// for exponential ranking. (mu,lambda) has no separate bound.
    pub fn beta_lower_bound(&self, gamma: f64, lambda: usize) -> f64 {
        match *self {
            SelectionMechanism::Tournament { k } => 1.0 - 1.0 / (gamma * k as f64 + 1.0),
            SelectionMechanism::ExpRanking { eta } => 1.0 - 1.0 / (1.0 + eta * gamma),
            SelectionMechanism::MuLambda { .. } => self.beta_closed_form(gamma, lambda),
        }
    }
}

/// `ceil(gamma lambda)`, clamped to `1..=lambda`.
pub fn rank_threshold(gamma: f64, lambda: usize) -> usize {
    // guard against 0.1 * 30 = 3.0000000000000004 style round-up
    let x = gamma * lambda as f64;
    let r = x.round();
    let rank = if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r
    } else {
        x.ceil()
    };
    (rank as usize).clamp(1, lambda)
}

/// Cumulative selection probability of the top `x` fraction under exponential ranking.
pub fn exp_ranking_cdf(eta: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        (-eta * x).exp_m1() / (-eta).exp_m1()
    }
}

impl fmt::Display for SelectionMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionMechanism::Tournament { k } => write!(f, "tournament:k={k}"),
            SelectionMechanism::MuLambda { mu } => write!(f, "mu_lambda:mu={mu}"),
            SelectionMechanism::ExpRanking { eta } => write!(f, "exp_ranking:eta={eta}"),
        }
    }
}

impl FromStr for SelectionMechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = SpecString::parse(s)?;
        let kind: SelectionKind = spec.name.parse()?;
        let mech = match kind {
            SelectionKind::Tournament => {
                spec.allow_only(&["k"])?;
                SelectionMechanism::Tournament {
                    k: spec.required_usize("k")?,
                }
            }
            SelectionKind::MuLambda => {
                spec.allow_only(&["mu"])?;
                SelectionMechanism::MuLambda {
                    mu: spec.required_usize("mu")?,
                }
            }
            SelectionKind::ExpRanking => {
                spec.allow_only(&["eta"])?;
                SelectionMechanism::ExpRanking {
                    eta: spec.required_f64("eta")?,
                }
            }
        };
        // mu <= lambda is checked once lambda is known
        mech.validate(usize::MAX)?;
        Ok(mech)
    }
}

/// Population members ordered best-first.
#[derive(Debug, Clone)]
pub struct Ranking {
    order: Vec<usize>,
    fitness: Vec<u64>,
}

impl Ranking {
    /// Ranks `fitness` best-first, ordering ties by a uniform shuffle.
    pub fn new<R: Rng + ?Sized>(fitness: &[u64], rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..fitness.len()).collect();
        order.shuffle(rng);
        order.sort_by(|&a, &b| fitness[b].cmp(&fitness[a]));
        Self::from_order(order, fitness)
    }

    /// Ranks `fitness` best-first, ordering ties by index.
    pub fn deterministic(fitness: &[u64]) -> Self {
        let mut order: Vec<usize> = (0..fitness.len()).collect();
        order.sort_by(|&a, &b| fitness[b].cmp(&fitness[a]));
        Self::from_order(order, fitness)
    }

    fn from_order(order: Vec<usize>, fitness: &[u64]) -> Self {
        let fitness = order.iter().map(|&i| fitness[i]).collect();
        Ranking { order, fitness }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Member index holding 0-based `rank`.
    pub fn member(&self, rank: usize) -> usize {
        self.order[rank]
    }

    pub fn fitness_at_rank(&self, rank: usize) -> u64 {
        self.fitness[rank]
    }

    /// Number of members at least as fit as the member of 1-based rank `rank`.
    pub fn at_least_as_good(&self, rank: usize) -> usize {
        let threshold = self.fitness[rank - 1];
        self.fitness.partition_point(|&f| f >= threshold)
    }
}

/// Selects a parent; returns its member index.
#[inline]
pub fn select_index<R: Rng + ?Sized>(
    mech: &SelectionMechanism,
    ranking: &Ranking,
    rng: &mut R,
) -> usize {
    ranking.member(mech.select_rank(ranking.len(), rng))
}

/// Exact per-member selection probabilities for `fitness`.
///
/// Tied members share the average probability of the ranks their block occupies,
/// which is what the random tie order gives in distribution.
pub fn member_probabilities(mech: &SelectionMechanism, fitness: &[u64]) -> Vec<f64> {
    let lambda = fitness.len();
    let ranking = Ranking::deterministic(fitness);
    let per_rank = mech.rank_probabilities(lambda);
    let mut out = vec![0.0; lambda];
    let mut start = 0;
    while start < lambda {
        let f = ranking.fitness_at_rank(start);
        let mut end = start;
        while end < lambda && ranking.fitness_at_rank(end) == f {
            end += 1;
        }
        let avg = per_rank[start..end].iter().sum::<f64>() / (end - start) as f64;
        for r in start..end {
            out[ranking.member(r)] = avg;
        }
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn rank_threshold_rounding() {
        assert_eq!(rank_threshold(0.1, 30), 3);
        assert_eq!(rank_threshold(0.25, 8), 2);
        assert_eq!(rank_threshold(0.26, 8), 3);
        assert_eq!(rank_threshold(1e-9, 8), 1);
        assert_eq!(rank_threshold(1.0, 8), 8);
    }

    #[test]
    fn rank_probabilities_sum_to_one() {
        for mech in [
            SelectionMechanism::Tournament { k: 3 },
            SelectionMechanism::MuLambda { mu: 4 },
            SelectionMechanism::ExpRanking { eta: 2.5 },
        ] {
            let p = mech.rank_probabilities(7);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{mech}");
            assert!(p.windows(2).all(|w| w[0] >= w[1] - 1e-15), "{mech}");
        }
    }

    #[test]
    fn tournament_two_of_two_picks_best_three_quarters() {
        // draws (0,0),(0,1),(1,0),(1,1): best wins in three
        let mech = SelectionMechanism::Tournament { k: 2 };
        let p = member_probabilities(&mech, &[5, 9]);
        assert!((p[1] - 0.75).abs() < 1e-15);
        assert!((mech.beta_closed_form(0.5, 2) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn truncation_top_one_always_best() {
        let mech = SelectionMechanism::MuLambda { mu: 1 };
        let fitness = [3, 7, 1, 9, 4];
        let ranking = Ranking::new(&fitness, &mut seeded(1));
        let mut rng = seeded(2);
        for _ in 0..1000 {
            assert_eq!(select_index(&mech, &ranking, &mut rng), 3);
        }
    }

    #[test]
    fn exp_ranking_high_eta_prefers_best() {
        let mech = SelectionMechanism::ExpRanking { eta: 16.0 };
        let fitness = [1, 2, 3, 4];
        let ranking = Ranking::new(&fitness, &mut seeded(5));
        let mut rng = seeded(6);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| select_index(&mech, &ranking, &mut rng) == 3)
            .count();
        assert!(hits as f64 / trials as f64 > 0.9);
    }

    #[test]
    fn closed_forms() {
        let t = SelectionMechanism::Tournament { k: 2 };
        assert!((t.beta_closed_form(0.5, 10) - 0.75).abs() < 1e-15);
        let ml = SelectionMechanism::MuLambda { mu: 2 };
        assert_eq!(ml.beta_closed_form(0.25, 8), 1.0);
        let er = SelectionMechanism::ExpRanking { eta: 1.0 };
        // e/(e-1) * (1 - e^-0.5)
        let e = std::f64::consts::E;
        let expected = e / (e - 1.0) * (1.0 - (-0.5f64).exp());
        assert!((er.beta_closed_form(0.5, 4) - expected).abs() < 1e-15);
        assert!((expected - 0.6225).abs() < 1e-4);
    }

    #[test]
    fn ties_share_probability() {
        let mech = SelectionMechanism::Tournament { k: 2 };
        let p = member_probabilities(&mech, &[4, 4, 1]);
        assert!((p[0] - p[1]).abs() < 1e-15);
        assert!(p[0] > p[2]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ranking_ties_are_shuffled() {
        let fitness = [1, 1, 1, 1];
        let firsts: std::collections::HashSet<usize> = (0..64)
            .map(|s| Ranking::new(&fitness, &mut seeded(s)).member(0))
            .collect();
        assert_eq!(firsts.len(), 4);
        let r = Ranking::new(&[2, 9, 2, 5], &mut seeded(0));
        assert_eq!(r.member(0), 1);
        assert_eq!(r.member(1), 3);
        assert_eq!(r.at_least_as_good(3), 4);
        assert_eq!(r.at_least_as_good(2), 2);
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!(
            "tournament:k=25".parse::<SelectionMechanism>().unwrap(),
            SelectionMechanism::Tournament { k: 25 }
        );
        assert!("tournament:k=0".parse::<SelectionMechanism>().is_err());
        assert!("mu_lambda:mu=0".parse::<SelectionMechanism>().is_err());
        assert!("exp_ranking:eta=-1".parse::<SelectionMechanism>().is_err());
        assert!("tournament:mu=3".parse::<SelectionMechanism>().is_err());
        assert!(SelectionMechanism::MuLambda { mu: 6 }.validate(5).is_err());
        let m = SelectionMechanism::ExpRanking { eta: 23.918_2 };
        assert_eq!(m.to_string().parse::<SelectionMechanism>().unwrap(), m);
    }
}
