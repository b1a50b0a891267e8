//! Replicated runs, summary statistics and the comparison with the GA bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::GaConfig;
use crate::error::Result;
use crate::estimator::conditions::selection_gamma0;
use crate::estimator::ConditionReport;
use crate::levelbound::{benchmark_level_probabilities, corollary1_bound, BoundReport};
use crate::problems::LevelPartition;
use crate::rng::replicate_seed;
use crate::search::run_until_target;

/// One row of per-run output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_index: usize,
    pub seed: u64,
    pub success: bool,
    pub evaluations: u64,
    pub generations: u64,
    pub best_level_final: usize,
}

/// Statistics over successful runs, with the success rate alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentStats {
    pub replicates: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_evals: f64,
    pub std_evals: f64,
    pub ci95_halfwidth: f64,
    pub per_run: Vec<RunSummary>,
}

impl ExperimentStats {
    pub fn from_runs(per_run: Vec<RunSummary>) -> Self {
        let replicates = per_run.len();
        let evals: Vec<f64> = per_run
            .iter()
            .filter(|r| r.success)
            .map(|r| r.evaluations as f64)
            .collect();
        let successes = evals.len();
        let mean_evals = if successes == 0 {
            0.0
        } else {
            evals.iter().sum::<f64>() / successes as f64
        };
        let std_evals = if successes < 2 {
            0.0
        } else {
            (evals.iter().map(|e| (e - mean_evals).powi(2)).sum::<f64>() / (successes - 1) as f64)
                .sqrt()
        };
        let ci95_halfwidth = if successes == 0 {
            0.0
        } else {
            1.96 * std_evals / (successes as f64).sqrt()
        };
        ExperimentStats {
            replicates,
            successes,
            success_rate: if replicates == 0 {
                0.0
            } else {
                successes as f64 / replicates as f64
            },
            mean_evals,
            std_evals,
            ci95_halfwidth,
            per_run,
        }
    }
}

/// Runs `config.replicates` independent runs with seeds derived from
/// `config.seed` and the budget `config.max_evals`. Replicates run in
/// parallel; results are ordered by run index.
pub fn run_replicates<P: LevelPartition + ?Sized>(
    config: &GaConfig,
    partition: &P,
) -> Result<ExperimentStats> {
    config.validate()?;
    let per_run = (0..config.replicates)
        .into_par_iter()
        .map(|i| {
            let seed = replicate_seed(config.seed, i as u64);
            let r = run_until_target(config, partition, config.max_evals, seed)?;
            Ok(RunSummary {
                run_index: i,
                seed,
                success: r.success,
                evaluations: r.evaluations,
                generations: r.generations,
                best_level_final: r.best_level_final(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentStats::from_runs(per_run))
}

/// The GA bound for `config` with its benchmark constants and the `gamma0`
/// its selection mechanism implies at `delta`.
pub fn config_bound(config: &GaConfig, delta: f64) -> Result<BoundReport> {
    config.validate()?;
    let lp = benchmark_level_probabilities(&config.problem, &config.mutation, &config.crossover)?;
    let gamma0 = selection_gamma0(&config.selection, config.lambda, lp.p0, lp.eps1, delta);
    corollary1_bound(config.problem.levels(), config.lambda, &lp, delta, gamma0)
}

/// Empirical mean against the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub empirical_mean: f64,
    pub bound: f64,
    pub ratio: f64,
    pub success_rate: f64,
    pub lambda_ok: bool,
    pub conditions_pass: bool,
    /// Conditions pass, `lambda >= lambda_min` and every run succeeded.
    pub certified: bool,
}

/// Joins `stats` with the bound for `config` at `delta` and, when given, the
/// condition report.
pub fn bound_vs_empirical_report(
    config: &GaConfig,
    delta: f64,
    stats: &ExperimentStats,
    conditions: Option<&ConditionReport>,
) -> Result<BoundComparison> {
    let bound = config_bound(config, delta)?;
    let conditions_pass = conditions.is_some_and(|c| c.all_pass);
    Ok(BoundComparison {
        empirical_mean: stats.mean_evals,
        bound: bound.bound,
        ratio: stats.mean_evals / bound.bound,
        success_rate: stats.success_rate,
        lambda_ok: bound.lambda_ok,
        conditions_pass,
        certified: conditions_pass && bound.lambda_ok && stats.success_rate == 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelbound::{theorem_config, Theorem, TheoremRequest};
    use crate::operators::{
        CrossoverKind, CrossoverSpec, MutationSpec, SelectionKind, SelectionMechanism,
    };
    use crate::problems::ProblemSpec;

    fn tiny() -> GaConfig {
        GaConfig {
            problem: ProblemSpec::onemax(1),
            lambda: 2,
            selection: SelectionMechanism::Tournament { k: 2 },
            crossover: CrossoverSpec::new(CrossoverKind::Uniform, 1.0).unwrap(),
            mutation: MutationSpec::Bitwise { chi: 1.0 },
            seed: 11,
            max_evals: 10_000,
            replicates: 10,
        }
    }

    #[test]
    fn two_point_space_always_succeeds() {
        let cfg = tiny();
        let stats = run_replicates(&cfg, &cfg.problem.canonical_partition()).unwrap();
        assert_eq!(stats.success_rate, 1.0);
        assert_eq!(stats.per_run.len(), 10);
        assert!(stats.per_run.iter().all(|r| r.evaluations % 2 == 0));
        let again = run_replicates(&cfg, &cfg.problem.canonical_partition()).unwrap();
        assert_eq!(stats, again);
    }

    #[test]
    fn statistics_use_successes_only() {
        let run = |i: usize, success: bool, evaluations: u64| RunSummary {
            run_index: i,
            seed: i as u64,
            success,
            evaluations,
            generations: evaluations / 2,
            best_level_final: 1,
        };
        let s = ExperimentStats::from_runs(vec![
            run(0, true, 10),
            run(1, true, 20),
            run(2, false, 999),
        ]);
        assert_eq!(s.mean_evals, 15.0);
        assert!((s.success_rate - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.std_evals - 50f64.sqrt()).abs() < 1e-12);
        let none = ExperimentStats::from_runs(vec![run(0, false, 4)]);
        assert_eq!(none.success_rate, 0.0);
        assert_eq!(none.mean_evals, 0.0);
    }

    #[test]
    fn bound_matches_theorem_setup() {
        let req = TheoremRequest::new(Theorem::OneMax, 20, 1.0, SelectionKind::Tournament);
        let setup = theorem_config(&req).unwrap();
        let b = config_bound(&setup.config, setup.delta_effective).unwrap();
        assert_eq!(b.bound, setup.report.bound);
        assert_eq!(b.lambda_min, setup.report.lambda_min);
    }
}
