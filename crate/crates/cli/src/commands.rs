//! Subcommand implementations.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Subcommand};

use levelga::estimator::{
    check_crossover_lemma, estimate_beta, exact_beta_small, mutation_reach, LemmaCase,
    MAX_EXACT_BETA_LAMBDA,
};
use levelga::experiment::config_bound;
use levelga::levelbound::{corollary1_bound, theorem1_bound, LevelProbabilities};
use levelga::{
    benchmark_sj, bound_vs_empirical_report, condition_report, run_replicates, BitString,
    ConditionOptions, CrossoverKind, GaConfig, SelectionMechanism,
};

use crate::config::{
    build_config, config_error, parse_crossover_kind, render, resolve, ten_times, ConfigFile,
    GaArgs, TheoryArgs,
};
use crate::output::{Format, Record, Sink};

/// Output path, opened once the command has validated its inputs.
pub struct SinkSpec(pub Option<PathBuf>);

impl SinkSpec {
    fn open(&self) -> Result<Sink> {
        Sink::open(self.0.as_deref())
    }
}

fn config_fields(r: &mut Record, c: &GaConfig) {
    r.push("problem", c.problem.to_string());
    r.push("lambda", c.lambda);
    r.push("selection", c.selection.to_string());
    r.push("crossover", c.crossover.to_string());
    r.push("mutation", c.mutation.to_string());
    r.push("seed", c.seed);
    r.push("max_evals", c.max_evals);
    r.push("replicates", c.replicates);
}

pub fn run(
    ga: &GaArgs,
    theory: &TheoryArgs,
    verify: bool,
    trials: u64,
    sink: &SinkSpec,
    format: Option<Format>,
) -> Result<()> {
    let resolved = resolve(ga, theory)?;
    let config = &resolved.config;
    if verify && resolved.delta.is_none() {
        return Err(config_error("--verify needs --delta or --theorem"));
    }
    let mut out = sink.open()?;
    let stats = run_replicates(config, &config.problem.canonical_partition())?;
    eprintln!(
        "{}: {}/{} successful, mean evaluations {:.4e}",
        config.problem, stats.successes, stats.replicates, stats.mean_evals
    );
    match format.unwrap_or(Format::Csv) {
        Format::Csv => out.serialized_csv(&stats.per_run),
        Format::Json => {
            let mut r = Record::default();
            config_fields(&mut r, config);
            r.extend_scalars(&stats);
            if let Some(delta) = resolved.delta {
                let conditions = if verify {
                    let opts = ConditionOptions {
                        trials,
                        seed: config.seed,
                        g_trials: 0,
                    };
                    Some(condition_report(config, delta, &opts)?)
                } else {
                    None
                };
                let cmp = bound_vs_empirical_report(config, delta, &stats, conditions.as_ref())?;
                let bound = config_bound(config, delta)?;
                r.push("delta", delta);
                r.push("lambda_min", bound.lambda_min);
                r.push("conditions_checked", verify);
                r.extend_scalars(&cmp);
            }
            out.record(Format::Json, &r)
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn bound(
    ga: &GaArgs,
    theory: &TheoryArgs,
    z: &[f64],
    s: &[f64],
    p0: f64,
    gamma0: Option<f64>,
    sink: &SinkSpec,
    format: Option<Format>,
) -> Result<()> {
    let mut r = Record::default();
    if !z.is_empty() || !s.is_empty() {
        let lambda = ga
            .lambda
            .ok_or_else(|| config_error("--z/--s need --lambda"))?;
        let delta = theory
            .delta
            .ok_or_else(|| config_error("--z/--s need --delta"))?;
        let gamma0 = gamma0.ok_or_else(|| config_error("--z/--s need --gamma0"))?;
        let report = if !z.is_empty() {
            theorem1_bound(
                z.len(),
                lambda,
                &LevelProbabilities::new(z.to_vec())?,
                delta,
                gamma0,
            )?
        } else {
            let lp = LevelProbabilities::with_constants(s.to_vec(), p0, 1.0)?;
            corollary1_bound(s.len(), lambda, &lp, delta, gamma0)?
        };
        r.extend_scalars(&report);
    } else {
        let resolved = resolve(ga, theory)?;
        let delta = resolved
            .delta
            .ok_or_else(|| config_error("bound needs --delta, --theorem, --z or --s"))?;
        config_fields(&mut r, &resolved.config);
        match &resolved.setup {
            Some(setup) => {
                r.extend_scalars(&setup.report);
                r.push("delta_requested", setup.delta_requested);
                r.push("delta_effective", setup.delta_effective);
                r.push("selection_requirement", setup.selection_requirement);
                r.push("warnings", setup.warnings.join("; "));
            }
            None => r.extend_scalars(&config_bound(&resolved.config, delta)?),
        }
    }
    sink.open()?.record(format.unwrap_or(Format::Json), &r)
}

#[derive(Debug, Subcommand)]
pub enum EstimateCommand {
    /// Probability that selection picks from the top gamma fraction of lambda distinct ranks
    Beta {
        #[arg(long)]
        selection: String,
        #[arg(long)]
        lambda: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mutation upgrade probability at one level against the benchmark constant
    Sj {
        #[command(flatten)]
        ga: GaArgs,
        #[command(flatten)]
        theory: TheoryArgs,
        /// Level j in 1..=m
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// One case of the crossover lemma for a pair of bitstrings
    #[command(name = "crossover-lemma")]
    CrossoverLemma {
        /// one_point | uniform
        #[arg(long, value_parser = parse_crossover_kind)]
        kind: CrossoverKind,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        /// i | ii | iii
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub fn estimate(what: &EstimateCommand, sink: &SinkSpec, format: Option<Format>) -> Result<()> {
    let mut r = Record::default();
    match what {
        EstimateCommand::Beta {
            selection,
            lambda,
            gamma,
            trials,
            seed,
        } => {
            let mech: SelectionMechanism = selection.parse()?;
            let fitness: Vec<u64> = (0..*lambda as u64).rev().collect();
            let est = estimate_beta(&mech, &fitness, *gamma, *trials, *seed)?;
            r.push("selection", mech.to_string());
            r.push("lambda", *lambda);
            r.push("gamma", *gamma);
            r.push("estimate", est.value);
            r.push("ci_halfwidth", est.ci_halfwidth);
            r.push("trials", est.trials);
            if *lambda <= MAX_EXACT_BETA_LAMBDA {
                if let Ok(exact) = exact_beta_small(&mech, &fitness, *gamma) {
                    r.push("exact", exact);
                    r.push("covered", est.covers(exact));
                }
            }
            r.push("discrete", mech.beta_discrete(*gamma, *lambda));
            r.push("closed_form", mech.beta_closed_form(*gamma, *lambda));
        }
        EstimateCommand::Sj {
            ga,
            theory,
            level,
            trials,
        } => {
            let config = resolve(ga, theory)?.config;
            let c = benchmark_sj(&config.problem, &config.mutation, &config.crossover, *level)?;
            let opts = ConditionOptions {
                trials: *trials,
                seed: config.seed,
                g_trials: 0,
            };
            let x = config.problem.representative(*level)?;
            let measured = mutation_reach(
                &config.problem,
                &config.mutation,
                &x,
                *level as u64,
                c.s_j,
                &opts,
                0,
            )?;
            r.push("problem", config.problem.to_string());
            r.push("mutation", config.mutation.to_string());
            r.push("level", *level);
            r.push("s_j", c.s_j);
            r.push("p0", c.p0);
            r.push("eps1", c.eps1);
            r.extend_scalars(&measured);
            r.push("holds", measured.lower >= c.s_j - 1e-12);
        }
        EstimateCommand::CrossoverLemma {
            kind,
            u,
            v,
            case,
            trials,
            seed,
        } => {
            let bu: BitString = u.parse()?;
            let bv: BitString = v.parse()?;
            let case: LemmaCase = case.parse()?;
            let check = check_crossover_lemma(*kind, &bu, &bv, case, *trials, *seed)?;
            r.push("kind", kind.name());
            r.push("u", u.as_str());
            r.push("v", v.as_str());
            r.extend_scalars(&check);
            if let Some(e) = check.estimate {
                r.push("estimate", e.value);
                r.push("ci_halfwidth", e.ci_halfwidth);
            }
        }
    }
    sink.open()?.record(format.unwrap_or(Format::Json), &r)
}

pub fn verify(
    ga: &GaArgs,
    theory: &TheoryArgs,
    trials: u64,
    g_trials: u64,
    sink: &SinkSpec,
    format: Option<Format>,
) -> Result<()> {
    let resolved = resolve(ga, theory)?;
    let delta = resolved
        .delta
        .ok_or_else(|| config_error("verify needs --delta or --theorem"))?;
    let opts = ConditionOptions {
        trials,
        seed: resolved.config.seed,
        g_trials,
    };
    let report = condition_report(&resolved.config, delta, &opts)?;
    let mut out = sink.open()?;
    match format.unwrap_or(Format::Json) {
        Format::Json => {
            out.json(&report)?;
            Ok(())
        }
        Format::Csv => {
            let rows: Vec<Record> = report
                .rows
                .iter()
                .map(|row| {
                    let mut r = Record::default();
                    r.push("name", row.name.as_str());
                    r.push("level", row.level);
                    r.push("required", row.required);
                    r.push("value", row.measured.value);
                    r.push("lower", row.measured.lower);
                    r.push("ci_halfwidth", row.measured.ci_halfwidth);
                    r.push("trials", row.measured.trials);
                    r.push(
                        "method",
                        serde_json::to_value(row.measured.method).unwrap_or_default(),
                    );
                    r.push("satisfied", row.satisfied);
                    r.push("margin", row.margin);
                    r.push("detail", row.detail.as_str());
                    r
                })
                .collect();
            out.records(Format::Csv, &rows)
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, num_args = 1.., required = true)]
    problem: Vec<String>,
    #[arg(long, num_args = 1.., required = true)]
    lambda: Vec<usize>,
    #[arg(long, num_args = 1.., required = true)]
    selection: Vec<String>,
    #[arg(long, num_args = 1.., default_value = "uniform:pc=1")]
    crossover: Vec<String>,
    #[arg(long, num_args = 1.., required = true)]
    mutation: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long)]
    max_evals: Option<u64>,
    /// Adds bound columns and sets the default budget to 10x the bound
    #[arg(long)]
    delta: Option<f64>,
}

pub fn sweep(grid: &SweepArgs, sink: &SinkSpec, format: Option<Format>) -> Result<()> {
    // validate every cell before running any
    let mut cells = Vec::new();
    for problem in &grid.problem {
        for &lambda in &grid.lambda {
            for selection in &grid.selection {
                for crossover in &grid.crossover {
                    for mutation in &grid.mutation {
                        let file = ConfigFile {
                            problem: Some(problem.clone()),
                            lambda: Some(lambda),
                            selection: Some(selection.clone()),
                            crossover: Some(crossover.clone()),
                            mutation: Some(mutation.clone()),
                            seed: Some(grid.seed),
                            max_evals: grid.max_evals,
                            replicates: Some(grid.replicates),
                        };
                        let mut config = build_config(&file, None)?;
                        let bound = match grid.delta {
                            Some(delta) => Some(config_bound(&config, delta)?),
                            None => None,
                        };
                        if let (None, Some(b)) = (grid.max_evals, &bound) {
                            config.max_evals = ten_times(b.bound).max(config.lambda as u64);
                        }
                        cells.push((config, bound));
                    }
                }
            }
        }
    }
    let mut out = sink.open()?;
    let mut rows = Vec::with_capacity(cells.len());
    for (config, bound) in &cells {
        let stats = run_replicates(config, &config.problem.canonical_partition())?;
        let mut r = Record::default();
        config_fields(&mut r, config);
        r.push("successes", stats.successes);
        r.push("success_rate", stats.success_rate);
        r.push("mean_evals", stats.mean_evals);
        r.push("std_evals", stats.std_evals);
        r.push("ci95_halfwidth", stats.ci95_halfwidth);
        if let Some(b) = bound {
            r.push("bound", b.bound);
            r.push("lambda_min", b.lambda_min);
            r.push("lambda_ok", b.lambda_ok);
            r.push("ratio", stats.mean_evals / b.bound);
        }
        eprintln!(
            "{} lambda={} {} {} {}: success {:.2}",
            config.problem,
            config.lambda,
            config.selection,
            config.crossover,
            config.mutation,
            stats.success_rate
        );
        rows.push(r);
    }
    out.records(format.unwrap_or(Format::Csv), &rows)
}

pub fn show_config(ga: &GaArgs, theory: &TheoryArgs, sink: &SinkSpec) -> Result<()> {
    let resolved = resolve(ga, theory)?;
    let mut out = sink.open()?;
    out.text(&render(&resolved.config))
}
