//! GA configuration from flags and TOML files, plus the inverse rendering.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use levelga::experiment::config_bound;
use levelga::{
    theorem_config, CrossoverKind, CrossoverSpec, Error, GaConfig, MutationSpec, ProblemSpec,
    SelectionKind, SelectionMechanism, Theorem, TheoremRequest, TheoremSetup, DEFAULT_MAX_EVALS,
};

/// Keys accepted in a `--config` file. Every key is optional there; the merged
/// result must still name a problem, lambda, selection and mutation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossover: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "wide_u64")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "wide_u64")]
    pub max_evals: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
}

/// TOML integers are signed 64-bit; larger `u64` values are written as strings.
mod wide_u64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if i64::try_from(*x).is_ok() => s.serialize_some(x),
            Some(x) => s.serialize_some(&x.to_string()),
            None => s.serialize_none(),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Wide {
        Int(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        match Option::<Wide>::deserialize(d)? {
            None => Ok(None),
            Some(Wide::Int(x)) => Ok(Some(x)),
            Some(Wide::Text(t)) => {
                t.trim().parse().map(Some).map_err(|_| {
                    de::Error::custom(format!("expected an unsigned integer, got {t:?}"))
                })
            }
        }
    }
}

/// GA parameters given directly.
#[derive(Debug, Clone, Default, Args)]
pub struct GaArgs {
    /// TOML file with any of the keys below; flags override it
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// onemax:n=<int> | leadingones:n=<int> | inv:n=<int>
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub lambda: Option<usize>,
    /// tournament:k=<int> | mu_lambda:mu=<int> | exp_ranking:eta=<num>
    #[arg(long)]
    pub selection: Option<String>,
    /// one_point:pc=<num> | uniform:pc=<num> (default uniform:pc=1)
    #[arg(long)]
    pub crossover: Option<String>,
    /// bitwise:chi=<num> | exchange
    #[arg(long)]
    pub mutation: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evaluation budget per run (default 10x the bound when one is known, else 1e9)
    #[arg(long)]
    pub max_evals: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
}

/// Theorem parameterisation, an alternative to spelling out the operators.
#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    /// 3_onemax | 3_leadingones | 4_inv
    #[arg(long, value_parser = parse_theorem)]
    pub theorem: Option<Theorem>,
    /// Problem size for --theorem
    #[arg(long)]
    pub n: Option<usize>,
    /// Drift constant delta; also enables the bound for plain configs
    #[arg(long)]
    pub delta: Option<f64>,
    /// Selection family for --theorem: tournament | mu_lambda | exp_ranking
    #[arg(long, default_value = "tournament", value_parser = parse_kind)]
    pub mechanism: SelectionKind,
    /// Mutation constant for the bitstring theorems
    #[arg(long, default_value_t = 1.0)]
    pub chi: f64,
    /// Crossover probability for the sorting theorem
    #[arg(long, default_value_t = 0.5)]
    pub pc: f64,
    /// Crossover kind for --theorem (default uniform for bitstrings, one_point for sorting)
    #[arg(long, value_parser = parse_crossover_kind)]
    pub crossover_kind: Option<CrossoverKind>,
}

fn parse_theorem(s: &str) -> Result<Theorem, Error> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<SelectionKind, Error> {
    s.parse()
}

pub fn parse_crossover_kind(s: &str) -> Result<CrossoverKind, Error> {
    s.parse()
}

/// A resolved configuration and, when known, the delta its bound uses.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: GaConfig,
    pub delta: Option<f64>,
    pub setup: Option<TheoremSetup>,
}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    Error::Config(msg.into()).into()
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Parses a TOML configuration. Unknown keys are rejected.
pub fn parse_config_file(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| config_error(format!("config file: {e}")))
}

/// Builds a validated [`GaConfig`] from merged file and flag values.
pub fn build_config(file: &ConfigFile, max_evals_default: Option<u64>) -> Result<GaConfig> {
    let need = |v: &Option<String>, key: &str| {
        v.clone()
            .ok_or_else(|| config_error(format!("missing --{key} (or `{key}` in the config file)")))
    };
    let problem: ProblemSpec = need(&file.problem, "problem")?.parse()?;
    let lambda = file
        .lambda
        .ok_or_else(|| config_error("missing --lambda (or `lambda` in the config file)"))?;
    let selection: SelectionMechanism = need(&file.selection, "selection")?.parse()?;
    let crossover: CrossoverSpec = file
        .crossover
        .as_deref()
        .unwrap_or("uniform:pc=1")
        .parse()?;
    let mutation: MutationSpec = need(&file.mutation, "mutation")?.parse()?;
    let config = GaConfig {
        problem,
        lambda,
        selection,
        crossover,
        mutation,
        seed: file.seed.unwrap_or(0),
        max_evals: file
            .max_evals
            .or(max_evals_default)
            .unwrap_or(DEFAULT_MAX_EVALS),
        replicates: file.replicates.unwrap_or(1),
    };
    Ok(config.validated()?)
}

/// Parses configuration text as written by [`render`].
#[cfg(test)]
pub fn parse_config(text: &str) -> Result<GaConfig> {
    build_config(&parse_config_file(text)?, None)
}

/// TOML text that [`parse_config`] maps back to `config`.
pub fn render(config: &GaConfig) -> String {
    let file = ConfigFile {
        problem: Some(config.problem.to_string()),
        lambda: Some(config.lambda),
        selection: Some(config.selection.to_string()),
        crossover: Some(config.crossover.to_string()),
        mutation: Some(config.mutation.to_string()),
        seed: Some(config.seed),
        max_evals: Some(config.max_evals),
        replicates: Some(config.replicates),
    };
    toml::to_string(&file).expect("plain keys serialise")
}

/// Flag form of `config` for the `run` subcommand.
#[cfg(test)]
pub fn render_args(config: &GaConfig) -> Vec<String> {
    [
        ("--problem", config.problem.to_string()),
        ("--lambda", config.lambda.to_string()),
        ("--selection", config.selection.to_string()),
        ("--crossover", config.crossover.to_string()),
        ("--mutation", config.mutation.to_string()),
        ("--seed", config.seed.to_string()),
        ("--max-evals", config.max_evals.to_string()),
        ("--replicates", config.replicates.to_string()),
    ]
    .into_iter()
    .flat_map(|(k, v)| [k.to_string(), v])
    .collect()
}

impl GaArgs {
    fn merged(&self) -> Result<ConfigFile> {
        let mut file = match &self.config {
            Some(path) => parse_config_file(&read_file(path)?)?,
            None => ConfigFile::default(),
        };
        macro_rules! overlay {
            ($($field:ident),*) => {$(
                if self.$field.is_some() {
                    file.$field = self.$field.clone();
                }
            )*};
        }
        overlay!(problem, lambda, selection, crossover, mutation, seed, max_evals, replicates);
        Ok(file)
    }

    fn names_operators(&self) -> bool {
        self.config.is_some()
            || self.problem.is_some()
            || self.selection.is_some()
            || self.crossover.is_some()
            || self.mutation.is_some()
    }
}

/// Resolves either theorem mode or an explicit configuration.
pub fn resolve(ga: &GaArgs, theory: &TheoryArgs) -> Result<Resolved> {
    if let Some(theorem) = theory.theorem {
        if ga.names_operators() {
            return Err(config_error(
                "--theorem chooses problem and operators; drop --config/--problem/--selection/--crossover/--mutation",
            ));
        }
        let n = theory
            .n
            .ok_or_else(|| config_error("--theorem needs --n <size>"))?;
        let mut req =
            TheoremRequest::new(theorem, n, theory.delta.unwrap_or(1.0), theory.mechanism);
        req.chi = theory.chi;
        req.p_c = theory.pc;
        if let Some(kind) = theory.crossover_kind {
            req.crossover = kind;
        }
        req.lambda = ga.lambda;
        req.seed = ga.seed.unwrap_or(0);
        req.replicates = ga.replicates.unwrap_or(1);
        let mut setup = theorem_config(&req)?;
        if let Some(max) = ga.max_evals {
            setup.config.max_evals = max;
            setup.config = setup.config.validated()?;
        }
        return Ok(Resolved {
            config: setup.config.clone(),
            delta: Some(setup.delta_effective),
            setup: Some(setup),
        });
    }
    if theory.n.is_some() {
        return Err(config_error(
            "--n only applies with --theorem; use --problem",
        ));
    }
    let file = ga.merged()?;
    let mut config = build_config(&file, None)?;
    if file.max_evals.is_none() {
        if let Some(delta) = theory.delta {
            let bound = config_bound(&config, delta)?.bound;
            config.max_evals = ten_times(bound).max(config.lambda as u64);
        }
    }
    Ok(Resolved {
        config,
        delta: theory.delta,
        setup: None,
    })
}

pub fn ten_times(bound: f64) -> u64 {
    let b = 10.0 * bound;
    if b >= u64::MAX as f64 {
        u64::MAX
    } else {
        b.floor() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GaConfig {
        parse_config(
            r#"
problem = "onemax:n=100"
lambda = 200
selection = "tournament:k=24"
crossover = "uniform:pc=1.0"
mutation = "bitwise:chi=1.0"
seed = 42
replicates = 30
"#,
        )
        .unwrap()
    }

    #[test]
    fn render_round_trips() {
        let mut configs = vec![sample()];
        let mut c = sample();
        c.problem = "inv:n=8".parse().unwrap();
        c.mutation = MutationSpec::Exchange;
        c.crossover = "one_point:pc=0.3".parse().unwrap();
        c.selection = SelectionMechanism::ExpRanking { eta: 0.1 + 0.2 };
        c.max_evals = 123_456_789_012;
        c.seed = u64::MAX;
        configs.push(c);
        let mut c = sample();
        c.selection = SelectionMechanism::MuLambda { mu: 17 };
        c.crossover = "one_point:pc=0.7071067811865476".parse().unwrap();
        c.mutation = MutationSpec::Bitwise { chi: 1.0 / 3.0 };
        configs.push(c);
        for c in configs {
            assert_eq!(parse_config(&render(&c)).unwrap(), c);
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config_file("problem = \"onemax:n=3\"\npopulation = 4\n").unwrap_err();
        assert!(err.to_string().contains("population"), "{err}");
    }

    #[test]
    fn defaults_fill_optional_keys() {
        let c = parse_config(
            "problem = \"leadingones:n=5\"\nlambda = 4\nselection = \"tournament:k=2\"\nmutation = \"bitwise:chi=1\"\n",
        )
        .unwrap();
        assert_eq!(c.crossover, "uniform:pc=1".parse().unwrap());
        assert_eq!(
            (c.seed, c.replicates, c.max_evals),
            (0, 1, DEFAULT_MAX_EVALS)
        );
    }

    #[test]
    fn delta_sets_budget_from_bound() {
        let ga = GaArgs {
            problem: Some("onemax:n=10".into()),
            lambda: Some(50),
            selection: Some("tournament:k=30".into()),
            mutation: Some("bitwise:chi=1".into()),
            ..GaArgs::default()
        };
        let theory = TheoryArgs {
            theorem: None,
            n: None,
            delta: Some(1.0),
            mechanism: SelectionKind::Tournament,
            chi: 1.0,
            pc: 0.5,
            crossover_kind: None,
        };
        let r = resolve(&ga, &theory).unwrap();
        let bound = config_bound(&r.config, 1.0).unwrap().bound;
        assert_eq!(r.config.max_evals, (10.0 * bound).floor() as u64);
        let plain = resolve(
            &ga,
            &TheoryArgs {
                delta: None,
                ..theory
            },
        )
        .unwrap();
        assert_eq!(plain.config.max_evals, DEFAULT_MAX_EVALS);
    }
}
