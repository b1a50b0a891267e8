//! `levelga` command-line front end.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{GaArgs, TheoryArgs};
use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "levelga",
    version,
    about = "Non-elitist GA experiments, runtime bounds and condition checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replicated runs; CSV lists one row per run, JSON the summary
    Run {
        #[command(flatten)]
        ga: GaArgs,
        #[command(flatten)]
        theory: TheoryArgs,
        /// Also evaluate the conditions and mark the result certified or not
        #[arg(long)]
        verify: bool,
        /// Trials per estimated condition with --verify
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Runtime bound for a configuration, a theorem, or explicit level probabilities
    Bound {
        #[command(flatten)]
        ga: GaArgs,
        #[command(flatten)]
        theory: TheoryArgs,
        /// Upgrade probabilities z_1..z_m (comma separated) for the general bound
        #[arg(long, value_delimiter = ',', conflicts_with = "s")]
        z: Vec<f64>,
        /// Mutation probabilities s_1..s_m (comma separated) for the GA bound
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        /// No-change probability for --s
        #[arg(long, default_value_t = 1.0)]
        p0: f64,
        /// gamma0 for --z / --s
        #[arg(long)]
        gamma0: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Estimators for selective pressure, mutation upgrade probabilities and the crossover lemma
    Estimate {
        #[command(subcommand)]
        what: commands::EstimateCommand,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Condition report for a configuration
    Verify {
        #[command(flatten)]
        ga: GaArgs,
        #[command(flatten)]
        theory: TheoryArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Trials for the supplementary whole-population rows (0 skips them)
        #[arg(long, default_value_t = 0)]
        g_trials: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Prints the resolved configuration as a TOML file usable with --config
    Config {
        #[command(flatten)]
        ga: GaArgs,
        #[command(flatten)]
        theory: TheoryArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Replicated runs over the cartesian product of parameter lists, one row per cell
    Sweep {
        #[command(flatten)]
        grid: commands::SweepArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            ga,
            theory,
            verify,
            trials,
            out,
        } => commands::run(&ga, &theory, verify, trials, &out.sink()?, out.format),
        Command::Bound {
            ga,
            theory,
            z,
            s,
            p0,
            gamma0,
            out,
        } => commands::bound(&ga, &theory, &z, &s, p0, gamma0, &out.sink()?, out.format),
        Command::Estimate { what, out } => commands::estimate(&what, &out.sink()?, out.format),
        Command::Verify {
            ga,
            theory,
            trials,
            g_trials,
            out,
        } => commands::verify(&ga, &theory, trials, g_trials, &out.sink()?, out.format),
        Command::Config { ga, theory, out } => commands::show_config(&ga, &theory, &out.sink()?),
        Command::Sweep { grid, out } => commands::sweep(&grid, &out.sink()?, out.format),
    }
}

impl OutputArgs {
    /// Opening is deferred to the command so that config errors win over
    /// creating an empty output file.
    fn sink(&self) -> anyhow::Result<commands::SinkSpec> {
        Ok(commands::SinkSpec(self.output.clone()))
    }
}

/// 2 for configuration errors, 3 for I/O errors, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<levelga::Error>() || cause.is::<toml::de::Error>() {
            return 2;
        }
        if cause.is::<std::io::Error>()
            || cause.is::<csv::Error>()
            || cause.is::<serde_json::Error>()
        {
            return 3;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use config::{render_args, resolve};

    fn resolve_argv(argv: &[&str]) -> levelga::GaConfig {
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Run { ga, theory, .. } => resolve(&ga, &theory).unwrap().config,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn argv_round_trips() {
        let c = resolve_argv(&[
            "levelga",
            "run",
            "--problem",
            "onemax:n=100",
            "--lambda",
            "200",
            "--selection",
            "tournament:k=24",
            "--crossover",
            "uniform:pc=1.0",
            "--mutation",
            "bitwise:chi=1.0",
            "--seed",
            "42",
            "--replicates",
            "30",
        ]);
        assert_eq!(c.lambda, 200);
        assert_eq!(c.replicates, 30);
        let mut argv = vec!["levelga".to_string(), "run".to_string()];
        argv.extend(render_args(&c));
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        assert_eq!(resolve_argv(&argv), c);
    }

    #[test]
    fn config_errors_map_to_exit_code_two() {
        let parse = |argv: &[&str]| match Cli::try_parse_from(argv).unwrap().command {
            Command::Run { ga, theory, .. } => resolve(&ga, &theory).unwrap_err(),
            _ => unreachable!(),
        };
        let mismatch = parse(&[
            "levelga",
            "run",
            "--problem",
            "inv:n=8",
            "--lambda",
            "4",
            "--selection",
            "tournament:k=2",
            "--mutation",
            "bitwise:chi=1",
        ]);
        assert!(mismatch.to_string().contains("works on bits"), "{mismatch}");
        assert_eq!(exit_code(&mismatch), 2);
        let k0 = parse(&[
            "levelga",
            "run",
            "--problem",
            "onemax:n=8",
            "--lambda",
            "4",
            "--selection",
            "tournament:k=0",
            "--mutation",
            "bitwise:chi=1",
        ]);
        assert_eq!(exit_code(&k0), 2);
        let io: anyhow::Error = std::io::Error::new(std::io::ErrorKind::NotFound, "x").into();
        assert_eq!(exit_code(&io.context("reading")), 3);
    }
}
