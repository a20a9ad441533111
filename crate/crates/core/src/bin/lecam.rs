use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lecam::scenario::{execute, list_scenarios, parse_override, prepare, ScenarioConfig};
use lecam::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

/// Flags understood by `run`; any other `--key value` pair is a scenario override.
const RUN_FLAGS: &[&str] = &["--config", "--seed", "--streams", "--out", "--reps", "--tol", "--help", "-h"];

#[derive(Parser)]
#[command(name = "lecam", version, about = "Verification scenarios for convolution theorems of regular estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario. Extra `--key value` pairs set scenario parameters
    /// (dashes become underscores; values are JSON, comma lists or strings).
    Run {
        /// Scenario name; overrides the config's `scenario`.
        scenario: Option<String>,
        /// JSON config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        streams: Option<usize>,
        /// Directory for report.json and CSV artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replication count override.
        #[arg(long)]
        reps: Option<usize>,
        /// Tolerance override as `name=value`; repeatable.
        #[arg(long = "tol", value_name = "NAME=VALUE")]
        tolerances: Vec<String>,
    },
    /// List the registered scenarios.
    List {
        #[arg(long)]
        json: bool,
    },
}

/// Removes `--key value` and `--key=value` pairs that are not `run` flags.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let is_run = args.get(1).is_some_and(|a| a == "run");
    if !is_run {
        return (args, Vec::new());
    }
    let mut kept = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter().peekable();
    while let Some(a) = it.next() {
        let known = RUN_FLAGS.iter().any(|f| a == *f || a.starts_with(&format!("{f}=")));
        match a.strip_prefix("--") {
            Some(rest) if !known && !rest.is_empty() => {
                let (key, value) = match rest.split_once('=') {
                    Some((k, v)) => (k.to_string(), v.to_string()),
                    None => (rest.to_string(), it.next().unwrap_or_default()),
                };
                overrides.push((key.replace('-', "_"), value));
            }
            _ => kept.push(a),
        }
    }
    (kept, overrides)
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("lecam: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    scenario: Option<String>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    streams: Option<usize>,
    out: Option<PathBuf>,
    reps: Option<usize>,
    tolerances: Vec<String>,
    overrides: Vec<(String, String)>,
) -> lecam::Result<ScenarioConfig> {
    let mut cfg = match (&config, &scenario) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            ScenarioConfig::from_json(&text)?
        }
        (None, Some(name)) => ScenarioConfig::new(name.clone()),
        (None, None) => return Err(Error::Config("give a scenario name or --config".into())),
    };
    if let Some(s) = scenario {
        cfg.scenario = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = streams {
        if s == 0 {
            return Err(Error::Config("--streams must be at least 1".into()));
        }
        cfg.streams = s;
    }
    if out.is_some() {
        cfg.out = out;
    }
    if let Some(r) = reps {
        cfg.set("reps", r.into());
    }
    for t in tolerances {
        let (name, value) =
            t.split_once('=').ok_or_else(|| Error::Config(format!("--tol expects NAME=VALUE, got `{t}`")))?;
        let v: f64 = value.parse().map_err(|_| Error::Config(format!("tolerance `{name}` is not a number")))?;
        cfg.tolerances.insert(name.to_string(), v);
    }
    for (k, v) in overrides {
        cfg.set(k, parse_override(&v));
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let (args, overrides) = split_overrides(std::env::args().collect());
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::List { json } => {
            let list = list_scenarios();
            if json {
                match serde_json::to_string_pretty(&list) {
                    Ok(s) => println!("{s}"),
                    Err(e) => return config_error(e),
                }
            } else {
                for s in list {
                    println!("{:<12} {}  [{}]", s.name, s.description, s.anchor);
                }
            }
            ExitCode::SUCCESS
        }
        Command::Run { scenario, config, seed, streams, out, reps, tolerances } => {
            let cfg = match build_config(scenario, config, seed, streams, out, reps, tolerances, overrides) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            let prepared = match prepare(&cfg) {
                Ok(p) => p,
                Err(e) => return config_error(e),
            };
            let outcome = match execute(&prepared) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("lecam: scenario `{}` failed to run: {e}", cfg.scenario);
                    return ExitCode::from(EXIT_FAIL);
                }
            };
            if let Some(dir) = &cfg.out {
                if let Err(e) = outcome.write_to(dir) {
                    eprintln!("lecam: cannot write outputs to {}: {e}", dir.display());
                    return ExitCode::from(EXIT_FAIL);
                }
            }
            match serde_json::to_string_pretty(&outcome.report) {
                Ok(s) => println!("{s}"),
                Err(e) => {
                    eprintln!("lecam: {e}");
                    return ExitCode::from(EXIT_FAIL);
                }
            }
            if outcome.report.pass {
                ExitCode::SUCCESS
            } else {
                for c in outcome.report.checks.iter().filter(|c| !c.pass) {
                    eprintln!("lecam: check `{}` failed: {} vs threshold {}", c.name, c.value, c.threshold);
                }
                ExitCode::from(EXIT_FAIL)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn overrides_are_split_from_run_flags() {
        let (kept, o) = split_overrides(args("lecam run gshift --seed 3 --noise-c 0.5 --M=128 --out d"));
        assert_eq!(kept, args("lecam run gshift --seed 3 --out d"));
        assert_eq!(o, vec![("noise_c".into(), "0.5".into()), ("M".into(), "128".into())]);
        let (kept, o) = split_overrides(args("lecam list --json"));
        assert_eq!(kept, args("lecam list --json"));
        assert!(o.is_empty());
    }
}
