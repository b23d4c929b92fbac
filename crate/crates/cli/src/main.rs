mod commands;
mod config;
mod output;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches};

use commands::{Command, COMMANDS};
use config::{env_name, ConfigError, Resolved};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NotConverged(String),
    Validation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::NotConverged(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::NotConverged(m) => write!(f, "not converged: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("output error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("output error: {e}"))
    }
}

fn is_switch(default: &str) -> bool {
    default == "false"
}

fn subcommand(cmd: &Command) -> clap::Command {
    let mut sub = clap::Command::new(cmd.name).about(cmd.about);
    for key in cmd.keys {
        let help = if key.default.is_empty() {
            key.help.to_owned()
        } else {
            format!("{} [default: {}]", key.help, key.default)
        };
        let arg = Arg::new(key.name).long(key.name).env(env_name(key.name)).help(help);
        sub = sub.arg(if is_switch(key.default) {
            arg.action(ArgAction::SetTrue)
        } else {
            arg.value_name("VALUE").action(ArgAction::Set)
        });
    }
    sub
}

fn cli() -> clap::Command {
    let global = |a: Arg| a.global(true);
    clap::Command::new("glassydicke")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Disordered multi-qubit cavity model: exact oracle, replica-symmetric phases, Monte Carlo")
        .subcommand_required(true)
        .arg(global(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .value_parser(clap::value_parser!(PathBuf))
                .help("key=value file; an earlier output is accepted and replays that run"),
        ))
        .arg(global(
            Arg::new("out")
                .long("out")
                .value_name("PATH")
                .value_parser(clap::value_parser!(PathBuf))
                .help("write the result here instead of stdout"),
        ))
        .arg(global(
            Arg::new("threads")
                .long("threads")
                .value_name("N")
                .env("GLASSYDICKE_THREADS")
                .default_value("0")
                .value_parser(clap::value_parser!(usize))
                .help("worker threads; 0 uses every core. Results do not depend on it"),
        ))
        .subcommands(COMMANDS.iter().map(subcommand))
}

/// Values set on the command line or through the environment.
fn overrides(cmd: &Command, m: &ArgMatches) -> BTreeMap<&'static str, String> {
    let mut out = BTreeMap::new();
    for key in cmd.keys {
        if !matches!(
            m.value_source(key.name),
            Some(ValueSource::CommandLine | ValueSource::EnvVariable)
        ) {
            continue;
        }
        let value = if is_switch(key.default) {
            m.get_flag(key.name).to_string()
        } else {
            m.get_one::<String>(key.name).cloned().unwrap_or_default()
        };
        out.insert(key.name, value);
    }
    out
}

fn run(m: &ArgMatches) -> Result<(), CliError> {
    let (name, sub) = m.subcommand().expect("subcommand is required");
    let cmd = COMMANDS.iter().find(|c| c.name == name).expect("registered subcommand");

    let threads = *sub.get_one::<usize>("threads").expect("has default");
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;

    let (file, origin) = match sub.get_one::<PathBuf>("config") {
        Some(path) => (config::read_file(path)?, path.display().to_string()),
        None => (BTreeMap::new(), String::new()),
    };
    let mut resolved = Resolved::new(cmd.name, cmd.keys, file, &origin, &overrides(cmd, sub))?;
    resolved.canonicalize(cmd.reals, cmd.lists)?;

    let out_path = sub.get_one::<PathBuf>("out");
    let mut out = output::open(out_path.map(|p| p.as_path()))
        .map_err(|e| CliError::Usage(format!("cannot open output: {e}")))?;
    let result = (cmd.run)(&resolved, &mut out);
    out.flush()?;
    result
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_mapping() {
        let not_converged: CliError = glassydicke::Error::NotConverged { context: "x".into() }.into();
        assert_eq!(not_converged.code(), 2);
        let invalid: CliError = glassydicke::Error::Capacity { n: 30, max: 24 }.into();
        assert_eq!(invalid.code(), 1);
        assert_eq!(CliError::Validation(String::new()).code(), 3);
    }

    #[test]
    fn command_table_is_consistent() {
        cli().debug_assert();
        for cmd in COMMANDS {
            for name in cmd.reals.iter().chain(cmd.lists) {
                assert!(cmd.keys.iter().any(|k| k.name == *name), "{}: {name}", cmd.name);
            }
            let mut names: Vec<_> = cmd.keys.iter().map(|k| k.name).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), cmd.keys.len(), "{}", cmd.name);
        }
    }
}
