//! `atomsqueeze` command-line front end.

mod commands;
mod config;
mod error;
mod output;

use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{Arg, ArgMatches};

use config::{normalize_key, parse_config_file, resolve, Command, RunConfig, COMMANDS, RUN_KEYS};
use error::CliError;

const RUN_HELP: [(&str, &str); 3] = [
    ("seed", "RNG seed (required for stochastic commands)"),
    ("format", "output format: csv or json"),
    ("out", "output file (default: stdout)"),
];

fn cli() -> clap::Command {
    let mut app = clap::Command::new("atomsqueeze")
        .version(atomsqueeze::VERSION)
        .about("Squeezed light from a single two-level atom: analytics, simulation and detection budgets")
        .subcommand_required(true);
    for c in COMMANDS {
        let mut sub = clap::Command::new(c.name()).about(c.about()).arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("`key = value` config file"),
        );
        for (name, help) in RUN_HELP {
            sub = sub.arg(
                Arg::new(name)
                    .long(name)
                    .value_name("VALUE")
                    .help(help)
                    .allow_hyphen_values(true),
            );
        }
        for k in c.keys() {
            let help = match k.default {
                Some(d) => format!("{} [default: {d}]", k.help),
                None => k.help.to_string(),
            };
            sub = sub.arg(
                Arg::new(k.name)
                    .long(k.name)
                    .value_name("VALUE")
                    .help(help)
                    .allow_hyphen_values(true),
            );
        }
        app = app.subcommand(sub);
    }
    app
}

fn flag_values(command: Command, m: &ArgMatches) -> BTreeMap<String, String> {
    let names = RUN_KEYS.iter().copied().chain(command.keys().iter().map(|k| k.name));
    names
        .filter(|n| m.value_source(n) == Some(ValueSource::CommandLine))
        .filter_map(|n| m.get_one::<String>(n).map(|v| (normalize_key(n), v.clone())))
        .collect()
}

fn configure(m: &ArgMatches) -> Result<RunConfig, CliError> {
    let (name, sub) = m.subcommand().expect("subcommand required");
    let command = Command::from_name(name).expect("registered subcommand");
    let file = match sub.get_one::<String>("config") {
        Some(path) => parse_config_file(path.as_ref())?,
        None => BTreeMap::new(),
    };
    resolve(command, file, flag_values(command, sub))
}

fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    let report = commands::run(cfg)?;
    let text = output::render(cfg, &report);
    match &cfg.output_path {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>".as_ref(), e)),
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e
                .to_string()
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ")
                .to_string();
            eprintln!("{}", CliError::param_unkeyed(first).diagnostic());
            return ExitCode::from(2);
        }
    };
    match configure(&matches).and_then(|cfg| execute(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
