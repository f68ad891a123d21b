use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use tflp::commands::{self, CommandSpec, COMMANDS};
use tflp::config::{read_config_file, RunConfig};
use tflp::ensemble::{pool, THREADS_ENV};
use tflp::manifest::Manifest;
use tflp::{exit, CliError, CliResult};

fn subcommand(spec: &CommandSpec) -> Command {
    let mut cmd = Command::new(spec.name)
        .about(spec.about)
        .arg(
            Arg::new(spec.positional)
                .value_parser(spec.choices.to_vec())
                .help(format!("one of {}", spec.choices.join(", "))),
        )
        .arg(Arg::new("config").long("config").value_name("FILE").help("key = value defaults, overridden by flags"));
    for (key, default) in spec.defaults.iter().skip(1) {
        cmd = cmd.arg(Arg::new(*key).long(*key).value_name("VALUE").allow_hyphen_values(true).help(format!("default: {default}")));
    }
    cmd
}

fn cli() -> Command {
    let mut app = Command::new("tflp")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Tempered fractional Lévy processes: simulation, analytics and verification")
        .subcommand_required(true)
        .arg(
            Arg::new("threads")
                .long("threads")
                .global(true)
                .value_name("N")
                .value_parser(clap::value_parser!(usize))
                .help(format!("worker threads (default: {THREADS_ENV} or all cores)")),
        );
    for spec in COMMANDS {
        app = app.subcommand(subcommand(spec));
    }
    app.subcommand(
        Command::new("replay")
            .about("Re-run the configuration recorded in a manifest")
            .arg(Arg::new("manifest").required(true).value_name("MANIFEST"))
            .arg(Arg::new("out").long("out").value_name("PATH").help("write to this path instead")),
    )
    .arg(Arg::new("quiet").long("quiet").short('q').global(true).action(ArgAction::SetTrue))
}

fn resolve(spec: &CommandSpec, m: &ArgMatches) -> CliResult<RunConfig> {
    let file = match m.get_one::<String>("config") {
        Some(path) => read_config_file(&PathBuf::from(path))?,
        None => BTreeMap::new(),
    };
    let mut flags = BTreeMap::new();
    for (key, _) in spec.defaults {
        if let Some(v) = m.get_one::<String>(key) {
            flags.insert(key.to_string(), v.clone());
        }
    }
    RunConfig::resolve(spec.defaults, &file, &flags)
}

fn run(m: &ArgMatches) -> CliResult<i32> {
    let threads = m.get_one::<usize>("threads").copied();
    let workers = pool(threads)?;
    let (name, sub) = m.subcommand().expect("subcommand is required");
    let (command, cfg) = if name == "replay" {
        let manifest = Manifest::read(&PathBuf::from(sub.get_one::<String>("manifest").unwrap()))?;
        let mut cfg = RunConfig::from_entries(manifest.config);
        if let Some(out) = sub.get_one::<String>("out") {
            cfg.set("out", out.clone());
        }
        (manifest.command, cfg)
    } else {
        (name.to_string(), resolve(commands::command_spec(name)?, sub)?)
    };
    let outcome = commands::run(&command, &cfg, &workers)?;
    if !m.get_flag("quiet") {
        print!("{}", outcome.report);
    }
    if outcome.failed_checks > 0 {
        return Err(CliError::VerifyFailed(outcome.failed_checks));
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let m = cli().get_matches_from(std::env::args_os());
    match run(&m) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("tflp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
