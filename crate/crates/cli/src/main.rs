mod commands;
mod output;
mod params;

use clap::{Arg, ArgAction, ArgMatches, Command};
use commands::{CmdError, COMMANDS};
use params::{parse_config_file, Config, Param, GLOBAL};
use std::collections::BTreeMap;
use std::process::ExitCode;

fn arg(p: &Param) -> Arg {
    let help = if p.default.is_empty() {
        p.help.to_string()
    } else {
        format!("{} [default: {}]", p.help, p.default)
    };
    Arg::new(p.name)
        .long(p.name)
        .help(help)
        .num_args(0..=1)
        .allow_negative_numbers(true)
        .default_missing_value("true")
        .action(ArgAction::Set)
}

fn cli() -> Command {
    let mut c = Command::new("klab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Numerical experiments with Kloosterman sums modulo primes")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for cmd in &COMMANDS {
        let mut sc = Command::new(cmd.name).about(cmd.about);
        for p in GLOBAL.iter().chain(cmd.params) {
            sc = sc.arg(arg(p));
        }
        c = c.subcommand(sc);
    }
    c
}

fn flags(m: &ArgMatches, specs: &[Param]) -> BTreeMap<String, String> {
    GLOBAL
        .iter()
        .chain(specs)
        .filter(|p| m.value_source(p.name) == Some(clap::parser::ValueSource::CommandLine))
        .filter_map(|p| {
            m.get_one::<String>(p.name)
                .map(|v| (p.name.to_string(), v.clone()))
        })
        .collect()
}

fn fail_usage(msg: &str) -> ExitCode {
    eprintln!("klab: {msg}");
    ExitCode::from(1)
}

fn write_out(path: Option<std::path::PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let cmd = COMMANDS
        .iter()
        .find(|c| c.name == name)
        .expect("registered subcommand");
    let flags = flags(sub, cmd.params);
    let file = match flags.get("config") {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match parse_config_file(&text) {
                Ok(f) => f,
                Err(e) => return fail_usage(&e.0),
            },
            Err(e) => return fail_usage(&format!("cannot read config {path}: {e}")),
        },
        None => BTreeMap::new(),
    };
    let cfg = match Config::resolve(name, cmd.params, &file, &flags) {
        Ok(c) => c,
        Err(e) => return fail_usage(&e.0),
    };
    let format = match cfg.choice("format", &["csv", "json"]) {
        Ok(f) => f,
        Err(e) => return fail_usage(&e.0),
    };
    match cfg.u64("threads") {
        Ok(0) => {}
        Ok(n) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n as usize)
                .build_global()
            {
                return fail_usage(&format!("thread pool: {e}"));
            }
        }
        Err(e) => return fail_usage(&e.0),
    }
    if let Err(e) = cfg.u64("seed") {
        return fail_usage(&e.0);
    }

    let outcome = match (cmd.run)(&cfg) {
        Ok(o) => o,
        Err(CmdError::Usage(m)) => return fail_usage(&m),
        Err(CmdError::Compute(e)) => {
            eprintln!("klab: {e}");
            return ExitCode::from(2);
        }
    };
    let text = if format == "json" {
        outcome.table.to_json(&cfg)
    } else {
        outcome.table.to_csv(&cfg)
    };
    if let Err(e) = write_out(cfg.path("out"), &text) {
        return fail_usage(&format!("cannot write output: {e}"));
    }
    if let Some(p) = cfg.path("emit-plot-data") {
        if let Err(e) = std::fs::write(&p, outcome.table.plot_csv()) {
            return fail_usage(&format!("cannot write plot data: {e}"));
        }
    }
    if outcome.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        for v in &outcome.violations {
            eprintln!("klab: threshold violated: {v}");
        }
        ExitCode::from(2)
    }
}
