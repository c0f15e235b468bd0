//! Command-line front end.
//!
//! Every subcommand resolves its settings from flags, then the optional
//! `--config` TOML file, then built-in defaults. The resolved settings are
//! echoed to stderr before any work and stored verbatim in the run manifest
//! next to the outputs.

mod args;
mod commands;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub use args::Cli;
use args::Command;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cotree::Error),

    #[error("{0}")]
    Usage(String),

    #[error("config {}: {msg}", path.display())]
    Config { path: PathBuf, msg: String },

    #[error("refusing to overwrite {} (pass --force)", .0.display())]
    Exists(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn main() -> ExitCode {
    match run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cotree: error: {}", one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn run(argv: impl IntoIterator<Item = OsString>) -> Result<()> {
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("bad arguments").trim_start_matches("error: ");
            return Err(CliError::Usage(first.to_string()));
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(one_line(&e.to_string())))?;
    let file = match &cli.global.config {
        Some(path) => Some(load_config(path)?),
        None => None,
    };
    let (name, sub) = matches.subcommand().expect("a subcommand is required");

    let top = file.as_ref().map(|(p, t)| (p.as_path(), top_level(t)));
    let global: args::Global = resolve(&cli.global, &matches, top.as_ref().map(|(p, t)| (*p, t)), &["config"])?;
    let section = match &file {
        Some((path, table)) => match table.get(name) {
            Some(toml::Value::Table(t)) => Some((path.as_path(), t.clone())),
            Some(_) => {
                return Err(CliError::Config { path: path.clone(), msg: format!("[{name}] must be a table") });
            }
            None => None,
        },
        None => None,
    };
    let section = section.as_ref().map(|(p, t)| (*p, t));

    macro_rules! dispatch {
        ($args:expr, $run:path) => {{
            let resolved = resolve($args, sub, section, &[])?;
            commands::execute(name, &global, resolved, $run)
        }};
    }
    match &cli.command {
        Command::Entropy(a) => dispatch!(a, commands::entropy),
        Command::BuildTree(a) => dispatch!(a, commands::build_tree),
        Command::Kernel(a) => dispatch!(a, commands::kernel),
        Command::CvWlct(a) => dispatch!(a, commands::cv_wlct),
        Command::CvHrn(a) => dispatch!(a, commands::cv_hrn),
        Command::Bench(a) => dispatch!(a, commands::bench),
        Command::Flops(a) => dispatch!(a, commands::flops),
    }
}

fn load_config(path: &Path) -> Result<(PathBuf, toml::Table)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config {
        path: path.to_path_buf(),
        msg: e.message().to_string(),
    })?;
    Ok((path.to_path_buf(), table))
}

fn top_level(table: &toml::Table) -> toml::Table {
    table.iter().filter(|(_, v)| !v.is_table()).map(|(k, v)| (k.clone(), v.clone())).collect()
}

/// Layers config-file values under the flags the user actually typed.
/// Keys are flag names, with `-` or `_` accepted alike.
fn resolve<T: Serialize + DeserializeOwned>(
    parsed: &T,
    matches: &ArgMatches,
    file: Option<(&Path, &toml::Table)>,
    forbidden: &[&str],
) -> Result<T> {
    let mut value = serde_json::to_value(parsed)?;
    let Some((path, table)) = file else {
        return Ok(serde_json::from_value(value)?);
    };
    let obj: &mut Map<String, Value> = value.as_object_mut().expect("argument structs serialize to objects");
    for (key, v) in table {
        let field = key.replace('-', "_");
        if !obj.contains_key(&field) || forbidden.contains(&field.as_str()) {
            return Err(CliError::Config { path: path.to_path_buf(), msg: format!("unknown key {key:?}") });
        }
        let typed = matches!(matches.value_source(&field), Some(ValueSource::CommandLine | ValueSource::EnvVariable));
        if !typed {
            obj.insert(field, serde_json::to_value(v)?);
        }
    }
    if let Err(e) = serde_json::from_value::<T>(value.clone()) {
        // name the first key that breaks deserialization on its own
        let base = serde_json::to_value(parsed)?;
        let culprit = table.iter().find(|(key, v)| {
            let mut probe = base.clone();
            probe[key.replace('-', "_")] = serde_json::to_value(v).unwrap_or(Value::Null);
            serde_json::from_value::<T>(probe).is_err()
        });
        let msg = match culprit {
            Some((key, _)) => format!("key {key:?}: {e}"),
            None => e.to_string(),
        };
        return Err(CliError::Config { path: path.to_path_buf(), msg });
    }
    Ok(serde_json::from_value(value)?)
}
