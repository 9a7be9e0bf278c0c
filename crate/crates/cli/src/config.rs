//! `key = value` config files merged underneath command-line flags.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};

/// Flags that exclude each other; a flag given on the command line drops every
/// member of its group from the file.
const EXCLUSIVE: &[&[&str]] = &[&["Na", "squeeze-db"], &["scenario", "topology"]];

fn config_path(args: &[OsString]) -> Result<Option<String>> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            let path = it.next().context("--config needs a file path")?;
            return Ok(Some(path.to_string_lossy().into_owned()));
        }
        if let Some(path) = a.strip_prefix("--config=") {
            return Ok(Some(path.to_string()));
        }
    }
    Ok(None)
}

/// Parses `key = value` lines. `#` starts a comment; keys are flag names
/// without the leading dashes, with `_` accepted for `-`.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`", i + 1);
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            bail!("config line {}: empty key or value", i + 1);
        }
        if key == "config" {
            bail!(
                "config line {}: nested config files are not supported",
                i + 1
            );
        }
        out.push((key, value.to_string()));
    }
    Ok(out)
}

fn flag_name(arg: &str) -> Option<&str> {
    let name = arg.strip_prefix("--")?;
    Some(name.split_once('=').map_or(name, |(n, _)| n))
}

/// Rewrites `argv` so that entries from the `--config` file come right after
/// the subcommand, ahead of the user's own flags. Clap keeps the last
/// occurrence of a flag, so command-line values win.
pub fn expand_args(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    if argv.len() < 2 {
        return Ok(argv);
    }
    let Some(path) = config_path(&argv[2..])? else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    let entries = parse_config(&text).with_context(|| format!("in {path}"))?;

    let given: Vec<String> = argv[2..]
        .iter()
        .filter_map(|a| flag_name(&a.to_string_lossy()).map(str::to_string))
        .collect();
    let shadowed = |key: &str| {
        EXCLUSIVE.iter().any(|group| {
            group.contains(&key)
                && group
                    .iter()
                    .any(|g| *g != key && given.iter().any(|x| x == g))
        })
    };

    let mut out: Vec<OsString> = argv[..2].to_vec();
    for (key, value) in entries {
        if shadowed(&key) {
            continue;
        }
        out.push(format!("--{key}").into());
        out.push(value.into());
    }
    out.extend(argv[2..].iter().cloned());
    Ok(out)
}
