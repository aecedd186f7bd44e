//! Optional `key = value` configuration file. Keys are long flag names (with `-` or
//! `_`); values are spliced into the argument list ahead of the real flags, so flags
//! given on the command line win.

use std::collections::BTreeMap;
use std::path::Path;

use clap::Command;

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key = value", n + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", n + 1));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Removes `--config PATH` / `--config=PATH` from `args` and returns the path.
pub fn take_config_flag(args: &mut Vec<String>) -> Result<Option<String>, String> {
    let mut found = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                return Err("--config needs a path".into());
            }
            found = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            found = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(found)
}

/// Inserts config entries as flags right after the subcommand name. Keys unknown to the
/// chosen subcommand are skipped if another subcommand accepts them and rejected
/// otherwise.
pub fn splice_config(args: &mut Vec<String>, config: &BTreeMap<String, String>, cmd: &Command) -> Result<(), String> {
    let Some(pos) = args.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 1) else {
        return Ok(());
    };
    let Some(sub) = cmd.find_subcommand(&args[pos]) else {
        return Ok(());
    };
    let known_anywhere = |key: &str| {
        cmd.get_subcommands().any(|s| s.get_arguments().any(|a| a.get_long() == Some(key)))
    };
    let mut extra = Vec::new();
    for (key, value) in config {
        match sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) {
            Some(arg) if arg.get_action().takes_values() => extra.push(format!("--{key}={value}")),
            Some(_) => match value.as_str() {
                "true" | "1" | "yes" => extra.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                _ => return Err(format!("config key '{key}' is a switch; use true or false")),
            },
            None if known_anywhere(key) => {}
            None => return Err(format!("unknown config key '{key}'")),
        }
    }
    args.splice(pos + 1..pos + 1, extra);
    Ok(())
}
