use std::ffi::OsString;
use std::path::Path;

use aagcn::data_io::SyntheticSpec;
use clap::CommandFactory;

use crate::args::Cli;

/// Splices the `key = value` lines of a `--config` file into `argv` right
/// after the subcommand, so any flag given on the command line comes later
/// and wins. Keys are long flag names, with `_` or `-`.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("--config: cannot read {}: {e}", path.display()))?;
    let sub = argv[1].to_string_lossy().into_owned();
    let cmd = Cli::command();
    let sub_cmd = cmd
        .find_subcommand(&sub)
        .ok_or_else(|| format!("--config given without a known subcommand (got `{sub}`)"))?;

    let mut flags = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), idx + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}: expected `key = value`, got `{line}`", at()))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let arg = sub_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .filter(|_| key != "config")
            .ok_or_else(|| format!("{}: `{key}` is not an option of `{sub}`", at()))?;
        if matches!(arg.get_action(), clap::ArgAction::SetTrue) {
            match value {
                "true" => flags.push(OsString::from(format!("--{key}"))),
                "false" => {}
                other => return Err(format!("{}: `{key}` must be true or false, got `{other}`", at())),
            }
        } else {
            flags.push(OsString::from(format!("--{key}={value}")));
        }
    }
    let mut out = Vec::with_capacity(argv.len() + flags.len());
    out.extend(argv[..2].iter().cloned());
    out.extend(flags);
    out.extend(argv[2..].iter().cloned());
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<std::path::PathBuf> {
    if argv.len() < 2 {
        return None;
    }
    let mut found = None;
    let mut it = argv[2..].iter();
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--" {
            break;
        }
        if a == "--config" {
            found = it.next().map(|p| Path::new(p).to_path_buf());
        } else if let Some(p) = a.strip_prefix("--config=") {
            found = Some(Path::new(p).to_path_buf());
        }
    }
    found
}

/// Applies comma-separated `key=value` overrides to `base`.
pub fn parse_synthetic(text: &str, base: SyntheticSpec) -> Result<SyntheticSpec, String> {
    let mut spec = base;
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("--synthetic: expected `key=value`, got `{part}`"))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = || format!("--synthetic: invalid value `{value}` for `{key}`");
        match key {
            "nodes" => spec.num_nodes = value.parse().map_err(|_| bad())?,
            "communities" => spec.num_communities = value.parse().map_err(|_| bad())?,
            "intra" => spec.intra_prob = value.parse().map_err(|_| bad())?,
            "inter" => spec.inter_prob = value.parse().map_err(|_| bad())?,
            "features" => spec.num_features = value.parse().map_err(|_| bad())?,
            "signal" => spec.signal = value.parse().map_err(|_| bad())?,
            "one_way" => spec.one_way_inter = value.parse().map_err(|_| bad())?,
            "seed" => spec.seed = value.parse().map_err(|_| bad())?,
            _ => return Err(format!("--synthetic: unknown key `{key}`")),
        }
    }
    spec.validate().map_err(|e| format!("--synthetic: {e}"))?;
    Ok(spec)
}
