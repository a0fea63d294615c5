//! Flat `key = value` option files.
//!
//! Every key is a long flag name without the dashes (`k = 20`,
//! `beta-threshold = 150`, underscores also accepted). `true` turns a switch
//! on, `false` leaves it off. Lines starting with `#` are ignored. The
//! options are spliced in before the command-line flags, so a flag given
//! on the command line wins.

use std::fs;
use std::path::Path;

use crate::{Error, Result};

pub fn parse(text: &str, path: &Path) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, i + 1, format!("expected `key = value`, got {line:?}")))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key.starts_with('-') {
            return Err(Error::parse(path, i + 1, format!("bad key {key:?}")));
        }
        if key == "config" {
            return Err(Error::parse(path, i + 1, "config files cannot include other config files"));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value.trim_matches('"').to_string());
            }
        }
    }
    Ok(args)
}

pub fn read(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, path)
}

/// Replaces `--config FILE` (or `--config=FILE`) after the subcommand with
/// the file's options, placed directly after the subcommand name.
pub fn expand(args: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            match it.next() {
                Some(p) => config = Some(p),
                None => return Err(Error::Invalid("--config needs a file path".into())),
            }
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(config) = config else {
        return Ok(rest);
    };
    let extra = read(Path::new(&config))?;
    // Program name, then the first non-flag word is the subcommand.
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(rest.len());
    let mut out = rest[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_pairs_switches_and_comments() {
        let text = "# fit settings\nk = 20\nbeta_threshold = 150\nwith-theta = true\nquiet = false\n\nout = \"m.json\"\n";
        let args = parse(text, Path::new("x")).unwrap();
        assert_eq!(args, s(&["--k", "20", "--beta-threshold", "150", "--with-theta", "--out", "m.json"]));
    }

    #[test]
    fn reports_line_of_bad_entry() {
        let err = parse("k = 2\nnonsense\n", Path::new("opts.conf")).unwrap_err();
        assert!(err.to_string().starts_with("opts.conf:2:"));
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(&path, "k = 4\n").unwrap();
        let args = s(&["dstm", "fit", "--config", path.to_str().unwrap(), "--k", "9"]);
        assert_eq!(expand(args).unwrap(), s(&["dstm", "fit", "--k", "4", "--k", "9"]));
    }
}
