//! Flat `key = value` run configuration.
//!
//! Values resolve as command-line flags, then the config file, then the
//! command defaults. The resolved map is what a manifest records.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str, origin: &Path) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Parse {
                path: origin.to_path_buf(),
                line: i as u64 + 1,
                msg: format!("expected key = value, got {raw:?}"),
            });
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text, path)
}

impl RunConfig {
    /// Resolves `defaults`, overridden by `file`, overridden by `flags`.
    /// Keys outside `defaults` are rejected.
    pub fn resolve(
        defaults: &[(&str, &str)],
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
    ) -> CliResult<Self> {
        let mut entries: BTreeMap<String, String> =
            defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in file.iter().chain(flags) {
            if !entries.contains_key(k) {
                return Err(CliError::Param(format!("unknown configuration key `{k}`")));
            }
            entries.insert(k.clone(), v.clone());
        }
        Ok(RunConfig { entries })
    }

    pub fn from_entries(entries: BTreeMap<String, String>) -> Self {
        RunConfig { entries }
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn str(&self, key: &str) -> CliResult<&str> {
        self.entries
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Param(format!("missing configuration key `{key}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<T> {
        let v = self.str(key)?;
        v.parse().map_err(|_| CliError::Param(format!("cannot parse `{key}` = {v:?}")))
    }

    /// `true`, `false`, `1`, `0`, `yes`, `no`.
    pub fn flag(&self, key: &str) -> CliResult<bool> {
        match self.str(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            v => Err(CliError::Param(format!("`{key}` must be a boolean, got {v:?}"))),
        }
    }

    /// Real value; `nan` and infinities are rejected.
    pub fn real(&self, key: &str) -> CliResult<f64> {
        let v: f64 = self.get(key)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Param(format!("`{key}` must be finite")))
        }
    }
}

/// `a:b:step` (or a single value) expanded to `a, a + step, ..., <= b`.
pub fn parse_range(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Param(format!("range {spec:?} is not a:b:step"));
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    match parts.as_slice() {
        [a] => Ok(vec![num(a)?]),
        [a, b, s] => {
            let (a, b, s) = (num(a)?, num(b)?, num(s)?);
            if !(s > 0.0) || b < a {
                return Err(bad());
            }
            let n = ((b - a) / s + 1e-9).floor() as usize;
            if n > 50_000_000 {
                return Err(CliError::Param(format!("range {spec:?} has too many points")));
            }
            Ok((0..=n).map(|i| a + i as f64 * s).collect())
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_comments() {
        let file = parse_config_text("# run\nd = 0.3  # memory\nlambda=2\n\n", Path::new("x")).unwrap();
        let mut flags = BTreeMap::new();
        flags.insert("lambda".to_string(), "0.5".to_string());
        let c = RunConfig::resolve(&[("d", "0.1"), ("lambda", "1"), ("seed", "7")], &file, &flags).unwrap();
        assert_eq!(c.real("d").unwrap(), 0.3);
        assert_eq!(c.real("lambda").unwrap(), 0.5);
        assert_eq!(c.get::<u64>("seed").unwrap(), 7);
        let err = parse_config_text("ok = 1\nbroken\n", Path::new("c.cfg")).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }));
        assert!(RunConfig::resolve(&[("d", "0")], &file, &BTreeMap::new()).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_range("3").unwrap(), vec![3.0]);
        assert!(parse_range("1:0:0.1").is_err());
        assert!(parse_range("0:1").is_err());
    }
}
