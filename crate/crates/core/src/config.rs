//! Flat `key = value` configuration text.
//!
//! ```text
//! # comment
//! [drive]
//! kappa1 = 0.05        # same as `drive.kappa1 = 0.05`
//! material.zeta = 6.1e14
//! ```
//!
//! A `[section]` line prefixes the keys that follow it until the next header.
//! Keys are unique; later CLI overrides replace file values.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::material::{diamond_default, MaterialModel, MATERIAL_KEYS};

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    /// Source line, 0 for values set programmatically.
    line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.split('.')
            .all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, format!("unterminated section header `{body}`")))?
                    .trim();
                if !valid_key(name) {
                    return Err(err(line, format!("invalid section name `{name}`")));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, got `{body}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if !valid_key(k) {
                return Err(err(line, format!("invalid key `{k}`")));
            }
            if v.is_empty() {
                return Err(err(line, format!("key `{k}` has no value")));
            }
            let key = if section.is_empty() {
                k.to_string()
            } else {
                format!("{section}.{k}")
            };
            if let Some(prev) = cfg.entries.get(&key) {
                return Err(err(
                    line,
                    format!("duplicate key `{key}` (first set on line {})", prev.line),
                ));
            }
            cfg.entries.insert(
                key,
                Entry {
                    value: v.to_string(),
                    line,
                },
            );
        }
        Ok(cfg)
    }

    /// Inserts or replaces a value.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: 0,
            },
        );
    }

    /// Parses a `key=value` override.
    pub fn set_assignment(&mut self, text: &str) -> Result<()> {
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| err(0, format!("override `{text}` is not `key=value`")))?;
        let k = k.trim();
        if !valid_key(k) {
            return Err(err(0, format!("invalid key `{k}`")));
        }
        self.set(k, v.trim());
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn parse_with<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .ok_or_else(|| err(e.line, format!("key `{key}`: expected {what}, got `{}`", e.value))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_with(key, "a finite number", |s| {
            s.parse::<f64>().ok().filter(|v| v.is_finite())
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self
            .parse_with(key, "a non-negative integer", |s| s.parse::<usize>().ok())?
            .unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self
            .parse_with(key, "true or false", |s| match s {
                "true" | "yes" | "on" | "1" => Some(true),
                "false" | "no" | "off" | "0" => Some(false),
                _ => None,
            })?
            .unwrap_or(default))
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.str(key).unwrap_or(default)
    }

    /// Comma-separated numbers.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.parse_with(key, "a comma-separated list of numbers", parse_list)
    }

    /// `start:stop:step` (inclusive) or a comma-separated list.
    pub fn grid(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.parse_with(key, "`start:stop:step` or a list of numbers", parse_grid)
    }

    /// Error for `key` with its source line.
    pub fn error(&self, key: &str, message: impl Into<String>) -> Error {
        err(self.line_of(key), format!("key `{key}`: {}", message.into()))
    }

    /// Rejects keys not matched by `allowed`. A pattern ending in `.*`
    /// admits a whole section.
    pub fn check_known(&self, allowed: &[&str]) -> Result<()> {
        for (k, e) in &self.entries {
            let ok = allowed.iter().any(|p| match p.strip_suffix(".*") {
                Some(prefix) => k.strip_prefix(prefix).is_some_and(|r| r.starts_with('.')),
                None => p == k,
            });
            if !ok {
                return Err(err(e.line, format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }

    /// Sorted `key = value` lines; identical configs give identical text.
    pub fn canonical(&self) -> String {
        self.entries
            .iter()
            .map(|(k, e)| format!("{k} = {}\n", e.value))
            .collect()
    }
}

pub fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

pub fn parse_grid(s: &str) -> Option<Vec<f64>> {
    if !s.contains(':') {
        return parse_list(s);
    }
    let parts = parse_list(&s.replace(':', ","))?;
    let [start, stop, step] = parts[..] else {
        return None;
    };
    if !(step > 0.0) || stop < start {
        return None;
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return None;
    }
    Some((0..=n).map(|i| start + step * i as f64).collect())
}

/// Diamond defaults with `material.<key>` overrides (SI, rates in rad/s).
pub fn material_from_config(cfg: &Config) -> Result<MaterialModel<f64>> {
    let mut m = diamond_default::<f64>();
    for key in MATERIAL_KEYS {
        let full = format!("material.{key}");
        if let Some(v) = cfg.f64(&full)? {
            m.set(key, v);
        }
    }
    m.validate().map_err(|e| {
        let key = match &e {
            Error::InvalidMaterial { name, .. } => format!("material.{name}"),
            _ => String::new(),
        };
        err(cfg.line_of(&key), e.to_string())
    })?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_comments_and_lines() {
        let text = "# header\nzeta_note = x\n[drive]\nkappa1 = 0.05 # inline\n\nmaterial.rho = 3000\n";
        let cfg = Config::parse(text).unwrap();
        assert_eq!(cfg.f64("drive.kappa1").unwrap(), Some(0.05));
        assert_eq!(cfg.line_of("drive.kappa1"), 4);
        assert!(cfg.contains("drive.material.rho"));
        assert_eq!(cfg.str("zeta_note"), Some("x"));
    }

    #[test]
    fn diagnostics_carry_lines() {
        let e = Config::parse("a = 1\nbroken line\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        let e = Config::parse("a = 1\na = 2\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        let cfg = Config::parse("x = 1\n[gate]\nfock = abc\n").unwrap();
        let e = cfg.usize_or("gate.fock", 3).unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }), "{e}");
        let e = cfg.check_known(&["gate.*"]).unwrap_err();
        assert!(e.to_string().contains("unknown key `x`"));
        assert!(cfg.check_known(&["x", "gate.*"]).is_ok());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("5:7:1"), Some(vec![5.0, 6.0, 7.0]));
        assert_eq!(parse_grid("1, 2.5"), Some(vec![1.0, 2.5]));
        assert_eq!(parse_grid("5:4:1"), None);
        assert_eq!(parse_grid("5:6:0"), None);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap().len(), 3);
    }

    #[test]
    fn material_overrides_and_validation() {
        let cfg = Config::parse("material.zeta = 3.8e15\n").unwrap();
        let m = material_from_config(&cfg).unwrap();
        assert_eq!(m.zeta, 3.8e15);
        let bad = Config::parse("\nmaterial.v_l = 1000\n").unwrap();
        let e = material_from_config(&bad).unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }), "{e}");
    }

    #[test]
    fn canonical_is_order_free() {
        let a = Config::parse("b = 2\na = 1\n").unwrap();
        let b = Config::parse("a = 1\n\nb = 2\n").unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
