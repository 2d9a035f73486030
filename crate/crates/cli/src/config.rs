//! Flat INI-style experiment configuration.
//!
//! The format is deliberately minimal and diff-friendly: `[section]` headers,
//! `key = value` lines, `#` comments, blank lines ignored. Values are plain
//! strings; typed access with defaults lives on [`Section`]. Example:
//!
//! ```text
//! [experiment]
//! kind = ppa_run
//! out = traces/skew
//!
//! [ppa]
//! operator = skew2
//! kernel = sep_power:p=4
//! lambda = 1.0
//! x0 = 5, 1
//! ```

use crate::Error;
use std::collections::BTreeMap;
use std::path::Path;

/// A parsed configuration file: ordered sections of key–value pairs.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    /// Parses configuration text; errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.split_once('#') {
                Some((before, _)) => before.trim(),
                None => raw.trim(),
            };
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        Error::Config(format!("line {}: unterminated section header", lineno + 1))
                    })?
                    .trim();
                if name.is_empty() {
                    return Err(Error::Config(format!(
                        "line {}: empty section name",
                        lineno + 1
                    )));
                }
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                ))
            })?;
            let section = current.as_ref().ok_or_else(|| {
                Error::Config(format!(
                    "line {}: key `{}` outside any [section]",
                    lineno + 1,
                    key.trim()
                ))
            })?;
            sections
                .get_mut(section)
                .unwrap()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { sections })
    }

    pub fn from_path(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Borrowed view of a section; an absent section behaves as empty, so
    /// every key falls back to its default.
    pub fn section<'a>(&'a self, name: &'a str) -> Section<'a> {
        Section {
            name,
            map: self.sections.get(name),
        }
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }
}

/// Typed access to one section's keys.
#[derive(Debug, Clone, Copy)]
pub struct Section<'a> {
    name: &'a str,
    map: Option<&'a BTreeMap<String, String>>,
}

impl<'a> Section<'a> {
    pub fn get(&self, key: &str) -> Option<&'a str> {
        self.map.and_then(|m| m.get(key)).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&'a str, Error> {
        self.get(key).ok_or_else(|| {
            Error::Config(format!("missing key `{key}` in section [{}]", self.name))
        })
    }

    fn parse_value<T: std::str::FromStr>(&self, key: &str, raw: &str) -> Result<T, Error> {
        raw.parse().map_err(|_| {
            Error::Config(format!(
                "key `{key}` in section [{}]: cannot parse `{raw}`",
                self.name
            ))
        })
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64, Error> {
        match self.get(key) {
            Some(raw) => self.parse_value(key, raw),
            None => Ok(default),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize, Error> {
        match self.get(key) {
            Some(raw) => self.parse_value(key, raw),
            None => Ok(default),
        }
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64, Error> {
        match self.get(key) {
            Some(raw) => self.parse_value(key, raw),
            None => Ok(default),
        }
    }

    /// Comma-separated list of floats, e.g. `x0 = 5, 1`.
    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, Error> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|part| self.parse_value(key, part.trim()))
                .collect::<Result<Vec<f64>, Error>>()
                .map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_types() {
        let text = "\n# leading comment\n[experiment]\nkind = ppa_run  # trailing\nseed = 9\n\n[ppa]\nlambda = 0.5\nx0 = 5, 1\n";
        let cfg = ConfigFile::parse(text).unwrap();
        assert_eq!(cfg.section("experiment").require("kind").unwrap(), "ppa_run");
        assert_eq!(cfg.section("experiment").get_u64("seed", 0).unwrap(), 9);
        assert_eq!(cfg.section("ppa").get_f64("lambda", 1.0).unwrap(), 0.5);
        assert_eq!(
            cfg.section("ppa").get_f64_list("x0").unwrap().unwrap(),
            vec![5.0, 1.0]
        );
        // Absent keys fall back to defaults; absent sections act empty.
        assert_eq!(cfg.section("ppa").get_f64("eps0", 0.25).unwrap(), 0.25);
        assert!(cfg.section("nope").get("kind").is_none());
        assert!(!cfg.has_section("nope"));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("[unterminated\n").is_err());
        assert!(ConfigFile::parse("[s]\njust words\n").is_err());
        assert!(ConfigFile::parse("key = before any section\n").is_err());
        assert!(ConfigFile::parse("[]\n").is_err());
    }

    #[test]
    fn typed_errors_name_key_and_section() {
        let cfg = ConfigFile::parse("[ppa]\nlambda = fast\n").unwrap();
        let err = cfg.section("ppa").get_f64("lambda", 1.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lambda") && msg.contains("[ppa]"), "{msg}");
    }
}
