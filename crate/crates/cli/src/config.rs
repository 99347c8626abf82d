//! `key = value` experiment configs, one entry per line, `#` starts a comment.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}` for this command (allowed: {allowed})")]
    UnknownKey { line: usize, key: String, allowed: String },
    #[error("line {line}: key `{key}` already set on line {first}")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Clone, Debug)]
pub struct Config {
    text: String,
    entries: BTreeMap<String, Entry>,
}

impl Config {
    /// Parses `text`, rejecting keys outside `allowed`.
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Config, ConfigError> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(ConfigError::Syntax { line, text: body.to_string() });
            };
            let (key, value) = (k.trim(), v.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax { line, text: body.to_string() });
            }
            if !allowed.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                    allowed: allowed.join(", "),
                });
            }
            if let Some(first) = entries.get(key) {
                return Err(ConfigError::Duplicate { line, key: key.to_string(), first: first.line });
            }
            entries.insert(key.to_string(), Entry { value: value.to_string(), line });
        }
        Ok(Config { text: text.to_string(), entries })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    fn parse_one<T: FromStr>(&self, key: &str, e: &Entry, raw: &str) -> Result<T, ConfigError> {
        raw.trim().parse::<T>().map_err(|_| ConfigError::Value {
            line: e.line,
            key: key.to_string(),
            message: format!("cannot parse `{}` as {}", raw.trim(), std::any::type_name::<T>()),
        })
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => self.parse_one(key, e, &e.value).map(Some),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.opt(key)?.ok_or_else(|| ConfigError::Missing { key: key.to_string() })
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(e) = self.entries.get(key) else { return Ok(None) };
        e.value.split(',').map(|x| self.parse_one(key, e, x)).collect::<Result<_, _>>().map(Some)
    }

    pub fn require_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError> {
        let v = self.list(key)?.ok_or_else(|| ConfigError::Missing { key: key.to_string() })?;
        if v.is_empty() {
            return Err(ConfigError::Missing { key: key.to_string() });
        }
        Ok(v)
    }

    /// Value of `key` checked against `pred`, with the line number in the error.
    pub fn check<T: FromStr + Copy>(
        &self,
        key: &str,
        default: T,
        pred: impl Fn(T) -> bool,
        what: &str,
    ) -> Result<T, ConfigError> {
        let v = self.get(key, default)?;
        if pred(v) {
            return Ok(v);
        }
        Err(match self.entries.get(key) {
            Some(e) => ConfigError::Value { line: e.line, key: key.to_string(), message: what.to_string() },
            None => ConfigError::Invalid { key: key.to_string(), message: what.to_string() },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: &[&str] = &["a", "eps", "name"];

    #[test]
    fn comments_and_blank_lines() {
        let c = Config::parse("# header\n\na = 3 # trailing\nname=sphere\n", KEYS).unwrap();
        assert_eq!(c.get("a", 0usize).unwrap(), 3);
        assert_eq!(c.require::<String>("name").unwrap(), "sphere");
        assert_eq!(c.get("eps", 0.5).unwrap(), 0.5);
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let e = Config::parse("a = 1\n\nbogus = 2\n", KEYS).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { line: 3, .. }), "{e}");
    }

    #[test]
    fn duplicates_and_syntax() {
        let e = Config::parse("a = 1\na = 2\n", KEYS).unwrap_err();
        assert_eq!(e, ConfigError::Duplicate { line: 2, key: "a".into(), first: 1 });
        assert!(matches!(Config::parse("a 1\n", KEYS), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(Config::parse("a =\n", KEYS), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn lists_and_bad_values() {
        let c = Config::parse("eps = 0.05, 0.1,0.2\na = x\n", KEYS).unwrap();
        assert_eq!(c.list::<f64>("eps").unwrap().unwrap(), vec![0.05, 0.1, 0.2]);
        assert!(matches!(c.get("a", 1usize), Err(ConfigError::Value { line: 2, .. })));
        assert!(matches!(c.require_list::<f64>("name"), Err(ConfigError::Missing { .. })));
        let r = c.check("eps", 1.0, |x: f64| x > 0.0, "must be positive");
        assert!(r.is_err(), "a list does not parse as one number");
    }
}
