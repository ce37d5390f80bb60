//! Flat key=value configuration with bracketed section headers. No nesting;
//! values are scalars, comma-separated lists, or `a:b` arclength intervals.
//! Every accessor error names the section and key it came from.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    return Err(ConfigError(format!(
                        "line {}: malformed section header '{raw}'",
                        lineno + 1
                    )));
                }
                current = line[1..line.len() - 1].trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    lineno + 1
                )));
            };
            if current.is_empty() {
                return Err(ConfigError(format!(
                    "line {}: key '{}' appears before any [section]",
                    lineno + 1,
                    key.trim()
                )));
            }
            sections
                .get_mut(&current)
                .unwrap()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { sections })
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn get(&self, section: &str, key: &str) -> Result<&str, ConfigError> {
        self.sections
            .get(section)
            .ok_or_else(|| ConfigError(format!("missing section [{section}]")))?
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| ConfigError(format!("[{section}] missing key '{key}'")))
    }

    pub fn get_or<'a>(&'a self, section: &str, key: &str, default: &'a str) -> &'a str {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|s| s.as_str())
            .unwrap_or(default)
    }

    pub fn maybe(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(|s| s.as_str())
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        let raw = self.get(section, key)?;
        raw.parse()
            .map_err(|_| ConfigError(format!("[{section}] key '{key}': '{raw}' is not a number")))
    }

    pub fn get_f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.maybe(section, key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                ConfigError(format!("[{section}] key '{key}': '{raw}' is not a number"))
            }),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<usize, ConfigError> {
        let raw = self.get(section, key)?;
        raw.parse().map_err(|_| {
            ConfigError(format!("[{section}] key '{key}': '{raw}' is not an integer"))
        })
    }

    pub fn get_usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.maybe(section, key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                ConfigError(format!("[{section}] key '{key}': '{raw}' is not an integer"))
            }),
        }
    }

    /// Comma-separated list of numbers.
    pub fn get_f64_list(&self, section: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
        let raw = self.get(section, key)?;
        raw.split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    ConfigError(format!(
                        "[{section}] key '{key}': '{}' is not a number",
                        s.trim()
                    ))
                })
            })
            .collect()
    }

    pub fn get_usize_list(&self, section: &str, key: &str) -> Result<Vec<usize>, ConfigError> {
        let raw = self.get(section, key)?;
        raw.split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    ConfigError(format!(
                        "[{section}] key '{key}': '{}' is not an integer",
                        s.trim()
                    ))
                })
            })
            .collect()
    }

    /// Comma-separated list of `a:b` arclength intervals.
    pub fn get_arcs(&self, section: &str, key: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
        let raw = self.get(section, key)?;
        raw.split(',')
            .map(|piece| {
                let piece = piece.trim();
                let Some((a, b)) = piece.split_once(':') else {
                    return Err(ConfigError(format!(
                        "[{section}] key '{key}': arc '{piece}' is not 'start:end'"
                    )));
                };
                let a: f64 = a.trim().parse().map_err(|_| {
                    ConfigError(format!("[{section}] key '{key}': '{a}' is not a number"))
                })?;
                let b: f64 = b.trim().parse().map_err(|_| {
                    ConfigError(format!("[{section}] key '{key}': '{b}' is not a number"))
                })?;
                Ok((a, b))
            })
            .collect()
    }
}
