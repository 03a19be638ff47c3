//! Flat `key = value` files split into `[section]`s. Every value remembers
//! its line so diagnostics can point at it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}: {}", self.path.display(), self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

#[derive(Debug, Clone)]
pub struct Config {
    path: PathBuf,
    sections: BTreeMap<String, Section>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.into(),
            line: None,
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let err = |line: usize, message: String| ConfigError {
            path: path.into(),
            line: Some(line),
            message,
        };
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, format!("unterminated section header `{content}`")))?
                    .trim();
                if name.is_empty() || name.contains(['[', ']', '.']) {
                    return Err(err(line, format!("bad section name `{name}`; sections do not nest")));
                }
                if let Some(s) = sections.get(name) {
                    return Err(err(line, format!("section [{name}] already opened on line {}", s.line)));
                }
                sections.insert(
                    name.into(),
                    Section {
                        name: name.into(),
                        line,
                        entries: BTreeMap::new(),
                    },
                );
                current = Some(name.into());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(err(line, "missing key before `=`".into()));
            }
            let name = current
                .as_ref()
                .ok_or_else(|| err(line, format!("`{key}` appears before any [section]")))?;
            let section = sections.get_mut(name).expect("current section exists");
            if let Some(prev) = section.entries.get(key) {
                return Err(err(line, format!("`{key}` already set on line {}", prev.line)));
            }
            section.entries.insert(
                key.into(),
                Entry {
                    value: value.into(),
                    line,
                },
            );
        }
        Ok(Self {
            path: path.into(),
            sections,
        })
    }

    pub fn section(&self, name: &str) -> Option<View<'_>> {
        self.sections.get(name).map(|section| View { config: self, section })
    }

    pub fn require(&self, name: &str) -> Result<View<'_>, ConfigError> {
        self.section(name).ok_or_else(|| self.error(None, format!("missing [{name}] section")))
    }

    /// Rejects sections outside `allowed`.
    pub fn only_sections(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        match self.sections.values().find(|s| !allowed.contains(&s.name.as_str())) {
            Some(s) => Err(self.error(
                Some(s.line),
                format!("unexpected section [{}]; expected one of {}", s.name, bracketed(allowed)),
            )),
            None => Ok(()),
        }
    }

    pub fn error(&self, line: Option<usize>, message: String) -> ConfigError {
        ConfigError {
            path: self.path.clone(),
            line,
            message,
        }
    }
}

fn bracketed(names: &[&str]) -> String {
    names.iter().map(|n| format!("[{n}]")).collect::<Vec<_>>().join(", ")
}

/// Typed access to one section.
#[derive(Clone, Copy)]
pub struct View<'a> {
    config: &'a Config,
    section: &'a Section,
}

impl<'a> View<'a> {
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.section.entries.get(key).map(|e| e.line)
    }

    pub fn error_at(&self, key: &str, message: String) -> ConfigError {
        self.config.error(self.line_of(key).or(Some(self.section.line)), message)
    }

    pub fn raw(&self, key: &str) -> Option<&'a str> {
        self.section.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn only_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        for (key, entry) in &self.section.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(self.config.error(
                    Some(entry.line),
                    format!("unknown key `{key}` in [{}]; expected one of: {}", self.section.name, allowed.join(", ")),
                ));
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| self.error_at(key, format!("`{key} = {v}`: {e}")))
            })
            .transpose()
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| {
            self.config
                .error(Some(self.section.line), format!("[{}] is missing `{key}`", self.section.name))
        })
    }

    /// Comma-separated list; an empty list is an error.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some(raw) = self.raw(key) else {
            return Ok(None);
        };
        let items: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if items.is_empty() {
            return Err(self.error_at(key, format!("`{key}` is an empty list")));
        }
        items
            .into_iter()
            .map(|s| s.parse::<T>().map_err(|e| self.error_at(key, format!("`{key}`: item `{s}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config, ConfigError> {
        Config::parse(text, Path::new("test.conf"))
    }

    #[test]
    fn sections_keys_and_comments() {
        let c = parse("# model\n[model]\nn = 16  # vertices\nlambda=0.1\n\n[simulate]\nhorizon = 100\n").unwrap();
        let m = c.require("model").unwrap();
        assert_eq!(m.required::<u32>("n").unwrap(), 16);
        assert_eq!(m.get::<f64>("lambda").unwrap(), Some(0.1));
        assert_eq!(m.get::<f64>("kappa").unwrap(), None);
        assert_eq!(m.line_of("lambda"), Some(4));
        assert_eq!(c.require("simulate").unwrap().required::<f64>("horizon").unwrap(), 100.0);
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse("[model]\nn = 16\nn = 8\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.to_string().starts_with("test.conf:3: `n` already set on line 2"));
        let e = parse("n = 16\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        let e = parse("[model]\njunk\n").unwrap_err();
        assert!(e.message.contains("key = value"));
        let c = parse("[model]\nn = sixteen\n").unwrap();
        let e = c.require("model").unwrap().required::<u32>("n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = c.require("model").unwrap().only_keys(&["r"]).unwrap_err();
        assert!(e.message.contains("unknown key `n`"));
        assert!(parse("[a.b]\n").is_err());
        assert!(c.require("sweep").err().unwrap().message.contains("missing [sweep]"));
    }

    #[test]
    fn lists() {
        let c = parse("[sweep]\nn = 256, 1024,4096\nempty = ,\n").unwrap();
        let s = c.require("sweep").unwrap();
        assert_eq!(s.list::<u32>("n").unwrap(), Some(vec![256, 1024, 4096]));
        assert_eq!(s.list::<u32>("empty").unwrap_err().line, Some(3));
    }
}
