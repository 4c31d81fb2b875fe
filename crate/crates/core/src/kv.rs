//! Plain-text `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Keys are case-sensitive. Lists
//! are comma separated.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected `key = value`, got `{line}`") })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse { line: i + 1, msg: "empty key".into() });
            }
            if entries.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::Parse { line: i + 1, msg: format!("duplicate key `{key}`") });
            }
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), (0, value.to_string()));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse { line: *line, msg: format!("cannot parse value `{v}` for `{key}`") }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some((line, v)) = self.entries.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::Parse { line: *line, msg: format!("cannot parse list item `{s}` for `{key}`") })
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// Fails on the first key not in `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        for (k, (line, _)) in &self.entries {
            if !known.contains(&k.as_str()) {
                return Err(Error::Parse { line: *line, msg: format!("unknown key `{k}`") });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_lists_and_comments() {
        let kv = KeyValues::parse("# header\n a = 3 \nlist = 1, 2,3 # trailing\n\nname=x\n").unwrap();
        assert_eq!(kv.get::<u32>("a").unwrap(), Some(3));
        assert_eq!(kv.get_list::<f64>("list").unwrap(), Some(vec![1.0, 2.0, 3.0]));
        assert_eq!(kv.get::<String>("name").unwrap().as_deref(), Some("x"));
        assert_eq!(kv.get::<u32>("missing").unwrap(), None);
        assert!(kv.reject_unknown(&["a", "list"]).is_err());
    }

    #[test]
    fn reports_line_numbers() {
        let err = KeyValues::parse("a = 1\nbogus\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 2, msg: "expected `key = value`, got `bogus`".into() });
        let kv = KeyValues::parse("a = 1\nb = x\n").unwrap();
        assert!(matches!(kv.get::<f64>("b"), Err(Error::Parse { line: 2, .. })));
        assert!(KeyValues::parse("a = 1\na = 2").is_err());
    }
}
