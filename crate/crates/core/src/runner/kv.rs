//! Flat `key = value` text files with `#` comments.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct KvFile {
    pub path: PathBuf,
    pub entries: Vec<KvEntry>,
}

#[derive(Debug, Clone)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl KvFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::format(path, format!("line {}: expected 'key = value'", i + 1)));
            };
            entries.push(KvEntry {
                key: key.trim().to_string(),
                value: value.trim().to_string(),
                line: i + 1,
            });
        }
        Ok(KvFile { path: path.to_path_buf(), entries })
    }

    /// Resolves a path value relative to the file's directory.
    pub fn resolve(&self, value: &str) -> PathBuf {
        let p = Path::new(value);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }
}

impl KvEntry {
    pub fn parse<T: FromStr>(&self) -> Result<T> {
        self.value.parse().map_err(|_| {
            Error::Config(format!("line {}: cannot parse '{}' for key '{}'", self.line, self.value, self.key))
        })
    }

    pub fn parse_bool(&self) -> Result<bool> {
        match self.value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            _ => Err(Error::Config(format!("line {}: '{}' is not a boolean", self.line, self.value))),
        }
    }

    pub fn list(&self) -> Vec<String> {
        self.value
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    pub fn parse_list<T: FromStr>(&self) -> Result<Vec<T>> {
        self.list()
            .iter()
            .map(|s| {
                s.parse().map_err(|_| {
                    Error::Config(format!("line {}: cannot parse '{s}' in '{}'", self.line, self.key))
                })
            })
            .collect()
    }

    pub fn unknown(&self) -> Error {
        Error::Config(format!("line {}: unknown key '{}'", self.line, self.key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_lists() {
        let f = KvFile::parse("# header\n a = 1 \n\nb = x, y ,z # trailing\nc=\n", Path::new("/cfg/run.cfg")).unwrap();
        assert_eq!(f.entries.len(), 3);
        assert_eq!(f.entries[0].parse::<u32>().unwrap(), 1);
        assert_eq!(f.entries[1].list(), vec!["x", "y", "z"]);
        assert!(f.entries[2].list().is_empty());
        assert_eq!(f.resolve("data"), PathBuf::from("/cfg/data"));
        assert_eq!(f.resolve("/abs"), PathBuf::from("/abs"));
    }

    #[test]
    fn missing_equals_is_an_error() {
        assert!(KvFile::parse("oops\n", Path::new("x")).is_err());
    }
}
