//! `key = value` reports, one entry per line.

use std::fmt;

use crate::error::{Error, Result};
use crate::profile_io::fmt_f64;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn str(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries.push((key.to_string(), value.into()));
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.str(key, fmt_f64(value))
    }

    pub fn opt(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        self.str(key, value.map_or_else(|| "none".to_string(), fmt_f64))
    }

    pub fn int(&mut self, key: &str, value: usize) -> &mut Self {
        self.str(key, value.to_string())
    }

    pub fn flag(&mut self, key: &str, value: bool) -> &mut Self {
        self.str(key, if value { "true" } else { "false" })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Report::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::Parse(format!("report line {}: expected 'key = value'", i + 1)))?;
            r.str(k.trim(), v.trim());
        }
        Ok(r)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse() {
        let mut r = Report::new();
        r.num("lambda2", 0.5).int("iters", 3).flag("converged", true).opt("mu1", None);
        let text = r.to_string();
        assert_eq!(text.lines().next(), Some("lambda2 = 5.0000000000000000e-1"));
        let back = Report::parse(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.get_f64("lambda2"), Some(0.5));
        assert_eq!(back.get("mu1"), Some("none"));
    }

    #[test]
    fn malformed_line() {
        assert!(Report::parse("oops\n").is_err());
    }
}
