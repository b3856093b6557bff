//! Text format for grid profiles.
//!
//! ```text
//! # b=2.0000000000000001e-1
//! # tau=...
//! # c=...
//! # m=16
//! # t_start=...
//! # dt=...
//! # n=3201
//! # left_rate=...
//! # right_value=...
//! # kind=u
//! t,value
//! -6.0000000000000000e1,2.0202438857104308e-13
//! ...
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gridops::GridProfile;

/// Which unknown a profile stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Solution of the resolvent form of the profile equation.
    W,
    /// The front itself, `u = (1 - b) B w`.
    U,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::W => "w",
            ProfileKind::U => "u",
        }
    }
}

impl FromStr for ProfileKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "w" => Ok(ProfileKind::W),
            "u" => Ok(ProfileKind::U),
            _ => Err(Error::Parse(format!("unknown profile kind {s:?}"))),
        }
    }
}

/// A profile together with the model parameters it was computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFile {
    pub b: f64,
    pub tau: f64,
    pub c: f64,
    pub kind: ProfileKind,
    pub profile: GridProfile,
}

/// Round-trip formatting with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl ProfileFile {
    pub fn to_text(&self) -> String {
        let g = &self.profile;
        let mut out = String::new();
        for (k, v) in [
            ("b", fmt_f64(self.b)),
            ("tau", fmt_f64(self.tau)),
            ("c", fmt_f64(self.c)),
            ("m", g.m.to_string()),
            ("t_start", fmt_f64(g.t_start)),
            ("dt", fmt_f64(g.dt)),
            ("n", g.n().to_string()),
            ("left_rate", fmt_f64(g.left_rate)),
            ("right_value", fmt_f64(g.right_value)),
            ("kind", self.kind.as_str().to_string()),
        ] {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("t,value\n");
        for (t, v) in g.times().zip(&g.values) {
            let _ = writeln!(out, "{},{}", fmt_f64(t), fmt_f64(*v));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = std::collections::BTreeMap::new();
        let mut rows = Vec::new();
        let mut seen_columns = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("line {}: header without '='", lineno + 1)))?;
                header.insert(k.trim().to_string(), v.trim().to_string());
            } else if !seen_columns && line == "t,value" {
                seen_columns = true;
            } else {
                let (t, v) = line
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("line {}: expected 't,value'", lineno + 1)))?;
                rows.push((parse_num(t, lineno)?, parse_num(v, lineno)?));
            }
        }
        let get = |k: &str| -> Result<&str> {
            header.get(k).map(String::as_str).ok_or_else(|| Error::Parse(format!("missing header key {k}")))
        };
        let num =
            |k: &str| -> Result<f64> { get(k)?.parse::<f64>().map_err(|e| Error::Parse(format!("header {k}: {e}"))) };
        let int = |k: &str| -> Result<usize> {
            get(k)?.parse::<usize>().map_err(|e| Error::Parse(format!("header {k}: {e}")))
        };
        let (b, tau, c) = (num("b")?, num("tau")?, num("c")?);
        let (m, n) = (int("m")?, int("n")?);
        let (t_start, dt) = (num("t_start")?, num("dt")?);
        let kind = header.get("kind").map_or(Ok(ProfileKind::U), |s| s.parse())?;
        if rows.len() != n {
            return Err(Error::Parse(format!("header says n = {n} but {} rows follow", rows.len())));
        }
        for (i, (t, _)) in rows.iter().enumerate() {
            let expect = t_start + i as f64 * dt;
            if (t - expect).abs() > 1e-9 * (1.0 + expect.abs()) {
                return Err(Error::Parse(format!("row {i}: t = {t} is off the grid (expected {expect})")));
            }
        }
        let values = rows.into_iter().map(|(_, v)| v).collect();
        let profile = GridProfile::new(t_start, dt, m, values, num("left_rate")?, num("right_value")?)?;
        Ok(Self { b, tau, c, kind, profile })
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_num(s: &str, lineno: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ProfileFile {
        let profile = GridProfile::sample(3.0, 0.6, 4, 0.4, 1.0, |t| 1.0 / (1.0 + (-t).exp())).unwrap();
        ProfileFile { b: 0.2, tau: 0.2, c: 3.0, kind: ProfileKind::W, profile }
    }

    #[test]
    fn round_trip_is_exact() {
        let f = sample();
        let back = ProfileFile::parse(&f.to_text()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn row_count_mismatch() {
        let text = sample().to_text();
        let cut: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(ProfileFile::parse(&cut), Err(Error::Parse(_))));
    }

    #[test]
    fn missing_key() {
        let text: String =
            sample().to_text().lines().filter(|l| !l.starts_with("# dt")).map(|l| format!("{l}\n")).collect();
        assert!(matches!(ProfileFile::parse(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn formatting_has_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
