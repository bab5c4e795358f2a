//! Run configuration: flags layered over a flat `key = value` file over defaults.

use crate::error::{Error, Result};
use crate::params::Params;
use crate::radial::{RadialGrid, Spacing};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Parsed `key = value` pairs; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::InvalidParameter(format!("config line {}: expected key = value", i + 1)))?;
            let key = k.trim().trim_start_matches("--").replace('_', "-");
            if key.is_empty() {
                return Err(Error::InvalidParameter(format!("config line {}: empty key", i + 1)));
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Keys not in `known`.
    pub fn unknown_keys(&self, known: &[&str]) -> Vec<String> {
        self.entries.keys().filter(|k| !known.contains(&k.as_str())).cloned().collect()
    }

    /// `flag`, else the file entry `key`, else `None`.
    pub fn layer<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            Some(v) => v.parse::<T>().map(Some).map_err(|e| Error::InvalidParameter(format!("config key '{key}' = '{v}': {e}"))),
            None => Ok(None),
        }
    }
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidParameter(format!("format '{s}' (expected csv or json)"))),
        }
    }
}

pub(crate) fn parse_spacing(s: &str) -> Result<Spacing> {
    match s.to_ascii_lowercase().as_str() {
        "log" => Ok(Spacing::Log),
        "linear" => Ok(Spacing::Linear),
        _ => Err(Error::InvalidParameter(format!("spacing '{s}' (expected log or linear)"))),
    }
}

/// Radial sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { min: 1e-2, max: 30.0, count: 161, spacing: Spacing::Log }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        match self.spacing {
            Spacing::Log => RadialGrid::log(self.min, self.max, self.count),
            Spacing::Linear => RadialGrid::linear(self.min, self.max, self.count),
            Spacing::Custom => Err(Error::InvalidParameter("custom spacing needs explicit points".into())),
        }
    }
}

/// Common settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: Params,
    /// Whether `s` and `n` were set explicitly rather than defaulted.
    pub explicit_s: bool,
    pub explicit_n: bool,
    pub grid: GridSpec,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_S: f64 = 0.5;
pub const DEFAULT_N: u32 = 2;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Raw common values before layering.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommonValues {
    pub s: Option<f64>,
    pub n: Option<u32>,
    pub rmin: Option<f64>,
    pub rmax: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Option<String>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

pub const COMMON_KEYS: [&str; 9] = ["s", "n", "rmin", "rmax", "points", "spacing", "tol", "out", "format"];

impl RunConfig {
    /// Resolves `flags > file > defaults` and validates the result.
    pub fn resolve(flags: &CommonValues, file: &ConfigFile, default_format: Format) -> Result<Self> {
        let s = file.layer(flags.s, "s")?;
        let n = file.layer(flags.n, "n")?;
        let params = Params::new(s.unwrap_or(DEFAULT_S), n.unwrap_or(DEFAULT_N))?;
        let d = GridSpec::default();
        let spacing = match file.layer(flags.spacing.clone(), "spacing")? {
            Some(v) => parse_spacing(&v)?,
            None => d.spacing,
        };
        let grid = GridSpec {
            min: file.layer(flags.rmin, "rmin")?.unwrap_or(d.min),
            max: file.layer(flags.rmax, "rmax")?.unwrap_or(d.max),
            count: file.layer(flags.points, "points")?.unwrap_or(d.count),
            spacing,
        };
        grid.build()?;
        let tol = file.layer(flags.tol, "tol")?.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
        }
        let out = file.layer(flags.out.clone(), "out")?;
        let format = match file.layer(flags.format.clone(), "format")? {
            Some(v) => v.parse()?,
            None => default_format,
        };
        Ok(Self { params, explicit_s: s.is_some(), explicit_n: n.is_some(), grid, tol, out, format })
    }
}

/// Comma-separated list of values.
pub fn parse_list<T>(s: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|e| Error::InvalidParameter(format!("list entry '{x}': {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parsing() {
        let f = ConfigFile::parse("# header\ns = 0.75\n  n=3 # trailing\n\n--points = 20\nlambda_min = -3\n").unwrap();
        assert_eq!(f.get("s"), Some("0.75"));
        assert_eq!(f.get("n"), Some("3"));
        assert_eq!(f.get("points"), Some("20"));
        assert_eq!(f.get("lambda-min"), Some("-3"));
        assert!(ConfigFile::parse("novalue\n").is_err());
        assert_eq!(f.unknown_keys(&COMMON_KEYS), vec!["lambda-min".to_string()]);
    }

    #[test]
    fn precedence() {
        let file = ConfigFile::parse("s = 0.75\nn = 3\ntol = 1e-4\n").unwrap();
        let flags = CommonValues { s: Some(0.3), ..Default::default() };
        let c = RunConfig::resolve(&flags, &file, Format::Csv).unwrap();
        assert_eq!(c.params.s(), 0.3);
        assert_eq!(c.params.n(), 3);
        assert_eq!(c.tol, 1e-4);
        assert_eq!(c.grid, GridSpec::default());
        assert!(c.explicit_s && c.explicit_n);
        let c = RunConfig::resolve(&CommonValues::default(), &ConfigFile::default(), Format::Json).unwrap();
        assert_eq!((c.params.s(), c.params.n(), c.format), (DEFAULT_S, DEFAULT_N, Format::Json));
        assert!(!c.explicit_s);
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = |file: &str| RunConfig::resolve(&CommonValues::default(), &ConfigFile::parse(file).unwrap(), Format::Csv);
        assert!(bad("s = 1.5").is_err());
        assert!(bad("n = zero").is_err());
        assert!(bad("rmin = 5\nrmax = 1").is_err());
        assert!(bad("spacing = cubic").is_err());
        assert!(bad("format = xml").is_err());
        assert!(bad("tol = -1").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<f64>("0.5, 2,10").unwrap(), vec![0.5, 2.0, 10.0]);
        assert!(parse_list::<f64>("a").is_err());
    }
}
