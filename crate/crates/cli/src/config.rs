use std::path::Path;

use anyhow::Context;
use dualhahn::transfer::DEFAULT_TOL;
use dualhahn::{ModelParams, Site, Time};
use serde::Deserialize;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// `[model]` section: rationals as `"p/q"` strings.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub a: String,
    pub b: String,
    pub c: String,
    pub n: u32,
}

/// `[run]` section.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub source: Option<String>,
    pub times: Option<Vec<String>>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: ModelSection,
    #[serde(default)]
    pub run: RunSection,
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub source: Site,
    pub times: Vec<Time>,
    pub format: Format,
    pub tol: f64,
}

impl RunConfig {
    pub fn new(params: ModelParams) -> Self {
        Self { params, source: Site::new(0, 0), times: vec![Time::pi(0, 1)], format: Format::Json, tol: DEFAULT_TOL }
    }

    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Failure::validation(anyhow::anyhow!(e)))?;
        let m = &file.model;
        let params = ModelParams::parse(&m.a, &m.b, &m.c, m.n).map_err(Failure::from)?;
        let mut cfg = RunConfig::new(params);
        if let Some(s) = &file.run.source {
            cfg.source = s.parse().map_err(Failure::from)?;
        }
        if let Some(ts) = &file.run.times {
            cfg.times = parse_times(ts)?;
        }
        if let Some(f) = file.run.format {
            cfg.format = f;
        }
        if let Some(t) = file.run.tol {
            cfg.tol = t;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(Failure::io)?;
        Self::from_toml(&text).map_err(|f| f.context(format!("in config {}", path.display())))
    }

    /// Preset runs: the two PST parameter sets and the off-origin transfer.
    pub fn figure(which: u8) -> Option<Self> {
        let (params, source, times) = match which {
            1 => (ModelParams::figure1(), Site::new(0, 0), (0..=3).map(|k| Time::pi(k, 1)).collect()),
            2 => (ModelParams::figure2(), Site::new(0, 0), (0..=4).map(|k| Time::pi(k, 2)).collect()),
            3 => (ModelParams::figure1(), Site::new(1, 2), (0..=3).map(|k| Time::pi(k, 1)).collect()),
            _ => return None,
        };
        Some(Self { source, times, ..Self::new(params) })
    }
}

pub fn parse_times(ts: &[String]) -> Result<Vec<Time>, Failure> {
    if ts.is_empty() {
        return Err(Failure::validation(anyhow::anyhow!("times must not be empty")));
    }
    ts.iter().map(|t| t.parse::<Time>().map_err(Failure::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = RunConfig::from_toml(
            r#"
            [model]
            a = "53/3"
            b = "34/3"
            c = "1/6"
            n = 6

            [run]
            source = "(1,2)"
            times = ["0", "3/2", "3pi", "0.25"]
            format = "csv"
            tol = 1e-7
            "#,
        )
        .unwrap();
        assert_eq!(cfg.params, ModelParams::figure1());
        assert_eq!(cfg.source, Site::new(1, 2));
        assert_eq!(cfg.times, vec![Time::pi(0, 1), Time::pi(3, 2), Time::pi(3, 1), Time::Real(0.25)]);
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.tol, 1e-7);
    }

    #[test]
    fn run_section_is_optional() {
        let cfg = RunConfig::from_toml("[model]\na = \"19\"\nb = \"23/2\"\nc = \"1/4\"\nn = 6\n").unwrap();
        assert_eq!(cfg, RunConfig::new(ModelParams::figure2()));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(RunConfig::from_toml("[model]\na = \"x\"\nb = \"1\"\nc = \"1\"\nn = 1\n").unwrap_err().code, 1);
        assert_eq!(RunConfig::from_toml("[model]\na = \"1\"\n").unwrap_err().code, 1);
        let empty = "[model]\na = \"1\"\nb = \"1\"\nc = \"1\"\nn = 1\n[run]\ntimes = []\n";
        assert_eq!(RunConfig::from_toml(empty).unwrap_err().code, 1);
    }
}
