use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use zerofree::{JordanChainF64, RegionF64};

use crate::parse::{lower_map, parse_map};
use crate::{CliError, ExitClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    /// Canonical chain of `n` discs.
    Chain(usize),
    /// One map expression per domain, each carrying its canonical disc onto the domain.
    Jordan(Vec<String>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grids: Option<PathBuf>,
}

fn default_density() -> f64 {
    64.0
}

fn default_max_degree() -> usize {
    200
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub region: RegionSpec,
    pub function: String,
    pub epsilon: f64,
    #[serde(default = "default_density")]
    pub fit_density: f64,
    #[serde(default = "default_density")]
    pub verify_density: f64,
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
    #[serde(default)]
    pub output: OutputPaths,
    /// Runs are always deterministic; `false` is rejected.
    #[serde(default = "yes")]
    pub deterministic: bool,
}

impl JobConfig {
    pub fn new(region: RegionSpec, function: &str, epsilon: f64) -> Self {
        Self {
            region,
            function: function.to_string(),
            epsilon,
            fit_density: default_density(),
            verify_density: default_density(),
            max_degree: default_max_degree(),
            output: OutputPaths::default(),
            deterministic: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: JobConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive and finite, got {}", self.epsilon));
        }
        for (name, d) in [("fit_density", self.fit_density), ("verify_density", self.verify_density)] {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {d}"));
            }
        }
        if !self.deterministic {
            return bad("non-deterministic runs are not supported".into());
        }
        match &self.region {
            RegionSpec::Chain(0) => bad("a chain needs at least one disc".into()),
            RegionSpec::Jordan(maps) if maps.is_empty() => bad("a Jordan chain needs at least one map".into()),
            _ => Ok(()),
        }
    }

    /// Builds the region; map strings go through the expression parser.
    pub fn build_region(&self) -> Result<RegionF64, CliError> {
        build_region(&self.region, self.verify_density)
    }
}

pub fn build_region(spec: &RegionSpec, density: f64) -> Result<RegionF64, CliError> {
    match spec {
        RegionSpec::Chain(n) => Ok(RegionF64::Chain(zerofree::geometry::chain_discs(*n)?)),
        RegionSpec::Jordan(srcs) => {
            let maps = srcs
                .iter()
                .map(|s| {
                    let ast = parse_map(s).map_err(|e| CliError::parse(s, e))?;
                    lower_map(&ast).map_err(|e| CliError::Lower(s.clone(), e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RegionF64::Jordan(JordanChainF64::new(maps, density)?))
        }
    }
}

impl CliError {
    pub fn exit_class(&self) -> ExitClass {
        match self {
            CliError::Parse { .. } | CliError::Lower(..) => ExitClass::Parse,
            CliError::Core(e) => ExitClass::of(e),
            CliError::Config(_) | CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => ExitClass::Other,
        }
    }
}
