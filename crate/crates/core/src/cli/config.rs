use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::builder::{PermTargets, Permutation, TargetSequence, TruncationBudget};
use crate::fubini::{FubiniBox, Layout, DEFAULT_MAX_QUADRATURE_PEAKS};
use crate::partition::{DEFAULT_SCAN_LIMIT, DEFAULT_VISIT_THRESHOLD};
use crate::series::SeriesSource;

/// Largest supported dimension (targets are enumerated over all `n!` orders).
pub const MAX_DIMENSION: usize = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SeriesSpec {
    Builtin(String),
    Terms { terms: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    Constant(f64),
    Linear(f64),
    List(Vec<f64>),
}

/// A number or `"inf"`/`"-inf"` is a single limit; objects give a sequence.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Number(f64),
    Text(String),
    Sequence(SequenceSpec),
}

impl TargetSpec {
    fn sequence(&self, path: &str) -> Result<TargetSequence, ConfigError> {
        Ok(match self {
            TargetSpec::Number(v) => TargetSequence::for_limit(*v),
            TargetSpec::Text(t) => match t.trim() {
                "inf" | "+inf" => TargetSequence::for_limit(f64::INFINITY),
                "-inf" => TargetSequence::for_limit(f64::NEG_INFINITY),
                other => return Err(ConfigError::new(path, format!("expected a number, \"inf\" or \"-inf\", got {other:?}"))),
            },
            TargetSpec::Sequence(SequenceSpec::Constant(c)) => TargetSequence::Constant(*c),
            TargetSpec::Sequence(SequenceSpec::Linear(s)) => TargetSequence::Linear(*s),
            TargetSpec::Sequence(SequenceSpec::List(v)) => TargetSequence::List(v.clone()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Largest index scanned; defaults to the list length for inline terms.
    #[serde(default)]
    pub scan_limit: Option<u64>,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_VISIT_THRESHOLD,
            scan_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BoxSpec {
    /// Limit on the outermost integration variable only.
    Outer(u32),
    /// Per-coordinate limits, `null` for unbounded.
    Limits(Vec<Option<u32>>),
}

impl BoxSpec {
    pub fn for_order(&self, sigma: &Permutation) -> FubiniBox {
        match self {
            BoxSpec::Outer(l) => FubiniBox::outer(sigma, *l),
            BoxSpec::Limits(v) => FubiniBox::new(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FubiniConfig {
    /// Defaults to outer limits `1..=depth`.
    #[serde(default)]
    pub boxes: Vec<BoxSpec>,
    #[serde(default)]
    pub layout: Layout,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_max_peaks")]
    pub max_quadrature_peaks: usize,
}

impl Default for FubiniConfig {
    fn default() -> Self {
        Self {
            boxes: Vec::new(),
            layout: Layout::default(),
            quad_tol: default_quad_tol(),
            max_quadrature_peaks: default_max_peaks(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub series: SeriesSpec,
    /// Keyed by one-line image notation (`"2 1 3"`) or `"default"`.
    #[serde(default)]
    pub targets: BTreeMap<String, TargetSpec>,
    pub budget: TruncationBudget,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default = "default_horizon")]
    pub split_horizon: u64,
    #[serde(default)]
    pub fubini: FubiniConfig,
}

fn default_threshold() -> f64 {
    DEFAULT_VISIT_THRESHOLD
}
fn default_quad_tol() -> f64 {
    1e-6
}
fn default_max_peaks() -> usize {
    DEFAULT_MAX_QUADRATURE_PEAKS
}
fn default_tolerance() -> f64 {
    0.05
}
fn default_horizon() -> u64 {
    10_000
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(path, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(".", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=MAX_DIMENSION).contains(&self.n) {
            return Err(ConfigError::new("n", format!("must lie in 2..={MAX_DIMENSION}")));
        }
        self.source()?;
        self.targets()?;
        if self.budget.depth == 0 {
            return Err(ConfigError::new("budget.depth", "must be positive"));
        }
        if self.budget.slab_budget == 0 {
            return Err(ConfigError::new("budget.slab_budget", "must be positive"));
        }
        for (dim, depth) in &self.budget.sub_depths {
            if *depth == 0 {
                return Err(ConfigError::new(format!("budget.sub_depths.{dim}"), "must be positive"));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(ConfigError::new("tolerance", "must be positive"));
        }
        if !(self.partition.threshold > 0.0) {
            return Err(ConfigError::new("partition.threshold", "must be positive"));
        }
        if self.partition.scan_limit == Some(0) {
            return Err(ConfigError::new("partition.scan_limit", "must be positive"));
        }
        if self.split_horizon == 0 {
            return Err(ConfigError::new("split_horizon", "must be positive"));
        }
        if !(self.fubini.quad_tol > 0.0) {
            return Err(ConfigError::new("fubini.quad_tol", "must be positive"));
        }
        for (i, b) in self.fubini.boxes.iter().enumerate() {
            if let BoxSpec::Limits(v) = b {
                if v.len() != self.n {
                    return Err(ConfigError::new(format!("fubini.boxes[{i}]"), format!("needs {} limits", self.n)));
                }
            }
        }
        Ok(())
    }

    pub fn source(&self) -> Result<SeriesSource, ConfigError> {
        match &self.series {
            SeriesSpec::Builtin(name) => {
                SeriesSource::builtin(name).ok_or_else(|| ConfigError::new("series", format!("unknown built-in series {name:?}")))
            }
            SeriesSpec::Terms { terms } => {
                if terms.is_empty() || terms.iter().any(|t| !t.is_finite()) {
                    return Err(ConfigError::new("series.terms", "need a non-empty list of finite terms"));
                }
                Ok(SeriesSource::from_terms("inline", terms.clone()))
            }
        }
    }

    pub fn scan_limit(&self) -> u64 {
        match (&self.series, self.partition.scan_limit) {
            (_, Some(limit)) => limit,
            (SeriesSpec::Terms { terms }, None) => terms.len() as u64,
            (SeriesSpec::Builtin(_), None) => DEFAULT_SCAN_LIMIT,
        }
    }

    /// Targets keyed by the permutations of the config.
    pub fn targets(&self) -> Result<PermTargets, ConfigError> {
        let mut entries = Vec::new();
        let mut default = None;
        for (key, spec) in &self.targets {
            let path = format!("targets.{key}");
            let seq = spec.sequence(&path)?;
            if key == "default" {
                default = Some(seq);
                continue;
            }
            let perm: Permutation = key.parse().map_err(|e| ConfigError::new(&path, format!("{e}")))?;
            if perm.n() != self.n {
                return Err(ConfigError::new(&path, format!("permutation has {} entries, n = {}", perm.n(), self.n)));
            }
            entries.push((perm, seq));
        }
        PermTargets::new(self.n, entries, default).map_err(|e| ConfigError::new("targets", e.to_string()))
    }
}
