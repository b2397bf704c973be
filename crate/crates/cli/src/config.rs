//! Experiment configuration: TOML for hand-edited files, JSON for machine
//! callers. Unknown keys are rejected and every field is validated before
//! any computation starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use levydraw::model::{JumpComponent, LevyModel};
use levydraw::sim::mc::{Lookahead, SimConfig};
use levydraw::sim::FunctionalKind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

type CfgResult<T> = std::result::Result<T, ConfigError>;

/// One jump component: exponential sizes with `mean`, or tempered-Pareto
/// sizes with `pareto_alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pareto_alpha: Option<f64>,
}

impl JumpSpec {
    fn build(&self, path: &str) -> CfgResult<JumpComponent> {
        match (self.mean, self.pareto_alpha) {
            (Some(mean), None) => Ok(JumpComponent::exponential(self.rate, mean)),
            (None, Some(alpha)) => Ok(JumpComponent::tempered_pareto(self.rate, alpha)),
            _ => Err(ConfigError::new(path, "exactly one of `mean` and `pareto_alpha` is required")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub drift: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps_up: Option<JumpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps_down: Option<JumpSpec>,
}

impl ModelSpec {
    pub fn build(&self) -> CfgResult<LevyModel> {
        self.build_at("model")
    }

    fn build_at(&self, path: &str) -> CfgResult<LevyModel> {
        let up = self.jumps_up.as_ref().map(|j| j.build(&format!("{path}.jumps_up"))).transpose()?;
        let down = self.jumps_down.as_ref().map(|j| j.build(&format!("{path}.jumps_down"))).transpose()?;
        LevyModel::new(self.drift, self.sigma, up, down).map_err(|e| ConfigError::new(path, e.to_string()))
    }

    /// Reads a model file (`.json` as JSON, anything else as TOML).
    pub fn load(path: &Path) -> CfgResult<Self> {
        parse_file(path)
    }
}

/// Lookahead `s`: a positive number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LookaheadSpec {
    Finite(f64),
    Word(InfWord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfWord {
    #[serde(rename = "inf")]
    Inf,
}

impl LookaheadSpec {
    pub fn to_lookahead(self) -> Lookahead {
        match self {
            LookaheadSpec::Finite(s) => Lookahead::Finite(s),
            LookaheadSpec::Word(InfWord::Inf) => Lookahead::Infinite,
        }
    }

    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        if s == "inf" {
            return Ok(LookaheadSpec::Word(InfWord::Inf));
        }
        s.parse::<f64>().map(LookaheadSpec::Finite).map_err(|_| format!("expected a number or `inf`, got `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum HorizonConfig {
    /// Fixed `t` and lookahead `s`.
    Fixed { t: f64, s: LookaheadSpec },
    /// `t ~ e_q`, `s ~ e_β`.
    Exponential { q: f64, beta: f64 },
    /// `t ~ e_q`, infinite lookahead.
    ExponentialInfinite { q: f64 },
}

/// `x` values: an explicit list or `"a:b:n"` (n evenly spaced points).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range(String),
}

impl GridSpec {
    pub fn points(&self) -> std::result::Result<Vec<f64>, String> {
        match self {
            GridSpec::List(v) => Ok(v.clone()),
            GridSpec::Range(s) => parse_grid(s),
        }
    }
}

/// Parses `"a:b:n"` or a comma-separated list.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}` in grid `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect(),
        3 => {
            let (a, b) = (num(parts[0])?, num(parts[1])?);
            let n: usize = parts[2].trim().parse().map_err(|_| format!("bad point count in grid `{s}`"))?;
            Ok(match n {
                0 => vec![],
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            })
        }
        _ => Err(format!("grid `{s}` is neither `a:b:n` nor a comma list")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Functionals evaluated on one simulated path.
    #[default]
    Direct,
    /// `max{Ũ + U_t, overline U_t}` and `(Ũ − D_t)⁺` from independent pieces.
    Representation,
}

fn default_n() -> usize {
    10_000
}

fn default_true() -> bool {
    true
}

fn default_inf_factor() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    /// Path count; 0 disables the Monte Carlo column.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Grid step; absent picks the default for the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_true")]
    pub bridge: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub sampler: Sampler,
    #[serde(default = "default_inf_factor")]
    pub inf_factor: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n: default_n(),
            seed: 0,
            delta: None,
            bridge: true,
            threads: None,
            sampler: Sampler::Direct,
            inf_factor: default_inf_factor(),
        }
    }
}

impl McConfig {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            step: self.delta,
            bridge: self.bridge,
            tail_step: None,
            inf_factor: self.inf_factor,
            threads: self.threads,
        }
    }
}

fn default_heavy_n() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case", deny_unknown_fields)]
pub enum AsymptoticConfig {
    /// Cramér or Höglund asymptote, fixed horizons only.
    #[default]
    Cramer,
    /// Convolution-equivalent asymptote with moments from `n` paths.
    Heavy {
        alpha: f64,
        #[serde(default = "default_heavy_n")]
        n: usize,
    },
    None,
}

fn default_sigmas() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Analytic vs Monte Carlo: `|analytic − mc| ≤ k · se`.
    #[serde(default = "default_sigmas")]
    pub mc_sigmas: f64,
    /// Asymptote vs Monte Carlo, relative; only used when no analytic value
    /// exists, and only when declared.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotic_rel: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { mc_sigmas: default_sigmas(), asymptotic_rel: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub kind: FunctionalKind,
    pub horizon: HorizonConfig,
    pub x_grid: GridSpec,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub asymptotic: AsymptoticConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

fn positive(path: &str, v: f64) -> CfgResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CfgResult<Self> {
        let cfg: Self = parse_file(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> CfgResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::new("<toml>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> CfgResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::new("<json>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field; the first problem is reported with its path.
    pub fn validate(&self) -> CfgResult<()> {
        self.model.build()?;
        match self.horizon {
            HorizonConfig::Fixed { t, s } => {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(ConfigError::new("horizon.t", format!("must be finite and >= 0, got {t}")));
                }
                if let LookaheadSpec::Finite(s) = s {
                    if !(s >= 0.0 && s.is_finite()) {
                        return Err(ConfigError::new(
                            "horizon.s",
                            format!("must be finite and >= 0 or \"inf\", got {s}"),
                        ));
                    }
                }
            }
            HorizonConfig::Exponential { q, beta } => {
                positive("horizon.q", q)?;
                positive("horizon.beta", beta)?;
            }
            HorizonConfig::ExponentialInfinite { q } => positive("horizon.q", q)?,
        }
        let xs = self.x_grid.points().map_err(|m| ConfigError::new("x_grid", m))?;
        if let Some(i) = xs.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(ConfigError::new(format!("x_grid[{i}]"), "grid points must be finite and >= 0"));
        }
        if self.mc.n != 0 && self.mc.n < 100 {
            return Err(ConfigError::new("mc.n", format!("must be 0 or at least 100, got {}", self.mc.n)));
        }
        if let Some(d) = self.mc.delta {
            positive("mc.delta", d)?;
        }
        if self.mc.threads == Some(0) {
            return Err(ConfigError::new("mc.threads", "must be at least 1"));
        }
        positive("mc.inf_factor", self.mc.inf_factor)?;
        if self.mc.sampler == Sampler::Representation
            && !matches!(
                self.kind,
                FunctionalKind::OverlineUStar
                    | FunctionalKind::UnderlineUStar
                    | FunctionalKind::OverlineDStar
                    | FunctionalKind::UnderlineDStar
            )
        {
            return Err(ConfigError::new(
                "mc.sampler",
                "the representation sampler covers the four extremal kinds only",
            ));
        }
        if let AsymptoticConfig::Heavy { alpha, n } = self.asymptotic {
            positive("asymptotic.alpha", alpha)?;
            if n < 100 {
                return Err(ConfigError::new("asymptotic.n", "must be at least 100"));
            }
        }
        positive("tolerances.mc_sigmas", self.tolerances.mc_sigmas)?;
        if let Some(r) = self.tolerances.asymptotic_rel {
            positive("tolerances.asymptotic_rel", r)?;
        }
        Ok(())
    }

    pub fn x_points(&self) -> Vec<f64> {
        self.x_grid.points().unwrap_or_default()
    }
}

fn parse_file<T: for<'de> Deserialize<'de>>(path: &Path) -> CfgResult<T> {
    let where_ = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(&where_, e.to_string()))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| ConfigError::new(where_, e.to_string()))
    } else {
        toml::from_str(&text).map_err(|e| ConfigError::new(where_, e.to_string()))
    }
}
