//! Scenario configuration files.
//!
//! A config is a TOML document. Node blocks accept the keywords `"opt"` for
//! `kappa` (the flattest cavity rate for the block's cooperativity) and
//! `"phase"` / `"critical"` for `kappa1`.

use serde::Deserialize;

use heralded::model::{expand_four_level, FourLevelConfig, NodeParams};
use heralded::optimize::{optimal_kappa, phase_encoding_ratio};
use heralded::pulse::{read_spectrum_csv_path, PulseSpec};
use heralded::Error as CoreError;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    TransferSweep,
    Protocol,
    Optimize,
    TimedomainCheck,
    Compare,
    SivSweep,
    Readout,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::TransferSweep => "transfer-sweep",
            Self::Protocol => "protocol",
            Self::Optimize => "optimize",
            Self::TimedomainCheck => "timedomain-check",
            Self::Compare => "compare",
            Self::SivSweep => "siv-sweep",
            Self::Readout => "readout",
        }
    }

    /// Parameters the sweep axis may name.
    pub fn sweepable(self) -> &'static [&'static str] {
        match self {
            Self::TransferSweep => &["omega"],
            Self::Protocol => &["sigma", "pulse_delta", "eta", "delta_b", "kappa", "kappa_factor"],
            Self::Optimize => &["cooperativity"],
            Self::TimedomainCheck => &["sigma", "cooperativity", "kappa"],
            Self::Compare => &["cooperativity", "sigma", "kappa", "eta"],
            Self::SivSweep => &["cooperativity"],
            Self::Readout => &["sigma", "kappa1", "cooperativity", "pulse_delta"],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub name: Option<String>,
    /// Output CSV file name, relative to the output directory.
    pub output: Option<String>,
    pub grid_points: Option<usize>,
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default = "default_theta")]
    pub theta_prep: f64,
    pub node_a: NodeBlock,
    pub node_b: Option<NodeBlock>,
    pub pulse: Option<PulseBlock>,
    pub sweep: Option<SweepAxis>,
    #[serde(default)]
    pub series: SeriesBlock,
    pub map: Option<MapBlock>,
    #[serde(default)]
    pub write_trajectory: bool,
}

fn one() -> f64 {
    1.0
}

fn default_theta() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NodeModel {
    #[default]
    ThreeLevel,
    FourLevel,
}

/// A number or a keyword.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeBlock {
    #[serde(default)]
    pub model: NodeModel,
    pub cooperativity: f64,
    pub kappa: Param,
    pub kappa1: Option<Param>,
    pub coupling_ratio: Option<f64>,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub delta: f64,
    pub zeta: Option<f64>,
}

/// κ₁ after keyword resolution, before κ is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa1Choice {
    Absolute(f64),
    Ratio(f64),
    Phase,
}

impl NodeBlock {
    pub fn kappa1_choice(&self, prefix: &str) -> Result<Kappa1Choice, CliError> {
        match (&self.kappa1, self.coupling_ratio) {
            (Some(_), Some(_)) => Err(CliError::config(
                format!("{prefix}.coupling_ratio"),
                "give either kappa1 or coupling_ratio, not both",
            )),
            (None, None) => Ok(Kappa1Choice::Ratio(1.0)),
            (None, Some(r)) => Ok(Kappa1Choice::Ratio(r)),
            (Some(Param::Value(v)), None) => Ok(Kappa1Choice::Absolute(*v)),
            (Some(Param::Keyword(k)), None) => match k.as_str() {
                "phase" => Ok(Kappa1Choice::Phase),
                "critical" => Ok(Kappa1Choice::Ratio(0.5)),
                other => Err(CliError::config(
                    format!("{prefix}.kappa1"),
                    format!("unknown keyword {other:?} (expected a number, \"phase\" or \"critical\")"),
                )),
            },
        }
    }

    pub fn kappa_value(&self, prefix: &str) -> Result<f64, CliError> {
        match &self.kappa {
            Param::Value(v) => Ok(*v),
            Param::Keyword(k) if k == "opt" => {
                if self.model == NodeModel::FourLevel {
                    return Err(CliError::config(format!("{prefix}.kappa"), "\"opt\" needs a three-level node"));
                }
                optimal_kappa(self.cooperativity)
                    .map(|k| k * self.gamma)
                    .map_err(|e| CliError::config(format!("{prefix}.kappa"), e.to_string()))
            }
            Param::Keyword(other) => Err(CliError::config(
                format!("{prefix}.kappa"),
                format!("unknown keyword {other:?} (expected a number or \"opt\")"),
            )),
        }
    }

    pub fn four_level(&self, prefix: &str) -> Result<FourLevelConfig, CliError> {
        let kappa = self.kappa_value(prefix)?;
        let kappa1 = match self.kappa1_choice(prefix)? {
            Kappa1Choice::Absolute(v) => v,
            Kappa1Choice::Ratio(r) => r * kappa,
            // The SiV optimizer picks κ₁ itself; start from a single-sided cavity.
            Kappa1Choice::Phase => kappa,
        };
        let zeta = self.zeta.ok_or_else(|| CliError::config(format!("{prefix}.zeta"), "four-level nodes need zeta"))?;
        FourLevelConfig::from_cooperativity(self.cooperativity, kappa, kappa1, self.gamma, zeta, self.delta)
            .map_err(|e| core_config(prefix, e))
    }

    pub fn resolve(&self, prefix: &str) -> Result<NodeParams, CliError> {
        match self.model {
            NodeModel::ThreeLevel => {
                if self.zeta.is_some() {
                    return Err(CliError::config(format!("{prefix}.zeta"), "zeta only applies to four-level nodes"));
                }
                let kappa = self.kappa_value(prefix)?;
                let kappa1 = match self.kappa1_choice(prefix)? {
                    Kappa1Choice::Absolute(v) => v,
                    Kappa1Choice::Ratio(r) => r * kappa,
                    Kappa1Choice::Phase => {
                        phase_encoding_ratio(self.cooperativity)
                            .map_err(|e| CliError::config(format!("{prefix}.kappa1"), e.to_string()))?
                            * kappa
                    }
                };
                NodeParams::three_level(self.cooperativity, kappa, kappa1, self.gamma, self.delta)
                    .map_err(|e| core_config(prefix, e))
            }
            NodeModel::FourLevel => {
                if self.kappa1_choice(prefix)? == Kappa1Choice::Phase {
                    return Err(CliError::config(
                        format!("{prefix}.kappa1"),
                        "\"phase\" on a four-level node is only meaningful for siv-sweep",
                    ));
                }
                expand_four_level(&self.four_level(prefix)?).map_err(|e| core_config(prefix, e))
            }
        }
    }
}

fn core_config(prefix: &str, e: CoreError) -> CliError {
    match e {
        CoreError::NonPhysicalParameter { field, value } => {
            CliError::config(format!("{prefix}.{field}"), format!("non-physical value {value}"))
        }
        other => CliError::config(prefix.to_string(), other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseBlock {
    pub sigma: Option<f64>,
    #[serde(default)]
    pub delta: f64,
    /// CSV spectrum with columns omega,re,im.
    pub file: Option<String>,
}

impl PulseBlock {
    pub fn resolve(&self, sigma: Option<f64>, delta: f64) -> Result<PulseSpec, CliError> {
        match (&self.file, sigma.or(self.sigma)) {
            (Some(_), Some(_)) => Err(CliError::config("pulse.file", "give either sigma or file, not both")),
            (Some(path), None) => {
                let s = read_spectrum_csv_path(std::path::Path::new(path))
                    .map_err(|e| CliError::config("pulse.file", e.to_string()))?;
                PulseSpec::sampled(s).map_err(|e| CliError::config("pulse.file", e.to_string()))
            }
            (None, Some(sigma)) => PulseSpec::gaussian(sigma, delta).map_err(|e| core_config("pulse", e)),
            (None, None) => Err(CliError::config("pulse.sigma", "missing")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if i == 0 {
                    return self.min;
                }
                if i == n - 1 {
                    return self.max;
                }
                match self.scale {
                    Scale::Linear => self.min + t * (self.max - self.min),
                    Scale::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Outer loops: one curve per listed value.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SeriesBlock {
    pub cooperativity: Option<Vec<f64>>,
    /// Multiples of the flattest cavity rate.
    pub kappa_factor: Option<Vec<f64>>,
    pub kappa: Option<Vec<f64>>,
}

/// Frequency grid for the 2-D transfer maps of `siv-sweep`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapBlock {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::config(parse_field(&e), e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn node_b(&self) -> &NodeBlock {
        self.node_b.as_ref().unwrap_or(&self.node_a)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(CliError::config("eta", format!("must lie in [0, 1], got {}", self.eta)));
        }
        if let Some(n) = self.grid_points {
            if n < heralded::pulse::MIN_GRID_POINTS {
                return Err(CliError::config(
                    "grid_points",
                    format!("need at least {}, got {n}", heralded::pulse::MIN_GRID_POINTS),
                ));
            }
        }
        if let Some(s) = &self.sweep {
            if !self.scenario.sweepable().contains(&s.parameter.as_str()) {
                return Err(CliError::config(
                    "sweep.parameter",
                    format!(
                        "{:?} cannot be swept in {} (allowed: {})",
                        s.parameter,
                        self.scenario.label(),
                        self.scenario.sweepable().join(", ")
                    ),
                ));
            }
            if s.points < 2 {
                return Err(CliError::config("sweep.points", format!("need at least 2, got {}", s.points)));
            }
            if !(s.min.is_finite() && s.max.is_finite() && s.max > s.min) {
                return Err(CliError::config("sweep.max", "range must be finite with max > min"));
            }
            if s.scale == Scale::Log && s.min <= 0.0 {
                return Err(CliError::config("sweep.min", "log scale needs a positive range"));
            }
        } else if self.scenario == ScenarioKind::TransferSweep {
            return Err(CliError::config("sweep", "transfer-sweep needs an omega sweep"));
        }
        if self.series.kappa.is_some() && self.series.kappa_factor.is_some() {
            return Err(CliError::config("series.kappa_factor", "give either kappa or kappa_factor, not both"));
        }
        for (field, list) in [
            ("series.cooperativity", &self.series.cooperativity),
            ("series.kappa_factor", &self.series.kappa_factor),
            ("series.kappa", &self.series.kappa),
        ] {
            if let Some(l) = list {
                if l.is_empty() {
                    return Err(CliError::config(field, "list is empty"));
                }
            }
        }
        if let Some(m) = &self.map {
            if m.points < 2 || !(m.omega_max > m.omega_min) {
                return Err(CliError::config("map.points", "need at least 2 points and omega_max > omega_min"));
            }
        }
        let needs_pulse =
            !matches!(self.scenario, ScenarioKind::TransferSweep | ScenarioKind::Optimize | ScenarioKind::SivSweep);
        if needs_pulse && self.pulse.is_none() {
            return Err(CliError::config("pulse", "missing pulse block"));
        }
        Ok(())
    }
}

fn parse_field(e: &toml::de::Error) -> String {
    // The deserializer reports unknown or invalid keys in the message.
    let msg = e.message();
    for marker in ["unknown field `", "missing field `"] {
        if let Some(start) = msg.find(marker) {
            let rest = &msg[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    "config".to_string()
}
