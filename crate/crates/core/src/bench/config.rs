//! Scenario configuration files.
//!
//! ```toml
//! format_version = 1
//! bench = "rxn"            # rxn | ext | dit
//! scenario = "wurtz"       # wurtz | fictitious (rxn only)
//! # materials = "my-materials.toml"   # optional, relative to this file
//! # reactions = "my-network.rxn"      # optional, rxn only
//! # max_steps = 20
//! # target = "dodecane"
//! seed = 0
//!
//! [physics]
//! dt_per_step = 10.0
//!
//! [integrator]
//! rel_tol = 1e-6
//!
//! [heuristic]
//! switch_step = 10
//! ```
//!
//! Every key under `[physics]`, `[integrator]` and `[heuristic]` is optional
//! and falls back to the defaults documented on the structs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::kinetics::{IntegratorConfig, ReactionNetwork};
use crate::materials::MaterialRegistry;
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchKind {
    Rxn,
    Ext,
    Dit,
}

impl BenchKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchKind::Rxn => "rxn",
            BenchKind::Ext => "ext",
            BenchKind::Dit => "dit",
        }
    }

    pub fn default_max_steps(self) -> usize {
        match self {
            BenchKind::Rxn => 20,
            BenchKind::Ext | BenchKind::Dit => 50,
        }
    }
}

impl std::str::FromStr for BenchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rxn" => Ok(BenchKind::Rxn),
            "ext" => Ok(BenchKind::Ext),
            "dit" => Ok(BenchKind::Dit),
            other => Err(Error::Config(format!("unknown bench `{other}` (expected rxn, ext or dit)"))),
        }
    }
}

/// Physical unit constants of the benches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicsConfig {
    /// Reaction time integrated per reaction-bench step.
    pub dt_per_step: f64,
    /// K of temperature change at a full-scale action.
    pub d_temperature: f64,
    /// L of volume change at a full-scale action.
    pub d_volume: f64,
    pub temperature_range: (f64, f64),
    pub volume_range: (f64, f64),
    pub initial_temperature: f64,
    pub initial_volume: f64,
    /// Pressure that normalises to 1 in observations, kPa.
    pub pressure_scale: f64,
    /// Diethyl ether in the starting vessel, mol.
    pub solvent_moles: f64,
    /// Settle time undone by a full mix action.
    pub mix_unit: f64,
    /// Settle time added by a full settle action.
    pub settle_unit: f64,
    /// Solvent volume poured in by a full add action, L.
    pub solvent_unit: f64,
    /// Heat of a full heat action, J.
    pub heat_unit: f64,
    pub vessel_capacity: f64,
    pub pixels: usize,
    pub spectrum_bins: usize,
    /// First and second extraction solvents.
    pub solvents: (String, String),
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            dt_per_step: 10.0,
            d_temperature: 25.0,
            d_volume: 0.25,
            temperature_range: (273.15, 373.15),
            volume_range: (1.0, 3.0),
            initial_temperature: 298.15,
            initial_volume: 2.0,
            pressure_scale: 202.65,
            solvent_moles: 4.0,
            mix_unit: 5.0,
            settle_unit: 5.0,
            solvent_unit: 0.4,
            heat_unit: 12_000.0,
            vessel_capacity: 1.0,
            pixels: 100,
            spectrum_bins: 100,
            solvents: ("water".into(), "hexane".into()),
        }
    }
}

/// Constants of the scripted controllers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeuristicConfig {
    /// Reaction-bench step at which the delayed precursor is added.
    pub switch_step: usize,
    /// Add/mix/settle/drain rounds of the extraction script.
    pub extraction_rounds: usize,
    /// Multiplier index (0-4) used for the extraction drain.
    pub drain_multiplier: usize,
    /// Full-heat steps that boil off the solvent.
    pub solvent_boil_steps: usize,
    /// Full-heat steps that boil off low boilers left after the solvent.
    pub forerun_steps: usize,
    /// Full-heat steps that carry the target into the condenser.
    pub target_boil_steps: usize,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            switch_step: 10,
            extraction_rounds: 2,
            drain_multiplier: 2,
            solvent_boil_steps: 10,
            forerun_steps: 3,
            target_boil_steps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub format_version: u32,
    pub bench: BenchKind,
    #[serde(default = "default_scenario")]
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reactions: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub heuristic: HeuristicConfig,
}

fn default_scenario() -> String {
    "wurtz".into()
}

impl ScenarioConfig {
    pub fn new(bench: BenchKind, scenario: &str) -> Self {
        ScenarioConfig {
            format_version: FORMAT_VERSION,
            bench,
            scenario: scenario.to_string(),
            materials: None,
            reactions: None,
            max_steps: None,
            target: None,
            seed: 0,
            physics: PhysicsConfig::default(),
            integrator: IntegratorConfig::default(),
            heuristic: HeuristicConfig::default(),
        }
    }

    pub fn wurtz_reaction() -> Self {
        Self::new(BenchKind::Rxn, "wurtz")
    }

    pub fn fictitious_reaction() -> Self {
        Self::new(BenchKind::Rxn, "fictitious")
    }

    pub fn wurtz_extraction() -> Self {
        Self::new(BenchKind::Ext, "wurtz")
    }

    pub fn wurtz_distillation() -> Self {
        Self::new(BenchKind::Dit, "wurtz")
    }

    /// The shipped configuration for a bench and scenario name.
    pub fn preset(bench: BenchKind, scenario: &str) -> Result<Self> {
        match (bench, scenario) {
            (BenchKind::Rxn, "wurtz" | "fictitious") | (BenchKind::Ext | BenchKind::Dit, "wurtz") => {
                Ok(Self::new(bench, scenario))
            }
            _ => Err(Error::UnknownScenario(format!("{} {scenario}", bench.name()))),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| Error::from_toml(text, e))?;
        if config.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported scenario format_version {}",
                config.format_version
            )));
        }
        Ok(config)
    }

    /// Loads a scenario file; relative data paths resolve against its folder.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.materials, &mut config.reactions].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps.unwrap_or(self.bench.default_max_steps())
    }

    pub fn load_registry(&self) -> Result<MaterialRegistry> {
        match &self.materials {
            Some(path) => MaterialRegistry::load(path),
            None => Ok(MaterialRegistry::default_registry()),
        }
    }

    pub fn load_network(&self) -> Result<ReactionNetwork> {
        match (&self.reactions, self.scenario.as_str()) {
            (Some(path), _) => ReactionNetwork::load(path),
            (None, "wurtz") => Ok(ReactionNetwork::wurtz()),
            (None, "fictitious") => Ok(ReactionNetwork::fictitious()),
            (None, other) => Err(Error::UnknownScenario(other.to_string())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        Self::preset(self.bench, &self.scenario)?;
        let p = &self.physics;
        let positive = [
            p.dt_per_step,
            p.d_temperature,
            p.d_volume,
            p.initial_temperature,
            p.initial_volume,
            p.pressure_scale,
            p.solvent_moles,
            p.mix_unit,
            p.settle_unit,
            p.solvent_unit,
            p.heat_unit,
            p.vessel_capacity,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("physics constants must be positive".into()));
        }
        if !(p.temperature_range.0 > 0.0 && p.temperature_range.0 < p.temperature_range.1)
            || !(p.volume_range.0 > 0.0 && p.volume_range.0 < p.volume_range.1)
        {
            return Err(Error::Config("physics ranges must be increasing and positive".into()));
        }
        if p.pixels == 0 || p.spectrum_bins == 0 {
            return Err(Error::Config("pixel and spectrum counts must be at least 1".into()));
        }
        if self.max_steps() == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        if self.heuristic.drain_multiplier >= 5 {
            return Err(Error::Config("heuristic.drain_multiplier must be 0-4".into()));
        }
        self.integrator.validate().map_err(|e| Error::Config(e.to_string()))
    }
}
