//! Episodic benches sharing one reset/step contract.
//!
//! * [`ReactionBench`] drives a reaction network with temperature, volume
//!   and reactant-addition controls and a continuous action vector.
//! * [`ExtractionBench`] separates solutes between solvent layers with 8
//!   actions times 5 multipliers.
//! * [`DistillationBench`] heats a vessel into a condenser with 4 actions
//!   times 10 multipliers.
//!
//! Rewards are sparse: every non-terminal step returns 0.

mod config;
mod distillation;
mod extraction;
mod reaction;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use config::{BenchKind, HeuristicConfig, PhysicsConfig, ScenarioConfig};
pub use distillation::DistillationBench;
pub use extraction::ExtractionBench;

/// Action and multiplier indices of the distillation bench.
pub mod distillation_actions {
    pub use super::distillation::{
        heat_multiplier, pour_fraction, ACTIONS, END, HEAT, MULTIPLIERS, POUR_B1_B2, POUR_DV_B1,
    };
}

/// Action and multiplier indices of the extraction bench.
pub mod extraction_actions {
    pub use super::extraction::{
        ACTIONS, ADD_S1, ADD_S2, DRAIN_EV_B1, END, MIX, MULTIPLIERS, POUR_B2_EV, POUR_EV_B2, SETTLE,
    };
}
pub use reaction::ReactionBench;

use crate::materials::MaterialRegistry;
use crate::vessel::Vessel;
use crate::{Error, Result};

/// The six coupling products plus sodium chloride, in one-hot order.
pub const WURTZ_TARGETS: [&str; 7] = [
    "dodecane",
    "5-methylundecane",
    "4-ethyldecane",
    "5,6-dimethyldecane",
    "4-ethyl-5-methylnonane",
    "4,5-diethyloctane",
    "sodium chloride",
];

pub const FICTITIOUS_TARGETS: [&str; 5] = ["E", "F", "G", "H", "I"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ActionSpec {
    /// `dim` values, each in [0, 1]; out-of-range values are clipped.
    Continuous { dim: usize },
    /// `actions * multipliers` choices; index `a * multipliers + m` selects
    /// action `a` with multiplier `m`.
    Discrete { actions: usize, multipliers: usize },
}

impl ActionSpec {
    pub fn size(&self) -> usize {
        match self {
            ActionSpec::Continuous { dim } => *dim,
            ActionSpec::Discrete { actions, multipliers } => actions * multipliers,
        }
    }

    /// Draws a uniformly random action.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match self {
            ActionSpec::Continuous { dim } => Action::Continuous((0..*dim).map(|_| rng.random()).collect()),
            ActionSpec::Discrete { .. } => Action::Discrete(rng.random_range(0..self.size())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

/// Named, fixed-length segments making up an observation vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSpec {
    pub segments: Vec<(String, usize)>,
}

impl ObservationSpec {
    pub fn len(&self) -> usize {
        self.segments.iter().map(|(_, n)| n).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Start offset of a named segment.
    pub fn offset(&self, name: &str) -> Option<usize> {
        let mut at = 0;
        for (n, len) in &self.segments {
            if n == name {
                return Some(at);
            }
            at += len;
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub step: usize,
    /// Every vessel's final state, filled on the terminal step only.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub vessels: Vec<Vessel>,
}

/// Material flowing into and out of a bench during an episode, counted as
/// species (dissociating salts as their ions).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub supplied: BTreeMap<String, f64>,
    pub lost: BTreeMap<String, f64>,
}

impl Ledger {
    pub(crate) fn supply(&mut self, registry: &MaterialRegistry, material: &str, amount: f64) {
        add_species(&mut self.supplied, registry, material, amount);
    }

    pub(crate) fn lose(&mut self, registry: &MaterialRegistry, material: &str, amount: f64) {
        add_species(&mut self.lost, registry, material, amount);
    }

    pub(crate) fn supply_vessel(&mut self, registry: &MaterialRegistry, vessel: &Vessel) {
        for (s, n) in vessel.species_totals(registry) {
            *self.supplied.entry(s).or_insert(0.0) += n;
        }
    }
}

fn add_species(map: &mut BTreeMap<String, f64>, registry: &MaterialRegistry, material: &str, amount: f64) {
    if amount <= 0.0 {
        return;
    }
    match registry.get(material) {
        Some(m) if !m.dissociates.is_empty() => {
            for d in &m.dissociates {
                *map.entry(d.species.clone()).or_insert(0.0) += amount * d.count as f64;
            }
        }
        _ => *map.entry(material.to_string()).or_insert(0.0) += amount,
    }
}

/// The reset/step contract shared by every bench.
pub trait Environment {
    fn kind(&self) -> BenchKind;

    fn spaces(&self) -> (ActionSpec, ObservationSpec);

    /// Rebuilds the initial vessels and returns the first observation.
    /// The target is drawn uniformly from [`Environment::targets`] unless
    /// `target` pins it.
    fn reset(&mut self, seed: u64, target: Option<&str>) -> Result<Vec<f64>>;

    fn step(&mut self, action: &Action) -> Result<StepResult>;

    fn registry(&self) -> &MaterialRegistry;

    fn targets(&self) -> Vec<String>;

    fn target(&self) -> &str;

    fn step_count(&self) -> usize;

    fn max_steps(&self) -> usize;

    fn is_done(&self) -> bool;

    fn vessels(&self) -> Vec<&Vessel>;

    /// The vessel handed on to the next bench in a pipeline.
    fn output_vessel(&self) -> &Vessel;

    /// Replaces the default starting contents of the primary vessel on every
    /// following reset.
    fn set_input(&mut self, vessel: Option<Vessel>) -> Result<()>;

    fn ledger(&self) -> &Ledger;

    /// Largest reward the current target allows.
    fn reward_ceiling(&self) -> f64;
}

/// Any bench, built from a scenario configuration.
pub enum BenchEnv {
    Reaction(ReactionBench),
    Extraction(ExtractionBench),
    Distillation(DistillationBench),
}

impl BenchEnv {
    pub fn from_config(config: &ScenarioConfig) -> Result<Self> {
        let registry = Arc::new(config.load_registry()?);
        Self::with_registry(config, registry)
    }

    pub fn with_registry(config: &ScenarioConfig, registry: Arc<MaterialRegistry>) -> Result<Self> {
        config.validate()?;
        Ok(match config.bench {
            BenchKind::Rxn => {
                let network = Arc::new(config.load_network()?);
                BenchEnv::Reaction(ReactionBench::new(config, registry, network)?)
            }
            BenchKind::Ext => BenchEnv::Extraction(ExtractionBench::new(config, registry)?),
            BenchKind::Dit => BenchEnv::Distillation(DistillationBench::new(config, registry)?),
        })
    }

    fn inner(&self) -> &dyn Environment {
        match self {
            BenchEnv::Reaction(b) => b,
            BenchEnv::Extraction(b) => b,
            BenchEnv::Distillation(b) => b,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Environment {
        match self {
            BenchEnv::Reaction(b) => b,
            BenchEnv::Extraction(b) => b,
            BenchEnv::Distillation(b) => b,
        }
    }
}

impl Environment for BenchEnv {
    fn kind(&self) -> BenchKind {
        self.inner().kind()
    }
    fn spaces(&self) -> (ActionSpec, ObservationSpec) {
        self.inner().spaces()
    }
    fn reset(&mut self, seed: u64, target: Option<&str>) -> Result<Vec<f64>> {
        self.inner_mut().reset(seed, target)
    }
    fn step(&mut self, action: &Action) -> Result<StepResult> {
        self.inner_mut().step(action)
    }
    fn registry(&self) -> &MaterialRegistry {
        self.inner().registry()
    }
    fn targets(&self) -> Vec<String> {
        self.inner().targets()
    }
    fn target(&self) -> &str {
        self.inner().target()
    }
    fn step_count(&self) -> usize {
        self.inner().step_count()
    }
    fn max_steps(&self) -> usize {
        self.inner().max_steps()
    }
    fn is_done(&self) -> bool {
        self.inner().is_done()
    }
    fn vessels(&self) -> Vec<&Vessel> {
        self.inner().vessels()
    }
    fn output_vessel(&self) -> &Vessel {
        self.inner().output_vessel()
    }
    fn set_input(&mut self, vessel: Option<Vessel>) -> Result<()> {
        self.inner_mut().set_input(vessel)
    }
    fn ledger(&self) -> &Ledger {
        self.inner().ledger()
    }
    fn reward_ceiling(&self) -> f64 {
        self.inner().reward_ceiling()
    }
}

/// Picks the episode target: the pinned one if given, otherwise uniformly.
pub(crate) fn choose_target<R: Rng + ?Sized>(
    rng: &mut R,
    targets: &[String],
    pinned: Option<&str>,
) -> Result<String> {
    match pinned {
        Some(t) if targets.iter().any(|x| x == t) => Ok(t.to_string()),
        Some(t) => Err(Error::Config(format!(
            "target `{t}` is not one of {}",
            targets.join(", ")
        ))),
        None => Ok(targets[rng.random_range(0..targets.len())].clone()),
    }
}

pub(crate) fn one_hot(targets: &[String], target: &str) -> Vec<f64> {
    targets.iter().map(|t| if t == target { 1.0 } else { 0.0 }).collect()
}

/// Splits a flat discrete index into (action, multiplier index).
pub(crate) fn decode(index: usize, actions: usize, multipliers: usize) -> Result<(usize, usize)> {
    let size = actions * multipliers;
    if index >= size {
        return Err(Error::IndexOutOfRange { index, size });
    }
    Ok((index / multipliers, index % multipliers))
}

/// The vessel holding the target at the highest absolute purity.
pub(crate) fn purest<'a>(
    vessels: &[&'a Vessel],
    target: &str,
    registry: &MaterialRegistry,
) -> &'a Vessel {
    let mut best = vessels[0];
    let mut best_purity = -1.0;
    for v in vessels {
        let p = crate::vessel::absolute_purity(&[v], target, registry);
        if p > best_purity {
            best_purity = p;
            best = v;
        }
    }
    best
}

/// Rejects actions once an episode has finished.
pub(crate) fn ensure_running(done: bool) -> Result<()> {
    if done {
        Err(Error::EpisodeDone)
    } else {
        Ok(())
    }
}

/// Renders each vessel's layers as normalised labels.
pub(crate) fn layer_pixels<R: Rng + ?Sized>(
    vessels: &[&Vessel],
    n_pixels: usize,
    rng: &mut R,
    registry: &MaterialRegistry,
) -> Vec<f64> {
    let scale = registry.len().max(1) as f64;
    vessels
        .iter()
        .flat_map(|v| crate::layers::render_layers(v, n_pixels, rng, registry))
        .map(|label| label as f64 / scale)
        .collect()
}
