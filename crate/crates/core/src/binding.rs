//! Flat-array view of the benches for foreign-language trainers.
//!
//! Observations and actions are plain `f64` slices. A discrete action is a
//! single element holding the flattened index; it is rounded and clipped to
//! the action space, as continuous actions are clipped to `[0, 1]`.

use std::path::Path;

use crate::bench::{Action, ActionSpec, BenchEnv, BenchKind, Environment, ScenarioConfig};
use crate::{Error, Result};

/// Registered environment ids and their bench kinds.
pub const ENV_IDS: [(&str, BenchKind); 3] = [
    ("chemgym/rxn", BenchKind::Rxn),
    ("chemgym/ext", BenchKind::Ext),
    ("chemgym/dit", BenchKind::Dit),
];

pub fn kind_of(id: &str) -> Result<BenchKind> {
    ENV_IDS
        .iter()
        .find(|(name, _)| *name == id)
        .map(|(_, kind)| *kind)
        .ok_or_else(|| Error::Config(format!("unknown environment id `{id}`")))
}

/// Space description in the shape trainers expect.
#[derive(Debug, Clone, PartialEq)]
pub enum Space {
    /// `n` choices, indices `0..n`.
    Discrete(usize),
    /// A box of `dim` values, each in `[low, high]`.
    Box { dim: usize, low: f64, high: f64 },
}

pub struct FlatEnv {
    env: BenchEnv,
    action_space: ActionSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatStep {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terminated: bool,
    /// The step limit ended the episode.
    pub truncated: bool,
}

/// Builds the environment for `id`, from a scenario file when given or the
/// bench's default scenario otherwise.
pub fn make(id: &str, config: Option<&Path>) -> Result<FlatEnv> {
    let kind = kind_of(id)?;
    let config = match config {
        Some(path) => {
            let c = ScenarioConfig::load(path)?;
            if c.bench != kind {
                return Err(Error::Config(format!(
                    "{} configures the {} bench, not {id}",
                    path.display(),
                    c.bench.name()
                )));
            }
            c
        }
        None => ScenarioConfig::preset(kind, "wurtz")?,
    };
    FlatEnv::new(&config)
}

impl FlatEnv {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        let env = BenchEnv::from_config(config)?;
        let (action_space, _) = env.spaces();
        Ok(FlatEnv { env, action_space })
    }

    pub fn action_space(&self) -> Space {
        match self.action_space {
            ActionSpec::Continuous { dim } => Space::Box { dim, low: 0.0, high: 1.0 },
            ActionSpec::Discrete { .. } => Space::Discrete(self.action_space.size()),
        }
    }

    pub fn observation_space(&self) -> Space {
        Space::Box {
            dim: self.env.spaces().1.len(),
            low: 0.0,
            high: 1.0,
        }
    }

    pub fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        self.env.reset(seed, None)
    }

    pub fn step(&mut self, action: &[f64]) -> Result<FlatStep> {
        let action = match self.action_space {
            ActionSpec::Continuous { dim } => {
                if action.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: action.len(),
                    });
                }
                Action::Continuous(action.to_vec())
            }
            ActionSpec::Discrete { .. } => {
                let [index] = action else {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        actual: action.len(),
                    });
                };
                let top = (self.action_space.size() - 1) as f64;
                let index = if index.is_nan() { 0.0 } else { index.round().clamp(0.0, top) };
                Action::Discrete(index as usize)
            }
        };
        let r = self.env.step(&action)?;
        let truncated = r.done && self.env.step_count() >= self.env.max_steps();
        Ok(FlatStep {
            observation: r.observation,
            reward: r.reward,
            terminated: r.done && !truncated,
            truncated,
        })
    }

    pub fn inner(&self) -> &BenchEnv {
        &self.env
    }
}
