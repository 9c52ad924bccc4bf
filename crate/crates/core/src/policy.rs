//! Scripted and random controllers, and a rollout evaluator.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bench::{
    Action, ActionSpec, BenchEnv, BenchKind, Environment, HeuristicConfig, ScenarioConfig,
};
use crate::bench::{distillation_actions as dit, extraction_actions as ext};
use crate::kinetics::ReactionNetwork;
use crate::materials::MaterialRegistry;
use crate::vessel::Vessel;
use crate::{Error, Result};

/// What a policy knows besides the observation.
#[derive(Debug, Clone, Copy)]
pub struct Context<'a> {
    pub step: usize,
    pub target: &'a str,
}

pub trait Policy: Send {
    fn act(&mut self, observation: &[f64], ctx: &Context) -> Action;

    /// Called before every episode.
    fn reset(&mut self, _seed: u64) {}

    fn name(&self) -> &'static str;
}

/// Reaction-bench script: heat and compress at full rate and add the
/// reactants the target needs, all at step 0. The salt target takes every
/// reactant. For the fictitious target `I` one precursor is held back until
/// `switch_step`.
pub struct HeuristicRxn {
    reactants: Vec<String>,
    network: Arc<ReactionNetwork>,
    fictitious: bool,
    switch_step: usize,
}

impl HeuristicRxn {
    pub fn new(scenario: &str, network: Arc<ReactionNetwork>, reactants: Vec<String>, switch_step: usize) -> Result<Self> {
        let fictitious = match scenario {
            "wurtz" => false,
            "fictitious" => true,
            other => return Err(Error::UnknownScenario(other.to_string())),
        };
        Ok(HeuristicRxn {
            reactants,
            network,
            fictitious,
            switch_step,
        })
    }

    /// Inventory reactants consumed on the way to `target`, following the
    /// first reaction that makes each intermediate.
    pub fn precursors(&self, target: &str) -> Vec<String> {
        if target == "sodium chloride" {
            return self.reactants.clone();
        }
        let mut needed = Vec::new();
        let mut stack = vec![target.to_string()];
        let mut seen = Vec::new();
        while let Some(species) = stack.pop() {
            if seen.contains(&species) {
                continue;
            }
            seen.push(species.clone());
            if self.reactants.contains(&species) {
                needed.push(species);
                continue;
            }
            if let Some(r) = self
                .network
                .reactions
                .iter()
                .find(|r| r.products.iter().any(|p| p.material == species))
            {
                stack.extend(r.reactants.iter().map(|t| t.material.clone()));
            }
        }
        needed
    }

    fn delayed(&self, target: &str) -> Option<&'static str> {
        (self.fictitious && target == "I").then_some("C")
    }
}

impl Policy for HeuristicRxn {
    fn act(&mut self, _observation: &[f64], ctx: &Context) -> Action {
        let needed = self.precursors(ctx.target);
        let delayed = self.delayed(ctx.target);
        let mut a = vec![1.0, 0.0];
        for r in &self.reactants {
            let wanted = needed.contains(r);
            let add = if Some(r.as_str()) == delayed {
                ctx.step >= self.switch_step
            } else {
                wanted
            };
            a.push(if add { 1.0 } else { 0.0 });
        }
        Action::Continuous(a)
    }

    fn name(&self) -> &'static str {
        "heuristic"
    }
}

/// Extraction script: wash with the polar solvent, stir, settle and drain
/// the bottom layer, repeated, then end.
pub struct HeuristicExt {
    script: Vec<usize>,
}

impl HeuristicExt {
    pub fn new(config: &HeuristicConfig) -> Self {
        let m = ext::MULTIPLIERS.len();
        let full = m - 1;
        let mut script = Vec::new();
        for _ in 0..config.extraction_rounds {
            script.push(ext::ADD_S1 * m + full);
            script.push(ext::MIX * m + full);
            script.push(ext::SETTLE * m + full);
            script.push(ext::DRAIN_EV_B1 * m + config.drain_multiplier);
        }
        script.push(ext::END * m);
        HeuristicExt { script }
    }
}

impl Policy for HeuristicExt {
    fn act(&mut self, _observation: &[f64], ctx: &Context) -> Action {
        let last = *self.script.last().unwrap();
        Action::Discrete(self.script.get(ctx.step).copied().unwrap_or(last))
    }

    fn name(&self) -> &'static str {
        "heuristic"
    }
}

/// Distillation script: boil the solvent into B1 and dump it, boil off any
/// low boilers and dump them, then carry the target over into B1. When the
/// target is the salt everything else is boiled away instead.
pub struct HeuristicDit {
    config: HeuristicConfig,
}

impl HeuristicDit {
    pub fn new(config: &HeuristicConfig) -> Self {
        HeuristicDit { config: config.clone() }
    }

    pub fn script(&self, target: &str) -> Vec<usize> {
        let m = dit::MULTIPLIERS;
        let heat = dit::HEAT * m + (m - 1);
        let dump = dit::POUR_B1_B2 * m + (m - 1);
        let c = &self.config;
        let mut s = Vec::new();
        if target == "sodium chloride" {
            s.extend(std::iter::repeat_n(heat, c.solvent_boil_steps + c.forerun_steps + c.target_boil_steps));
        } else {
            s.extend(std::iter::repeat_n(heat, c.solvent_boil_steps));
            s.push(dump);
            s.extend(std::iter::repeat_n(heat, c.forerun_steps));
            s.push(dump);
            s.extend(std::iter::repeat_n(heat, c.target_boil_steps));
        }
        s.push(dit::END * m);
        s
    }
}

impl Policy for HeuristicDit {
    fn act(&mut self, _observation: &[f64], ctx: &Context) -> Action {
        let script = self.script(ctx.target);
        let last = *script.last().unwrap();
        Action::Discrete(script.get(ctx.step).copied().unwrap_or(last))
    }

    fn name(&self) -> &'static str {
        "heuristic"
    }
}

/// Uniform sampling over an action space.
pub struct RandomPolicy {
    spec: ActionSpec,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(spec: ActionSpec, seed: u64) -> Self {
        RandomPolicy {
            spec,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _observation: &[f64], _ctx: &Context) -> Action {
        self.spec.sample(&mut self.rng)
    }

    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn name(&self) -> &'static str {
        "random"
    }
}

/// Does nothing: ends discrete-bench episodes at once and holds the
/// reaction bench at its neutral action without adding anything.
pub struct NonePolicy {
    spec: ActionSpec,
    end: usize,
}

impl NonePolicy {
    pub fn new(kind: BenchKind, spec: ActionSpec) -> Self {
        let end = match kind {
            BenchKind::Ext => ext::END * ext::MULTIPLIERS.len(),
            BenchKind::Dit => dit::END * dit::MULTIPLIERS,
            BenchKind::Rxn => 0,
        };
        NonePolicy { spec, end }
    }
}

impl Policy for NonePolicy {
    fn act(&mut self, _observation: &[f64], _ctx: &Context) -> Action {
        match self.spec {
            ActionSpec::Continuous { dim } => {
                let mut a = vec![0.0; dim];
                a[0] = 0.5;
                if dim > 1 {
                    a[1] = 0.5;
                }
                Action::Continuous(a)
            }
            ActionSpec::Discrete { .. } => Action::Discrete(self.end),
        }
    }

    fn name(&self) -> &'static str {
        "none"
    }
}

/// The scripted controller for a scenario.
pub fn heuristic_for(config: &ScenarioConfig) -> Result<Box<dyn Policy>> {
    config.validate()?;
    Ok(match config.bench {
        BenchKind::Rxn => {
            let network = Arc::new(config.load_network()?);
            let reactants = match config.scenario.as_str() {
                "wurtz" => vec!["1-chlorohexane", "2-chlorohexane", "3-chlorohexane", "sodium"],
                _ => vec!["A", "B", "C", "D"],
            };
            Box::new(HeuristicRxn::new(
                &config.scenario,
                network,
                reactants.into_iter().map(String::from).collect(),
                config.heuristic.switch_step,
            )?)
        }
        BenchKind::Ext => Box::new(HeuristicExt::new(&config.heuristic)),
        BenchKind::Dit => Box::new(HeuristicDit::new(&config.heuristic)),
    })
}

/// Builds a policy by name: `heuristic`, `random` or `none`.
pub fn policy_by_name(name: &str, config: &ScenarioConfig, seed: u64) -> Result<Box<dyn Policy>> {
    let spec = match config.bench {
        BenchKind::Rxn => ActionSpec::Continuous { dim: 6 },
        BenchKind::Ext => ActionSpec::Discrete {
            actions: ext::ACTIONS,
            multipliers: ext::MULTIPLIERS.len(),
        },
        BenchKind::Dit => ActionSpec::Discrete {
            actions: dit::ACTIONS,
            multipliers: dit::MULTIPLIERS,
        },
    };
    match name {
        "heuristic" => heuristic_for(config),
        "random" => Ok(Box::new(RandomPolicy::new(spec, seed))),
        "none" => Ok(Box::new(NonePolicy::new(config.bench, spec))),
        other => Err(Error::Config(format!(
            "unknown policy `{other}` (expected heuristic, random or none)"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub action: Action,
    pub reward: f64,
    pub done: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub observation: Option<Vec<f64>>,
}

/// One recorded episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub episode: usize,
    pub seed: u64,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub initial_observation: Option<Vec<f64>>,
    pub steps: Vec<StepRecord>,
    #[serde(rename = "return")]
    pub total_return: f64,
    #[serde(skip)]
    pub final_vessels: Vec<Vessel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetStats {
    pub episodes: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    pub episodes: usize,
    pub mean: f64,
    /// Sample standard deviation (0 for a single episode).
    pub std: f64,
    pub per_target: BTreeMap<String, TargetStats>,
}

impl ReturnStats {
    pub fn from_trajectories(trajectories: &[Trajectory]) -> Self {
        let returns: Vec<f64> = trajectories.iter().map(|t| t.total_return).collect();
        let n = returns.len();
        let mean = if n > 0 { returns.iter().sum::<f64>() / n as f64 } else { 0.0 };
        let std = if n > 1 {
            (returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for t in trajectories {
            groups.entry(t.target.clone()).or_default().push(t.total_return);
        }
        let per_target = groups
            .into_iter()
            .map(|(k, v)| {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                (k, TargetStats { episodes: v.len(), mean })
            })
            .collect();
        ReturnStats {
            episodes: n,
            mean,
            std,
            per_target,
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.episodes == 0 {
            0.0
        } else {
            self.std / (self.episodes as f64).sqrt()
        }
    }
}

/// Seed of episode `index` in a rollout seeded with `seed`.
pub fn episode_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeOptions {
    pub target: Option<String>,
    /// Stop after this many steps even if the episode has not finished.
    pub step_limit: Option<usize>,
    pub record_observations: bool,
}

/// Runs one episode from `reset(seed)` until done.
pub fn run_episode(
    env: &mut dyn Environment,
    policy: &mut dyn Policy,
    seed: u64,
    options: &EpisodeOptions,
) -> Result<Trajectory> {
    let mut observation = env.reset(seed, options.target.as_deref())?;
    policy.reset(seed ^ 0x5EED_0FA1_1CE5);
    let mut trajectory = Trajectory {
        episode: 0,
        seed,
        target: env.target().to_string(),
        initial_observation: options.record_observations.then(|| observation.clone()),
        steps: Vec::new(),
        total_return: 0.0,
        final_vessels: Vec::new(),
    };
    let limit = options.step_limit.unwrap_or(usize::MAX);
    while !env.is_done() && trajectory.steps.len() < limit {
        let ctx = Context {
            step: env.step_count(),
            target: env.target(),
        };
        let action = policy.act(&observation, &ctx);
        let result = env.step(&action)?;
        trajectory.total_return += result.reward;
        observation = result.observation;
        trajectory.steps.push(StepRecord {
            step: result.info.step,
            action,
            reward: result.reward,
            done: result.done,
            observation: options.record_observations.then(|| observation.clone()),
        });
    }
    trajectory.final_vessels = env.vessels().into_iter().cloned().collect();
    Ok(trajectory)
}

/// Runs `episodes` episodes and summarises their returns.
pub fn rollout(
    env: &mut dyn Environment,
    policy: &mut dyn Policy,
    episodes: usize,
    seed: u64,
) -> Result<(ReturnStats, Vec<Trajectory>)> {
    rollout_with(env, policy, episodes, seed, &EpisodeOptions::default())
}

pub fn rollout_with(
    env: &mut dyn Environment,
    policy: &mut dyn Policy,
    episodes: usize,
    seed: u64,
    options: &EpisodeOptions,
) -> Result<(ReturnStats, Vec<Trajectory>)> {
    if episodes == 0 {
        return Err(Error::Config("a rollout needs at least one episode".into()));
    }
    let mut trajectories = Vec::with_capacity(episodes);
    for i in 0..episodes {
        let mut t = run_episode(env, policy, episode_seed(seed, i), options)?;
        t.episode = i;
        trajectories.push(t);
    }
    Ok((ReturnStats::from_trajectories(&trajectories), trajectories))
}

/// Like [`rollout_with`] but spread over `threads` independent environment
/// instances. Episode `i` always uses the same seed, so the result does not
/// depend on the thread count.
pub fn rollout_parallel(
    config: &ScenarioConfig,
    registry: Arc<MaterialRegistry>,
    policy_name: &str,
    episodes: usize,
    seed: u64,
    threads: usize,
    options: &EpisodeOptions,
) -> Result<(ReturnStats, Vec<Trajectory>)> {
    if episodes == 0 {
        return Err(Error::Config("a rollout needs at least one episode".into()));
    }
    let threads = threads.clamp(1, episodes);
    let results: Vec<Result<Vec<Trajectory>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let registry = Arc::clone(&registry);
                scope.spawn(move || -> Result<Vec<Trajectory>> {
                    let mut env = BenchEnv::with_registry(config, registry)?;
                    let mut policy = policy_by_name(policy_name, config, seed)?;
                    let mut out = Vec::new();
                    for i in (w..episodes).step_by(threads) {
                        let mut t = run_episode(&mut env, policy.as_mut(), episode_seed(seed, i), options)?;
                        t.episode = i;
                        out.push(t);
                    }
                    Ok(out)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("rollout worker panicked")).collect()
    });
    let mut trajectories = Vec::with_capacity(episodes);
    for r in results {
        trajectories.extend(r?);
    }
    trajectories.sort_by_key(|t| t.episode);
    Ok((ReturnStats::from_trajectories(&trajectories), trajectories))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wurtz_heuristic_first_action() {
        let config = ScenarioConfig::wurtz_reaction();
        let mut p = heuristic_for(&config).unwrap();
        let a = p.act(&[], &Context { step: 0, target: "dodecane" });
        assert_eq!(a, Action::Continuous(vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0]));
        let a = p.act(&[], &Context { step: 0, target: "4-ethyl-5-methylnonane" });
        assert_eq!(a, Action::Continuous(vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0]));
        let a = p.act(&[], &Context { step: 0, target: "sodium chloride" });
        assert_eq!(a, Action::Continuous(vec![1.0, 0.0, 1.0, 1.0, 1.0, 1.0]));
    }

    #[test]
    fn fictitious_heuristic() {
        let config = ScenarioConfig::fictitious_reaction();
        let mut p = heuristic_for(&config).unwrap();
        for step in 0..20 {
            let Action::Continuous(a) = p.act(&[], &Context { step, target: "E" }) else { panic!() };
            assert_eq!(a[5], 0.0);
            assert_eq!(&a[2..5], &[1.0, 1.0, 1.0]);
            let Action::Continuous(a) = p.act(&[], &Context { step, target: "I" }) else { panic!() };
            assert_eq!(a[4], if step < 10 { 0.0 } else { 1.0 });
            assert_eq!([a[2], a[3], a[5]], [1.0, 1.0, 1.0]);
        }
        let Action::Continuous(a) = p.act(&[], &Context { step: 0, target: "G" }) else { panic!() };
        assert_eq!(&a[2..], &[0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn extraction_script_shape() {
        let mut p = HeuristicExt::new(&HeuristicConfig::default());
        assert_eq!(p.act(&[], &Context { step: 0, target: "dodecane" }), Action::Discrete(14));
        assert!(p.script.len() < 50);
        assert_eq!(*p.script.last().unwrap(), ext::END * 5);
    }

    #[test]
    fn seeds_are_distinct() {
        let seeds: Vec<u64> = (0..1000).map(|i| episode_seed(7, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
    }

    #[test]
    fn stats() {
        let t = |r: f64, target: &str| Trajectory {
            episode: 0,
            seed: 0,
            target: target.into(),
            initial_observation: None,
            steps: vec![],
            total_return: r,
            final_vessels: vec![],
        };
        let s = ReturnStats::from_trajectories(&[t(1.0, "a"), t(3.0, "b"), t(2.0, "a")]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
        assert_eq!(s.per_target["a"].mean, 1.5);
    }
}
