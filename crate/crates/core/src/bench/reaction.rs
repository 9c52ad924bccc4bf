use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{BenchKind, PhysicsConfig, ScenarioConfig};
use super::{
    choose_target, ensure_running, one_hot, Action, ActionSpec, Environment, Ledger, ObservationSpec,
    StepInfo, StepResult, FICTITIOUS_TARGETS, WURTZ_TARGETS,
};
use crate::characterization::uv_vis;
use crate::kinetics::{self, IntegratorConfig, ReactionNetwork};
use crate::materials::{MaterialRegistry, Phase};
use crate::vessel::Vessel;
use crate::{Error, Result};

const SOLVENT: &str = "diethyl ether";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scenario {
    Wurtz,
    Fictitious,
}

/// Reaction bench: a vessel of solvent, a reactant inventory and a network.
///
/// Action vector: `[temperature, volume, add_0, .., add_{n-1}]`. The first
/// two map [0, 1] onto [-1, 1] times the unit change (0.5 leaves them
/// alone); each `add_i` adds that fraction of reactant `i`'s remaining
/// inventory.
pub struct ReactionBench {
    registry: Arc<MaterialRegistry>,
    network: Arc<ReactionNetwork>,
    physics: PhysicsConfig,
    integrator: IntegratorConfig,
    scenario: Scenario,
    reactants: Vec<String>,
    initial: Vec<f64>,
    remaining: Vec<f64>,
    targets: Vec<String>,
    target: String,
    vessel: Vessel,
    input: Option<Vessel>,
    max_steps: usize,
    step_count: usize,
    done: bool,
    ledger: Ledger,
}

impl ReactionBench {
    pub fn new(config: &ScenarioConfig, registry: Arc<MaterialRegistry>, network: Arc<ReactionNetwork>) -> Result<Self> {
        let (scenario, reactants, initial, targets): (Scenario, &[&str], Vec<f64>, &[&str]) =
            match config.scenario.as_str() {
                "wurtz" => (
                    Scenario::Wurtz,
                    &["1-chlorohexane", "2-chlorohexane", "3-chlorohexane", "sodium"],
                    vec![1.0; 4],
                    &WURTZ_TARGETS,
                ),
                "fictitious" => (
                    Scenario::Fictitious,
                    &["A", "B", "C", "D"],
                    vec![1.0, 1.0, 1.0, 3.0],
                    &FICTITIOUS_TARGETS,
                ),
                other => return Err(Error::UnknownScenario(other.to_string())),
            };
        for name in reactants.iter().chain(targets) {
            if network.index_of(name).is_none() {
                return Err(Error::Config(format!(
                    "reaction network `{}` does not involve `{name}`, required by the {} scenario",
                    network.name, config.scenario
                )));
            }
        }
        network
            .check_registry(&registry)
            .and_then(|_| registry.lookup(SOLVENT).map(|_| ()))
            .map_err(|e| Error::Config(e.to_string()))?;
        let targets: Vec<String> = targets.iter().map(|s| s.to_string()).collect();
        let vessel = Vessel::new("RV", config.physics.initial_volume, &registry);
        Ok(ReactionBench {
            registry,
            network,
            physics: config.physics.clone(),
            integrator: config.integrator,
            scenario,
            reactants: reactants.iter().map(|s| s.to_string()).collect(),
            remaining: initial.clone(),
            initial,
            target: targets[0].clone(),
            targets,
            vessel,
            input: None,
            max_steps: config.max_steps(),
            step_count: 0,
            done: true,
            ledger: Ledger::default(),
        })
    }

    pub fn reactants(&self) -> &[String] {
        &self.reactants
    }

    pub fn remaining(&self) -> &[f64] {
        &self.remaining
    }

    pub fn network(&self) -> &ReactionNetwork {
        &self.network
    }

    pub fn vessel(&self) -> &Vessel {
        &self.vessel
    }

    fn observe(&self) -> Vec<f64> {
        let p = &self.physics;
        let mut obs = uv_vis(&self.vessel, p.spectrum_bins, &self.registry).bins;
        let (t0, t1) = p.temperature_range;
        let (v0, v1) = p.volume_range;
        obs.push(((self.vessel.temperature - t0) / (t1 - t0)).clamp(0.0, 1.0));
        obs.push(((self.vessel.volume_capacity - v0) / (v1 - v0)).clamp(0.0, 1.0));
        obs.push((self.vessel.pressure / p.pressure_scale).clamp(0.0, 1.0));
        obs.extend(
            self.remaining
                .iter()
                .zip(&self.initial)
                .map(|(r, i)| if *i > 0.0 { (r / i).clamp(0.0, 1.0) } else { 0.0 }),
        );
        obs.extend(one_hot(&self.targets, &self.target));
        obs
    }

    fn reward(&self) -> f64 {
        let amount = |m: &str| self.vessel.formula_units(m, &self.registry);
        match self.scenario {
            Scenario::Wurtz => amount(&self.target),
            Scenario::Fictitious if self.target == "E" => amount("E"),
            Scenario::Fictitious => amount(&self.target) - amount("E"),
        }
    }

    fn add_reactant(&mut self, i: usize, amount: f64) -> Result<()> {
        let name = self.reactants[i].clone();
        let m = self.registry.lookup(&name)?;
        let phase = if m.is_solute() && !self.vessel.host_volumes(&self.registry).is_empty() {
            Phase::Dissolved
        } else {
            m.phase_default
        };
        self.vessel.add_material(&self.registry, &name, amount, phase)?;
        self.remaining[i] -= amount;
        self.ledger.supply(&self.registry, &name, amount);
        Ok(())
    }
}

impl Environment for ReactionBench {
    fn kind(&self) -> BenchKind {
        BenchKind::Rxn
    }

    fn spaces(&self) -> (ActionSpec, ObservationSpec) {
        let n = self.reactants.len();
        (
            ActionSpec::Continuous { dim: n + 2 },
            ObservationSpec {
                segments: vec![
                    ("spectrum".into(), self.physics.spectrum_bins),
                    ("temperature".into(), 1),
                    ("volume".into(), 1),
                    ("pressure".into(), 1),
                    ("remaining".into(), n),
                    ("target".into(), self.targets.len()),
                ],
            },
        )
    }

    fn reset(&mut self, seed: u64, target: Option<&str>) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.target = choose_target(&mut rng, &self.targets, target)?;
        let p = &self.physics;
        self.vessel = match &self.input {
            Some(input) => {
                let mut v = input.clone();
                v.label = "RV".into();
                v.temperature = p.initial_temperature;
                v.volume_capacity = p.initial_volume.max(v.liquid_volume(&self.registry));
                v
            }
            None => {
                let mut v = Vessel::new("RV", p.initial_volume, &self.registry);
                v.temperature = p.initial_temperature;
                v.add_material(&self.registry, SOLVENT, p.solvent_moles, Phase::Liquid)?;
                v
            }
        };
        self.remaining = self.initial.clone();
        self.step_count = 0;
        self.done = false;
        self.ledger = Ledger::default();
        self.ledger.supply_vessel(&self.registry, &self.vessel);
        Ok(self.observe())
    }

    fn step(&mut self, action: &Action) -> Result<StepResult> {
        ensure_running(self.done)?;
        let n = self.reactants.len();
        let Action::Continuous(values) = action else {
            return Err(Error::Validation("the reaction bench takes a continuous action vector".into()));
        };
        if values.len() != n + 2 {
            return Err(Error::DimensionMismatch {
                expected: n + 2,
                actual: values.len(),
            });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Validation("action contains NaN".into()));
        }
        let a: Vec<f64> = values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let p = &self.physics;
        let (t0, t1) = p.temperature_range;
        let (v0, v1) = p.volume_range;
        self.vessel.temperature = (self.vessel.temperature + (2.0 * a[0] - 1.0) * p.d_temperature).clamp(t0, t1);
        let liquid = self.vessel.liquid_volume(&self.registry);
        self.vessel.volume_capacity = (self.vessel.volume_capacity + (2.0 * a[1] - 1.0) * p.d_volume)
            .clamp(v0, v1)
            .max(liquid);
        for i in 0..n {
            let amount = if a[2 + i] >= 1.0 {
                self.remaining[i]
            } else {
                a[2 + i] * self.remaining[i]
            };
            if amount > 0.0 {
                self.add_reactant(i, amount)?;
            }
        }
        kinetics::integrate(
            &self.network,
            &mut self.vessel,
            self.physics.dt_per_step,
            &self.integrator,
            &self.registry,
        )?;
        self.step_count += 1;
        self.done = self.step_count >= self.max_steps;
        let reward = if self.done { self.reward() } else { 0.0 };
        Ok(StepResult {
            observation: self.observe(),
            reward,
            done: self.done,
            info: StepInfo {
                step: self.step_count,
                vessels: if self.done { vec![self.vessel.clone()] } else { vec![] },
            },
        })
    }

    fn registry(&self) -> &MaterialRegistry {
        &self.registry
    }

    fn targets(&self) -> Vec<String> {
        self.targets.clone()
    }

    fn target(&self) -> &str {
        &self.target
    }

    fn step_count(&self) -> usize {
        self.step_count
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn vessels(&self) -> Vec<&Vessel> {
        vec![&self.vessel]
    }

    fn output_vessel(&self) -> &Vessel {
        &self.vessel
    }

    fn set_input(&mut self, vessel: Option<Vessel>) -> Result<()> {
        if let Some(v) = &vessel {
            v.check_registry(&self.registry)?;
        }
        self.input = vessel;
        Ok(())
    }

    fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    /// Every shipped target is limited by a 1 mol reactant: sodium chloride
    /// by the sodium (1 mol), each coupling product by the two sodium atoms it
    /// consumes (0.5 mol), and each fictitious product by A, B or C (1 mol).
    fn reward_ceiling(&self) -> f64 {
        match self.scenario {
            Scenario::Wurtz if self.target == "sodium chloride" => 1.0,
            Scenario::Wurtz => 0.5,
            Scenario::Fictitious => 1.0,
        }
    }
}
