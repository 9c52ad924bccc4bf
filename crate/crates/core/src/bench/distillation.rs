use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{BenchKind, PhysicsConfig, ScenarioConfig};
use super::{
    choose_target, decode, ensure_running, layer_pixels, one_hot, purest, Action, ActionSpec, Environment,
    Ledger, ObservationSpec, StepInfo, StepResult, WURTZ_TARGETS,
};
use crate::materials::{MaterialRegistry, Phase};
use crate::thermal::apply_heat;
use crate::vessel::{self, absolute_purity, TransferReport, Vessel, ROOM_TEMPERATURE};
use crate::{Error, Result};

pub const ACTIONS: usize = 4;
pub const MULTIPLIERS: usize = 10;

pub const HEAT: usize = 0;
pub const POUR_DV_B1: usize = 1;
pub const POUR_B1_B2: usize = 2;
pub const END: usize = 3;

const SOLVENT: &str = "diethyl ether";
const SALT: &str = "sodium chloride";
const FILLER: &str = "dodecane";

/// Signed heat multiplier for index `m`: -1 at 0 up to +1 at 9.
pub fn heat_multiplier(m: usize) -> f64 {
    -1.0 + 2.0 * m as f64 / (MULTIPLIERS - 1) as f64
}

/// Pour fraction for index `m`: 0.1 up to 1.0.
pub fn pour_fraction(m: usize) -> f64 {
    (m + 1) as f64 / MULTIPLIERS as f64
}

/// Distillation bench: a distillation vessel (DV) whose vapour condenses
/// into B1, and a second beaker B2.
///
/// | action | effect |
/// |---|---|
/// | 0 | heat (or cool) DV by the signed multiplier times the heat unit |
/// | 1 | pour DV into B1 |
/// | 2 | pour B1 into B2 |
/// | 3 | end the experiment |
pub struct DistillationBench {
    registry: Arc<MaterialRegistry>,
    physics: PhysicsConfig,
    targets: Vec<String>,
    target: String,
    vessels: [Vessel; 3],
    input: Option<Vessel>,
    rng: ChaCha8Rng,
    initial_purity: f64,
    max_steps: usize,
    step_count: usize,
    done: bool,
    ledger: Ledger,
}

impl DistillationBench {
    pub fn new(config: &ScenarioConfig, registry: Arc<MaterialRegistry>) -> Result<Self> {
        for name in WURTZ_TARGETS.iter().chain(&[SOLVENT]) {
            registry.lookup(name).map_err(|e| Error::Config(e.to_string()))?;
        }
        let p = &config.physics;
        let targets: Vec<String> = WURTZ_TARGETS.iter().map(|s| s.to_string()).collect();
        let capacity = p.vessel_capacity;
        Ok(DistillationBench {
            vessels: [
                Vessel::new("DV", capacity, &registry),
                Vessel::new("B1", capacity, &registry),
                Vessel::new("B2", capacity, &registry),
            ],
            registry,
            physics: p.clone(),
            target: targets[0].clone(),
            targets,
            input: None,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            initial_purity: 0.0,
            max_steps: config.max_steps(),
            step_count: 0,
            done: true,
            ledger: Ledger::default(),
        })
    }

    pub fn initial_purity(&self) -> f64 {
        self.initial_purity
    }

    fn observe(&mut self) -> Vec<f64> {
        let refs: Vec<&Vessel> = self.vessels.iter().collect();
        let mut obs = layer_pixels(&refs, self.physics.pixels, &mut self.rng, &self.registry);
        obs.extend(one_hot(&self.targets, &self.target));
        obs
    }

    fn purity(&self) -> f64 {
        let refs: Vec<&Vessel> = self.vessels.iter().collect();
        absolute_purity(&refs, &self.target, &self.registry)
    }

    fn target_amount(&self) -> f64 {
        self.vessels
            .iter()
            .map(|v| v.formula_units(&self.target, &self.registry))
            .sum()
    }

    fn record(&mut self, report: TransferReport) {
        for (m, n) in report.overflow {
            self.ledger.lose(&self.registry, &m, n);
        }
    }
}

impl Environment for DistillationBench {
    fn kind(&self) -> BenchKind {
        BenchKind::Dit
    }

    fn spaces(&self) -> (ActionSpec, ObservationSpec) {
        let px = self.physics.pixels;
        (
            ActionSpec::Discrete {
                actions: ACTIONS,
                multipliers: MULTIPLIERS,
            },
            ObservationSpec {
                segments: vec![
                    ("DV".into(), px),
                    ("B1".into(), px),
                    ("B2".into(), px),
                    ("target".into(), self.targets.len()),
                ],
            },
        )
    }

    fn reset(&mut self, seed: u64, target: Option<&str>) -> Result<Vec<f64>> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.target = choose_target(&mut self.rng, &self.targets, target)?;
        let reg = &self.registry;
        let capacity = self.physics.vessel_capacity;
        let dv = match &self.input {
            Some(input) => {
                let mut v = input.clone();
                v.label = "DV".into();
                v.temperature = ROOM_TEMPERATURE;
                v.volume_capacity = capacity.max(v.liquid_volume(reg));
                v
            }
            None => {
                let mut v = Vessel::new("DV", capacity, reg);
                v.add_material(reg, SOLVENT, self.physics.solvent_moles, Phase::Liquid)?;
                v.add_material(reg, &self.target, 1.0, Phase::Dissolved)?;
                let other = if self.target == SALT { FILLER } else { SALT };
                v.add_material(reg, other, 1.0, Phase::Dissolved)?;
                v
            }
        };
        self.vessels = [dv, Vessel::new("B1", capacity, reg), Vessel::new("B2", capacity, reg)];
        self.step_count = 0;
        self.done = false;
        self.ledger = Ledger::default();
        self.ledger.supply_vessel(&self.registry, &self.vessels[0]);
        self.initial_purity = self.purity();
        Ok(self.observe())
    }

    fn step(&mut self, action: &Action) -> Result<StepResult> {
        ensure_running(self.done)?;
        let Action::Discrete(index) = *action else {
            return Err(Error::Validation("the distillation bench takes a discrete action index".into()));
        };
        let (a, m) = decode(index, ACTIONS, MULTIPLIERS)?;
        let reg = Arc::clone(&self.registry);
        match a {
            HEAT => {
                let heat = heat_multiplier(m) * self.physics.heat_unit;
                let [dv, b1, _] = &mut self.vessels;
                match apply_heat(dv, b1, heat, &reg) {
                    Ok(report) => {
                        for (name, n) in report.vented {
                            self.ledger.lose(&reg, &name, n);
                        }
                    }
                    Err(Error::EmptyVessel(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            POUR_DV_B1 => {
                let [dv, b1, _] = &mut self.vessels;
                let r = vessel::pour(dv, b1, pour_fraction(m), &reg);
                self.record(r);
            }
            POUR_B1_B2 => {
                let [_, b1, b2] = &mut self.vessels;
                let r = vessel::pour(b1, b2, pour_fraction(m), &reg);
                self.record(r);
            }
            _ => self.done = true,
        }
        self.step_count += 1;
        if self.step_count >= self.max_steps {
            self.done = true;
        }
        let reward = if self.done {
            (self.purity() - self.initial_purity) * self.target_amount()
        } else {
            0.0
        };
        Ok(StepResult {
            observation: self.observe(),
            reward,
            done: self.done,
            info: StepInfo {
                step: self.step_count,
                vessels: if self.done { self.vessels.to_vec() } else { vec![] },
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
        self.vessels.iter().collect()
    }

    fn output_vessel(&self) -> &Vessel {
        purest(&self.vessels(), &self.target, &self.registry)
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

    fn reward_ceiling(&self) -> f64 {
        (1.0 - self.initial_purity) * self.target_amount()
    }
}
