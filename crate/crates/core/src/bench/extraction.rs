use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{BenchKind, PhysicsConfig, ScenarioConfig};
use super::{
    choose_target, decode, ensure_running, layer_pixels, one_hot, purest, Action, ActionSpec, Environment,
    Ledger, ObservationSpec, StepInfo, StepResult, WURTZ_TARGETS,
};
use crate::layers;
use crate::materials::{MaterialRegistry, Phase};
use crate::vessel::{self, solute_purity, TransferReport, Vessel};
use crate::{Error, Result};

pub const ACTIONS: usize = 8;
pub const MULTIPLIERS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

pub const MIX: usize = 0;
pub const SETTLE: usize = 1;
pub const ADD_S1: usize = 2;
pub const ADD_S2: usize = 3;
pub const DRAIN_EV_B1: usize = 4;
pub const POUR_EV_B2: usize = 5;
pub const POUR_B2_EV: usize = 6;
pub const END: usize = 7;

const SOLVENT: &str = "diethyl ether";
const SALT: &str = "sodium chloride";
const FILLER: &str = "dodecane";

/// Extraction bench: an extraction vessel (EV) and two beakers (B1, B2).
///
/// | action | effect (scaled by the multiplier) |
/// |---|---|
/// | 0 | mix EV |
/// | 1 | let every vessel settle |
/// | 2 | add solvent S1 to EV |
/// | 3 | add solvent S2 to EV |
/// | 4 | drain the bottom of EV into B1 |
/// | 5 | pour the top of EV into B2 |
/// | 6 | pour the top of B2 back into EV |
/// | 7 | end the experiment |
pub struct ExtractionBench {
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

impl ExtractionBench {
    pub fn new(config: &ScenarioConfig, registry: Arc<MaterialRegistry>) -> Result<Self> {
        let p = &config.physics;
        for name in WURTZ_TARGETS.iter().chain(&[SOLVENT, p.solvents.0.as_str(), p.solvents.1.as_str()]) {
            registry.lookup(name).map_err(|e| Error::Config(e.to_string()))?;
        }
        let targets: Vec<String> = WURTZ_TARGETS.iter().map(|s| s.to_string()).collect();
        let capacity = p.vessel_capacity;
        let vessels = [
            Vessel::new("EV", capacity, &registry),
            Vessel::new("B1", capacity, &registry),
            Vessel::new("B2", capacity, &registry),
        ];
        Ok(ExtractionBench {
            registry,
            physics: p.clone(),
            target: targets[0].clone(),
            targets,
            vessels,
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
        solute_purity(&refs, &self.target, &self.registry)
    }

    fn target_amount(&self) -> f64 {
        self.vessels
            .iter()
            .map(|v| v.formula_units(&self.target, &self.registry))
            .sum()
    }

    fn add_solvent(&mut self, solvent: &str, litres: f64) -> Result<()> {
        let ev = &mut self.vessels[0];
        let litres = litres.min(ev.headspace(&self.registry));
        let moles = litres / self.registry.lookup(solvent)?.liquid_volume(1.0);
        if moles > 0.0 {
            ev.add_material(&self.registry, solvent, moles, Phase::Liquid)?;
            self.ledger.supply(&self.registry, solvent, moles);
        }
        Ok(())
    }

    fn record(&mut self, report: TransferReport) {
        for (m, n) in report.overflow {
            self.ledger.lose(&self.registry, &m, n);
        }
    }
}

impl Environment for ExtractionBench {
    fn kind(&self) -> BenchKind {
        BenchKind::Ext
    }

    fn spaces(&self) -> (ActionSpec, ObservationSpec) {
        let px = self.physics.pixels;
        (
            ActionSpec::Discrete {
                actions: ACTIONS,
                multipliers: MULTIPLIERS.len(),
            },
            ObservationSpec {
                segments: vec![
                    ("EV".into(), px),
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
        let ev = match &self.input {
            Some(input) => {
                let mut v = input.clone();
                v.label = "EV".into();
                v.volume_capacity = capacity.max(v.liquid_volume(reg));
                v.stir(reg);
                v
            }
            None => {
                let mut v = Vessel::new("EV", capacity, reg);
                v.add_material(reg, SOLVENT, self.physics.solvent_moles, Phase::Liquid)?;
                v.add_material(reg, SALT, 1.0, Phase::Dissolved)?;
                let product = if self.target == SALT { FILLER } else { self.target.as_str() };
                v.add_material(reg, product, 1.0, Phase::Dissolved)?;
                v
            }
        };
        self.vessels = [ev, Vessel::new("B1", capacity, reg), Vessel::new("B2", capacity, reg)];
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
            return Err(Error::Validation("the extraction bench takes a discrete action index".into()));
        };
        let (a, m) = decode(index, ACTIONS, MULTIPLIERS.len())?;
        let mult = MULTIPLIERS[m];
        let reg = Arc::clone(&self.registry);
        let (s1, s2) = self.physics.solvents.clone();
        match a {
            MIX => layers::mix(&mut self.vessels[0], mult * self.physics.mix_unit, &reg),
            SETTLE => {
                for v in self.vessels.iter_mut() {
                    layers::settle(v, mult * self.physics.settle_unit, &reg);
                }
            }
            ADD_S1 => self.add_solvent(&s1, mult * self.physics.solvent_unit)?,
            ADD_S2 => self.add_solvent(&s2, mult * self.physics.solvent_unit)?,
            DRAIN_EV_B1 => {
                let [ev, b1, _] = &mut self.vessels;
                let r = vessel::drain(ev, b1, mult, &reg);
                self.record(r);
            }
            POUR_EV_B2 => {
                let [ev, _, b2] = &mut self.vessels;
                let r = vessel::pour(ev, b2, mult, &reg);
                self.record(r);
            }
            POUR_B2_EV => {
                let [ev, _, b2] = &mut self.vessels;
                let r = vessel::pour(b2, ev, mult, &reg);
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
