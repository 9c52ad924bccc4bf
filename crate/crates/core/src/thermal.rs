//! Heating, boiling and cooling for the distillation bench.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::materials::{MaterialRegistry, Phase};
use crate::vessel::Vessel;
use crate::{Error, Result};

/// Lowest temperature cooling can reach, K.
pub const MIN_TEMPERATURE: f64 = 0.1;

/// Where the heat of one event went, J. `vaporized` and `vented` are mol.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HeatReport {
    pub sensible: f64,
    pub latent: f64,
    /// Heat that had nowhere to go (cooling past the floor).
    pub unused: f64,
    pub vaporized: BTreeMap<String, f64>,
    /// Condensate that did not fit in the condenser.
    pub vented: BTreeMap<String, f64>,
}

impl HeatReport {
    pub fn total(&self) -> f64 {
        self.sensible + self.latent + self.unused
    }
}

/// Liquids present in the vessel, lowest boiling point first.
pub fn boil_point_order(vessel: &Vessel, registry: &MaterialRegistry) -> Vec<(String, f64)> {
    let mut order: Vec<(String, f64)> = vessel
        .liquids
        .iter()
        .filter(|(_, n)| **n > 0.0)
        .filter_map(|(name, _)| Some((name.clone(), registry.get(name)?.boiling_point)))
        .collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    order
}

/// Adds `heat` joules to `source` (negative values cool it).
///
/// Below the lowest boiling point the temperature rises by heat over heat
/// capacity. At a boiling point the temperature holds and the heat vaporizes
/// that liquid, which condenses into `condenser` without any of its
/// solutes. Solutes left without solvent precipitate.
pub fn apply_heat(
    source: &mut Vessel,
    condenser: &mut Vessel,
    heat: f64,
    registry: &MaterialRegistry,
) -> Result<HeatReport> {
    let mut report = HeatReport::default();
    if heat == 0.0 {
        return Ok(report);
    }
    if source.heat_capacity(registry) <= 0.0 {
        return Err(Error::EmptyVessel(source.label.clone()));
    }
    if heat < 0.0 {
        let c = source.heat_capacity(registry);
        let t = (source.temperature + heat / c).max(MIN_TEMPERATURE);
        report.sensible = (t - source.temperature) * c;
        report.unused = heat - report.sensible;
        source.temperature = t;
        return Ok(report);
    }

    let mut remaining = heat;
    while remaining > 0.0 {
        let c = source.heat_capacity(registry);
        if c <= 0.0 {
            report.unused += remaining;
            break;
        }
        let Some((name, bp)) = boil_point_order(source, registry).into_iter().next() else {
            source.temperature += remaining / c;
            report.sensible += remaining;
            break;
        };
        if source.temperature < bp {
            let needed = (bp - source.temperature) * c;
            if remaining <= needed {
                source.temperature += remaining / c;
                report.sensible += remaining;
                break;
            }
            source.temperature = bp;
            report.sensible += needed;
            remaining -= needed;
        }
        let m = registry.lookup(&name)?;
        let present = source.liquids.get(&name).copied().unwrap_or(0.0);
        let boiled = (remaining / m.enthalpy_vaporization).min(present);
        let exhausted = boiled >= present;
        let spent = if exhausted { boiled * m.enthalpy_vaporization } else { remaining };
        if exhausted {
            source.liquids.remove(&name);
        } else {
            *source.liquids.get_mut(&name).unwrap() -= boiled;
        }
        report.latent += spent;
        remaining -= spent;
        *report.vaporized.entry(name.clone()).or_insert(0.0) += boiled;

        let room = condenser.headspace(registry);
        let fits = boiled.min(room / m.liquid_volume(1.0));
        if fits > 0.0 {
            condenser.add_material(registry, &name, fits, Phase::Liquid)?;
        }
        if boiled - fits > 0.0 {
            *report.vented.entry(name.clone()).or_insert(0.0) += boiled - fits;
        }
        source.equilibrate(registry);
        if !exhausted {
            break;
        }
    }
    Ok(report)
}
