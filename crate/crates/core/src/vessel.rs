//! Vessels, material transfers and purity metrics.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::layers::{self, LayerProfile, T_MIX};
use crate::materials::{MaterialRegistry, Phase};
use crate::{Error, Result};

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

/// Standard atmospheric pressure, kPa.
pub const ATMOSPHERIC_PRESSURE: f64 = 101.325;

pub const ROOM_TEMPERATURE: f64 = 298.15;

/// Amounts this close to zero are treated as zero.
pub const AMOUNT_TOLERANCE: f64 = 1e-12;

type Amounts = BTreeMap<String, f64>;

/// A container of materials.
///
/// Liquids hold every material present as a liquid phase; the ones with the
/// solvent role can host dissolved solutes. `solutes[s][l]` is the amount of
/// `s` dissolved in solvent `l`. Dissolved amounts occupy no volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vessel {
    pub label: String,
    /// Name of the registry the contents refer to.
    pub registry: String,
    /// K
    pub temperature: f64,
    /// L
    pub volume_capacity: f64,
    /// kPa
    pub pressure: f64,
    pub settle_time: f64,
    pub liquids: Amounts,
    pub solutes: BTreeMap<String, Amounts>,
    pub solids: Amounts,
    pub gases: Amounts,
}

/// What a pour or drain moved, and what spilled over the destination rim.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub liquids: Amounts,
    pub dissolved: Amounts,
    pub overflow: Amounts,
}

impl TransferReport {
    pub fn overflow_total(&self) -> f64 {
        self.overflow.values().sum()
    }
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format_version: u32,
    vessel: Vessel,
}

fn bump(map: &mut Amounts, key: &str, amount: f64) {
    if amount == 0.0 {
        return;
    }
    let entry = map.entry(key.to_string()).or_insert(0.0);
    *entry += amount;
    if *entry <= AMOUNT_TOLERANCE {
        debug_assert!(*entry > -1e-9, "amount of {key} went negative: {entry}");
        map.remove(key);
    }
}

impl Vessel {
    pub fn new(label: impl Into<String>, volume_capacity: f64, registry: &MaterialRegistry) -> Self {
        Vessel {
            label: label.into(),
            registry: registry.name().to_string(),
            temperature: ROOM_TEMPERATURE,
            volume_capacity,
            pressure: ATMOSPHERIC_PRESSURE,
            settle_time: T_MIX,
            liquids: Amounts::new(),
            solutes: BTreeMap::new(),
            solids: Amounts::new(),
            gases: Amounts::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.liquids.is_empty() && self.solutes.is_empty() && self.solids.is_empty() && self.gases.is_empty()
    }

    /// Volume in litres of every liquid, in storage order.
    pub fn liquid_volumes(&self, registry: &MaterialRegistry) -> Vec<(String, f64)> {
        self.liquids
            .iter()
            .filter_map(|(name, n)| {
                let m = registry.get(name)?;
                Some((name.clone(), m.liquid_volume(*n)))
            })
            .filter(|(_, v)| *v > 0.0)
            .collect()
    }

    pub fn liquid_volume(&self, registry: &MaterialRegistry) -> f64 {
        self.liquid_volumes(registry).iter().map(|(_, v)| v).sum()
    }

    /// Room left before the liquid reaches the rim, L.
    pub fn headspace(&self, registry: &MaterialRegistry) -> f64 {
        (self.volume_capacity - self.liquid_volume(registry)).max(0.0)
    }

    /// Volumes of the solvents able to host dissolved solutes.
    pub fn host_volumes(&self, registry: &MaterialRegistry) -> Vec<(String, f64)> {
        self.liquid_volumes(registry)
            .into_iter()
            .filter(|(name, _)| registry.get(name).is_some_and(|m| m.is_solvent()))
            .collect()
    }

    /// Amount of `material` across all phases, under its own name only.
    pub fn total_moles(&self, material: &str) -> f64 {
        self.liquids.get(material).copied().unwrap_or(0.0)
            + self.solids.get(material).copied().unwrap_or(0.0)
            + self.gases.get(material).copied().unwrap_or(0.0)
            + self.dissolved_total(material)
    }

    pub fn dissolved_total(&self, solute: &str) -> f64 {
        self.solutes.get(solute).map_or(0.0, |by| by.values().sum())
    }

    /// Whole formula units of `material`, counting dissolved ions as
    /// recombinable units.
    pub fn formula_units(&self, material: &str, registry: &MaterialRegistry) -> f64 {
        let own = self.total_moles(material);
        match registry.get(material) {
            Some(m) if !m.dissociates.is_empty() => {
                let paired = m
                    .dissociates
                    .iter()
                    .map(|d| self.total_moles(&d.species) / d.count as f64)
                    .fold(f64::INFINITY, f64::min);
                own + paired
            }
            _ => own,
        }
    }

    /// Every material in the vessel counted as the species it consists of:
    /// a material that dissociates counts as its ions in every phase.
    pub fn species_totals(&self, registry: &MaterialRegistry) -> Amounts {
        let mut totals = Amounts::new();
        let mut add = |name: &str, n: f64| match registry.get(name) {
            Some(m) if !m.dissociates.is_empty() => {
                for d in &m.dissociates {
                    *totals.entry(d.species.clone()).or_insert(0.0) += n * d.count as f64;
                }
            }
            _ => *totals.entry(name.to_string()).or_insert(0.0) += n,
        };
        for map in [&self.liquids, &self.solids, &self.gases] {
            for (name, n) in map {
                add(name, *n);
            }
        }
        for (name, by) in &self.solutes {
            add(name, by.values().sum());
        }
        totals
    }

    /// Names of every material stored anywhere in the vessel.
    pub fn materials(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .liquids
            .keys()
            .chain(self.solids.keys())
            .chain(self.gases.keys())
            .chain(self.solutes.keys())
            .cloned()
            .collect();
        names.sort();
        names.dedup();
        names
    }

    /// Total heat capacity of the contents, J/K.
    pub fn heat_capacity(&self, registry: &MaterialRegistry) -> f64 {
        self.materials()
            .iter()
            .filter_map(|name| {
                let m = registry.get(name)?;
                Some(self.total_moles(name) * m.heat_capacity_molar)
            })
            .sum()
    }

    /// Share of a solute's dissolved amount held by each host solvent.
    pub fn partition_fractions(&self, solute: &str) -> Amounts {
        let total = self.dissolved_total(solute);
        match self.solutes.get(solute) {
            Some(by) if total > 0.0 => by.iter().map(|(l, n)| (l.clone(), n / total)).collect(),
            _ => Amounts::new(),
        }
    }

    pub(crate) fn set_partition(&mut self, solute: &str, total: f64, fractions: &Amounts) {
        let by: Amounts = fractions
            .iter()
            .map(|(l, f)| (l.clone(), total * f))
            .filter(|(_, n)| *n > 0.0)
            .collect();
        if by.is_empty() {
            self.solutes.remove(solute);
        } else {
            self.solutes.insert(solute.to_string(), by);
        }
    }

    /// Adds `amount` mol of `material` in the given phase.
    ///
    /// Dissolved additions are split across the solvents by volume, with
    /// dissociating materials entering as their ions. Adding a solvent stirs
    /// the vessel back to its fully mixed state.
    pub fn add_material(
        &mut self,
        registry: &MaterialRegistry,
        material: &str,
        amount: f64,
        phase: Phase,
    ) -> Result<()> {
        let m = registry.lookup(material)?;
        if !(amount >= 0.0 && amount.is_finite()) {
            return Err(Error::Validation(format!(
                "cannot add {amount} mol of `{material}`"
            )));
        }
        if amount == 0.0 {
            return Ok(());
        }
        match phase {
            Phase::Solid => bump(&mut self.solids, material, amount),
            Phase::Gas => bump(&mut self.gases, material, amount),
            Phase::Liquid => {
                let requested = self.liquid_volume(registry) + m.liquid_volume(amount);
                if requested > self.volume_capacity * (1.0 + 1e-12) + AMOUNT_TOLERANCE {
                    return Err(Error::CapacityExceeded {
                        vessel: self.label.clone(),
                        requested,
                        capacity: self.volume_capacity,
                    });
                }
                bump(&mut self.liquids, material, amount);
                if m.is_solvent() {
                    self.stir(registry);
                }
            }
            Phase::Dissolved => {
                if self.host_volumes(registry).is_empty() {
                    return Err(Error::NoSolventPresent(material.to_string()));
                }
                self.dissolve(material, amount, registry);
            }
        }
        self.equilibrate(registry);
        Ok(())
    }

    /// Resets the settle time and spreads every solute by solvent volume.
    pub fn stir(&mut self, registry: &MaterialRegistry) {
        self.settle_time = T_MIX;
        let fractions = layers::solvent_fractions(self, registry);
        let solutes: Vec<String> = self.solutes.keys().cloned().collect();
        for s in solutes {
            let total = self.dissolved_total(&s);
            self.set_partition(&s, total, &fractions);
        }
    }

    /// Dissolves `amount` of a material into the host solvents by volume.
    /// Callers must ensure a host exists.
    fn dissolve(&mut self, material: &str, amount: f64, registry: &MaterialRegistry) {
        let fractions = layers::solvent_fractions(self, registry);
        let species: Vec<(String, f64)> = match registry.get(material) {
            Some(m) if !m.dissociates.is_empty() => m
                .dissociates
                .iter()
                .map(|d| (d.species.clone(), amount * d.count as f64))
                .collect(),
            _ => vec![(material.to_string(), amount)],
        };
        for (s, n) in species {
            let by = self.solutes.entry(s).or_default();
            for (host, f) in &fractions {
                *by.entry(host.clone()).or_insert(0.0) += n * f;
            }
        }
    }

    /// Places `amount` of a material in its default phase.
    pub(crate) fn deposit_default(&mut self, material: &str, amount: f64, registry: &MaterialRegistry) {
        let phase = registry.get(material).map_or(Phase::Solid, |m| m.phase_default);
        match phase {
            Phase::Liquid => bump(&mut self.liquids, material, amount),
            Phase::Gas => bump(&mut self.gases, material, amount),
            _ => bump(&mut self.solids, material, amount),
        }
    }

    /// Places a newly formed material: dissolved when it is a solute and a
    /// solvent is present, otherwise in its default phase.
    pub(crate) fn deposit_product(&mut self, material: &str, amount: f64, registry: &MaterialRegistry) {
        let solute = registry.get(material).is_some_and(|m| m.is_solute() && !m.is_solvent());
        if solute && !self.host_volumes(registry).is_empty() {
            self.dissolve(material, amount, registry);
        } else {
            self.deposit_default(material, amount, registry);
        }
    }

    /// Removes `amount` of a material spread over every phase in proportion
    /// to what each holds. Returns the amount actually removed.
    pub(crate) fn withdraw(&mut self, material: &str, amount: f64) -> f64 {
        let total = self.total_moles(material);
        if total <= 0.0 || amount <= 0.0 {
            return 0.0;
        }
        let share = (amount / total).min(1.0);
        for map in [&mut self.liquids, &mut self.solids, &mut self.gases] {
            if let Some(n) = map.get(material).copied() {
                if share >= 1.0 {
                    map.remove(material);
                } else {
                    bump(map, material, -n * share);
                }
            }
        }
        if let Some(by) = self.solutes.get_mut(material) {
            if share >= 1.0 {
                self.solutes.remove(material);
            } else {
                let hosts: Vec<String> = by.keys().cloned().collect();
                for host in hosts {
                    let n = by[&host];
                    bump(by, &host, -n * share);
                }
                if by.is_empty() {
                    self.solutes.remove(material);
                }
            }
        }
        total.min(amount)
    }

    /// Applies solubility limits: dissolved excess precipitates into its
    /// default phase, undissolved solutes dissolve while room remains, and
    /// solutes left without any solvent fall out of solution.
    pub fn equilibrate(&mut self, registry: &MaterialRegistry) {
        let hosts = self.host_volumes(registry);
        let host_volume: f64 = hosts.iter().map(|(_, v)| v).sum();
        if host_volume <= 0.0 {
            let dissolved: Vec<(String, f64)> = self
                .solutes
                .iter()
                .map(|(s, by)| (s.clone(), by.values().sum()))
                .collect();
            self.solutes.clear();
            for (s, n) in dissolved {
                self.deposit_default(&s, n, registry);
            }
            self.recombine(registry);
            return;
        }

        // Dissolved amounts may sit in a solvent that has since left.
        let fractions = layers::solvent_fractions(self, registry);
        let stranded: Vec<(String, f64)> = self
            .solutes
            .iter()
            .filter(|(_, by)| by.keys().any(|h| !fractions.contains_key(h)))
            .map(|(s, by)| (s.clone(), by.iter().filter(|(h, _)| !fractions.contains_key(*h)).map(|(_, n)| n).sum()))
            .collect();
        for (s, n) in stranded {
            let by = self.solutes.get_mut(&s).unwrap();
            by.retain(|h, _| fractions.contains_key(h));
            for (host, f) in &fractions {
                *by.entry(host.clone()).or_insert(0.0) += n * f;
            }
        }

        for parent in registry.iter().filter(|m| !m.dissociates.is_empty()) {
            let units = parent
                .dissociates
                .iter()
                .map(|d| self.dissolved_total(&d.species) / d.count as f64)
                .fold(f64::INFINITY, f64::min);
            let cap = parent.solubility_limit * host_volume;
            if units.is_finite() && units > cap {
                let excess = units - cap;
                for d in &parent.dissociates {
                    self.take_dissolved(&d.species, excess * d.count as f64);
                }
                bump(&mut self.solids, &parent.name, excess);
            }
        }
        let names: Vec<String> = self.solutes.keys().cloned().collect();
        for s in names {
            let Some(m) = registry.get(&s) else { continue };
            let cap = m.solubility_limit * host_volume;
            let dissolved = self.dissolved_total(&s);
            if dissolved > cap {
                self.take_dissolved(&s, dissolved - cap);
                self.deposit_default(&s, dissolved - cap, registry);
            }
        }
        self.recombine(registry);

        for m in registry.iter().filter(|m| m.is_solute() && !m.is_solvent()) {
            let free = match m.phase_default {
                Phase::Liquid => self.liquids.get(&m.name).copied().unwrap_or(0.0),
                Phase::Gas => 0.0,
                _ => self.solids.get(&m.name).copied().unwrap_or(0.0),
            };
            if free <= 0.0 {
                continue;
            }
            let dissolved_units = if m.dissociates.is_empty() {
                self.dissolved_total(&m.name)
            } else {
                m.dissociates
                    .iter()
                    .map(|d| self.dissolved_total(&d.species) / d.count as f64)
                    .fold(f64::INFINITY, f64::min)
            };
            let room = m.solubility_limit * host_volume - dissolved_units;
            let amount = free.min(room);
            if amount > AMOUNT_TOLERANCE {
                match m.phase_default {
                    Phase::Liquid => bump(&mut self.liquids, &m.name, -amount),
                    _ => bump(&mut self.solids, &m.name, -amount),
                }
                self.dissolve(&m.name, amount, registry);
            }
        }
    }

    fn take_dissolved(&mut self, solute: &str, amount: f64) {
        let total = self.dissolved_total(solute);
        if total <= 0.0 {
            return;
        }
        let share = (amount / total).min(1.0);
        if let Some(by) = self.solutes.get_mut(solute) {
            let hosts: Vec<String> = by.keys().cloned().collect();
            for h in hosts {
                let n = by[&h];
                bump(by, &h, -n * share);
            }
            if by.is_empty() {
                self.solutes.remove(solute);
            }
        }
    }

    /// Pairs loose solid ions back into their parent salt.
    fn recombine(&mut self, registry: &MaterialRegistry) {
        for parent in registry.iter().filter(|m| !m.dissociates.is_empty()) {
            let units = parent
                .dissociates
                .iter()
                .map(|d| self.solids.get(&d.species).copied().unwrap_or(0.0) / d.count as f64)
                .fold(f64::INFINITY, f64::min);
            if units.is_finite() && units > 0.0 {
                for d in &parent.dissociates {
                    bump(&mut self.solids, &d.species, -units * d.count as f64);
                }
                bump(&mut self.solids, &parent.name, units);
            }
        }
    }

    /// Checks that every stored material belongs to `registry`.
    pub fn check_registry(&self, registry: &MaterialRegistry) -> Result<()> {
        if self.registry != registry.name() {
            return Err(Error::Config(format!(
                "vessel `{}` was written against registry `{}`, not `{}`",
                self.label,
                self.registry,
                registry.name()
            )));
        }
        for name in self.materials() {
            if !registry.contains(&name) {
                return Err(Error::Config(format!(
                    "vessel `{}` holds `{name}`, which registry `{}` does not declare",
                    self.label,
                    registry.name()
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let snapshot = Snapshot {
            format_version: SNAPSHOT_FORMAT_VERSION,
            vessel: self.clone(),
        };
        serde_json::to_string_pretty(&snapshot).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snapshot: Snapshot = serde_json::from_str(text).map_err(Error::from_json)?;
        if snapshot.format_version != SNAPSHOT_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported snapshot format_version {}",
                snapshot.format_version
            )));
        }
        Ok(snapshot.vessel)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Pours the top `fraction` of the liquid column of `src` into `dst`.
///
/// Solids and gases stay behind. Both vessels end up stirred.
pub fn pour(
    src: &mut Vessel,
    dst: &mut Vessel,
    fraction: f64,
    registry: &MaterialRegistry,
) -> TransferReport {
    let report = transfer(src, dst, fraction, registry, true);
    if fraction > 0.0 {
        src.stir(registry);
        dst.stir(registry);
        src.equilibrate(registry);
        dst.equilibrate(registry);
    }
    report
}

/// Drains the bottom `fraction` of the liquid column of `src` into `dst`.
///
/// The remainder of `src` keeps its stratification; `dst` ends up stirred.
pub fn drain(
    src: &mut Vessel,
    dst: &mut Vessel,
    fraction: f64,
    registry: &MaterialRegistry,
) -> TransferReport {
    let report = transfer(src, dst, fraction, registry, false);
    if fraction > 0.0 {
        dst.stir(registry);
        src.equilibrate(registry);
        dst.equilibrate(registry);
    }
    report
}

fn transfer(
    src: &mut Vessel,
    dst: &mut Vessel,
    fraction: f64,
    registry: &MaterialRegistry,
    from_top: bool,
) -> TransferReport {
    let fraction = fraction.clamp(0.0, 1.0);
    let mut report = TransferReport::default();
    if fraction == 0.0 {
        return report;
    }
    let profile = LayerProfile::of(src, registry);
    if profile.layers.is_empty() {
        return report;
    }
    let below = profile.cut_fractions(if from_top { 1.0 - fraction } else { fraction });
    let share: Amounts = profile
        .layers
        .iter()
        .zip(below)
        .map(|(l, b)| (l.material.clone(), if from_top { 1.0 - b } else { b }))
        .collect();

    let mut liquids = Amounts::new();
    for (name, s) in &share {
        let n = src.liquids.get(name).copied().unwrap_or(0.0);
        let moved = if *s >= 1.0 { n } else { n * s };
        if moved > 0.0 {
            bump(&mut src.liquids, name, -moved);
            if *s >= 1.0 {
                src.liquids.remove(name);
            }
            liquids.insert(name.clone(), moved);
        }
    }
    let mut dissolved: BTreeMap<String, Amounts> = BTreeMap::new();
    let solutes: Vec<String> = src.solutes.keys().cloned().collect();
    for s in solutes {
        let by = src.solutes.get_mut(&s).unwrap();
        let hosts: Vec<String> = by.keys().cloned().collect();
        for host in hosts {
            let f = share.get(&host).copied().unwrap_or(0.0);
            let n = by[&host];
            let moved = if f >= 1.0 { n } else { n * f };
            if moved > 0.0 {
                if f >= 1.0 {
                    by.remove(&host);
                } else {
                    bump(by, &host, -moved);
                }
                *dissolved.entry(s.clone()).or_default().entry(host).or_insert(0.0) += moved;
            }
        }
        if by.is_empty() {
            src.solutes.remove(&s);
        }
    }

    let moved_volume: f64 = liquids
        .iter()
        .map(|(name, n)| registry.get(name).map_or(0.0, |m| m.liquid_volume(*n)))
        .sum();
    let room = dst.headspace(registry);
    let keep = if moved_volume > room { room / moved_volume } else { 1.0 };

    for (name, n) in liquids {
        let kept = n * keep;
        bump(&mut dst.liquids, &name, kept);
        report.liquids.insert(name.clone(), n);
        if n - kept > 0.0 {
            *report.overflow.entry(name).or_insert(0.0) += n - kept;
        }
    }
    for (s, by) in dissolved {
        let mut total = 0.0;
        for (host, n) in by {
            let kept = n * keep;
            total += n;
            if kept > 0.0 {
                *dst.solutes.entry(s.clone()).or_default().entry(host).or_insert(0.0) += kept;
            }
            if n - kept > 0.0 {
                *report.overflow.entry(s.clone()).or_insert(0.0) += n - kept;
            }
        }
        report.dissolved.insert(s, total);
    }
    report
}

/// Amount-weighted purity of `target` among the species selected by
/// `counts`, over every vessel holding the target.
fn weighted_purity(
    vessels: &[&Vessel],
    target: &str,
    registry: &MaterialRegistry,
    counts: impl Fn(&str) -> bool,
) -> f64 {
    let target_species: Vec<String> = match registry.get(target) {
        Some(m) if !m.dissociates.is_empty() => m.dissociates.iter().map(|d| d.species.clone()).collect(),
        _ => vec![target.to_string()],
    };
    let per_vessel: Vec<(f64, f64)> = vessels
        .iter()
        .map(|v| {
            let totals = v.species_totals(registry);
            let t: f64 = target_species.iter().map(|s| totals.get(s).copied().unwrap_or(0.0)).sum();
            let all: f64 = totals.iter().filter(|(k, _)| counts(k)).map(|(_, n)| n).sum();
            (t, all)
        })
        .collect();
    let target_total: f64 = per_vessel.iter().map(|(t, _)| t).sum();
    if target_total <= 0.0 {
        return 0.0;
    }
    per_vessel
        .iter()
        .filter(|(t, all)| *t > 0.0 && *all > 0.0)
        .map(|(t, all)| (t / target_total) * (t / all).min(1.0))
        .sum()
}

/// Purity of `target` relative to the other solutes; solvents are ignored.
pub fn solute_purity(vessels: &[&Vessel], target: &str, registry: &MaterialRegistry) -> f64 {
    weighted_purity(vessels, target, registry, |name| {
        !registry.get(name).is_some_and(|m| m.is_solvent())
    })
}

/// Purity of `target` relative to everything in the vessel.
pub fn absolute_purity(vessels: &[&Vessel], target: &str, registry: &MaterialRegistry) -> f64 {
    weighted_purity(vessels, target, registry, |_| true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reg() -> MaterialRegistry {
        MaterialRegistry::default_registry()
    }

    fn litres_of(reg: &MaterialRegistry, name: &str, litres: f64) -> f64 {
        litres / reg.lookup(name).unwrap().liquid_volume(1.0)
    }

    #[test]
    fn add_solid() {
        let reg = reg();
        let mut v = Vessel::new("v", 1.0, &reg);
        assert_eq!(v.total_moles("sodium"), 0.0);
        v.add_material(&reg, "sodium", 1.0, Phase::Solid).unwrap();
        assert_eq!(v.solids["sodium"], 1.0);
        assert_eq!(v.total_moles("sodium"), 1.0);
    }

    #[test]
    fn dissolved_split_by_volume() {
        let reg = reg();
        let mut v = Vessel::new("v", 5.0, &reg);
        v.add_material(&reg, "water", litres_of(&reg, "water", 2.0), Phase::Liquid).unwrap();
        v.add_material(&reg, "hexane", litres_of(&reg, "hexane", 2.0), Phase::Liquid).unwrap();
        v.add_material(&reg, "sodium chloride", 1.0, Phase::Dissolved).unwrap();
        for ion in ["Na+", "Cl-"] {
            assert_abs_diff_eq!(v.solutes[ion]["water"], 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(v.solutes[ion]["hexane"], 0.5, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(v.formula_units("sodium chloride", &reg), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dissolve_without_solvent() {
        let reg = reg();
        let mut v = Vessel::new("v", 1.0, &reg);
        assert!(matches!(
            v.add_material(&reg, "dodecane", 1.0, Phase::Dissolved),
            Err(Error::NoSolventPresent(_))
        ));
    }

    #[test]
    fn capacity_enforced() {
        let reg = reg();
        let mut v = Vessel::new("v", 1.0, &reg);
        let err = v.add_material(&reg, "water", litres_of(&reg, "water", 1.5), Phase::Liquid);
        assert!(matches!(err, Err(Error::CapacityExceeded { .. })));
        assert!(v.is_empty());
    }

    #[test]
    fn excess_salt_precipitates() {
        let reg = reg();
        let mut v = Vessel::new("v", 1.0, &reg);
        v.add_material(&reg, "water", litres_of(&reg, "water", 0.1), Phase::Liquid).unwrap();
        v.add_material(&reg, "sodium chloride", 1.0, Phase::Dissolved).unwrap();
        assert_abs_diff_eq!(v.dissolved_total("Na+"), 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(v.solids["sodium chloride"], 0.7, epsilon = 1e-9);
        assert_abs_diff_eq!(v.formula_units("sodium chloride", &reg), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_fraction_is_identity() {
        let reg = reg();
        let mut a = Vessel::new("a", 1.0, &reg);
        a.add_material(&reg, "water", 10.0, Phase::Liquid).unwrap();
        let mut b = Vessel::new("b", 1.0, &reg);
        let (a0, b0) = (a.clone(), b.clone());
        let r = pour(&mut a, &mut b, 0.0, &reg);
        assert_eq!((a, b), (a0, b0));
        assert!(r.liquids.is_empty());
    }

    #[test]
    fn half_pour_of_single_solvent() {
        let reg = reg();
        let mut a = Vessel::new("a", 1.0, &reg);
        a.add_material(&reg, "diethyl ether", 4.0, Phase::Liquid).unwrap();
        a.add_material(&reg, "dodecane", 1.0, Phase::Dissolved).unwrap();
        let mut b = Vessel::new("b", 1.0, &reg);
        pour(&mut a, &mut b, 0.5, &reg);
        assert_abs_diff_eq!(a.total_moles("diethyl ether"), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b.total_moles("dodecane"), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn full_pour_moves_everything_liquid() {
        let reg = reg();
        let mut a = Vessel::new("a", 1.0, &reg);
        a.add_material(&reg, "diethyl ether", 4.0, Phase::Liquid).unwrap();
        a.add_material(&reg, "sodium chloride", 1.0, Phase::Dissolved).unwrap();
        a.add_material(&reg, "sodium", 0.5, Phase::Solid).unwrap();
        let mut b = Vessel::new("b", 1.0, &reg);
        let report = pour(&mut a, &mut b, 1.0, &reg);
        assert!(report.overflow.is_empty());
        assert!(a.liquids.is_empty() && a.solutes.is_empty());
        assert_eq!(a.solids["sodium"], 0.5);
        assert_abs_diff_eq!(b.total_moles("diethyl ether"), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.total_moles("Cl-"), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn overflow_is_recorded() {
        let reg = reg();
        let mut a = Vessel::new("a", 2.0, &reg);
        a.add_material(&reg, "water", litres_of(&reg, "water", 1.5), Phase::Liquid).unwrap();
        let mut b = Vessel::new("b", 1.0, &reg);
        let report = pour(&mut a, &mut b, 1.0, &reg);
        assert_abs_diff_eq!(b.liquid_volume(&reg), 1.0, epsilon = 1e-9);
        let total = litres_of(&reg, "water", 1.5);
        assert_abs_diff_eq!(report.overflow["water"], total / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn worked_solute_purity() {
        let reg = reg();
        let mut a = Vessel::new("a", 1.0, &reg);
        let mut b = Vessel::new("b", 1.0, &reg);
        for (v, d, ion) in [(&mut a, 0.7, 0.2), (&mut b, 0.3, 0.8)] {
            v.add_material(&reg, "diethyl ether", 2.0, Phase::Liquid).unwrap();
            v.add_material(&reg, "dodecane", d, Phase::Dissolved).unwrap();
            v.add_material(&reg, "sodium chloride", ion, Phase::Dissolved).unwrap();
        }
        let p = solute_purity(&[&a, &b], "dodecane", &reg);
        assert_abs_diff_eq!(p, 0.7 * 7.0 / 11.0 + 0.3 * 3.0 / 19.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p, 0.493, epsilon = 1e-3);
    }

    #[test]
    fn absolute_purity_counts_solvent() {
        let reg = reg();
        let mut v = Vessel::new("v", 1.0, &reg);
        v.add_material(&reg, "diethyl ether", 4.0, Phase::Liquid).unwrap();
        v.add_material(&reg, "dodecane", 1.0, Phase::Dissolved).unwrap();
        assert_abs_diff_eq!(absolute_purity(&[&v], "dodecane", &reg), 0.2, epsilon = 1e-12);
        assert_eq!(absolute_purity(&[&v], "E", &reg), 0.0);
        let mut pure = Vessel::new("p", 1.0, &reg);
        pure.add_material(&reg, "dodecane", 1.0, Phase::Liquid).unwrap();
        assert_eq!(absolute_purity(&[&pure], "dodecane", &reg), 1.0);
        assert_eq!(solute_purity(&[&pure], "dodecane", &reg), 1.0);
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let reg = reg();
        let mut v = Vessel::new("v", 1.0, &reg);
        v.add_material(&reg, "diethyl ether", 4.0 / 3.0, Phase::Liquid).unwrap();
        v.add_material(&reg, "sodium chloride", 0.1 + 0.2, Phase::Dissolved).unwrap();
        v.temperature = 301.123_456_789_012_3;
        let back = Vessel::from_json(&v.to_json().unwrap()).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn registry_mismatch_detected() {
        let reg = reg();
        let mut v = Vessel::new("v", 1.0, &reg);
        v.registry = "other".into();
        assert!(matches!(v.check_registry(&reg), Err(Error::Config(_))));
    }
}
