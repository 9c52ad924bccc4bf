//! Material definitions and the registry that holds them.
//!
//! A registry is loaded once from a TOML materials file and is immutable
//! afterwards, so it can be shared (behind an `Arc`) by any number of benches
//! running on different threads. Every physical constant used by the
//! simulation lives in a [`Material`] record.
//!
//! The file format is documented in `data/materials.toml`; it requires a
//! `format_version` key and a list of `[[material]]` tables.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

const DEFAULT_MATERIALS: &str = include_str!("../data/materials.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Solid,
    Liquid,
    Gas,
    /// Dissolved in the solvents of a vessel. Never a default phase.
    Dissolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Solvent,
    Solute,
    Reactant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UvPeak {
    /// nm
    pub center: f64,
    /// nm
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dissociation {
    pub species: String,
    pub count: u32,
}

/// Immutable physical and spectral properties of one material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// g/mol
    pub molar_mass: f64,
    /// g/mL
    pub density: f64,
    pub polarity: f64,
    /// J/(mol K)
    pub heat_capacity_molar: f64,
    /// K
    pub boiling_point: f64,
    /// J/mol
    pub enthalpy_vaporization: f64,
    /// mol of solute per L of dissolving solvent
    pub solubility_limit: f64,
    #[serde(default)]
    pub uv_peaks: Vec<UvPeak>,
    pub phase_default: Phase,
    #[serde(default)]
    pub roles: Vec<Role>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dissociates: Vec<Dissociation>,
}

impl Material {
    pub fn has_role(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }

    pub fn is_solvent(&self) -> bool {
        self.has_role(Role::Solvent)
    }

    pub fn is_solute(&self) -> bool {
        self.has_role(Role::Solute)
    }

    /// Liquid volume in litres occupied by `moles` of this material.
    pub fn liquid_volume(&self, moles: f64) -> f64 {
        moles * self.molar_mass / self.density / 1000.0
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("molar_mass", self.molar_mass),
            ("density", self.density),
            ("heat_capacity_molar", self.heat_capacity_molar),
            ("boiling_point", self.boiling_point),
            ("enthalpy_vaporization", self.enthalpy_vaporization),
            ("solubility_limit", self.solubility_limit),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Validation(format!(
                    "material `{}`: {field} must be positive, got {value}",
                    self.name
                )));
            }
        }
        if !(self.polarity.is_finite() && self.polarity >= 0.0) {
            return Err(Error::Validation(format!(
                "material `{}`: polarity must be non-negative",
                self.name
            )));
        }
        for peak in &self.uv_peaks {
            if !(peak.width > 0.0 && peak.height >= 0.0 && peak.center.is_finite()) {
                return Err(Error::Validation(format!(
                    "material `{}`: malformed uv peak {peak:?}",
                    self.name
                )));
            }
        }
        if self.phase_default == Phase::Dissolved {
            return Err(Error::Validation(format!(
                "material `{}`: phase_default must be solid, liquid or gas",
                self.name
            )));
        }
        if self.dissociates.iter().any(|d| d.count == 0) {
            return Err(Error::Validation(format!(
                "material `{}`: dissociation counts must be positive",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MaterialsFile {
    format_version: u32,
    #[serde(default = "default_name")]
    name: String,
    #[serde(rename = "material", default)]
    materials: Vec<Material>,
}

fn default_name() -> String {
    "unnamed".to_string()
}

/// A frozen, name-indexed collection of materials.
#[derive(Debug, Clone)]
pub struct MaterialRegistry {
    name: String,
    materials: Vec<Material>,
    index: HashMap<String, usize>,
}

impl PartialEq for MaterialRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.materials == other.materials
    }
}

impl MaterialRegistry {
    /// Parses a registry from materials-file text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: MaterialsFile = toml::from_str(text).map_err(|e| Error::from_toml(text, e))?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported materials format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        Self::new(file.name, file.materials)
    }

    pub fn new(name: impl Into<String>, materials: Vec<Material>) -> Result<Self> {
        let mut index = HashMap::with_capacity(materials.len());
        for (i, material) in materials.iter().enumerate() {
            material.validate()?;
            if index.insert(material.name.clone(), i).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate material name `{}`",
                    material.name
                )));
            }
        }
        let registry = MaterialRegistry {
            name: name.into(),
            materials,
            index,
        };
        for material in &registry.materials {
            for d in &material.dissociates {
                if !registry.index.contains_key(&d.species) {
                    return Err(Error::Validation(format!(
                        "material `{}` dissociates into undeclared species `{}`",
                        material.name, d.species
                    )));
                }
            }
        }
        Ok(registry)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// The registry shipped with the crate (`data/materials.toml`).
    pub fn default_registry() -> Self {
        Self::from_toml_str(DEFAULT_MATERIALS).expect("shipped materials file is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lookup(&self, name: &str) -> Result<&Material> {
        self.get(name).ok_or_else(|| Error::NotFound(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Option<&Material> {
        self.index.get(name).map(|&i| &self.materials[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Position of a material in declaration order.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.materials.iter()
    }

    /// Serializes back to the materials-file format.
    pub fn to_toml_string(&self) -> Result<String> {
        let file = MaterialsFile {
            format_version: FORMAT_VERSION,
            name: self.name.clone(),
            materials: self.materials.clone(),
        };
        toml::to_string(&file).map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Reads a registry from any byte stream holding a materials file.
pub fn load_registry(mut source: impl Read) -> Result<MaterialRegistry> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::io("<materials stream>", e))?;
    MaterialRegistry::from_toml_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const WATER_ONLY: &str = r#"
format_version = 1
name = "tiny"

[[material]]
name = "water"
molar_mass = 18.015
density = 1.0
polarity = 0.9
heat_capacity_molar = 75.3
boiling_point = 373.15
enthalpy_vaporization = 40650.0
solubility_limit = 1000.0
phase_default = "liquid"
roles = ["solvent"]
"#;

    #[test]
    fn loads_declared_values() {
        let reg = load_registry(WATER_ONLY.as_bytes()).unwrap();
        let water = reg.lookup("water").unwrap();
        assert_eq!(water.density, 1.0);
        assert_eq!(water.polarity, 0.9);
        assert!(water.uv_peaks.is_empty());
    }

    #[test]
    fn duplicate_names_rejected() {
        let salt = r#"
[[material]]
name = "NaCl"
molar_mass = 58.44
density = 2.165
polarity = 0.9
heat_capacity_molar = 50.5
boiling_point = 1686.0
enthalpy_vaporization = 170700.0
solubility_limit = 3.0
phase_default = "solid"
"#;
        let text = format!("format_version = 1\n{salt}{salt}");
        assert!(matches!(
            MaterialRegistry::from_toml_str(&text),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn non_positive_constant_rejected() {
        let text = WATER_ONLY.replace("density = 1.0", "density = 0.0");
        assert!(matches!(
            MaterialRegistry::from_toml_str(&text),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn malformed_file_reports_line() {
        let text = WATER_ONLY.replace("density = 1.0", "density = = 1.0");
        match MaterialRegistry::from_toml_str(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_format_version_is_a_parse_error() {
        let text = WATER_ONLY.replace("format_version = 1", "");
        assert!(matches!(
            MaterialRegistry::from_toml_str(&text),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn default_registry_covers_shipped_scenarios() {
        let reg = MaterialRegistry::default_registry();
        assert!(reg.len() >= 18);
        for name in [
            "water",
            "diethyl ether",
            "1-chlorohexane",
            "2-chlorohexane",
            "3-chlorohexane",
            "sodium",
            "sodium chloride",
            "dodecane",
            "5-methylundecane",
            "4-ethyldecane",
            "5,6-dimethyldecane",
            "4-ethyl-5-methylnonane",
            "4,5-diethyloctane",
        ] {
            assert!(reg.contains(name), "{name} missing");
        }
        for name in ["A", "B", "C", "D", "E", "F", "G", "H", "I"] {
            assert!(reg.contains(name));
        }
        assert!(matches!(reg.lookup("unobtainium"), Err(Error::NotFound(_))));
        assert!(reg.lookup("dodecane").unwrap().is_solute());
        assert_eq!(reg.lookup("diethyl ether").unwrap().boiling_point, 307.8);
    }

    #[test]
    fn fictitious_materials_stay_liquid_on_the_reaction_bench() {
        let reg = MaterialRegistry::default_registry();
        for name in ["A", "B", "C", "D"] {
            let m = reg.lookup(name).unwrap();
            assert!(m.boiling_point > 373.15);
            assert!(m.is_solute());
        }
    }

    #[test]
    fn round_trip_through_text() {
        let reg = MaterialRegistry::default_registry();
        let text = reg.to_toml_string().unwrap();
        let again = MaterialRegistry::from_toml_str(&text).unwrap();
        assert_eq!(reg, again);
    }
}
