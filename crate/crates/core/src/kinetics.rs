//! Reaction networks, Arrhenius rate constants and adaptive integration.
//!
//! Concentrations are moles per litre of the vessel's working volume
//! (`volume_capacity`), so changing a vessel's volume dilutes or
//! concentrates everything in it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::materials::MaterialRegistry;
use crate::vessel::Vessel;
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// J/(mol K)
pub const GAS_CONSTANT: f64 = 8.314;

const WURTZ: &str = include_str!("../data/wurtz.rxn");
const FICTITIOUS: &str = include_str!("../data/fictitious.rxn");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub material: String,
    pub coefficient: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub reactants: Vec<Term>,
    pub products: Vec<Term>,
    pub pre_exponential: f64,
    /// J/mol
    pub activation_energy: f64,
}

impl Reaction {
    /// Arrhenius rate constant at temperature `t` (K).
    pub fn rate_constant(&self, t: f64, gas_constant: f64) -> f64 {
        self.pre_exponential * (-self.activation_energy / (gas_constant * t)).exp()
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::Validation(format!("reaction {index}: {msg}")));
        if self.reactants.is_empty() || self.products.is_empty() {
            return bad("needs at least one reactant and one product");
        }
        if self.reactants.iter().chain(&self.products).any(|t| t.coefficient == 0) {
            return bad("stoichiometric coefficients must be positive integers");
        }
        if !(self.pre_exponential.is_finite() && self.pre_exponential > 0.0) {
            return bad("pre_exponential must be positive");
        }
        if !(self.activation_energy.is_finite() && self.activation_energy >= 0.0) {
            return bad("activation_energy must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ReactionsFile {
    format_version: u32,
    name: String,
    #[serde(rename = "reaction", default)]
    reactions: Vec<Reaction>,
}

/// A set of irreversible elementary reactions over an ordered species list.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    pub name: String,
    pub reactions: Vec<Reaction>,
    /// Index set of the concentration vector, in order of first appearance.
    pub species: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    /// mol/L
    pub abs_tol: f64,
    pub max_steps: usize,
    pub gas_constant: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            max_steps: 200_000,
            gas_constant: GAS_CONSTANT,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.gas_constant > 0.0 && self.max_steps > 0) {
            return Err(Error::Validation(
                "integrator tolerances, step limit and gas constant must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl ReactionNetwork {
    pub fn new(name: impl Into<String>, reactions: Vec<Reaction>) -> Result<Self> {
        let mut species: Vec<String> = Vec::new();
        for (i, r) in reactions.iter().enumerate() {
            r.validate(i)?;
            for term in r.reactants.iter().chain(&r.products) {
                if !species.contains(&term.material) {
                    species.push(term.material.clone());
                }
            }
        }
        Ok(ReactionNetwork {
            name: name.into(),
            reactions,
            species,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ReactionsFile = toml::from_str(text).map_err(|e| Error::from_toml(text, e))?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported reactions format_version {}",
                file.format_version
            )));
        }
        Self::new(file.name, file.reactions)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let file = ReactionsFile {
            format_version: FORMAT_VERSION,
            name: self.name.clone(),
            reactions: self.reactions.clone(),
        };
        toml::to_string(&file).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// The shipped Wurtz coupling network.
    pub fn wurtz() -> Self {
        Self::from_toml_str(WURTZ).expect("shipped wurtz network is valid")
    }

    /// The shipped fictitious A-I network.
    pub fn fictitious() -> Self {
        Self::from_toml_str(FICTITIOUS).expect("shipped fictitious network is valid")
    }

    pub fn index_of(&self, species: &str) -> Option<usize> {
        self.species.iter().position(|s| s == species)
    }

    /// Fails if any participating species is missing from `registry`.
    pub fn check_registry(&self, registry: &MaterialRegistry) -> Result<()> {
        for s in &self.species {
            registry.lookup(s)?;
        }
        Ok(())
    }

    pub fn rate_constants(&self, temperature: f64, gas_constant: f64) -> Vec<f64> {
        self.reactions
            .iter()
            .map(|r| r.rate_constant(temperature, gas_constant))
            .collect()
    }

    /// Concentration time-derivatives at `temperature`.
    pub fn derivatives(&self, concentrations: &[f64], temperature: f64) -> Result<Vec<f64>> {
        if concentrations.len() != self.species.len() {
            return Err(Error::DimensionMismatch {
                expected: self.species.len(),
                actual: concentrations.len(),
            });
        }
        let compiled = Compiled::new(self, &self.rate_constants(temperature, GAS_CONSTANT));
        let mut out = vec![0.0; concentrations.len()];
        compiled.eval(concentrations, &mut out);
        Ok(out)
    }

    /// Stoichiometric matrix, one row per species and one column per
    /// reaction (products positive).
    pub fn stoichiometry(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.reactions.len()]; self.species.len()];
        for (j, r) in self.reactions.iter().enumerate() {
            for t in &r.reactants {
                m[self.index_of(&t.material).unwrap()][j] -= t.coefficient as f64;
            }
            for t in &r.products {
                m[self.index_of(&t.material).unwrap()][j] += t.coefficient as f64;
            }
        }
        m
    }
}

/// Rate constant, reactant orders, species changes.
type CompiledReaction = (f64, Vec<(usize, i32)>, Vec<(usize, f64)>);

/// Index-resolved form of a network at fixed rate constants.
struct Compiled {
    reactions: Vec<CompiledReaction>,
}

impl Compiled {
    fn new(network: &ReactionNetwork, k: &[f64]) -> Self {
        let index = |name: &str| network.index_of(name).expect("species indexed at construction");
        let reactions = network
            .reactions
            .iter()
            .zip(k)
            .map(|(r, &k)| {
                let orders: Vec<(usize, i32)> = r
                    .reactants
                    .iter()
                    .map(|t| (index(&t.material), t.coefficient as i32))
                    .collect();
                let mut change: Vec<(usize, f64)> = r
                    .reactants
                    .iter()
                    .map(|t| (index(&t.material), -(t.coefficient as f64)))
                    .collect();
                change.extend(r.products.iter().map(|t| (index(&t.material), t.coefficient as f64)));
                (k, orders, change)
            })
            .collect();
        Compiled { reactions }
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) {
        dy.iter_mut().for_each(|d| *d = 0.0);
        for (k, orders, change) in &self.reactions {
            let rate = orders
                .iter()
                .fold(*k, |acc, &(i, nu)| acc * y[i].max(0.0).powi(nu));
            for &(i, nu) in change {
                dy[i] += nu * rate;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub y: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

const A: [[f64; 5]; 5] = [
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];

/// Integrates the autonomous system `dy/dt = f(y)` over `duration` with the
/// embedded Runge-Kutta-Fehlberg 4(5) pair.
///
/// The fifth-order solution is propagated. Steps that would drive a component
/// below `-1e-12` are rejected and retried with a smaller step.
pub fn rkf45(
    f: impl Fn(&[f64], &mut [f64]),
    y0: &[f64],
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<OdeSolution> {
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut solution = OdeSolution {
        y: y.clone(),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if duration <= 0.0 || n == 0 {
        return Ok(solution);
    }
    let mut k = vec![vec![0.0; n]; 6];
    let mut stage = vec![0.0; n];
    let mut y4 = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut t = 0.0;
    let mut h = duration / 100.0;
    let mut attempts = 0;
    while t < duration {
        if attempts >= cfg.max_steps {
            return Err(Error::StepLimitExceeded { steps: attempts });
        }
        attempts += 1;
        let last = t + h >= duration;
        if last {
            h = duration - t;
        }
        f(&y, &mut k[0]);
        for s in 1..6 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, a) in A[s - 1].iter().take(s).enumerate() {
                    acc += h * a * k[j][i];
                }
                stage[i] = acc;
            }
            f(&stage, &mut k[s]);
        }
        let mut err: f64 = 0.0;
        let mut negative = false;
        for i in 0..n {
            let mut s4 = y[i];
            let mut s5 = y[i];
            for j in 0..6 {
                s4 += h * B4[j] * k[j][i];
                s5 += h * B5[j] * k[j][i];
            }
            y4[i] = s4;
            y5[i] = s5;
            negative |= s5 < -1e-12;
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(s5.abs());
            err = err.max((s5 - s4).abs() / scale);
        }
        if err <= 1.0 && !negative {
            t = if last { duration } else { t + h };
            for i in 0..n {
                y[i] = y5[i].max(0.0);
            }
            solution.accepted_steps += 1;
        } else {
            solution.rejected_steps += 1;
        }
        let factor = if negative {
            0.2
        } else if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h <= duration * 1e-15 {
            h = duration * 1e-15;
        }
    }
    solution.y = y;
    Ok(solution)
}

/// Advances the reactions in `vessel` by `dt` time units at its current
/// temperature.
///
/// Consumed reactants are taken from every phase in proportion; products are
/// dissolved when a solvent can hold them and otherwise go to their default
/// phase.
pub fn integrate(
    network: &ReactionNetwork,
    vessel: &mut Vessel,
    dt: f64,
    cfg: &IntegratorConfig,
    registry: &MaterialRegistry,
) -> Result<OdeSolution> {
    let volume = vessel.volume_capacity;
    let y0: Vec<f64> = network
        .species
        .iter()
        .map(|s| vessel.formula_units(s, registry) / volume)
        .collect();
    if dt <= 0.0 {
        return Ok(OdeSolution {
            y: y0,
            accepted_steps: 0,
            rejected_steps: 0,
        });
    }
    let compiled = Compiled::new(network, &network.rate_constants(vessel.temperature, cfg.gas_constant));
    let solution = rkf45(|y, dy| compiled.eval(y, dy), &y0, dt, cfg)?;
    for (i, s) in network.species.iter().enumerate() {
        let change = (solution.y[i] - y0[i]) * volume;
        if change < 0.0 {
            vessel.withdraw(s, -change);
        } else if change > 0.0 {
            vessel.deposit_product(s, change, registry);
        }
    }
    vessel.equilibrate(registry);
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::Phase;
    use approx::assert_abs_diff_eq;

    fn term(m: &str, c: u32) -> Term {
        Term {
            material: m.into(),
            coefficient: c,
        }
    }

    fn xyz(k: f64) -> ReactionNetwork {
        ReactionNetwork::new(
            "xyz",
            vec![Reaction {
                reactants: vec![term("X", 1), term("Y", 1)],
                products: vec![term("Z", 1)],
                pre_exponential: k,
                activation_energy: 0.0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn arrhenius_values() {
        let r = Reaction {
            reactants: vec![term("X", 1)],
            products: vec![term("Z", 1)],
            pre_exponential: 1.0,
            activation_energy: GAS_CONSTANT * 300.0,
        };
        assert_abs_diff_eq!(r.rate_constant(300.0, GAS_CONSTANT), (-1.0f64).exp(), epsilon = 1e-15);
        let flat = Reaction {
            activation_energy: 0.0,
            pre_exponential: 3.5,
            ..r.clone()
        };
        assert_eq!(flat.rate_constant(10.0, GAS_CONSTANT), 3.5);
        assert_eq!(flat.rate_constant(1000.0, GAS_CONSTANT), 3.5);
        let steep = Reaction {
            activation_energy: 50_000.0,
            ..r
        };
        assert!(steep.rate_constant(350.0, GAS_CONSTANT) > steep.rate_constant(300.0, GAS_CONSTANT));
    }

    #[test]
    fn second_order_derivatives() {
        let d = xyz(1.0).derivatives(&[1.0, 1.0, 0.0], 300.0).unwrap();
        assert_eq!(d, vec![-1.0, -1.0, 1.0]);
        let zero = xyz(1.0).derivatives(&[0.0, 1.0, 0.3], 300.0).unwrap();
        assert_eq!(zero, vec![0.0, 0.0, 0.0]);
        assert!(matches!(
            xyz(1.0).derivatives(&[1.0], 300.0),
            Err(Error::DimensionMismatch { expected: 3, actual: 1 })
        ));
    }

    #[test]
    fn homocoupling_bookkeeping() {
        let net = ReactionNetwork::new(
            "homo",
            vec![Reaction {
                reactants: vec![term("R1Cl", 2), term("Na", 2)],
                products: vec![term("R1R1", 1), term("NaCl", 2)],
                pre_exponential: 1.0,
                activation_energy: 0.0,
            }],
        )
        .unwrap();
        let d = net.derivatives(&[1.0, 1.0, 0.0, 0.0], 300.0).unwrap();
        assert_eq!(d, vec![-2.0, -2.0, 1.0, 2.0]);
    }

    #[test]
    fn closed_form_second_order() {
        let net = xyz(1.0);
        let compiled = Compiled::new(&net, &[1.0]);
        for t in [0.5, 1.0, 2.0] {
            let sol = rkf45(|y, dy| compiled.eval(y, dy), &[1.0, 1.0, 0.0], t, &IntegratorConfig::default()).unwrap();
            assert_abs_diff_eq!(sol.y[0], 1.0 / (1.0 + t), epsilon = 1e-6);
            assert_abs_diff_eq!(sol.y[2], 1.0 - 1.0 / (1.0 + t), epsilon = 1e-6);
        }
    }

    #[test]
    fn step_limit() {
        let net = xyz(1.0);
        let compiled = Compiled::new(&net, &[1.0]);
        let cfg = IntegratorConfig {
            max_steps: 3,
            ..Default::default()
        };
        assert!(matches!(
            rkf45(|y, dy| compiled.eval(y, dy), &[1.0, 1.0, 0.0], 100.0, &cfg),
            Err(Error::StepLimitExceeded { .. })
        ));
    }

    #[test]
    fn wurtz_homocoupling_matches_closed_form() {
        let reg = MaterialRegistry::default_registry();
        let net = ReactionNetwork::wurtz();
        net.check_registry(&reg).unwrap();
        let mut v = Vessel::new("rxn", 2.0, &reg);
        v.temperature = 373.15;
        v.add_material(&reg, "diethyl ether", 4.0, Phase::Liquid).unwrap();
        v.add_material(&reg, "1-chlorohexane", 1.0, Phase::Dissolved).unwrap();
        v.add_material(&reg, "sodium", 1.0, Phase::Solid).unwrap();
        let t = 5000.0;
        integrate(&net, &mut v, t, &IntegratorConfig::default(), &reg).unwrap();
        // d[R]/dt = -2 k [R]^4 with [R] = [Na]
        let k = net.reactions[0].rate_constant(373.15, GAS_CONSTANT);
        let c = (1.0 / 0.5f64.powi(3) + 6.0 * k * t).powf(-1.0 / 3.0);
        let made = (1.0 - 2.0 * c) / 2.0;
        assert_abs_diff_eq!(v.total_moles("dodecane"), made, epsilon = 1e-6);
        assert_abs_diff_eq!(v.formula_units("sodium chloride", &reg), 2.0 * made, epsilon = 1e-6);
        let unchanged = v.clone();
        integrate(&net, &mut v, 0.0, &IntegratorConfig::default(), &reg).unwrap();
        assert_eq!(v, unchanged);
    }

    #[test]
    fn shipped_files_round_trip() {
        for net in [ReactionNetwork::wurtz(), ReactionNetwork::fictitious()] {
            let again = ReactionNetwork::from_toml_str(&net.to_toml_string().unwrap()).unwrap();
            assert_eq!(net, again);
        }
        assert_eq!(ReactionNetwork::wurtz().species.len(), 11);
        assert_eq!(ReactionNetwork::fictitious().species.len(), 9);
    }
}
