//! A digital chemistry laboratory made of episodic benches.
//!
//! Materials live in [`Vessel`]s. Benches act on vessels: the reaction bench
//! integrates Arrhenius kinetics, the extraction bench separates solvent
//! layers and partitions solutes by polarity, and the distillation bench
//! boils materials off in order of boiling point. Every bench exposes the
//! same reset/step contract ([`bench::Environment`]) so agents and scripted
//! controllers can drive any of them.
//!
//! ```no_run
//! use benchlab::bench::{BenchEnv, Environment, ScenarioConfig};
//! use benchlab::policy::{heuristic_for, rollout};
//!
//! let config = ScenarioConfig::wurtz_reaction();
//! let mut env = BenchEnv::from_config(&config).unwrap();
//! let mut policy = heuristic_for(&config).unwrap();
//! let (stats, _) = rollout(&mut env, policy.as_mut(), 10, 7).unwrap();
//! println!("mean return {:.3}", stats.mean);
//! ```

pub mod bench;
pub mod binding;
pub mod characterization;
pub mod cli;
mod error;
pub mod kinetics;
pub mod layers;
pub mod materials;
pub mod policy;
pub mod thermal;
pub mod vessel;

pub use error::{Error, Result};
pub use materials::{Material, MaterialRegistry, Phase, Role};
pub use vessel::Vessel;
