//! Chain benches by hand: react, then distil the reaction vessel.
//!
//! cargo run --release --example pipeline -- [target]

use std::sync::Arc;

use benchlab::bench::{BenchEnv, Environment, ScenarioConfig};
use benchlab::policy::{heuristic_for, run_episode, EpisodeOptions};

fn main() -> benchlab::Result<()> {
    let target = std::env::args().nth(1).unwrap_or_else(|| "dodecane".into());
    let rxn = ScenarioConfig::wurtz_reaction();
    let registry = Arc::new(rxn.load_registry()?);
    let opts = EpisodeOptions {
        target: Some(target.clone()),
        ..EpisodeOptions::default()
    };

    let mut env = BenchEnv::with_registry(&rxn, Arc::clone(&registry))?;
    let mut policy = heuristic_for(&rxn)?;
    let reaction = run_episode(&mut env, policy.as_mut(), 1, &opts)?;
    println!("reaction: return {:.3} after {} steps", reaction.total_return, reaction.steps.len());

    let product = env.output_vessel().clone();
    let dit = ScenarioConfig::wurtz_distillation();
    let mut env = BenchEnv::with_registry(&dit, registry)?;
    env.set_input(Some(product))?;
    let mut policy = heuristic_for(&dit)?;
    let distillation = run_episode(&mut env, policy.as_mut(), 2, &opts)?;
    println!("distillation: return {:.3} after {} steps", distillation.total_return, distillation.steps.len());
    println!("{}", env.output_vessel().to_json()?);
    Ok(())
}
