//! Compare the shipped policies on every bench.
//!
//! cargo run --release --example rollout -- [episodes]

use std::sync::Arc;

use benchlab::bench::ScenarioConfig;
use benchlab::policy::{rollout_parallel, EpisodeOptions};

fn main() -> benchlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let only = args.next();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let scenarios = [
        ScenarioConfig::wurtz_reaction(),
        ScenarioConfig::fictitious_reaction(),
        ScenarioConfig::wurtz_extraction(),
        ScenarioConfig::wurtz_distillation(),
    ];
    for config in scenarios.iter().filter(|c| only.as_deref().is_none_or(|b| b == c.bench.name())) {
        let registry = Arc::new(config.load_registry()?);
        for policy in ["heuristic", "random", "none"] {
            let (stats, _) = rollout_parallel(
                config,
                Arc::clone(&registry),
                policy,
                episodes,
                7,
                threads,
                &EpisodeOptions::default(),
            )?;
            println!(
                "{} {:<10} {:<9} mean {:.4} +- {:.4}",
                config.bench.name(),
                config.scenario,
                policy,
                stats.mean,
                stats.standard_error()
            );
            for (target, t) in &stats.per_target {
                println!("    {target:<24} {:.4} ({} episodes)", t.mean, t.episodes);
            }
        }
    }
    Ok(())
}
