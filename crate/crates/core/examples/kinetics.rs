//! Run the Wurtz network in a vessel at a few temperatures.
//!
//! cargo run --example kinetics

use benchlab::kinetics::{integrate, IntegratorConfig, ReactionNetwork};
use benchlab::{MaterialRegistry, Phase, Vessel};

fn main() -> benchlab::Result<()> {
    let registry = MaterialRegistry::default_registry();
    let network = ReactionNetwork::wurtz();
    network.check_registry(&registry)?;
    let cfg = IntegratorConfig::default();
    for temperature in [300.0, 400.0, 500.0] {
        let mut v = Vessel::new("RV", 1.0, &registry);
        v.add_material(&registry, "diethyl ether", 4.0, Phase::Liquid)?;
        v.add_material(&registry, "1-chlorohexane", 1.0, Phase::Dissolved)?;
        v.add_material(&registry, "2-chlorohexane", 1.0, Phase::Dissolved)?;
        v.add_material(&registry, "sodium", 2.0, Phase::Solid)?;
        v.temperature = temperature;
        let solution = integrate(&network, &mut v, 200.0, &cfg, &registry)?;
        println!("T = {temperature} K ({} steps)", solution.accepted_steps);
        for (i, species) in network.species.iter().enumerate() {
            if solution.y[i] > 1e-6 {
                println!("  {species:<20} {:.4} mol", v.formula_units(species, &registry));
            }
        }
    }
    Ok(())
}
