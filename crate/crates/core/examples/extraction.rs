//! Shake, settle and separate a water/hexane mixture, printing the layer
//! picture and where the salt and product end up.
//!
//! cargo run --example extraction

use benchlab::layers::{self, render_layers};
use benchlab::vessel::{drain, solute_purity};
use benchlab::{MaterialRegistry, Phase, Vessel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(v: &Vessel, registry: &MaterialRegistry, rng: &mut ChaCha8Rng) {
    let labels = render_layers(v, 60, rng, registry);
    let picture: String = labels
        .iter()
        .map(|&l| match l {
            0 => '.',
            l => registry.iter().nth(l - 1).and_then(|m| m.name.chars().next()).unwrap_or('?'),
        })
        .collect();
    println!("  {picture}");
}

fn main() -> benchlab::Result<()> {
    let registry = MaterialRegistry::default_registry();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ev = Vessel::new("EV", 1.0, &registry);
    ev.add_material(&registry, "hexane", 3.0, Phase::Liquid)?;
    ev.add_material(&registry, "dodecane", 0.5, Phase::Dissolved)?;
    ev.add_material(&registry, "sodium chloride", 0.5, Phase::Dissolved)?;
    ev.add_material(&registry, "water", 20.0, Phase::Liquid)?;
    layers::mix(&mut ev, 5.0, &registry);
    println!("mixed (bottom to top)");
    show(&ev, &registry, &mut rng);
    for step in 1..=4 {
        layers::settle(&mut ev, 5.0, &registry);
        println!("settled {} s", 5 * step);
        show(&ev, &registry, &mut rng);
    }
    for solute in ["dodecane", "Na+"] {
        println!("{solute} by solvent: {:?}", ev.partition_fractions(solute));
    }
    let mut beaker = Vessel::new("B1", 1.0, &registry);
    let water_fraction = ev.liquid_volumes(&registry).iter().find(|(n, _)| n == "water").map_or(0.0, |(_, v)| *v)
        / ev.liquid_volume(&registry);
    drain(&mut ev, &mut beaker, water_fraction, &registry);
    println!(
        "after draining the water layer: dodecane purity {:.3} in EV, {:.3} in B1",
        solute_purity(&[&ev], "dodecane", &registry),
        solute_purity(&[&beaker], "dodecane", &registry)
    );
    Ok(())
}
