//! Inspect the material registry, or load a custom one.
//!
//! cargo run --example materials -- [materials.toml]

use benchlab::MaterialRegistry;

fn main() -> benchlab::Result<()> {
    let registry = match std::env::args().nth(1) {
        Some(path) => MaterialRegistry::load(path)?,
        None => MaterialRegistry::default_registry(),
    };
    println!("registry {:?}: {} materials", registry.name(), registry.len());
    println!("{:<24} {:>8} {:>7} {:>8} {:>8}", "name", "g/mol", "g/mL", "polarity", "bp (K)");
    for m in registry.iter() {
        println!(
            "{:<24} {:>8.2} {:>7.3} {:>8.2} {:>8.1}",
            m.name, m.molar_mass, m.density, m.polarity, m.boiling_point
        );
    }
    Ok(())
}
