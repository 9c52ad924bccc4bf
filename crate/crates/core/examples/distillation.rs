//! Boil a three-liquid mixture off one component at a time.
//!
//! cargo run --example distillation

use benchlab::thermal::{apply_heat, boil_point_order};
use benchlab::{MaterialRegistry, Phase, Vessel};

fn main() -> benchlab::Result<()> {
    let registry = MaterialRegistry::default_registry();
    let mut dv = Vessel::new("DV", 1.0, &registry);
    dv.add_material(&registry, "diethyl ether", 2.0, Phase::Liquid)?;
    dv.add_material(&registry, "hexane", 2.0, Phase::Liquid)?;
    dv.add_material(&registry, "water", 10.0, Phase::Liquid)?;
    dv.add_material(&registry, "sodium chloride", 0.2, Phase::Dissolved)?;
    let mut condenser = Vessel::new("B1", 2.0, &registry);
    println!("boiling order: {:?}", boil_point_order(&dv, &registry));
    println!("{:>5} {:>8}  vaporized", "step", "T (K)");
    for step in 1..=30 {
        let report = apply_heat(&mut dv, &mut condenser, 25_000.0, &registry)?;
        println!("{step:>5} {:>8.2}  {:?}", dv.temperature, report.vaporized);
        if dv.liquids.is_empty() {
            break;
        }
    }
    println!("left in DV: solids {:?}", dv.solids);
    println!("condensate: {:?}", condenser.liquids);
    Ok(())
}
