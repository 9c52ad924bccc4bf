//! Print a UV-Vis spectrum of a vessel as a text bar chart.
//!
//! cargo run --example spectrum

use benchlab::characterization::{characterize, Measurement};
use benchlab::{MaterialRegistry, Phase, Vessel};

fn main() -> benchlab::Result<()> {
    let registry = MaterialRegistry::default_registry();
    let mut v = Vessel::new("V", 1.0, &registry);
    v.add_material(&registry, "diethyl ether", 4.0, Phase::Liquid)?;
    v.add_material(&registry, "dodecane", 0.5, Phase::Dissolved)?;
    v.add_material(&registry, "5-methylundecane", 0.5, Phase::Dissolved)?;
    let Measurement::UvVis(spectrum) = characterize(&v, "uv-vis", &registry)?;
    for (w, a) in spectrum.wavelengths().iter().zip(&spectrum.bins).step_by(4) {
        println!("{w:>6.0} nm {:<40} {a:.3}", "#".repeat((a * 40.0).round() as usize));
    }
    Ok(())
}
