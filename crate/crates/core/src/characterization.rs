//! Synthetic measurements of vessel contents.

use serde::{Deserialize, Serialize};

use crate::materials::MaterialRegistry;
use crate::vessel::Vessel;
use crate::{Error, Result};

pub const DEFAULT_BINS: usize = 100;
/// nm
pub const DEFAULT_RANGE: (f64, f64) = (400.0, 800.0);

/// Absorbance sampled at the centres of equal-width wavelength bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub bins: Vec<f64>,
    pub wavelength_range: (f64, f64),
}

impl Spectrum {
    pub fn wavelengths(&self) -> Vec<f64> {
        let (lo, hi) = self.wavelength_range;
        let width = (hi - lo) / self.bins.len() as f64;
        (0..self.bins.len()).map(|i| lo + width * (i as f64 + 0.5)).collect()
    }

    /// Two whitespace-separated columns: wavelength (nm) and absorbance.
    pub fn to_text(&self) -> String {
        self.wavelengths()
            .iter()
            .zip(&self.bins)
            .map(|(w, a)| format!("{w:.3} {a:.9}\n"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Measurement {
    UvVis(Spectrum),
}

/// UV-Vis absorbance over the default wavelength range.
pub fn uv_vis(vessel: &Vessel, bins: usize, registry: &MaterialRegistry) -> Spectrum {
    uv_vis_range(vessel, bins, DEFAULT_RANGE, registry)
}

/// UV-Vis absorbance: every material's peaks weighted by its share of the
/// vessel's moles, clipped to [0, 1].
pub fn uv_vis_range(
    vessel: &Vessel,
    bins: usize,
    range: (f64, f64),
    registry: &MaterialRegistry,
) -> Spectrum {
    let bins = bins.max(1);
    let mut spectrum = Spectrum {
        bins: vec![0.0; bins],
        wavelength_range: range,
    };
    let amounts: Vec<(String, f64)> = vessel
        .materials()
        .into_iter()
        .map(|name| {
            let n = vessel.total_moles(&name);
            (name, n)
        })
        .filter(|(_, n)| *n > 0.0)
        .collect();
    let total: f64 = amounts.iter().map(|(_, n)| n).sum();
    if total <= 0.0 {
        return spectrum;
    }
    let wavelengths = spectrum.wavelengths();
    for (name, n) in &amounts {
        let Some(m) = registry.get(name) else { continue };
        let share = n / total;
        for peak in &m.uv_peaks {
            for (value, w) in spectrum.bins.iter_mut().zip(&wavelengths) {
                let z = (w - peak.center) / peak.width;
                *value += share * peak.height * (-0.5 * z * z).exp();
            }
        }
    }
    for value in &mut spectrum.bins {
        *value = value.clamp(0.0, 1.0);
    }
    spectrum
}

/// Runs a named characterization method.
pub fn characterize(vessel: &Vessel, method: &str, registry: &MaterialRegistry) -> Result<Measurement> {
    match method {
        "uv-vis" => Ok(Measurement::UvVis(uv_vis(vessel, DEFAULT_BINS, registry))),
        other => Err(Error::UnknownMethod(other.to_string())),
    }
}
