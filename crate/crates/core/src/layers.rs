//! Solvent layer separation and solute partitioning.
//!
//! Each liquid in a vessel is a Gaussian along a vertical position axis
//! (0 at the column centre, increasing upward). Settling moves the settle-time
//! coordinate forward, mixing moves it backward toward the fully mixed point
//! [`T_MIX`]. Dissolved solutes drift between solvents toward a
//! polarity-driven asymptote as the layers separate.

use std::collections::BTreeMap;

use rand::Rng;

use crate::materials::MaterialRegistry;
use crate::vessel::Vessel;

/// Settle-time value of a fully mixed vessel.
pub const T_MIX: f64 = 0.0;

/// Rate at which the partition blends from the mixed to the separated limit.
pub const BLEND_RATE: f64 = 30.0;

/// Density of the implicit air layer drawn above the liquid (g/mL).
pub const AIR_DENSITY: f64 = 0.001_225;

/// Label of the air layer in rendered pixel vectors.
pub const AIR_LABEL: usize = 0;

const MIN_VARIANCE: f64 = 1e-300;

/// Shared variance of every layer at settle time `t`.
pub fn layer_variance(t: f64) -> f64 {
    (-t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Centre of layer `i` given every layer's density.
pub fn layer_mean(densities: &[f64], i: usize, t: f64, t_mix: f64) -> f64 {
    let d_i = densities[i];
    let sum: f64 = densities
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, d)| d - d_i)
        .sum();
    (t - t_mix) * sum
}

pub fn layer_means(densities: &[f64], t: f64, t_mix: f64) -> Vec<f64> {
    (0..densities.len())
        .map(|i| layer_mean(densities, i, t, t_mix))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub material: String,
    pub mean: f64,
    pub variance: f64,
    pub weight: f64,
}

/// Gaussian layers of the liquids in a vessel, weighted by volume fraction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerProfile {
    pub layers: Vec<Layer>,
}

impl LayerProfile {
    pub fn of(vessel: &Vessel, registry: &MaterialRegistry) -> Self {
        let volumes = vessel.liquid_volumes(registry);
        let total: f64 = volumes.iter().map(|(_, v)| v).sum();
        if total <= 0.0 {
            return LayerProfile::default();
        }
        let densities: Vec<f64> = volumes
            .iter()
            .map(|(name, _)| registry.get(name).map_or(1.0, |m| m.density))
            .collect();
        let variance = layer_variance(vessel.settle_time);
        let layers = volumes
            .iter()
            .enumerate()
            .map(|(i, (name, v))| Layer {
                material: name.clone(),
                mean: layer_mean(&densities, i, vessel.settle_time, T_MIX),
                variance,
                weight: v / total,
            })
            .collect();
        LayerProfile { layers }
    }

    /// Fraction of each layer lying below `x`.
    pub fn fractions_below(&self, x: f64) -> Vec<f64> {
        self.layers
            .iter()
            .map(|l| normal_cdf(x, l.mean, l.variance))
            .collect()
    }

    /// Volume fraction of the column lying below `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.layers
            .iter()
            .map(|l| l.weight * normal_cdf(x, l.mean, l.variance))
            .sum()
    }

    /// Per-layer fraction lying below the cut that leaves `bottom` of the
    /// total column volume underneath it.
    pub fn cut_fractions(&self, bottom: f64) -> Vec<f64> {
        let n = self.layers.len();
        if bottom <= 0.0 {
            return vec![0.0; n];
        }
        if bottom >= 1.0 {
            return vec![1.0; n];
        }
        let spread = self
            .layers
            .iter()
            .map(|l| l.variance.max(MIN_VARIANCE).sqrt())
            .fold(0.0, f64::max);
        let lo_mean = self.layers.iter().map(|l| l.mean).fold(f64::INFINITY, f64::min);
        let hi_mean = self
            .layers
            .iter()
            .map(|l| l.mean)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut lo = lo_mean - 40.0 * spread - 1.0;
        let mut hi = hi_mean + 40.0 * spread + 1.0;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < bottom {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // The mixture CDF can jump by more than the bracket resolves when the
        // layers are razor thin, so interpolate between the bracket ends.
        let below_lo = self.fractions_below(lo);
        let below_hi = self.fractions_below(hi);
        let (f_lo, f_hi) = (self.cdf(lo), self.cdf(hi));
        let lambda = if f_hi > f_lo {
            ((bottom - f_lo) / (f_hi - f_lo)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        below_lo
            .iter()
            .zip(&below_hi)
            .map(|(a, b)| (a + lambda * (b - a)).clamp(0.0, 1.0))
            .collect()
    }
}

fn normal_cdf(x: f64, mean: f64, variance: f64) -> f64 {
    let sigma = variance.max(MIN_VARIANCE).sqrt();
    0.5 * libm::erfc(-(x - mean) / (sigma * std::f64::consts::SQRT_2))
}

/// Volume fraction of each solvent that can host dissolved solutes.
pub fn solvent_fractions(vessel: &Vessel, registry: &MaterialRegistry) -> BTreeMap<String, f64> {
    let hosts = vessel.host_volumes(registry);
    let total: f64 = hosts.iter().map(|(_, v)| v).sum();
    hosts
        .into_iter()
        .map(|(name, v)| (name, if total > 0.0 { v / total } else { 0.0 }))
        .collect()
}

/// Raw separated-limit weights for a solute before normalisation.
///
/// Values are the polarity quotient term of the partition law; they sum to
/// more than one when several solvents are present.
pub fn asymptotic_weights(
    vessel: &Vessel,
    solute: &str,
    registry: &MaterialRegistry,
) -> BTreeMap<String, f64> {
    let fractions = solvent_fractions(vessel, registry);
    let p_s = registry.get(solute).map_or(0.0, |m| m.polarity);
    let distance: BTreeMap<&str, f64> = fractions
        .keys()
        .map(|name| {
            let p_l = registry.get(name).map_or(0.0, |m| m.polarity);
            (name.as_str(), (p_s - p_l).abs())
        })
        .collect();
    let total_distance: f64 = distance.values().sum();
    if fractions.len() == 1 {
        return fractions.keys().map(|k| (k.clone(), 1.0)).collect();
    }
    if total_distance <= 0.0 {
        return fractions;
    }
    let weighted: f64 = fractions
        .iter()
        .map(|(name, f)| f * distance[name.as_str()])
        .sum();
    let denominator = 1.0 - weighted / total_distance;
    fractions
        .keys()
        .map(|name| {
            let numerator = 1.0 - distance[name.as_str()] / total_distance;
            let value = if denominator > 0.0 {
                numerator / denominator
            } else {
                numerator
            };
            (name.clone(), value)
        })
        .collect()
}

/// Separated-limit share of a solute in each solvent, summing to one.
pub fn asymptotic_partition(
    vessel: &Vessel,
    solute: &str,
    registry: &MaterialRegistry,
) -> BTreeMap<String, f64> {
    normalized(asymptotic_weights(vessel, solute, registry))
}

/// Target share of a solute in each solvent at settle time `t`.
pub fn equilibrium_partition(
    vessel: &Vessel,
    solute: &str,
    t: f64,
    registry: &MaterialRegistry,
) -> BTreeMap<String, f64> {
    let mixed = solvent_fractions(vessel, registry);
    let separated = asymptotic_partition(vessel, solute, registry);
    let blend = (BLEND_RATE * (T_MIX - t)).exp();
    normalized(
        mixed
            .iter()
            .map(|(name, f)| {
                let s = separated.get(name).copied().unwrap_or(0.0);
                (name.clone(), blend * f + (1.0 - blend) * s)
            })
            .collect(),
    )
}

fn normalized(mut map: BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let total: f64 = map.values().sum();
    if total > 0.0 {
        for v in map.values_mut() {
            *v /= total;
        }
    }
    map
}

/// Advances the settle-time coordinate by `dt`, separating the layers.
pub fn settle(vessel: &mut Vessel, dt: f64, registry: &MaterialRegistry) {
    if dt <= 0.0 {
        return;
    }
    let t_prev = vessel.settle_time;
    let t = t_prev + dt;
    repartition(vessel, t_prev, t, registry, |s_t, cur, s_prev| s_t + cur - s_prev);
    vessel.settle_time = t;
}

/// Moves the settle-time coordinate back by `dt`, never past [`T_MIX`].
pub fn mix(vessel: &mut Vessel, dt: f64, registry: &MaterialRegistry) {
    if dt <= 0.0 {
        return;
    }
    let t_prev = vessel.settle_time;
    let t = (t_prev - dt).max(T_MIX);
    if t >= t_prev {
        return;
    }
    let ratio = (t - T_MIX) / (t_prev - T_MIX);
    repartition(vessel, t_prev, t, registry, |s_t, cur, s_prev| {
        s_t + ratio * (cur - s_prev)
    });
    vessel.settle_time = t;
}

fn repartition(
    vessel: &mut Vessel,
    t_prev: f64,
    t: f64,
    registry: &MaterialRegistry,
    rule: impl Fn(f64, f64, f64) -> f64,
) {
    let solutes: Vec<String> = vessel.solutes.keys().cloned().collect();
    for solute in solutes {
        let total = vessel.dissolved_total(&solute);
        if total <= 0.0 {
            continue;
        }
        let now = equilibrium_partition(vessel, &solute, t, registry);
        let before = equilibrium_partition(vessel, &solute, t_prev, registry);
        let current = vessel.partition_fractions(&solute);
        let mut next: BTreeMap<String, f64> = now
            .iter()
            .map(|(name, s_t)| {
                let cur = current.get(name).copied().unwrap_or(0.0);
                let prev = before.get(name).copied().unwrap_or(0.0);
                (name.clone(), rule(*s_t, cur, prev).max(0.0))
            })
            .collect();
        if next.values().sum::<f64>() <= 0.0 {
            next = now;
        }
        let next = normalized(next);
        vessel.set_partition(&solute, total, &next);
    }
}

/// Samples one layer label per pixel, bottom pixel first.
///
/// Labels are `AIR_LABEL` for the headspace and `1 + registry index` for a
/// liquid. Positions are equally spaced from three standard deviations below
/// the lowest layer to three above the highest; the air layer's weight is the
/// empty fraction of the vessel.
pub fn render_layers<R: Rng + ?Sized>(
    vessel: &Vessel,
    n_pixels: usize,
    rng: &mut R,
    registry: &MaterialRegistry,
) -> Vec<usize> {
    let model = RenderModel::new(vessel, registry);
    model
        .positions(n_pixels)
        .into_iter()
        .map(|x| {
            let probs = model.probabilities(x);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (label, p) in model.labels.iter().zip(&probs) {
                acc += p;
                if u < acc {
                    return *label;
                }
            }
            *model.labels.last().unwrap()
        })
        .collect()
}

/// The Gaussian mixture behind [`render_layers`], exposed for inspection.
#[derive(Debug, Clone)]
pub struct RenderModel {
    pub labels: Vec<usize>,
    pub means: Vec<f64>,
    pub weights: Vec<f64>,
    pub variance: f64,
}

impl RenderModel {
    pub fn new(vessel: &Vessel, registry: &MaterialRegistry) -> Self {
        let capacity = vessel.volume_capacity;
        let mut labels = Vec::new();
        let mut densities = Vec::new();
        let mut weights = Vec::new();
        for (name, volume) in vessel.liquid_volumes(registry) {
            if let (Some(index), Some(m)) = (registry.index_of(&name), registry.get(&name)) {
                labels.push(1 + index);
                densities.push(m.density);
                weights.push(volume / capacity);
            }
        }
        let filled: f64 = weights.iter().sum();
        labels.push(AIR_LABEL);
        densities.push(AIR_DENSITY);
        weights.push((1.0 - filled).max(0.0));
        if weights.iter().sum::<f64>() <= 0.0 {
            *weights.last_mut().unwrap() = 1.0;
        }
        let means = layer_means(&densities, vessel.settle_time, T_MIX);
        RenderModel {
            labels,
            means,
            weights,
            variance: layer_variance(vessel.settle_time).max(MIN_VARIANCE),
        }
    }

    pub fn positions(&self, n_pixels: usize) -> Vec<f64> {
        let sigma = self.variance.sqrt();
        let present: Vec<f64> = self
            .means
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(m, _)| *m)
            .collect();
        let lo = present.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * sigma;
        let hi = present.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * sigma;
        if n_pixels == 1 {
            return vec![0.5 * (lo + hi)];
        }
        let step = (hi - lo) / (n_pixels - 1) as f64;
        (0..n_pixels).map(|k| lo + step * k as f64).collect()
    }

    /// Label probabilities at position `x`, aligned with `labels`.
    pub fn probabilities(&self, x: f64) -> Vec<f64> {
        let log_terms: Vec<f64> = self
            .means
            .iter()
            .zip(&self.weights)
            .map(|(m, w)| {
                if *w > 0.0 {
                    w.ln() - (x - m).powi(2) / (2.0 * self.variance)
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = log_terms.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.iter().map(|e| e / total).collect()
    }
}
