//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Oracles here are computed independently of the library.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use benchlab::bench::{Action, BenchEnv, Environment, ScenarioConfig};
use benchlab::cli::{cmd_pipeline, PipelineArgs};
use benchlab::kinetics::{rkf45, IntegratorConfig, Reaction, ReactionNetwork, Term};
use benchlab::layers::{self, render_layers};
use benchlab::policy::{self, rollout_parallel, EpisodeOptions, Policy, RandomPolicy, ReturnStats};
use benchlab::thermal::apply_heat;
use benchlab::vessel::{solute_purity, Vessel};
use benchlab::{MaterialRegistry, Phase};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reg() -> MaterialRegistry {
    MaterialRegistry::default_registry()
}

// --- worked reward example ---------------------------------------------------

fn worked_reward() -> Outcome {
    let reg = reg();
    let mut ev = Vessel::new("EV", 1.0, &reg);
    let mut b1 = Vessel::new("B1", 1.0, &reg);
    for (v, product, salt) in [(&mut ev, 0.7, 0.2), (&mut b1, 0.3, 0.8)] {
        v.add_material(&reg, "diethyl ether", 2.0, Phase::Liquid).map_err(|e| e.to_string())?;
        v.add_material(&reg, "dodecane", product, Phase::Dissolved).map_err(|e| e.to_string())?;
        v.add_material(&reg, "sodium chloride", salt, Phase::Dissolved).map_err(|e| e.to_string())?;
    }
    let purity = solute_purity(&[&ev, &b1], "dodecane", &reg);
    // start: 1 mol product among 1 mol salt (2 ions) -> 1/3
    let reward = (purity - 1.0 / 3.0) * 1.0;
    check(
        (purity - 0.493).abs() <= 1e-3 && (reward - 0.159).abs() <= 1e-3,
        format!("purity {purity:.4}, reward {reward:.4}"),
    )
}

// --- kinetics oracle ---------------------------------------------------------

/// Rate constant, reactant orders, species changes.
type CompiledReaction = (f64, Vec<(usize, i32)>, Vec<(usize, f64)>);

/// Mass-action right-hand side with species resolved to indices.
struct MassAction {
    reactions: Vec<CompiledReaction>,
}

impl MassAction {
    fn new(network: &ReactionNetwork, k: &[f64]) -> Self {
        let idx = |s: &str| network.species.iter().position(|x| x == s).unwrap();
        let reactions = network
            .reactions
            .iter()
            .zip(k)
            .map(|(r, k)| {
                let orders = r.reactants.iter().map(|t| (idx(&t.material), t.coefficient as i32)).collect();
                let mut change: Vec<(usize, f64)> =
                    r.reactants.iter().map(|t| (idx(&t.material), -(t.coefficient as f64))).collect();
                change.extend(r.products.iter().map(|t| (idx(&t.material), t.coefficient as f64)));
                (*k, orders, change)
            })
            .collect();
        MassAction { reactions }
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) {
        dy.iter_mut().for_each(|d| *d = 0.0);
        for (k, orders, change) in &self.reactions {
            let rate = orders.iter().fold(*k, |acc, &(i, nu)| acc * y[i].max(0.0).powi(nu));
            for &(i, nu) in change {
                dy[i] += nu * rate;
            }
        }
    }
}

fn rk4(f: &MassAction, y0: &[f64], t_end: f64, h: f64) -> Vec<f64> {
    let n = y0.len();
    let steps = (t_end / h).round() as usize;
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..steps {
        f.eval(&y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        f.eval(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        f.eval(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        f.eval(&tmp, &mut k4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

fn arrhenius(network: &ReactionNetwork, t: f64) -> Vec<f64> {
    network
        .reactions
        .iter()
        .map(|r| r.pre_exponential * (-r.activation_energy / (8.314 * t)).exp())
        .collect()
}

fn kinetics_oracle() -> Outcome {
    let term = |m: &str| Term {
        material: m.into(),
        coefficient: 1,
    };
    let net = ReactionNetwork::new(
        "xyz",
        vec![Reaction {
            reactants: vec![term("X"), term("Y")],
            products: vec![term("Z")],
            pre_exponential: 1.0,
            activation_energy: 0.0,
        }],
    )
    .map_err(|e| e.to_string())?;
    let cfg = IntegratorConfig::default();
    let mut worst_analytic: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        let f = MassAction::new(&net, &[1.0]);
        let y = rkf45(|y, dy| f.eval(y, dy), &[1.0, 1.0, 0.0], t, &cfg)
            .map_err(|e| e.to_string())?
            .y;
        worst_analytic = worst_analytic.max((y[0] - 1.0 / (1.0 + t)).abs());
    }

    let temperature = 373.15;
    let mut worst_rk4: f64 = 0.0;
    let cases = [
        (
            ReactionNetwork::wurtz(),
            BTreeMap::from([("1-chlorohexane", 0.5), ("2-chlorohexane", 0.5), ("3-chlorohexane", 0.5), ("sodium", 0.5)]),
        ),
        (
            ReactionNetwork::fictitious(),
            BTreeMap::from([("A", 0.5), ("B", 0.5), ("C", 0.5), ("D", 1.5)]),
        ),
    ];
    for (net, initial) in &cases {
        let y0: Vec<f64> = net
            .species
            .iter()
            .map(|s| initial.get(s.as_str()).copied().unwrap_or(0.0))
            .collect();
        let f = MassAction::new(net, &arrhenius(net, temperature));
        let adaptive = rkf45(|y, dy| f.eval(y, dy), &y0, 200.0, &cfg)
            .map_err(|e| e.to_string())?
            .y;
        let reference = rk4(&f, &y0, 200.0, 1e-4);
        for (a, b) in adaptive.iter().zip(&reference) {
            worst_rk4 = worst_rk4.max((a - b).abs());
        }
    }
    check(
        worst_analytic <= 1e-6 && worst_rk4 <= 1e-5,
        format!("max |X - 1/(1+t)| = {worst_analytic:.2e} M, max |RKF45 - RK4| = {worst_rk4:.2e} M"),
    )
}

// --- conservation ------------------------------------------------------------

/// Species-basis stoichiometric matrix: dissociating products count as ions.
fn species_stoichiometry(net: &ReactionNetwork, reg: &MaterialRegistry) -> (Vec<String>, DMatrix<f64>) {
    let expand = |name: &str| -> Vec<(String, f64)> {
        match reg.get(name) {
            Some(m) if !m.dissociates.is_empty() => {
                m.dissociates.iter().map(|d| (d.species.clone(), d.count as f64)).collect()
            }
            _ => vec![(name.to_string(), 1.0)],
        }
    };
    let mut names: Vec<String> = Vec::new();
    let mut columns: Vec<BTreeMap<String, f64>> = Vec::new();
    for r in &net.reactions {
        let mut col = BTreeMap::new();
        for (terms, sign) in [(&r.reactants, -1.0), (&r.products, 1.0)] {
            for t in terms {
                for (s, c) in expand(&t.material) {
                    *col.entry(s.clone()).or_insert(0.0) += sign * c * t.coefficient as f64;
                    if !names.contains(&s) {
                        names.push(s);
                    }
                }
            }
        }
        columns.push(col);
    }
    let m = DMatrix::from_fn(names.len(), columns.len(), |i, j| {
        columns[j].get(&names[i]).copied().unwrap_or(0.0)
    });
    (names, m)
}

fn all_amounts_non_negative(v: &Vessel) -> bool {
    let ok = |n: &f64| *n >= -1e-12;
    v.liquids.values().all(ok)
        && v.solids.values().all(ok)
        && v.gases.values().all(ok)
        && v.solutes.values().all(|by| by.values().all(ok))
}

/// Largest per-species imbalance, after projecting out reaction extents.
fn imbalance(env: &BenchEnv, stoich: Option<&(Vec<String>, DMatrix<f64>)>) -> f64 {
    let reg = env.registry();
    let mut delta: BTreeMap<String, f64> = BTreeMap::new();
    for v in env.vessels() {
        for (s, n) in v.species_totals(reg) {
            *delta.entry(s).or_insert(0.0) += n;
        }
    }
    let ledger = env.ledger();
    for (s, n) in &ledger.lost {
        *delta.entry(s.clone()).or_insert(0.0) += n;
    }
    for (s, n) in &ledger.supplied {
        *delta.entry(s.clone()).or_insert(0.0) -= n;
    }
    if let Some((names, m)) = stoich {
        let b = DVector::from_fn(names.len(), |i, _| delta.get(&names[i]).copied().unwrap_or(0.0));
        let extents = m.clone().svd(true, true).solve(&b, 1e-12).expect("svd solve");
        let residual = &b - m * extents;
        let outside = delta
            .iter()
            .filter(|(s, _)| !names.contains(s))
            .map(|(_, d)| d.abs())
            .fold(0.0, f64::max);
        residual.amax().max(outside)
    } else {
        delta.values().map(|d| d.abs()).fold(0.0, f64::max)
    }
}

fn conservation() -> Outcome {
    const SEQUENCES: usize = 10_000;
    let mut details = Vec::new();
    let mut ok = true;
    for config in [
        ScenarioConfig::wurtz_reaction(),
        ScenarioConfig::fictitious_reaction(),
        ScenarioConfig::wurtz_extraction(),
        ScenarioConfig::wurtz_distillation(),
    ] {
        let mut env = BenchEnv::from_config(&config).map_err(|e| e.to_string())?;
        let stoich = (config.bench == benchlab::bench::BenchKind::Rxn)
            .then(|| species_stoichiometry(&config.load_network().unwrap(), env.registry()));
        let (spec, _) = env.spaces();
        let mut worst: f64 = 0.0;
        let mut negative = 0usize;
        for seed in 0..SEQUENCES as u64 {
            env.reset(seed, None).map_err(|e| e.to_string())?;
            let mut p = RandomPolicy::new(spec.clone(), seed ^ 0xC0FFEE);
            while !env.is_done() {
                let a = p.act(&[], &policy::Context { step: env.step_count(), target: "" });
                env.step(&a).map_err(|e| format!("seed {seed}: {e}"))?;
                if !env.vessels().into_iter().all(all_amounts_non_negative) {
                    negative += 1;
                }
                worst = worst.max(imbalance(&env, stoich.as_ref()));
            }
        }
        ok &= worst <= 1e-9 && negative == 0;
        details.push(format!(
            "{} {}: max imbalance {worst:.1e} mol, {negative} negative states",
            config.bench.name(),
            config.scenario
        ));
    }
    check(ok, format!("{SEQUENCES} sequences per bench; {}", details.join("; ")))
}

// --- thermal plateau ---------------------------------------------------------

fn oracle_heat_capacity(v: &Vessel, reg: &MaterialRegistry) -> f64 {
    let cp = |name: &str| reg.get(name).unwrap().heat_capacity_molar;
    v.liquids.iter().map(|(m, n)| cp(m) * n).sum::<f64>()
        + v.solids.iter().map(|(m, n)| cp(m) * n).sum::<f64>()
        + v.gases.iter().map(|(m, n)| cp(m) * n).sum::<f64>()
        + v.solutes.iter().map(|(m, by)| cp(m) * by.values().sum::<f64>()).sum::<f64>()
}

fn thermal_plateau() -> Outcome {
    let reg = reg();
    let ether = reg.lookup("diethyl ether").unwrap().clone();
    let mut worst_closure: f64 = 0.0;
    let mut worst_overshoot = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dv = Vessel::new("DV", 1.0, &reg);
        dv.add_material(&reg, "diethyl ether", rng.random_range(1.0..5.0), Phase::Liquid).unwrap();
        dv.add_material(&reg, "water", rng.random_range(5.0..20.0), Phase::Liquid).unwrap();
        let mut b1 = Vessel::new("B1", 1.0, &reg);
        for _ in 0..30 {
            let q: f64 = rng.random_range(-5_000.0..15_000.0);
            let before = dv.clone();
            let cp_before = oracle_heat_capacity(&dv, &reg);
            let r = apply_heat(&mut dv, &mut b1, q, &reg).map_err(|e| e.to_string())?;
            let latent: f64 = r
                .vaporized
                .iter()
                .map(|(m, n)| n * reg.get(m).unwrap().enthalpy_vaporization)
                .sum();
            let mut closure = (q - (r.sensible + r.latent + r.unused)).abs().max((r.latent - latent).abs());
            if r.vaporized.is_empty() {
                closure = closure.max((r.sensible - cp_before * (dv.temperature - before.temperature)).abs());
            }
            worst_closure = worst_closure.max(closure);
            if dv.liquids.get("diethyl ether").is_some_and(|n| *n > 0.0) {
                worst_overshoot = worst_overshoot.max(dv.temperature - ether.boiling_point);
                if dv.temperature > ether.boiling_point + 1e-9 {
                    violations += 1;
                }
            }
        }
    }
    check(
        violations == 0 && worst_closure <= 1e-6,
        format!(
            "1000 sequences: {violations} steps above the ether boiling point while ether remained \
             (max T - Tb {worst_overshoot:.2e} K), energy closure {worst_closure:.2e} J"
        ),
    )
}

// --- layer statistics --------------------------------------------------------

struct Mixture {
    labels: Vec<usize>,
    means: Vec<f64>,
    weights: Vec<f64>,
    sigma2: f64,
}

/// Independent Gaussian-mixture oracle for a vessel of liquids plus air.
fn mixture(v: &Vessel, reg: &MaterialRegistry) -> Mixture {
    let mut labels = Vec::new();
    let mut dens = Vec::new();
    let mut weights = Vec::new();
    for (name, n) in &v.liquids {
        let m = reg.get(name).unwrap();
        labels.push(1 + reg.index_of(name).unwrap());
        dens.push(m.density);
        weights.push(n * m.molar_mass / m.density / 1000.0 / v.volume_capacity);
    }
    labels.push(0);
    dens.push(0.001_225);
    weights.push(1.0 - weights.iter().sum::<f64>());
    let t = v.settle_time;
    let means = (0..dens.len())
        .map(|i| t * (0..dens.len()).filter(|&j| j != i).map(|j| dens[j] - dens[i]).sum::<f64>())
        .collect();
    Mixture {
        labels,
        means,
        weights,
        sigma2: ((-t).exp() / (2.0 * std::f64::consts::PI).sqrt()).max(1e-300),
    }
}

impl Mixture {
    fn positions(&self, n: usize) -> Vec<f64> {
        let s = self.sigma2.sqrt();
        let lo = self.means.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * s;
        let hi = self.means.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * s;
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    fn probabilities(&self, x: f64) -> Vec<f64> {
        let logs: Vec<f64> = self
            .means
            .iter()
            .zip(&self.weights)
            .map(|(m, w)| w.ln() - (x - m).powi(2) / (2.0 * self.sigma2))
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = e.iter().sum();
        e.into_iter().map(|x| x / z).collect()
    }
}

fn layer_statistics() -> Outcome {
    const SEEDS: usize = 1000;
    const PIXELS: usize = 100;
    let reg = reg();
    let mut v = Vessel::new("EV", 1.0, &reg);
    v.add_material(&reg, "water", 15.0, Phase::Liquid).unwrap();
    v.add_material(&reg, "diethyl ether", 2.0, Phase::Liquid).unwrap();
    v.add_material(&reg, "hexane", 2.0, Phase::Liquid).unwrap();
    layers::settle(&mut v, 20.0, &reg);
    let oracle = mixture(&v, &reg);
    let probs: Vec<Vec<f64>> = oracle.positions(PIXELS).iter().map(|x| oracle.probabilities(*x)).collect();
    let modal: Vec<usize> = probs
        .iter()
        .map(|p| oracle.labels[(0..p.len()).max_by(|a, b| p[*a].total_cmp(&p[*b])).unwrap()])
        .collect();

    // bands bottom to top must follow decreasing density
    let density = |label: usize| {
        if label == 0 {
            0.001_225
        } else {
            reg.iter().nth(label - 1).unwrap().density
        }
    };
    let mut bands = modal.clone();
    bands.dedup();
    let ordered = bands.windows(2).all(|w| density(w[0]) > density(w[1]));

    let mut counts = vec![BTreeMap::<usize, usize>::new(); PIXELS];
    let mut wrong = 0usize;
    for seed in 0..SEEDS as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let row = render_layers(&v, PIXELS, &mut rng, &reg);
        for (k, label) in row.into_iter().enumerate() {
            *counts[k].entry(label).or_insert(0) += 1;
            if label != modal[k] {
                wrong += 1;
            }
        }
    }
    let misclassified = wrong as f64 / (SEEDS * PIXELS) as f64;
    let mut outside = 0usize;
    for (k, p) in probs.iter().enumerate() {
        for (j, label) in oracle.labels.iter().enumerate() {
            let f = counts[k].get(label).copied().unwrap_or(0) as f64 / SEEDS as f64;
            let bound = 3.0 * (p[j] * (1.0 - p[j]) / SEEDS as f64).sqrt();
            if (f - p[j]).abs() > bound + 1e-12 {
                outside += 1;
            }
        }
    }
    check(
        ordered && bands.len() == 4 && misclassified <= 0.02 && outside == 0,
        format!(
            "{} bands density-ordered: {ordered}; misclassified {:.3}%; {outside} of {} frequencies outside 3 sigma",
            bands.len(),
            100.0 * misclassified,
            PIXELS * oracle.labels.len()
        ),
    )
}

// --- policy ordering ---------------------------------------------------------

/// Largest amount of `target` the inventory allows through any one reaction.
fn stoichiometric_ceiling(net: &ReactionNetwork, inventory: &BTreeMap<&str, f64>, target: &str) -> f64 {
    net.reactions
        .iter()
        .filter_map(|r| {
            let made = r.products.iter().find(|p| p.material == target)?.coefficient as f64;
            let extent = r
                .reactants
                .iter()
                .map(|t| inventory.get(t.material.as_str()).copied().unwrap_or(0.0) / t.coefficient as f64)
                .fold(f64::INFINITY, f64::min);
            Some(extent * made)
        })
        .fold(0.0, f64::max)
}

fn policy_ordering() -> Outcome {
    const EPISODES: usize = 1000;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut lines = Vec::new();
    let mut ok = true;
    for config in [
        ScenarioConfig::wurtz_reaction(),
        ScenarioConfig::fictitious_reaction(),
        ScenarioConfig::wurtz_extraction(),
        ScenarioConfig::wurtz_distillation(),
    ] {
        let registry = Arc::new(config.load_registry().map_err(|e| e.to_string())?);
        let run = |name: &str| -> Result<ReturnStats, String> {
            rollout_parallel(&config, Arc::clone(&registry), name, EPISODES, 11, threads, &EpisodeOptions::default())
                .map(|(s, _)| s)
                .map_err(|e| e.to_string())
        };
        let (h, r, n) = (run("heuristic")?, run("random")?, run("none")?);
        let margin = |a: &ReturnStats, b: &ReturnStats| {
            let se = (a.standard_error().powi(2) + b.standard_error().powi(2)).sqrt();
            a.mean - b.mean > 2.0 * se
        };
        let ordered = margin(&h, &r) && margin(&r, &n);
        ok &= ordered;
        lines.push(format!(
            "{} {}: heuristic {:.4}±{:.4} > random {:.4}±{:.4} > stop {:.4} [{}]",
            config.bench.name(),
            config.scenario,
            h.mean,
            h.standard_error(),
            r.mean,
            r.standard_error(),
            n.mean,
            if ordered { "ok" } else { "VIOLATED" }
        ));
        if config.bench == benchlab::bench::BenchKind::Rxn && config.scenario == "wurtz" {
            let net = ReactionNetwork::wurtz();
            let inventory = BTreeMap::from([
                ("1-chlorohexane", 1.0),
                ("2-chlorohexane", 1.0),
                ("3-chlorohexane", 1.0),
                ("sodium", 1.0),
            ]);
            let mut worst = f64::INFINITY;
            for (target, t) in &h.per_target {
                let ceiling = stoichiometric_ceiling(&net, &inventory, target);
                worst = worst.min(t.mean / ceiling);
            }
            ok &= worst >= 0.9 && h.per_target.len() == 7;
            lines.push(format!("wurtz heuristic worst per-target fraction of ceiling {worst:.3}"));
        }
    }
    check(ok, lines.join("; "))
}

// --- pipeline replay ---------------------------------------------------------

fn pipeline_replay() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let args = PipelineArgs {
        stages: vec!["rxn:heuristic".into(), "dit:heuristic".into()],
        scenario: "wurtz".into(),
        target: Some("dodecane".into()),
        input: None,
        seed: 0,
        out: dir.path().to_path_buf(),
    };
    let summary = cmd_pipeline(&args).map_err(|e| e.to_string())?;
    let reg = reg();
    let collected = Vessel::load(&summary.final_snapshot).map_err(|e| e.to_string())?;
    let purity = benchlab::vessel::absolute_purity(&[&collected], "dodecane", &reg);
    check(
        purity >= 0.9 && (purity - summary.final_purity).abs() < 1e-12,
        format!("rxn -> dit dodecane: collection vessel `{}` absolute purity {purity:.4}", collected.label),
    )
}

// --- determinism -------------------------------------------------------------

fn trace(config: &ScenarioConfig, seed: u64) -> Result<Vec<u64>, String> {
    let mut env = BenchEnv::from_config(config).map_err(|e| e.to_string())?;
    let (spec, _) = env.spaces();
    let mut actions = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31));
    let mut bits: Vec<u64> = env.reset(seed, None).map_err(|e| e.to_string())?.iter().map(|x| x.to_bits()).collect();
    while !env.is_done() {
        let a: Action = spec.sample(&mut actions);
        let r = env.step(&a).map_err(|e| e.to_string())?;
        bits.extend(r.observation.iter().map(|x| x.to_bits()));
        bits.push(r.reward.to_bits());
    }
    for v in env.vessels() {
        bits.extend(v.to_json().map_err(|e| e.to_string())?.bytes().map(u64::from));
    }
    Ok(bits)
}

fn determinism() -> Outcome {
    let mut compared = 0usize;
    for config in [
        ScenarioConfig::wurtz_reaction(),
        ScenarioConfig::fictitious_reaction(),
        ScenarioConfig::wurtz_extraction(),
        ScenarioConfig::wurtz_distillation(),
    ] {
        for seed in 0..25u64 {
            let (a, b) = (trace(&config, seed)?, trace(&config, seed)?);
            if a != b {
                return Err(format!("{} {} seed {seed} diverged", config.bench.name(), config.scenario));
            }
            compared += a.len();
        }
        let registry = Arc::new(config.load_registry().map_err(|e| e.to_string())?);
        let opts = EpisodeOptions {
            record_observations: true,
            ..Default::default()
        };
        let (_, one) = rollout_parallel(&config, Arc::clone(&registry), "random", 8, 3, 1, &opts).map_err(|e| e.to_string())?;
        let (_, four) = rollout_parallel(&config, registry, "random", 8, 3, 4, &opts).map_err(|e| e.to_string())?;
        if one != four {
            return Err(format!("{} {}: parallel rollout differs from serial", config.bench.name(), config.scenario));
        }
    }
    Ok(format!("100 seeded action sequences replayed bit-identically ({compared} values), serial = parallel rollouts"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 8] = [
        ("worked reward example", worked_reward, Duration::from_secs(1)),
        ("kinetics oracle", kinetics_oracle, Duration::from_secs(10)),
        ("conservation suite", conservation, Duration::from_secs(300)),
        ("thermal plateau", thermal_plateau, Duration::MAX),
        ("layer statistics", layer_statistics, Duration::MAX),
        ("policy ordering", policy_ordering, Duration::from_secs(600)),
        ("pipeline replay", pipeline_replay, Duration::MAX),
        ("determinism", determinism, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if elapsed <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!(
            "{} [{}] {name}: {detail} ({:.2?})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
