//! Command-line front end: rollouts, bench pipelines, rendering, validation.
//!
//! Layer images are binary PGM files (`P5`), one row per rendered sample,
//! pixel 0 (leftmost) at the bottom of the vessel. A pixel holding label
//! `l` of a registry with `n` materials is stored as byte `round(255 l / n)`,
//! so air (label 0) is black and liquid `i` of the registry is
//! `round(255 (i + 1) / n)`.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bench::{BenchEnv, BenchKind, Environment, ScenarioConfig};
use crate::characterization::uv_vis;
use crate::kinetics::ReactionNetwork;
use crate::layers::render_layers;
use crate::materials::MaterialRegistry;
use crate::policy::{self, episode_seed, EpisodeOptions, ReturnStats};
use crate::vessel::{absolute_purity, Vessel};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "benchlab", version, about = "Bench-chemistry simulation engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run episodes of one bench under a policy.
    Rollout(RolloutArgs),
    /// Chain benches, feeding each stage's output vessel to the next.
    Pipeline(PipelineArgs),
    /// Render a vessel snapshot as a layer image and a UV-Vis spectrum.
    Render(RenderArgs),
    /// Check materials, reaction network, scenario or snapshot files.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// rxn, ext or dit.
    #[arg(long)]
    pub bench: Option<String>,
    /// wurtz or fictitious.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Scenario file; --bench and --scenario override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Pin the target instead of drawing it per episode.
    #[arg(long)]
    pub target: Option<String>,
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut config = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => {
                let bench: BenchKind = self.bench.as_deref().unwrap_or("rxn").parse()?;
                ScenarioConfig::preset(bench, self.scenario.as_deref().unwrap_or("wurtz"))?
            }
        };
        if self.config.is_some() {
            if let Some(b) = &self.bench {
                config.bench = b.parse()?;
            }
            if let Some(s) = &self.scenario {
                config.scenario = s.clone();
            }
        }
        if self.target.is_some() {
            config.target = self.target.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// heuristic, random or none.
    #[arg(long, default_value = "heuristic")]
    pub policy: String,
    #[arg(long, default_value_t = 100)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stop every episode after this many steps.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also log every observation in the trajectory file.
    #[arg(long)]
    pub observations: bool,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// A stage as `bench[:policy]`, in order; repeat for each stage.
    #[arg(long = "stage", required = true)]
    pub stages: Vec<String>,
    /// Scenario of reaction stages.
    #[arg(long, default_value = "wurtz")]
    pub scenario: String,
    #[arg(long)]
    pub target: Option<String>,
    /// Vessel snapshot fed to the first stage.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Vessel snapshot (JSON).
    #[arg(long)]
    pub vessel: PathBuf,
    /// Materials file the snapshot refers to.
    #[arg(long)]
    pub materials: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub pixels: usize,
    /// Independent samples, one image row each.
    #[arg(long, default_value_t = 1)]
    pub rows: usize,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Files to check; the kind is inferred from the extension and contents.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Materials that networks and snapshots are checked against.
    #[arg(long)]
    pub materials: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 2 on bad input, 1 otherwise.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::NotFound(_)
        | Error::UnknownMethod(_)
        | Error::UnknownScenario(_)
        | Error::Config(_)
        | Error::Io { .. } => 2,
        _ => 1,
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Rollout(a) => {
            println!("{}", to_json(&cmd_rollout(a)?)?);
            Ok(())
        }
        Command::Pipeline(a) => {
            println!("{}", to_json(&cmd_pipeline(a)?)?);
            Ok(())
        }
        Command::Render(a) => cmd_render(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))
}

/// Writes `stats.json`, `trajectories.jsonl` and one output-vessel snapshot
/// per episode under `snapshots/`.
pub fn cmd_rollout(args: &RolloutArgs) -> Result<ReturnStats> {
    let config = args.scenario.resolve()?;
    let registry = Arc::new(config.load_registry()?);
    let options = EpisodeOptions {
        target: config.target.clone(),
        step_limit: args.steps,
        record_observations: args.observations,
    };
    // fail on a bad policy name before any work is done
    policy::policy_by_name(&args.policy, &config, args.seed)?;
    let (stats, trajectories) = policy::rollout_parallel(
        &config,
        Arc::clone(&registry),
        &args.policy,
        args.episodes,
        args.seed,
        args.parallel,
        &options,
    )?;

    let snapshots = args.out.join("snapshots");
    create_dir(&snapshots)?;
    let mut log = Vec::new();
    for t in &trajectories {
        serde_json::to_writer(&mut log, t).map_err(|e| Error::Serialize(e.to_string()))?;
        log.push(b'\n');
        if let Some(v) = purest(&t.final_vessels, &t.target, &registry) {
            v.save(snapshots.join(format!("episode_{:05}.json", t.episode)))?;
        }
    }
    write_file(&args.out.join("trajectories.jsonl"), &log)?;
    write_file(&args.out.join("stats.json"), to_json(&stats)?.as_bytes())?;
    Ok(stats)
}

fn purest<'a>(vessels: &'a [Vessel], target: &str, registry: &MaterialRegistry) -> Option<&'a Vessel> {
    vessels.iter().max_by(|a, b| {
        absolute_purity(&[a], target, registry).total_cmp(&absolute_purity(&[b], target, registry))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub bench: String,
    pub policy: String,
    #[serde(rename = "return")]
    pub total_return: f64,
    pub steps: usize,
    pub output_purity: f64,
    pub snapshot: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineSummary {
    pub target: String,
    pub stages: Vec<StageSummary>,
    pub final_purity: f64,
    pub final_snapshot: PathBuf,
}

/// Runs each stage for one episode. The first stage draws the target
/// unless it is pinned; later stages reuse it. Writes one snapshot per
/// stage plus `final.json` and `pipeline.json`.
pub fn cmd_pipeline(args: &PipelineArgs) -> Result<PipelineSummary> {
    let mut stages = Vec::new();
    for spec in &args.stages {
        let (bench, policy) = spec.split_once(':').unwrap_or((spec.as_str(), "heuristic"));
        let bench: BenchKind = bench.parse()?;
        let scenario = if bench == BenchKind::Rxn { args.scenario.as_str() } else { "wurtz" };
        stages.push((ScenarioConfig::preset(bench, scenario)?, policy.to_string()));
    }
    let registry = Arc::new(stages[0].0.load_registry()?);
    let mut input = match &args.input {
        Some(path) => {
            let v = Vessel::load(path)?;
            v.check_registry(&registry)?;
            Some(v)
        }
        None => None,
    };
    let mut target = args.target.clone();
    let snapshots = args.out.join("snapshots");
    create_dir(&snapshots)?;
    let mut summary = PipelineSummary {
        target: String::new(),
        stages: Vec::new(),
        final_purity: 0.0,
        final_snapshot: args.out.join("final.json"),
    };
    let mut last = None;
    for (k, (config, policy_name)) in stages.iter().enumerate() {
        let mut env = BenchEnv::with_registry(config, Arc::clone(&registry))?;
        env.set_input(input.take())?;
        let seed = episode_seed(args.seed, k);
        let mut policy = policy::policy_by_name(policy_name, config, seed)?;
        let options = EpisodeOptions {
            target: target.clone(),
            ..EpisodeOptions::default()
        };
        let trajectory = policy::run_episode(&mut env, policy.as_mut(), seed, &options)?;
        let out = env.output_vessel().clone();
        let purity = absolute_purity(&[&out], env.target(), &registry);
        let path = snapshots.join(format!("stage_{k}_{}.json", config.bench.name()));
        out.save(&path)?;
        target = Some(env.target().to_string());
        summary.stages.push(StageSummary {
            bench: config.bench.name().into(),
            policy: policy_name.clone(),
            total_return: trajectory.total_return,
            steps: trajectory.steps.len(),
            output_purity: purity,
            snapshot: path,
        });
        summary.final_purity = purity;
        input = Some(out.clone());
        last = Some(out);
    }
    summary.target = target.unwrap_or_default();
    if let Some(v) = &last {
        v.save(&summary.final_snapshot)?;
    }
    write_file(&args.out.join("pipeline.json"), to_json(&summary)?.as_bytes())?;
    Ok(summary)
}

/// Byte stored for a layer label in the PGM output.
pub fn label_byte(label: usize, materials: usize) -> u8 {
    (255.0 * label as f64 / materials.max(1) as f64).round().clamp(0.0, 255.0) as u8
}

/// Writes `layers.pgm` and `spectrum.txt` for a snapshot.
pub fn cmd_render(args: &RenderArgs) -> Result<()> {
    let registry = match &args.materials {
        Some(p) => MaterialRegistry::load(p)?,
        None => MaterialRegistry::default_registry(),
    };
    let vessel = Vessel::load(&args.vessel)?;
    vessel.check_registry(&registry)?;
    if args.pixels == 0 || args.rows == 0 || args.bins == 0 {
        return Err(Error::Config("--pixels, --rows and --bins must be at least 1".into()));
    }
    create_dir(&args.out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut image = format!("P5\n{} {}\n255\n", args.pixels, args.rows).into_bytes();
    for _ in 0..args.rows {
        let row = render_layers(&vessel, args.pixels, &mut rng, &registry);
        image.extend(row.into_iter().map(|l| label_byte(l, registry.len())));
    }
    write_file(&args.out.join("layers.pgm"), &image)?;
    let spectrum = uv_vis(&vessel, args.bins, &registry);
    write_file(&args.out.join("spectrum.txt"), spectrum.to_text().as_bytes())?;
    Ok(())
}

enum FileKind {
    Materials,
    Network,
    Scenario,
    Snapshot,
}

fn file_kind(path: &Path, text: &str) -> Result<FileKind> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("rxn") => Ok(FileKind::Network),
        Some("json") => Ok(FileKind::Snapshot),
        Some("toml") => {
            let table: toml::Table = toml::from_str(text).map_err(|e| Error::from_toml(text, e))?;
            Ok(if table.contains_key("bench") { FileKind::Scenario } else { FileKind::Materials })
        }
        _ => Err(Error::Config(format!(
            "{}: cannot tell the file kind (expected .toml, .rxn or .json)",
            path.display()
        ))),
    }
}

/// Checks every file, printing one `ok` line each; stops at the first bad one.
pub fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let registry = match &args.materials {
        Some(p) => MaterialRegistry::load(p)?,
        None => MaterialRegistry::default_registry(),
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for path in &args.files {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let what = match file_kind(path, &text)? {
            FileKind::Materials => {
                let r = MaterialRegistry::from_toml_str(&text)?;
                format!("materials, {} entries", r.len())
            }
            FileKind::Network => {
                let n = ReactionNetwork::from_toml_str(&text)?;
                n.check_registry(&registry)?;
                format!("reaction network, {} reactions", n.reactions.len())
            }
            FileKind::Scenario => {
                let c = ScenarioConfig::load(path)?;
                c.validate()?;
                BenchEnv::from_config(&c)?;
                format!("scenario, {} {}", c.bench.name(), c.scenario)
            }
            FileKind::Snapshot => {
                let v = Vessel::from_json(&text)?;
                v.check_registry(&registry)?;
                format!("vessel snapshot `{}`", v.label)
            }
        };
        let _ = writeln!(out, "ok {} ({what})", path.display());
    }
    Ok(())
}

