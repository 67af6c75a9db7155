//! Command-line driver: `sparsetopo <verb> [flags]`.
//!
//! Every verb resolves its flags into a [`RunSpec`], writes it to
//! `<out>/run.json` and then runs it. Passing that file back with
//! `--config` repeats the run; flags given next to `--config` override the
//! matching fields.

pub mod config;
pub mod heatmap;
mod run;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

pub use config::*;
pub use run::{
    available_snapshots, evolve_members, execute, family_chain, member_dir, read_run_json, run_density_sweep, run_distance,
    run_evolve, run_family, run_heatmap, run_init, run_json, run_pairwise, run_perturb, run_retrain, run_train, Context,
};

use crate::data::DatasetKind;
use crate::error::{Error, Result};
use crate::network::WeightInit;
use crate::settrain::{Mode, PruneCriterion, RegrowInit, RetrainMode};

#[derive(Debug, Parser)]
#[command(name = "sparsetopo", version, about = "Sparse topology distance and prune-and-regrow training experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw an Erdős–Rényi topology.
    Init(InitArgs),
    /// Replace a fraction of a topology's connections.
    Perturb(PerturbArgs),
    /// Distance between two topology files.
    Distance(DistanceArgs),
    /// Perturbation chain w0..wN and its pairwise distance matrix.
    Family(FamilyArgs),
    /// Pairwise distance matrix of topology files.
    Pairwise(PairwiseArgs),
    /// Train one network.
    Train(TrainArgs),
    /// Test accuracy across densities, seeds and modes.
    DensitySweep(SweepArgs),
    /// Train several networks and track how their topologies diverge.
    Evolve(EvolveArgs),
    /// Retrain saved snapshots from fresh or learned weights.
    Retrain(RetrainArgs),
    /// Render a distance matrix CSV as a PNG.
    Heatmap(HeatmapArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Erdős–Rényi sparsity parameter.
    #[arg(long, conflicts_with = "density")]
    pub epsilon: Option<f64>,
    /// Connection density of the first layer; later layers follow from the
    /// implied epsilon.
    #[arg(long)]
    pub density: Option<f64>,
    /// Comma-separated layer widths, input first.
    #[arg(long, value_delimiter = ',')]
    pub widths: Option<Vec<usize>>,
    /// fashion-mnist, cifar10 or synthetic.
    #[arg(long, value_parser = parse_dataset)]
    pub dataset: Option<DatasetKind>,
    /// Output directory [default: runs/<verb>].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Preset schedule size [default: desk].
    #[arg(long, value_enum)]
    pub scale: Option<Scale>,
    /// Worker threads for independent jobs [default: all cores].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Never download; data is read only from the cache directory. This is
    /// always the case, the flag exists for scripts that pass it.
    #[arg(long)]
    pub offline: bool,
    /// A `run.json` to start from.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Per-epoch progress on stderr.
    #[arg(short, long)]
    pub verbose: bool,
}

/// Training hyperparameters shared by the training verbs.
#[derive(Debug, Clone, Default, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// dense-glorot or sparse-glorot.
    #[arg(long, value_parser = parse_serde::<WeightInit>)]
    pub weight_init: Option<WeightInit>,
    /// Fraction of connections rewired after each epoch.
    #[arg(long)]
    pub prune_rate: Option<f64>,
    /// magnitude or signed-extremes.
    #[arg(long, value_parser = parse_serde::<PruneCriterion>)]
    pub criterion: Option<PruneCriterion>,
    /// glorot or zero.
    #[arg(long, value_parser = parse_serde::<RegrowInit>)]
    pub regrow_init: Option<RegrowInit>,
    /// Seed of the train/validation split.
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Random crops and flips (image datasets only).
    #[arg(long, conflicts_with = "no_augment")]
    pub augment: bool,
    #[arg(long)]
    pub no_augment: bool,
}

#[derive(Debug, Clone, Args)]
pub struct InitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PerturbArgs {
    pub input: Option<PathBuf>,
    /// Fraction of connections to replace.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DistanceArgs {
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    /// Score only the first N layers.
    #[arg(long)]
    pub layers: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PairwiseArgs {
    /// Topology files, or directories whose `*.topo` files are used in name
    /// order.
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// SET or FIXED.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',')]
    pub densities: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_mode)]
    pub modes: Option<Vec<Mode>>,
    /// Skip the fully connected baseline.
    #[arg(long)]
    pub no_dense: bool,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub members: Option<usize>,
    /// Start from independent seeds instead of a perturbation family.
    #[arg(long, conflicts_with = "fraction")]
    pub independent: bool,
    /// Perturbation fraction between family members.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub snapshot_epochs: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RetrainArgs {
    /// Training output directories; an `evolve` output expands to its
    /// members.
    pub traces: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub snapshot_epochs: Option<Vec<usize>>,
    /// RANDOM_REINIT and/or CONTINUE.
    #[arg(long, value_delimiter = ',', value_parser = parse_retrain_mode)]
    pub modes: Option<Vec<RetrainMode>>,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct HeatmapArgs {
    pub input: Option<PathBuf>,
    /// Pixels per matrix cell.
    #[arg(long)]
    pub cell: Option<u32>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_serde<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    let variants = [s.to_string(), s.to_lowercase(), s.to_lowercase().replace('_', "-")];
    variants
        .iter()
        .find_map(|v| serde_json::from_value(serde_json::Value::String(v.clone())).ok())
        .ok_or_else(|| format!("unknown value `{s}`"))
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    parse_serde(&s.to_uppercase())
}

fn parse_retrain_mode(s: &str) -> std::result::Result<RetrainMode, String> {
    parse_serde(&s.to_uppercase().replace('-', "_"))
}

fn parse_dataset(s: &str) -> std::result::Result<DatasetKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl CommonArgs {
    /// Fail on flags that mean nothing to `verb`.
    fn reject(&self, verb: &str, names: &[&str]) -> Result<()> {
        for &n in names {
            let given = match n {
                "seed" => self.seed.is_some(),
                "epsilon" => self.epsilon.is_some(),
                "density" => self.density.is_some(),
                "widths" => self.widths.is_some(),
                "dataset" => self.dataset.is_some(),
                "scale" => self.scale.is_some(),
                _ => unreachable!("unknown flag {n}"),
            };
            if given {
                return Err(Error::Config(format!("--{n} has no effect on `{verb}`")));
            }
        }
        Ok(())
    }

    /// The config stored in `--config`, if any, checked against `verb`.
    fn base<T: DeserializeOwned>(&self, verb: &str) -> Result<Option<T>> {
        let Some(path) = &self.config else {
            return Ok(None);
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let found = v.get("command").and_then(|c| c.as_str()).unwrap_or("");
        if found != verb {
            return Err(Error::Config(format!(
                "{} describes a `{found}` run, not `{verb}`",
                path.display()
            )));
        }
        let config = v.get("config").cloned().unwrap_or_default();
        serde_json::from_value(config)
            .map(Some)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn scale_against(&self, base: Option<Scale>) -> Result<Scale> {
        match (base, self.scale) {
            (Some(b), Some(s)) if b != s => Err(Error::Config(format!(
                "--scale {s:?} conflicts with the loaded config ({b:?})"
            ))),
            (Some(b), _) => Ok(b),
            (None, s) => Ok(s.unwrap_or_default()),
        }
    }

    fn apply_net(&self, net: &mut NetSpec) {
        if let Some(w) = &self.widths {
            net.widths = w.clone();
        }
        if let Some(d) = self.density {
            net.sparsity = Sparsity::Density(d);
        }
        if let Some(e) = self.epsilon {
            net.sparsity = Sparsity::Epsilon(e);
        }
    }

    /// Dataset for a fresh config: the flag, else inferred from the widths,
    /// else Fashion-MNIST.
    fn dataset(&self) -> DatasetKind {
        if let Some(d) = self.dataset {
            return d;
        }
        let inferred = self.widths.as_ref().and_then(|w| {
            [DatasetKind::FashionMnist, DatasetKind::Cifar10, DatasetKind::Synthetic]
                .into_iter()
                .find(|k| w.first() == Some(&k.feature_dim()))
        });
        inferred.unwrap_or(DatasetKind::FashionMnist)
    }
}

impl TrainFlags {
    fn apply(&self, t: &mut Training, common: &CommonArgs) {
        if let Some(d) = common.dataset {
            t.dataset = d;
        }
        let o = &mut t.optimizer;
        if let Some(v) = self.epochs {
            o.epochs = v;
        }
        if let Some(v) = self.learning_rate {
            o.learning_rate = v;
        }
        if let Some(v) = self.momentum {
            o.momentum = v;
        }
        if let Some(v) = self.weight_decay {
            o.weight_decay = v;
        }
        if let Some(v) = self.batch_size {
            o.batch_size = v;
        }
        if let Some(v) = self.weight_init {
            o.weight_init = v;
        }
        let r = &mut t.rewiring;
        if let Some(v) = self.prune_rate {
            r.prune_rate = v;
        }
        if let Some(v) = self.criterion {
            r.criterion = v;
        }
        if let Some(v) = self.regrow_init {
            r.regrow_init = v;
        }
        if let Some(v) = self.split_seed {
            t.split_seed = v;
        }
        if self.augment {
            t.augment = true;
        }
        if self.no_augment {
            t.augment = false;
        }
    }
}

fn required(p: Option<PathBuf>, base: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    p.or(base).ok_or_else(|| Error::Config(format!("missing {what}")))
}

/// `*.topo` files of a directory in name order; files pass through.
fn expand_topologies(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "topo"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Training output directories; an evolve output expands to its members.
fn expand_traces(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        let members = p.join("members");
        if members.is_dir() && !p.join("snapshots").is_dir() {
            let mut dirs: Vec<(usize, PathBuf)> = std::fs::read_dir(&members)
                .map_err(|e| Error::io(&members, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter_map(|d| {
                    let n = d.file_name()?.to_str()?.strip_prefix('m')?.parse().ok()?;
                    Some((n, d))
                })
                .collect();
            dirs.sort();
            out.extend(dirs.into_iter().map(|(_, d)| d));
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

impl Command {
    pub fn verb(&self) -> &'static str {
        match self {
            Command::Init(_) => "init",
            Command::Perturb(_) => "perturb",
            Command::Distance(_) => "distance",
            Command::Family(_) => "family",
            Command::Pairwise(_) => "pairwise",
            Command::Train(_) => "train",
            Command::DensitySweep(_) => "density-sweep",
            Command::Evolve(_) => "evolve",
            Command::Retrain(_) => "retrain",
            Command::Heatmap(_) => "heatmap",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Init(a) => &a.common,
            Command::Perturb(a) => &a.common,
            Command::Distance(a) => &a.common,
            Command::Family(a) => &a.common,
            Command::Pairwise(a) => &a.common,
            Command::Train(a) => &a.common,
            Command::DensitySweep(a) => &a.common,
            Command::Evolve(a) => &a.common,
            Command::Retrain(a) => &a.common,
            Command::Heatmap(a) => &a.common,
        }
    }

    /// Merge flags over the `--config` file or the scale preset.
    pub fn resolve(&self) -> Result<RunSpec> {
        let verb = self.verb();
        Ok(match self {
            Command::Init(a) => {
                let c = &a.common;
                c.reject(verb, &["dataset"])?;
                let base: Option<InitConfig> = c.base(verb)?;
                let scale = c.scale_against(base.as_ref().map(|b| b.scale))?;
                let mut cfg = base.unwrap_or_else(|| InitConfig {
                    scale,
                    net: preset_net(c.dataset()),
                    seed: 0,
                });
                c.apply_net(&mut cfg.net);
                cfg.seed = c.seed.unwrap_or(cfg.seed);
                RunSpec::Init(cfg)
            }
            Command::Perturb(a) => {
                let c = &a.common;
                c.reject(verb, &["epsilon", "density", "widths", "dataset", "scale"])?;
                let base: Option<PerturbConfig> = c.base(verb)?;
                let input = required(a.input.clone(), base.as_ref().map(|b| b.input.clone()), "input topology")?;
                RunSpec::Perturb(PerturbConfig {
                    input,
                    fraction: a.fraction.or(base.as_ref().map(|b| b.fraction)).unwrap_or(0.01),
                    seed: c.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
                })
            }
            Command::Distance(a) => {
                let c = &a.common;
                c.reject(verb, &["seed", "epsilon", "density", "widths", "dataset", "scale"])?;
                let base: Option<DistanceConfig> = c.base(verb)?;
                RunSpec::Distance(DistanceConfig {
                    a: required(a.a.clone(), base.as_ref().map(|b| b.a.clone()), "first topology")?,
                    b: required(a.b.clone(), base.as_ref().map(|b| b.b.clone()), "second topology")?,
                    layers: a.layers.or(base.and_then(|b| b.layers)),
                })
            }
            Command::Family(a) => {
                let c = &a.common;
                c.reject(verb, &["dataset"])?;
                let base: Option<FamilyConfig> = c.base(verb)?;
                let scale = c.scale_against(base.as_ref().map(|b| b.scale))?;
                let mut cfg = base.unwrap_or_else(|| FamilyConfig {
                    scale,
                    net: preset_net(c.dataset()),
                    seed: 0,
                    generations: 9,
                    fraction: 0.01,
                    layers: None,
                });
                c.apply_net(&mut cfg.net);
                cfg.seed = c.seed.unwrap_or(cfg.seed);
                cfg.generations = a.generations.unwrap_or(cfg.generations);
                cfg.fraction = a.fraction.unwrap_or(cfg.fraction);
                cfg.layers = a.layers.or(cfg.layers);
                RunSpec::Family(cfg)
            }
            Command::Pairwise(a) => {
                let c = &a.common;
                c.reject(verb, &["seed", "epsilon", "density", "widths", "dataset", "scale"])?;
                let base: Option<PairwiseConfig> = c.base(verb)?;
                let inputs = if a.inputs.is_empty() {
                    base.as_ref().map(|b| b.inputs.clone()).unwrap_or_default()
                } else {
                    expand_topologies(&a.inputs)?
                };
                RunSpec::Pairwise(PairwiseConfig {
                    inputs,
                    layers: a.layers.or(base.and_then(|b| b.layers)),
                })
            }
            Command::Train(a) => {
                let c = &a.common;
                let base: Option<TrainCmdConfig> = c.base(verb)?;
                let scale = c.scale_against(base.as_ref().map(|b| b.scale))?;
                let mut cfg = base.unwrap_or_else(|| {
                    let d = c.dataset();
                    TrainCmdConfig {
                        scale,
                        net: preset_net(d),
                        seed: 0,
                        snapshot_every: 10,
                        training: preset_training(scale, d),
                    }
                });
                c.apply_net(&mut cfg.net);
                a.train.apply(&mut cfg.training, c);
                cfg.seed = c.seed.unwrap_or(cfg.seed);
                cfg.snapshot_every = a.snapshot_every.unwrap_or(cfg.snapshot_every);
                if let Some(m) = a.mode {
                    cfg.training.rewiring.mode = m;
                }
                RunSpec::Train(cfg)
            }
            Command::DensitySweep(a) => {
                let c = &a.common;
                c.reject(verb, &["seed", "epsilon", "density"])?;
                let base: Option<SweepConfig> = c.base(verb)?;
                let scale = c.scale_against(base.as_ref().map(|b| b.scale))?;
                let mut cfg = base.unwrap_or_else(|| {
                    let d = c.dataset();
                    SweepConfig {
                        scale,
                        widths: preset_widths(d),
                        densities: preset_densities(scale, d),
                        seeds: preset_seeds(scale),
                        modes: vec![Mode::Fixed, Mode::Set],
                        dense_baseline: true,
                        training: preset_training(scale, d),
                    }
                });
                if let Some(w) = &c.widths {
                    cfg.widths = w.clone();
                }
                a.train.apply(&mut cfg.training, c);
                cfg.densities = a.densities.clone().unwrap_or(cfg.densities);
                cfg.seeds = a.seeds.clone().unwrap_or(cfg.seeds);
                cfg.modes = a.modes.clone().unwrap_or(cfg.modes);
                if a.no_dense {
                    cfg.dense_baseline = false;
                }
                RunSpec::DensitySweep(cfg)
            }
            Command::Evolve(a) => {
                let c = &a.common;
                let base: Option<EvolveConfig> = c.base(verb)?;
                let scale = c.scale_against(base.as_ref().map(|b| b.scale))?;
                let fresh = base.is_none();
                let mut cfg = base.unwrap_or_else(|| {
                    let d = c.dataset();
                    EvolveConfig {
                        scale,
                        net: preset_net(d),
                        seed: 0,
                        members: preset_members(scale),
                        start: Start::Family { fraction: 0.01 },
                        snapshot_epochs: Vec::new(),
                        layers: None,
                        training: preset_training(scale, d),
                    }
                });
                c.apply_net(&mut cfg.net);
                a.train.apply(&mut cfg.training, c);
                cfg.seed = c.seed.unwrap_or(cfg.seed);
                cfg.members = a.members.unwrap_or(cfg.members);
                if a.independent {
                    cfg.start = Start::Seeds;
                } else if let Some(f) = a.fraction {
                    cfg.start = Start::Family { fraction: f };
                }
                if let Some(m) = a.mode {
                    cfg.training.rewiring.mode = m;
                }
                cfg.layers = a.layers.or(cfg.layers);
                if let Some(e) = &a.snapshot_epochs {
                    cfg.snapshot_epochs = e.clone();
                } else if fresh || a.train.epochs.is_some() {
                    let epochs = cfg.training.optimizer.epochs;
                    cfg.snapshot_epochs = preset_snapshot_epochs(scale, cfg.training.dataset, epochs);
                }
                RunSpec::Evolve(cfg)
            }
            Command::Retrain(a) => {
                let c = &a.common;
                c.reject(verb, &["epsilon", "density", "widths"])?;
                let base: Option<RetrainConfig> = c.base(verb)?;
                let scale = c.scale_against(base.as_ref().map(|b| b.scale))?;
                let mut cfg = match base {
                    Some(b) => b,
                    None => {
                        let d = c.dataset.unwrap_or(DatasetKind::FashionMnist);
                        let mut training = preset_training(scale, d);
                        training.optimizer.epochs = preset_retrain_epochs(scale, d);
                        RetrainConfig {
                            scale,
                            traces: Vec::new(),
                            snapshot_epochs: Vec::new(),
                            modes: vec![RetrainMode::RandomReinit, RetrainMode::Continue],
                            seed: 0,
                            training,
                        }
                    }
                };
                if !a.traces.is_empty() {
                    cfg.traces = expand_traces(&a.traces)?;
                }
                a.train.apply(&mut cfg.training, c);
                cfg.seed = c.seed.unwrap_or(cfg.seed);
                cfg.modes = a.modes.clone().unwrap_or(cfg.modes);
                if let Some(e) = &a.snapshot_epochs {
                    cfg.snapshot_epochs = e.clone();
                } else if cfg.snapshot_epochs.is_empty() {
                    if let Some(first) = cfg.traces.first() {
                        cfg.snapshot_epochs = available_snapshots(first)?;
                    }
                }
                RunSpec::Retrain(cfg)
            }
            Command::Heatmap(a) => {
                let c = &a.common;
                c.reject(verb, &["seed", "epsilon", "density", "widths", "dataset", "scale"])?;
                let base: Option<HeatmapConfig> = c.base(verb)?;
                RunSpec::Heatmap(HeatmapConfig {
                    input: required(a.input.clone(), base.as_ref().map(|b| b.input.clone()), "matrix CSV")?,
                    cell: a.cell.or(base.map(|b| b.cell)).unwrap_or(16),
                })
            }
        })
    }
}

pub fn default_out_dir(verb: &str) -> PathBuf {
    Path::new("runs").join(verb)
}

/// Resolve and run a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let spec = cli.command.resolve()?;
    let common = cli.command.common();
    let ctx = Context {
        out: common.out.clone().unwrap_or_else(|| default_out_dir(spec.command())),
        data_dir: crate::data::default_cache_dir(),
        verbose: common.verbose,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute(&spec, &ctx))
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
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
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
