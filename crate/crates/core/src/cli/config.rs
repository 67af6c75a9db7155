//! Declarative experiment configurations. Each command resolves to one of
//! these, and the resolved value is written to `run.json` so the run can be
//! repeated from that file alone.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::data::DatasetKind;
use crate::error::{Error, Result};
use crate::network::{TrainConfig, WeightInit};
use crate::rng::derive_seed;
use crate::settrain::{Mode, PruneCriterion, RegrowInit, RetrainMode, SetConfig};
use crate::topology::{er_init, ErConfig, NetworkTopology, TopologyMeta};

/// Preset schedule size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Reduced schedules that finish on a laptop.
    #[default]
    Desk,
    /// Full published schedules.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sparsity {
    /// Fraction of possible connections in the first layer.
    Density(f64),
    Epsilon(f64),
}

/// Architecture plus Erdős–Rényi sparsity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub widths: Vec<usize>,
    pub sparsity: Sparsity,
}

impl NetSpec {
    pub fn er_config(&self, seed: u64) -> Result<ErConfig> {
        if self.widths.len() < 2 {
            return Err(Error::Config(format!("need at least two widths, got {:?}", self.widths)));
        }
        match self.sparsity {
            Sparsity::Density(d) => ErConfig::for_density(d, self.widths[0], self.widths[1], seed),
            Sparsity::Epsilon(e) => ErConfig::new(e, seed),
        }
    }

    pub fn build(&self, seed: u64) -> Result<(NetworkTopology, TopologyMeta)> {
        let cfg = self.er_config(seed)?;
        let t = er_init(&self.widths, &cfg)?;
        Ok((
            t,
            TopologyMeta {
                epsilon: Some(cfg.epsilon),
                seed: Some(seed),
            },
        ))
    }
}

/// Optimizer and schedule. Seeds are derived from the run's seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub weight_init: WeightInit,
}

impl Optimizer {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed,
            weight_init: self.weight_init,
        }
    }
}

/// Connectivity updates between epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rewiring {
    pub mode: Mode,
    pub prune_rate: f64,
    pub criterion: PruneCriterion,
    pub regrow_init: RegrowInit,
}

impl Rewiring {
    pub fn set_config(&self, mode: Mode, snapshot_every: usize) -> SetConfig {
        SetConfig {
            prune_rate: self.prune_rate,
            snapshot_every,
            mode,
            criterion: self.criterion,
            regrow_init: self.regrow_init,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Training {
    pub dataset: DatasetKind,
    /// Seed of the train/validation split.
    pub split_seed: u64,
    pub augment: bool,
    pub optimizer: Optimizer,
    pub rewiring: Rewiring,
}

/// Stream used to draw initial weights from a run seed.
pub const WEIGHTS_STREAM: u64 = 0x5745_4947;
/// Stream used for shuffling, rewiring and augmentation from a run seed.
pub const TRAIN_STREAM: u64 = 0x5452_4149;

pub fn weights_seed(seed: u64) -> u64 {
    derive_seed(seed, WEIGHTS_STREAM)
}

pub fn train_seed(seed: u64) -> u64 {
    derive_seed(seed, TRAIN_STREAM)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    pub scale: Scale,
    pub net: NetSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbConfig {
    pub input: PathBuf,
    pub fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceConfig {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Score only this many leading layers.
    pub layers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub scale: Scale,
    pub net: NetSpec,
    pub seed: u64,
    /// Networks derived from the root; the family has `generations + 1`
    /// members.
    pub generations: usize,
    pub fraction: f64,
    pub layers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseConfig {
    pub inputs: Vec<PathBuf>,
    pub layers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainCmdConfig {
    pub scale: Scale,
    pub net: NetSpec,
    pub seed: u64,
    pub snapshot_every: usize,
    pub training: Training,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub scale: Scale,
    pub widths: Vec<usize>,
    pub densities: Vec<f64>,
    pub seeds: Vec<u64>,
    pub modes: Vec<Mode>,
    /// Also train the fully connected network once per seed.
    pub dense_baseline: bool,
    pub training: Training,
}

/// How the members of an evolution experiment start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    /// A perturbation chain from one root; all members share weight and
    /// training seeds, so they differ only in topology.
    Family { fraction: f64 },
    /// Independent roots; member `i` uses `derive_seed(seed, i)` for
    /// everything.
    Seeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub scale: Scale,
    pub net: NetSpec,
    pub seed: u64,
    pub members: usize,
    pub start: Start,
    /// Epochs at which members are compared; 0 is always included.
    pub snapshot_epochs: Vec<usize>,
    pub layers: Option<usize>,
    pub training: Training,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrainConfig {
    pub scale: Scale,
    /// Training output directories holding `snapshots/`.
    pub traces: Vec<PathBuf>,
    pub snapshot_epochs: Vec<usize>,
    pub modes: Vec<RetrainMode>,
    pub seed: u64,
    pub training: Training,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapConfig {
    pub input: PathBuf,
    /// Pixels per matrix cell.
    pub cell: u32,
}

/// Everything a run needs, tagged by command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum RunSpec {
    Init(InitConfig),
    Perturb(PerturbConfig),
    Distance(DistanceConfig),
    Family(FamilyConfig),
    Pairwise(PairwiseConfig),
    Train(TrainCmdConfig),
    DensitySweep(SweepConfig),
    Evolve(EvolveConfig),
    Retrain(RetrainConfig),
    Heatmap(HeatmapConfig),
}

impl RunSpec {
    pub fn command(&self) -> &'static str {
        match self {
            RunSpec::Init(_) => "init",
            RunSpec::Perturb(_) => "perturb",
            RunSpec::Distance(_) => "distance",
            RunSpec::Family(_) => "family",
            RunSpec::Pairwise(_) => "pairwise",
            RunSpec::Train(_) => "train",
            RunSpec::DensitySweep(_) => "density-sweep",
            RunSpec::Evolve(_) => "evolve",
            RunSpec::Retrain(_) => "retrain",
            RunSpec::Heatmap(_) => "heatmap",
        }
    }
}

// ---- presets ----

pub fn preset_widths(dataset: DatasetKind) -> Vec<usize> {
    match dataset {
        DatasetKind::FashionMnist => vec![784, 784, 784, 784, 10],
        DatasetKind::Cifar10 => vec![3072, 1000, 1000, 10],
        DatasetKind::Synthetic => vec![crate::data::SYNTHETIC_DIM, 64, 64, crate::data::SYNTHETIC_CLASSES],
    }
}

pub fn preset_density(dataset: DatasetKind) -> f64 {
    match dataset {
        DatasetKind::FashionMnist => 0.006,
        DatasetKind::Cifar10 => 0.007,
        DatasetKind::Synthetic => 0.1,
    }
}

pub fn preset_net(dataset: DatasetKind) -> NetSpec {
    NetSpec {
        widths: preset_widths(dataset),
        sparsity: Sparsity::Density(preset_density(dataset)),
    }
}

pub fn preset_epochs(scale: Scale, dataset: DatasetKind) -> usize {
    match (scale, dataset) {
        (Scale::Paper, DatasetKind::FashionMnist) => 200,
        (Scale::Paper, DatasetKind::Cifar10) => 900,
        (Scale::Desk, DatasetKind::FashionMnist | DatasetKind::Cifar10) => 30,
        (_, DatasetKind::Synthetic) => 10,
    }
}

pub fn preset_training(scale: Scale, dataset: DatasetKind) -> Training {
    let d = TrainConfig::default();
    let set = SetConfig::default();
    Training {
        dataset,
        split_seed: 0,
        augment: dataset == DatasetKind::Cifar10,
        optimizer: Optimizer {
            learning_rate: d.learning_rate,
            momentum: d.momentum,
            weight_decay: d.weight_decay,
            batch_size: d.batch_size,
            epochs: preset_epochs(scale, dataset),
            weight_init: d.weight_init,
        },
        rewiring: Rewiring {
            mode: set.mode,
            prune_rate: set.prune_rate,
            criterion: set.criterion,
            regrow_init: set.regrow_init,
        },
    }
}

pub fn preset_densities(scale: Scale, dataset: DatasetKind) -> Vec<f64> {
    match (scale, dataset) {
        (Scale::Paper, DatasetKind::FashionMnist) => {
            vec![0.001, 0.006, 0.01, 0.02, 0.03, 0.05, 0.06, 0.1, 0.2, 0.3, 0.4, 0.5]
        }
        (Scale::Paper, DatasetKind::Cifar10) => vec![0.001, 0.007, 0.05, 0.08, 0.1, 0.2, 0.3, 0.4, 0.5],
        (Scale::Desk, DatasetKind::FashionMnist | DatasetKind::Cifar10) => vec![0.006, 0.05, 0.2],
        (_, DatasetKind::Synthetic) => vec![0.05, 0.2],
    }
}

pub fn preset_seeds(scale: Scale) -> Vec<u64> {
    match scale {
        Scale::Paper => (0..8).collect(),
        Scale::Desk => (0..3).collect(),
    }
}

pub fn preset_members(scale: Scale) -> usize {
    match scale {
        Scale::Paper => 10,
        Scale::Desk => 4,
    }
}

/// Comparison epochs for an evolution run of `epochs` epochs.
pub fn preset_snapshot_epochs(scale: Scale, dataset: DatasetKind, epochs: usize) -> Vec<usize> {
    let mut v = match (scale, dataset) {
        (Scale::Paper, DatasetKind::FashionMnist) => vec![0, 10, 30, 50, 100, 190],
        (Scale::Paper, DatasetKind::Cifar10) => (0..=epochs).step_by(100).collect(),
        _ => (0..=epochs).step_by((epochs / 6).max(1)).collect(),
    };
    v.retain(|&e| e <= epochs);
    if v.last() != Some(&epochs) {
        v.push(epochs);
    }
    v
}

pub fn preset_retrain_epochs(scale: Scale, dataset: DatasetKind) -> usize {
    match (scale, dataset) {
        (Scale::Paper, DatasetKind::FashionMnist) => 200,
        (Scale::Paper, DatasetKind::Cifar10) => 1000,
        (Scale::Desk, DatasetKind::FashionMnist | DatasetKind::Cifar10) => 30,
        (_, DatasetKind::Synthetic) => 5,
    }
}

/// Greatest common divisor of the non-zero epochs, 0 if there are none.
pub(crate) fn snapshot_stride(epochs: &[usize]) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    epochs.iter().fold(0, |g, &e| gcd(g, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stride_covers_requested_epochs() {
        assert_eq!(snapshot_stride(&[0, 10, 30, 100, 190]), 10);
        assert_eq!(snapshot_stride(&[0, 6, 9]), 3);
        assert_eq!(snapshot_stride(&[0]), 0);
    }

    #[test]
    fn desk_snapshots_end_at_final_epoch() {
        assert_eq!(
            preset_snapshot_epochs(Scale::Desk, DatasetKind::FashionMnist, 30),
            vec![0, 5, 10, 15, 20, 25, 30]
        );
        assert_eq!(preset_snapshot_epochs(Scale::Desk, DatasetKind::Synthetic, 4), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn run_spec_json_roundtrips() {
        let spec = RunSpec::Family(FamilyConfig {
            scale: Scale::Desk,
            net: preset_net(DatasetKind::FashionMnist),
            seed: 3,
            generations: 9,
            fraction: 0.01,
            layers: None,
        });
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.starts_with(r#"{"command":"family","config":"#));
        assert_eq!(serde_json::from_str::<RunSpec>(&text).unwrap(), spec);
    }
}
