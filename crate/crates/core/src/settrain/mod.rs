//! Training with fixed or evolving sparse connectivity.
//!
//! In [`Mode::Set`] every epoch ends with [`rewire`]: per layer the
//! `floor(zeta * edges)` weakest connections are removed and the same number
//! are grown at random empty positions, so the edge count of every layer is
//! constant for the whole run. [`Mode::Fixed`] trains the initial topology
//! unchanged.

mod rewire;
mod trace;

use std::path::PathBuf;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use rewire::{prune_and_regrow, prune_count, rewire, LayerRewiring, Rewiring};
pub use trace::{read_metrics_csv, snapshot_paths, write_metrics_csv, EpochMetrics, EvolutionTrace, Snapshot};

use crate::data::{augment, Dataset, Split};
use crate::error::{Error, Result};
use crate::network::{init_weights_with, ForwardPass, Matrix, Nesterov, SparseNet, TrainConfig, Workspace};
use crate::rng::{derive_seed, rng};
use crate::topology::{NetworkTopology, TopologyMeta};

const SHUFFLE_STREAM: u64 = 1;
const REWIRE_STREAM: u64 = 2;
const AUGMENT_STREAM: u64 = 3;
const REINIT_STREAM: u64 = 4;
const EVAL_CHUNK: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Set,
    Fixed,
}

/// Which connections count as weakest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneCriterion {
    /// Smallest `|w|`.
    Magnitude,
    /// Half from the positive weights closest to zero, half from the
    /// negative weights closest to zero.
    SignedExtremes,
}

/// Initial value of regrown connections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegrowInit {
    /// Uniform with the dense-width Glorot bound.
    Glorot,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetConfig {
    pub prune_rate: f64,
    /// Save a snapshot every this many epochs (0: only the first and last).
    pub snapshot_every: usize,
    pub mode: Mode,
    pub criterion: PruneCriterion,
    pub regrow_init: RegrowInit,
}

impl Default for SetConfig {
    fn default() -> Self {
        Self {
            prune_rate: 0.2,
            snapshot_every: 10,
            mode: Mode::Set,
            criterion: PruneCriterion::Magnitude,
            regrow_init: RegrowInit::Glorot,
        }
    }
}

impl SetConfig {
    pub fn fixed() -> Self {
        Self {
            mode: Mode::Fixed,
            ..Self::default()
        }
    }

    /// `prune_rate` must lie in `[0, 1)`; zero turns rewiring into a no-op.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.prune_rate) {
            return Err(Error::Config(format!("prune rate must be in [0, 1), got {}", self.prune_rate)));
        }
        Ok(())
    }
}

/// Extra knobs that do not change the optimisation problem.
#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Directory for `metrics.csv` and `snapshots/`; nothing is written when
    /// unset.
    pub out_dir: Option<PathBuf>,
    /// Random flips and crops on image datasets.
    pub augment: bool,
    /// One progress line per epoch on stderr.
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

/// Mean cross-entropy and accuracy over a whole split.
pub fn evaluate(net: &SparseNet, split: &Split) -> Result<Evaluation> {
    if split.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty split".into()));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    let all: Vec<usize> = (0..split.len()).collect();
    let (mut x, mut y) = (Matrix::default(), Vec::new());
    let mut pass = ForwardPass::default();
    for idx in all.chunks(EVAL_CHUNK) {
        split.batch_into(idx, &mut x, &mut y);
        net.forward_into(&x, &mut pass)?;
        loss += crate::network::cross_entropy(pass.logits(), &y)? * idx.len() as f64;
        correct += crate::network::argmax_rows(pass.logits())
            .iter()
            .zip(&y)
            .filter(|(p, t)| p == t)
            .count();
    }
    Ok(Evaluation {
        loss: loss / split.len() as f64,
        accuracy: correct as f64 / split.len() as f64,
    })
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Network after the last epoch.
    pub last: SparseNet,
    /// Network with the highest validation accuracy (earliest on ties).
    pub best: SparseNet,
    pub trace: EvolutionTrace,
    /// Test accuracy of `best`.
    pub test: Evaluation,
}

fn check_fit(net: &SparseNet, data: &Dataset) -> Result<()> {
    if net.input_width() != data.feature_dim() || net.output_width() != data.num_classes {
        return Err(Error::Dimension(format!(
            "network maps {} -> {}, dataset has {} features and {} classes",
            net.input_width(),
            net.output_width(),
            data.feature_dim(),
            data.num_classes
        )));
    }
    Ok(())
}

/// Mini-batch Nesterov SGD for `cfg.epochs` epochs, rewiring after every
/// epoch in SET mode. Validation runs after rewiring; the reported test
/// accuracy belongs to the epoch with the best validation accuracy.
///
/// Layers without any empty position cannot change and are left alone.
pub fn train(net: SparseNet, data: &Dataset, cfg: &TrainConfig, set: &SetConfig, opts: &TrainOptions) -> Result<TrainOutcome> {
    cfg.validate()?;
    set.validate()?;
    check_fit(&net, data)?;
    if data.train.is_empty() || data.validation.is_empty() || data.test.is_empty() {
        return Err(Error::Data(format!("{}: every partition must be non-empty", data.name)));
    }
    if opts.augment && data.image_shape.is_none() {
        return Err(Error::Config(format!("{} has no image shape to augment", data.name)));
    }

    let edge_counts = net.topology().layer_edge_counts();
    let mut trace = EvolutionTrace::default();
    let mut shuffle_rng = rng(derive_seed(cfg.seed, SHUFFLE_STREAM));
    let mut rewire_rng = rng(derive_seed(cfg.seed, REWIRE_STREAM));
    let augment_seed = derive_seed(cfg.seed, AUGMENT_STREAM);
    let mut opt = Nesterov::new(net.params(), cfg);
    let mut net = net;

    let snapshot = |trace: &mut EvolutionTrace, epoch: usize, net: &SparseNet| -> Result<()> {
        let mut snap = Snapshot {
            epoch,
            topology: net.topology().clone(),
            files: None,
        };
        if let Some(dir) = &opts.out_dir {
            let (topo, params) = snapshot_paths(dir, epoch);
            let meta = TopologyMeta {
                epsilon: None,
                seed: Some(cfg.seed),
            };
            crate::network::save_checkpoint(&topo, &params, net, &meta)?;
            snap.files = Some((topo, params));
        }
        trace.snapshots.push(snap);
        Ok(())
    };
    snapshot(&mut trace, 0, &net)?;

    let mut best: Option<(SparseNet, f64)> = None;
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut step = 0u64;
    let mut ws = Workspace::new();
    let (mut x, mut y) = (Matrix::default(), Vec::new());
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            data.train.batch_into(idx, &mut x, &mut y);
            if opts.augment {
                let shape = data.image_shape.expect("checked above");
                x = augment(&x, shape, derive_seed(augment_seed, step))?;
            }
            let loss = net.loss_and_gradients_into(&x, &y, &mut ws)?;
            if !loss.is_finite() {
                return Err(Error::Training(format!("non-finite loss at epoch {epoch}")));
            }
            loss_sum += loss * idx.len() as f64;
            opt.step(net.params_mut(), ws.grads())?;
            step += 1;
        }

        if set.mode == Mode::Set {
            let (next, rewiring) = rewire::rewire_impl(&net, set, &mut rewire_rng, true)?;
            *opt.velocity_mut() = rewiring.carry(opt.velocity(), |_| 0.0)?;
            net = next;
            if net.topology().layer_edge_counts() != edge_counts {
                return Err(Error::Training(format!("edge counts changed at epoch {epoch}")));
            }
        }

        let val = evaluate(&net, &data.validation)?;
        let m = EpochMetrics {
            epoch,
            train_loss: loss_sum / data.train.len() as f64,
            val_loss: val.loss,
            val_acc: val.accuracy,
        };
        if opts.verbose {
            eprintln!(
                "epoch {epoch:>4}  train_loss {:.4}  val_loss {:.4}  val_acc {:.4}",
                m.train_loss, m.val_loss, m.val_acc
            );
        }
        trace.metrics.push(m);
        if best.as_ref().is_none_or(|(_, acc)| val.accuracy > *acc) {
            best = Some((net.clone(), val.accuracy));
            trace.best_epoch = epoch;
        }
        let periodic = set.snapshot_every > 0 && epoch % set.snapshot_every == 0;
        if periodic || epoch == cfg.epochs {
            snapshot(&mut trace, epoch, &net)?;
        }
        if let Some(dir) = &opts.out_dir {
            write_metrics_csv(dir.join("metrics.csv"), &trace.metrics)?;
        }
    }

    let best = best.map_or_else(|| net.clone(), |(b, _)| b);
    let test = evaluate(&best, &data.test)?;
    trace.test_accuracy = Some(test.accuracy);
    Ok(TrainOutcome {
        last: net,
        best,
        trace,
        test,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RetrainMode {
    /// Fresh weights on the snapshot topology.
    RandomReinit,
    /// Keep the snapshot's weights.
    Continue,
}

/// Train a snapshot further with its topology frozen.
///
/// `RandomReinit` draws new weights from a stream of `cfg.seed` with scheme
/// `cfg.weight_init`; `Continue` starts
/// from the stored weights with a fresh optimizer state.
pub fn retrain(snapshot: &SparseNet, mode: RetrainMode, data: &Dataset, cfg: &TrainConfig, opts: &TrainOptions) -> Result<TrainOutcome> {
    check_fit(snapshot, data)?;
    let start = match mode {
        RetrainMode::RandomReinit => {
            init_weights_with(snapshot.topology(), derive_seed(cfg.seed, REINIT_STREAM), cfg.weight_init)
        }
        RetrainMode::Continue => snapshot.clone(),
    };
    let set = SetConfig {
        snapshot_every: 0,
        ..SetConfig::fixed()
    };
    train(start, data, cfg, &set, opts)
}

/// Whether every snapshot shares the layer widths of the first and epochs
/// strictly increase.
pub fn trace_is_consistent(snapshots: &[Snapshot]) -> bool {
    let widths = snapshots.first().map(|s| s.topology.widths().to_vec());
    snapshots.windows(2).all(|w| w[0].epoch < w[1].epoch)
        && snapshots
            .iter()
            .all(|s| Some(s.topology.widths()) == widths.as_deref())
}

/// Topologies of a trace in snapshot order.
pub fn snapshot_topologies(trace: &EvolutionTrace) -> Vec<&NetworkTopology> {
    trace.snapshots.iter().map(|s| &s.topology).collect()
}
