use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};
use crate::topology::NetworkTopology;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub epoch: usize,
    pub topology: NetworkTopology,
    /// Topology and parameter files when the run writes to disk.
    pub files: Option<(PathBuf, PathBuf)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolutionTrace {
    pub snapshots: Vec<Snapshot>,
    pub metrics: Vec<EpochMetrics>,
    pub best_epoch: usize,
    pub test_accuracy: Option<f64>,
}

impl EvolutionTrace {
    pub fn snapshot_epochs(&self) -> Vec<usize> {
        self.snapshots.iter().map(|s| s.epoch).collect()
    }

    pub fn snapshot(&self, epoch: usize) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.epoch == epoch)
    }
}

/// `snapshots/epoch_<e>.topo` and `snapshots/epoch_<e>.ckpt` under `dir`.
pub fn snapshot_paths(dir: &Path, epoch: usize) -> (PathBuf, PathBuf) {
    let base = dir.join("snapshots");
    (
        base.join(format!("epoch_{epoch}.topo")),
        base.join(format!("epoch_{epoch}.ckpt")),
    )
}

pub fn write_metrics_csv(path: impl AsRef<Path>, metrics: &[EpochMetrics]) -> Result<()> {
    let mut out = String::from("epoch,train_loss,val_loss,val_acc\n");
    for m in metrics {
        out.push_str(&format!("{},{:.6},{:.6},{:.6}\n", m.epoch, m.train_loss, m.val_loss, m.val_acc));
    }
    crate::fsutil::write_bytes_atomic(path.as_ref(), out.as_bytes())
}

pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<EpochMetrics>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    })?;
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| {
                ParseError::Malformed {
                    line: i + 2,
                    message: e.to_string(),
                }
                .into()
            })
        })
        .collect()
}
