//! Benchmark datasets: loading, checksum verification, standardization and
//! the seeded train/validation split.
//!
//! Archives are read from a cache directory, by default `data/` or the
//! directory named by `SPARSETOPO_DATA`:
//!
//! ```text
//! <cache>/fashion-mnist/{train,t10k}-{images-idx3,labels-idx1}-ubyte.gz
//! <cache>/fashion-mnist/SHA256SUMS
//! <cache>/cifar-10-batches-bin/{data_batch_1..5,test_batch}.bin
//! <cache>/cifar-10-batches-bin/SHA256SUMS
//! ```
//!
//! `SHA256SUMS` uses the `sha256sum` output format. Nothing is downloaded;
//! archives must be placed in the cache beforehand.

mod augment;
mod idx;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use augment::{augment, crop_and_flip, ImageShape, PAD};
pub use idx::{parse_images, parse_labels, read_maybe_gz, IdxImages, IMAGES_MAGIC, LABELS_MAGIC};

use crate::error::{Error, ParseError, Result};
use crate::network::Matrix;
use crate::rng::rng;

pub const DATA_ENV: &str = "SPARSETOPO_DATA";
pub const VALIDATION_FRACTION: f64 = 0.2;
pub const CIFAR_RECORD: usize = 1 + 3072;
pub const CIFAR_BATCH_RECORDS: usize = 10_000;

/// Cache directory: `$SPARSETOPO_DATA` if set, otherwise `data`.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(DATA_ENV).map_or_else(|| PathBuf::from("data"), PathBuf::from)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    FashionMnist,
    Cifar10,
    /// Small generated problem for smoke tests: see [`synthetic`].
    Synthetic,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::FashionMnist => "fashion-mnist",
            DatasetKind::Cifar10 => "cifar10",
            DatasetKind::Synthetic => "synthetic",
        }
    }

    pub fn feature_dim(self) -> usize {
        match self {
            DatasetKind::FashionMnist => 784,
            DatasetKind::Cifar10 => 3072,
            DatasetKind::Synthetic => SYNTHETIC_DIM,
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            DatasetKind::Synthetic => SYNTHETIC_CLASSES,
            _ => 10,
        }
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fashion-mnist" | "fashion_mnist" | "fmnist" => Ok(DatasetKind::FashionMnist),
            "cifar10" | "cifar-10" => Ok(DatasetKind::Cifar10),
            "synthetic" => Ok(DatasetKind::Synthetic),
            _ => Err(Error::Config(format!("unknown dataset `{s}`"))),
        }
    }
}

/// How features are standardized; statistics always come from the training
/// partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Pixels scaled to `[0, 1]` only.
    None,
    PerFeature,
    /// One mean/std per channel of a channel-major image.
    PerChannel { channels: usize },
}

/// Row-major features with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    dim: usize,
    features: Vec<f32>,
    labels: Vec<u8>,
}

impl Split {
    pub fn new(dim: usize, features: Vec<f32>, labels: Vec<u8>) -> Result<Self> {
        if dim == 0 || features.len() != dim * labels.len() {
            return Err(Error::Dimension(format!(
                "{} feature values for {} samples of width {dim}",
                features.len(),
                labels.len()
            )));
        }
        Ok(Self { dim, features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Rows `indices` as a matrix plus their labels.
    pub fn batch(&self, indices: &[usize]) -> (Matrix, Vec<usize>) {
        let mut m = Matrix::default();
        let mut labels = Vec::new();
        self.batch_into(indices, &mut m, &mut labels);
        (m, labels)
    }

    /// [`Split::batch`] into existing buffers.
    pub fn batch_into(&self, indices: &[usize], m: &mut Matrix, labels: &mut Vec<usize>) {
        m.reshape(indices.len(), self.dim);
        for (r, &i) in indices.iter().enumerate() {
            for (d, &s) in m.row_mut(r).iter_mut().zip(self.features(i)) {
                *d = s as f64;
            }
        }
        labels.clear();
        labels.extend(indices.iter().map(|&i| self.label(i)));
    }

    fn select(&self, indices: &[usize]) -> Split {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.features(i));
        }
        Split {
            dim: self.dim,
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Per-column mean and standard deviation (population form) over
    /// `groups` of columns: group `g` covers columns `g * dim / groups ..`.
    fn group_stats(&self, groups: usize) -> (Vec<f64>, Vec<f64>) {
        let width = self.dim / groups;
        let mut sum = vec![0.0; groups];
        let mut sq = vec![0.0; groups];
        for row in self.features.chunks_exact(self.dim) {
            for (c, &v) in row.iter().enumerate() {
                let g = c / width;
                sum[g] += v as f64;
                sq[g] += v as f64 * v as f64;
            }
        }
        let n = (self.len() * width) as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| (q / n - m * m).max(0.0).sqrt())
            .collect();
        (mean, std)
    }

    fn standardize_with(&mut self, mean: &[f64], std: &[f64]) {
        let width = self.dim / mean.len();
        for row in self.features.chunks_exact_mut(self.dim) {
            for (c, v) in row.iter_mut().enumerate() {
                let g = c / width;
                let s = if std[g] > 0.0 { std[g] } else { 1.0 };
                *v = ((*v as f64 - mean[g]) / s) as f32;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub train: Split,
    pub validation: Split,
    pub test: Split,
    pub num_classes: usize,
    /// Set for image datasets that support augmentation.
    pub image_shape: Option<ImageShape>,
    pub normalization: Normalization,
}

impl Dataset {
    pub fn feature_dim(&self) -> usize {
        self.train.dim()
    }

    pub fn total_len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    /// Split `train` into training and validation partitions with a seeded
    /// shuffle, then standardize all three partitions with training
    /// statistics.
    pub fn from_raw(
        name: &str,
        train: Split,
        test: Split,
        num_classes: usize,
        split_seed: u64,
        normalization: Normalization,
        image_shape: Option<ImageShape>,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Data(format!("{name}: empty training set")));
        }
        if train.dim() != test.dim() {
            return Err(Error::Dimension(format!(
                "{name}: train width {} differs from test width {}",
                train.dim(),
                test.dim()
            )));
        }
        let check = |s: &Split| s.labels.iter().all(|&l| (l as usize) < num_classes);
        if !check(&train) || !check(&test) {
            return Err(Error::Data(format!("{name}: label outside 0..{num_classes}")));
        }
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut rng(split_seed));
        let n_val = (train.len() as f64 * VALIDATION_FRACTION).round() as usize;
        let (val_idx, train_idx) = order.split_at(n_val);
        let mut tr = train.select(train_idx);
        let mut val = train.select(val_idx);
        let mut test = test;
        let groups = match normalization {
            Normalization::None => None,
            Normalization::PerFeature => Some(tr.dim()),
            Normalization::PerChannel { channels } => {
                if channels == 0 || !tr.dim().is_multiple_of(channels) {
                    return Err(Error::Dimension(format!("{} features do not split into {channels} channels", tr.dim())));
                }
                Some(channels)
            }
        };
        if let Some(groups) = groups {
            let (mean, std) = tr.group_stats(groups);
            for s in [&mut tr, &mut val, &mut test] {
                s.standardize_with(&mean, &std);
            }
        }
        Ok(Self {
            name: name.to_string(),
            train: tr,
            validation: val,
            test,
            num_classes,
            image_shape,
            normalization,
        })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Check `files` in `dir` against the `SHA256SUMS` manifest next to them.
pub fn verify_checksums(dir: &Path, files: &[&str]) -> Result<()> {
    let manifest_path = dir.join("SHA256SUMS");
    if !manifest_path.exists() {
        return Err(Error::Data(format!(
            "no dataset at {}: place the archives and a SHA256SUMS file there, or point {DATA_ENV} at the cache",
            dir.display()
        )));
    }
    let manifest = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut sums = HashMap::new();
    for (i, line) in manifest.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next()) {
            (Some(sum), Some(name)) => {
                sums.insert(name.trim_start_matches('*').to_string(), sum.to_lowercase());
            }
            _ => {
                return Err(ParseError::Malformed {
                    line: i + 1,
                    message: format!("bad checksum line in {}", manifest_path.display()),
                }
                .into())
            }
        }
    }
    for &f in files {
        let expected = sums
            .get(f)
            .ok_or_else(|| Error::Data(format!("{} lists no checksum for {f}", manifest_path.display())))?;
        let path = dir.join(f);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if hex(&Sha256::digest(&bytes)) != *expected {
            return Err(ParseError::Checksum {
                file: path.display().to_string(),
            }
            .into());
        }
    }
    Ok(())
}

const FASHION_FILES: [&str; 4] = [
    "train-images-idx3-ubyte.gz",
    "train-labels-idx1-ubyte.gz",
    "t10k-images-idx3-ubyte.gz",
    "t10k-labels-idx1-ubyte.gz",
];

fn scaled(pixels: &[u8]) -> Vec<f32> {
    pixels.iter().map(|&p| p as f32 / 255.0).collect()
}

fn idx_split(dir: &Path, images: &str, labels: &str) -> Result<Split> {
    let img = parse_images(&read_maybe_gz(&dir.join(images))?)?;
    let lab = parse_labels(&read_maybe_gz(&dir.join(labels))?)?;
    if img.count != lab.len() {
        return Err(ParseError::WidthMismatch(format!("{} images but {} labels", img.count, lab.len())).into());
    }
    if img.rows * img.cols != 784 {
        return Err(ParseError::WidthMismatch(format!("{}x{} images, expected 28x28", img.rows, img.cols)).into());
    }
    Split::new(784, scaled(&img.pixels), lab)
}

/// Fashion-MNIST from `<cache>/fashion-mnist`: pixels scaled to `[0, 1]`, a
/// seeded 80/20 train/validation split, per-feature standardization.
pub fn load_fashion_mnist(cache_dir: &Path, split_seed: u64) -> Result<Dataset> {
    let dir = cache_dir.join("fashion-mnist");
    verify_checksums(&dir, &FASHION_FILES)?;
    let train = idx_split(&dir, FASHION_FILES[0], FASHION_FILES[1])?;
    let test = idx_split(&dir, FASHION_FILES[2], FASHION_FILES[3])?;
    Dataset::from_raw("fashion-mnist", train, test, 10, split_seed, Normalization::PerFeature, None)
}

/// Records of the CIFAR-10 binary format: one label byte, then 3072
/// channel-major pixel bytes.
pub fn parse_cifar_batch(bytes: &[u8]) -> Result<(Vec<f32>, Vec<u8>)> {
    if !bytes.len().is_multiple_of(CIFAR_RECORD) {
        return Err(ParseError::Truncated(format!(
            "{} bytes is not a whole number of {CIFAR_RECORD}-byte records",
            bytes.len()
        ))
        .into());
    }
    let mut features = Vec::with_capacity(bytes.len() / CIFAR_RECORD * 3072);
    let mut labels = Vec::with_capacity(bytes.len() / CIFAR_RECORD);
    for rec in bytes.chunks_exact(CIFAR_RECORD) {
        if rec[0] > 9 {
            return Err(Error::Data(format!("CIFAR-10 label {} outside 0..10", rec[0])));
        }
        labels.push(rec[0]);
        features.extend(rec[1..].iter().map(|&p| p as f32 / 255.0));
    }
    Ok((features, labels))
}

fn cifar_file(dir: &Path, name: &str, records: Option<usize>) -> Result<(Vec<f32>, Vec<u8>)> {
    let path = dir.join(name);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let parsed = parse_cifar_batch(&bytes)?;
    if let Some(n) = records.filter(|&n| n != parsed.1.len()) {
        return Err(ParseError::Truncated(format!("{name}: {} records, expected {n}", parsed.1.len())).into());
    }
    Ok(parsed)
}

/// CIFAR-10 from `<cache>/cifar-10-batches-bin`: five training batches and
/// one test batch, seeded 80/20 split, per-channel standardization.
pub fn load_cifar10(cache_dir: &Path, split_seed: u64) -> Result<Dataset> {
    load_cifar10_sized(cache_dir, split_seed, Some(CIFAR_BATCH_RECORDS))
}

pub(crate) fn load_cifar10_sized(cache_dir: &Path, split_seed: u64, records: Option<usize>) -> Result<Dataset> {
    let dir = cache_dir.join("cifar-10-batches-bin");
    let train_files: Vec<String> = (1..=5).map(|i| format!("data_batch_{i}.bin")).collect();
    let mut names: Vec<&str> = train_files.iter().map(String::as_str).collect();
    names.push("test_batch.bin");
    verify_checksums(&dir, &names)?;
    let (mut features, mut labels) = (Vec::new(), Vec::new());
    for name in &train_files {
        let (f, l) = cifar_file(&dir, name, records)?;
        features.extend(f);
        labels.extend(l);
    }
    let train = Split::new(3072, features, labels)?;
    let (tf, tl) = cifar_file(&dir, "test_batch.bin", records)?;
    let test = Split::new(3072, tf, tl)?;
    Dataset::from_raw(
        "cifar10",
        train,
        test,
        10,
        split_seed,
        Normalization::PerChannel { channels: 3 },
        Some(ImageShape::CIFAR),
    )
}

pub const SYNTHETIC_DIM: usize = 64;
pub const SYNTHETIC_CLASSES: usize = 4;

/// Load a dataset by kind. The synthetic problem ignores the cache and is
/// generated from `split_seed`.
pub fn load(kind: DatasetKind, cache_dir: &Path, split_seed: u64) -> Result<Dataset> {
    match kind {
        DatasetKind::FashionMnist => load_fashion_mnist(cache_dir, split_seed),
        DatasetKind::Cifar10 => load_cifar10(cache_dir, split_seed),
        DatasetKind::Synthetic => synthetic(2000, 500, SYNTHETIC_DIM, SYNTHETIC_CLASSES, 1.0, split_seed),
    }
}

/// Separable Gaussian clusters for tests and examples: `classes` random
/// prototypes in `dim` dimensions plus isotropic noise of scale `noise`.
pub fn synthetic(n_train: usize, n_test: usize, dim: usize, classes: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if classes == 0 || classes > 256 {
        return Err(Error::Config("synthetic data needs 1..=256 classes".into()));
    }
    let mut r = rng(seed);
    let protos: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut sample = |n: usize| {
        let mut features = Vec::with_capacity(n * dim);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let c = r.gen_range(0..classes);
            labels.push(c as u8);
            features.extend(protos[c].iter().map(|p| (p + noise * r.gen_range(-1.0..1.0)) as f32));
        }
        Split::new(dim, features, labels)
    };
    let train = sample(n_train)?;
    let test = sample(n_test)?;
    Dataset::from_raw("synthetic", train, test, classes, seed, Normalization::PerFeature, None)
}
