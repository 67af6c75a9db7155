//! Execution of resolved run specifications.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::*;
use super::heatmap;
use crate::data::{self, Dataset};
use crate::error::{Error, Result};
use crate::fsutil::write_bytes_atomic;
use crate::metric::{self, pairwise_leading_layers, write_matrix_csv, PairwiseDistances};
use crate::network::{init_weights_with, load_checkpoint, save_checkpoint, SparseNet};
use crate::rng::derive_seed;
use crate::settrain::{self, snapshot_paths, Mode, RetrainMode, TrainOptions, TrainOutcome};
use crate::stats::{mean, std_dev};
use crate::topology::{self, perturb, NetworkTopology, TopologyMeta};

/// Where and how a run executes. None of this affects results.
#[derive(Debug, Clone)]
pub struct Context {
    pub out: PathBuf,
    pub data_dir: PathBuf,
    pub verbose: bool,
}

impl Context {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            data_dir: data::default_cache_dir(),
            verbose: false,
        }
    }
}

#[derive(Serialize)]
struct RunFile<'a> {
    version: &'static str,
    #[serde(flatten)]
    spec: &'a RunSpec,
}

pub fn run_json(spec: &RunSpec) -> String {
    let file = RunFile {
        version: env!("CARGO_PKG_VERSION"),
        spec,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("configs serialize");
    s.push('\n');
    s
}

/// Read the spec back from a `run.json`.
pub fn read_run_json(path: &Path) -> Result<RunSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("version");
    }
    serde_json::from_value(v).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Write `run.json` into the output directory, then run.
pub fn execute(spec: &RunSpec, ctx: &Context) -> Result<()> {
    write_bytes_atomic(&ctx.out.join("run.json"), run_json(spec).as_bytes())?;
    match spec {
        RunSpec::Init(c) => run_init(c, ctx),
        RunSpec::Perturb(c) => run_perturb(c, ctx),
        RunSpec::Distance(c) => run_distance(c, ctx),
        RunSpec::Family(c) => run_family(c, ctx),
        RunSpec::Pairwise(c) => run_pairwise(c, ctx),
        RunSpec::Train(c) => run_train(c, ctx),
        RunSpec::DensitySweep(c) => run_density_sweep(c, ctx),
        RunSpec::Evolve(c) => run_evolve(c, ctx),
        RunSpec::Retrain(c) => run_retrain(c, ctx),
        RunSpec::Heatmap(c) => run_heatmap(c, ctx),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes_atomic(path, text.as_bytes())
}

pub fn run_init(c: &InitConfig, ctx: &Context) -> Result<()> {
    let (t, meta) = c.net.build(c.seed)?;
    topology::save(ctx.out.join("topology.topo"), &t, &meta)
}

pub fn run_perturb(c: &PerturbConfig, ctx: &Context) -> Result<()> {
    let (t, meta) = topology::load(&c.input)?;
    let p = perturb(&t, c.fraction, c.seed)?;
    let meta = TopologyMeta {
        seed: Some(c.seed),
        ..meta
    };
    topology::save(ctx.out.join("perturbed.topo"), &p, &meta)
}

pub fn run_distance(c: &DistanceConfig, ctx: &Context) -> Result<()> {
    let (a, _) = topology::load(&c.a)?;
    let (b, _) = topology::load(&c.b)?;
    let report = metric::compare_leading_layers(&a, &b, c.layers.unwrap_or(a.depth()))?;
    let mut csv = String::from("layer,distance\n");
    for (k, d) in report.per_layer.iter().enumerate() {
        writeln!(csv, "{k},{d:.6}").unwrap();
    }
    writeln!(csv, "nnstd,{:.6}", report.nnstd).unwrap();
    write_text(&ctx.out.join("distance.csv"), &csv)?;
    write_text(&ctx.out.join("distance.json"), &report.to_json())?;
    println!("{:.6}", report.nnstd);
    Ok(())
}

/// The chain `w0 .. w{generations}`, each a perturbation of its parent.
pub fn family_chain(net: &NetSpec, seed: u64, generations: usize, fraction: f64) -> Result<Vec<(NetworkTopology, TopologyMeta)>> {
    let mut chain = vec![net.build(seed)?];
    for g in 1..=generations {
        let (parent, meta) = chain.last().expect("root present");
        let child = perturb(parent, fraction, derive_seed(seed, g as u64))?;
        chain.push((child, *meta));
    }
    Ok(chain)
}

fn write_pairwise(dir: &Path, d: &PairwiseDistances) -> Result<()> {
    write_matrix_csv(dir.join("nnstd.csv"), &d.nnstd)?;
    for (k, m) in d.per_layer.iter().enumerate() {
        write_matrix_csv(dir.join(format!("layer_{k}.csv")), m)?;
    }
    Ok(())
}

fn scored_layers(layers: Option<usize>, t: &NetworkTopology) -> usize {
    layers.unwrap_or(t.depth())
}

pub fn run_family(c: &FamilyConfig, ctx: &Context) -> Result<()> {
    let chain = family_chain(&c.net, c.seed, c.generations, c.fraction)?;
    let labels: Vec<String> = (0..chain.len()).map(|i| format!("w{i}")).collect();
    for ((t, meta), l) in chain.iter().zip(&labels) {
        topology::save(ctx.out.join("topologies").join(format!("{l}.topo")), t, meta)?;
    }
    let ts: Vec<NetworkTopology> = chain.into_iter().map(|(t, _)| t).collect();
    let d = pairwise_leading_layers(&ts, &labels, scored_layers(c.layers, &ts[0]))?;
    write_pairwise(&ctx.out, &d)
}

pub fn run_pairwise(c: &PairwiseConfig, ctx: &Context) -> Result<()> {
    if c.inputs.len() < 2 {
        return Err(Error::Config("pairwise needs at least two topologies".into()));
    }
    let ts: Vec<NetworkTopology> = c
        .inputs
        .iter()
        .map(|p| topology::load(p).map(|(t, _)| t))
        .collect::<Result<_>>()?;
    let labels: Vec<String> = c
        .inputs
        .iter()
        .map(|p| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()))
        .collect();
    let d = pairwise_leading_layers(&ts, &labels, scored_layers(c.layers, &ts[0]))?;
    write_pairwise(&ctx.out, &d)
}

fn load_data(t: &Training, ctx: &Context) -> Result<Dataset> {
    data::load(t.dataset, &ctx.data_dir, t.split_seed)
}

fn check_widths(widths: &[usize], data: &Dataset) -> Result<()> {
    let (first, last) = (widths.first().copied(), widths.last().copied());
    if first != Some(data.feature_dim()) || last != Some(data.num_classes) {
        return Err(Error::Config(format!(
            "widths {widths:?} do not fit {} ({} features, {} classes)",
            data.name,
            data.feature_dim(),
            data.num_classes
        )));
    }
    Ok(())
}

/// One training job: initial weights and training streams from `seed`.
/// `out` is the output directory and verbosity.
fn train_job(
    t: NetworkTopology,
    seed: u64,
    mode: Mode,
    snapshot_every: usize,
    training: &Training,
    data: &Dataset,
    out: (Option<PathBuf>, bool),
) -> Result<TrainOutcome> {
    let net = init_weights_with(&t, weights_seed(seed), training.optimizer.weight_init);
    let cfg = training.optimizer.train_config(train_seed(seed));
    let set = training.rewiring.set_config(mode, snapshot_every);
    let opts = TrainOptions {
        out_dir: out.0,
        augment: training.augment,
        verbose: out.1,
    };
    settrain::train(net, data, &cfg, &set, &opts)
}

pub fn run_train(c: &TrainCmdConfig, ctx: &Context) -> Result<()> {
    let data = load_data(&c.training, ctx)?;
    check_widths(&c.net.widths, &data)?;
    let (t, meta) = c.net.build(c.seed)?;
    let density = t.density();
    let mode = c.training.rewiring.mode;
    let out = train_job(t, c.seed, mode, c.snapshot_every, &c.training, &data, (Some(ctx.out.clone()), ctx.verbose))?;
    save_checkpoint(ctx.out.join("best.topo"), ctx.out.join("best.ckpt"), &out.best, &meta)?;
    let mut csv = String::from("mode,density,seed,best_epoch,test_loss,test_accuracy\n");
    writeln!(
        csv,
        "{},{density:.6},{},{},{:.6},{:.6}",
        mode_name(mode),
        c.seed,
        out.trace.best_epoch,
        out.test.loss,
        out.test.accuracy
    )
    .unwrap();
    write_text(&ctx.out.join("result.csv"), &csv)?;
    println!("test accuracy {:.4}", out.test.accuracy);
    Ok(())
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Set => "SET",
        Mode::Fixed => "FIXED",
    }
}

fn retrain_name(m: RetrainMode) -> &'static str {
    match m {
        RetrainMode::RandomReinit => "RANDOM_REINIT",
        RetrainMode::Continue => "CONTINUE",
    }
}

/// `None` as the density stands for the fully connected baseline.
struct SweepJob {
    density: Option<f64>,
    seed: u64,
    mode: Mode,
}

pub fn run_density_sweep(c: &SweepConfig, ctx: &Context) -> Result<()> {
    let data = load_data(&c.training, ctx)?;
    check_widths(&c.widths, &data)?;
    let mut jobs = Vec::new();
    for &density in &c.densities {
        for &seed in &c.seeds {
            for &mode in &c.modes {
                jobs.push(SweepJob {
                    density: Some(density),
                    seed,
                    mode,
                });
            }
        }
    }
    if c.dense_baseline {
        for &seed in &c.seeds {
            jobs.push(SweepJob {
                density: None,
                seed,
                mode: Mode::Fixed,
            });
        }
    }
    let results: Vec<(f64, usize)> = jobs
        .par_iter()
        .map(|j| {
            let t = match j.density {
                Some(d) => {
                    NetSpec {
                        widths: c.widths.clone(),
                        sparsity: Sparsity::Density(d),
                    }
                    .build(j.seed)?
                    .0
                }
                None => NetworkTopology::fully_connected(&c.widths)?,
            };
            let out = train_job(t, j.seed, j.mode, 0, &c.training, &data, (None, ctx.verbose))?;
            Ok((out.test.accuracy, out.trace.best_epoch))
        })
        .collect::<Result<_>>()?;

    let label = |j: &SweepJob| match j.density {
        Some(_) => mode_name(j.mode),
        None => "DENSE",
    };
    let density_of = |j: &SweepJob| j.density.unwrap_or(1.0);
    let mut rows = String::from("density,mode,seed,best_epoch,test_accuracy\n");
    for (j, (acc, best)) in jobs.iter().zip(&results) {
        writeln!(rows, "{:.6},{},{},{best},{acc:.6}", density_of(j), label(j), j.seed).unwrap();
    }
    write_text(&ctx.out.join("accuracy.csv"), &rows)?;

    let mut summary = String::from("density,mode,n,mean_accuracy,std_accuracy\n");
    let mut seen: Vec<(String, &str)> = Vec::new();
    for j in &jobs {
        let key = (format!("{:.6}", density_of(j)), label(j));
        if seen.contains(&key) {
            continue;
        }
        let accs: Vec<f64> = jobs
            .iter()
            .zip(&results)
            .filter(|(o, _)| format!("{:.6}", density_of(o)) == key.0 && label(o) == key.1)
            .map(|(_, r)| r.0)
            .collect();
        writeln!(summary, "{},{},{},{:.6},{:.6}", key.0, key.1, accs.len(), mean(&accs), std_dev(&accs)).unwrap();
        seen.push(key);
    }
    write_text(&ctx.out.join("summary.csv"), &summary)
}

/// Per-member starting topology and run seed.
pub fn evolve_members(c: &EvolveConfig) -> Result<Vec<(NetworkTopology, u64)>> {
    match c.start {
        Start::Family { fraction } => Ok(family_chain(&c.net, c.seed, c.members.saturating_sub(1), fraction)?
            .into_iter()
            .map(|(t, _)| (t, c.seed))
            .collect()),
        Start::Seeds => (0..c.members as u64)
            .map(|i| {
                let s = derive_seed(c.seed, i);
                Ok((c.net.build(s)?.0, s))
            })
            .collect(),
    }
}

pub fn member_dir(out: &Path, i: usize) -> PathBuf {
    out.join("members").join(format!("m{i}"))
}

pub fn run_evolve(c: &EvolveConfig, ctx: &Context) -> Result<()> {
    if c.members < 2 {
        return Err(Error::Config("evolve needs at least two members".into()));
    }
    let epochs = c.training.optimizer.epochs;
    let mut at: Vec<usize> = c.snapshot_epochs.clone();
    at.push(0);
    at.sort_unstable();
    at.dedup();
    if let Some(&e) = at.iter().find(|&&e| e > epochs) {
        return Err(Error::Config(format!("snapshot epoch {e} is past the last epoch {epochs}")));
    }
    let data = load_data(&c.training, ctx)?;
    check_widths(&c.net.widths, &data)?;
    let members = evolve_members(c)?;
    let stride = snapshot_stride(&at);
    let outcomes: Vec<TrainOutcome> = members
        .into_par_iter()
        .enumerate()
        .map(|(i, (t, seed))| {
            let mode = c.training.rewiring.mode;
            train_job(t, seed, mode, stride, &c.training, &data, (Some(member_dir(&ctx.out, i)), ctx.verbose))
        })
        .collect::<Result<_>>()?;

    let labels: Vec<String> = (0..c.members).map(|i| format!("w{i}")).collect();
    let depth = c.layers.unwrap_or(c.net.widths.len() - 1);
    let mut mean_rows = String::from("epoch,mean_nnstd,max_nnstd\n");
    for &e in &at {
        let ts: Vec<NetworkTopology> = outcomes
            .iter()
            .map(|o| o.trace.snapshot(e).map(|s| s.topology.clone()))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Training(format!("no snapshot at epoch {e}")))?;
        let d = pairwise_leading_layers(&ts, &labels, depth)?;
        write_pairwise(&ctx.out.join("epochs").join(format!("epoch_{e:04}")), &d)?;
        writeln!(mean_rows, "{e},{:.6},{:.6}", d.nnstd.off_diagonal_mean(), d.nnstd.off_diagonal_max()).unwrap();
    }
    write_text(&ctx.out.join("pairwise_mean.csv"), &mean_rows)?;

    let mut traj = String::from("member,epoch,nnstd\n");
    for (i, o) in outcomes.iter().enumerate() {
        let start = &o.trace.snapshot(0).expect("epoch 0 is always kept").topology;
        for &e in &at {
            let t = &o.trace.snapshot(e).expect("checked above").topology;
            let d = metric::compare_leading_layers(start, t, depth)?.nnstd;
            writeln!(traj, "{i},{e},{d:.6}").unwrap();
        }
    }
    write_text(&ctx.out.join("trajectory.csv"), &traj)?;

    let mut acc = String::from("member,best_epoch,test_accuracy\n");
    for (i, o) in outcomes.iter().enumerate() {
        writeln!(acc, "{i},{},{:.6}", o.trace.best_epoch, o.test.accuracy).unwrap();
    }
    write_text(&ctx.out.join("accuracy.csv"), &acc)
}

/// Snapshot epochs present in a training output directory, ascending.
pub fn available_snapshots(trace: &Path) -> Result<Vec<usize>> {
    let dir = trace.join("snapshots");
    let entries = fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut epochs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(&dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(e) = name
            .strip_prefix("epoch_")
            .and_then(|r| r.strip_suffix(".topo"))
            .and_then(|n| n.parse().ok())
        {
            epochs.push(e);
        }
    }
    epochs.sort_unstable();
    Ok(epochs)
}

fn load_snapshot(trace: &Path, epoch: usize) -> Result<SparseNet> {
    let (topo, params) = snapshot_paths(trace, epoch);
    if !topo.exists() || !params.exists() {
        return Err(Error::Config(format!("{}: no snapshot for epoch {epoch}", trace.display())));
    }
    load_checkpoint(topo, params)
}

pub fn run_retrain(c: &RetrainConfig, ctx: &Context) -> Result<()> {
    if c.traces.is_empty() || c.snapshot_epochs.is_empty() || c.modes.is_empty() {
        return Err(Error::Config("retrain needs traces, snapshot epochs and modes".into()));
    }
    let mut jobs = Vec::new();
    for (i, trace) in c.traces.iter().enumerate() {
        for &e in &c.snapshot_epochs {
            let (topo, params) = snapshot_paths(trace, e);
            if !topo.exists() || !params.exists() {
                return Err(Error::Config(format!("{}: no snapshot for epoch {e}", trace.display())));
            }
            for &m in &c.modes {
                jobs.push((i, e, m));
            }
        }
    }
    let data = load_data(&c.training, ctx)?;
    let results: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, e, m)| {
            let snap = load_snapshot(&c.traces[i], e)?;
            let seed = derive_seed(c.seed, i as u64);
            let cfg = c.training.optimizer.train_config(train_seed(seed));
            let opts = TrainOptions {
                out_dir: None,
                augment: c.training.augment,
                verbose: ctx.verbose,
            };
            Ok(settrain::retrain(&snap, m, &data, &cfg, &opts)?.test.accuracy)
        })
        .collect::<Result<_>>()?;

    let mut raw = String::from("trace,snapshot_epoch,mode,test_accuracy\n");
    for (&(i, e, m), acc) in jobs.iter().zip(&results) {
        writeln!(raw, "{i},{e},{},{acc:.6}", retrain_name(m)).unwrap();
    }
    write_text(&ctx.out.join("retrain_runs.csv"), &raw)?;

    let mut table = String::from("snapshot_epoch,mode,n,mean_accuracy,std_accuracy\n");
    for &e in &c.snapshot_epochs {
        for &m in &c.modes {
            let accs: Vec<f64> = jobs
                .iter()
                .zip(&results)
                .filter(|((_, je, jm), _)| *je == e && *jm == m)
                .map(|(_, &a)| a)
                .collect();
            writeln!(table, "{e},{},{},{:.6},{:.6}", retrain_name(m), accs.len(), mean(&accs), std_dev(&accs)).unwrap();
        }
    }
    write_text(&ctx.out.join("retrain.csv"), &table)
}

pub fn run_heatmap(c: &HeatmapConfig, ctx: &Context) -> Result<()> {
    let m = metric::read_matrix_csv(&c.input)?;
    let png = heatmap::render_png(&m, c.cell)?;
    write_bytes_atomic(&ctx.out.join("heatmap.png"), &png)
}
