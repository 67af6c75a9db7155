//! Sparse connectivity of layered networks.
//!
//! A [`LayerTopology`] is the support of one weight matrix: a set of
//! `(source, target)` pairs between a layer of width `in_width` and the next
//! layer of width `out_width`. Edges are stored target-major (compressed rows
//! keyed by the receiving neuron, sources sorted within each row), so the
//! canonical edge order is `(target, source)` and the input set of any neuron
//! is a contiguous sorted slice. The distance metric, the network kernels and
//! the rewiring code all share this one layout.
//!
//! A [`NetworkTopology`] is the ordered stack of layers plus the widths
//! `[n0, n1, ..., nL]`. Topologies are immutable; every operation that changes
//! connectivity builds a new value.

mod io;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use io::{load, read_topology, save, write_topology, TopologyMeta, FORMAT_VERSION};

use crate::error::{Error, ParseError, Result};
use crate::rng::{derive_seed, rng, Rng};

/// A neuron address inside a network: layer index and position in the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NeuronId {
    pub layer: usize,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTopology {
    in_width: usize,
    out_width: usize,
    /// `offsets[t]..offsets[t + 1]` indexes the inputs of target `t`.
    offsets: Vec<usize>,
    sources: Vec<u32>,
}

impl LayerTopology {
    /// Build a layer from `(source, target)` pairs in any order.
    ///
    /// Out-of-range and duplicate pairs are rejected.
    pub fn from_edges(
        in_width: usize,
        out_width: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ParseError> {
        Self::build(0, in_width, out_width, edges)
    }

    pub(crate) fn build(
        layer: usize,
        in_width: usize,
        out_width: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ParseError> {
        if in_width == 0 || out_width == 0 {
            return Err(ParseError::WidthMismatch(format!(
                "layer {layer} has a zero width ({in_width}x{out_width})"
            )));
        }
        if in_width > u32::MAX as usize {
            return Err(ParseError::WidthMismatch(format!(
                "layer {layer} input width {in_width} exceeds u32"
            )));
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (source, target) in edges {
            if source >= in_width || target >= out_width {
                return Err(ParseError::EdgeOutOfRange {
                    layer,
                    from: source,
                    to: target,
                    in_width,
                    out_width,
                });
            }
            pairs.push((target, source));
        }
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(ParseError::DuplicateEdge {
                layer,
                from: w[0].1,
                to: w[0].0,
            });
        }
        Ok(Self::from_sorted_positions(
            in_width,
            out_width,
            pairs.iter().map(|&(t, s)| t * in_width + s),
        ))
    }

    /// Build from strictly increasing flat positions `target * in_width + source`.
    pub(crate) fn from_sorted_positions(
        in_width: usize,
        out_width: usize,
        positions: impl IntoIterator<Item = usize>,
    ) -> Self {
        let mut offsets = vec![0usize; out_width + 1];
        let mut sources = Vec::new();
        let mut last: Option<usize> = None;
        for pos in positions {
            debug_assert!(last.is_none_or(|l| l < pos), "positions must increase");
            last = Some(pos);
            let (target, source) = (pos / in_width, pos % in_width);
            offsets[target + 1] += 1;
            sources.push(source as u32);
        }
        for t in 0..out_width {
            offsets[t + 1] += offsets[t];
        }
        Self {
            in_width,
            out_width,
            offsets,
            sources,
        }
    }

    pub fn full(in_width: usize, out_width: usize) -> Self {
        Self::from_sorted_positions(in_width, out_width, 0..in_width * out_width)
    }

    pub fn empty(in_width: usize, out_width: usize) -> Self {
        Self::from_sorted_positions(in_width, out_width, std::iter::empty())
    }

    pub fn in_width(&self) -> usize {
        self.in_width
    }

    pub fn out_width(&self) -> usize {
        self.out_width
    }

    pub fn edge_count(&self) -> usize {
        self.sources.len()
    }

    pub fn capacity(&self) -> usize {
        self.in_width * self.out_width
    }

    pub fn density(&self) -> f64 {
        self.edge_count() as f64 / self.capacity() as f64
    }

    /// Sorted input positions of output neuron `target`.
    pub fn inputs(&self, target: usize) -> &[u32] {
        &self.sources[self.offsets[target]..self.offsets[target + 1]]
    }

    /// Edge-index range of output neuron `target`; indexes per-edge arrays.
    pub fn row_range(&self, target: usize) -> std::ops::Range<usize> {
        self.offsets[target]..self.offsets[target + 1]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Source position of every edge, in canonical order.
    pub fn sources(&self) -> &[u32] {
        &self.sources
    }

    /// `(source, target)` pairs in canonical `(target, source)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.out_width)
            .flat_map(move |t| self.inputs(t).iter().map(move |&s| (s as usize, t)))
    }

    /// Flat positions `target * in_width + source`, increasing.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges().map(move |(s, t)| t * self.in_width + s)
    }

    pub fn contains(&self, source: usize, target: usize) -> bool {
        target < self.out_width && self.inputs(target).binary_search(&(source as u32)).is_ok()
    }

    /// Dense occupancy mask indexed by flat position.
    pub(crate) fn occupancy(&self) -> Vec<bool> {
        let mut mask = vec![false; self.capacity()];
        for pos in self.positions() {
            mask[pos] = true;
        }
        mask
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    widths: Vec<usize>,
    layers: Vec<LayerTopology>,
}

impl NetworkTopology {
    pub fn new(widths: Vec<usize>, layers: Vec<LayerTopology>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::Config(format!(
                "a network needs at least two layer widths, got {}",
                widths.len()
            )));
        }
        if layers.len() + 1 != widths.len() {
            return Err(Error::Dimension(format!(
                "{} widths require {} layers, got {}",
                widths.len(),
                widths.len() - 1,
                layers.len()
            )));
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.in_width != widths[k] || layer.out_width != widths[k + 1] {
                return Err(Error::Dimension(format!(
                    "layer {k} is {}x{}, widths say {}x{}",
                    layer.in_width,
                    layer.out_width,
                    widths[k],
                    widths[k + 1]
                )));
            }
        }
        Ok(Self { widths, layers })
    }

    pub fn fully_connected(widths: &[usize]) -> Result<Self> {
        validate_widths(widths)?;
        let layers = widths.windows(2).map(|w| LayerTopology::full(w[0], w[1])).collect();
        Self::new(widths.to_vec(), layers)
    }

    pub fn empty(widths: &[usize]) -> Result<Self> {
        validate_widths(widths)?;
        let layers = widths.windows(2).map(|w| LayerTopology::empty(w[0], w[1])).collect();
        Self::new(widths.to_vec(), layers)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn layers(&self) -> &[LayerTopology] {
        &self.layers
    }

    pub fn layer(&self, k: usize) -> &LayerTopology {
        &self.layers[k]
    }

    /// Number of weight layers `L`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn edge_count(&self) -> usize {
        self.layers.iter().map(LayerTopology::edge_count).sum()
    }

    pub fn layer_edge_counts(&self) -> Vec<usize> {
        self.layers.iter().map(LayerTopology::edge_count).collect()
    }

    /// Fraction of all possible connections that exist.
    pub fn density(&self) -> f64 {
        let possible: usize = self.layers.iter().map(LayerTopology::capacity).sum();
        self.edge_count() as f64 / possible as f64
    }

    pub(crate) fn replace_layers(&self, layers: Vec<LayerTopology>) -> Self {
        debug_assert_eq!(layers.len(), self.layers.len());
        Self {
            widths: self.widths.clone(),
            layers,
        }
    }

    /// Relabel hidden neurons: in hidden layer `h` (1-based layer index
    /// `h + 1`), the neuron at position `p` moves to `perms[h][p]`. Incoming
    /// and outgoing edges follow their neuron, so the result is isomorphic.
    pub fn permute_hidden(&self, perms: &[Vec<usize>]) -> Result<Self> {
        let hidden = self.widths.len() - 2;
        if perms.len() != hidden {
            return Err(Error::Dimension(format!(
                "{hidden} hidden layers but {} permutations",
                perms.len()
            )));
        }
        for (h, perm) in perms.iter().enumerate() {
            if !is_permutation(perm, self.widths[h + 1]) {
                return Err(Error::Config(format!(
                    "permutation {h} is not a bijection on 0..{}",
                    self.widths[h + 1]
                )));
            }
        }
        let ident = |n: usize| (0..n).collect::<Vec<_>>();
        let mut layers = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate() {
            let src_map = if k == 0 { ident(layer.in_width) } else { perms[k - 1].clone() };
            let dst_map = if k == hidden { ident(layer.out_width) } else { perms[k].clone() };
            let edges = layer.edges().map(|(s, t)| (src_map[s], dst_map[t]));
            layers.push(LayerTopology::build(k, layer.in_width, layer.out_width, edges)?);
        }
        Ok(self.replace_layers(layers))
    }
}

pub(crate) fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

fn validate_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 {
        return Err(Error::Config(format!(
            "need at least two layer widths, got {widths:?}"
        )));
    }
    if widths.contains(&0) {
        return Err(Error::Config(format!("layer widths must be positive: {widths:?}")));
    }
    Ok(())
}

/// Erdős–Rényi initialisation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErConfig {
    /// Sparsity control; expected edges per layer are `epsilon * (n_in + n_out)`.
    pub epsilon: f64,
    pub seed: u64,
}

impl ErConfig {
    pub fn new(epsilon: f64, seed: u64) -> Result<Self> {
        let cfg = Self { epsilon, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Pick `epsilon` so that a layer of shape `n_in x n_out` has the given
    /// connection probability.
    pub fn for_density(density: f64, n_in: usize, n_out: usize, seed: u64) -> Result<Self> {
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::Config(format!("density must be in (0, 1], got {density}")));
        }
        let epsilon = density * (n_in * n_out) as f64 / (n_in + n_out) as f64;
        Self::new(epsilon, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 || !self.epsilon.is_finite() {
            return Err(Error::Config(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Connection probability `min(eps * (n_out + n_in) / (n_out * n_in), 1)`.
pub fn er_probability(epsilon: f64, n_in: usize, n_out: usize) -> f64 {
    (epsilon * (n_out + n_in) as f64 / (n_out * n_in) as f64).min(1.0)
}

/// Sample an Erdős–Rényi sparse topology: every potential edge of layer `k`
/// exists independently with probability [`er_probability`].
pub fn er_init(widths: &[usize], cfg: &ErConfig) -> Result<NetworkTopology> {
    cfg.validate()?;
    validate_widths(widths)?;
    let layers = widths
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let (n_in, n_out) = (w[0], w[1]);
            let p = er_probability(cfg.epsilon, n_in, n_out);
            let mut rng = rng(derive_seed(cfg.seed, k as u64));
            let positions = (0..n_in * n_out).filter(|_| rng.gen::<f64>() < p);
            LayerTopology::from_sorted_positions(n_in, n_out, positions.collect::<Vec<_>>())
        })
        .collect();
    NetworkTopology::new(widths.to_vec(), layers)
}

/// `ceil(fraction * count)` with a guard against representation error
/// (`0.01 * 300` is `3.0000000000000004`).
pub(crate) fn replacement_count(fraction: f64, count: usize) -> usize {
    let exact = fraction * count as f64;
    ((exact - 1e-9).ceil().max(0.0) as usize).min(count)
}

/// Randomly rewire a fixed fraction of every layer.
///
/// Per layer, `ceil(fraction * edges)` existing edges chosen uniformly are
/// removed and the same number of edges are added at positions chosen
/// uniformly among those that were empty before the call, so per-layer edge
/// counts are preserved and each replaced edge really moves.
pub fn perturb(t: &NetworkTopology, fraction: f64, seed: u64) -> Result<NetworkTopology> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "perturbation fraction must be in (0, 1], got {fraction}"
        )));
    }
    let mut layers = Vec::with_capacity(t.depth());
    for (k, layer) in t.layers().iter().enumerate() {
        let count = layer.edge_count();
        if count == 0 {
            return Err(Error::Config(format!("layer {k} has no edges to perturb")));
        }
        let n = replacement_count(fraction, count).max(1);
        let mut rng = rng(derive_seed(seed, k as u64));
        let occupied = layer.occupancy();
        let free = occupied.len() - count;
        if free < n {
            return Err(Error::Regrow {
                layer: k,
                needed: n,
                available: free,
            });
        }
        let mut removed = vec![false; count];
        for i in index::sample(&mut rng, count, n) {
            removed[i] = true;
        }
        let added = sample_free_positions(&occupied, n, &mut rng);
        let kept = layer.positions().zip(&removed).filter(|(_, &r)| !r).map(|(p, _)| p);
        let mut positions: Vec<usize> = kept.chain(added).collect();
        positions.sort_unstable();
        layers.push(LayerTopology::from_sorted_positions(
            layer.in_width(),
            layer.out_width(),
            positions,
        ));
    }
    Ok(t.replace_layers(layers))
}

/// Draw `n` distinct positions uniformly from the `false` entries of
/// `occupied`. The caller guarantees enough free positions exist. Returns
/// positions in increasing order.
pub(crate) fn sample_free_positions(occupied: &[bool], n: usize, rng: &mut Rng) -> Vec<usize> {
    let total = occupied.len();
    let free = occupied.iter().filter(|&&o| !o).count();
    assert!(free >= n, "requested {n} free positions, only {free} available");
    let mut chosen: Vec<usize> = if free * 2 >= total {
        // rejection sampling: each draw succeeds with probability >= 1/4
        let mut taken = std::collections::HashSet::with_capacity(n);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let pos = rng.gen_range(0..total);
            if !occupied[pos] && taken.insert(pos) {
                out.push(pos);
            }
        }
        out
    } else {
        let empties: Vec<usize> = (0..total).filter(|&p| !occupied[p]).collect();
        index::sample(rng, empties.len(), n).into_iter().map(|i| empties[i]).collect()
    };
    chosen.sort_unstable();
    chosen
}
