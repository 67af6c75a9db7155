//! Neural Network Sparse Topology Distance (NNSTD).
//!
//! Two networks of identical architecture are compared layer by layer. For
//! every pair of output neurons `(i, j)` of a layer the cost is the
//! normalised edit distance between their input sets, a Jaccard distance:
//!
//! ```text
//! ned(A, B) = |A Δ B| / |A ∪ B|        (0 when both sets are empty)
//! ```
//!
//! Input neurons are labelled, so the first layer is compared directly.
//! Hidden neurons are interchangeable, so a minimum-cost assignment of the
//! second network's neurons onto the first network's is solved for each
//! hidden layer, and the next layer's input sets in the second network are
//! relabelled through it before comparison. Output neurons are labelled
//! classes: the last layer uses the identity assignment. The distance of a
//! layer is its assignment cost divided by its width and the network
//! distance is the mean over layers, so every reported value lies in
//! `[0, 1]`.

mod hungarian;
mod matrix;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use matrix::{read_matrix_csv, write_matrix_csv, DistanceMatrix};

use crate::error::{Error, Result};
use crate::topology::{is_permutation, LayerTopology, NetworkTopology};

/// `(|A Δ B|, |A ∪ B|)` for two sorted, duplicate-free slices.
pub fn ned_counts<T: Ord>(a: &[T], b: &[T]) -> (usize, usize) {
    debug_assert!(a.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(b.windows(2).all(|w| w[0] < w[1]));
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - common;
    (union - common, union)
}

/// Normalised edit distance between two sorted input sets.
pub fn ned<T: Ord>(a: &[T], b: &[T]) -> f64 {
    match ned_counts(a, b) {
        (_, 0) => 0.0,
        (diff, union) => diff as f64 / union as f64,
    }
}

/// Square matrix of matching costs, rows indexed by neurons of the first
/// network and columns by neurons of the second.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows != cols {
            return Err(Error::Dimension(format!(
                "assignment needs a square cost matrix, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Config(format!("cost entries must be finite and non-negative, found {v}")));
        }
        Ok(Self { n: rows, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged cost matrix".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Pairwise NED between the output neurons of two layers; `inputs2`
    /// holds the second layer's input sets already relabelled.
    fn from_layers(l1: &LayerTopology, inputs2: &[Vec<u32>]) -> Self {
        let n = l1.out_width();
        let mut values = vec![0.0; n * n];
        values.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            let a = l1.inputs(i);
            for (cell, b) in row.iter_mut().zip(inputs2) {
                *cell = ned(a, b);
            }
        });
        Self { n, values }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n + col]
    }
}

/// A bijection from the second network's neurons onto the first's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `mapping[j] = i`: neuron `j` of network 2 is matched with neuron `i`
    /// of network 1.
    pub mapping: Vec<usize>,
    pub total_cost: f64,
}

impl Assignment {
    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
            total_cost: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    /// `inverse()[i] = j`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.mapping.len()];
        for (j, &i) in self.mapping.iter().enumerate() {
            inv[i] = j;
        }
        inv
    }
}

/// Minimum-cost perfect matching (Hungarian method).
pub fn solve_assignment(c: &CostMatrix) -> Assignment {
    let col_of_row = hungarian::solve(c.n, &c.values);
    let mut mapping = vec![0; c.n];
    for (i, &j) in col_of_row.iter().enumerate() {
        mapping[j] = i;
    }
    let total_cost = mapping.iter().enumerate().map(|(j, &i)| c.get(i, j)).sum();
    Assignment { mapping, total_cost }
}

/// Result of comparing one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerComparison {
    pub assignment: Assignment,
    /// Assignment cost divided by the layer width.
    pub normalized_cost: f64,
}

fn check_layer_shapes(l1: &LayerTopology, l2: &LayerTopology, prev: &Assignment) -> Result<()> {
    if l1.in_width() != l2.in_width() || l1.out_width() != l2.out_width() {
        return Err(Error::Dimension(format!(
            "cannot compare a {}x{} layer with a {}x{} layer",
            l1.in_width(),
            l1.out_width(),
            l2.in_width(),
            l2.out_width()
        )));
    }
    if !is_permutation(&prev.mapping, l1.in_width()) {
        return Err(Error::Dimension(format!(
            "input assignment must be a permutation of {} neurons",
            l1.in_width()
        )));
    }
    Ok(())
}

/// Input sets of `l2`'s neurons expressed in network 1's labels.
fn relabeled_inputs(l2: &LayerTopology, prev: &Assignment) -> Vec<Vec<u32>> {
    (0..l2.out_width())
        .map(|j| {
            let mut set: Vec<u32> = l2.inputs(j).iter().map(|&s| prev.mapping[s as usize] as u32).collect();
            set.sort_unstable();
            set
        })
        .collect()
}

/// Compare two layers whose output neurons are unlabelled.
///
/// `prev` maps the second network's input neurons onto the first's (the
/// identity for the input layer, the previous layer's assignment otherwise).
pub fn compare_layers(l1: &LayerTopology, l2: &LayerTopology, prev: &Assignment) -> Result<LayerComparison> {
    check_layer_shapes(l1, l2, prev)?;
    let inputs2 = relabeled_inputs(l2, prev);
    let costs = CostMatrix::from_layers(l1, &inputs2);
    let assignment = solve_assignment(&costs);
    let normalized_cost = assignment.total_cost / l1.out_width() as f64;
    Ok(LayerComparison {
        assignment,
        normalized_cost,
    })
}

/// Compare two layers whose output neurons carry fixed labels: neuron `i`
/// is only ever matched with neuron `i`.
pub fn compare_labeled_layers(l1: &LayerTopology, l2: &LayerTopology, prev: &Assignment) -> Result<LayerComparison> {
    check_layer_shapes(l1, l2, prev)?;
    let inputs2 = relabeled_inputs(l2, prev);
    let total_cost: f64 = inputs2.iter().enumerate().map(|(i, b)| ned(l1.inputs(i), b)).sum();
    Ok(LayerComparison {
        assignment: Assignment {
            mapping: (0..l1.out_width()).collect(),
            total_cost,
        },
        normalized_cost: total_cost / l1.out_width() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub per_layer: Vec<f64>,
    pub assignments: Vec<Assignment>,
    pub nnstd: f64,
}

impl DistanceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serialisable")
    }
}

/// NNSTD between two networks of identical architecture.
pub fn compare_networks(n1: &NetworkTopology, n2: &NetworkTopology) -> Result<DistanceReport> {
    compare_leading_layers(n1, n2, n1.depth())
}

/// Score only the first `depth` weight layers. The distance is the mean over
/// those layers; the last layer of the full network keeps its labelled
/// treatment.
pub fn compare_leading_layers(n1: &NetworkTopology, n2: &NetworkTopology, depth: usize) -> Result<DistanceReport> {
    if n1.widths() != n2.widths() {
        return Err(Error::Dimension(format!(
            "architectures differ: {:?} vs {:?}",
            n1.widths(),
            n2.widths()
        )));
    }
    if depth == 0 || depth > n1.depth() {
        return Err(Error::Config(format!(
            "can score 1..={} layers, asked for {depth}",
            n1.depth()
        )));
    }
    let last = n1.depth() - 1;
    let mut prev = Assignment::identity(n1.widths()[0]);
    let mut per_layer = Vec::with_capacity(depth);
    let mut assignments = Vec::with_capacity(depth);
    for k in 0..depth {
        let (l1, l2) = (n1.layer(k), n2.layer(k));
        let cmp = if k == last {
            compare_labeled_layers(l1, l2, &prev)?
        } else {
            compare_layers(l1, l2, &prev)?
        };
        per_layer.push(cmp.normalized_cost);
        prev = cmp.assignment.clone();
        assignments.push(cmp.assignment);
    }
    let nnstd = per_layer.iter().sum::<f64>() / depth as f64;
    Ok(DistanceReport {
        per_layer,
        assignments,
        nnstd,
    })
}

/// All ordered pairwise comparisons among `ts`.
///
/// `nnstd[i][j]` is the distance from `ts[i]` to `ts[j]`; the diagonal is
/// zero. Both orderings are computed, since ties in an assignment can make
/// the greedy layer-wise distance slightly asymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseDistances {
    pub nnstd: DistanceMatrix,
    /// One matrix per scored layer.
    pub per_layer: Vec<DistanceMatrix>,
}

pub fn pairwise_matrix(ts: &[NetworkTopology], labels: &[String]) -> Result<PairwiseDistances> {
    pairwise_leading_layers(ts, labels, ts.first().map_or(1, NetworkTopology::depth))
}

pub fn pairwise_leading_layers(ts: &[NetworkTopology], labels: &[String], depth: usize) -> Result<PairwiseDistances> {
    if labels.len() != ts.len() {
        return Err(Error::Config(format!("{} labels for {} networks", labels.len(), ts.len())));
    }
    if let Some(first) = ts.first() {
        if let Some(bad) = ts.iter().find(|t| t.widths() != first.widths()) {
            return Err(Error::Dimension(format!(
                "architectures differ: {:?} vs {:?}",
                first.widths(),
                bad.widths()
            )));
        }
    }
    let k = ts.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let reports: Vec<DistanceReport> = pairs
        .par_iter()
        .map(|&(i, j)| compare_leading_layers(&ts[i], &ts[j], depth))
        .collect::<Result<_>>()?;
    let mut nnstd = DistanceMatrix::zeros(labels.to_vec());
    let mut per_layer = vec![DistanceMatrix::zeros(labels.to_vec()); depth];
    for (&(i, j), r) in pairs.iter().zip(&reports) {
        nnstd.set(i, j, r.nnstd);
        for (m, &v) in per_layer.iter_mut().zip(&r.per_layer) {
            m.set(i, j, v);
        }
    }
    Ok(PairwiseDistances { nnstd, per_layer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{er_init, ErConfig};

    #[test]
    fn ned_examples() {
        // A=0, B=1, C=2: one shared input out of two distinct inputs
        assert_eq!(ned(&[0, 1], &[0]), 0.5);
        assert_eq!(ned(&[0, 1], &[0, 2]), 2.0 / 3.0);
        assert_eq!(ned(&[3, 5, 9], &[3, 5, 9]), 0.0);
        assert_eq!(ned(&[0], &[1, 2]), 1.0);
        assert_eq!(ned::<u32>(&[], &[]), 0.0);
        assert_eq!(ned(&[], &[4u32]), 1.0);
    }

    #[test]
    fn assignment_examples() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let a = solve_assignment(&c);
        assert_eq!(a.mapping, vec![0, 1]);
        assert_eq!(a.total_cost, 0.0);

        let c = CostMatrix::from_rows(&[vec![0.5, 0.2], vec![0.3, 0.9]]).unwrap();
        let a = solve_assignment(&c);
        // row 0 takes column 1 and row 1 takes column 0
        assert_eq!(a.mapping, vec![1, 0]);
        assert_eq!(a.inverse(), vec![1, 0]);
        assert!((a.total_cost - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_square_is_a_dimension_error() {
        assert!(matches!(CostMatrix::new(2, 3, vec![0.0; 6]), Err(Error::Dimension(_))));
        assert!(matches!(CostMatrix::from_rows(&[vec![0.0, 1.0]]), Err(Error::Dimension(_))));
        assert!(CostMatrix::new(1, 1, vec![f64::NAN]).is_err());
    }

    /// Two 2-neuron layers over 20 inputs with overlapping input sets.
    fn two_neuron_layers() -> (LayerTopology, LayerTopology) {
        let l1 = LayerTopology::from_edges(
            20,
            2,
            (0..5).map(|s| (s, 0)).chain((10..20).map(|s| (s, 1))),
        )
        .unwrap();
        let l2 = LayerTopology::from_edges(
            20,
            2,
            [0, 1, 2, 3, 5]
                .into_iter()
                .map(|s| (s, 0))
                .chain([10, 11, 12, 13, 14, 15, 16, 0, 1, 2].into_iter().map(|s| (s, 1))),
        )
        .unwrap();
        (l1, l2)
    }

    #[test]
    fn compare_layers_matches_enumeration() {
        let (l1, l2) = two_neuron_layers();
        let id = Assignment::identity(20);
        let c = |i: usize, j: usize| ned(l1.inputs(i), l2.inputs(j));
        let straight = c(0, 0) + c(1, 1);
        let crossed = c(0, 1) + c(1, 0);
        let got = compare_layers(&l1, &l2, &id).unwrap();
        assert!((got.normalized_cost - straight.min(crossed) / 2.0).abs() < 1e-15);
        let expect = if straight <= crossed { vec![0, 1] } else { vec![1, 0] };
        assert_eq!(got.assignment.mapping, expect);
    }

    #[test]
    fn identical_layers_cost_nothing() {
        let t = er_init(&[30, 20, 5], &ErConfig::new(4.0, 5).unwrap()).unwrap();
        let id = Assignment::identity(30);
        let r = compare_layers(t.layer(0), t.layer(0), &id).unwrap();
        assert_eq!(r.normalized_cost, 0.0);
        let report = compare_networks(&t, &t).unwrap();
        assert_eq!(report.nnstd, 0.0);
        assert_eq!(report.per_layer.len(), 2);
    }

    #[test]
    fn permuted_layer_is_recovered() {
        let l1 = LayerTopology::from_edges(4, 3, [(0, 0), (1, 1), (2, 1), (3, 2), (0, 2)]).unwrap();
        // neuron k of l1 becomes neuron perm[k] of l2
        let perm = [2, 0, 1];
        let l2 = LayerTopology::from_edges(4, 3, l1.edges().map(|(s, t)| (s, perm[t]))).unwrap();
        let r = compare_layers(&l1, &l2, &Assignment::identity(4)).unwrap();
        assert_eq!(r.normalized_cost, 0.0);
        for (k, &p) in perm.iter().enumerate() {
            assert_eq!(r.assignment.mapping[p], k);
        }
    }

    #[test]
    fn output_layer_is_labelled() {
        // permuting only the output neurons is a real difference
        let l0 = LayerTopology::from_edges(2, 2, [(0, 0), (1, 1)]).unwrap();
        let a = NetworkTopology::new(vec![2, 2], vec![l0.clone()]).unwrap();
        let l1 = LayerTopology::from_edges(2, 2, [(0, 1), (1, 0)]).unwrap();
        let b = NetworkTopology::new(vec![2, 2], vec![l1]).unwrap();
        assert_eq!(compare_networks(&a, &b).unwrap().nnstd, 1.0);
    }

    #[test]
    fn architecture_mismatch() {
        let a = NetworkTopology::empty(&[3, 3, 2]).unwrap();
        let b = NetworkTopology::empty(&[3, 4, 2]).unwrap();
        assert!(matches!(compare_networks(&a, &b), Err(Error::Dimension(_))));
        let l = LayerTopology::empty(3, 3);
        assert!(compare_layers(&l, &LayerTopology::empty(3, 2), &Assignment::identity(3)).is_err());
        assert!(compare_layers(&l, &l, &Assignment::identity(2)).is_err());
    }

    #[test]
    fn pairwise_of_copies_is_zero() {
        let t = er_init(&[12, 8, 3], &ErConfig::new(2.0, 1).unwrap()).unwrap();
        let ts = vec![t.clone(), t.clone(), t];
        let labels: Vec<String> = (0..3).map(|i| format!("w{i}")).collect();
        let p = pairwise_matrix(&ts, &labels).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(p.nnstd.get(i, j), 0.0);
            }
        }
        assert_eq!(p.per_layer.len(), 2);
    }
}
