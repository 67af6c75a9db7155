//! Sparse multilayer perceptrons.
//!
//! Weights exist only on the support of a [`NetworkTopology`]: each layer
//! stores one value per edge, in the topology's canonical edge order, so
//! non-edges are never materialised. Hidden layers use per-neuron
//! [`Srelu`] activations; the output layer produces logits for a softmax
//! cross-entropy loss.

mod checkpoint;
mod optim;
mod srelu;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use checkpoint::{load_checkpoint, read_params, save_checkpoint, write_params, CHECKPOINT_VERSION};
pub use optim::{sgd_step, Nesterov, TrainConfig};
pub use srelu::{srelu, Srelu};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng};
use crate::topology::{LayerTopology, NetworkTopology};

/// Dense row-major matrix, one row per sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Resize to `rows x cols`, keeping the allocation. Contents are
    /// unspecified afterwards.
    pub fn reshape(&mut self, rows: usize, cols: usize) {
        self.rows = rows;
        self.cols = cols;
        self.data.resize(rows * cols, 0.0);
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Trainable values of a sparse network. Gradients and optimizer state use
/// the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Per layer, one value per edge in canonical order.
    pub weights: Vec<Vec<f64>>,
    /// Per layer, one value per output neuron.
    pub biases: Vec<Vec<f64>>,
    /// Per hidden layer (outputs of layers `0..L-1`), one activation per neuron.
    pub srelu: Vec<Vec<Srelu>>,
}

impl Params {
    pub fn zeros_for(t: &NetworkTopology) -> Self {
        let depth = t.depth();
        Self {
            weights: t.layers().iter().map(|l| vec![0.0; l.edge_count()]).collect(),
            biases: t.layers().iter().map(|l| vec![0.0; l.out_width()]).collect(),
            srelu: t.layers()[..depth - 1]
                .iter()
                .map(|l| vec![Srelu::ZERO; l.out_width()])
                .collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            srelu: self.srelu.iter().map(|s| vec![Srelu::ZERO; s.len()]).collect(),
        }
    }

    pub fn same_shape(&self, other: &Params) -> bool {
        let lens = |v: &Vec<Vec<f64>>| v.iter().map(Vec::len).collect::<Vec<_>>();
        lens(&self.weights) == lens(&other.weights)
            && lens(&self.biases) == lens(&other.biases)
            && self.srelu.iter().map(Vec::len).eq(other.srelu.iter().map(Vec::len))
    }

    fn matches(&self, t: &NetworkTopology) -> bool {
        self.same_shape(&Params::zeros_for(t))
    }

    /// Number of scalar values.
    pub fn len(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
            + 4 * self.srelu.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All values flattened: weights, then biases, then activation
    /// parameters, layer by layer.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.weights.iter().for_each(|w| out.extend_from_slice(w));
        self.biases.iter().for_each(|b| out.extend_from_slice(b));
        for layer in &self.srelu {
            for s in layer {
                out.extend_from_slice(&s.as_array());
            }
        }
        out
    }

    /// Inverse of [`Params::flatten`] into a value of the same shape.
    pub fn unflatten_like(&self, flat: &[f64]) -> Result<Params> {
        if flat.len() != self.len() {
            return Err(Error::Dimension(format!("expected {} values, got {}", self.len(), flat.len())));
        }
        let mut it = flat.iter().copied();
        let mut take = |n: usize| it.by_ref().take(n).collect::<Vec<f64>>();
        let weights = self.weights.iter().map(|w| take(w.len())).collect();
        let biases = self.biases.iter().map(|b| take(b.len())).collect();
        let srelu = self
            .srelu
            .iter()
            .map(|s| {
                take(4 * s.len())
                    .chunks_exact(4)
                    .map(|c| Srelu::from_array([c[0], c[1], c[2], c[3]]))
                    .collect()
            })
            .collect();
        Ok(Params { weights, biases, srelu })
    }
}

/// A topology together with its trainable values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseNet {
    topology: NetworkTopology,
    params: Params,
}

/// Intermediate values of one forward pass, stored feature-major
/// (`value[neuron * batch + sample]`) so the sparse kernels stream over the
/// batch. A pass can be reused across batches to avoid reallocation.
#[derive(Debug, Clone, Default)]
pub struct ForwardPass {
    batch: usize,
    /// `inputs[k]` feeds layer `k`; `inputs[0]` is the batch itself.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of every hidden layer.
    pre: Vec<Vec<f64>>,
    out: Vec<f64>,
    logits: Matrix,
}

impl ForwardPass {
    /// Output pre-activations, one row per sample.
    pub fn logits(&self) -> &Matrix {
        &self.logits
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }

    /// Activations entering layer `k` (`k = 0` is the input), one row per
    /// sample.
    pub fn layer_input(&self, k: usize) -> Matrix {
        let mut m = Matrix::default();
        from_feature_major(&self.inputs[k], self.batch, &mut m);
        m
    }
}

/// Reusable buffers for repeated gradient evaluations.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    pass: ForwardPass,
    grads: Option<Params>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
    probs: Matrix,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Gradients from the last [`SparseNet::loss_and_gradients_into`] call.
    pub fn grads(&self) -> &Params {
        self.grads.as_ref().expect("no gradients computed yet")
    }

    pub fn pass(&self) -> &ForwardPass {
        &self.pass
    }
}

/// Sum with four interleaved accumulators so the loop vectorizes.
fn sum(a: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.chunks_exact(4);
    let rest: f64 = chunks.remainder().iter().sum();
    for c in chunks {
        for i in 0..4 {
            acc[i] += c[i];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + rest
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let rest: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + rest
}

fn to_feature_major(m: &Matrix, out: &mut Vec<f64>) {
    let (rows, cols) = (m.rows(), m.cols());
    out.clear();
    out.reserve(rows * cols);
    for c in 0..cols {
        out.extend((0..rows).map(|r| m.data[r * cols + c]));
    }
}

fn from_feature_major(values: &[f64], batch: usize, m: &mut Matrix) {
    let cols = values.len().checked_div(batch).unwrap_or(0);
    m.reshape(batch, cols);
    for c in 0..cols {
        for (r, &v) in values[c * batch..(c + 1) * batch].iter().enumerate() {
            m.data[r * cols + c] = v;
        }
    }
}

/// Glorot-uniform bound computed from the dense layer shape.
pub fn glorot_limit(n_in: usize, n_out: usize) -> f64 {
    (6.0 / (n_in + n_out) as f64).sqrt()
}

/// Scale of the initial uniform weight distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightInit {
    /// `sqrt(6 / (n_in + n_out))` from the dense layer widths.
    #[default]
    DenseGlorot,
    /// The same bound with fan-in and fan-out replaced by the mean number of
    /// connections per target and per source neuron.
    SparseGlorot,
}

impl WeightInit {
    pub fn limit(self, layer: &LayerTopology) -> f64 {
        let (n_in, n_out) = (layer.in_width(), layer.out_width());
        match self {
            WeightInit::SparseGlorot if layer.edge_count() > 0 => {
                let e = layer.edge_count() as f64;
                (6.0 / (e / n_out as f64 + e / n_in as f64)).sqrt()
            }
            _ => glorot_limit(n_in, n_out),
        }
    }
}

pub(crate) fn sample_uniform(limit: f64, n: usize, rng: &mut crate::rng::Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-limit..limit)).collect()
}

/// Fresh parameters for a topology: edge weights uniform in
/// `[-sqrt(6 / (n_in + n_out)), sqrt(6 / (n_in + n_out))]`, zero biases,
/// and the default [`Srelu`] on every hidden neuron.
pub fn init_weights(t: &NetworkTopology, seed: u64) -> SparseNet {
    init_weights_with(t, seed, WeightInit::DenseGlorot)
}

/// [`init_weights`] with a choice of weight scale.
pub fn init_weights_with(t: &NetworkTopology, seed: u64, scheme: WeightInit) -> SparseNet {
    let mut params = Params::zeros_for(t);
    for (k, layer) in t.layers().iter().enumerate() {
        let mut r = rng(derive_seed(seed, k as u64));
        params.weights[k] = sample_uniform(scheme.limit(layer), layer.edge_count(), &mut r);
    }
    for layer in &mut params.srelu {
        layer.iter_mut().for_each(|s| *s = Srelu::default());
    }
    SparseNet {
        topology: t.clone(),
        params,
    }
}

impl SparseNet {
    pub fn new(topology: NetworkTopology, params: Params) -> Result<Self> {
        if !params.matches(&topology) {
            return Err(Error::Dimension(
                "parameter shapes do not match the topology".into(),
            ));
        }
        Ok(Self { topology, params })
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    pub fn into_parts(self) -> (NetworkTopology, Params) {
        (self.topology, self.params)
    }

    pub fn input_width(&self) -> usize {
        self.topology.widths()[0]
    }

    pub fn output_width(&self) -> usize {
        *self.topology.widths().last().expect("non-empty widths")
    }

    pub fn forward(&self, batch: &Matrix) -> Result<ForwardPass> {
        let mut pass = ForwardPass::default();
        self.forward_into(batch, &mut pass)?;
        Ok(pass)
    }

    /// [`SparseNet::forward`] into an existing pass, reusing its buffers.
    pub fn forward_into(&self, batch: &Matrix, pass: &mut ForwardPass) -> Result<()> {
        if batch.cols() != self.input_width() {
            return Err(Error::Dimension(format!(
                "batch has {} features, network expects {}",
                batch.cols(),
                self.input_width()
            )));
        }
        let depth = self.topology.depth();
        let n = batch.rows();
        pass.batch = n;
        pass.inputs.resize_with(depth, Vec::new);
        pass.pre.resize_with(depth - 1, Vec::new);
        to_feature_major(batch, &mut pass.inputs[0]);
        for k in 0..depth {
            if k + 1 == depth {
                self.layer_forward(k, &pass.inputs[k], n, &mut pass.out);
                from_feature_major(&pass.out, n, &mut pass.logits);
                break;
            }
            let (head, tail) = pass.inputs.split_at_mut(k + 1);
            let z = &mut pass.pre[k];
            self.layer_forward(k, &head[k], n, z);
            let a = &mut tail[0];
            a.clear();
            for (s, col) in self.params.srelu[k].iter().zip(z.chunks_exact(n.max(1))) {
                a.extend(col.iter().map(|&v| s.eval(v)));
            }
        }
        Ok(())
    }

    fn layer_forward(&self, k: usize, input: &[f64], n: usize, z: &mut Vec<f64>) {
        let layer = self.topology.layer(k);
        let w = &self.params.weights[k];
        let b = &self.params.biases[k];
        let src = layer.sources();
        let offsets = layer.offsets();
        z.clear();
        z.resize(layer.out_width() * n, 0.0);
        for (t, zt) in z.chunks_exact_mut(n.max(1)).enumerate().take(layer.out_width()) {
            zt.fill(b[t]);
            for e in offsets[t]..offsets[t + 1] {
                let s = src[e] as usize;
                let we = w[e];
                for (zv, &xv) in zt.iter_mut().zip(&input[s * n..(s + 1) * n]) {
                    *zv += we * xv;
                }
            }
        }
    }

    /// Gradients of the mean cross-entropy over the batch that produced
    /// `pass`. Gradient entries exist only for edges of the topology.
    pub fn backward(&self, pass: &ForwardPass, labels: &[usize]) -> Result<Params> {
        let mut grads = self.params.zeros_like();
        let mut scratch = (Vec::new(), Vec::new(), Matrix::default());
        self.backward_impl(pass, labels, &mut grads, &mut scratch)?;
        Ok(grads)
    }

    fn backward_impl(
        &self,
        pass: &ForwardPass,
        labels: &[usize],
        grads: &mut Params,
        (dz, da, probs): &mut (Vec<f64>, Vec<f64>, Matrix),
    ) -> Result<()> {
        let n = pass.batch;
        self.check_labels(n, labels)?;
        let depth = self.topology.depth();
        for layer in &mut grads.srelu {
            layer.iter_mut().for_each(|g| *g = Srelu::ZERO);
        }

        softmax_into(&pass.logits, probs);
        for (r, &y) in labels.iter().enumerate() {
            let row = probs.row_mut(r);
            row[y] -= 1.0;
            row.iter_mut().for_each(|v| *v /= n as f64);
        }
        to_feature_major(probs, dz);

        for k in (0..depth).rev() {
            let layer = self.topology.layer(k);
            let src = layer.sources();
            let offsets = layer.offsets();
            let w = &self.params.weights[k];
            let x = &pass.inputs[k];
            let gw = &mut grads.weights[k];
            let gb = &mut grads.biases[k];
            da.clear();
            if k > 0 {
                da.resize(x.len(), 0.0);
            }
            for t in 0..layer.out_width() {
                let dt = &dz[t * n..(t + 1) * n];
                gb[t] = sum(dt);
                for e in offsets[t]..offsets[t + 1] {
                    let s = src[e] as usize;
                    let xs = &x[s * n..(s + 1) * n];
                    gw[e] = dot(dt, xs);
                    if k > 0 {
                        let we = w[e];
                        for (a, &d) in da[s * n..(s + 1) * n].iter_mut().zip(dt) {
                            *a += we * d;
                        }
                    }
                }
            }
            if k > 0 {
                // back through the activation of hidden layer k - 1
                let z = &pass.pre[k - 1];
                let act = &self.params.srelu[k - 1];
                let gact = &mut grads.srelu[k - 1];
                for (j, (dcol, zcol)) in da.chunks_exact_mut(n.max(1)).zip(z.chunks_exact(n.max(1))).enumerate() {
                    gact[j] = srelu::backward_column(&act[j], zcol, dcol);
                }
                std::mem::swap(dz, da);
            }
        }
        Ok(())
    }

    /// Mean cross-entropy of one batch, with gradients left in `ws`.
    pub fn loss_and_gradients_into(&self, batch: &Matrix, labels: &[usize], ws: &mut Workspace) -> Result<f64> {
        self.forward_into(batch, &mut ws.pass)?;
        self.check_labels(batch.rows(), labels)?;
        let loss = cross_entropy(&ws.pass.logits, labels)?;
        let grads = match ws.grads.take() {
            Some(g) if g.same_shape(&self.params) => g,
            _ => self.params.zeros_like(),
        };
        let mut grads = grads;
        let mut scratch = (std::mem::take(&mut ws.delta), std::mem::take(&mut ws.delta_prev), std::mem::take(&mut ws.probs));
        let r = self.backward_impl(&ws.pass, labels, &mut grads, &mut scratch);
        (ws.delta, ws.delta_prev, ws.probs) = scratch;
        ws.grads = Some(grads);
        r.map(|_| loss)
    }

    fn check_labels(&self, rows: usize, labels: &[usize]) -> Result<()> {
        if labels.len() != rows {
            return Err(Error::Dimension(format!("{} labels for {rows} samples", labels.len())));
        }
        let classes = self.output_width();
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::Data(format!("label {bad} out of range for {classes} classes")));
        }
        Ok(())
    }

    /// Mean cross-entropy and its gradients for one batch.
    pub fn loss_and_gradients(&self, batch: &Matrix, labels: &[usize]) -> Result<(f64, Params)> {
        let pass = self.forward(batch)?;
        let loss = cross_entropy(pass.logits(), labels)?;
        let grads = self.backward(&pass, labels)?;
        Ok((loss, grads))
    }

    /// Mean cross-entropy of a batch.
    pub fn loss(&self, batch: &Matrix, labels: &[usize]) -> Result<f64> {
        let pass = self.forward(batch)?;
        self.check_labels(batch.rows(), labels)?;
        cross_entropy(pass.logits(), labels)
    }
}

fn softmax_into(logits: &Matrix, p: &mut Matrix) {
    p.reshape(logits.rows(), logits.cols());
    p.data.copy_from_slice(&logits.data);
    for r in 0..p.rows() {
        let row = p.row_mut(r);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
}

/// Mean softmax cross-entropy.
pub fn cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<f64> {
    if labels.len() != logits.rows() {
        return Err(Error::Dimension(format!("{} labels for {} rows", labels.len(), logits.rows())));
    }
    let mut total = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        let row = logits.row(r);
        if y >= row.len() {
            return Err(Error::Data(format!("label {y} out of range for {} classes", row.len())));
        }
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += lse - row[y];
    }
    Ok(total / labels.len().max(1) as f64)
}

/// Index of the largest logit in each row (first on ties).
pub fn argmax_rows(logits: &Matrix) -> Vec<usize> {
    (0..logits.rows())
        .map(|r| {
            let row = logits.row(r);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{er_init, ErConfig, LayerTopology};

    #[test]
    fn init_is_deterministic_and_sized() {
        let t = er_init(&[20, 10, 4], &ErConfig::new(3.0, 2).unwrap()).unwrap();
        let a = init_weights(&t, 5);
        assert_eq!(a, init_weights(&t, 5));
        assert_ne!(a, init_weights(&t, 6));
        for (k, w) in a.params().weights.iter().enumerate() {
            assert_eq!(w.len(), t.layer(k).edge_count());
            let limit = glorot_limit(t.widths()[k], t.widths()[k + 1]);
            assert!(w.iter().all(|v| v.abs() <= limit));
        }
        assert!(a.params().biases.iter().flatten().all(|&b| b == 0.0));
        assert!(a.params().srelu.iter().flatten().all(|s| *s == Srelu::default()));
        assert_eq!(a.params().srelu.len(), 1);
    }

    #[test]
    fn sparse_fan_widens_the_range() {
        let t = er_init(&[100, 100, 10], &ErConfig::new(2.0, 1).unwrap()).unwrap();
        let l = t.layer(0);
        let per_target = l.edge_count() as f64 / 100.0;
        let expect = (6.0 / (2.0 * per_target)).sqrt();
        assert!((WeightInit::SparseGlorot.limit(l) - expect).abs() < 1e-12);
        assert!(WeightInit::SparseGlorot.limit(l) > WeightInit::DenseGlorot.limit(l));
        let empty = LayerTopology::empty(4, 6);
        assert_eq!(WeightInit::SparseGlorot.limit(&empty), glorot_limit(4, 6));
    }

    #[test]
    fn zero_input_gives_zero_logits() {
        let t = er_init(&[6, 5, 3], &ErConfig::new(2.0, 1).unwrap()).unwrap();
        let net = init_weights(&t, 1);
        let pass = net.forward(&Matrix::zeros(2, 6)).unwrap();
        assert!(pass.logits().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_edge_chain_by_hand() {
        // x0 -> h0 -> y1 with weights 2 and -3
        let l0 = LayerTopology::from_edges(2, 1, [(0, 0)]).unwrap();
        let l1 = LayerTopology::from_edges(1, 2, [(0, 1)]).unwrap();
        let t = NetworkTopology::new(vec![2, 1, 2], vec![l0, l1]).unwrap();
        let mut params = Params::zeros_for(&t);
        params.weights = vec![vec![2.0], vec![-3.0]];
        params.biases = vec![vec![0.5], vec![0.1, 0.2]];
        params.srelu = vec![vec![Srelu::new(-1.0, 0.1, 2.0, 0.5)]];
        let net = SparseNet::new(t, params).unwrap();
        let batch = Matrix::from_vec(2, 2, vec![1.5, 9.0, -2.0, 9.0]).unwrap();
        let pass = net.forward(&batch).unwrap();
        // row 0: z = 3.5 -> srelu = 2 + 0.5 * 1.5 = 2.75 -> y1 = 0.2 - 8.25
        assert_eq!(pass.logits().row(0), &[0.1, 0.2 - 3.0 * 2.75]);
        // row 1: z = -3.5 -> srelu = -1 + 0.1 * -2.5 = -1.25 -> y1 = 0.2 + 3.75
        assert_eq!(pass.logits().row(1), &[0.1, 0.2 + 3.0 * 1.25]);
    }

    #[test]
    fn width_and_label_errors() {
        let t = er_init(&[4, 3, 2], &ErConfig::new(2.0, 1).unwrap()).unwrap();
        let net = init_weights(&t, 1);
        assert!(matches!(net.forward(&Matrix::zeros(1, 5)), Err(Error::Dimension(_))));
        let batch = Matrix::zeros(1, 4);
        assert!(matches!(net.loss_and_gradients(&batch, &[2]), Err(Error::Data(_))));
        assert!(net.loss_and_gradients(&batch, &[1, 0]).is_err());
        let empty = NetworkTopology::empty(&[4, 3, 2]).unwrap();
        assert!(t.edge_count() > 0);
        assert!(matches!(SparseNet::new(t, Params::zeros_for(&empty)), Err(Error::Dimension(_))));
    }

    #[test]
    fn flatten_roundtrip() {
        let t = er_init(&[5, 4, 3], &ErConfig::new(2.0, 3).unwrap()).unwrap();
        let net = init_weights(&t, 9);
        let flat = net.params().flatten();
        assert_eq!(flat.len(), net.params().len());
        assert_eq!(&net.params().unflatten_like(&flat).unwrap(), net.params());
    }
}
