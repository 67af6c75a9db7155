//! Independent reference implementations used as test oracles.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sparsetopo::network::{Matrix, Params, SparseNet, Srelu};
use sparsetopo::topology::{LayerTopology, NetworkTopology};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense weight matrices `w[k][target][source]`, zero off the support.
pub fn dense_weights(net: &SparseNet) -> Vec<Vec<Vec<f64>>> {
    let t = net.topology();
    t.layers()
        .iter()
        .zip(&net.params().weights)
        .map(|(layer, w)| {
            let mut m = vec![vec![0.0; layer.in_width()]; layer.out_width()];
            for ((s, tgt), &v) in layer.edges().zip(w) {
                m[tgt][s] = v;
            }
            m
        })
        .collect()
}

fn srelu_ref(p: &Srelu, x: f64) -> f64 {
    if x <= p.t_left {
        p.t_left + p.a_left * (x - p.t_left)
    } else if x >= p.t_right {
        p.t_right + p.a_right * (x - p.t_right)
    } else {
        x
    }
}

/// Pre-activations of every layer for one sample, and the logits.
pub fn dense_forward_sample(net: &SparseNet, x: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let w = dense_weights(net);
    let p = net.params();
    let depth = w.len();
    let mut h = x.to_vec();
    let mut pre = Vec::new();
    for k in 0..depth {
        let z: Vec<f64> = w[k]
            .iter()
            .zip(&p.biases[k])
            .map(|(row, b)| row.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() + b)
            .collect();
        pre.push(z.clone());
        h = if k + 1 < depth {
            z.iter().zip(&p.srelu[k]).map(|(&z, s)| srelu_ref(s, z)).collect()
        } else {
            z
        };
    }
    (pre, h)
}

pub fn dense_logits(net: &SparseNet, batch: &Matrix) -> Vec<Vec<f64>> {
    (0..batch.rows()).map(|r| dense_forward_sample(net, batch.row(r)).1).collect()
}

pub fn dense_loss(net: &SparseNet, batch: &Matrix, labels: &[usize]) -> f64 {
    let logits = dense_logits(net, batch);
    let mut total = 0.0;
    for (z, &y) in logits.iter().zip(labels) {
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += lse - z[y];
    }
    total / labels.len() as f64
}

/// Reference backward pass by hand-written dense chain rule.
pub fn dense_gradients(net: &SparseNet, batch: &Matrix, labels: &[usize]) -> Params {
    let w = dense_weights(net);
    let p = net.params();
    let t = net.topology();
    let depth = w.len();
    let n = batch.rows() as f64;
    let mut gw: Vec<Vec<Vec<f64>>> = w.iter().map(|m| vec![vec![0.0; m[0].len()]; m.len()]).collect();
    let mut g = p.zeros_like();
    for r in 0..batch.rows() {
        let x = batch.row(r);
        let (pre, logits) = dense_forward_sample(net, x);
        let mut inputs = vec![x.to_vec()];
        for k in 0..depth - 1 {
            inputs.push(pre[k].iter().zip(&p.srelu[k]).map(|(&z, s)| srelu_ref(s, z)).collect());
        }
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|v| (v - m).exp()).collect();
        let sum: f64 = e.iter().sum();
        let mut delta: Vec<f64> = e.iter().map(|v| v / sum / n).collect();
        delta[labels[r]] -= 1.0 / n;
        for k in (0..depth).rev() {
            for (i, d) in delta.iter().enumerate() {
                g.biases[k][i] += d;
                for (j, h) in inputs[k].iter().enumerate() {
                    gw[k][i][j] += d * h;
                }
            }
            if k == 0 {
                break;
            }
            let up: Vec<f64> = (0..w[k][0].len())
                .map(|j| (0..w[k].len()).map(|i| w[k][i][j] * delta[i]).sum())
                .collect();
            delta = vec![0.0; up.len()];
            for (j, &u) in up.iter().enumerate() {
                let s = &p.srelu[k - 1][j];
                let z = pre[k - 1][j];
                let gs = &mut g.srelu[k - 1][j];
                if z <= s.t_left {
                    delta[j] = u * s.a_left;
                    if z != s.t_left {
                        gs.t_left += u * (1.0 - s.a_left);
                        gs.a_left += u * (z - s.t_left);
                    }
                } else if z >= s.t_right {
                    delta[j] = u * s.a_right;
                    if z != s.t_right {
                        gs.t_right += u * (1.0 - s.a_right);
                        gs.a_right += u * (z - s.t_right);
                    }
                } else {
                    delta[j] = u;
                }
            }
        }
    }
    for (k, layer) in t.layers().iter().enumerate() {
        g.weights[k] = layer.edges().map(|(s, tgt)| gw[k][tgt][s]).collect();
    }
    g
}

/// Random parameters with SReLU knots and slopes away from degenerate values.
pub fn random_params(t: &NetworkTopology, seed: u64) -> Params {
    let mut r = rng(seed);
    let mut p = Params::zeros_for(t);
    for w in &mut p.weights {
        w.iter_mut().for_each(|v| *v = r.gen_range(-1.0..1.0));
    }
    for b in &mut p.biases {
        b.iter_mut().for_each(|v| *v = r.gen_range(-0.5..0.5));
    }
    for layer in &mut p.srelu {
        for s in layer.iter_mut() {
            *s = Srelu::new(
                r.gen_range(-1.0..-0.1),
                r.gen_range(0.05..0.5),
                r.gen_range(0.3..1.5),
                r.gen_range(0.5..1.5),
            );
        }
    }
    p
}

pub fn random_batch(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| r.gen_range(-2.0..2.0)).collect()).unwrap()
}

/// Central differences of the loss over every flattened parameter.
pub fn finite_differences(net: &SparseNet, batch: &Matrix, labels: &[usize], step: f64) -> Vec<f64> {
    let flat = net.params().flatten();
    let t = net.topology().clone();
    (0..flat.len())
        .map(|i| {
            let eval = |delta: f64| {
                let mut f = flat.clone();
                f[i] += delta;
                let p = net.params().unflatten_like(&f).unwrap();
                dense_loss(&SparseNet::new(t.clone(), p).unwrap(), batch, labels)
            };
            (eval(step) - eval(-step)) / (2.0 * step)
        })
        .collect()
}

/// Smallest distance from any hidden pre-activation to a SReLU knot.
pub fn knot_margin(net: &SparseNet, batch: &Matrix) -> f64 {
    let p = net.params();
    let mut margin = f64::INFINITY;
    for r in 0..batch.rows() {
        let (pre, _) = dense_forward_sample(net, batch.row(r));
        for (k, layer) in p.srelu.iter().enumerate() {
            for (s, &z) in layer.iter().zip(&pre[k]) {
                margin = margin.min((z - s.t_left).abs()).min((z - s.t_right).abs());
            }
        }
    }
    margin
}

/// Random topology with each edge present with probability `p`.
pub fn random_topology(widths: &[usize], p: f64, seed: u64) -> NetworkTopology {
    let mut r = rng(seed);
    let layers = widths
        .windows(2)
        .map(|w| {
            let mut edges = Vec::new();
            for t in 0..w[1] {
                for s in 0..w[0] {
                    if r.gen_bool(p) {
                        edges.push((s, t));
                    }
                }
            }
            LayerTopology::from_edges(w[0], w[1], edges).unwrap()
        })
        .collect();
    NetworkTopology::new(widths.to_vec(), layers).unwrap()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact NED as a reduced fraction `(num, den)`; `(0, 1)` for two empty sets.
pub fn ned_fraction(a: &[usize], b: &[usize]) -> (u64, u64) {
    let inter = a.iter().filter(|x| b.contains(x)).count() as u64;
    let union = a.len() as u64 + b.len() as u64 - inter;
    if union == 0 {
        return (0, 1);
    }
    let diff = union - inter;
    let g = gcd(diff, union).max(1);
    (diff / g, union / g)
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Minimum over all permutations of `sum_i cost[i][perm[i]]`, exact for
/// integer costs.
pub fn brute_force_min(cost: &[Vec<u64>]) -> u64 {
    permutations(cost.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum())
        .min()
        .unwrap_or(0)
}

/// Integer cost matrix `L * ned(inputs1[i], relabelled inputs2[j])` with a
/// common denominator `L`, where `prev[j2] = j1` relabels layer 2's inputs.
pub fn scaled_layer_costs(l1: &LayerTopology, l2: &LayerTopology, prev: &[usize]) -> (Vec<Vec<u64>>, u64) {
    let l: u64 = (1..=l1.in_width() as u64).fold(1, |acc, x| acc / gcd(acc, x) * x);
    let set1 = |i: usize| l1.inputs(i).iter().map(|&s| s as usize).collect::<Vec<_>>();
    let set2 = |j: usize| l2.inputs(j).iter().map(|&s| prev[s as usize]).collect::<Vec<_>>();
    let cost = (0..l1.out_width())
        .map(|i| {
            (0..l2.out_width())
                .map(|j| {
                    let (n, d) = ned_fraction(&set1(i), &set2(j));
                    n * (l / d)
                })
                .collect()
        })
        .collect();
    (cost, l)
}

/// Dataset cache: `SPARSETOPO_DATA`, else `data/` at the workspace root.
pub fn data_dir() -> std::path::PathBuf {
    std::env::var_os(sparsetopo::data::DATA_ENV).map_or_else(
        || std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"),
        std::path::PathBuf::from,
    )
}

pub fn fashion_mnist_present() -> bool {
    data_dir().join("fashion-mnist").join("SHA256SUMS").exists()
}
