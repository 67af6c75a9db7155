use super::{PruneCriterion, RegrowInit, SetConfig};
use crate::error::{Error, Result};
use crate::network::{sample_uniform, Params, SparseNet, WeightInit};
use crate::rng::{rng, Rng};
use crate::topology::{sample_free_positions, LayerTopology};

/// `floor(zeta * count)`, guarded against representation error.
pub fn prune_count(zeta: f64, count: usize) -> usize {
    ((zeta * count as f64 + 1e-9).floor().max(0.0) as usize).min(count)
}

/// What happened to one layer: surviving edges as `(old index, new index)`
/// pairs in canonical order, and the flat positions removed and added.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerRewiring {
    pub kept: Vec<(usize, usize)>,
    pub pruned: Vec<usize>,
    pub grown: Vec<usize>,
    /// New edge indices of the grown positions.
    pub grown_index: Vec<usize>,
    pub new_len: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rewiring {
    pub layers: Vec<LayerRewiring>,
}

impl Rewiring {
    /// Carry per-edge state across the rewiring: survivors keep their value,
    /// grown edges get `fresh(layer)`. Biases and activation parameters are
    /// copied unchanged.
    pub fn carry(&self, old: &Params, mut fresh: impl FnMut(usize) -> f64) -> Result<Params> {
        if old.weights.len() != self.layers.len() {
            return Err(Error::Dimension("rewiring and parameters differ in depth".into()));
        }
        let mut out = old.clone();
        for (k, lr) in self.layers.iter().enumerate() {
            let mut w = vec![0.0; lr.new_len];
            for &(o, n) in &lr.kept {
                w[n] = old.weights[k][o];
            }
            for &n in &lr.grown_index {
                w[n] = fresh(k);
            }
            out.weights[k] = w;
        }
        Ok(out)
    }
}

/// Indices (into the canonical edge list) of the `n` weakest weights.
fn weakest(weights: &[f64], n: usize, criterion: PruneCriterion) -> Vec<usize> {
    let by_abs = |idx: &mut Vec<usize>| idx.sort_by(|&a, &b| weights[a].abs().total_cmp(&weights[b].abs()).then(a.cmp(&b)));
    match criterion {
        PruneCriterion::Magnitude => {
            let mut idx: Vec<usize> = (0..weights.len()).collect();
            by_abs(&mut idx);
            idx.truncate(n);
            idx
        }
        PruneCriterion::SignedExtremes => {
            let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = (0..weights.len()).partition(|&i| weights[i] >= 0.0);
            by_abs(&mut pos);
            by_abs(&mut neg);
            let mut take_pos = n.div_ceil(2).min(pos.len());
            let take_neg = (n - take_pos).min(neg.len());
            take_pos = n - take_neg;
            let mut idx: Vec<usize> = pos[..take_pos].iter().chain(&neg[..take_neg]).copied().collect();
            idx.sort_unstable();
            idx
        }
    }
}

fn rewire_layer(
    k: usize,
    layer: &LayerTopology,
    weights: &[f64],
    cfg: &SetConfig,
    rng: &mut Rng,
    skip_complete: bool,
) -> Result<Option<(LayerTopology, LayerRewiring, Vec<f64>)>> {
    let count = layer.edge_count();
    let n = prune_count(cfg.prune_rate, count);
    if n == 0 {
        return Ok(None);
    }
    if count == layer.capacity() {
        if skip_complete {
            return Ok(None);
        }
        return Err(Error::Regrow {
            layer: k,
            needed: n,
            available: 0,
        });
    }
    let mut remove = vec![false; count];
    for i in weakest(weights, n, cfg.criterion) {
        remove[i] = true;
    }
    let positions: Vec<usize> = layer.positions().collect();
    let mut occupied = layer.occupancy();
    let mut pruned = Vec::with_capacity(n);
    for (i, &p) in positions.iter().enumerate() {
        if remove[i] {
            occupied[p] = false;
            pruned.push(p);
        }
    }
    let grown = sample_free_positions(&occupied, n, rng);

    // merge survivors and grown positions, both increasing
    let mut merged = Vec::with_capacity(count);
    let mut kept = Vec::with_capacity(count - n);
    let mut grown_index = Vec::with_capacity(n);
    let survivors = positions.iter().enumerate().filter(|(i, _)| !remove[*i]);
    let mut s = survivors.peekable();
    let mut g = grown.iter().peekable();
    loop {
        let take_survivor = match (s.peek(), g.peek()) {
            (Some((_, &sp)), Some(&&gp)) => sp < gp,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        if take_survivor {
            let (old, &p) = s.next().expect("peeked");
            kept.push((old, merged.len()));
            merged.push(p);
        } else {
            grown_index.push(merged.len());
            merged.push(*g.next().expect("peeked"));
        }
    }
    let new_layer = LayerTopology::from_sorted_positions(layer.in_width(), layer.out_width(), merged);
    let fresh = match cfg.regrow_init {
        RegrowInit::Glorot => sample_uniform(WeightInit::DenseGlorot.limit(layer), n, rng),
        RegrowInit::Zero => vec![0.0; n],
    };
    let lr = LayerRewiring {
        kept,
        pruned,
        grown,
        grown_index,
        new_len: count,
    };
    Ok(Some((new_layer, lr, fresh)))
}

pub(super) fn rewire_impl(net: &SparseNet, cfg: &SetConfig, rng: &mut Rng, skip_complete: bool) -> Result<(SparseNet, Rewiring)> {
    cfg.validate()?;
    let t = net.topology();
    let mut layers = Vec::with_capacity(t.depth());
    let mut rewiring = Rewiring::default();
    let mut fresh: Vec<std::vec::IntoIter<f64>> = Vec::with_capacity(t.depth());
    for (k, layer) in t.layers().iter().enumerate() {
        match rewire_layer(k, layer, &net.params().weights[k], cfg, rng, skip_complete)? {
            Some((l, lr, w)) => {
                layers.push(l);
                rewiring.layers.push(lr);
                fresh.push(w.into_iter());
            }
            None => {
                let n = layer.edge_count();
                layers.push(layer.clone());
                rewiring.layers.push(LayerRewiring {
                    kept: (0..n).map(|i| (i, i)).collect(),
                    new_len: n,
                    ..LayerRewiring::default()
                });
                fresh.push(Vec::new().into_iter());
            }
        }
    }
    let params = rewiring.carry(net.params(), |k| fresh[k].next().expect("one value per grown edge"))?;
    let topology = t.replace_layers(layers);
    Ok((SparseNet::new(topology, params)?, rewiring))
}

/// Prune the weakest `floor(prune_rate * edges)` connections of every layer
/// and grow as many at uniformly random positions that are empty after
/// pruning. Fails with [`Error::Regrow`] on a complete layer.
pub fn rewire(net: &SparseNet, cfg: &SetConfig, rng: &mut Rng) -> Result<(SparseNet, Rewiring)> {
    rewire_impl(net, cfg, rng, false)
}

/// [`rewire`] by magnitude with Glorot-initialised regrowth and a fresh
/// random stream.
pub fn prune_and_regrow(net: &SparseNet, zeta: f64, seed: u64) -> Result<SparseNet> {
    let cfg = SetConfig {
        prune_rate: zeta,
        ..SetConfig::default()
    };
    rewire(net, &cfg, &mut rng(seed)).map(|(n, _)| n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::init_weights;
    use crate::topology::{er_init, ErConfig, NetworkTopology};

    fn five_edge_net(weights: Vec<f64>) -> SparseNet {
        let l0 = LayerTopology::from_edges(4, 3, [(0, 0), (1, 0), (2, 1), (3, 1), (0, 2)]).unwrap();
        let t = NetworkTopology::new(vec![4, 3], vec![l0]).unwrap();
        let mut p = Params::zeros_for(&t);
        p.weights[0] = weights;
        SparseNet::new(t, p).unwrap()
    }

    #[test]
    fn prunes_the_smallest_magnitude() {
        let net = five_edge_net(vec![0.5, -0.01, 0.3, 0.02, -0.7]);
        let (next, rw) = rewire(&net, &SetConfig::default(), &mut rng(1)).unwrap();
        let lr = &rw.layers[0];
        // edge 1 is (source 1, target 0), flat position 1
        assert_eq!(lr.pruned, vec![1]);
        assert_eq!(lr.grown.len(), 1);
        assert_eq!(next.topology().edge_count(), 5);
        for &(o, n) in &lr.kept {
            assert_eq!(next.params().weights[0][n], net.params().weights[0][o]);
        }
    }

    #[test]
    fn floor_zero_is_a_no_op() {
        let net = five_edge_net(vec![0.5, -0.01, 0.3, 0.02, -0.7]);
        assert_eq!(prune_count(0.19, 5), 0);
        assert_eq!(prune_and_regrow(&net, 0.19, 3).unwrap(), net);
    }

    #[test]
    fn signed_extremes_takes_both_sides() {
        let w = [0.5, -0.01, 0.3, 0.02, -0.7, -0.2];
        assert_eq!(weakest(&w, 2, PruneCriterion::SignedExtremes), vec![1, 3]);
        assert_eq!(weakest(&w, 2, PruneCriterion::Magnitude), vec![1, 3]);
        assert_eq!(weakest(&w, 3, PruneCriterion::SignedExtremes), vec![1, 2, 3]);
        assert_eq!(weakest(&w, 3, PruneCriterion::Magnitude), vec![1, 3, 5]);
    }

    #[test]
    fn complete_layer_cannot_regrow() {
        let t = NetworkTopology::fully_connected(&[3, 2]).unwrap();
        let net = init_weights(&t, 0);
        assert!(matches!(prune_and_regrow(&net, 0.5, 0), Err(Error::Regrow { layer: 0, available: 0, .. })));
        let (same, _) = rewire_impl(&net, &SetConfig::default(), &mut rng(0), true).unwrap();
        assert_eq!(same, net);
    }

    #[test]
    fn density_preserved_and_grown_positions_were_empty() {
        let t = er_init(&[30, 20, 5], &ErConfig::new(3.0, 8).unwrap()).unwrap();
        let net = init_weights(&t, 8);
        let (next, rw) = rewire(&net, &SetConfig::default(), &mut rng(9)).unwrap();
        assert_eq!(next.topology().layer_edge_counts(), t.layer_edge_counts());
        for (k, lr) in rw.layers.iter().enumerate() {
            assert_eq!(lr.pruned.len(), prune_count(0.2, t.layer(k).edge_count()));
            let old: std::collections::HashSet<usize> = t.layer(k).positions().collect();
            let pruned: std::collections::HashSet<usize> = lr.pruned.iter().copied().collect();
            for p in &lr.grown {
                assert!(!old.contains(p) || pruned.contains(p));
            }
        }
    }
}
