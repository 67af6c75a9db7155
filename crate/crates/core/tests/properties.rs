mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use sparsetopo::metric::{compare_networks, ned, solve_assignment, CostMatrix};
use sparsetopo::network::init_weights;
use sparsetopo::settrain::{prune_and_regrow, prune_count};
use sparsetopo::topology::{perturb, read_topology, write_topology, NetworkTopology, TopologyMeta};

fn set() -> impl Strategy<Value = Vec<u16>> {
    btree_set(0u16..24, 0..12).prop_map(|s| s.into_iter().collect())
}

fn topology() -> impl Strategy<Value = NetworkTopology> {
    (vec(1usize..7, 3..5), 0.1f64..0.9, any::<u64>()).prop_map(|(widths, p, seed)| random_topology(&widths, p, seed))
}

fn edge_set(t: &NetworkTopology, k: usize) -> BTreeSet<(usize, usize)> {
    t.layer(k).edges().collect()
}

proptest! {
    #[test]
    fn ned_is_a_bounded_metric(a in set(), b in set(), c in set()) {
        let ab = ned(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ned(&a, &a), 0.0);
        prop_assert_eq!(ab, ned(&b, &a));
        prop_assert_eq!(ab == 0.0, a == b);
        prop_assert!(ab <= ned(&a, &c) + ned(&c, &b) + 1e-12);
    }

    #[test]
    fn ned_equals_exact_fraction(a in set(), b in set()) {
        let ua: Vec<usize> = a.iter().map(|&x| x as usize).collect();
        let ub: Vec<usize> = b.iter().map(|&x| x as usize).collect();
        let (num, den) = ned_fraction(&ua, &ub);
        prop_assert_eq!(ned(&a, &b), num as f64 / den as f64);
    }

    #[test]
    fn assignment_matches_brute_force(n in 1usize..=6, values in vec(0u64..50, 36)) {
        let cost: Vec<Vec<u64>> = (0..n).map(|i| values[i * n..(i + 1) * n].to_vec()).collect();
        let m = CostMatrix::new(n, n, cost.iter().flatten().map(|&v| v as f64).collect()).unwrap();
        let a = solve_assignment(&m);
        let mut seen = vec![false; n];
        for &i in &a.mapping {
            prop_assert!(!seen[i]);
            seen[i] = true;
        }
        prop_assert_eq!(a.total_cost, brute_force_min(&cost) as f64);
    }

    #[test]
    fn distance_to_self_is_zero_and_bounded(t in topology(), seed in any::<u64>()) {
        prop_assert_eq!(compare_networks(&t, &t).unwrap().nnstd, 0.0);
        let other = random_topology(t.widths(), 0.5, seed);
        let d = compare_networks(&t, &other).unwrap();
        prop_assert!((0.0..=1.0).contains(&d.nnstd));
        prop_assert!(d.per_layer.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn perturb_preserves_counts_and_moves_edges(t in topology(), f in 0.01f64..0.5, seed in any::<u64>()) {
        let space = t.layers().iter().all(|l| l.edge_count() > 0 && l.edge_count() * 2 <= l.capacity());
        prop_assume!(space);
        let p = perturb(&t, f, seed).unwrap();
        prop_assert_eq!(p.layer_edge_counts(), t.layer_edge_counts());
        for k in 0..t.depth() {
            let (a, b) = (edge_set(&t, k), edge_set(&p, k));
            let moved = a.difference(&b).count();
            let want = ((f * a.len() as f64 - 1e-9).ceil() as usize).max(1).min(a.len());
            prop_assert_eq!(moved, want);
            prop_assert_eq!(a.symmetric_difference(&b).count(), 2 * want);
        }
        prop_assert_eq!(perturb(&t, f, seed).unwrap(), p);
    }

    #[test]
    fn topology_text_roundtrips(t in topology(), eps in proptest::option::of(0.1f64..40.0), seed in proptest::option::of(any::<u64>())) {
        let meta = TopologyMeta { epsilon: eps, seed };
        let mut buf = Vec::new();
        write_topology(&mut buf, &t, &meta).unwrap();
        prop_assert_eq!(read_topology(buf.as_slice()).unwrap(), (t, meta));
    }

    #[test]
    fn prune_and_regrow_keeps_density(t in topology(), zeta in 0.0f64..0.9, seed in any::<u64>()) {
        let net = init_weights(&t, seed);
        let room = t.layers().iter().all(|l| l.capacity() - l.edge_count() >= prune_count(zeta, l.edge_count()));
        prop_assume!(room);
        let next = prune_and_regrow(&net, zeta, seed).unwrap();
        prop_assert_eq!(next.topology().layer_edge_counts(), t.layer_edge_counts());
        for k in 0..t.depth() {
            let kept = edge_set(&t, k).intersection(&edge_set(next.topology(), k)).count();
            prop_assert!(kept >= t.layer(k).edge_count() - prune_count(zeta, t.layer(k).edge_count()));
        }
    }
}
