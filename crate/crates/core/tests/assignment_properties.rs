use proptest::prelude::*;
use ris_noma::assign::{cluster_ues, lsa_solve, partition_waves, AlphaRule};
use ris_noma::channel::realize_channels;
use ris_noma::sinr::m_constant;
use ris_noma::specgraph::{build_original_graph, reliability, uav_vertex};
use ris_noma::topology::generate_topology;
use ris_noma::SimConfig;

fn brute_force(o: &[Vec<f64>]) -> f64 {
    let rows = o.len();
    let cols = o[0].len();
    let mut best = f64::NEG_INFINITY;
    fn go(o: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == o.len() {
            *best = best.max(acc);
            return;
        }
        let free = used.iter().filter(|&&u| !u).count();
        // A row may stay unmatched only when columns are scarce.
        if o.len() - row > free {
            go(o, row + 1, used, acc, best);
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                go(o, row + 1, used, acc + o[row][j], best);
                used[j] = false;
            }
        }
    }
    go(o, 0, &mut vec![false; cols], 0.0, &mut best);
    let _ = rows;
    best
}

fn matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=7, 1usize..=7).prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec((0i32..500).prop_map(f64::from), c), r))
}

proptest! {
    #[test]
    fn assignment_matches_brute_force(o in matrix()) {
        let cols = o[0].len();
        let choice = lsa_solve(&o).unwrap();
        prop_assert_eq!(choice.len(), o.len());
        let mut seen = vec![false; cols];
        let mut total = 0.0;
        for (i, c) in choice.iter().enumerate() {
            if let Some(j) = *c {
                prop_assert!(!seen[j]);
                seen[j] = true;
                total += o[i][j];
            }
        }
        prop_assert_eq!(choice.iter().filter(|c| c.is_some()).count(), o.len().min(cols));
        prop_assert_eq!(total, brute_force(&o));
    }

    #[test]
    fn waves_cover_a_prefix_in_order(n in 0usize..30, width in 1usize..5, size in 1usize..5) {
        let sorted: Vec<usize> = (0..n).rev().collect();
        let waves = partition_waves(&sorted, width, size);
        prop_assert!(waves.len() <= size);
        prop_assert!(waves.iter().all(|w| w.len() <= width));
        let flat: Vec<usize> = waves.concat();
        prop_assert_eq!(&flat[..], &sorted[..flat.len()]);
        prop_assert_eq!(flat.len(), n.min(width * size));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn clustering_respects_the_constraints(seed in any::<u64>(), size in 1usize..4, ris in 1usize..4) {
        let cfg = SimConfig { num_ues: 12, num_uavs: 6, num_ris: ris, cluster_size: size, elements: 64, area_side: 200.0, ..SimConfig::default() };
        let topo = generate_topology(&cfg, seed).unwrap();
        let ch = realize_channels(&topo, &cfg, seed).unwrap();
        let g = build_original_graph(&topo, &ch, &cfg).unwrap();
        let uavs: Vec<usize> = (0..cfg.num_uavs).map(|a| uav_vertex(cfg.num_ues, a)).collect();
        let rel = reliability(&g, &uavs).unwrap();
        let m = m_constant(cfg.f1, cfg.f2).unwrap();
        for rule in [AlphaRule::EqualSplit, AlphaRule::ClosedForm] {
            let a = cluster_ues(&topo, &ch, &rel.normalized, &cfg, m, rule).unwrap();
            prop_assert!(a.check_constraints(size).is_ok());
            prop_assert!(a.clusters.len() <= ris);
        }
    }
}
