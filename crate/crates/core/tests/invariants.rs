use std::sync::Arc;

use onetwo::census::{census, Adjacency, ObservationWindow};
use onetwo::partition::{is_compatible, Partition3};
use onetwo::sampler::{chain_rng, init_chain, SamplerOptions};
use onetwo::{Configuration, Geometry, LocalCode, Weights};
use proptest::prelude::*;
use rand::Rng;

fn random_bits(g: &Arc<Geometry>, seed: u64) -> Configuration {
    let mut rng = chain_rng(seed, 0);
    let bits: Vec<bool> = (0..g.edge_count()).map(|_| rng.gen()).collect();
    Configuration::from_bits(g.clone(), &bits).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(l in 2usize..7, seed in any::<u64>()) {
        let g = Arc::new(Geometry::torus(l).unwrap());
        let cfg = random_bits(&g, seed);
        let back = Configuration::from_text(&cfg.to_text()).unwrap();
        prop_assert_eq!(back.hamming(&cfg), 0);
        prop_assert_eq!(back.to_text(), cfg.to_text());
    }

    #[test]
    fn flip_is_an_involution(l in 2usize..6, seed in any::<u64>(), e in any::<prop::sample::Index>()) {
        let g = Arc::new(Geometry::torus(l).unwrap());
        let cfg = random_bits(&g, seed);
        let e = e.index(g.edge_count());
        let once = cfg.flipped(e);
        prop_assert_eq!(once.hamming(&cfg), 1);
        prop_assert_eq!(once.flipped(e).hamming(&cfg), 0);
    }

    #[test]
    fn weight_is_product_of_local_weights(l in 2usize..5, seed in any::<u64>()) {
        let g = Arc::new(Geometry::torus(l).unwrap());
        let mut chain = init_chain(g.clone(), Weights::new(2.0, 1.0, 0.5).unwrap(), seed, SamplerOptions::default()).unwrap();
        chain.heat_bath_sweep();
        let cfg = chain.config().clone();
        prop_assert!(cfg.is_valid());
        let w = Weights::new(2.0f64, 1.0, 0.5).unwrap();
        let direct: f64 = (0..g.vertex_count()).map(|v| w.weight_of(cfg.code_at(v))).product();
        prop_assert!((cfg.weight(&w) - direct).abs() <= 1e-12 * direct);
        prop_assert!((cfg.log_weight(&w) - direct.ln()).abs() < 1e-9);
    }

    #[test]
    fn census_partitions_the_code_class(l in 3usize..7, seed in any::<u64>()) {
        let g = Arc::new(Geometry::torus(l).unwrap());
        let mut chain = init_chain(g.clone(), Weights::<f64>::uniform(), seed, SamplerOptions::default()).unwrap();
        chain.heat_bath_sweep();
        let cfg = chain.config();
        let window = ObservationWindow::whole(&g);
        for code in LocalCode::VALID {
            let clusters = census(cfg, code, &window, Adjacency::Lattice).unwrap();
            let total: usize = clusters.iter().map(|c| c.size).sum();
            let expected = (0..g.vertex_count()).filter(|&v| cfg.code_at(v) == code).count();
            prop_assert_eq!(total, expected);
        }
    }

    #[test]
    fn compatibility_ignores_block_names(
        labels_p in prop::collection::vec(0u8..3, 3..9),
        labels_q in prop::collection::vec(0u8..3, 3..9),
        perm in prop::sample::select(vec![[0u8, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]),
    ) {
        let k = labels_p.len().min(labels_q.len());
        let (lp, lq) = (&labels_p[..k], &labels_q[..k]);
        prop_assume!((0..3).all(|l| lp.contains(&l) && lq.contains(&l)));
        let ground: Vec<usize> = (0..k).collect();
        let p = Partition3::from_labels(ground.clone(), lp.to_vec()).unwrap();
        let q = Partition3::from_labels(ground.clone(), lq.to_vec()).unwrap();
        let renamed = Partition3::from_labels(ground, lp.iter().map(|&l| perm[l as usize]).collect()).unwrap();
        prop_assert_eq!(&renamed, &p);
        prop_assert_eq!(is_compatible(&p, &q).unwrap(), is_compatible(&q, &p).unwrap());
        prop_assert!(!is_compatible(&p, &p).unwrap());
    }
}
