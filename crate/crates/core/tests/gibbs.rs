mod common;

use std::collections::HashMap;

use onetwo::exact::{exact_distribution, gibbs_conditional, Enumeration};
use onetwo::sampler::{block_plan, Chain, SamplerOptions};
use onetwo::{Configuration, Weights};

use common::torus;

fn mask_of(cfg: &Configuration, edges: &[usize]) -> u64 {
    edges.iter().enumerate().fold(0, |m, (p, &e)| m | (cfg.is_present(e) as u64) << p)
}

#[test]
fn conditionals_agree_with_the_joint_law() {
    let g = torus(3);
    let w = Weights::new(2.0, 1.0, 0.5).unwrap();
    let joint = exact_distribution(&g, &w, 64).unwrap();
    let e = Enumeration::new(&g, 64).unwrap();
    let window = block_plan(&g, 4, 2).unwrap().free_edges().to_vec();
    let outside: Vec<usize> = (0..g.edge_count()).filter(|e| !window.contains(e)).collect();

    // group the joint law by the outside pattern
    let mut groups: HashMap<u64, Vec<(u64, f64)>> = HashMap::new();
    for (&m, &p) in joint.support.iter().zip(&joint.probabilities) {
        let cfg = e.configuration(m);
        groups.entry(mask_of(&cfg, &outside)).or_default().push((mask_of(&cfg, &window), p));
    }
    let mut checked = 0;
    for (&m, &_p) in joint.support.iter().zip(&joint.probabilities).step_by(7) {
        let cfg = e.configuration(m);
        let group = &groups[&mask_of(&cfg, &outside)];
        let total: f64 = group.iter().map(|(_, p)| p).sum();
        let cond = gibbs_conditional(&cfg, &window, &w).unwrap();
        let mut tv = 0.0;
        for (wm, p) in group {
            tv += (cond.probability_of(*wm) - p / total).abs();
        }
        // mass the conditional puts outside the group's support
        let covered: f64 = group.iter().map(|(wm, _)| cond.probability_of(*wm)).sum();
        tv += 1.0 - covered;
        assert!(tv / 2.0 < 1e-10, "TV {tv}");
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn block_kernel_is_reversible() {
    let g = torus(2);
    let w = Weights::new(2.0, 1.0, 0.5).unwrap();
    let joint = exact_distribution(&g, &w, 64).unwrap();
    let e = Enumeration::new(&g, 64).unwrap();
    let index: HashMap<u64, usize> = joint.support.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    for center in [0, 3, 5] {
        let window = block_plan(&g, center, 1).unwrap().free_edges().to_vec();
        let n = joint.len();
        let mut k = vec![vec![0.0f64; n]; n];
        for (i, &m) in joint.support.iter().enumerate() {
            let cfg = e.configuration(m);
            let cond = gibbs_conditional(&cfg, &window, &w).unwrap();
            for j in 0..cond.len() {
                let mut next = cfg.clone();
                cond.apply(j, &mut next);
                k[i][index[&next.to_mask().unwrap()]] += cond.probabilities[j];
            }
        }
        let mu = &joint.probabilities;
        for i in 0..n {
            for j in 0..n {
                assert!((mu[i] * k[i][j] - mu[j] * k[j][i]).abs() < 1e-14);
            }
            let row: f64 = k[i].iter().sum();
            assert!((row - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn short_run_is_close_to_exact() {
    let g = torus(2);
    let w = Weights::new(1.0, 1.0, 1.0).unwrap();
    let joint = exact_distribution(&g, &w, 64).unwrap();
    let mut chain = Chain::new(g, w, 11, 0, SamplerOptions::default()).unwrap();
    let mut counts: HashMap<u64, usize> = HashMap::new();
    let n = 20_000;
    for cfg in chain.samples(100, n, 1) {
        *counts.entry(cfg.to_mask().unwrap()).or_default() += 1;
    }
    let tv: f64 = joint
        .support
        .iter()
        .zip(&joint.probabilities)
        .map(|(m, p)| (counts.get(m).copied().unwrap_or(0) as f64 / n as f64 - p).abs())
        .sum::<f64>()
        / 2.0;
    // expected TV of i.i.d. draws from the exact law
    let floor: f64 = joint
        .probabilities
        .iter()
        .map(|p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n as f64)).sqrt())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 1.3 * floor, "TV {tv}, i.i.d. floor {floor}");
}
