#![allow(dead_code)]

use std::collections::VecDeque;
use std::sync::Arc;

use onetwo::sampler::{Chain, SamplerOptions};
use onetwo::{Configuration, Geometry, Weights};

pub fn torus(l: usize) -> Arc<Geometry> {
    Arc::new(Geometry::torus(l).unwrap())
}

/// Weight table written out independently of `Weights::weight_of`.
pub fn table_weight(code: u8, (a, b, c): (f64, f64, f64)) -> f64 {
    match code {
        0b001 | 0b110 => a,
        0b010 | 0b101 => b,
        0b100 | 0b011 => c,
        _ => 0.0,
    }
}

/// Brute-force filter over all `2^|E|` edge subsets: (count, Z).
pub fn brute_force(g: &Arc<Geometry>, w: (f64, f64, f64)) -> (u64, f64) {
    let m = g.edge_count();
    assert!(m <= 24);
    let (mut count, mut z) = (0u64, 0.0f64);
    for mask in 0u64..1 << m {
        let cfg = Configuration::from_mask(g.clone(), mask);
        let mut weight = 1.0;
        for v in 0..g.vertex_count() {
            weight *= table_weight(cfg.code_at(v).value(), w);
        }
        if weight > 0.0 {
            count += 1;
            z += weight;
        }
    }
    (count, z)
}

/// Valid configurations drawn from a heat-bath chain, `thin` sweeps apart.
pub fn sampled(l: usize, w: Weights<f64>, seed: u64, n: usize, thin: usize) -> Vec<Configuration> {
    let mut chain = Chain::new(torus(l), w, seed, 0, SamplerOptions::default()).unwrap();
    chain.samples(20, n, thin).collect()
}

/// Connected components of same-code vertices by breadth-first search, each
/// sorted, ordered by smallest member. `present_only` restricts to present edges.
pub fn bfs_clusters(cfg: &Configuration, code: u8, present_only: bool) -> Vec<Vec<usize>> {
    let g = cfg.geometry();
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] || cfg.code_at(s).value() != code {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![];
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            comp.push(v);
            for u in g.adjacent(v).iter().flatten() {
                let u = *u as usize;
                if seen[u] || cfg.code_at(u).value() != code {
                    continue;
                }
                if present_only {
                    let (_, e) = g.edge_between(v, u).or_else(|| g.edge_between(u, v)).unwrap();
                    if !cfg.is_present(e) {
                        continue;
                    }
                }
                seen[u] = true;
                q.push_back(u);
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
