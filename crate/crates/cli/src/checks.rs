//! The oracle and property suite behind `verify` and the acceptance target.
//! Each check compares an implementation against an independent oracle or
//! checks an invariant over sampled inputs, and reports its failing cases.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use anyhow::Result;
use num_rational::BigRational;
use num_traits::{One, Zero};
use onetwo::census::{clusters_meeting, is_encounter_box, Adjacency, ObservationWindow};
use onetwo::exact::{exact_distribution, partition_function, Enumeration};
use onetwo::lattice::{BoxLayout, Slot};
use onetwo::partition::{is_compatible, keane_census, max_compatible_family, nested_family, TilingSpec};
use onetwo::sampler::{Chain, SamplerOptions};
use onetwo::surgery::{build_encounter_box, corner_repair, modification_bound, rewire_box_interior, select_trident, EncounterOptions};
use onetwo::{Boundary, BoxSpec, Configuration, EdgeKind, Error, Geometry, LocalCode, VertexId, Weights};
use serde::Serialize;

/// Failing cases kept per check.
const MAX_FAILURES: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub failures: Vec<String>,
    #[serde(skip)]
    pub seconds: f64,
}

struct Recorder {
    failures: Vec<String>,
    count: usize,
}

impl Recorder {
    fn new() -> Recorder {
        Recorder { failures: Vec::new(), count: 0 }
    }

    fn fail(&mut self, case: impl FnOnce() -> String) {
        self.count += 1;
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(case());
        }
    }

    fn check(&mut self, ok: bool, case: impl FnOnce() -> String) {
        if !ok {
            self.fail(case);
        }
    }

    fn finish(self, id: u32, name: &'static str, start: Instant, summary: String) -> CheckResult {
        CheckResult {
            id,
            name,
            passed: self.count == 0,
            summary: if self.count == 0 { summary } else { format!("{summary}; {} failing cases", self.count) },
            failures: self.failures,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Sample sizes for the suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteParams {
    pub tv_samples: usize,
    pub tv_burn_in: usize,
    /// Largest accepted total-variation distance on the L=2 torus.
    pub tv_tolerance: f64,
    pub marginal_samples: usize,
    pub rewire_samples: usize,
    pub rewire_l: usize,
    pub encounter_trials: usize,
    pub family_max_k: usize,
    pub keane_samples: usize,
    pub keane_l: usize,
    pub keane_thin: usize,
    pub seed: u64,
}

impl SuiteParams {
    pub fn full() -> SuiteParams {
        SuiteParams {
            tv_samples: 1_000_000,
            tv_burn_in: 1000,
            tv_tolerance: 0.02,
            marginal_samples: 100_000,
            rewire_samples: 10_000,
            rewire_l: 32,
            encounter_trials: 1000,
            family_max_k: 7,
            keane_samples: 1000,
            keane_l: 64,
            keane_thin: 2,
            seed: 2024,
        }
    }

    pub fn quick() -> SuiteParams {
        SuiteParams {
            tv_samples: 100_000,
            tv_burn_in: 1000,
            // the sampling noise in TV shrinks like n^{-1/2}
            tv_tolerance: 0.02 * 10f64.sqrt(),
            marginal_samples: 20_000,
            rewire_samples: 300,
            rewire_l: 16,
            encounter_trials: 40,
            family_max_k: 6,
            keane_samples: 100,
            keane_l: 20,
            keane_thin: 1,
            seed: 2024,
        }
    }
}

fn torus(l: usize) -> Arc<Geometry> {
    Arc::new(Geometry::torus(l).expect("torus side is positive"))
}

/// Weight of a local code, written out from the weight table.
fn table_weight<T: Clone + Zero>(code: u8, a: &T, b: &T, c: &T) -> T {
    match code {
        0b001 | 0b110 => a.clone(),
        0b010 | 0b101 => b.clone(),
        0b100 | 0b011 => c.clone(),
        _ => T::zero(),
    }
}

/// Filters all `2^|E|` edge subsets: count and partition function.
pub fn brute_force<T: Clone + Zero + One + std::ops::Mul<Output = T>>(g: &Arc<Geometry>, (a, b, c): (T, T, T)) -> (u64, T) {
    let m = g.edge_count();
    assert!(m <= 24, "brute force is limited to 24 edges");
    let (mut count, mut z) = (0u64, T::zero());
    for mask in 0u64..1 << m {
        let cfg = Configuration::from_mask(g.clone(), mask);
        if (0..g.vertex_count()).any(|v| !cfg.code_at(v).is_valid()) {
            continue;
        }
        let mut weight = T::one();
        for v in 0..g.vertex_count() {
            weight = weight * table_weight(cfg.code_at(v).value(), &a, &b, &c);
        }
        count += 1;
        z = z + weight;
    }
    (count, z)
}

/// The torus of side 2 and three windows, all with at most 14 edges.
pub fn small_geometries() -> Vec<(String, Arc<Geometry>)> {
    let mut out = vec![("torus L=2".to_string(), torus(2))];
    let free = Geometry::window(2, 2, Boundary::Free).unwrap();
    out.push(("free 2x2".into(), Arc::new(free)));
    let w = Geometry::window(3, 2, Boundary::Free).unwrap();
    let pattern: Vec<bool> = (0..w.stub_count()).map(|i| i % 3 == 0).collect();
    out.push(("fixed 3x2".into(), Arc::new(w.with_boundary(Boundary::Fixed(pattern)).unwrap())));
    let w = Geometry::window(2, 3, Boundary::Free).unwrap();
    let n = w.stub_count();
    out.push(("absent 2x3".into(), Arc::new(w.with_boundary(Boundary::Fixed(vec![false; n])).unwrap())));
    out
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn enumeration_oracle() -> Result<CheckResult> {
    let start = Instant::now();
    let mut rec = Recorder::new();
    let mut edges = Vec::new();
    for (name, g) in small_geometries() {
        edges.push(format!("{name}: {}", g.edge_count()));
        rec.check(g.edge_count() <= 14, || format!("{name} has {} edges", g.edge_count()));
        let (count, z_unit) = brute_force::<u64>(&g, (1, 1, 1));
        let pruned = Enumeration::new(&g, 64)?.count();
        let z_pruned = partition_function(&g, &Weights::<u64>::uniform(), 64)?;
        rec.check(pruned == count && z_pruned == z_unit && z_unit == count, || {
            format!("{name}: brute force {count}/{z_unit}, pruned {pruned}/{z_pruned}")
        });
        let (_, z) = brute_force::<f64>(&g, (2.0, 1.0, 0.5));
        let mine = partition_function(&g, &Weights::new(2.0, 1.0, 0.5)?, 64)?;
        rec.check(((mine - z) / z).abs() < 1e-12, || format!("{name}: Z(2,1,0.5) brute force {z}, pruned {mine}"));
        let (_, zq) = brute_force(&g, (ratio(2, 1), ratio(1, 1), ratio(1, 2)));
        let exact = partition_function(&g, &Weights::new(ratio(2, 1), ratio(1, 1), ratio(1, 2))?, 64)?;
        rec.check(exact == zq, || format!("{name}: exact Z brute force {zq}, pruned {exact}"));
    }
    let summary = format!("4 geometries ({}), counts and Z agree", edges.join(", "));
    Ok(rec.finish(1, "enumeration oracle", start, summary))
}

/// Exact law on the edge masks used by [`Configuration::to_mask`].
fn exact_by_mask(g: &Arc<Geometry>, w: &Weights<f64>) -> Result<HashMap<u64, f64>> {
    let d = exact_distribution(g, w, 64)?;
    Ok(d.support
        .iter()
        .zip(&d.probabilities)
        .map(|(&m, &p)| (d.free_edges.iter().enumerate().fold(0u64, |acc, (i, &e)| acc | ((m >> i & 1) << e)), p))
        .collect())
}

pub const TV_WEIGHTS: [(f64, f64, f64); 2] = [(1.0, 1.0, 1.0), (2.0, 1.0, 0.5)];

pub fn sampler_oracle(p: &SuiteParams) -> Result<CheckResult> {
    let start = Instant::now();
    let mut rec = Recorder::new();
    let mut parts = Vec::new();
    for (i, &(a, b, c)) in TV_WEIGHTS.iter().enumerate() {
        let w = Weights::new(a, b, c)?;

        let g = torus(2);
        let exact = exact_by_mask(&g, &w)?;
        let mut chain = Chain::new(g, w.clone(), p.seed, i as u64, SamplerOptions::default())?;
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for s in chain.samples(p.tv_burn_in, p.tv_samples, 1) {
            *counts.entry(s.to_mask().unwrap()).or_default() += 1;
        }
        let n = p.tv_samples as f64;
        let outside: usize = counts.iter().filter(|(m, _)| !exact.contains_key(m)).map(|(_, &k)| k).sum();
        let tv = 0.5
            * (exact.iter().map(|(m, &q)| (counts.get(m).copied().unwrap_or(0) as f64 / n - q).abs()).sum::<f64>()
                + outside as f64 / n);
        // expected TV of n independent draws, for scale
        let floor: f64 = exact.values().map(|&q| (q * (1.0 - q) / (2.0 * std::f64::consts::PI * n)).sqrt()).sum();
        rec.check(tv < p.tv_tolerance, || format!("({a},{b},{c}) L=2: TV {tv:.5}, independent-sample floor {floor:.5}"));

        // edge marginals on L=3, standard errors from 50 batch means
        let g = torus(3);
        let m = g.edge_count();
        let exact = exact_by_mask(&g, &w)?;
        let mut marginal = vec![0.0; m];
        for (&mask, &q) in &exact {
            for (e, x) in marginal.iter_mut().enumerate() {
                if mask >> e & 1 == 1 {
                    *x += q;
                }
            }
        }
        let batches = 50;
        let per = p.marginal_samples / batches;
        let mut chain = Chain::new(g, w.clone(), p.seed, 10 + i as u64, SamplerOptions::default())?;
        let mut batch_means = vec![vec![0.0; m]; batches];
        let mut stream = chain.samples(p.tv_burn_in, per * batches, 1);
        for batch in batch_means.iter_mut() {
            for s in stream.by_ref().take(per) {
                for e in s.present_edges() {
                    batch[e] += 1.0 / per as f64;
                }
            }
        }
        let mut worst: f64 = 0.0;
        for e in 0..m {
            let mean = batch_means.iter().map(|b| b[e]).sum::<f64>() / batches as f64;
            let var = batch_means.iter().map(|b| (b[e] - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
            let se = (var / batches as f64).sqrt().max(1e-12);
            let z = (mean - marginal[e]).abs() / se;
            worst = worst.max(z);
            rec.check(z <= 3.0, || format!("({a},{b},{c}) L=3 edge {e}: {mean:.5} vs {:.5}, {z:.2} SE", marginal[e]));
        }
        parts.push(format!("({a},{b},{c}) TV {tv:.4} (floor {floor:.4}), max marginal deviation {worst:.2} SE"));
    }
    let summary = format!("{} samples per law, TV tolerance {}; {}", p.tv_samples, p.tv_tolerance, parts.join("; "));
    Ok(rec.finish(2, "sampler against exact law", start, summary))
}

pub fn rewire_property(p: &SuiteParams) -> Result<CheckResult> {
    let start = Instant::now();
    let mut rec = Recorder::new();
    let n = 3;
    let l = p.rewire_l;
    let center = ((l / 2) as i64, (l / 2) as i64);
    let w = Weights::<f64>::uniform();
    let g = torus(l);
    let layout = BoxLayout::new(&g, BoxSpec::new(n + 2, center))?;
    let mut region: BTreeSet<usize> = layout.vertices.iter().copied().collect();
    region.extend(layout.h1);
    region.extend(layout.h2);
    let inner: Vec<usize> = BoxSpec::new(n, center).lattice_vertices().iter().map(|&v| g.vertex_index(v).unwrap()).collect();
    let bound = modification_bound(n);
    let mut chain = Chain::new(g.clone(), w.clone(), p.seed, 3, SamplerOptions::default())?;
    let mut max_modified = 0;
    for (i, cfg) in chain.samples(100, p.rewire_samples, 1).enumerate() {
        let report = match rewire_box_interior(&cfg, n, center, &w) {
            Ok(r) => r,
            Err(e) => {
                rec.fail(|| format!("sample {i}: {e}\n{}", cfg.to_text()));
                continue;
            }
        };
        let out = &report.output;
        max_modified = max_modified.max(report.modified_vertices.len());
        let ok = out.is_valid()
            && inner.iter().all(|&v| out.code_at(v) == LocalCode::HORIZONTAL)
            && report.modified_vertices.len() <= bound
            && report.modified_vertices.iter().all(|v| region.contains(v))
            && (0..g.vertex_count())
                .filter(|v| !region.contains(v) && cfg.code_at(*v) == LocalCode::HORIZONTAL)
                .all(|v| out.code_at(v) == LocalCode::HORIZONTAL);
        rec.check(ok, || format!("sample {i}: {} modified, valid {}\n{}", report.modified_vertices.len(), out.is_valid(), cfg.to_text()));
    }
    let summary = format!("{} configurations on L={l}, N={n}: max {max_modified} modified vertices (bound {bound})", p.rewire_samples);
    Ok(rec.finish(3, "box rewiring", start, summary))
}

fn face_sides(g: &Geometry, h: &[usize; 6]) -> [usize; 6] {
    std::array::from_fn(|i| g.edge_between(h[i], h[(i + 1) % 6]).or_else(|| g.edge_between(h[(i + 1) % 6], h[i])).unwrap().1)
}

fn third_edge(g: &Geometry, v: usize, sides: &[usize; 6]) -> usize {
    g.incident(v)
        .iter()
        .filter_map(|s| match s {
            Slot::Edge(e) => Some(*e as usize),
            Slot::Stub(_) => None,
        })
        .find(|e| !sides.contains(e))
        .expect("torus vertices have three stored edges")
}

pub fn corner_exhaustive() -> Result<CheckResult> {
    let start = Instant::now();
    let mut rec = Recorder::new();
    let g = torus(9);
    let layout = BoxLayout::new(&g, BoxSpec::new(3, (4, 4)))?;
    let base = Configuration::empty(g.clone());
    let mut cases = 0;
    for (name, h) in [("h1", layout.h1), ("h2", layout.h2)] {
        let sides = face_sides(&g, &h);
        let thirds: Vec<usize> = h.iter().map(|&v| third_edge(&g, v, &sides)).collect();
        // all 2^6 side patterns times 2^5 exterior edges at h_1..h_5; h_0 has degree 3
        for side_bits in 0u32..64 {
            for stub_bits in 0u32..32 {
                let mut cfg = base.clone();
                for (i, &e) in sides.iter().enumerate() {
                    cfg.set(e, side_bits >> i & 1 == 1);
                }
                cfg.set(thirds[0], true);
                for i in 1..6 {
                    cfg.set(thirds[i], stub_bits >> (i - 1) & 1 == 1);
                }
                if cfg.degree_at(h[0]) != 3 || !(1..6).all(|i| cfg.code_at(h[i]).is_valid()) {
                    continue;
                }
                cases += 1;
                match corner_repair(&cfg, &h) {
                    Ok(out) => {
                        let bad: Vec<usize> = h.iter().copied().filter(|&v| !(1..=2).contains(&out.degree_at(v))).collect();
                        let touched_outside = (0..g.edge_count()).any(|e| out.is_present(e) != cfg.is_present(e) && !sides.contains(&e));
                        rec.check(bad.is_empty() && !touched_outside, || {
                            format!("{name} sides {side_bits:06b} exterior {stub_bits:05b}: bad vertices {bad:?}")
                        });
                    }
                    Err(e) => rec.fail(|| format!("{name} sides {side_bits:06b} exterior {stub_bits:05b}: {e}")),
                }
            }
        }
    }
    Ok(rec.finish(4, "corner repair case table", start, format!("{cases} cases with a degree-3 corner")))
}

pub fn compatible_family_bound(p: &SuiteParams) -> Result<CheckResult> {
    let start = Instant::now();
    let mut rec = Recorder::new();
    let mut sizes = Vec::new();
    for k in 3..=p.family_max_k {
        let fam = max_compatible_family(k)?;
        sizes.push(format!("k={k}: {}", fam.size));
        rec.check(fam.size + 2 <= k, || format!("k={k}: compatible family of size {}", fam.size));
        let nested = nested_family(k);
        let mut ok = nested.len() == k - 2;
        for i in 0..nested.len() {
            for j in i + 1..nested.len() {
                ok &= is_compatible(&nested[i], &nested[j])?;
            }
        }
        rec.check(ok, || format!("k={k}: nested family of size {} is not pairwise compatible", nested.len()));
    }
    Ok(rec.finish(5, "compatible family bound", start, format!("maxima {}; nested witnesses of size k-2", sizes.join(", "))))
}

/// Torus of side 16 with three straight code-1 arms meeting at `B_1((8,8))`:
/// a row to the left starting at `left_end`, a row to the right and a column
/// downwards. Everything else carries b and c edges.
pub fn three_arm_configuration(left_end: i64) -> (Configuration, ObservationWindow) {
    let g = torus(16);
    let mut arm = BTreeSet::new();
    for x in left_end..16 {
        arm.insert((x, 8));
    }
    for y in 1..8 {
        arm.insert((8, y));
    }
    let mut cfg = Configuration::empty(g.clone());
    for e in 0..g.edge_count() {
        cfg.set(e, g.edge_kind(e) != EdgeKind::A);
    }
    for &(x, y) in &arm {
        for v in [VertexId::white(x, y), VertexId::black(x, y)] {
            let v = g.vertex_index(v).unwrap();
            for (k, slot) in g.incident(v).iter().enumerate() {
                if let Slot::Edge(e) = slot {
                    cfg.set(*e as usize, k == 0);
                }
            }
        }
    }
    // B(7,7) sits between the left and lower arms with no edge left; give it
    // its horizontal edge and push the surplus degree down-left
    let edge = |u: VertexId, v: VertexId| {
        let (u, v) = (g.vertex_index(u).unwrap(), g.vertex_index(v).unwrap());
        g.edge_between(u, v).or_else(|| g.edge_between(v, u)).unwrap().1
    };
    cfg.set(edge(VertexId::white(7, 7), VertexId::black(7, 7)), true);
    cfg.set(edge(VertexId::white(7, 7), VertexId::black(6, 7)), false);
    cfg.set(edge(VertexId::white(6, 7), VertexId::black(6, 7)), true);
    cfg.set(edge(VertexId::white(6, 7), VertexId::black(6, 6)), false);
    let window = ObservationWindow::box_with_outer_ring(&g, BoxSpec::new(13, (8, 8))).unwrap();
    (cfg, window)
}

/// The witness of an encounter box at `B_n(center)`: three disjoint
/// rim-reaching pieces covering the cluster outside `B_{n+2}`.
fn witness_problems(cfg: &Configuration, b: BoxSpec, window: &ObservationWindow) -> Result<Vec<String>> {
    let g = cfg.geometry();
    let out = is_encounter_box(cfg, b, LocalCode::HORIZONTAL, window, Adjacency::Lattice)?;
    let mut problems = Vec::new();
    if !out.is_encounter {
        problems.push(format!("not an encounter box ({} components)", out.components.len()));
        return Ok(problems);
    }
    let Some(witness) = out.witness else {
        problems.push("encounter box without witness".into());
        return Ok(problems);
    };
    let outer = b.enlarged(2);
    let inner: Vec<usize> = b.lattice_vertices().iter().map(|&v| g.vertex_index(v).unwrap()).collect();
    let (_, clusters) = clusters_meeting(cfg, LocalCode::HORIZONTAL, &inner, window, Adjacency::Lattice, false)?;
    let expected: BTreeSet<usize> =
        clusters.iter().flat_map(|c| c.members.iter().copied()).filter(|&v| !outer.contains(g.vertex_id(v))).collect();
    let mut union = BTreeSet::new();
    for comp in &witness {
        if !comp.iter().any(|&v| window.is_rim(v)) {
            problems.push("witness component misses the rim".into());
        }
        for &v in comp {
            if !union.insert(v) {
                problems.push(format!("witness components overlap at {}", g.vertex_id(v)));
            }
        }
    }
    if union != expected {
        problems.push("witness does not cover the cluster outside the enlarged box".into());
    }
    Ok(problems)
}

pub fn encounter_pipeline(p: &SuiteParams) -> Result<CheckResult> {
    let start = Instant::now();
    let mut rec = Recorder::new();
    let (cfg, window) = three_arm_configuration(1);
    rec.check(cfg.is_valid(), || "three-arm configuration is invalid".into());
    for problem in witness_problems(&cfg, BoxSpec::new(1, (8, 8)), &window)? {
        rec.fail(|| format!("three arms: {problem}"));
    }
    let (short, window) = three_arm_configuration(5);
    let out = is_encounter_box(&short, BoxSpec::new(1, (8, 8)), LocalCode::HORIZONTAL, &window, Adjacency::Lattice)?;
    rec.check(!out.is_encounter, || "a finite arm was accepted".into());

    // sampled inputs; the rim sits right outside B_{N+2}
    let (l, n, center) = (20, 5, (10, 10));
    let w = Weights::new(2.0, 1.0, 1.0)?;
    let g = torus(l);
    let window = ObservationWindow::box_with_outer_ring(&g, BoxSpec::new(n + 2, center))?;
    let layout = BoxLayout::new(&g, BoxSpec::new(n + 2, center))?;
    let opts = EncounterOptions::default();
    let mut chain = Chain::new(g.clone(), w.clone(), p.seed, 6, SamplerOptions::default())?;
    let (mut drawn, mut trials, mut built, mut rejected, mut guaranteed) = (0, 0, 0, 0, 0);
    let mut stream = chain.samples(100, 40 * p.encounter_trials, 1);
    while trials < p.encounter_trials {
        let Some(cfg) = stream.next() else { break };
        drawn += 1;
        let trident = match select_trident(&cfg, n, center, &window, &opts) {
            Ok(t) => t,
            Err(Error::InsufficientClusters { .. }) => continue,
            Err(e) => {
                rec.fail(|| format!("trident selection: {e}"));
                continue;
            }
        };
        trials += 1;
        guaranteed += trident.guaranteed as usize;
        match build_encounter_box(&cfg, n, center, trident.vertices, &w) {
            Ok(report) => {
                built += 1;
                let out = &report.output;
                let inner_ok = BoxSpec::new(n, center)
                    .lattice_vertices()
                    .iter()
                    .all(|&v| out.local_code(v).is_ok_and(|c| c == LocalCode::HORIZONTAL));
                let gate_ok = layout
                    .boundary_vertices()
                    .iter()
                    .all(|&u| (out.code_at(u) == LocalCode::HORIZONTAL) == trident.vertices.contains(&u));
                let enc = is_encounter_box(out, BoxSpec::new(n, center), LocalCode::HORIZONTAL, &window, Adjacency::Lattice)?;
                rec.check(out.is_valid() && inner_ok && gate_ok && enc.is_encounter && report.within_bound(), || {
                    format!(
                        "trial {trials}: valid {} inner {inner_ok} gatekeeping {gate_ok} encounter {}\n{}",
                        out.is_valid(),
                        enc.is_encounter,
                        cfg.to_text()
                    )
                });
            }
            // a rejection names the vertex where the 1-2 law could not be restored
            Err(Error::Unrepairable { .. }) => rejected += 1,
            Err(e) => rec.fail(|| format!("trial {trials}: rejection without witness: {e}\n{}", cfg.to_text())),
        }
    }
    rec.check(trials == p.encounter_trials, || format!("only {trials} admissible inputs among {drawn} samples"));
    let summary = format!(
        "three-arm witness ok; {trials} admissible of {drawn} sampled (L={l}, N={n}), {built} built, {rejected} rejected with witness, {guaranteed} above the count threshold"
    );
    Ok(rec.finish(6, "encounter-box pipeline", start, summary))
}

pub fn keane_bounds(p: &SuiteParams) -> Result<CheckResult> {
    let start = Instant::now();
    let mut rec = Recorder::new();
    let l = p.keane_l;
    let spec = TilingSpec::new(4, 1, ((l / 2) as i64, (l / 2) as i64))?;
    let w = Weights::<f64>::uniform();
    let mut chain = Chain::new(torus(l), w.clone(), p.seed, 7, SamplerOptions::default())?;
    let samples: Vec<Configuration> = chain.samples(1000, p.keane_samples, p.keane_thin).collect();
    let report = keane_census(&samples, &spec, LocalCode::HORIZONTAL, &w, Adjacency::Lattice)?;
    let mut multi = 0;
    for (i, s) in report.per_sample.iter().enumerate() {
        rec.check(s.violations == 0 && s.encounter_boxes <= s.y_cap, || {
            format!("sample {i}: {} encounter boxes, cap {}, {} violations\n{}", s.encounter_boxes, s.y_cap, s.violations, samples[i].to_text())
        });
        for c in &s.clusters {
            multi += (c.encounter_boxes > 1) as usize;
            rec.check(c.y_size <= s.rim_size, || format!("sample {i}: |Y| = {} above rim size {}", c.y_size, s.rim_size));
        }
    }
    // Uniform weights rarely produce encounter boxes at all. A dense {001}
    // companion run shows the checks on real boxes; it does not gate the result.
    let dense = Weights::new(3.0, 1.0, 1.0)?;
    let mut chain = Chain::new(torus(16), dense.clone(), p.seed, 8, SamplerOptions::default())?;
    let companion: Vec<Configuration> = chain.samples(200, p.keane_samples / 5, 1).collect();
    let spec16 = TilingSpec::new(4, 1, (8, 8))?;
    let c = keane_census(&companion, &spec16, LocalCode::HORIZONTAL, &dense, Adjacency::Lattice)?;
    let summary = format!(
        "{} samples on L={l}, s=4, N=1: {} encounter boxes (max {} per sample), {multi} clusters with several, {} violations, rim {} vs estimate {}; \
         companion at (3,1,1) on L=16 (not gating): {} samples, {} encounter boxes, {} literal violations, {} with connected cores",
        report.samples,
        report.total_encounter_boxes,
        report.max_encounter_boxes,
        report.violations,
        report.max_rim_size,
        report.perimeter_estimate,
        c.samples,
        c.total_encounter_boxes,
        c.violations,
        c.connected_core_violations
    );
    Ok(rec.finish(7, "encounter-box census bounds", start, summary))
}

/// Runs `sample`, `census` and `keane` twice into scratch directories and
/// compares every output byte.
pub fn reproducibility() -> Result<CheckResult> {
    use crate::commands;
    use crate::config::RunConfig;

    let start = Instant::now();
    let mut rec = Recorder::new();
    let scratch = std::env::temp_dir().join(format!("onetwo-verify-{}", std::process::id()));
    let mut trees = Vec::new();
    for run in 0..2 {
        let root = scratch.join(format!("run{run}"));
        let mut cfg = RunConfig { seed: 11, ..RunConfig::default() };
        cfg.geometry.l = 16;
        cfg.sampler.sweeps = 60;
        cfg.sampler.burn_in = 20;
        cfg.sampler.thin = 3;
        cfg.out = Some(root.join("sample"));
        commands::sample(&cfg)?;
        cfg.out = Some(root.join("census"));
        commands::census(&cfg, &[root.join("sample")])?;
        cfg.out = Some(root.join("keane"));
        commands::keane(&cfg, &[])?;
        trees.push(read_tree(&root)?);
    }
    let _ = std::fs::remove_dir_all(&scratch);
    rec.check(!trees[0].is_empty() && trees[0] == trees[1], || {
        let differing: Vec<&String> = trees[0].keys().filter(|k| trees[1].get(*k) != trees[0].get(*k)).collect();
        format!("outputs differ: {differing:?}")
    });
    Ok(rec.finish(8, "reproducibility", start, format!("{} files identical across two runs", trees[0].len())))
}

/// Relative path to contents for every file below `root`.
pub fn read_tree(root: &std::path::Path) -> Result<std::collections::BTreeMap<String, Vec<u8>>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root)?.to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path)?);
            }
        }
    }
    Ok(out)
}

/// Every check in order.
pub fn run_suite(p: &SuiteParams) -> Vec<CheckResult> {
    run_checks(p, &[1, 2, 3, 4, 5, 6, 7, 8])
}

/// The checks numbered in `ids`, in suite order; an error inside a check
/// counts as its failure.
pub fn run_checks(p: &SuiteParams, ids: &[u32]) -> Vec<CheckResult> {
    let checks: Vec<(u32, &'static str, Box<dyn Fn() -> Result<CheckResult>>)> = vec![
        (1, "enumeration oracle", Box::new(enumeration_oracle)),
        (2, "sampler against exact law", Box::new(|| sampler_oracle(p))),
        (3, "box rewiring", Box::new(|| rewire_property(p))),
        (4, "corner repair case table", Box::new(corner_exhaustive)),
        (5, "compatible family bound", Box::new(|| compatible_family_bound(p))),
        (6, "encounter-box pipeline", Box::new(|| encounter_pipeline(p))),
        (7, "encounter-box census bounds", Box::new(|| keane_bounds(p))),
        (8, "reproducibility", Box::new(reproducibility)),
    ];
    checks
        .into_iter()
        .filter(|(id, _, _)| ids.contains(id))
        .map(|(id, name, f)| {
            f().unwrap_or_else(|e| CheckResult {
                id,
                name,
                passed: false,
                summary: format!("error: {e:#}"),
                failures: vec![format!("{e:#}")],
                seconds: 0.0,
            })
        })
        .collect()
}
