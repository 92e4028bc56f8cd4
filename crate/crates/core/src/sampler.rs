//! Markov chain Monte Carlo for the finite-volume Gibbs measure.
//!
//! The primary move is a block heat-bath update: pick a vertex, take every edge
//! with both endpoints within `block_radius` of it, and resample those edges
//! exactly from their conditional law given the rest of the configuration.
//! Single-edge Metropolis flips are available as a cheap supplement.
//!
//! Irreducibility of either move set is not proven; it is checked against the
//! exact distribution on small tori.

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::configuration::{Configuration, LocalCode, Weights};
use crate::error::{Error, Result};
use crate::exact::ConditionalPlan;
use crate::lattice::{Boundary, Geometry, Mode};
use crate::scalar::Real;

pub const DEFAULT_BURN_IN: usize = 1000;
pub const DEFAULT_THINNING: usize = 10;
pub const DEFAULT_BLOCK_RADIUS: usize = 2;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerOptions {
    pub block_radius: usize,
    /// Metropolis single-edge proposals appended to every sweep.
    pub flips_per_sweep: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions { block_radius: DEFAULT_BLOCK_RADIUS, flips_per_sweep: 0 }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MoveStats {
    pub block_updates: u64,
    /// Block updates that changed at least one edge.
    pub block_changes: u64,
    pub flip_proposals: u64,
    /// Flips rejected because an endpoint would reach degree 0 or 3.
    pub flip_invalid: u64,
    pub flip_accepts: u64,
}

/// Builds a reproducible generator for chain `stream` of a run seeded with `seed`.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One Markov chain; the configuration is valid after every completed update.
pub struct Chain<T: Real> {
    config: Configuration,
    weights: Weights<T>,
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    options: SamplerOptions,
    plans: Vec<ConditionalPlan>,
    sweeps: u64,
    stats: MoveStats,
    fixed: Vec<u8>,
    candidates: Vec<(u64, T)>,
    order: Vec<usize>,
}

/// Starts a chain from the all-horizontal configuration.
pub fn init_chain<T: Real>(geometry: Arc<Geometry>, weights: Weights<T>, seed: u64, options: SamplerOptions) -> Result<Chain<T>> {
    Chain::new(geometry, weights, seed, 0, options)
}

impl<T: Real> Chain<T> {
    pub fn new(
        geometry: Arc<Geometry>,
        weights: Weights<T>,
        seed: u64,
        stream: u64,
        options: SamplerOptions,
    ) -> Result<Chain<T>> {
        if options.block_radius == 0 {
            return Err(Error::OutOfRange { what: "block radius", value: 0, range: "1.." });
        }
        if let Mode::Window { boundary: Boundary::Free, .. } = geometry.mode() {
            return Err(Error::Precondition(
                "sampling a window needs a fixed boundary condition".into(),
            ));
        }
        let config = Configuration::all_horizontal(geometry.clone());
        if let Some(&v) = config.violation_indices().first() {
            return Err(Error::Precondition(format!(
                "the all-horizontal start violates the fixed boundary at {}",
                geometry.vertex_id(v)
            )));
        }
        let plans = (0..geometry.vertex_count())
            .map(|v| block_plan(&geometry, v, options.block_radius))
            .collect::<Result<Vec<_>>>()?;
        Ok(Chain {
            config,
            weights,
            seed,
            stream,
            rng: chain_rng(seed, stream),
            options,
            plans,
            sweeps: 0,
            stats: MoveStats::default(),
            fixed: Vec::new(),
            candidates: Vec::new(),
            order: (0..geometry.vertex_count()).collect(),
        })
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn weights(&self) -> &Weights<T> {
        &self.weights
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn options(&self) -> SamplerOptions {
        self.options
    }

    pub fn sweep_count(&self) -> u64 {
        self.sweeps
    }

    pub fn stats(&self) -> MoveStats {
        self.stats
    }

    /// Replaces the state; must be a valid configuration on the same geometry.
    pub fn set_config(&mut self, config: Configuration) -> Result<()> {
        if config.geometry() != self.config.geometry() {
            return Err(Error::Precondition("configuration is on a different geometry".into()));
        }
        if let Some(v) = config.violations().first() {
            return Err(Error::InvalidConfiguration(*v));
        }
        self.config = config;
        Ok(())
    }

    /// Free edges of the block centered at `v`.
    pub fn block_edges(&self, v: usize) -> &[usize] {
        self.plans[v].free_edges()
    }

    /// Resamples the block around `center` from its exact conditional law.
    pub fn block_update(&mut self, center: usize) {
        let plan = &self.plans[center];
        plan.fixed_codes(&self.config, &mut self.fixed);
        self.candidates.clear();
        let candidates = &mut self.candidates;
        plan.visit(&self.fixed, &self.weights, |m, w| candidates.push((m, *w)));
        let total = candidates.iter().fold(T::zero(), |s, (_, w)| s + *w);
        // the current assignment is always a valid completion
        assert!(total > T::zero(), "block around vertex {center} has no valid completion");
        let u = T::from_f64(self.rng.gen::<f64>()).expect("uniform in scalar type") * total;
        let mut acc = T::zero();
        let mut chosen = candidates[candidates.len() - 1].0;
        for &(m, w) in candidates.iter() {
            acc = acc + w;
            if u < acc {
                chosen = m;
                break;
            }
        }
        self.stats.block_updates += 1;
        if chosen != plan.current_mask(&self.config) {
            self.stats.block_changes += 1;
            plan.apply(chosen, &mut self.config);
        }
    }

    /// One heat-bath update per vertex, centers in a fresh random order, followed
    /// by the configured number of Metropolis flips.
    pub fn heat_bath_sweep(&mut self) {
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(&mut self.rng);
        for &v in &order {
            self.block_update(v);
        }
        self.order = order;
        self.metropolis_edge_flip(self.options.flips_per_sweep);
        self.sweeps += 1;
        debug_assert!(self.config.is_valid(), "sweep left a 1-2 law violation");
    }

    /// `count` single-edge Metropolis proposals.
    pub fn metropolis_edge_flip(&mut self, count: usize) {
        let g = self.config.geometry().clone();
        for _ in 0..count {
            let e = self.rng.gen_range(0..g.edge_count());
            self.stats.flip_proposals += 1;
            let ratio = match flip_ratio(&self.config, e, &self.weights) {
                Some(r) => r,
                None => {
                    self.stats.flip_invalid += 1;
                    continue;
                }
            };
            let u = T::from_f64(self.rng.gen::<f64>()).expect("uniform in scalar type");
            if u < ratio {
                self.config.flip_edge(e);
                self.stats.flip_accepts += 1;
            }
        }
    }

    /// Iterator over `n_samples` configurations taken every `thinning` sweeps
    /// after `burn_in` sweeps.
    pub fn samples(&mut self, burn_in: usize, n_samples: usize, thinning: usize) -> SampleStream<'_, T> {
        SampleStream { chain: self, burn_in, remaining: n_samples, thinning: thinning.max(1) }
    }
}

/// Metropolis acceptance ratio for toggling edge `e`, or `None` when the
/// toggle would break the 1-2 law at an endpoint.
pub fn flip_ratio<T: Real>(cfg: &Configuration, e: usize, w: &Weights<T>) -> Option<T> {
    let g = cfg.geometry();
    let bit = g.edge_kind(e).bit();
    let mut ratio = T::one();
    for v in g.endpoints(e) {
        let old = cfg.code_at(v);
        let new = LocalCode::new(old.value() ^ bit).expect("3-bit code");
        if !new.is_valid() {
            return None;
        }
        ratio = ratio * w.weight_of(new) / w.weight_of(old);
    }
    Some(ratio)
}

/// Conditional plan for the edges with both endpoints within `radius` of `center`.
pub fn block_plan(g: &Geometry, center: usize, radius: usize) -> Result<ConditionalPlan> {
    let ball: HashSet<usize> = g.ball(center, radius).into_iter().collect();
    let free: Vec<usize> = (0..g.edge_count())
        .filter(|&e| {
            let [u, v] = g.endpoints(e);
            ball.contains(&u) && ball.contains(&v)
        })
        .collect();
    ConditionalPlan::new(g, &free, None)
}

pub struct SampleStream<'a, T: Real> {
    chain: &'a mut Chain<T>,
    burn_in: usize,
    remaining: usize,
    thinning: usize,
}

impl<T: Real> Iterator for SampleStream<'_, T> {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if self.remaining == 0 {
            return None;
        }
        for _ in 0..std::mem::take(&mut self.burn_in) {
            self.chain.heat_bath_sweep();
        }
        for _ in 0..self.thinning {
            self.chain.heat_bath_sweep();
        }
        self.remaining -= 1;
        Some(self.chain.config.clone())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub seed: u64,
    pub stream: u64,
    pub block_radius: usize,
    pub flips_per_sweep: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub samples: usize,
    pub sweeps: u64,
    pub stats: MoveStats,
    pub log_weight_trace: Vec<f64>,
    pub log_weight_mean: f64,
    /// Distinct sampled configurations, reported for geometries of at most 64 edges.
    pub distinct_configurations: Option<usize>,
}

pub struct RunOutput {
    pub samples: Vec<Configuration>,
    pub diagnostics: Diagnostics,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunParams {
    pub burn_in: usize,
    pub n_samples: usize,
    pub thinning: usize,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams { burn_in: DEFAULT_BURN_IN, n_samples: 100, thinning: DEFAULT_THINNING }
    }
}

/// Runs one chain and collects its samples together with diagnostics.
/// Deterministic in `(geometry, weights, seed, options, params)`.
pub fn run<T: Real>(
    geometry: Arc<Geometry>,
    weights: Weights<T>,
    seed: u64,
    options: SamplerOptions,
    params: RunParams,
) -> Result<RunOutput> {
    let mut chain = Chain::new(geometry, weights, seed, 0, options)?;
    let weights = chain.weights().clone();
    let samples: Vec<Configuration> = chain.samples(params.burn_in, params.n_samples, params.thinning).collect();
    let log_weight_trace: Vec<f64> =
        samples.iter().map(|c| c.log_weight(&weights).to_f64().unwrap_or(f64::NAN)).collect();
    let log_weight_mean = if log_weight_trace.is_empty() {
        f64::NAN
    } else {
        log_weight_trace.iter().sum::<f64>() / log_weight_trace.len() as f64
    };
    let distinct_configurations = samples
        .first()
        .filter(|c| c.edge_count() <= 64)
        .map(|_| samples.iter().filter_map(|c| c.to_mask()).collect::<HashSet<_>>().len());
    let diagnostics = Diagnostics {
        seed,
        stream: 0,
        block_radius: options.block_radius,
        flips_per_sweep: options.flips_per_sweep,
        burn_in: params.burn_in,
        thinning: params.thinning.max(1),
        samples: samples.len(),
        sweeps: chain.sweep_count(),
        stats: chain.stats(),
        log_weight_trace,
        log_weight_mean,
        distinct_configurations,
    };
    Ok(RunOutput { samples, diagnostics })
}
