//! Exact enumeration of valid configurations, partition functions and
//! conditional Gibbs distributions on small geometries.
//!
//! Everything here is a depth-first search over the presence bits of a list of
//! free edges, assigned in canonical order. A vertex is checked as soon as all
//! of its incident edges are decided, and the branch is cut when its code is
//! `{000}` or `{111}`. The same [`ConditionalPlan`] drives the block updates of
//! the sampler.

use std::sync::Arc;

use crate::configuration::{Configuration, LocalCode, Weights};
use crate::error::{Error, Result};
use crate::lattice::{Geometry, Slot};
use crate::scalar::Scalar;

/// Default cap on free edges for whole-geometry enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 40;
/// Default cap on free edges for a conditional window.
pub const DEFAULT_CONDITIONAL_CAP: usize = 30;
/// Hard limit: assignments are stored as `u64` masks.
pub const MAX_FREE_EDGES: usize = 64;

#[derive(Clone, Debug)]
struct PlanVertex {
    index: usize,
    /// Fixed incident edges as (code bit, slot).
    fixed: Vec<(u8, Slot)>,
    /// Free incident edges as (position in the free list, code bit).
    free: Vec<(u8, u8)>,
}

/// Precomputed search order for assigning a set of free edges.
#[derive(Clone, Debug)]
pub struct ConditionalPlan {
    free: Vec<usize>,
    vertices: Vec<PlanVertex>,
    /// `vertices[depth_start[d]..depth_start[d + 1]]` become fully decided
    /// once the first `d` free edges are assigned.
    depth_start: Vec<usize>,
}

impl ConditionalPlan {
    /// Plan over `free` edges, checking `checked` vertices (defaults to the
    /// endpoints of the free edges).
    pub fn new(g: &Geometry, free: &[usize], checked: Option<&[usize]>) -> Result<ConditionalPlan> {
        let mut free = free.to_vec();
        free.sort_unstable();
        free.dedup();
        if free.len() > MAX_FREE_EDGES {
            return Err(Error::EnumerationCap { edges: free.len(), cap: MAX_FREE_EDGES });
        }
        if let Some(&e) = free.iter().find(|&&e| e >= g.edge_count()) {
            return Err(Error::Precondition(format!("edge index {e} out of range")));
        }
        let mut position = std::collections::HashMap::with_capacity(free.len());
        for (p, &e) in free.iter().enumerate() {
            position.insert(e, p as u8);
        }
        let mut checked: Vec<usize> = match checked {
            Some(c) => c.to_vec(),
            None => free.iter().flat_map(|&e| g.endpoints(e)).collect(),
        };
        checked.sort_unstable();
        checked.dedup();

        let mut staged: Vec<(usize, PlanVertex)> = checked
            .into_iter()
            .map(|v| {
                let mut pv = PlanVertex { index: v, fixed: Vec::new(), free: Vec::new() };
                for (k, slot) in g.incident(v).iter().enumerate() {
                    let bit = 1u8 << k;
                    match slot {
                        Slot::Edge(e) if position.contains_key(&(*e as usize)) => {
                            pv.free.push((position[&(*e as usize)], bit))
                        }
                        _ => pv.fixed.push((bit, *slot)),
                    }
                }
                let depth = pv.free.iter().map(|(p, _)| *p as usize + 1).max().unwrap_or(0);
                (depth, pv)
            })
            .collect();
        staged.sort_by_key(|(d, pv)| (*d, pv.index));
        let mut depth_start = vec![0; free.len() + 2];
        for (d, _) in &staged {
            depth_start[d + 1] += 1;
        }
        for d in 1..depth_start.len() {
            depth_start[d] += depth_start[d - 1];
        }
        Ok(ConditionalPlan { free, vertices: staged.into_iter().map(|(_, pv)| pv).collect(), depth_start })
    }

    pub fn free_edges(&self) -> &[usize] {
        &self.free
    }

    /// Checked vertices, in the order used by [`fixed_codes`](Self::fixed_codes).
    pub fn checked_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.vertices.iter().map(|v| v.index)
    }

    /// Code bits contributed by the fixed edges of each checked vertex.
    pub fn fixed_codes(&self, cfg: &Configuration, out: &mut Vec<u8>) {
        out.clear();
        out.extend(self.vertices.iter().map(|pv| {
            pv.fixed.iter().filter(|(_, s)| cfg.slot_present(*s)).fold(0u8, |c, (b, _)| c | b)
        }));
    }

    /// Current assignment of the free edges as a mask.
    pub fn current_mask(&self, cfg: &Configuration) -> u64 {
        self.free.iter().enumerate().fold(0, |m, (p, &e)| m | (cfg.is_present(e) as u64) << p)
    }

    pub fn apply(&self, mask: u64, cfg: &mut Configuration) {
        for (p, &e) in self.free.iter().enumerate() {
            cfg.set(e, mask >> p & 1 == 1);
        }
    }

    #[inline]
    fn code(&self, i: usize, fixed: &[u8], mask: u64) -> LocalCode {
        let pv = &self.vertices[i];
        let mut c = fixed[i];
        for &(p, bit) in &pv.free {
            if mask >> p & 1 == 1 {
                c |= bit;
            }
        }
        LocalCode::from_bits(c)
    }

    /// Calls `f(mask, weight)` for every assignment of the free edges under
    /// which all checked vertices obey the 1-2 law. `weight` is the product of
    /// the checked vertices' weights. Masks arrive in increasing bit-reversed
    /// order (edge 0 is the outermost branch, absent first).
    pub fn visit<T: Scalar, F: FnMut(u64, &T)>(&self, fixed: &[u8], w: &Weights<T>, mut f: F) {
        let mut acc = T::one();
        for i in self.depth_start[0]..self.depth_start[1] {
            let code = self.code(i, fixed, 0);
            if !code.is_valid() {
                return;
            }
            acc = acc * w.weight_of(code);
        }
        self.descend(0, 0, acc, fixed, w, &mut f);
    }

    fn descend<T: Scalar, F: FnMut(u64, &T)>(
        &self,
        depth: usize,
        mask: u64,
        acc: T,
        fixed: &[u8],
        w: &Weights<T>,
        f: &mut F,
    ) {
        if depth == self.free.len() {
            f(mask, &acc);
            return;
        }
        let (lo, hi) = (self.depth_start[depth + 1], self.depth_start[depth + 2]);
        'branch: for bit in 0..2u64 {
            let m = mask | bit << depth;
            let mut a = acc.clone();
            for i in lo..hi {
                let code = self.code(i, fixed, m);
                if !code.is_valid() {
                    continue 'branch;
                }
                a = a * w.weight_of(code);
            }
            self.descend(depth + 1, m, a, fixed, w, f);
        }
    }
}

/// All valid configurations of a geometry (every vertex checked, every
/// stored edge free).
pub struct Enumeration {
    base: Configuration,
    plan: ConditionalPlan,
    fixed: Vec<u8>,
}

impl Enumeration {
    pub fn new(geometry: &Arc<Geometry>, cap: usize) -> Result<Enumeration> {
        let edges = geometry.edge_count();
        if edges > cap.min(MAX_FREE_EDGES) {
            return Err(Error::EnumerationCap { edges, cap: cap.min(MAX_FREE_EDGES) });
        }
        let all: Vec<usize> = (0..edges).collect();
        let vertices: Vec<usize> = (0..geometry.vertex_count()).collect();
        let plan = ConditionalPlan::new(geometry, &all, Some(&vertices))?;
        let base = Configuration::empty(geometry.clone());
        let mut fixed = Vec::new();
        plan.fixed_codes(&base, &mut fixed);
        Ok(Enumeration { base, plan, fixed })
    }

    /// Visits every valid configuration's edge mask with its weight.
    pub fn visit<T: Scalar, F: FnMut(u64, &T)>(&self, w: &Weights<T>, f: F) {
        self.plan.visit(&self.fixed, w, f)
    }

    pub fn count(&self) -> u64 {
        let mut n = 0u64;
        self.visit(&Weights::<u64>::uniform(), |_, _| n += 1);
        n
    }

    pub fn masks(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.visit(&Weights::<u64>::uniform(), |m, _| out.push(m));
        out
    }

    pub fn configuration(&self, mask: u64) -> Configuration {
        let mut cfg = self.base.clone();
        self.plan.apply(mask, &mut cfg);
        cfg
    }

    pub fn configurations(&self) -> impl Iterator<Item = Configuration> + '_ {
        self.masks().into_iter().map(|m| self.configuration(m))
    }
}

pub fn enumerate_valid(geometry: &Arc<Geometry>) -> Result<Vec<Configuration>> {
    let e = Enumeration::new(geometry, DEFAULT_ENUMERATION_CAP)?;
    Ok(e.configurations().collect())
}

/// `Σ_ω Π_v w(ω|_v)` over valid configurations. With unit weights in `u64`
/// this is the exact number of configurations.
pub fn partition_function<T: Scalar>(geometry: &Arc<Geometry>, w: &Weights<T>, cap: usize) -> Result<T> {
    let e = Enumeration::new(geometry, cap)?;
    let mut z = T::zero();
    e.visit(w, |_, x| z = z.clone() + x.clone());
    Ok(z)
}

/// A finite distribution over assignments of a list of free edges.
#[derive(Clone, Debug)]
pub struct Distribution<T> {
    pub free_edges: Vec<usize>,
    /// Assignment masks; bit `p` is the presence of `free_edges[p]`. Distinct.
    pub support: Vec<u64>,
    pub probabilities: Vec<T>,
}

impl<T: Scalar> Distribution<T> {
    fn from_weights(free_edges: Vec<usize>, weighted: Vec<(u64, T)>) -> Result<Distribution<T>> {
        let total = weighted.iter().fold(T::zero(), |s, (_, x)| s + x.clone());
        if total.is_zero() {
            return Err(Error::FrozenBoundary);
        }
        let (support, probabilities) =
            weighted.into_iter().map(|(m, x)| (m, x / total.clone())).unzip();
        Ok(Distribution { free_edges, support, probabilities })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability_of(&self, mask: u64) -> T {
        self.support
            .iter()
            .position(|&m| m == mask)
            .map(|i| self.probabilities[i].clone())
            .unwrap_or_else(T::zero)
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().fold(T::zero(), |s, p| s + p.clone())
    }

    /// Writes assignment `i` into `cfg`.
    pub fn apply(&self, i: usize, cfg: &mut Configuration) {
        let mask = self.support[i];
        for (p, &e) in self.free_edges.iter().enumerate() {
            cfg.set(e, mask >> p & 1 == 1);
        }
    }
}

impl Distribution<f64> {
    /// Total-variation distance to another distribution over the same edges.
    pub fn total_variation(&self, other: &Distribution<f64>) -> f64 {
        let mut all: Vec<u64> = self.support.iter().chain(&other.support).copied().collect();
        all.sort_unstable();
        all.dedup();
        0.5 * all.iter().map(|&m| (self.probability_of(m) - other.probability_of(m)).abs()).sum::<f64>()
    }
}

/// Exact Gibbs distribution of the whole geometry.
pub fn exact_distribution<T: Scalar>(geometry: &Arc<Geometry>, w: &Weights<T>, cap: usize) -> Result<Distribution<T>> {
    let e = Enumeration::new(geometry, cap)?;
    let mut weighted = Vec::new();
    e.visit(w, |m, x| weighted.push((m, x.clone())));
    Distribution::from_weights(e.plan.free.clone(), weighted)
}

/// Conditional law of the edges in `window`, all other edges of `cfg` fixed.
///
/// The weight of an assignment is the product over every vertex whose code
/// depends on a window edge, i.e. all endpoints of window edges. Assignments
/// giving any such vertex code `{000}` or `{111}` have probability zero.
pub fn gibbs_conditional<T: Scalar>(cfg: &Configuration, window: &[usize], w: &Weights<T>) -> Result<Distribution<T>> {
    let mut free = window.to_vec();
    free.sort_unstable();
    free.dedup();
    if free.len() > DEFAULT_CONDITIONAL_CAP {
        return Err(Error::EnumerationCap { edges: free.len(), cap: DEFAULT_CONDITIONAL_CAP });
    }
    let plan = ConditionalPlan::new(cfg.geometry(), &free, None)?;
    let mut fixed = Vec::new();
    plan.fixed_codes(cfg, &mut fixed);
    let mut weighted = Vec::new();
    plan.visit(&fixed, w, |m, x| weighted.push((m, x.clone())));
    Distribution::from_weights(plan.free.clone(), weighted)
}
