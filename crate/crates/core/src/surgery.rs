//! Local configuration surgeries around a box `B_{N+2}`.
//!
//! [`rewire_box_interior`] turns every vertex of the inner box `B_N` into a
//! `{001}` vertex. [`build_encounter_box`] additionally seals the boundary of
//! `B_{N+2}` so that `{001}` clusters outside can reach `B_N` only through
//! three chosen boundary vertices. Both change codes only on `B_{N+2}` and the
//! two corner faces, which bounds the probability cost of the change by
//! [`probability_factor`].

use std::collections::VecDeque;

use serde::Serialize;

use crate::census::{Adjacency, ClusterMap, ObservationWindow};
use crate::configuration::{Configuration, LocalCode, Weights};
use crate::error::{Error, Result};
use crate::lattice::{BoxLayout, BoxSpec, EdgeKind, Geometry, Slot, VertexType};
use crate::scalar::Scalar;

/// Default number of rim-reaching `{001}` clusters meeting `B_{N+2}` above
/// which an admissible trident always exists.
pub const DEFAULT_TRIDENT_THRESHOLD: usize = 31;

/// `2(N+2)^2 + 10`: vertices of `B_{N+2}` plus the five outer vertices of each
/// corner face.
pub fn modification_bound(n: usize) -> usize {
    2 * (n + 2) * (n + 2) + 10
}

/// `½ (w_min / (6 w_max))^{2(N+2)^2+10}`, a lower bound on the probability
/// ratio between a surgery's output and input, summed over preimages.
pub fn probability_factor<T: Scalar>(n: usize, w: &Weights<T>) -> T {
    let (lo, hi) = w.extremes();
    let two = T::one() + T::one();
    let six = two.clone() + two.clone() + two.clone();
    num_traits::pow(lo / (six * hi), modification_bound(n)) / two
}

/// Natural log of [`probability_factor`], usable where the factor underflows.
pub fn log_probability_factor(n: usize, w: &Weights<f64>) -> f64 {
    let (lo, hi) = w.extremes();
    modification_bound(n) as f64 * (lo / (6.0 * hi)).ln() - std::f64::consts::LN_2
}

#[derive(Clone, Debug)]
pub struct SurgeryReport<T> {
    pub input: Configuration,
    pub output: Configuration,
    /// Sorted vertices whose local code differs between input and output.
    pub modified_vertices: Vec<usize>,
    pub bound: usize,
    pub factor: T,
}

impl<T: Scalar> SurgeryReport<T> {
    fn new(input: Configuration, output: Configuration, n: usize, w: &Weights<T>) -> Self {
        let modified_vertices =
            (0..input.geometry().vertex_count()).filter(|&v| input.code_at(v) != output.code_at(v)).collect();
        SurgeryReport { input, output, modified_vertices, bound: modification_bound(n), factor: probability_factor(n, w) }
    }

    pub fn within_bound(&self) -> bool {
        self.modified_vertices.len() <= self.bound
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange { what: "N", value: n, range: ">= 1" });
    }
    Ok(())
}

fn require_valid(cfg: &Configuration) -> Result<()> {
    match cfg.violations().first() {
        Some(v) => Err(Error::InvalidConfiguration(*v)),
        None => Ok(()),
    }
}

fn stored_edge(g: &Geometry, u: usize, v: usize) -> Result<usize> {
    g.edge_between(u, v)
        .map(|(_, e)| e)
        .ok_or_else(|| Error::Precondition(format!("{} and {} are not joined by a stored edge", g.vertex_id(u), g.vertex_id(v))))
}

/// Sides `h_i h_{i+1}` of a face listed cyclically.
fn sides(g: &Geometry, h: &[usize; 6]) -> Result<[usize; 6]> {
    let mut out = [0; 6];
    for i in 0..6 {
        out[i] = stored_edge(g, h[i], h[(i + 1) % 6])?;
    }
    Ok(out)
}

/// Makes every interior edge of `B_{N+2}` present iff horizontal, then repairs
/// both corners.
pub fn rewire_box_interior<T: Scalar>(
    cfg: &Configuration,
    n: usize,
    center: (i64, i64),
    w: &Weights<T>,
) -> Result<SurgeryReport<T>> {
    check_n(n)?;
    require_valid(cfg)?;
    let g = cfg.geometry().clone();
    let layout = BoxLayout::new(&g, BoxSpec::new(n + 2, center))?;
    let mut out = cfg.clone();
    for &e in &layout.interior_edges {
        out.set(e, g.edge_kind(e) == EdgeKind::A);
    }
    out = corner_repair(&out, &layout.h1)?;
    out = corner_repair(&out, &layout.h2)?;
    debug_assert!(out.is_valid());
    Ok(SurgeryReport::new(cfg.clone(), out, n, w))
}

/// Restores the 1-2 law at a box corner `h[0]` whose three edges may all be
/// present, editing only the sides of the face `h` (listed cyclically from the
/// corner). The corner's other two faces must lie inside the box, so `h[2]`
/// and `h[4]` are reached along `h[1]` and `h[5]`.
pub fn corner_repair(cfg: &Configuration, h: &[usize; 6]) -> Result<Configuration> {
    let g = cfg.geometry();
    let s = sides(g, h)?;
    if cfg.degree_at(h[0]) == 0 {
        return Err(Error::Precondition(format!("corner {} has no present edge", g.vertex_id(h[0]))));
    }
    let mut out = cfg.clone();
    let deg = |c: &Configuration, i: usize| c.degree_at(h[i]);
    if (1..=2).contains(&deg(&out, 0)) {
        return Ok(out);
    }
    if !(cfg.is_present(s[0]) && cfg.is_present(s[5])) {
        return Err(Error::Precondition(format!("corner {} has degree 3 without both face sides", g.vertex_id(h[0]))));
    }
    if out.code_at(h[2]) == LocalCode::HORIZONTAL {
        out.set(s[0], false);
        return Ok(out);
    }
    if out.code_at(h[4]) == LocalCode::HORIZONTAL {
        out.set(s[5], false);
        return Ok(out);
    }
    // Walk h1 → h6 alternately removing and adding sides until the degree of
    // the vertex just reached is back in {1, 2}.
    out.set(s[0], false);
    for i in 1..5 {
        let d = deg(&out, i);
        if (1..=2).contains(&d) {
            break;
        }
        out.set(s[i], d == 0);
    }
    Ok(out)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EncounterOptions {
    pub code: LocalCode,
    pub threshold: usize,
    pub adjacency: Adjacency,
}

impl Default for EncounterOptions {
    fn default() -> Self {
        EncounterOptions { code: LocalCode::HORIZONTAL, threshold: DEFAULT_TRIDENT_THRESHOLD, adjacency: Adjacency::Lattice }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trident {
    /// Ascending boundary vertices of `B_{N+2}`.
    pub vertices: [usize; 3],
    /// Rim-reaching clusters of the code meeting `B_{N+2}`.
    pub clusters_meeting: usize,
    /// Clusters with at least one admissible vertex.
    pub admissible_clusters: usize,
    /// `clusters_meeting >= threshold`, the regime where existence is certain.
    pub guaranteed: bool,
}

/// Picks three boundary vertices of `B_{N+2}` in distinct rim-reaching clusters
/// that avoid the exclusion set.
///
/// A boundary vertex `u` is admissible when it has the target code and its
/// neighbor across the box boundary lies in the same cluster, in a component
/// of the cluster minus `B_{N+2}` that reaches the rim. Every rim-reaching
/// cluster meeting the box has such a vertex. Ties go to the lexicographically
/// smallest triple.
pub fn select_trident(
    cfg: &Configuration,
    n: usize,
    center: (i64, i64),
    window: &ObservationWindow,
    opts: &EncounterOptions,
) -> Result<Trident> {
    check_n(n)?;
    require_valid(cfg)?;
    let g = cfg.geometry();
    let layout = BoxLayout::new(g, BoxSpec::new(n + 2, center))?;
    if layout.vertices.iter().any(|&v| !window.contains(v) || window.is_rim(v)) {
        return Err(Error::Precondition("B_{N+2} must lie inside the window, off its rim".into()));
    }
    let map = ClusterMap::build(cfg, Some(opts.code), window, opts.adjacency);
    let boundary = layout.boundary_vertices();
    let clusters_meeting = map.meeting(&boundary, true).len();

    let mut excluded = vec![false; map.clusters.len()];
    for v in layout.exclusion_set(g) {
        if let Some(l) = map.label(v) {
            excluded[l] = true;
        }
    }
    // component ids of (cluster \ B_{N+2}), filled lazily; u32::MAX = unvisited
    let mut comp = vec![u32::MAX; g.vertex_count()];
    let mut comp_reaches_rim: Vec<bool> = Vec::new();
    let mut admissible = Vec::new();
    for &u in &boundary {
        let Some(l) = map.label(u) else { continue };
        if excluded[l] || !map.clusters[l].touches_window_boundary {
            continue;
        }
        let outside = exterior_neighbors(g, &layout, u);
        let ok = outside.into_iter().any(|x| {
            if map.label(x) != Some(l) || !linked(cfg, u, x, opts.adjacency) {
                return false;
            }
            if comp[x] == u32::MAX {
                let id = comp_reaches_rim.len() as u32;
                comp_reaches_rim.push(flood(cfg, &map, &layout, window, x, id, &mut comp));
            }
            comp_reaches_rim[comp[x] as usize]
        });
        if ok {
            admissible.push((u, l));
        }
    }
    let mut distinct: Vec<usize> = admissible.iter().map(|&(_, l)| l).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(3);
    admissible.sort_unstable();
    for &(u, l) in &admissible {
        if chosen.len() < 3 && chosen.iter().all(|&(_, m)| m != l) {
            chosen.push((u, l));
        }
    }
    if chosen.len() < 3 {
        return Err(Error::InsufficientClusters { found: distinct.len() });
    }
    Ok(Trident {
        vertices: [chosen[0].0, chosen[1].0, chosen[2].0],
        clusters_meeting,
        admissible_clusters: distinct.len(),
        guaranteed: clusters_meeting >= opts.threshold,
    })
}

fn exterior_neighbors(g: &Geometry, layout: &BoxLayout, u: usize) -> Vec<usize> {
    g.adjacent(u).iter().flatten().map(|&x| x as usize).filter(|&x| !layout.contains(x)).collect()
}

fn linked(cfg: &Configuration, u: usize, x: usize, adjacency: Adjacency) -> bool {
    match adjacency {
        Adjacency::Lattice => true,
        Adjacency::PresentOnly => cfg.geometry().edge_between(u, x).is_some_and(|(_, e)| cfg.is_present(e))
            || cfg.geometry().edge_between(x, u).is_some_and(|(_, e)| cfg.is_present(e)),
    }
}

/// Labels the component of `start` in its cluster minus the box with `id`;
/// returns whether it reaches the rim.
fn flood(
    cfg: &Configuration,
    map: &ClusterMap,
    layout: &BoxLayout,
    window: &ObservationWindow,
    start: usize,
    id: u32,
    comp: &mut [u32],
) -> bool {
    let g = cfg.geometry();
    let l = map.label(start);
    let mut reaches = false;
    comp[start] = id;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        reaches |= window.is_rim(v);
        for &x in g.adjacent(v).iter().flatten() {
            let x = x as usize;
            if comp[x] == u32::MAX && !layout.contains(x) && map.label(x) == l && linked(cfg, v, x, map.adjacency) {
                comp[x] = id;
                queue.push_back(x);
            }
        }
    }
    reaches
}

/// Edges of a TypeII boundary vertex: horizontal, boundary, and the remaining
/// interior one.
struct BoundaryEdges {
    e_b: usize,
    e_i: usize,
}

fn boundary_edges(g: &Geometry, layout: &BoxLayout, u: usize) -> Result<BoundaryEdges> {
    let mut e_b = None;
    let mut e_i = None;
    for k in 1..3 {
        let Slot::Edge(e) = g.incident(u)[k] else {
            return Err(Error::Precondition("box edges must be stored".into()));
        };
        let x = g.adjacent(u)[k].expect("stored edge has two endpoints") as usize;
        if layout.contains(x) {
            e_i = Some(e as usize);
        } else {
            e_b = Some(e as usize);
        }
    }
    match (e_b, e_i) {
        (Some(e_b), Some(e_i)) => Ok(BoundaryEdges { e_b, e_i }),
        _ => Err(Error::Precondition(format!("{} is not a TypeII boundary vertex", g.vertex_id(u)))),
    }
}

/// Rewires `B_{N+2}` and its corner faces so that `B_N` is filled with `{001}`
/// vertices and every boundary vertex of `B_{N+2}` except the trident has a
/// code other than `{001}`.
///
/// Each trident vertex must be a `{001}` TypeII boundary vertex outside the
/// exclusion set; [`select_trident`] produces such triples.
pub fn build_encounter_box<T: Scalar>(
    cfg: &Configuration,
    n: usize,
    center: (i64, i64),
    trident: [usize; 3],
    w: &Weights<T>,
) -> Result<SurgeryReport<T>> {
    check_n(n)?;
    require_valid(cfg)?;
    let g = cfg.geometry().clone();
    let outer = BoxLayout::new(&g, BoxSpec::new(n + 2, center))?;
    let inner = BoxLayout::new(&g, BoxSpec::new(n, center))?;
    let exclusion = outer.exclusion_set(&g);
    let mut is_trident = vec![false; g.vertex_count()];
    for &u in &trident {
        let pos = outer.vertices.iter().position(|&v| v == u);
        let type_ii = pos.is_some_and(|i| outer.types[i] == VertexType::TypeII);
        if !type_ii || exclusion.binary_search(&u).is_ok() || cfg.code_at(u) != LocalCode::HORIZONTAL || is_trident[u] {
            return Err(Error::Precondition(format!(
                "{} is not a distinct {{001}} boundary vertex outside the exclusion set",
                g.vertex_id(u)
            )));
        }
        is_trident[u] = true;
    }

    let mut out = cfg.clone();
    // (i) horizontal edges of the outer contour
    for e in outer.outer_contour(&g) {
        if g.edge_kind(e) == EdgeKind::A {
            out.set(e, true);
        }
    }
    // (ii) e_i is the negation of e_b on every other TypeII boundary vertex
    for (&u, &t) in outer.vertices.iter().zip(&outer.types) {
        if t == VertexType::TypeII && !is_trident[u] {
            let BoundaryEdges { e_b, e_i } = boundary_edges(&g, &outer, u)?;
            out.set(e_i, !out.is_present(e_b));
        }
    }
    // (iii) the corner's horizontal edge is present only if p (resp. q) would
    // otherwise be isolated
    for (corner, partner) in [(outer.v1, outer.p), (outer.w1, outer.q)] {
        let e = stored_edge(&g, corner, partner)?;
        out.set(e, false);
        out.set(e, out.degree_at(partner) == 0);
    }
    // (iv) alternating sides on both corner faces, starting with the corner's
    // b-side so the corner keeps a non-horizontal edge
    for h in [&outer.h1, &outer.h2] {
        for (i, e) in sides(&g, h)?.into_iter().enumerate() {
            out.set(e, i % 2 == 0);
        }
    }
    // (v) B_N all horizontal, cut off along its boundary
    for &e in &inner.boundary_edges {
        out.set(e, false);
    }
    for &e in &inner.interior_edges {
        out.set(e, g.edge_kind(e) == EdgeKind::A);
    }

    let mut frozen = vec![false; g.vertex_count()];
    for &v in inner.vertices.iter().chain(&trident) {
        frozen[v] = true;
    }
    repair(&mut out, &outer, &frozen)?;
    Ok(SurgeryReport::new(cfg.clone(), out, n, w))
}

const REPAIR_PASSES: usize = 8;

/// Bounded local repair: flips single edges inside `B_{N+2}` or on its corner
/// faces that fix a violating vertex without breaking the other endpoint or
/// touching a frozen vertex.
fn repair(cfg: &mut Configuration, layout: &BoxLayout, frozen: &[bool]) -> Result<()> {
    let g = cfg.geometry().clone();
    let mut region = layout.member_mask().to_vec();
    for &v in layout.h1.iter().chain(&layout.h2) {
        region[v] = true;
    }
    let candidates: Vec<usize> =
        layout.vertices.iter().chain(&layout.h1).chain(&layout.h2).copied().filter(|&v| region[v]).collect();
    for _ in 0..REPAIR_PASSES {
        let bad: Vec<usize> = candidates.iter().copied().filter(|&v| !cfg.code_at(v).is_valid()).collect();
        if bad.is_empty() {
            return Ok(());
        }
        for v in bad {
            if cfg.code_at(v).is_valid() {
                continue;
            }
            let want = cfg.degree_at(v) == 0;
            for k in 0..3 {
                let (Slot::Edge(e), Some(x)) = (g.incident(v)[k], g.adjacent(v)[k]) else { continue };
                let (e, x) = (e as usize, x as usize);
                if !region[x] || frozen[x] || frozen[v] || cfg.is_present(e) == want {
                    continue;
                }
                cfg.set(e, want);
                if cfg.code_at(x).is_valid() {
                    break;
                }
                cfg.set(e, !want);
            }
        }
    }
    match cfg.violation_indices().first() {
        Some(&v) => Err(Error::Unrepairable { vertex: g.vertex_id(v) }),
        None => Ok(()),
    }
}

#[derive(Clone, Debug)]
pub struct EncounterSurgery<T> {
    pub trident: Trident,
    pub report: SurgeryReport<T>,
}

/// [`select_trident`] followed by [`build_encounter_box`].
pub fn make_encounter_box<T: Scalar>(
    cfg: &Configuration,
    n: usize,
    center: (i64, i64),
    window: &ObservationWindow,
    opts: &EncounterOptions,
    w: &Weights<T>,
) -> Result<EncounterSurgery<T>> {
    let trident = select_trident(cfg, n, center, window, opts)?;
    let report = build_encounter_box(cfg, n, center, trident.vertices, w)?;
    Ok(EncounterSurgery { trident, report })
}
