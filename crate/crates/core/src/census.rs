//! Homogeneous clusters: maximal connected sets of vertices sharing one local
//! code.
//!
//! Connectivity is lattice adjacency by default (any lattice edge between two
//! same-code vertices, present or not). [`Adjacency::PresentOnly`] restricts it
//! to present edges for comparison.
//!
//! A finite window stands in for the plane: a cluster counts as "infinite"
//! when it reaches the window's rim.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::configuration::{Configuration, LocalCode};
use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Geometry, Mode};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adjacency {
    #[default]
    Lattice,
    PresentOnly,
}

/// The vertices a census looks at, and the rim used as the boundary proxy.
#[derive(Clone, Debug)]
pub struct ObservationWindow {
    member: Vec<bool>,
    rim: Vec<bool>,
    vertices: Vec<usize>,
}

impl ObservationWindow {
    /// All vertices. On a window geometry the rim is the set of vertices with an
    /// exterior neighbor; a torus has no rim.
    pub fn whole(g: &Geometry) -> ObservationWindow {
        let n = g.vertex_count();
        let rim = (0..n).map(|v| g.adjacent(v).iter().any(|u| u.is_none())).collect();
        ObservationWindow { member: vec![true; n], rim, vertices: (0..n).collect() }
    }

    /// The vertices of a box; its boundary vertices form the rim.
    pub fn from_box(g: &Geometry, b: BoxSpec) -> Result<ObservationWindow> {
        b.check_fits(g, 0)?;
        let vertices = locate_all(g, b)?;
        let mut member = vec![false; g.vertex_count()];
        for &v in &vertices {
            member[v] = true;
        }
        let rim = (0..g.vertex_count())
            .map(|v| member[v] && g.adjacent(v).iter().any(|u| u.is_none_or(|u| !member[u as usize])))
            .collect();
        Ok(ObservationWindow { member, rim, vertices })
    }

    /// A box together with its outer ring (vertices outside the box adjacent to
    /// it); the outer ring is the rim.
    pub fn box_with_outer_ring(g: &Geometry, b: BoxSpec) -> Result<ObservationWindow> {
        b.check_fits(g, 1)?;
        let inner = locate_all(g, b)?;
        let mut member = vec![false; g.vertex_count()];
        let mut rim = vec![false; g.vertex_count()];
        for &v in &inner {
            member[v] = true;
        }
        let mut vertices = inner.clone();
        for &v in &inner {
            for u in g.adjacent(v).iter().flatten() {
                let u = *u as usize;
                if !member[u] && !rim[u] {
                    rim[u] = true;
                    vertices.push(u);
                }
            }
        }
        for (m, r) in member.iter_mut().zip(&rim) {
            *m |= *r;
        }
        vertices.sort_unstable();
        Ok(ObservationWindow { member, rim, vertices })
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.member[v]
    }

    #[inline]
    pub fn is_rim(&self, v: usize) -> bool {
        self.rim[v]
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn rim_vertices(&self) -> Vec<usize> {
        self.vertices.iter().copied().filter(|&v| self.rim[v]).collect()
    }
}

fn locate_all(g: &Geometry, b: BoxSpec) -> Result<Vec<usize>> {
    b.lattice_vertices().into_iter().map(|v| g.locate(v).ok_or(Error::InvalidVertex(v))).collect()
}

struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub code: LocalCode,
    /// Sorted dense vertex indices.
    pub members: Vec<usize>,
    pub touches_window_boundary: bool,
    pub size: usize,
}

const UNLABELED: u32 = u32::MAX;

/// Clusters of a configuration inside a window, with a per-vertex label.
#[derive(Clone, Debug)]
pub struct ClusterMap {
    labels: Vec<u32>,
    pub clusters: Vec<Cluster>,
    pub adjacency: Adjacency,
}

impl ClusterMap {
    /// Labels the clusters of `code` (or of every code when `None`). Clusters are
    /// ordered by their smallest member.
    pub fn build(
        cfg: &Configuration,
        code: Option<LocalCode>,
        window: &ObservationWindow,
        adjacency: Adjacency,
    ) -> ClusterMap {
        let g = cfg.geometry();
        let n = g.vertex_count();
        let codes: Vec<LocalCode> = (0..n).map(|v| cfg.code_at(v)).collect();
        let wanted = |v: usize| window.contains(v) && code.is_none_or(|c| codes[v] == c);
        let mut dsu = DisjointSets::new(n);
        for &v in window.vertices() {
            if !wanted(v) {
                continue;
            }
            for (k, u) in g.adjacent(v).iter().enumerate() {
                let Some(u) = u.map(|u| u as usize) else { continue };
                if u > v && wanted(u) && codes[u] == codes[v] && linked(codes[v], k, adjacency) {
                    dsu.union(u, v);
                }
            }
        }
        let mut labels = vec![UNLABELED; n];
        let mut root_label = vec![UNLABELED; n];
        let mut clusters: Vec<Cluster> = Vec::new();
        for &v in window.vertices() {
            if !wanted(v) {
                continue;
            }
            let r = dsu.find(v);
            if root_label[r] == UNLABELED {
                root_label[r] = clusters.len() as u32;
                clusters.push(Cluster {
                    code: codes[v],
                    members: Vec::new(),
                    touches_window_boundary: false,
                    size: 0,
                });
            }
            let l = root_label[r];
            labels[v] = l;
            let c = &mut clusters[l as usize];
            c.members.push(v);
            c.size += 1;
            c.touches_window_boundary |= window.is_rim(v);
        }
        ClusterMap { labels, clusters, adjacency }
    }

    #[inline]
    pub fn label(&self, v: usize) -> Option<usize> {
        let l = self.labels[v];
        (l != UNLABELED).then_some(l as usize)
    }

    /// Clusters with a member in `region`, optionally only those reaching the rim.
    pub fn meeting(&self, region: &[usize], boundary_only: bool) -> Vec<usize> {
        let mut out: Vec<usize> = region
            .iter()
            .filter_map(|&v| self.label(v))
            .filter(|&l| !boundary_only || self.clusters[l].touches_window_boundary)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[inline]
fn linked(code: LocalCode, kind: usize, adjacency: Adjacency) -> bool {
    match adjacency {
        Adjacency::Lattice => true,
        // both endpoints share the code, so the edge is present iff the bit is set
        Adjacency::PresentOnly => code.value() >> kind & 1 == 1,
    }
}

fn require_valid(cfg: &Configuration) -> Result<()> {
    match cfg.violations().first() {
        Some(v) => Err(Error::InvalidConfiguration(*v)),
        None => Ok(()),
    }
}

/// Clusters of one code inside `window`.
pub fn census(
    cfg: &Configuration,
    code: LocalCode,
    window: &ObservationWindow,
    adjacency: Adjacency,
) -> Result<Vec<Cluster>> {
    require_valid(cfg)?;
    Ok(ClusterMap::build(cfg, Some(code), window, adjacency).clusters)
}

/// Number of distinct clusters of `code` with a member in `region`.
pub fn clusters_meeting(
    cfg: &Configuration,
    code: LocalCode,
    region: &[usize],
    window: &ObservationWindow,
    adjacency: Adjacency,
    boundary_only: bool,
) -> Result<(usize, Vec<Cluster>)> {
    require_valid(cfg)?;
    let map = ClusterMap::build(cfg, Some(code), window, adjacency);
    let hit = map.meeting(region, boundary_only);
    Ok((hit.len(), hit.into_iter().map(|l| map.clusters[l].clone()).collect()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub reaches_rim: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EncounterOutcome {
    pub is_encounter: bool,
    /// Label of the cluster containing all of `B_n`, if any.
    pub cluster: Option<usize>,
    /// Components of the cluster minus `B_{n+2}`.
    pub components: Vec<Component>,
    /// The three rim-reaching components when `is_encounter`.
    pub witness: Option<[Vec<usize>; 3]>,
    /// The cluster's vertices inside `B_{n+2}` form one connected piece. Not
    /// part of the definition; partitions from encounter boxes of one cluster
    /// are guaranteed compatible only when this holds.
    pub core_connected: bool,
}

/// Checks whether `B_n` is an encounter box: some cluster contains all of
/// `B_n`, and removing `B_{n+2}` leaves exactly three components, all of which
/// reach the rim.
pub fn is_encounter_box(
    cfg: &Configuration,
    b: BoxSpec,
    code: LocalCode,
    window: &ObservationWindow,
    adjacency: Adjacency,
) -> Result<EncounterOutcome> {
    require_valid(cfg)?;
    let map = ClusterMap::build(cfg, Some(code), window, adjacency);
    encounter_in_map(cfg.geometry(), &map, b, window)
}

/// [`is_encounter_box`] against an existing cluster map.
pub fn encounter_in_map(
    g: &Geometry,
    map: &ClusterMap,
    b: BoxSpec,
    window: &ObservationWindow,
) -> Result<EncounterOutcome> {
    let big = b.enlarged(2);
    if let Mode::Torus { l } = g.mode() {
        if big.n > *l {
            return Err(Error::BoxDoesNotFit { n: big.n, cx: b.center.0, cy: b.center.1, margin: 0 });
        }
    }
    let inner = locate_all(g, b)?;
    let outer = locate_all(g, big)?;
    if outer.iter().any(|&v| !window.contains(v) || window.is_rim(v)) {
        return Err(Error::BoxDoesNotFit { n: big.n, cx: b.center.0, cy: b.center.1, margin: 1 });
    }
    let none = EncounterOutcome {
        is_encounter: false,
        cluster: None,
        components: Vec::new(),
        witness: None,
        core_connected: false,
    };
    let Some(cid) = map.label(inner[0]) else { return Ok(none) };
    if inner.iter().any(|&v| map.label(v) != Some(cid)) {
        return Ok(none);
    }
    let mut removed = vec![false; g.vertex_count()];
    for &v in &outer {
        removed[v] = true;
    }
    let cluster = &map.clusters[cid];
    let mut seen = vec![false; g.vertex_count()];
    let mut components = Vec::new();
    for &start in &cluster.members {
        if removed[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut comp = Vec::new();
        let mut reaches_rim = false;
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            reaches_rim |= window.is_rim(v);
            for (k, u) in g.adjacent(v).iter().enumerate() {
                let Some(u) = u.map(|u| u as usize) else { continue };
                if !seen[u] && !removed[u] && map.label(u) == Some(cid) && linked(cluster.code, k, map.adjacency) {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        components.push(Component { vertices: comp, reaches_rim });
    }
    let is_encounter = components.len() == 3 && components.iter().all(|c| c.reaches_rim);
    let witness = is_encounter.then(|| {
        [components[0].vertices.clone(), components[1].vertices.clone(), components[2].vertices.clone()]
    });
    let core_connected = core_is_connected(g, map, cid, &outer, &removed);
    Ok(EncounterOutcome { is_encounter, cluster: Some(cid), components, witness, core_connected })
}

fn core_is_connected(g: &Geometry, map: &ClusterMap, cid: usize, outer: &[usize], inside: &[bool]) -> bool {
    let core: Vec<usize> = outer.iter().copied().filter(|&v| map.label(v) == Some(cid)).collect();
    let Some(&start) = core.first() else { return true };
    let code = map.clusters[cid].code;
    let mut seen = std::collections::HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for (k, u) in g.adjacent(v).iter().enumerate() {
            let Some(u) = u.map(|u| u as usize) else { continue };
            if inside[u] && map.label(u) == Some(cid) && linked(code, k, map.adjacency) && seen.insert(u) {
                queue.push_back(u);
            }
        }
    }
    seen.len() == core.len()
}

#[derive(Clone, Debug, Serialize)]
pub struct CodeReport {
    pub code: u8,
    pub clusters: usize,
    pub largest: usize,
    pub second_largest: usize,
    pub boundary_clusters: usize,
    /// Rim-reaching clusters meeting each requested box.
    pub boundary_clusters_per_box: Vec<usize>,
}

/// Census of all six valid codes in one configuration.
#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub window_size: usize,
    pub per_code: Vec<CodeReport>,
    #[serde(skip)]
    pub clusters: Vec<Vec<Cluster>>,
}

impl CensusReport {
    pub fn new(
        cfg: &Configuration,
        window: &ObservationWindow,
        adjacency: Adjacency,
        boxes: &[BoxSpec],
    ) -> Result<CensusReport> {
        require_valid(cfg)?;
        let g = cfg.geometry();
        let box_vertices = boxes.iter().map(|b| locate_all(g, *b)).collect::<Result<Vec<_>>>()?;
        let map = ClusterMap::build(cfg, None, window, adjacency);
        let mut per_code = Vec::with_capacity(6);
        let mut clusters = Vec::with_capacity(6);
        for code in LocalCode::VALID {
            let mine: Vec<&Cluster> = map.clusters.iter().filter(|c| c.code == code).collect();
            let mut sizes: Vec<usize> = mine.iter().map(|c| c.size).collect();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            let per_box = box_vertices
                .iter()
                .map(|region| {
                    map.meeting(region, true).into_iter().filter(|&l| map.clusters[l].code == code).count()
                })
                .collect();
            per_code.push(CodeReport {
                code: code.value(),
                clusters: mine.len(),
                largest: sizes.first().copied().unwrap_or(0),
                second_largest: sizes.get(1).copied().unwrap_or(0),
                boundary_clusters: mine.iter().filter(|c| c.touches_window_boundary).count(),
                boundary_clusters_per_box: per_box,
            });
            clusters.push(mine.into_iter().cloned().collect());
        }
        Ok(CensusReport { window_size: window.len(), per_code, clusters })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CodeStats {
    pub samples: u64,
    pub sum_largest_fraction: f64,
    pub sum_second_fraction: f64,
    pub max_second_fraction: f64,
    /// Samples whose second-largest cluster reaches the coexistence threshold.
    pub coexisting: u64,
    pub boundary_clusters: u64,
}

impl CodeStats {
    pub fn mean_largest_fraction(&self) -> f64 {
        self.sum_largest_fraction / self.samples.max(1) as f64
    }

    pub fn mean_second_fraction(&self) -> f64 {
        self.sum_second_fraction / self.samples.max(1) as f64
    }

    pub fn coexistence_frequency(&self) -> f64 {
        self.coexisting as f64 / self.samples.max(1) as f64
    }
}

/// Running largest/second-largest statistics over a stream of census reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeStatistics {
    /// Second-largest size, as a fraction of the window, that counts as coexistence.
    pub coexist_fraction: f64,
    pub samples: u64,
    pub per_code: Vec<CodeStats>,
}

impl SizeStatistics {
    pub fn new(coexist_fraction: f64) -> SizeStatistics {
        SizeStatistics { coexist_fraction, samples: 0, per_code: vec![CodeStats::default(); 6] }
    }

    pub fn add(&mut self, report: &CensusReport) {
        let size = report.window_size.max(1) as f64;
        self.samples += 1;
        for (stats, r) in self.per_code.iter_mut().zip(&report.per_code) {
            let largest = r.largest as f64 / size;
            let second = r.second_largest as f64 / size;
            stats.samples += 1;
            stats.sum_largest_fraction += largest;
            stats.sum_second_fraction += second;
            stats.max_second_fraction = stats.max_second_fraction.max(second);
            stats.coexisting += (second >= self.coexist_fraction && r.second_largest > 0) as u64;
            stats.boundary_clusters += r.boundary_clusters as u64;
        }
    }

    pub fn merge(&mut self, other: &SizeStatistics) {
        self.samples += other.samples;
        for (a, b) in self.per_code.iter_mut().zip(&other.per_code) {
            a.samples += b.samples;
            a.sum_largest_fraction += b.sum_largest_fraction;
            a.sum_second_fraction += b.sum_second_fraction;
            a.max_second_fraction = a.max_second_fraction.max(b.max_second_fraction);
            a.coexisting += b.coexisting;
            a.boundary_clusters += b.boundary_clusters;
        }
    }
}

pub fn size_statistics<'a>(reports: impl IntoIterator<Item = &'a CensusReport>, coexist_fraction: f64) -> SizeStatistics {
    let mut s = SizeStatistics::new(coexist_fraction);
    for r in reports {
        s.add(r);
    }
    s
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lattice::VertexId;

    fn torus(l: usize) -> Arc<Geometry> {
        Arc::new(Geometry::torus(l).unwrap())
    }

    #[test]
    fn all_horizontal_is_one_cluster() {
        let g = torus(5);
        let cfg = Configuration::all_horizontal(g.clone());
        let w = ObservationWindow::whole(&g);
        let c = census(&cfg, LocalCode::HORIZONTAL, &w, Adjacency::Lattice).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].size, 50);
        assert!(census(&cfg, LocalCode::new(2).unwrap(), &w, Adjacency::Lattice).unwrap().is_empty());
        // present-only adjacency keeps only the horizontal dimers together
        let p = census(&cfg, LocalCode::HORIZONTAL, &w, Adjacency::PresentOnly).unwrap();
        assert_eq!(p.len(), 25);
        let all: Vec<usize> = (0..g.vertex_count()).collect();
        let (n, _) = clusters_meeting(&cfg, LocalCode::HORIZONTAL, &all, &w, Adjacency::Lattice, false).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn invalid_configuration_rejected() {
        let g = torus(3);
        let w = ObservationWindow::whole(&g);
        let err = census(&Configuration::empty(g), LocalCode::HORIZONTAL, &w, Adjacency::Lattice);
        assert!(matches!(err, Err(Error::InvalidConfiguration(_))));
    }

    #[test]
    fn outer_ring_window() {
        let g = torus(12);
        let b = BoxSpec::new(4, (6, 6));
        let w = ObservationWindow::box_with_outer_ring(&g, b).unwrap();
        assert_eq!(w.rim_vertices().len(), 4 * 4);
        assert_eq!(w.len(), 32 + 16);
        let inner = ObservationWindow::from_box(&g, b).unwrap();
        assert_eq!(inner.rim_vertices().len(), 4 * 4 - 2);
    }

    #[test]
    fn all_horizontal_is_not_an_encounter_box() {
        let g = torus(16);
        let cfg = Configuration::all_horizontal(g.clone());
        let w = ObservationWindow::box_with_outer_ring(&g, BoxSpec::new(12, (8, 8))).unwrap();
        let out = is_encounter_box(&cfg, BoxSpec::new(1, (8, 8)), LocalCode::HORIZONTAL, &w, Adjacency::Lattice).unwrap();
        assert!(!out.is_encounter);
        assert_eq!(out.components.len(), 1);
        // the enlarged box must stay off the rim
        let err = is_encounter_box(&cfg, BoxSpec::new(11, (8, 8)), LocalCode::HORIZONTAL, &w, Adjacency::Lattice);
        assert!(err.is_err());
    }

    #[test]
    fn size_statistics_of_all_horizontal() {
        let g = torus(4);
        let cfg = Configuration::all_horizontal(g.clone());
        let w = ObservationWindow::whole(&g);
        let r = CensusReport::new(&cfg, &w, Adjacency::Lattice, &[]).unwrap();
        let s = size_statistics([&r, &r], 0.1);
        assert_eq!(s.per_code[0].mean_largest_fraction(), 1.0);
        assert_eq!(s.per_code[0].mean_second_fraction(), 0.0);
        let mut a = size_statistics([&r], 0.1);
        a.merge(&size_statistics([&r], 0.1));
        assert_eq!(a, s);
        let _ = VertexId::white(0, 0);
    }
}
