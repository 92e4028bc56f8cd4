//! Three-block partitions, their compatibility relation, and the encounter-box
//! counting that bounds how many encounter boxes one cluster can have.
//!
//! Removing an encounter box from its cluster splits the cluster's rim
//! vertices `Y` into three blocks. Partitions from different boxes of one
//! cluster are pairwise compatible, and a pairwise compatible family has at
//! most `|Y| - 2` members, so the encounter boxes of a cluster are bounded by
//! its rim contact.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::census::{encounter_in_map, Adjacency, ClusterMap, ObservationWindow};
use crate::configuration::{Configuration, LocalCode, Weights};
use crate::error::{Error, Result};
use crate::lattice::BoxSpec;
use crate::surgery::probability_factor;

/// A partition of a finite ground set into three nonempty blocks. Blocks are
/// unordered; labels are normalized by first occurrence along the sorted
/// ground set, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Partition3 {
    ground: Vec<usize>,
    labels: Vec<u8>,
}

impl Partition3 {
    pub fn from_blocks(blocks: [&[usize]; 3]) -> Result<Partition3> {
        let mut tagged: Vec<(usize, u8)> = Vec::new();
        for (i, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::Precondition("partition blocks must be nonempty".into()));
            }
            tagged.extend(b.iter().map(|&y| (y, i as u8)));
        }
        tagged.sort_unstable();
        if tagged.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Precondition("partition blocks must be disjoint".into()));
        }
        let (ground, labels) = tagged.into_iter().unzip();
        Ok(Partition3::normalized(ground, labels))
    }

    /// From a sorted, duplicate-free ground set and a label in `0..3` per element.
    pub fn from_labels(ground: Vec<usize>, labels: Vec<u8>) -> Result<Partition3> {
        if ground.len() != labels.len() || ground.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("ground set must be sorted and match the labels".into()));
        }
        let mut seen = [false; 3];
        for &l in &labels {
            *seen.get_mut(l as usize).ok_or_else(|| Error::Precondition("labels must be 0, 1 or 2".into()))? = true;
        }
        if seen != [true; 3] {
            return Err(Error::Precondition("partition blocks must be nonempty".into()));
        }
        Ok(Partition3::normalized(ground, labels))
    }

    fn normalized(ground: Vec<usize>, labels: Vec<u8>) -> Partition3 {
        let mut map = [u8::MAX; 3];
        let mut next = 0;
        let labels = labels
            .into_iter()
            .map(|l| {
                if map[l as usize] == u8::MAX {
                    map[l as usize] = next;
                    next += 1;
                }
                map[l as usize]
            })
            .collect();
        Partition3 { ground, labels }
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn blocks(&self) -> [Vec<usize>; 3] {
        let mut out: [Vec<usize>; 3] = Default::default();
        for (&y, &l) in self.ground.iter().zip(&self.labels) {
            out[l as usize].push(y);
        }
        out
    }

    /// Some block of `self` contains the union of two blocks of `other`.
    fn absorbs(&self, other: &Partition3) -> bool {
        (0..3u8).any(|left_out| {
            let mut target = None;
            self.labels.iter().zip(&other.labels).filter(|(_, &q)| q != left_out).all(|(&p, _)| {
                *target.get_or_insert(p) == p
            })
        })
    }
}

/// `P` and `Q` are compatible when two blocks of one lie inside a single
/// block of the other. Both directions are checked; they always agree, since
/// `Q_2 ∪ Q_3 ⊆ P_1` is equivalent to `P_2 ∪ P_3 ⊆ Q_1`.
pub fn is_compatible(p: &Partition3, q: &Partition3) -> Result<bool> {
    if p.ground != q.ground {
        return Err(Error::GroundSetMismatch);
    }
    Ok(p.absorbs(q) || q.absorbs(p))
}

/// Every 3-block partition of `{0, .., k-1}`, in restricted-growth order.
pub fn all_partitions(k: usize) -> Vec<Partition3> {
    let mut out = Vec::new();
    if k < 3 {
        return out;
    }
    let mut labels = vec![0u8; k];
    fn rec(i: usize, max: u8, labels: &mut Vec<u8>, out: &mut Vec<Partition3>) {
        let k = labels.len();
        // blocks still to open must fit in the remaining positions
        if (2 - max.min(2)) as usize > k - i {
            return;
        }
        if i == k {
            if max == 2 {
                out.push(Partition3 { ground: (0..k).collect(), labels: labels.clone() });
            }
            return;
        }
        for l in 0..=(max + 1).min(2) {
            labels[i] = l;
            rec(i + 1, max.max(l), labels, out);
        }
    }
    rec(1, 0, &mut labels, &mut out);
    out
}

/// The chain `{0..t-1}, {t}, {t+1..k-1}` for `t = 1..k-2`: `k - 2` pairwise
/// compatible partitions of `{0, .., k-1}`.
pub fn nested_family(k: usize) -> Vec<Partition3> {
    (1..k.saturating_sub(1))
        .map(|t| {
            let labels = (0..k).map(|y| (y > t) as u8 * 2 + (y == t) as u8).collect();
            Partition3 { ground: (0..k).collect(), labels }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibleFamily {
    pub ground_size: usize,
    pub partitions_considered: usize,
    pub size: usize,
    pub witness: Vec<Partition3>,
}

pub const MAX_FAMILY_GROUND: usize = 7;

/// Largest pairwise compatible family of 3-block partitions of a `k`-set,
/// found by branch and bound over the compatibility graph.
pub fn max_compatible_family(k: usize) -> Result<CompatibleFamily> {
    if !(3..=MAX_FAMILY_GROUND).contains(&k) {
        return Err(Error::OutOfRange { what: "|Y|", value: k, range: "3..=7" });
    }
    let parts = all_partitions(k);
    let n = parts.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = is_compatible(&parts[i], &parts[j])?;
            adj[i][j] = c;
            adj[j][i] = c;
        }
    }
    let clique = max_clique(&adj);
    Ok(CompatibleFamily {
        ground_size: k,
        partitions_considered: n,
        size: clique.len(),
        witness: clique.into_iter().map(|i| parts[i].clone()).collect(),
    })
}

/// Maximum clique with greedy-coloring bounds.
fn max_clique(adj: &[Vec<bool>]) -> Vec<usize> {
    let mut best = Vec::new();
    let mut current = Vec::new();
    let all: Vec<usize> = (0..adj.len()).collect();
    expand(adj, &mut current, all, &mut best);
    best.sort_unstable();
    best
}

fn expand(adj: &[Vec<bool>], current: &mut Vec<usize>, candidates: Vec<usize>, best: &mut Vec<usize>) {
    let (order, colors) = color_sort(adj, &candidates);
    for idx in (0..order.len()).rev() {
        if current.len() + colors[idx] <= best.len() {
            return;
        }
        let v = order[idx];
        current.push(v);
        let next: Vec<usize> = order[..idx].iter().copied().filter(|&u| adj[v][u]).collect();
        if next.is_empty() {
            if current.len() > best.len() {
                best.clone_from(current);
            }
        } else {
            expand(adj, current, next, best);
        }
        current.pop();
    }
}

/// Candidates reordered by greedy color class; `colors[i]` is the number of
/// colors used up to position `i`, an upper bound on any clique among
/// `order[..=i]`.
fn color_sort(adj: &[Vec<bool>], candidates: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in candidates {
        match classes.iter_mut().find(|c| c.iter().all(|&u| !adj[v][u])) {
            Some(c) => c.push(v),
            None => classes.push(vec![v]),
        }
    }
    let mut order = Vec::with_capacity(candidates.len());
    let mut colors = Vec::with_capacity(candidates.len());
    for (i, c) in classes.into_iter().enumerate() {
        for v in c {
            order.push(v);
            colors.push(i + 1);
        }
    }
    (order, colors)
}

/// `s x s` disjoint translates of `B_{N+2}` tiling `B_{s(N+2)}`, each holding a
/// concentric `B_N`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TilingSpec {
    pub s: usize,
    pub n: usize,
    pub center: (i64, i64),
}

impl TilingSpec {
    pub fn new(s: usize, n: usize, center: (i64, i64)) -> Result<TilingSpec> {
        if s == 0 || n == 0 {
            return Err(Error::OutOfRange { what: "s and N", value: s.min(n), range: ">= 1" });
        }
        Ok(TilingSpec { s, n, center })
    }

    pub fn big_box(&self) -> BoxSpec {
        BoxSpec::new(self.s * (self.n + 2), self.center)
    }

    /// Sub-box `(i, j)` for `0 <= i, j < s`, as a `B_{N+2}`.
    pub fn sub_box(&self, i: usize, j: usize) -> BoxSpec {
        let (ox, oy) = self.big_box().origin();
        let m = (self.n + 2) as i64;
        let half = m / 2;
        BoxSpec::new(self.n + 2, (ox + i as i64 * m + half, oy + j as i64 * m + half))
    }

    /// The family of inner boxes `B_N(i, j)`, row-major in `(j, i)`.
    pub fn inner_boxes(&self) -> Vec<BoxSpec> {
        let mut out = Vec::with_capacity(self.s * self.s);
        for j in 0..self.s {
            for i in 0..self.s {
                out.push(BoxSpec::new(self.n, self.sub_box(i, j).center));
            }
        }
        out
    }

    /// `4s(N+4)`, the perimeter estimate for the number of rim vertices.
    pub fn perimeter_estimate(&self) -> usize {
        4 * self.s * (self.n + 4)
    }
}

fn pairwise(p: &[&Partition3]) -> bool {
    (0..p.len()).all(|i| (i + 1..p.len()).all(|j| is_compatible(p[i], p[j]).unwrap_or(false)))
}

#[derive(Clone, Debug, Serialize)]
pub struct RejectedBox {
    pub spec: BoxSpec,
    /// Components of the cluster minus `B_{N+2}`, and how many reach the rim.
    pub components: usize,
    pub reaching_rim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionFamily {
    pub cluster: usize,
    /// `Y`: the cluster's rim vertices, sorted.
    pub ground: Vec<usize>,
    pub boxes: Vec<BoxSpec>,
    pub partitions: Vec<Partition3>,
    /// Parallel to `partitions`: see [`crate::census::EncounterOutcome::core_connected`].
    pub core_connected: Vec<bool>,
    pub rejected: Vec<RejectedBox>,
}

impl PartitionFamily {
    pub fn pairwise_compatible(&self) -> bool {
        pairwise(&self.partitions.iter().collect::<Vec<_>>())
    }

    /// Pairwise compatibility among the boxes whose core is connected.
    pub fn connected_core_compatible(&self) -> bool {
        let kept: Vec<&Partition3> =
            self.partitions.iter().zip(&self.core_connected).filter(|(_, &c)| c).map(|(p, _)| p).collect();
        pairwise(&kept)
    }

    /// `|family| <= |Y| - 2`.
    pub fn within_bound(&self) -> bool {
        self.partitions.is_empty() || self.partitions.len() + 2 <= self.ground.len()
    }
}

/// Partitions of the rim vertices of cluster `cluster` induced by those of
/// `boxes` that are encounter boxes for it; other boxes are rejected.
pub fn partitions_from_encounter_boxes(
    cfg: &Configuration,
    map: &ClusterMap,
    cluster: usize,
    boxes: &[BoxSpec],
    window: &ObservationWindow,
) -> Result<PartitionFamily> {
    let g = cfg.geometry();
    let c = map.clusters.get(cluster).ok_or(Error::OutOfRange {
        what: "cluster",
        value: cluster,
        range: "labels of the cluster map",
    })?;
    let ground: Vec<usize> = c.members.iter().copied().filter(|&v| window.is_rim(v)).collect();
    let mut family =
        PartitionFamily {
        cluster,
        ground: ground.clone(),
        boxes: Vec::new(),
        partitions: Vec::new(),
        core_connected: Vec::new(),
        rejected: Vec::new(),
    };
    for &b in boxes {
        let out = encounter_in_map(g, map, b, window)?;
        if let (true, Some(cid), Some(w)) = (out.is_encounter, out.cluster, &out.witness) {
            if cid == cluster {
                let mut labels = vec![0u8; ground.len()];
                for (i, comp) in w.iter().enumerate() {
                    for v in comp {
                        if let Ok(pos) = ground.binary_search(v) {
                            labels[pos] = i as u8;
                        }
                    }
                }
                family.partitions.push(Partition3::from_labels(ground.clone(), labels)?);
                family.boxes.push(b);
                family.core_connected.push(out.core_connected);
                continue;
            }
        }
        if out.cluster == Some(cluster) {
            family.rejected.push(RejectedBox {
                spec: b,
                components: out.components.len(),
                reaching_rim: out.components.iter().filter(|c| c.reaches_rim).count(),
            });
        }
    }
    Ok(family)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterEncounters {
    pub cluster_size: usize,
    pub y_size: usize,
    pub encounter_boxes: usize,
    pub disconnected_cores: usize,
    pub pairwise_compatible: bool,
    pub connected_core_compatible: bool,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KeaneSample {
    pub encounter_boxes: usize,
    pub clusters: Vec<ClusterEncounters>,
    /// `Σ (|Y| - 2)` over clusters with at least one encounter box.
    pub y_cap: usize,
    pub rim_size: usize,
    pub perimeter_estimate: usize,
    /// Incompatible families, families over `|Y| - 2`, and a total over the cap.
    pub violations: usize,
    /// Incompatible families after dropping boxes with a disconnected core.
    pub connected_core_violations: usize,
    pub disconnected_core_boxes: usize,
}

/// Encounter boxes of one configuration among the tiling's inner boxes, with
/// their partition families checked against compatibility and `|Y| - 2`.
pub fn keane_sample(
    cfg: &Configuration,
    spec: &TilingSpec,
    code: LocalCode,
    adjacency: Adjacency,
) -> Result<KeaneSample> {
    let g = cfg.geometry();
    let window = ObservationWindow::box_with_outer_ring(g, spec.big_box())?;
    if let Some(v) = cfg.violations().first() {
        return Err(Error::InvalidConfiguration(*v));
    }
    let map = ClusterMap::build(cfg, Some(code), &window, adjacency);
    let boxes = spec.inner_boxes();
    let mut by_cluster: BTreeMap<usize, Vec<BoxSpec>> = BTreeMap::new();
    for &b in &boxes {
        let out = encounter_in_map(g, &map, b, &window)?;
        if out.is_encounter {
            by_cluster.entry(out.cluster.expect("encounter has a cluster")).or_default().push(b);
        }
    }
    let mut sample = KeaneSample {
        encounter_boxes: 0,
        clusters: Vec::new(),
        y_cap: 0,
        rim_size: window.rim_vertices().len(),
        perimeter_estimate: spec.perimeter_estimate(),
        violations: 0,
        connected_core_violations: 0,
        disconnected_core_boxes: 0,
    };
    for (cid, cboxes) in by_cluster {
        let fam = partitions_from_encounter_boxes(cfg, &map, cid, &cboxes, &window)?;
        let entry = ClusterEncounters {
            cluster_size: map.clusters[cid].size,
            y_size: fam.ground.len(),
            encounter_boxes: fam.partitions.len(),
            disconnected_cores: fam.core_connected.iter().filter(|&&c| !c).count(),
            pairwise_compatible: fam.pairwise_compatible(),
            connected_core_compatible: fam.connected_core_compatible(),
            within_bound: fam.within_bound(),
        };
        sample.encounter_boxes += entry.encounter_boxes;
        sample.y_cap += entry.y_size.saturating_sub(2);
        sample.violations += (!entry.pairwise_compatible) as usize + (!entry.within_bound) as usize;
        sample.connected_core_violations += (!entry.connected_core_compatible) as usize;
        sample.disconnected_core_boxes += entry.disconnected_cores;
        sample.clusters.push(entry);
    }
    if sample.encounter_boxes > sample.y_cap {
        sample.violations += 1;
    }
    Ok(sample)
}

#[derive(Clone, Debug, Serialize)]
pub struct KeaneReport {
    pub spec: TilingSpec,
    pub samples: usize,
    pub total_encounter_boxes: usize,
    pub max_encounter_boxes: usize,
    pub mean_encounter_boxes: f64,
    pub violations: usize,
    pub connected_core_violations: usize,
    pub disconnected_core_boxes: usize,
    pub max_rim_size: usize,
    pub perimeter_estimate: usize,
    /// `½ (w_min / 6 w_max)^{2(N+2)^2+10} s^2`.
    pub lower_bound: f64,
    pub per_sample: Vec<KeaneSample>,
}

pub fn keane_census<'a>(
    samples: impl IntoIterator<Item = &'a Configuration>,
    spec: &TilingSpec,
    code: LocalCode,
    w: &Weights<f64>,
    adjacency: Adjacency,
) -> Result<KeaneReport> {
    let mut per_sample = Vec::new();
    for cfg in samples {
        per_sample.push(keane_sample(cfg, spec, code, adjacency)?);
    }
    let total: usize = per_sample.iter().map(|s| s.encounter_boxes).sum();
    Ok(KeaneReport {
        spec: *spec,
        samples: per_sample.len(),
        total_encounter_boxes: total,
        max_encounter_boxes: per_sample.iter().map(|s| s.encounter_boxes).max().unwrap_or(0),
        mean_encounter_boxes: total as f64 / per_sample.len().max(1) as f64,
        violations: per_sample.iter().map(|s| s.violations).sum(),
        connected_core_violations: per_sample.iter().map(|s| s.connected_core_violations).sum(),
        disconnected_core_boxes: per_sample.iter().map(|s| s.disconnected_core_boxes).sum(),
        max_rim_size: per_sample.iter().map(|s| s.rim_size).max().unwrap_or(0),
        perimeter_estimate: spec.perimeter_estimate(),
        lower_bound: probability_factor(spec.n, w) * (spec.s * spec.s) as f64,
        per_sample,
    })
}
