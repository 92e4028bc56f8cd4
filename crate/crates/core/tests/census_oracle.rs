mod common;

use std::collections::BTreeSet;

use onetwo::census::{census, clusters_meeting, is_encounter_box, Adjacency, ObservationWindow};
use onetwo::{BoxSpec, Configuration, EdgeKind, LocalCode, VertexId, Weights};

use common::{bfs_clusters, sampled, torus};

#[test]
fn union_find_matches_bfs_on_sampled_configurations() {
    let mut total = 0;
    for (l, w) in [(3, (1.0, 1.0, 1.0)), (4, (2.0, 1.0, 0.5)), (5, (0.5, 1.0, 1.5)), (6, (1.0, 1.0, 1.0))] {
        let configs = sampled(l, Weights::new(w.0, w.1, w.2).unwrap(), l as u64, 260, 1);
        for cfg in &configs {
            let window = ObservationWindow::whole(cfg.geometry());
            for code in LocalCode::VALID {
                for (adj, present) in [(Adjacency::Lattice, false), (Adjacency::PresentOnly, true)] {
                    let mine: Vec<Vec<usize>> =
                        census(cfg, code, &window, adj).unwrap().into_iter().map(|c| c.members).collect();
                    assert_eq!(mine, bfs_clusters(cfg, code.value(), present));
                }
            }
            total += 1;
        }
    }
    assert!(total >= 1000);
}

#[test]
fn clusters_are_maximal() {
    for cfg in sampled(5, Weights::uniform(), 3, 100, 2) {
        let g = cfg.geometry().clone();
        let window = ObservationWindow::whole(&g);
        for code in LocalCode::VALID {
            for c in census(&cfg, code, &window, Adjacency::Lattice).unwrap() {
                let members: BTreeSet<usize> = c.members.iter().copied().collect();
                for &v in &c.members {
                    for u in g.adjacent(v).iter().flatten() {
                        let u = *u as usize;
                        assert!(members.contains(&u) || cfg.code_at(u) != code);
                    }
                }
            }
        }
    }
}

#[test]
fn census_is_translation_equivariant() {
    for cfg in sampled(6, Weights::new(1.0, 2.0, 1.0).unwrap(), 9, 40, 3) {
        let g = cfg.geometry().clone();
        let window = ObservationWindow::whole(&g);
        let (dx, dy) = (2, 5);
        let moved = cfg.translated(dx, dy).unwrap();
        let shift = |v: usize| {
            let id = g.vertex_id(v);
            g.locate(VertexId { x: id.x + dx, y: id.y + dy, ..id }).unwrap()
        };
        for code in LocalCode::VALID {
            let mut a: Vec<Vec<usize>> = census(&cfg, code, &window, Adjacency::Lattice)
                .unwrap()
                .into_iter()
                .map(|c| {
                    let mut m: Vec<usize> = c.members.into_iter().map(shift).collect();
                    m.sort_unstable();
                    m
                })
                .collect();
            a.sort();
            let mut b: Vec<Vec<usize>> =
                census(&moved, code, &window, Adjacency::Lattice).unwrap().into_iter().map(|c| c.members).collect();
            b.sort();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn clusters_meeting_matches_marking() {
    for cfg in sampled(6, Weights::uniform(), 21, 60, 2) {
        let g = cfg.geometry().clone();
        let window = ObservationWindow::whole(&g);
        let region: Vec<usize> = BoxSpec::new(3, (2, 2)).lattice_vertices().into_iter().map(|v| g.locate(v).unwrap()).collect();
        for code in LocalCode::VALID {
            let (n, _) = clusters_meeting(&cfg, code, &region, &window, Adjacency::Lattice, false).unwrap();
            let hit = bfs_clusters(&cfg, code.value(), false)
                .into_iter()
                .filter(|c| c.iter().any(|v| region.contains(v)))
                .count();
            assert_eq!(n, hit);
            let all: Vec<usize> = (0..g.vertex_count()).collect();
            let (total, _) = clusters_meeting(&cfg, code, &all, &window, Adjacency::Lattice, false).unwrap();
            assert_eq!(total, bfs_clusters(&cfg, code.value(), false).len());
        }
    }
}

/// Three arms of horizontal dimers meeting at cell (8, 8): a row to the left,
/// a row to the right and a column downwards, on a background where every
/// non-horizontal edge is present. Conflicts at the junction are resolved by
/// resampling edges inside `B_3` away from the arms.
fn three_arm_configuration(left_end: i64) -> (Configuration, ObservationWindow) {
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
    let mut on_arm = vec![false; g.vertex_count()];
    for &(x, y) in &arm {
        for v in [VertexId::white(x, y), VertexId::black(x, y)] {
            on_arm[g.locate(v).unwrap()] = true;
        }
    }
    for v in 0..g.vertex_count() {
        if on_arm[v] {
            for (k, slot) in g.incident(v).iter().enumerate() {
                if let onetwo::lattice::Slot::Edge(e) = slot {
                    cfg.set(*e as usize, k == 0);
                }
            }
        }
    }
    // B(7,7) is squeezed between the left and lower arms with no edge left;
    // give it its horizontal edge and shift the excess degree down-left.
    let edge = |u: VertexId, v: VertexId| {
        let (u, v) = (g.locate(u).unwrap(), g.locate(v).unwrap());
        g.edge_between(u, v).or_else(|| g.edge_between(v, u)).unwrap().1
    };
    assert_eq!(cfg.violations(), vec![VertexId::black(7, 7)]);
    cfg.set(edge(VertexId::white(7, 7), VertexId::black(7, 7)), true);
    cfg.set(edge(VertexId::white(7, 7), VertexId::black(6, 7)), false);
    cfg.set(edge(VertexId::white(6, 7), VertexId::black(6, 7)), true);
    cfg.set(edge(VertexId::white(6, 7), VertexId::black(6, 6)), false);
    assert!(cfg.is_valid());
    let window = ObservationWindow::box_with_outer_ring(&g, BoxSpec::new(13, (8, 8))).unwrap();
    (cfg, window)
}

#[test]
fn hand_built_three_arms_form_an_encounter_box() {
    let (cfg, window) = three_arm_configuration(1);
    let out = is_encounter_box(&cfg, BoxSpec::new(1, (8, 8)), LocalCode::HORIZONTAL, &window, Adjacency::Lattice).unwrap();
    assert!(out.is_encounter, "{:?}", out.components.len());
    let witness = out.witness.unwrap();
    let g = cfg.geometry();
    let b3 = BoxSpec::new(3, (8, 8));
    let mut seen = BTreeSet::new();
    for comp in &witness {
        assert!(comp.iter().any(|&v| window.is_rim(v)));
        for &v in comp {
            assert!(!b3.contains(g.vertex_id(v)));
            assert!(seen.insert(v));
        }
    }
    // the whole inner box lies in a single cluster meeting it
    let inner: Vec<usize> = BoxSpec::new(1, (8, 8)).lattice_vertices().into_iter().map(|v| g.locate(v).unwrap()).collect();
    let (n, _) = clusters_meeting(&cfg, LocalCode::HORIZONTAL, &inner, &window, Adjacency::Lattice, false).unwrap();
    assert_eq!(n, 1);
    // with present-only adjacency the arms fall apart into dimers
    let out = is_encounter_box(&cfg, BoxSpec::new(1, (8, 8)), LocalCode::HORIZONTAL, &window, Adjacency::PresentOnly).unwrap();
    assert!(!out.is_encounter);
}

#[test]
fn a_finite_arm_is_not_enough() {
    // the left arm stops two cells short of the rim
    let (cfg, window) = three_arm_configuration(5);
    let out = is_encounter_box(&cfg, BoxSpec::new(1, (8, 8)), LocalCode::HORIZONTAL, &window, Adjacency::Lattice).unwrap();
    assert!(!out.is_encounter);
    assert_eq!(out.components.len(), 3);
    assert_eq!(out.components.iter().filter(|c| c.reaches_rim).count(), 2);
}
