mod common;

use std::collections::BTreeSet;

use onetwo::census::{is_encounter_box, Adjacency, ObservationWindow};
use onetwo::lattice::{BoxLayout, Slot};
use onetwo::surgery::{build_encounter_box, corner_repair, rewire_box_interior, select_trident, EncounterOptions};
use onetwo::{BoxSpec, Configuration, Error, LocalCode, Weights};

use common::{sampled, torus};

fn face_sides(cfg: &Configuration, h: &[usize; 6]) -> [usize; 6] {
    let g = cfg.geometry();
    std::array::from_fn(|i| g.edge_between(h[i], h[(i + 1) % 6]).or_else(|| g.edge_between(h[(i + 1) % 6], h[i])).unwrap().1)
}

/// The edge of `v` that is not a side of the face.
fn third_edge(cfg: &Configuration, v: usize, sides: &[usize; 6]) -> usize {
    cfg.geometry()
        .incident(v)
        .iter()
        .map(|s| match s {
            Slot::Edge(e) => *e as usize,
            Slot::Stub(_) => unreachable!(),
        })
        .find(|e| !sides.contains(e))
        .unwrap()
}

#[test]
fn corner_cascade_case_table() {
    let g = torus(9);
    let layout = BoxLayout::new(&g, BoxSpec::new(3, (4, 4))).unwrap();
    let base = Configuration::empty(g.clone());
    for h in [layout.h1, layout.h2] {
        let sides = face_sides(&base, &h);
        let thirds: Vec<usize> = h.iter().map(|&v| third_edge(&base, v, &sides)).collect();
        let (mut cases, mut v3_branch) = (0, 0);
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
                let out = corner_repair(&cfg, &h).unwrap();
                for &v in &h {
                    assert!((1..=2).contains(&out.degree_at(v)), "sides {side_bits:06b} stubs {stub_bits:05b}");
                }
                let changed: BTreeSet<usize> = (0..g.edge_count()).filter(|&e| out.is_present(e) != cfg.is_present(e)).collect();
                assert!(changed.iter().all(|e| sides.contains(e)));
                if cfg.code_at(h[2]) == LocalCode::HORIZONTAL {
                    v3_branch += 1;
                    assert_eq!(changed, BTreeSet::from([sides[0]]));
                }
            }
        }
        assert!(cases > 0 && v3_branch > 0);
    }
}

#[test]
fn corner_repair_leaves_degree_one_corner_alone() {
    let g = torus(9);
    let layout = BoxLayout::new(&g, BoxSpec::new(3, (4, 4))).unwrap();
    let cfg = Configuration::all_horizontal(g);
    assert_eq!(corner_repair(&cfg, &layout.h1).unwrap(), cfg);
    let empty = Configuration::empty(cfg.geometry().clone());
    assert!(matches!(corner_repair(&empty, &layout.h1), Err(Error::Precondition(_))));
}

#[test]
fn rewiring_sampled_configurations() {
    let n = 3;
    let center = (8, 8);
    let w = Weights::new(1.0, 2.0, 0.5).unwrap();
    for cfg in sampled(16, w.clone(), 5, 150, 1) {
        let g = cfg.geometry().clone();
        let outer = BoxLayout::new(&g, BoxSpec::new(n + 2, center)).unwrap();
        let report = rewire_box_interior(&cfg, n, center, &w).unwrap();
        assert!(report.output.is_valid());
        assert!(report.within_bound());
        for v in BoxSpec::new(n, center).lattice_vertices() {
            assert_eq!(report.output.local_code(v).unwrap(), LocalCode::HORIZONTAL);
        }
        let mut region: BTreeSet<usize> = outer.vertices.iter().copied().collect();
        region.extend(outer.h1);
        region.extend(outer.h2);
        for e in 0..g.edge_count() {
            let [a, b] = g.endpoints(e);
            if !region.contains(&a) && !region.contains(&b) {
                assert_eq!(cfg.is_present(e), report.output.is_present(e));
            }
        }
        assert!(report.modified_vertices.iter().all(|v| region.contains(v)));
        for v in 0..g.vertex_count() {
            if cfg.code_at(v) == LocalCode::HORIZONTAL && report.modified_vertices.binary_search(&v).is_err() {
                assert_eq!(report.output.code_at(v), LocalCode::HORIZONTAL);
            }
        }
        let again = rewire_box_interior(&cfg, n, center, &w).unwrap();
        assert_eq!(again.output, report.output);
    }
}

#[test]
fn encounter_surgery_on_sampled_configurations() {
    // the window rim sits right outside B_{N+2}, so rim-reaching clusters are common
    let n = 5;
    let center = (10, 10);
    let w = Weights::new(2.0, 1.0, 1.0).unwrap();
    let opts = EncounterOptions::default();
    let (mut built, mut insufficient) = (0, 0);
    for cfg in sampled(20, w.clone(), 17, 200, 1) {
        let g = cfg.geometry().clone();
        let window = ObservationWindow::box_with_outer_ring(&g, BoxSpec::new(n + 2, center)).unwrap();
        let trident = match select_trident(&cfg, n, center, &window, &opts) {
            Ok(t) => t,
            Err(Error::InsufficientClusters { .. }) => {
                insufficient += 1;
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let report = build_encounter_box(&cfg, n, center, trident.vertices, &w).unwrap();
        let out = &report.output;
        assert!(out.is_valid());
        assert!(report.within_bound());
        let outer = BoxLayout::new(&g, BoxSpec::new(n + 2, center)).unwrap();
        for v in BoxSpec::new(n, center).lattice_vertices() {
            assert_eq!(out.local_code(v).unwrap(), LocalCode::HORIZONTAL);
        }
        for u in outer.boundary_vertices() {
            assert_eq!(out.code_at(u) == LocalCode::HORIZONTAL, trident.vertices.contains(&u), "{}", g.vertex_id(u));
        }
        let enc = is_encounter_box(out, BoxSpec::new(n, center), LocalCode::HORIZONTAL, &window, Adjacency::Lattice).unwrap();
        assert!(enc.is_encounter);
        built += 1;
    }
    assert!(built >= 30, "built {built}, insufficient {insufficient}");
}
