mod common;

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use onetwo::exact::{partition_function, Enumeration, DEFAULT_ENUMERATION_CAP};
use onetwo::{Boundary, Geometry, Weights};

use common::{brute_force, torus};

fn geometries() -> Vec<(String, Arc<Geometry>)> {
    let mut out = vec![("torus L=2".to_string(), torus(2))];
    for (w, h) in [(2, 2), (3, 2), (2, 3)] {
        let free = Geometry::window(w, h, Boundary::Free).unwrap();
        let stubs = free.stub_count();
        out.push((format!("free {w}x{h}"), Arc::new(free)));
        let pattern: Vec<bool> = (0..stubs).map(|i| i % 3 == 0).collect();
        out.push((format!("fixed {w}x{h}"), Arc::new(Geometry::window(w, h, Boundary::Fixed(pattern)).unwrap())));
    }
    out
}

#[test]
fn pruned_enumeration_matches_brute_force() {
    for (name, g) in geometries() {
        assert!(g.edge_count() <= 14, "{name}");
        let (count, z_one) = brute_force(&g, (1.0, 1.0, 1.0));
        let e = Enumeration::new(&g, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(e.count(), count, "{name}");
        assert_eq!(partition_function(&g, &Weights::<u64>::uniform(), 64).unwrap(), count, "{name}");
        assert_eq!(z_one, count as f64);

        let (_, z) = brute_force(&g, (2.0, 1.0, 0.5));
        let mine = partition_function(&g, &Weights::new(2.0, 1.0, 0.5).unwrap(), 64).unwrap();
        assert!(((mine - z) / z).abs() < 1e-12, "{name}: {mine} vs {z}");
    }
}

#[test]
fn exact_rational_partition_function() {
    let g = torus(2);
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let w = Weights::new(BigRational::from_integer(2.into()), BigRational::from_integer(1.into()), half).unwrap();
    let z = partition_function(&g, &w, 64).unwrap();
    let (_, zf) = brute_force(&g, (2.0, 1.0, 0.5));
    let approx = num_traits::ToPrimitive::to_f64(&z).unwrap();
    assert!((approx - zf).abs() / zf < 1e-14);
}

#[test]
fn reflection_symmetry_swaps_b_and_c() {
    for l in [2, 3] {
        let g = torus(l);
        for (a, b, c) in [(1.0f64, 2.0, 0.5), (0.3, 1.7, 2.9)] {
            let z = partition_function(&g, &Weights::new(a, b, c).unwrap(), 64).unwrap();
            let zr = partition_function(&g, &Weights::new(a, c, b).unwrap(), 64).unwrap();
            assert!(((z - zr) / z).abs() < 1e-12, "L={l}");
        }
    }
}

#[test]
fn homogeneity_of_degree_vertex_count() {
    let g = torus(3);
    let w = Weights::new(1.5, 0.7, 1.1).unwrap();
    let z = partition_function(&g, &w, 64).unwrap();
    let z2 = partition_function(&g, &w.scaled(2.0), 64).unwrap();
    assert!((z2 / z / 2f64.powi(18) - 1.0).abs() < 1e-12);
}
