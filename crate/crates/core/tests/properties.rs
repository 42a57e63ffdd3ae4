//! Property tests over random catalog diagrams.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use slicelab_core::morse::Source;
use slicelab_core::*;

use common::{random_connected, random_spec, random_symplectic_map};

fn rng(seed: u64) -> rand::rngs::StdRng {
    rand::rngs::StdRng::seed_from_u64(seed)
}

/// A realizable random catalog diagram with the catalog entry that produced it.
fn diagram(seed: u64) -> (CatalogSpec, SliceDiagram) {
    let mut r = rng(seed);
    loop {
        let spec = random_spec(&mut r);
        if let Ok(d) = realize_catalog(&spec) {
            return (spec, d);
        }
    }
}

fn connected(seed: u64) -> SliceDiagram {
    let mut r = rng(seed);
    loop {
        if let Ok(d) = realize_catalog(&random_connected(&mut r)) {
            return d;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn key_is_invariant_under_area_preserving_maps(seed in any::<u64>()) {
        let (spec, d) = diagram(seed);
        let moved = d.transformed(&random_symplectic_map(&mut rng(seed ^ 1))).unwrap();
        prop_assert!(equivalent(&d, &moved).unwrap(), "{}", spec);
        prop_assert!(equivalence_key(&d).unwrap().matches(&equivalence_key(&moved).unwrap(), 1e-9));
    }

    #[test]
    fn areas_change_the_key(seed in any::<u64>(), factor in 1.1f64..3.0) {
        let (spec, d) = diagram(seed);
        let scaled = d.transformed(&geom::Affine { m: [[factor, 0.0], [0.0, 1.0]], b: Point::default() }).unwrap();
        prop_assert!(!equivalent(&d, &scaled).unwrap(), "{}", spec);
    }

    #[test]
    fn sum_is_commutative_and_associative(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (connected(a), connected(b), connected(c));
        prop_assert!(equivalent(&sum(&x, &y).unwrap(), &sum(&y, &x).unwrap()).unwrap());
        let left = sum(&sum(&x, &y).unwrap(), &z).unwrap();
        let right = sum(&x, &sum(&y, &z).unwrap()).unwrap();
        prop_assert!(equivalent(&left, &right).unwrap());
    }

    #[test]
    fn empty_slice_is_the_identity(seed in any::<u64>()) {
        let (_, d) = diagram(seed);
        let e = SliceDiagram::empty();
        prop_assert!(equivalent(&sum(&e, &d).unwrap(), &d).unwrap());
        prop_assert!(equivalent(&sum(&d, &e).unwrap(), &d).unwrap());
    }

    #[test]
    fn crossing_pairs_are_antisymmetric(seed in any::<u64>()) {
        let (spec, d) = diagram(seed);
        let table = morse_table(&d).unwrap();
        for c in 0..d.crossings().len() {
            let rows: Vec<_> = table.rows.iter().filter(|r| r.source == Source::Crossing(c)).collect();
            prop_assert_eq!(rows.len(), 2);
            let (v0, v1) = (rows[0].value.known().unwrap(), rows[1].value.known().unwrap());
            let (k0, k1) = (rows[0].offset.known().unwrap(), rows[1].offset.known().unwrap());
            prop_assert!((v0 + v1).abs() < 1e-9 * (1.0 + v0.abs()), "{}: {} {}", spec, v0, v1);
            prop_assert_eq!(k0 + k1, 3);
            prop_assert!((0..=3).contains(&k0) && (0..=3).contains(&k1));
            prop_assert_ne!(rows[0].location, rows[1].location);
        }
        prop_assert!(table.warnings.is_empty(), "{}: {:?}", spec, table.warnings);
    }

    #[test]
    fn capacities_have_the_right_sign(seed in any::<u64>(), assume in any::<bool>()) {
        let (spec, d) = diagram(seed);
        let (report, _) = analyze(&d, assume).unwrap();
        for class in &report.classes {
            for cap in Capacity::ALL {
                if let Some(v) = class.get(cap).forced() {
                    prop_assert!(if cap.is_lower() { v <= 0.0 } else { v >= 0.0 }, "{} {} = {}", spec, cap, v);
                }
            }
        }
    }

    #[test]
    fn verdicts_are_invariant_under_area_preserving_maps(seed in any::<u64>()) {
        let (spec, d) = diagram(seed);
        let moved = d.transformed(&random_symplectic_map(&mut rng(seed ^ 2))).unwrap();
        let (r1, v1) = analyze(&d, true).unwrap();
        let (r2, v2) = analyze(&moved, true).unwrap();
        prop_assert_eq!(
            std::mem::discriminant(&v1),
            std::mem::discriminant(&v2),
            "{}: {:?} vs {:?}", spec, v1, v2
        );
        prop_assert_eq!(r1.classes.len(), r2.classes.len());
    }

    #[test]
    fn a_slice_is_equivalent_to_itself(seed in any::<u64>()) {
        let (_, d) = diagram(seed);
        let v = check_relation(&CobordismQuery::new(d.clone(), d, false)).unwrap();
        prop_assert_eq!(v, RelationVerdict::ReflexiveEquivalent);
    }

    #[test]
    fn the_empty_slice_is_never_obstructed_below(seed in any::<u64>(), strict in any::<bool>()) {
        let (_, d) = diagram(seed);
        let v = check_relation(&CobordismQuery::new(SliceDiagram::empty(), d, strict)).unwrap();
        prop_assert!(!v.is_obstructed());
    }

    #[test]
    fn figure_eights_only_grow(a in 0.1f64..10.0, b in 0.1f64..10.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let (x, y) = (
            realize_catalog(&CatalogSpec::EightPlus { area: a }).unwrap(),
            realize_catalog(&CatalogSpec::EightPlus { area: b }).unwrap(),
        );
        let v = check_relation(&CobordismQuery::new(x, y, true)).unwrap();
        prop_assert_eq!(v.is_obstructed(), a > b, "{} -> {}: {:?}", a, b, v);
    }

    #[test]
    fn strict_chain_bound_is_positive(seed in any::<u64>()) {
        let (_, d) = diagram(seed);
        prop_assert!(strict_chain_bound(&d).unwrap().bound >= 1);
    }
}
