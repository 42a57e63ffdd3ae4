//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use rand::Rng;
use slicelab_core::geom::Affine;
use slicelab_core::{parse_catalog, realize_catalog, CatalogSpec, Sign, SliceDiagram};

pub fn realized(text: &str) -> SliceDiagram {
    realize_catalog(&parse_catalog(text).unwrap_or_else(|e| panic!("{text}: {e}")))
        .unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn area(rng: &mut impl Rng) -> f64 {
    // Two decimals keep specs readable in failure messages.
    (rng.random_range(0.2..6.0_f64) * 100.0).round() / 100.0
}

fn sign(rng: &mut impl Rng) -> Sign {
    if rng.random_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// A connected catalog shape with random signs and areas.
pub fn random_connected(rng: &mut impl Rng) -> CatalogSpec {
    match rng.random_range(0..4) {
        0 => CatalogSpec::EightPlus { area: area(rng) },
        1 => CatalogSpec::EightMinus { area: area(rng) },
        2 => loop {
            let areas = [area(rng), area(rng), area(rng)];
            if areas[0] - areas[1] + areas[2] > 0.1 {
                break CatalogSpec::Cat { signs: [sign(rng), sign(rng), sign(rng)], areas };
            }
        },
        _ => {
            let (a1, a2) = (area(rng), area(rng));
            let a2 = if (a1 - a2).abs() < 0.05 { a2 + 0.5 } else { a2 };
            let a3 = ((4.0 * (a1 + a2) + rng.random_range(0.0..4.0)) * 100.0).round() / 100.0;
            CatalogSpec::Merge { areas: [a1, a2, a3] }
        }
    }
}

/// Any catalog expression: connected shapes, sums of up to three parts, or a nest.
pub fn random_spec(rng: &mut impl Rng) -> CatalogSpec {
    match rng.random_range(0..6) {
        0..=2 => random_connected(rng),
        3 | 4 => CatalogSpec::Sum { parts: (0..rng.random_range(2..=3)).map(|_| random_connected(rng)).collect() },
        _ => {
            let inner = if rng.random_bool(0.5) {
                CatalogSpec::EightMinus { area: area(rng) }
            } else {
                CatalogSpec::EightPlus { area: area(rng) }
            };
            let outer = CatalogSpec::EightPlus { area: 4.0 * area(rng) + 4.0 };
            CatalogSpec::Nest { inner: Box::new(inner), outer: Box::new(outer) }
        }
    }
}

/// A random orientation- and area-preserving affine map.
pub fn random_symplectic_map(rng: &mut impl Rng) -> Affine {
    Affine::rotation(rng.random_range(0.0..std::f64::consts::TAU))
        .then(&Affine::shear_x(rng.random_range(-1.0..1.0)))
        .then(&Affine::squeeze(rng.random_range(0.5..2.0)))
        .then(&Affine::translation(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
}
