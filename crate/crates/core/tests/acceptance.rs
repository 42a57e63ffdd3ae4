//! End-to-end acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use slicelab_core::capacity::CohomologyClass;
use slicelab_core::gf::{hessian_oracle, presets, Classification, Preset, Slicer};
use slicelab_core::morse::{compare_arcs, Source};
use slicelab_core::*;

use common::{random_spec, random_symplectic_map, realized};

type Outcome = std::result::Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

const GRID: usize = 512;

fn morse_table_exactness() -> Outcome {
    let t = morse_table(&realized("C(-,+,-;3,1,2)")).map_err(err)?;
    let mut rows = t.known_rows();
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (p, m) = (Location::PPlus, Location::PMinus);
    let mut expected =
        vec![(m, 3, 3.0), (p, 0, -3.0), (m, 2, 2.0), (p, 1, -2.0), (m, 3, 4.0), (p, 0, -4.0)];
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let crossing_rows = t.rows.iter().filter(|r| matches!(r.source, Source::Crossing(_))).count();
    let submanifold_rows = t.rows.iter().filter(|r| r.source == Source::CriticalSubmanifold).count();
    ensure!(crossing_rows == 6, "expected six crossing rows, got {crossing_rows}");
    ensure!(submanifold_rows == 1, "expected one critical-submanifold row, got {submanifold_rows}");
    ensure!(rows == expected, "rows {rows:?}");
    Ok(())
}

fn forced(report: &CapacityReport, class: &CohomologyClass, cap: Capacity) -> Option<f64> {
    report.classes.iter().find(|c| &c.class == class)?.get(cap).forced()
}

fn candidates(report: &CapacityReport, degree: u8, cap: Capacity) -> Option<Vec<f64>> {
    let class = report.classes.iter().find(|c| c.class.degree == degree)?;
    match class.get(cap) {
        CapacityStatus::Candidates { values, wildcard: false } => Some(values.clone()),
        _ => None,
    }
}

fn figure_eight_capacities() -> Outcome {
    let (plus, verdict) = analyze(&realized("8+(1)"), true).map_err(err)?;
    ensure!(verdict == SliceVerdict::NoObstruction, "8+(1) verdict {verdict:?}");
    let diagonal = plus.diagonal().ok_or("no diagonal class")?.class.clone();
    let h1 = plus.classes.iter().find(|c| c.class.degree == 1).ok_or("no degree-one class")?.class.clone();
    for (class, cap, value) in [
        (&diagonal, Capacity::LowerPlus, 0.0),
        (&diagonal, Capacity::LowerMinus, -1.0),
        (&h1, Capacity::UpperPlus, 1.0),
        (&diagonal, Capacity::UpperMinus, 0.0),
    ] {
        let got = forced(&plus, class, cap);
        ensure!(got == Some(value), "8+(1) {cap} on {}: {got:?}", class.label());
    }
    let minus = realized("8-(1)");
    let (_, verdict) = analyze(&minus, true).map_err(err)?;
    ensure!(matches!(verdict, SliceVerdict::Impossible { .. }), "8-(1) with assumption: {verdict:?}");
    let (open, verdict) = analyze(&minus, false).map_err(err)?;
    ensure!(verdict == SliceVerdict::NoObstruction, "8-(1) without assumption: {verdict:?}");
    let c_plus = candidates(&open, 0, Capacity::LowerPlus);
    ensure!(c_plus == Some(vec![-1.0]), "c+ candidates {c_plus:?}");
    let c_minus = candidates(&open, 1, Capacity::UpperMinus);
    ensure!(c_minus == Some(vec![1.0]), "C- candidates {c_minus:?}");
    Ok(())
}

fn impossible_caterpillars() -> Outcome {
    for text in ["C(-,+,-;3,1,2)", "C(-,-,-;3,1,2)", "C(-,-,-;1,3,3)"] {
        let start = Instant::now();
        let (_, verdict) = analyze(&realized(text), true).map_err(err)?;
        ensure!(matches!(verdict, SliceVerdict::Impossible { .. }), "{text}: {verdict:?}");
        ensure!(start.elapsed() < Duration::from_secs(1), "{text} took {:?}", start.elapsed());
    }
    Ok(())
}

fn lower_minus_on_diagonal() -> Outcome {
    for text in ["C(+,-,+;1,2,2)", "8+(1)+8+(1)"] {
        let (report, verdict) = analyze(&realized(text), true).map_err(err)?;
        ensure!(verdict == SliceVerdict::NoObstruction, "{text}: {verdict:?}");
        let got = report.diagonal().and_then(|c| c.get(Capacity::LowerMinus).forced());
        ensure!(got == Some(-1.0), "{text}: diagonal c- {got:?}");
    }
    Ok(())
}

fn connect_sum_obstruction() -> Outcome {
    let (_, verdict) = connect_sum_analysis(&realized("8-(1)"), &realized("8+(2)")).map_err(err)?;
    ensure!(matches!(verdict, SliceVerdict::Impossible { .. }), "{verdict:?}");
    Ok(())
}

fn relation(bottom: &str, top: &str, strict: bool) -> std::result::Result<RelationVerdict, String> {
    let b = if bottom.is_empty() { SliceDiagram::empty() } else { realized(bottom) };
    check_relation(&CobordismQuery::new(b, realized(top), strict)).map_err(err)
}

fn relation_fixtures() -> Outcome {
    for (a, b) in [(1.0, 2.0), (0.5, 0.75), (3.0, 10.0)] {
        let up = relation(&format!("8+({a})"), &format!("8+({b})"), false)?;
        ensure!(up == RelationVerdict::NoObstructionFound, "8+({a}) -> 8+({b}): {up:?}");
        let down = relation(&format!("8+({b})"), &format!("8+({a})"), false)?;
        ensure!(down.is_obstructed(), "8+({b}) -> 8+({a}): {down:?}");
    }
    for (a, b) in [(1.0, 2.0), (2.0, 1.0), (1.5, 4.0)] {
        let cat = format!("C(+,-,+;{a},{b},{b})");
        let eight = format!("8+({a})");
        for (bottom, top) in [(&eight, &cat), (&cat, &eight)] {
            let v = relation(bottom, top, false)?;
            ensure!(v.is_obstructed(), "{bottom} -> {top}: {v:?}");
        }
    }
    for a in [1.0, 2.5] {
        let v = relation(&format!("8+({a})"), &format!("8+({a})+8+({a})"), false)?;
        ensure!(v.is_obstructed(), "8+({a}) -> 8+({a})+8+({a}): {v:?}");
    }
    for top in ["8+(1)", "8-(1)", "C(+,-,+;1,2,2)", "8+(1)+8+(3)", "nest(8-(1),8+(10))"] {
        for strict in [false, true] {
            let v = relation("", top, strict)?;
            ensure!(!v.is_obstructed(), "empty -> {top}: {v:?}");
        }
    }
    Ok(())
}

fn pair_symmetry() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let (mut diagrams, mut pairs) = (0, 0);
    while diagrams < 240 {
        let spec = random_spec(&mut rng);
        let Ok(mut d) = realize_catalog(&spec) else { continue };
        if rng.random_bool(0.5) {
            d = d.transformed(&random_symplectic_map(&mut rng)).map_err(err)?;
        }
        diagrams += 1;
        let table = morse_table(&d).map_err(err)?;
        let scale = d.region_areas().iter().fold(1.0_f64, |m, a| m.max(a.abs()));
        for c in 0..d.crossings().len() {
            let rows: Vec<_> = table.rows.iter().filter(|r| r.source == Source::Crossing(c)).collect();
            ensure!(rows.len() == 2, "{spec}: crossing {c} has {} rows", rows.len());
            let values: Vec<f64> = rows.iter().filter_map(|r| r.value.known()).collect();
            let offsets: Vec<i32> = rows.iter().filter_map(|r| r.offset.known()).collect();
            ensure!(values.len() == 2 && offsets.len() == 2, "{spec}: crossing {c} has symbolic data");
            ensure!((values[0] + values[1]).abs() <= 1e-9 * scale, "{spec}: crossing {c} values {values:?}");
            ensure!(offsets[0] + offsets[1] == 3, "{spec}: crossing {c} offsets {offsets:?}");
            for branch in 0..2 {
                if let Some(arcs) = compare_arcs(&d, c, branch).map_err(err)? {
                    ensure!(
                        (arcs.values[0] - arcs.values[1]).abs() <= 1e-9 * scale,
                        "{spec}: crossing {c} branch {branch} arcs {:?}",
                        arcs.values
                    );
                    ensure!(arcs.offsets[0] == arcs.offsets[1], "{spec}: crossing {c} arc offsets {:?}", arcs.offsets);
                }
            }
            pairs += 1;
        }
    }
    ensure!(pairs > 200, "only {pairs} crossing pairs checked");
    Ok(())
}

fn preset_levels(p: &Preset) -> Vec<f64> {
    let mut levels = vec![p.level];
    levels.extend(&p.witness_levels);
    levels
}

fn oracle_agreement() -> Outcome {
    let mut checked = 0;
    for p in presets() {
        let slicer = Slicer::with_resolution(p.family.clone(), GRID).map_err(err)?;
        for level in preset_levels(p) {
            let slice = slicer.extract(level).map_err(err)?;
            let table = morse_table(&slice.diagram).map_err(err)?;
            for c in 0..slice.diagram.crossings().len() {
                let oracle = hessian_oracle(&p.family, &slice, c).map_err(err)?;
                for point in oracle.points {
                    let row = table
                        .rows
                        .iter()
                        .find(|r| r.source == Source::Crossing(c) && r.branch == point.branch)
                        .ok_or_else(|| format!("{} at {level}: no row for crossing {c}", p.name))?;
                    let offset = row.offset.known();
                    let value = row.value.known().ok_or_else(|| format!("{} at {level}: symbolic value", p.name))?;
                    ensure!(
                        offset == Some(point.index),
                        "{} at {level}, crossing {c}: offset {offset:?} vs oracle {}",
                        p.name,
                        point.index
                    );
                    ensure!(
                        (value - point.value).abs() <= 0.02 * point.value.abs(),
                        "{} at {level}, crossing {c}: value {value} vs oracle {}",
                        p.name,
                        point.value
                    );
                }
                checked += 1;
            }
        }
    }
    ensure!(checked > 0, "no preset crossings");
    Ok(())
}

fn numeric_realization() -> Outcome {
    let p = gf::preset("P-eight").ok_or("preset P-eight is missing")?;
    let slicer = Slicer::with_resolution(p.family.clone(), GRID).map_err(err)?;
    let slice = slicer.extract(p.level).map_err(err)?;
    match slice.classification.spec() {
        Some(CatalogSpec::EightPlus { area }) if *area > 0.0 => {}
        _ => return Err(format!("classified as {}", slice.classification)),
    }
    let sweep = slicer.sweep(p.sweep[0], p.sweep[1], 48).map_err(err)?;
    let born = sweep.events.iter().any(|e| e.from == "empty" && e.to.starts_with("8+("));
    ensure!(born, "no birth event among {:?}", sweep.events);
    let areas = sweep.eight_plus_areas();
    ensure!(areas.len() > 10, "only {} figure-eight levels", areas.len());
    ensure!(areas.windows(2).all(|w| w[0].1 <= w[1].1), "areas decrease: {areas:?}");
    let residuals: Vec<f64> = [256, 512, 1024]
        .iter()
        .map(|&n| {
            let s = Slicer::with_resolution(p.family.clone(), n)?;
            Ok(s.extract(p.level)?.area_residuals.iter().sum())
        })
        .collect::<Result<_>>()
        .map_err(err)?;
    ensure!(residuals.windows(2).all(|w| w[1] <= 0.5 * w[0]), "residuals {residuals:?}");
    Ok(())
}

fn theory_numerics_consistency() -> Outcome {
    for p in presets() {
        let slicer = Slicer::with_resolution(p.family.clone(), GRID).map_err(err)?;
        let sweep = slicer.sweep(p.sweep[0], p.sweep[1], 64).map_err(err)?;
        if let Some(s) = sweep.summaries.iter().find(|s| s.components == 1 && s.shape == "8-") {
            return Err(format!("{}: connected 8- at {}", p.name, s.level));
        }
        let slices: Vec<_> = p.witness_levels.iter().map(|&l| slicer.extract(l)).collect::<Result<_>>().map_err(err)?;
        for s in &slices {
            ensure!(
                !(s.diagram.component_count() == 1 && s.classification.is_eight_minus()),
                "{}: connected 8- at {}",
                p.name,
                s.level
            );
        }
        for w in slices.windows(2) {
            let numeric = check_relation(&CobordismQuery::new(w[0].diagram.clone(), w[1].diagram.clone(), true));
            let numeric = numeric.map_err(err)?;
            ensure!(
                !numeric.is_obstructed() && !matches!(numeric, RelationVerdict::Unrealizable { .. }),
                "{}: {} -> {}: {numeric:?}",
                p.name,
                w[0].level,
                w[1].level
            );
            if let (Some(a), Some(b)) = (w[0].classification.spec(), w[1].classification.spec()) {
                let ideal = CobordismQuery::new(realize_catalog(a).map_err(err)?, realize_catalog(b).map_err(err)?, true);
                let v = check_relation(&ideal).map_err(err)?;
                ensure!(!v.is_obstructed(), "{}: {a} -> {b}: {v:?}", p.name);
            }
        }
        ensure!(
            !matches!(slicer.extract(p.level).map_err(err)?.classification, Classification::Unclassified { .. }),
            "{}: documented level {} is unclassified",
            p.name,
            p.level
        );
    }
    Ok(())
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "morse table exactness", limit: Duration::from_secs(1), run: morse_table_exactness },
        Criterion { id: 2, name: "figure-eight capacities", limit: Duration::from_secs(1), run: figure_eight_capacities },
        Criterion { id: 3, name: "impossible caterpillars", limit: Duration::from_secs(3), run: impossible_caterpillars },
        Criterion { id: 4, name: "lower capacity on the diagonal", limit: Duration::from_secs(1), run: lower_minus_on_diagonal },
        Criterion { id: 5, name: "connect-sum obstruction", limit: Duration::from_secs(1), run: connect_sum_obstruction },
        Criterion { id: 6, name: "relation fixtures", limit: Duration::from_secs(5), run: relation_fixtures },
        Criterion { id: 7, name: "pair symmetry over random catalog diagrams", limit: Duration::from_secs(30), run: pair_symmetry },
        Criterion { id: 8, name: "oracle agreement on presets", limit: Duration::from_secs(60), run: oracle_agreement },
        Criterion { id: 9, name: "numeric realization of P-eight", limit: Duration::from_secs(120), run: numeric_realization },
        Criterion { id: 10, name: "theory/numerics consistency", limit: Duration::from_secs(120), run: theory_numerics_consistency },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed <= c.limit {
                Ok(())
            } else {
                Err(format!("exceeded the {:?} limit", c.limit))
            }
        });
        match outcome {
            Ok(()) => println!("criterion {:>2} PASS  {} ({elapsed:.2?})", c.id, c.name),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {} ({elapsed:.2?}): {e}", c.id, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
