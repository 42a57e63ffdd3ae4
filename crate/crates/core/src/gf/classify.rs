//! Matching numeric diagrams against catalog shapes.
//!
//! A diagram is proposed a handful of catalog expressions built from its
//! crossing signs and region areas; each proposal is realized and accepted
//! only when its equivalence key matches with areas within 2%.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::catalog::{realize_catalog, CatalogSpec, Sign};
use crate::diagram::{equivalence_key, EquivalenceKey, SliceDiagram};

/// Relative tolerance on areas and critical values when matching.
pub const MATCH_TOLERANCE: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Empty,
    Catalog { key: String, spec: CatalogSpec },
    Unclassified { reason: String },
}

impl Classification {
    pub fn spec(&self) -> Option<&CatalogSpec> {
        match self {
            Classification::Catalog { spec, .. } => Some(spec),
            _ => None,
        }
    }

    pub fn is_eight_minus(&self) -> bool {
        matches!(self.spec(), Some(CatalogSpec::EightMinus { .. }))
    }

    /// The catalog shape with areas dropped, used to detect transitions.
    pub fn shape(&self) -> String {
        match self {
            Classification::Empty => "empty".into(),
            Classification::Catalog { spec, .. } => shape_of(spec),
            Classification::Unclassified { .. } => "unclassified".into(),
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Empty => f.write_str("empty"),
            Classification::Catalog { key, .. } => f.write_str(key),
            Classification::Unclassified { .. } => f.write_str("unclassified"),
        }
    }
}

fn sign_char(s: Sign) -> char {
    if s == Sign::Plus {
        '+'
    } else {
        '-'
    }
}

pub fn shape_of(spec: &CatalogSpec) -> String {
    match spec {
        CatalogSpec::EightPlus { .. } => "8+".into(),
        CatalogSpec::EightMinus { .. } => "8-".into(),
        CatalogSpec::Cat { signs, .. } => {
            format!("C({},{},{})", sign_char(signs[0]), sign_char(signs[1]), sign_char(signs[2]))
        }
        CatalogSpec::Sum { parts } => parts.iter().map(shape_of).sorted().join("+"),
        CatalogSpec::Nest { inner, outer } => format!("nest({},{})", shape_of(inner), shape_of(outer)),
        CatalogSpec::Merge { .. } => "merge".into(),
    }
}

fn round(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let scale = 10f64.powi(5 - v.abs().log10().floor() as i32);
    (v * scale).round() / scale
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= MATCH_TOLERANCE * scale
}

/// Proposals for a diagram with a single component.
fn connected_proposals(d: &SliceDiagram) -> Result<Vec<CatalogSpec>, String> {
    let areas = d.region_areas();
    let scale = areas.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let signs: Vec<i8> = d.crossings().iter().map(|x| x.sign).collect();
    match signs.len() {
        0 => Err("a curve without crossings".into()),
        1 => {
            let area = round(areas.iter().sum::<f64>() / areas.len() as f64);
            Ok(vec![if signs[0] > 0 { CatalogSpec::EightPlus { area } } else { CatalogSpec::EightMinus { area } }])
        }
        3 if areas.len() == 4 => {
            let plus = signs.iter().filter(|s| **s > 0).count();
            let sign_orders: Vec<[Sign; 3]> = (0..8)
                .map(|m: u32| {
                    let s = |k: u32| if m >> k & 1 == 1 { Sign::Plus } else { Sign::Minus };
                    [s(0), s(1), s(2)]
                })
                .filter(|o| o.iter().filter(|s| **s == Sign::Plus).count() == plus)
                .collect();
            let mut out = Vec::new();
            for p in (0..4).permutations(4) {
                let [a1, a2, a3, a4] = [areas[p[0]], areas[p[1]], areas[p[2]], areas[p[3]]];
                if close(a1 - a2 + a3, a4, scale) && a1 - a2 + a3 > 0.0 {
                    for signs in &sign_orders {
                        out.push(CatalogSpec::Cat { signs: *signs, areas: [round(a1), round(a2), round(a3)] });
                    }
                }
                // Merge regions: outer left lobe, what is left of the right lobe, inner lobes.
                let [l, rest, b, a] = [a1, a2, a3, a4];
                if close(l - 2.0 * b, rest, scale) && l > 2.0 * b {
                    out.push(CatalogSpec::Merge { areas: [round(a), round(b), round(l)] });
                }
            }
            out.dedup();
            Ok(out)
        }
        k => Err(format!("{k} crossings on one component")),
    }
}

fn sub_diagram(d: &SliceDiagram, comps: &[usize]) -> Option<SliceDiagram> {
    let lines = comps.iter().map(|&c| d.components()[c].clone()).collect();
    SliceDiagram::new(lines, d.tolerance()).ok()
}

fn proposals(d: &SliceDiagram) -> Result<Vec<CatalogSpec>, String> {
    if d.crossings().iter().any(|x| !x.is_self_crossing()) {
        return Err("crossings between components".into());
    }
    let n = d.component_count();
    if n == 1 {
        return connected_proposals(d);
    }
    let arr = d.arrangement();
    let nested: Vec<usize> = (0..n).filter(|&c| arr.piece_container[arr.piece_of_component[c]] != 0).collect();
    let single = |c: usize| -> Result<CatalogSpec, String> {
        let sub = sub_diagram(d, &[c]).ok_or("component is not a diagram on its own")?;
        match classify(&sub) {
            Classification::Catalog { spec, .. } => Ok(spec),
            _ => Err(format!("component {c} is not a catalog shape")),
        }
    };
    match nested.len() {
        0 => {
            let order: Vec<usize> = (0..n)
                .sorted_by(|&a, &b| {
                    let (ba, bb) = (d.components()[a].bbox(), d.components()[b].bbox());
                    ba.map(|x| x.min.x).unwrap_or(0.0).total_cmp(&bb.map(|x| x.min.x).unwrap_or(0.0))
                })
                .collect();
            let parts = order.into_iter().map(single).collect::<Result<Vec<_>, _>>()?;
            Ok(vec![CatalogSpec::Sum { parts }])
        }
        1 if n == 2 => {
            let inner = nested[0];
            let outer = 1 - inner;
            Ok(vec![CatalogSpec::Nest { inner: Box::new(single(inner)?), outer: Box::new(single(outer)?) }])
        }
        _ => Err("nesting pattern outside the catalog".into()),
    }
}

fn key_matches(key: &EquivalenceKey, spec: &CatalogSpec) -> bool {
    realize_catalog(spec)
        .and_then(|r| equivalence_key(&r))
        .map(|k| k.matches(key, MATCH_TOLERANCE))
        .unwrap_or(false)
}

pub fn classify(d: &SliceDiagram) -> Classification {
    if d.is_empty() {
        return Classification::Empty;
    }
    let key = match equivalence_key(d) {
        Ok(k) => k,
        Err(e) => return Classification::Unclassified { reason: e.to_string() },
    };
    let candidates = match proposals(d) {
        Ok(c) => c,
        Err(reason) => return Classification::Unclassified { reason },
    };
    for spec in candidates {
        if key_matches(&key, &spec) {
            return Classification::Catalog { key: spec.to_string(), spec };
        }
    }
    Classification::Unclassified { reason: "no catalog shape matches within 2%".into() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_catalog;
    use crate::geom::Affine;

    fn realized(text: &str) -> SliceDiagram {
        realize_catalog(&parse_catalog(text).unwrap()).unwrap()
    }

    #[test]
    fn recognizes_catalog_shapes_after_area_preserving_maps() {
        let map = Affine::rotation(0.4).then(&Affine::shear_x(0.3)).then(&Affine::translation(2.0, -1.0));
        for text in ["8+(1.5)", "8-(2)", "C(+,-,+;1,2,2)", "C(-,-,+;3,1,2)", "8+(1)+8+(2)", "nest(8-(1),8+(10))", "merge(1,0.5,6)"] {
            let d = realized(text).transformed(&map).unwrap();
            let c = classify(&d);
            let spec = c.spec().unwrap_or_else(|| panic!("{text}: {c:?}"));
            // A caterpillar read from its other end is a different name for the same shape.
            let expected = equivalence_key(&realized(text)).unwrap();
            let found = equivalence_key(&realize_catalog(spec).unwrap()).unwrap();
            assert!(found.matches(&expected, MATCH_TOLERANCE), "{text} classified as {spec}");
        }
    }

    #[test]
    fn caterpillar_reversal_is_the_same_shape() {
        let d = realized("C(-,-,+;3,1,2)");
        let reversed = realized("C(+,-,-;4,2,1)");
        assert!(equivalence_key(&d).unwrap().matches(&equivalence_key(&reversed).unwrap(), 1e-6));
    }

    #[test]
    fn empty_and_unclassified() {
        assert_eq!(classify(&SliceDiagram::empty()), Classification::Empty);
        let square = crate::geom::PlanarPolyline::closed(vec![
            crate::geom::Point::new(0.0, 0.0),
            crate::geom::Point::new(1.0, 0.0),
            crate::geom::Point::new(1.0, 1.0),
            crate::geom::Point::new(0.0, 1.0),
        ])
        .and_then(|l| l.with_lift(vec![0.0; 4]))
        .unwrap();
        let d = SliceDiagram::new(vec![square], 1e-9).unwrap();
        assert!(matches!(classify(&d), Classification::Unclassified { .. }));
    }

    #[test]
    fn shapes_ignore_sum_order() {
        assert_eq!(shape_of(&parse_catalog("8-(1)+8+(2)").unwrap()), shape_of(&parse_catalog("8+(3)+8-(1)").unwrap()));
        assert_eq!(round(0.123456789), 0.123457);
    }
}
