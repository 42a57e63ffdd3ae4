//! Lifted planar diagrams of slices: components, crossings, regions.

pub mod arrangement;
pub mod crossings;
pub mod key;
pub mod svg;
pub mod validity;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Affine, BBox, PlanarPolyline};

pub use arrangement::Arrangement;
pub use crossings::{detect_crossings, find_intersections, Crossing, Intersection, StrandRef};
pub use key::{equivalence_key, equivalent, EquivalenceKey};
pub use svg::{render_svg, SvgOptions};
pub use validity::{validity_report, ComponentValidity};

/// Relative tolerance attached to analytically constructed diagrams.
pub const CATALOG_TOLERANCE: f64 = 1e-9;

/// A finite union of closed lifted curves together with their double points.
#[derive(Clone, Debug)]
pub struct SliceDiagram {
    components: Vec<PlanarPolyline>,
    crossings: Vec<Crossing>,
    tolerance: f64,
    arrangement: Arc<Arrangement>,
    /// Region areas in face order; exact values when the diagram came from a
    /// closed-form construction, measured otherwise.
    region_areas: Vec<f64>,
    exact_areas: bool,
}

impl SliceDiagram {
    pub fn empty() -> Self {
        Self::new(Vec::new(), CATALOG_TOLERANCE).expect("empty diagram is valid")
    }

    pub fn new(components: Vec<PlanarPolyline>, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::InvalidDiagram(format!("tolerance must be positive, got {tolerance}")));
        }
        for (i, c) in components.iter().enumerate() {
            c.validate()?;
            if !c.closed {
                return Err(Error::InvalidDiagram(format!("component {i} is not closed")));
            }
            if c.lift.is_none() {
                return Err(Error::InvalidDiagram(format!("component {i} has no lift")));
            }
        }
        let crossings = detect_crossings(&components)?;
        let arrangement = Arrangement::build(&components, &crossings)?;
        let region_areas = arrangement.faces.iter().map(|f| f.area).collect();
        Ok(SliceDiagram {
            components,
            crossings,
            tolerance,
            arrangement: Arc::new(arrangement),
            region_areas,
            exact_areas: false,
        })
    }

    /// Replaces measured region areas by exact ones.  Measured and exact lists are
    /// matched after sorting and must agree to the diagram tolerance.
    pub fn with_exact_areas(mut self, exact: Vec<f64>) -> Result<Self> {
        if exact.len() != self.region_areas.len() {
            return Err(Error::InvalidDiagram(format!(
                "expected {} region areas, got {}",
                self.region_areas.len(),
                exact.len()
            )));
        }
        let mut order: Vec<usize> = (0..exact.len()).collect();
        order.sort_by(|&a, &b| self.region_areas[a].total_cmp(&self.region_areas[b]));
        let mut sorted = exact.clone();
        sorted.sort_by(f64::total_cmp);
        let largest = sorted.last().copied().unwrap_or(0.0);
        for (&face, &want) in order.iter().zip(&sorted) {
            let got = self.region_areas[face];
            let tol = self.tolerance * want.max(1e-3 * largest) * 10.0;
            if (got - want).abs() > tol {
                return Err(Error::InvalidDiagram(format!("region area {got} does not match {want}")));
            }
            self.region_areas[face] = want;
        }
        self.exact_areas = true;
        Ok(self)
    }

    pub fn components(&self) -> &[PlanarPolyline] {
        &self.components
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    /// Area of each bounded region, indexed like `arrangement().faces`.
    pub fn region_areas(&self) -> &[f64] {
        &self.region_areas
    }

    pub fn has_exact_areas(&self) -> bool {
        self.exact_areas
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn bbox(&self) -> Option<BBox> {
        self.components.iter().filter_map(|c| c.bbox()).reduce(|a, b| a.union(&b))
    }

    /// Image under an affine map; exact areas survive maps with unit determinant.
    pub fn transformed(&self, map: &Affine) -> Result<Self> {
        let comps = self.components.iter().map(|c| c.transformed(map)).collect();
        let d = SliceDiagram::new(comps, self.tolerance)?;
        if self.exact_areas && (map.det().abs() - 1.0).abs() < 1e-12 {
            d.with_exact_areas(self.region_areas.clone())
        } else {
            Ok(d)
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        self.transformed(&Affine::translation(dx, dy))
    }

    /// Same curves with every component traversed backwards.
    pub fn reversed(&self) -> Result<Self> {
        let comps = self.components.iter().map(|c| c.reversed()).collect();
        let d = SliceDiagram::new(comps, self.tolerance)?;
        if self.exact_areas {
            d.with_exact_areas(self.region_areas.clone())
        } else {
            Ok(d)
        }
    }

    /// Disjoint union of diagrams already known not to meet.
    pub(crate) fn union(parts: &[&SliceDiagram]) -> Result<Self> {
        let tolerance = parts.iter().map(|d| d.tolerance).fold(CATALOG_TOLERANCE, f64::max);
        let comps = parts.iter().flat_map(|d| d.components.iter().cloned()).collect();
        let d = SliceDiagram::new(comps, tolerance)?;
        if parts.iter().all(|p| p.exact_areas || p.is_empty()) {
            let areas = parts.iter().flat_map(|p| p.region_areas.iter().copied()).collect();
            d.with_exact_areas(areas)
        } else {
            Ok(d)
        }
    }
}

/// Monoid sum: `d1` moved into `x1 < 0`, `d2` into `x1 > 0`, then united.
pub fn sum(d1: &SliceDiagram, d2: &SliceDiagram) -> Result<SliceDiagram> {
    let (b1, b2) = match (d1.bbox(), d2.bbox()) {
        (None, _) => return Ok(d2.clone()),
        (_, None) => return Ok(d1.clone()),
        (Some(a), Some(b)) => (a, b),
    };
    let gap = 0.05 * b1.diagonal().max(b2.diagonal());
    let left = d1.translated(-gap - b1.max.x, -b1.center().y)?;
    let right = d2.translated(gap - b2.min.x, -b2.center().y)?;
    SliceDiagram::union(&[&left, &right])
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    components: Vec<PlanarPolyline>,
    tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    region_areas: Option<Vec<f64>>,
    #[serde(default, skip_deserializing)]
    crossings: Vec<Crossing>,
}

impl Serialize for SliceDiagram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DiagramJson {
            components: self.components.clone(),
            tolerance: self.tolerance,
            region_areas: Some(self.region_areas.clone()),
            crossings: self.crossings.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SliceDiagram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DiagramJson::deserialize(d)?;
        let diagram = SliceDiagram::new(raw.components, raw.tolerance).map_err(serde::de::Error::custom)?;
        match raw.region_areas {
            Some(areas) => diagram.with_exact_areas(areas).map_err(serde::de::Error::custom),
            None => Ok(diagram),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;

    fn circle(r: f64, n: usize) -> PlanarPolyline {
        let v = (0..n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Point::new(r * th.cos(), r * th.sin())
            })
            .collect();
        PlanarPolyline::new(v, true, Some(vec![0.0; n])).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let d = SliceDiagram::new(vec![circle(1.0, 30)], 1e-6).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        let back: SliceDiagram = serde_json::from_str(&text).unwrap();
        assert_eq!(back.components(), d.components());
        assert_eq!(back.region_areas(), d.region_areas());
    }

    #[test]
    fn minimal_json_is_accepted() {
        let text = r#"{"components":[{"vertices":[[0,0],[1,0],[0,1]],"lift":[0,0,0],"closed":true}],"tolerance":1e-9}"#;
        let d: SliceDiagram = serde_json::from_str(text).unwrap();
        assert_eq!(d.region_areas(), &[0.5]);
    }

    #[test]
    fn unlifted_component_rejected() {
        let mut c = circle(1.0, 10);
        c.lift = None;
        assert!(SliceDiagram::new(vec![c], 1e-9).is_err());
    }

    #[test]
    fn sum_separates_summands() {
        let d = SliceDiagram::new(vec![circle(1.0, 40)], 1e-9).unwrap();
        let s = sum(&d, &d).unwrap();
        assert_eq!(s.component_count(), 2);
        assert!(s.crossings().is_empty());
        assert!(s.components()[0].bbox().unwrap().max.x < 0.0);
        assert!(s.components()[1].bbox().unwrap().min.x > 0.0);
        let e = SliceDiagram::empty();
        assert_eq!(sum(&e, &d).unwrap().components(), d.components());
    }
}
