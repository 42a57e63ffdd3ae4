use serde::{Deserialize, Serialize};

use crate::geom::ring_area;

use super::SliceDiagram;

/// Per-component check that a curve bounds zero signed area and does not turn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentValidity {
    pub area_ok: bool,
    pub winding_ok: bool,
    pub signed_area: f64,
    /// `|signed area| / bounding-box area`.
    pub area_residual: f64,
    pub turning_number: f64,
}

impl ComponentValidity {
    pub fn ok(&self) -> bool {
        self.area_ok && self.winding_ok
    }
}

pub fn validity_report(diagram: &SliceDiagram) -> Vec<ComponentValidity> {
    diagram
        .components()
        .iter()
        .map(|c| {
            let signed_area = ring_area(&c.vertices);
            let box_area = c.bbox().map_or(1.0, |b| b.area()).max(f64::MIN_POSITIVE);
            let area_residual = signed_area.abs() / box_area;
            let turning_number = c.total_turning() / std::f64::consts::TAU;
            ComponentValidity {
                area_ok: area_residual <= diagram.tolerance(),
                winding_ok: turning_number.round() == 0.0,
                signed_area,
                area_residual,
                turning_number,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{PlanarPolyline, Point};

    #[test]
    fn circle_fails_both_checks() {
        let n = 200;
        let r = (1.0 / std::f64::consts::PI).sqrt();
        let v = (0..n)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / n as f64;
                Point::new(r * th.cos(), r * th.sin())
            })
            .collect();
        let c = PlanarPolyline::new(v, true, Some(vec![0.0; n])).unwrap();
        let d = SliceDiagram::new(vec![c], 1e-9).unwrap();
        let rep = validity_report(&d);
        assert!(!rep[0].area_ok);
        assert!(!rep[0].winding_ok);
        assert!((rep[0].signed_area - 1.0).abs() < 1e-3);
        assert!((rep[0].turning_number - 1.0).abs() < 1e-12);
    }
}
