//! Double-point detection between and within closed polylines.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{intersect_segments, turn_angle, PlanarPolyline, Point, SegmentHit};

/// A position on a component: `param = segment index + t`, `t ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrandRef {
    pub component: usize,
    pub param: f64,
}

impl StrandRef {
    pub fn segment(&self) -> usize {
        self.param.floor() as usize
    }

    pub fn t(&self) -> f64 {
        self.param - self.param.floor()
    }
}

/// A transversal double point of the planar projection, before lifts are consulted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Intersection {
    pub point: Point,
    pub strands: [StrandRef; 2],
    pub tangents: [Point; 2],
}

/// A double point together with its over/under data and sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub point: Point,
    pub strands: [StrandRef; 2],
    /// Index into `strands` of the strand with the larger lift.
    pub over_strand: usize,
    pub sign: i8,
}

impl Crossing {
    pub fn is_self_crossing(&self) -> bool {
        self.strands[0].component == self.strands[1].component
    }

    pub fn over(&self) -> StrandRef {
        self.strands[self.over_strand]
    }

    pub fn under(&self) -> StrandRef {
        self.strands[1 - self.over_strand]
    }
}

/// Sign of a crossing from the two strand tangents: `sign(det[t_over, t_under])`.
pub fn crossing_sign(t_over: Point, t_under: Point) -> i8 {
    if t_over.cross(t_under) > 0.0 {
        1
    } else {
        -1
    }
}

const MIN_SIN: f64 = 1e-9;

struct Seg {
    comp: usize,
    index: usize,
    a: Point,
    b: Point,
    xmin: f64,
    xmax: f64,
}

fn segments(components: &[PlanarPolyline]) -> Vec<Seg> {
    let mut out = Vec::new();
    for (comp, line) in components.iter().enumerate() {
        for index in 0..line.segment_count() {
            let (a, b) = line.segment(index);
            out.push(Seg { comp, index, a, b, xmin: a.x.min(b.x), xmax: a.x.max(b.x) });
        }
    }
    out
}

fn adjacent(components: &[PlanarPolyline], s: &Seg, r: &Seg) -> bool {
    if s.comp != r.comp {
        return false;
    }
    let n = components[s.comp].segment_count();
    let closed = components[s.comp].closed;
    let (i, j) = (s.index, r.index);
    i == j || (i + 1) % n == j && (closed || i + 1 < n) || (j + 1) % n == i && (closed || j + 1 < n)
}

fn scale_of(components: &[PlanarPolyline]) -> f64 {
    components
        .iter()
        .filter_map(|c| c.bbox())
        .reduce(|a, b| a.union(&b))
        .map(|bb| bb.diagonal().max(1e-300))
        .unwrap_or(1.0)
}

/// Reject back-tracking between consecutive segments: they overlap collinearly.
fn check_reversals(components: &[PlanarPolyline]) -> Result<()> {
    for line in components {
        let n = line.segment_count();
        let joints = if line.closed { n } else { n.saturating_sub(1) };
        for i in 0..joints {
            let (d0, d1) = (line.direction(i), line.direction((i + 1) % n));
            if (turn_angle(d0, d1).abs() - std::f64::consts::PI).abs() < 1e-12 {
                return Err(Error::degenerate(line.segment(i).1, "polyline doubles back on itself"));
            }
        }
    }
    Ok(())
}

fn test_pair(components: &[PlanarPolyline], s: &Seg, r: &Seg, out: &mut Vec<Intersection>) -> Result<()> {
    if adjacent(components, s, r) {
        return Ok(());
    }
    match intersect_segments(s.a, s.b, r.a, r.b) {
        SegmentHit::None => Ok(()),
        SegmentHit::Overlap => Err(Error::degenerate(s.a, "collinear overlapping segments")),
        SegmentHit::Proper { t, u } => {
            let (ds, dr) = (s.b - s.a, r.b - r.a);
            let sin = ds.cross(dr) / (ds.norm() * dr.norm());
            let point = s.a.lerp(s.b, t);
            if sin.abs() < MIN_SIN {
                return Err(Error::degenerate(point, "tangential intersection"));
            }
            let first = StrandRef { component: s.comp, param: s.index as f64 + t };
            let second = StrandRef { component: r.comp, param: r.index as f64 + u };
            let (strands, tangents) = if (first.component, first.param) <= (second.component, second.param) {
                ([first, second], [ds, dr])
            } else {
                ([second, first], [dr, ds])
            };
            out.push(Intersection { point, strands, tangents });
            Ok(())
        }
    }
}

fn finish(mut hits: Vec<Intersection>, scale: f64) -> Result<Vec<Intersection>> {
    hits.sort_by(|a, b| {
        (a.strands[0].component, a.strands[0].param)
            .partial_cmp(&(b.strands[0].component, b.strands[0].param))
            .unwrap_or(Ordering::Equal)
    });
    let eps = 1e-10 * scale;
    let mut by_x: Vec<&Intersection> = hits.iter().collect();
    by_x.sort_by(|a, b| a.point.x.total_cmp(&b.point.x));
    for (i, h) in by_x.iter().enumerate() {
        for g in &by_x[i + 1..] {
            if g.point.x - h.point.x > eps {
                break;
            }
            if (g.point - h.point).norm() <= eps {
                return Err(Error::degenerate(h.point, "more than two strands meet at one point"));
            }
        }
    }
    Ok(hits)
}

/// All transversal double points of the projections, found by an x-sorted sweep.
///
/// Results are ordered by the first strand's (component, parameter).
pub fn find_intersections(components: &[PlanarPolyline]) -> Result<Vec<Intersection>> {
    check_reversals(components)?;
    let mut segs = segments(components);
    segs.sort_by(|a, b| a.xmin.total_cmp(&b.xmin));
    let mut active: Vec<usize> = Vec::new();
    let mut hits = Vec::new();
    for (k, s) in segs.iter().enumerate() {
        active.retain(|&j| segs[j].xmax >= s.xmin);
        for &j in &active {
            test_pair(components, &segs[j], s, &mut hits)?;
        }
        active.push(k);
    }
    finish(hits, scale_of(components))
}

/// Quadratic reference implementation testing every segment pair.
pub fn find_intersections_brute(components: &[PlanarPolyline]) -> Result<Vec<Intersection>> {
    check_reversals(components)?;
    let segs = segments(components);
    let mut hits = Vec::new();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            test_pair(components, &segs[i], &segs[j], &mut hits)?;
        }
    }
    finish(hits, scale_of(components))
}

/// Double points with over/under data read off the interpolated lifts.
pub fn detect_crossings(components: &[PlanarPolyline]) -> Result<Vec<Crossing>> {
    let hits = find_intersections(components)?;
    let lift_scale = components
        .iter()
        .filter_map(|c| c.lift.as_ref())
        .flatten()
        .fold(0.0_f64, |m, z| m.max(z.abs()))
        .max(1e-300);
    hits.iter()
        .map(|h| {
            let lift = |s: &StrandRef| {
                components[s.component]
                    .lift_at(s.segment(), s.t())
                    .ok_or_else(|| Error::InvalidDiagram(format!("component {} has no lift", s.component)))
            };
            let (z0, z1) = (lift(&h.strands[0])?, lift(&h.strands[1])?);
            if (z0 - z1).abs() <= 1e-12 * lift_scale {
                return Err(Error::degenerate(h.point, "strands have equal lifts at a double point"));
            }
            let over_strand = if z0 > z1 { 0 } else { 1 };
            let sign = crossing_sign(h.tangents[over_strand], h.tangents[1 - over_strand]);
            Ok(Crossing { point: h.point, strands: h.strands, over_strand, sign })
        })
        .collect()
}

/// Builds per-vertex lifts so that at every listed intersection the chosen strand
/// lies above the other.  `over[i]` is the index into `hits[i].strands` of the
/// strand that should be on top.
///
/// Each event gets height ±1 and consecutive events along a component are joined
/// by a cosine ramp in the arc parameter.
pub fn lifts_for(components: &[PlanarPolyline], hits: &[Intersection], over: &[usize]) -> Vec<Vec<f64>> {
    let mut events: Vec<Vec<(f64, f64)>> = vec![Vec::new(); components.len()];
    for (h, &o) in hits.iter().zip(over) {
        for (k, s) in h.strands.iter().enumerate() {
            events[s.component].push((s.param, if k == o { 1.0 } else { -1.0 }));
        }
    }
    components
        .iter()
        .zip(events.iter_mut())
        .map(|(line, ev)| {
            let n = line.len();
            if ev.is_empty() {
                return vec![0.0; n];
            }
            ev.sort_by(|a, b| a.0.total_cmp(&b.0));
            let period = n as f64;
            (0..n)
                .map(|v| {
                    let v = v as f64;
                    // last event at or before v (cyclically) and the one after it
                    let idx = ev.iter().rposition(|e| e.0 <= v);
                    let (p0, z0, p1, z1) = match idx {
                        Some(i) if i + 1 < ev.len() => (ev[i].0, ev[i].1, ev[i + 1].0, ev[i + 1].1),
                        Some(i) => (ev[i].0, ev[i].1, ev[0].0 + period, ev[0].1),
                        None => {
                            let last = ev[ev.len() - 1];
                            (last.0 - period, last.1, ev[0].0, ev[0].1)
                        }
                    };
                    let s = (v - p0) / (p1 - p0);
                    z0 + (z1 - z0) * 0.5 * (1.0 - (std::f64::consts::PI * s).cos())
                })
                .collect()
        })
        .collect()
}
