//! Closed-form geometry for catalog shapes.
//!
//! Single-component shapes are built from a half path `Q` running between two
//! tips on the x1-axis; the curve is `Q` followed by its mirror image in the
//! axis traversed backwards.  Every crossing therefore sits on the axis, where
//! `Q` changes side.  Lobe heights are then tuned by Newton iteration until each
//! region has its prescribed area.

use nalgebra::{DMatrix, DVector};

use crate::diagram::crossings::{find_intersections, lifts_for};
use crate::diagram::{sum, SliceDiagram, CATALOG_TOLERANCE};
use crate::error::{Error, Result};
use crate::geom::{Affine, PlanarPolyline, Point};

use super::{CatalogSpec, Sign};

const SAMPLES: usize = 96;
/// Fraction of an end lobe removed at a tip where a band is attached.
const BAND_CUT: f64 = 0.03;
/// Integral of the end-lobe profile over the unit interval.
const END_INTEGRAL: f64 = 4.0 / 15.0;
const MID_INTEGRAL: f64 = 2.0 / std::f64::consts::PI;
/// Crossing sign of the band twist in a merge.
const BAND_SIGN: Sign = Sign::Plus;

#[derive(Clone, Copy)]
enum Profile {
    /// Tip at `x0`.
    LeftEnd,
    /// Tip at `x1`.
    RightEnd,
    Middle,
}

#[derive(Clone, Copy)]
struct Lobe {
    x0: f64,
    x1: f64,
    profile: Profile,
    /// +1 when `Q` runs along the top of the lobe.
    side: f64,
    /// Traverse from right to left.
    reverse: bool,
    cut: f64,
}

impl Lobe {
    fn new(x0: f64, x1: f64, profile: Profile, side: f64) -> Self {
        Lobe { x0, x1, profile, side, reverse: false, cut: 0.0 }
    }

    fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    fn integral(&self) -> f64 {
        match self.profile {
            Profile::Middle => MID_INTEGRAL,
            _ => END_INTEGRAL,
        }
    }

    fn height_at(&self, a: f64, x: f64) -> f64 {
        let w = self.width();
        match self.profile {
            Profile::LeftEnd => end_profile((x - self.x0) / w),
            Profile::RightEnd => end_profile((self.x1 - x) / w),
            Profile::Middle => (std::f64::consts::PI * (x - self.x0) / w).sin(),
        }
        .max(0.0)
            * a
    }

    fn samples(&self, a: f64) -> Vec<Point> {
        let w = self.width();
        let mut pts: Vec<Point> = (0..SAMPLES)
            .map(|k| {
                let s = (k as f64 + 0.5) / SAMPLES as f64;
                let (x, h) = match self.profile {
                    Profile::LeftEnd => {
                        let u = self.cut + (1.0 - self.cut) * s * s;
                        (self.x0 + u * w, end_profile(u))
                    }
                    Profile::RightEnd => {
                        let u = self.cut + (1.0 - self.cut) * (1.0 - s) * (1.0 - s);
                        (self.x1 - u * w, end_profile(u))
                    }
                    Profile::Middle => (self.x0 + s * w, (std::f64::consts::PI * s).sin()),
                };
                Point::new(x, self.side * a * h)
            })
            .collect();
        if self.reverse {
            pts.reverse();
        }
        pts
    }
}

fn end_profile(u: f64) -> f64 {
    u.max(0.0).sqrt() * (1.0 - u)
}

/// A single-component shape with its region probes and target areas.
struct Layout {
    lobes: Vec<Lobe>,
    start: Point,
    end: Point,
    /// Desired crossing signs in the order `Q` meets them.
    signs: Vec<Sign>,
    probes: Vec<Point>,
    targets: Vec<f64>,
}

fn build(layout: &Layout, heights: &[f64]) -> Result<SliceDiagram> {
    let mut q = Vec::new();
    for (lobe, &a) in layout.lobes.iter().zip(heights) {
        q.extend(lobe.samples(a));
    }
    let mut vertices = Vec::with_capacity(2 * q.len() + 2);
    vertices.push(layout.start);
    vertices.extend_from_slice(&q);
    vertices.push(layout.end);
    let end_index = vertices.len() - 1;
    vertices.extend(q.iter().rev().map(|p| Point::new(p.x, -p.y)));
    let line = PlanarPolyline::closed(vertices)?;
    let comps = [line];
    let mut hits = find_intersections(&comps)?;
    if hits.len() != layout.signs.len() {
        return Err(Error::Constraint(format!(
            "shape has {} crossings instead of {}",
            hits.len(),
            layout.signs.len()
        )));
    }
    let upper_slot = |h: &crate::diagram::Intersection| if h.strands[0].param < end_index as f64 { 0 } else { 1 };
    hits.sort_by(|a, b| a.strands[upper_slot(a)].param.total_cmp(&b.strands[upper_slot(b)].param));
    let over: Vec<usize> = hits
        .iter()
        .zip(&layout.signs)
        .map(|(h, s)| {
            let u = upper_slot(h);
            let upper_on_top = h.tangents[u].cross(h.tangents[1 - u]) > 0.0;
            if upper_on_top == (*s == Sign::Plus) {
                u
            } else {
                1 - u
            }
        })
        .collect();
    let lift = lifts_for(&comps, &hits, &over).pop().expect("one component");
    let [line] = comps;
    SliceDiagram::new(vec![line.with_lift(lift)?], CATALOG_TOLERANCE)
}

fn probe_areas(layout: &Layout, d: &SliceDiagram) -> Result<Vec<f64>> {
    let arr = d.arrangement();
    let mut seen = Vec::new();
    layout
        .probes
        .iter()
        .map(|&p| {
            let f = arr.face_at(p);
            if f == 0 || seen.contains(&f) {
                return Err(Error::Constraint("areas are not realizable by this construction".into()));
            }
            seen.push(f);
            Ok(d.region_areas()[f - 1])
        })
        .collect()
}

/// Newton iteration on lobe heights until every probed region has its target area.
fn calibrate(make: impl Fn(&[f64]) -> Layout, initial: Vec<f64>) -> Result<SliceDiagram> {
    let n = initial.len();
    let mut x = initial;
    let residual = |x: &[f64]| -> Result<(SliceDiagram, Vec<f64>)> {
        let layout = make(x);
        let d = build(&layout, x)?;
        let areas = probe_areas(&layout, &d)?;
        let r = areas.iter().zip(&layout.targets).map(|(a, t)| a / t - 1.0).collect();
        Ok((d, r))
    };
    for _ in 0..40 {
        let (d, r) = residual(&x)?;
        let err = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if err < 1e-13 {
            return d.with_exact_areas(make(&x).targets);
        }
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            let h = 1e-6 * x[j];
            xp[j] += h;
            let (_, rp) = residual(&xp)?;
            for i in 0..n {
                jac[(i, j)] = (rp[i] - r[i]) / h;
            }
        }
        let step = jac
            .lu()
            .solve(&DVector::from_iterator(n, r.iter().map(|v| -v)))
            .ok_or_else(|| Error::Numeric("singular calibration Jacobian".into()))?;
        for j in 0..n {
            x[j] = (x[j] + step[j]).clamp(0.5 * x[j], 2.0 * x[j]);
        }
        if err < 1e-11 && step.amax() < 1e-14 * x.iter().fold(0.0_f64, |m, v| m.max(*v)) {
            return d.with_exact_areas(make(&x).targets);
        }
    }
    let (d, r) = residual(&x)?;
    if r.iter().all(|v| v.abs() < 1e-11) {
        return d.with_exact_areas(make(&x).targets);
    }
    Err(Error::Numeric("lobe calibration did not converge".into()))
}

/// A chain of lobes along the axis with alternating sides.
fn chain(areas: &[f64], signs: &[Sign]) -> Result<SliceDiagram> {
    let k = areas.len();
    let widths: Vec<f64> = areas.iter().map(|a| 1.2 * a.sqrt()).collect();
    let mut lobes = Vec::with_capacity(k);
    let mut x = 0.0;
    for (j, w) in widths.iter().enumerate() {
        let profile = if j == 0 {
            Profile::LeftEnd
        } else if j == k - 1 {
            Profile::RightEnd
        } else {
            Profile::Middle
        };
        let side = if j % 2 == 0 { 1.0 } else { -1.0 };
        lobes.push(Lobe::new(x, x + w, profile, side));
        x += w;
    }
    let total = x;
    let initial = lobes.iter().zip(areas).map(|(l, a)| a / (2.0 * l.width() * l.integral())).collect();
    let areas = areas.to_vec();
    let signs = signs.to_vec();
    calibrate(
        move |_| Layout {
            lobes: lobes.clone(),
            start: Point::new(0.0, 0.0),
            end: Point::new(total, 0.0),
            signs: signs.clone(),
            probes: lobes.iter().map(|l| Point::new(0.5 * (l.x0 + l.x1), 0.0)).collect(),
            targets: areas.clone(),
        },
        initial,
    )
}

/// Left lobe of a positive figure-eight, then its right lobe, a twisted band
/// into a negative figure-eight lying inside that right lobe.
fn merge(a1: f64, a2: f64, a3: f64) -> Result<SliceDiagram> {
    let total = a3 - a2 + a1;
    let w_l = 1.2 * a3.sqrt();
    let w_r = 2.0 * total.sqrt();
    let inner = 0.6 * w_r;
    let (w_r1, w_r2) = (inner * a1 / (a1 + a2), inner * a2 / (a1 + a2));
    let c0 = 0.2 * w_r;
    let c1 = c0 + w_r1;
    let c2 = c1 + w_r2;
    let left = Lobe::new(-w_l, 0.0, Profile::LeftEnd, 1.0);
    let right = Lobe { cut: BAND_CUT, ..Lobe::new(0.0, w_r, Profile::RightEnd, -1.0) };
    let r2 = Lobe { cut: BAND_CUT, reverse: true, ..Lobe::new(c1, c2, Profile::RightEnd, 1.0) };
    let r1 = Lobe { reverse: true, ..Lobe::new(c0, c1, Profile::LeftEnd, -1.0) };
    let lobes = vec![left, right, r2, r1];
    let targets = vec![a3, a3 - 2.0 * a2, a2, a1];
    let initial = vec![
        a3 / (2.0 * w_l * END_INTEGRAL),
        1.1 * total / (2.0 * w_r * END_INTEGRAL),
        a2 / (2.0 * w_r2 * END_INTEGRAL),
        a1 / (2.0 * w_r1 * END_INTEGRAL),
    ];
    let mid = 0.5 * (c0 + c1);
    calibrate(
        move |h| {
            let gap_y = 0.5 * (r1.height_at(h[3], mid) + right.height_at(h[1], mid));
            Layout {
                lobes: lobes.clone(),
                start: Point::new(-w_l, 0.0),
                end: Point::new(c0, 0.0),
                signs: vec![Sign::Plus, BAND_SIGN, Sign::Minus],
                probes: vec![
                    Point::new(-0.5 * w_l, 0.0),
                    Point::new(mid, gap_y),
                    Point::new(0.5 * (c1 + c2), 0.0),
                    Point::new(mid, 0.0),
                ],
                targets: targets.clone(),
            }
        },
        initial,
    )
}

/// Largest axis-aligned rectangle (approximately) inside a face, as (center, half-width, half-height).
fn inscribed_rect(d: &SliceDiagram, face: usize) -> (Point, f64, f64) {
    let arr = d.arrangement();
    let ring = &arr.faces[face - 1].ring;
    let c = arr.interior_point(face);
    let crossings_at = |p: Point, vertical: bool| -> (f64, f64) {
        // distance to the boundary from p along +/- one axis
        let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
        for i in 0..ring.len() {
            let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
            let (pa, pb, qa, qb, pv, qv) = if vertical {
                (a.x, b.x, a.y, b.y, p.x, p.y)
            } else {
                (a.y, b.y, a.x, b.x, p.y, p.x)
            };
            if (pa <= pv) != (pb <= pv) {
                let q = qa + (pv - pa) / (pb - pa) * (qb - qa);
                if q >= qv {
                    hi = hi.min(q - qv);
                } else {
                    lo = lo.min(qv - q);
                }
            }
        }
        (lo, hi)
    };
    let (left, right) = crossings_at(c, false);
    let mut best = (c, 0.0, 0.0);
    for k in 1..40 {
        let frac = k as f64 / 40.0;
        let (x0, x1) = (c.x - frac * left, c.x + frac * right);
        let mut down = f64::INFINITY;
        let mut up = f64::INFINITY;
        for j in 0..=32 {
            let x = x0 + (x1 - x0) * j as f64 / 32.0;
            let (lo, hi) = crossings_at(Point::new(x, c.y), true);
            down = down.min(lo);
            up = up.min(hi);
        }
        let hh = down.min(up);
        let hw = 0.5 * (x1 - x0);
        if hw * hh > best.1 * best.2 {
            best = (Point::new(0.5 * (x0 + x1), c.y), hw, hh);
        }
    }
    best
}

fn nest(inner: &SliceDiagram, outer: &SliceDiagram) -> Result<SliceDiagram> {
    if inner.is_empty() {
        return Ok(outer.clone());
    }
    let host = (1..=outer.arrangement().face_count())
        .max_by(|&a, &b| outer.region_areas()[a - 1].total_cmp(&outer.region_areas()[b - 1]))
        .ok_or_else(|| Error::Constraint("outer diagram has no region to host the inner one".into()))?;
    let (center, hw, hh) = inscribed_rect(outer, host);
    let (w, h) = (0.9 * 2.0 * hw, 0.9 * 2.0 * hh);
    let bb = inner.bbox().expect("nonempty");
    if bb.area() >= w * h {
        return Err(Error::Constraint("inner diagram does not fit inside the outer one".into()));
    }
    let k = (w * bb.height() / (h * bb.width())).sqrt();
    let c = bb.center();
    let map = Affine::translation(-c.x, -c.y)
        .then(&Affine::squeeze(k))
        .then(&Affine::translation(center.x, center.y));
    let placed = inner.transformed(&map)?;
    let comps = outer.components().iter().chain(placed.components()).cloned().collect();
    let d = SliceDiagram::new(comps, CATALOG_TOLERANCE)?;
    let inner_total: f64 = inner.region_areas().iter().sum();
    let mut areas = outer.region_areas().to_vec();
    areas[host - 1] -= inner_total;
    areas.extend_from_slice(inner.region_areas());
    d.with_exact_areas(areas)
}

pub fn realize_catalog(spec: &CatalogSpec) -> Result<SliceDiagram> {
    spec.validate()?;
    match spec {
        CatalogSpec::EightPlus { area } => chain(&[*area, *area], &[Sign::Plus]),
        CatalogSpec::EightMinus { area } => chain(&[*area, *area], &[Sign::Minus]),
        CatalogSpec::Cat { signs, areas } => {
            let [a1, a2, a3] = *areas;
            chain(&[a1, a2, a3, a1 - a2 + a3], signs)
        }
        CatalogSpec::Sum { parts } => {
            let mut acc = SliceDiagram::empty();
            for p in parts {
                acc = sum(&acc, &realize_catalog(p)?)?;
            }
            Ok(acc)
        }
        CatalogSpec::Nest { inner, outer } => nest(&realize_catalog(inner)?, &realize_catalog(outer)?),
        CatalogSpec::Merge { areas } => merge(areas[0], areas[1], areas[2]).map_err(|e| match e {
            Error::Constraint(_) | Error::Numeric(_) => Error::Constraint(format!(
                "{spec}: the inner lobes do not fit inside the outer lobe; increase A3 relative to A1 + A2"
            )),
            e => e,
        }),
    }
}
