//! Level slices of the graph of `dF`.
//!
//! The slice at `y₂ = a` is the curve `{∂₂F = a}` in the `(x₁, x₂)` plane,
//! drawn in the `(x₁, y₁)` plane through `y₁ = ∂₁F` and lifted by `x₂`.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::diagram::crossings::find_intersections;
use crate::diagram::{validity_report, ComponentValidity, SliceDiagram};
use crate::error::{Error, Result};
use crate::geom::{signed_area, PlanarPolyline, Point};

use super::classify::{classify, Classification};
use super::contour::contour_loops;
use super::grid::{Grid, Sampled};
use super::GeneratingFamily;

/// Contour vertices are respaced to this many cells of arc length.
const RESAMPLE_CELLS: f64 = 1.0;
/// Genuine double points have preimages at least this many cell diagonals apart.
const NOISE_CELLS: f64 = 3.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SliceResult {
    pub level: f64,
    pub grid: Grid,
    pub tolerance: f64,
    /// Closed contours of `{∂₂F = a}` in the `(x₁, x₂)` plane.
    pub domain_loops: Vec<Vec<Point>>,
    pub diagram: SliceDiagram,
    pub classification: Classification,
    pub validity: Vec<ComponentValidity>,
    /// `|signed area|` of each component; zero for the exact curve.
    pub area_residuals: Vec<f64>,
    /// Domain points of the two strands of each crossing, in strand order.
    pub crossing_preimages: Vec<[Point; 2]>,
}

/// A critical point of `∂₂F` with the level band around it that the grid cannot resolve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalLevel {
    pub point: Point,
    pub value: f64,
    pub epsilon: f64,
}

/// Moves `p` onto `{∂₂F = level}` along the gradient of `∂₂F`.
fn project(family: &GeneratingFamily, level: f64, mut p: Point) -> Point {
    for _ in 0..8 {
        let j = family.jet(p);
        let grad = Point::new(j.f12, j.f22);
        let n2 = grad.dot(grad);
        if n2 == 0.0 {
            break;
        }
        let step = grad * ((j.f2 - level) / n2);
        p = p - step;
        if step.norm() < 1e-15 {
            break;
        }
    }
    p
}

/// Evenly spaced points along a closed contour, projected back onto the level set.
///
/// Marching squares leaves vertices wherever the curve meets grid lines, so
/// segment lengths vary wildly; even spacing makes the chord error a smooth
/// function of the grid size.
fn resample(family: &GeneratingFamily, level: f64, ring: &[Point], spacing: f64) -> Vec<Point> {
    let n = ring.len();
    let lengths: Vec<f64> = (0..n).map(|i| (ring[(i + 1) % n] - ring[i]).norm()).collect();
    let total: f64 = lengths.iter().sum();
    let count = ((total / spacing).ceil() as usize).max(8);
    let step = total / count as f64;
    let mut out = Vec::with_capacity(count);
    let (mut seg, mut walked) = (0, 0.0);
    for k in 0..count {
        let target = k as f64 * step;
        while seg < n - 1 && walked + lengths[seg] < target {
            walked += lengths[seg];
            seg += 1;
        }
        let t = if lengths[seg] > 0.0 { ((target - walked) / lengths[seg]).clamp(0.0, 1.0) } else { 0.0 };
        out.push(project(family, level, ring[seg].lerp(ring[(seg + 1) % n], t)));
    }
    out
}

/// A family sampled once on a grid, ready to be sliced at many levels.
pub struct Slicer {
    pub family: GeneratingFamily,
    pub grid: Grid,
    d2: Sampled,
    critical: Vec<CriticalLevel>,
}

impl Slicer {
    pub fn new(family: GeneratingFamily, grid: Grid) -> Result<Self> {
        family.validate()?;
        let d2 = Sampled::new(grid, |p| family.d2(p));
        let critical = critical_levels(&family, &d2);
        Ok(Slicer { family, grid, d2, critical })
    }

    pub fn with_resolution(family: GeneratingFamily, n: usize) -> Result<Self> {
        let grid = Grid::for_family(&family, n)?;
        Slicer::new(family, grid)
    }

    /// Sampled minimum of `∂₂F`.
    pub fn min_d2(&self) -> f64 {
        self.d2.min()
    }

    pub fn critical_levels(&self) -> &[CriticalLevel] {
        &self.critical
    }

    /// Relative tolerance attached to extracted diagrams.
    pub fn tolerance(&self) -> f64 {
        (2.0 * self.grid.cell_diagonal() / self.grid.diagonal()).max(1e-6)
    }

    pub fn check_level(&self, level: f64) -> Result<()> {
        if !(level.is_finite() && level < 0.0) {
            return Err(Error::InvalidFamily(format!("slice levels must be negative, got {level}")));
        }
        if let Some(c) = self.critical.iter().find(|c| (level - c.value).abs() < c.epsilon) {
            return Err(Error::NonGeneric(format!(
                "level {level} is within {:.3e} of the critical value {:.6} of the second partial at ({:.4}, {:.4})",
                c.epsilon, c.value, c.point.x, c.point.y
            )));
        }
        Ok(())
    }

    pub fn extract(&self, level: f64) -> Result<SliceResult> {
        self.check_level(level)?;
        let g = self.grid;
        let tolerance = self.tolerance();
        let empty = |loops| SliceResult {
            level,
            grid: g,
            tolerance,
            domain_loops: loops,
            diagram: SliceDiagram::empty(),
            classification: Classification::Empty,
            validity: Vec::new(),
            area_residuals: Vec::new(),
            crossing_preimages: Vec::new(),
        };
        if level < self.d2.min() {
            return Ok(empty(Vec::new()));
        }
        let family = &self.family;
        let loops = contour_loops(&self.d2, &|p| family.d2(p), level)?;
        let spacing = RESAMPLE_CELLS * g.hx().min(g.hy());
        let mut curves: Vec<Curve> =
            loops.into_iter().map(|l| Curve::new(family, resample(family, level, &l, spacing))).collect();
        let noise = NOISE_CELLS * g.cell_diagonal();
        for _ in 0..64 {
            let lines: Vec<PlanarPolyline> = curves.iter().map(Curve::polyline).collect::<Result<_>>()?;
            let hits = find_intersections(&lines).map_err(as_non_generic)?;
            let spurious = hits.iter().find(|h| {
                let [s, t] = h.strands;
                s.component == t.component
                    && (curves[s.component].domain_at(s.param) - curves[t.component].domain_at(t.param)).norm() < noise
            });
            match spurious {
                Some(h) => curves[h.strands[0].component].splice(h.strands[0].param, h.strands[1].param, h.point),
                None => break,
            }
        }
        let lines: Vec<PlanarPolyline> = curves.iter().map(Curve::polyline).collect::<Result<_>>()?;
        let diagram = SliceDiagram::new(lines, tolerance).map_err(as_non_generic)?;
        let mut crossing_preimages = Vec::with_capacity(diagram.crossings().len());
        for x in diagram.crossings() {
            let pre = [
                curves[x.strands[0].component].domain_at(x.strands[0].param),
                curves[x.strands[1].component].domain_at(x.strands[1].param),
            ];
            if (pre[0] - pre[1]).norm() < noise {
                return Err(Error::NonGeneric(format!(
                    "crossing at ({:.4}, {:.4}) has preimages closer than {NOISE_CELLS} cells",
                    x.point.x, x.point.y
                )));
            }
            crossing_preimages.push(pre);
        }
        let validity = validity_report(&diagram);
        let area_residuals = diagram.components().iter().map(|c| signed_area(c).map(f64::abs)).collect::<Result<_>>()?;
        let classification = classify(&diagram);
        Ok(SliceResult {
            level,
            grid: g,
            tolerance,
            domain_loops: curves.into_iter().map(|c| c.domain).collect(),
            diagram,
            classification,
            validity,
            area_residuals,
            crossing_preimages,
        })
    }
}

fn as_non_generic(e: Error) -> Error {
    match e {
        Error::Degenerate { point, reason } => {
            Error::NonGeneric(format!("slice is not generic at ({:.4}, {:.4}): {reason}", point.x, point.y))
        }
        e => e,
    }
}

/// One contour with its image and lift, vertex for vertex.
struct Curve {
    domain: Vec<Point>,
    image: Vec<Point>,
}

impl Curve {
    fn new(family: &GeneratingFamily, mut domain: Vec<Point>) -> Self {
        let mut image: Vec<Point> = domain.iter().map(|&p| Point::new(p.x, family.gradient(p).0)).collect();
        let mut keep = vec![true; image.len()];
        for k in 1..image.len() {
            if image[k] == image[k - 1] {
                keep[k] = false;
            }
        }
        let mut it = keep.iter();
        domain.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        image.retain(|_| *it.next().unwrap());
        Curve { domain, image }
    }

    fn polyline(&self) -> Result<PlanarPolyline> {
        PlanarPolyline::new(self.image.clone(), true, Some(self.domain.iter().map(|p| p.y).collect()))
    }

    fn domain_at(&self, param: f64) -> Point {
        let n = self.domain.len();
        let i = (param.floor() as usize).min(n - 1);
        self.domain[i].lerp(self.domain[(i + 1) % n], param - i as f64)
    }

    /// Cuts out the shorter of the two arcs between `p` and `q`, joining the rest at `point`.
    fn splice(&mut self, p: f64, q: f64, point: Point) {
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        let n = self.image.len();
        let (i, j) = (p.floor() as usize, q.floor() as usize);
        let joint = (self.domain_at(p) + self.domain_at(q)) * 0.5;
        let inner = j - i;
        if inner <= n - inner {
            // Drop vertices i+1..=j.
            self.image.splice(i + 1..=j, [point]);
            self.domain.splice(i + 1..=j, [joint]);
        } else {
            // Keep i+1..=j and close through the joint.
            let mut image: Vec<Point> = self.image[i + 1..=j].to_vec();
            let mut domain: Vec<Point> = self.domain[i + 1..=j].to_vec();
            image.push(point);
            domain.push(joint);
            self.image = image;
            self.domain = domain;
        }
    }
}

fn critical_levels(family: &GeneratingFamily, d2: &Sampled) -> Vec<CriticalLevel> {
    let scale = d2.min().abs().max(d2.max().abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let h = d2.grid.hx().max(d2.grid.hy());
    let mut out: Vec<CriticalLevel> = Vec::new();
    for (i, j) in d2.critical_nodes() {
        if d2.at(i, j).abs() < 1e-9 * scale {
            continue;
        }
        let mut x = d2.grid.node(i, j);
        for _ in 0..30 {
            let jet = family.jet(x);
            let hess = Matrix2::new(jet.f112, jet.f122, jet.f122, jet.f222);
            let Some(step) = hess.lu().solve(&Vector2::new(-jet.f12, -jet.f22)) else { break };
            let step = Point::new(step[0], step[1]);
            x = x + step;
            if step.norm() < 1e-14 {
                break;
            }
        }
        let jet = family.jet(x);
        let start = d2.grid.node(i, j);
        let converged = (jet.f12.hypot(jet.f22)) < 1e-9 * scale / h.max(1e-12) && (x - start).norm() < 2.0 * h;
        let (point, value) = if converged { (x, jet.f2) } else { (start, d2.at(i, j)) };
        let jet = family.jet(point);
        let eig = SymmetricEigen::new(Matrix2::new(jet.f112, jet.f122, jet.f122, jet.f222)).eigenvalues;
        let lambda = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let epsilon = (4.0 * lambda * h * h).max(1e-12 * scale);
        if !out.iter().any(|c| (c.point - point).norm() < h && (c.value - value).abs() < epsilon) {
            out.push(CriticalLevel { point, value, epsilon });
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    out
}

/// Slice of `family` at `level` on the default grid for `n` cells.
pub fn extract_slice(family: &GeneratingFamily, level: f64, grid: Grid) -> Result<SliceResult> {
    Slicer::new(family.clone(), grid)?.extract(level)
}

/// Slices at `a < b`; the part of the Lagrangian between them is a cobordism
/// from the lower slice to the upper one.
pub fn witness_relation(family: &GeneratingFamily, a: f64, b: f64, grid: Grid) -> Result<(SliceResult, SliceResult)> {
    if !(a < b && b < 0.0) {
        return Err(Error::InvalidFamily(format!("witness levels need a < b < 0, got {a} and {b}")));
    }
    let slicer = Slicer::new(family.clone(), grid)?;
    Ok((slicer.extract(a)?, slicer.extract(b)?))
}
