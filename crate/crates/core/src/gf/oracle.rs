//! Critical points of the difference function computed from second derivatives.
//!
//! For a generating family without fiber variables the difference function at
//! level `a` is `Δ(x₁, x₂, x̃₂) = F(x₁, x₂) - F(x₁, x̃₂) - a(x₂ - x̃₂)`.  A
//! crossing of the slice with strands over `(x₁, x₂)` and `(x₁, x̃₂)` gives two
//! critical points, one for each order of the strands.  Their Morse indices and
//! critical values are read off directly, independently of capping paths.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

use super::slice::SliceResult;
use super::GeneratingFamily;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OraclePoint {
    /// Strand whose preimage supplies `x₂`.
    pub branch: u8,
    pub x1: f64,
    pub x2: f64,
    pub x2_tilde: f64,
    /// Number of negative Hessian eigenvalues.
    pub index: i32,
    pub value: f64,
    /// Smallest Hessian eigenvalue in absolute value, relative to the largest.
    pub conditioning: f64,
    pub near_singular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub crossing: usize,
    pub points: [OraclePoint; 2],
}

impl OracleResult {
    pub fn offsets(&self) -> [i32; 2] {
        [self.points[0].index, self.points[1].index]
    }

    pub fn values(&self) -> [f64; 2] {
        [self.points[0].value, self.points[1].value]
    }
}

const NEAR_SINGULAR: f64 = 1e-8;

fn gradient(family: &GeneratingFamily, a: f64, v: Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let (p, q) = (family.jet(Point::new(v[0], v[1])), family.jet(Point::new(v[0], v[2])));
    let grad = Vector3::new(p.f1 - q.f1, p.f2 - a, a - q.f2);
    let hess = Matrix3::new(
        p.f11 - q.f11,
        p.f12,
        -q.f12,
        p.f12,
        p.f22,
        0.0,
        -q.f12,
        0.0,
        -q.f22,
    );
    (grad, hess)
}

pub fn difference_function(family: &GeneratingFamily, a: f64, x1: f64, x2: f64, x2_tilde: f64) -> f64 {
    family.value(Point::new(x1, x2)) - family.value(Point::new(x1, x2_tilde)) - a * (x2 - x2_tilde)
}

fn refine(family: &GeneratingFamily, a: f64, start: Vector3<f64>, branch: u8) -> Result<OraclePoint> {
    let mut v = start;
    let mut converged = false;
    for _ in 0..50 {
        let (g, h) = gradient(family, a, v);
        let step = h.lu().solve(&(-g)).ok_or_else(|| Error::Numeric("singular Hessian during Newton refinement".into()))?;
        v += step;
        if step.norm() < 1e-13 * (1.0 + v.norm()) {
            converged = true;
            break;
        }
    }
    if !converged || (v - start).norm() > 0.25 * (1.0 + start.norm()) {
        return Err(Error::Numeric(format!(
            "Newton refinement from ({:.4}, {:.4}, {:.4}) did not converge",
            start[0], start[1], start[2]
        )));
    }
    let (_, h) = gradient(family, a, v);
    let eig = SymmetricEigen::new(h).eigenvalues;
    let largest = eig.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let smallest = eig.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
    let conditioning = if largest > 0.0 { smallest / largest } else { 0.0 };
    Ok(OraclePoint {
        branch,
        x1: v[0],
        x2: v[1],
        x2_tilde: v[2],
        index: eig.iter().filter(|e| **e < 0.0).count() as i32,
        value: difference_function(family, a, v[0], v[1], v[2]),
        conditioning,
        near_singular: conditioning < NEAR_SINGULAR,
    })
}

/// Both critical points of `Δ` attached to one crossing of an extracted slice.
///
/// The point for branch `b` takes `x₂` from the preimage of strand `b` and
/// `x̃₂` from the other strand.
pub fn hessian_oracle(family: &GeneratingFamily, slice: &SliceResult, crossing: usize) -> Result<OracleResult> {
    let pre = slice
        .crossing_preimages
        .get(crossing)
        .ok_or_else(|| Error::InvalidDiagram(format!("no crossing {crossing}")))?;
    let x1 = 0.5 * (pre[0].x + pre[1].x);
    let mut points = Vec::with_capacity(2);
    for b in 0..2 {
        let start = Vector3::new(x1, pre[b].y, pre[1 - b].y);
        points.push(refine(family, slice.level, start, b as u8)?);
    }
    Ok(OracleResult { crossing, points: [points[0], points[1]] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_on_the_diagonal() {
        let f = GeneratingFamily::new(vec![super::super::BumpTerm { c: 1.0, p: 0.0, q: 0.0, s: 1.0, t: 1.0 }]).unwrap();
        for &(x1, x2) in &[(0.1, 0.4), (-0.3, 0.7), (0.0, 0.0)] {
            assert_eq!(difference_function(&f, -0.2, x1, x2, x2), 0.0);
        }
    }

    #[test]
    fn hessian_matches_differences() {
        let f = GeneratingFamily::new(vec![
            super::super::BumpTerm { c: 1.0, p: 0.0, q: 0.0, s: 1.0, t: 1.0 },
            super::super::BumpTerm { c: 0.4, p: 0.3, q: 0.2, s: 0.6, t: 0.8 },
        ])
        .unwrap();
        let a = -0.15;
        let v = Vector3::new(0.12, 0.5, -0.2);
        let (g, h) = gradient(&f, a, v);
        let eps = 1e-6;
        for k in 0..3 {
            let mut vp = v;
            let mut vm = v;
            vp[k] += eps;
            vm[k] -= eps;
            let num = (difference_function(&f, a, vp[0], vp[1], vp[2]) - difference_function(&f, a, vm[0], vm[1], vm[2]))
                / (2.0 * eps);
            assert!((num - g[k]).abs() < 1e-7, "gradient {k}");
            let col = (gradient(&f, a, vp).0 - gradient(&f, a, vm).0) / (2.0 * eps);
            for r in 0..3 {
                assert!((col[r] - h[(r, k)]).abs() < 1e-6, "hessian ({r},{k})");
            }
        }
    }
}
