//! Bump-function generating families and their closed-form derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{BBox, Point};

/// `b(u)` and its first three derivatives.
///
/// `b(u) = exp(-1/(1 - u²))` on `|u| < 1`, zero elsewhere.  Writing
/// `b = exp(φ)` gives `b' = bφ'`, `b'' = b(φ'' + φ'²)` and
/// `b''' = b(φ''' + 3φ'φ'' + φ'³)`.
pub fn bump_jet(u: f64) -> [f64; 4] {
    let w = 1.0 - u * u;
    if w <= 0.0 {
        return [0.0; 4];
    }
    let b = (-1.0 / w).exp();
    if b == 0.0 {
        return [0.0; 4];
    }
    let d1 = -2.0 * u / (w * w);
    let d2 = -2.0 * (1.0 + 3.0 * u * u) / (w * w * w);
    let d3 = -24.0 * u * (1.0 + u * u) / (w * w * w * w);
    [b, b * d1, b * (d2 + d1 * d1), b * (d3 + 3.0 * d1 * d2 + d1 * d1 * d1)]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpTerm {
    pub c: f64,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub t: f64,
}

impl BumpTerm {
    pub fn support(&self) -> BBox {
        BBox { min: Point::new(self.p - self.s, self.q - self.t), max: Point::new(self.p + self.s, self.q + self.t) }
    }
}

/// Derivatives of `F` at one point, indexed by the variables differentiated.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub f11: f64,
    pub f12: f64,
    pub f22: f64,
    pub f112: f64,
    pub f122: f64,
    pub f222: f64,
}

/// `F(x1, x2) = Σ c·b((x1 - p)/s)·b((x2 - q)/t)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GeneratingFamily {
    pub terms: Vec<BumpTerm>,
}

impl GeneratingFamily {
    pub fn new(terms: Vec<BumpTerm>) -> Result<Self> {
        let f = GeneratingFamily { terms };
        f.validate()?;
        Ok(f)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: GeneratingFamily = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.terms.iter().enumerate() {
            if ![t.c, t.p, t.q, t.s, t.t].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidFamily(format!("term {i} has a non-finite parameter")));
            }
            if t.s <= 0.0 || t.t <= 0.0 {
                return Err(Error::InvalidFamily(format!("term {i} needs positive widths, got s = {}, t = {}", t.s, t.t)));
            }
        }
        Ok(())
    }

    /// Union of the term boxes.
    pub fn support(&self) -> Option<BBox> {
        self.terms.iter().map(BumpTerm::support).reduce(|a, b| a.union(&b))
    }

    pub fn jet(&self, x: Point) -> Jet {
        let mut j = Jet::default();
        for t in &self.terms {
            let (u, v) = ((x.x - t.p) / t.s, (x.y - t.q) / t.t);
            if u.abs() >= 1.0 || v.abs() >= 1.0 {
                continue;
            }
            let (a, b) = (bump_jet(u), bump_jet(v));
            let (s, tt, c) = (t.s, t.t, t.c);
            j.f += c * a[0] * b[0];
            j.f1 += c / s * a[1] * b[0];
            j.f2 += c / tt * a[0] * b[1];
            j.f11 += c / (s * s) * a[2] * b[0];
            j.f12 += c / (s * tt) * a[1] * b[1];
            j.f22 += c / (tt * tt) * a[0] * b[2];
            j.f112 += c / (s * s * tt) * a[2] * b[1];
            j.f122 += c / (s * tt * tt) * a[1] * b[2];
            j.f222 += c / (tt * tt * tt) * a[0] * b[3];
        }
        j
    }

    pub fn value(&self, x: Point) -> f64 {
        self.jet(x).f
    }

    /// `(∂₁F, ∂₂F)` at one point.
    pub fn gradient(&self, x: Point) -> (f64, f64) {
        let mut g = (0.0, 0.0);
        for t in &self.terms {
            let (u, v) = ((x.x - t.p) / t.s, (x.y - t.q) / t.t);
            if u.abs() >= 1.0 || v.abs() >= 1.0 {
                continue;
            }
            let (a, b) = (bump_jet(u), bump_jet(v));
            g.0 += t.c / t.s * a[1] * b[0];
            g.1 += t.c / t.t * a[0] * b[1];
        }
        g
    }

    pub fn d2(&self, x: Point) -> f64 {
        self.gradient(x).1
    }
}

/// `(∂₁F, ∂₂F)` at every point.
pub fn partials(family: &GeneratingFamily, points: &[Point]) -> (Vec<f64>, Vec<f64>) {
    points.iter().map(|&p| family.gradient(p)).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-5;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn bump_derivatives_match_differences() {
        for &u in &[-0.9, -0.5, -0.1, 0.0, 0.3, 0.77] {
            let j = bump_jet(u);
            for k in 0..3 {
                let num = fd(|x| bump_jet(x)[k], u);
                assert!((num - j[k + 1]).abs() <= 1e-6 * (1.0 + j[k + 1].abs()), "u={u} k={k}: {num} vs {}", j[k + 1]);
            }
        }
        assert_eq!(bump_jet(1.0), [0.0; 4]);
        assert_eq!(bump_jet(-1.0 + 1e-200), [0.0; 4]);
    }

    #[test]
    fn family_jet_matches_differences() {
        let f = GeneratingFamily::new(vec![
            BumpTerm { c: 1.0, p: 0.0, q: 0.0, s: 1.0, t: 1.0 },
            BumpTerm { c: -0.6, p: 0.4, q: 0.3, s: 0.7, t: 0.5 },
        ])
        .unwrap();
        let x = Point::new(0.21, 0.37);
        let j = f.jet(x);
        let along = |g: &dyn Fn(Point) -> f64, dx: f64, dy: f64| fd(|h| g(Point::new(x.x + h * dx, x.y + h * dy)), 0.0);
        let checks = [
            (along(&|p| f.jet(p).f, 1.0, 0.0), j.f1),
            (along(&|p| f.jet(p).f, 0.0, 1.0), j.f2),
            (along(&|p| f.jet(p).f1, 1.0, 0.0), j.f11),
            (along(&|p| f.jet(p).f1, 0.0, 1.0), j.f12),
            (along(&|p| f.jet(p).f2, 0.0, 1.0), j.f22),
            (along(&|p| f.jet(p).f12, 1.0, 0.0), j.f112),
            (along(&|p| f.jet(p).f22, 1.0, 0.0), j.f122),
            (along(&|p| f.jet(p).f22, 0.0, 1.0), j.f222),
        ];
        for (k, (num, exact)) in checks.iter().enumerate() {
            assert!((num - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "check {k}: {num} vs {exact}");
        }
    }

    #[test]
    fn zero_outside_support() {
        let f = GeneratingFamily::new(vec![BumpTerm { c: 2.0, p: 0.0, q: 0.0, s: 1.0, t: 1.0 }]).unwrap();
        let (a, b) = partials(&f, &[Point::new(1.5, 0.0), Point::new(0.0, -1.0), Point::new(3.0, 3.0)]);
        assert!(a.iter().chain(&b).all(|v| *v == 0.0));
        assert_eq!(GeneratingFamily::default().gradient(Point::new(0.1, 0.2)), (0.0, 0.0));
    }

    #[test]
    fn rejects_bad_widths() {
        assert!(GeneratingFamily::from_json(r#"{"terms":[{"c":1,"p":0,"q":0,"s":0,"t":1}]}"#).is_err());
        assert!(GeneratingFamily::from_json(r#"{"terms":[]}"#).is_ok());
    }
}
