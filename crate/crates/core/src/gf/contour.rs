//! Marching squares with exact edge roots.
//!
//! Cells are split by the sign of `f - level` at their corners; saddle cells
//! are resolved by evaluating `f` at the cell center.  Each contour point is
//! the root of `f - level` on its grid edge, found by safeguarded secant
//! steps on the exact function rather than by linear interpolation.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{ring_area, Point};

use super::grid::Sampled;

/// Root of `f - level` between `a` (below) and `b` (at or above).
fn edge_root(f: &impl Fn(Point) -> f64, level: f64, a: Point, fa: f64, b: Point, fb: f64) -> Point {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let (mut glo, mut ghi) = (fa - level, fb - level);
    let mut t = glo / (glo - ghi);
    for _ in 0..60 {
        let g = f(a.lerp(b, t)) - level;
        if g == 0.0 {
            break;
        }
        if g < 0.0 {
            lo = t;
            glo = g;
        } else {
            hi = t;
            ghi = g;
        }
        if hi - lo < 1e-15 {
            break;
        }
        let secant = lo + glo / (glo - ghi) * (hi - lo);
        // Fall back to bisection when the secant step stalls at one end.
        t = if secant <= lo + 0.01 * (hi - lo) || secant >= hi - 0.01 * (hi - lo) { 0.5 * (lo + hi) } else { secant };
    }
    a.lerp(b, t)
}

/// Closed contour loops of `{f = level}`, each listed without repeating its
/// first point and oriented counterclockwise.
pub fn contour_loops(field: &Sampled, f: &(impl Fn(Point) -> f64 + Sync), level: f64) -> Result<Vec<Vec<Point>>> {
    let g = field.grid;
    let row = g.nx + 1;
    let inside = |i: usize, j: usize| field.at(i, j) < level;
    let h_edge = |i: usize, j: usize| 2 * (j * row + i);
    let v_edge = |i: usize, j: usize| 2 * (j * row + i) + 1;
    let mut points: HashMap<usize, Point> = HashMap::new();
    let mut links: HashMap<usize, Vec<usize>> = HashMap::new();
    let point_on = |edge: usize, points: &mut HashMap<usize, Point>| {
        points.entry(edge).or_insert_with(|| {
            let (node, vertical) = (edge / 2, edge % 2 == 1);
            let (i, j) = (node % row, node / row);
            let (i2, j2) = if vertical { (i, j + 1) } else { (i + 1, j) };
            let (p, q) = (g.node(i, j), g.node(i2, j2));
            let (fp, fq) = (field.at(i, j), field.at(i2, j2));
            if fp < level {
                edge_root(f, level, p, fp, q, fq)
            } else {
                edge_root(f, level, q, fq, p, fp)
            }
        });
    };
    for j in 0..g.ny {
        for i in 0..g.nx {
            let (bl, br, tr, tl) = (inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1));
            let (b, r, t, l) = (h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j));
            let crossed: Vec<usize> =
                [(b, bl != br), (r, br != tr), (t, tr != tl), (l, tl != bl)].iter().filter(|e| e.1).map(|e| e.0).collect();
            let segments: Vec<(usize, usize)> = match crossed.len() {
                0 => Vec::new(),
                2 => vec![(crossed[0], crossed[1])],
                4 => {
                    let center = Point::new(g.x_min + (i as f64 + 0.5) * g.hx(), g.y_min + (j as f64 + 0.5) * g.hy());
                    let center_inside = f(center) < level;
                    // Cut off the two corners that differ from the center.
                    if center_inside == bl {
                        vec![(b, r), (t, l)]
                    } else {
                        vec![(l, b), (r, t)]
                    }
                }
                _ => unreachable!("a cell crosses an even number of edges"),
            };
            for (e1, e2) in segments {
                point_on(e1, &mut points);
                point_on(e2, &mut points);
                links.entry(e1).or_default().push(e2);
                links.entry(e2).or_default().push(e1);
            }
        }
    }
    let mut keys: Vec<usize> = links.keys().copied().collect();
    keys.sort_unstable();
    let mut used: HashMap<usize, bool> = HashMap::new();
    let mut loops = Vec::new();
    for start in keys {
        if used.contains_key(&start) {
            continue;
        }
        if links[&start].len() != 2 {
            return Err(Error::Numeric("contour reaches the boundary of the sampling grid".into()));
        }
        let mut ring = vec![points[&start]];
        used.insert(start, true);
        let (mut prev, mut cur) = (start, links[&start][0]);
        while cur != start {
            let next = &links[&cur];
            if next.len() != 2 {
                return Err(Error::Numeric("contour reaches the boundary of the sampling grid".into()));
            }
            ring.push(points[&cur]);
            used.insert(cur, true);
            let n = if next[0] == prev { next[1] } else { next[0] };
            prev = cur;
            cur = n;
        }
        if ring_area(&ring) < 0.0 {
            ring.reverse();
        }
        loops.push(ring);
    }
    Ok(loops)
}
