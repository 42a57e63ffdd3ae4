//! Planar arrangement of a diagram: crossings as vertices, arcs between
//! consecutive crossings as edges, and the bounded faces they cut out.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geom::{ring_area, winding_number, PlanarPolyline, Point};

use super::crossings::Crossing;

/// One passage of a component through a crossing.
#[derive(Clone, Copy, Debug)]
pub struct Event {
    pub param: f64,
    pub crossing: usize,
    pub slot: usize,
}

/// Arc of a component between two consecutive events (or the whole component
/// when it has none).
#[derive(Clone, Debug)]
pub struct Edge {
    pub component: usize,
    /// Index of the starting event in the component's event list.
    pub first_event: Option<usize>,
    pub points: Vec<Point>,
    /// Shoelace contribution `½ Σ p_i × p_{i+1}` along the arc.
    pub area: f64,
}

#[derive(Clone, Debug)]
pub struct Face {
    /// Half-edges bounding the face from the inside, counterclockwise.
    pub cycle: Vec<usize>,
    pub ring: Vec<Point>,
    /// Area enclosed by the boundary cycle minus the footprints of nested pieces.
    pub area: f64,
    pub piece: usize,
    /// Pieces sitting directly inside this face.
    pub holes: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Arrangement {
    pub events: Vec<Vec<Event>>,
    /// Edges of each component in traversal order.
    pub component_edges: Vec<Vec<usize>>,
    pub edges: Vec<Edge>,
    /// Face on the left of each half-edge; `2e` runs along edge `e`, `2e + 1` against it.
    /// Face 0 is the unbounded face; bounded faces are `1..=faces.len()`.
    pub left_face: Vec<usize>,
    pub faces: Vec<Face>,
    pub piece_of_component: Vec<usize>,
    pub piece_count: usize,
    /// Footprint (area of the union of bounded faces) per piece.
    pub piece_footprint: Vec<f64>,
    /// Face containing each piece, 0 when it sits in the unbounded face.
    pub piece_container: Vec<usize>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl Arrangement {
    pub fn build(components: &[PlanarPolyline], crossings: &[Crossing]) -> Result<Self> {
        let nc = components.len();
        let mut events: Vec<Vec<Event>> = vec![Vec::new(); nc];
        for (ci, x) in crossings.iter().enumerate() {
            for (slot, s) in x.strands.iter().enumerate() {
                events[s.component].push(Event { param: s.param, crossing: ci, slot });
            }
        }
        for ev in &mut events {
            ev.sort_by(|a, b| a.param.total_cmp(&b.param));
        }

        // Edges along each component.
        let mut edges = Vec::new();
        let mut component_edges = vec![Vec::new(); nc];
        for (c, line) in components.iter().enumerate() {
            let n = line.len();
            let ev = &events[c];
            let spans: Vec<(f64, f64, Option<usize>)> = if ev.is_empty() {
                vec![(0.0, n as f64, None)]
            } else {
                (0..ev.len())
                    .map(|k| {
                        let p = ev[k].param;
                        let q = if k + 1 < ev.len() { ev[k + 1].param } else { ev[0].param + n as f64 };
                        (p, q, Some(k))
                    })
                    .collect()
            };
            for (p, q, first_event) in spans {
                let mut points = vec![param_point(line, p)];
                let mut v = p.floor() as usize + 1;
                while (v as f64) < q {
                    points.push(line.vertices[v % n]);
                    v += 1;
                }
                points.push(param_point(line, q));
                let area = 0.5 * points.windows(2).map(|w| w[0].cross(w[1])).sum::<f64>();
                component_edges[c].push(edges.len());
                edges.push(Edge { component: c, first_event, points, area });
            }
        }

        // Outgoing half-edges at each crossing, sorted counterclockwise by direction.
        let nh = 2 * edges.len();
        let mut origin: Vec<Option<usize>> = vec![None; nh];
        let mut around: Vec<Vec<(f64, usize)>> = vec![Vec::new(); crossings.len()];
        for (c, ev) in events.iter().enumerate() {
            let m = ev.len();
            for k in 0..m {
                let out_edge = component_edges[c][k];
                let in_edge = component_edges[c][(k + m - 1) % m];
                let x = &crossings[ev[k].crossing];
                let s = x.strands[ev[k].slot];
                let tangent = components[c].direction(s.segment());
                origin[2 * out_edge] = Some(ev[k].crossing);
                origin[2 * in_edge + 1] = Some(ev[k].crossing);
                around[ev[k].crossing].push((tangent.angle(), 2 * out_edge));
                around[ev[k].crossing].push(((-tangent).angle(), 2 * in_edge + 1));
            }
        }
        for list in &mut around {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        let next = |h: usize| -> usize {
            let twin = h ^ 1;
            match origin[twin] {
                None => h,
                Some(v) => {
                    let list = &around[v];
                    let i = list.iter().position(|&(_, g)| g == twin).expect("half-edge registered at its origin");
                    list[(i + list.len() - 1) % list.len()].1
                }
            }
        };

        // Trace boundary cycles.
        let mut cycle_of = vec![usize::MAX; nh];
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        for h in 0..nh {
            if cycle_of[h] != usize::MAX {
                continue;
            }
            let id = cycles.len();
            let mut cyc = Vec::new();
            let mut g = h;
            loop {
                if cycle_of[g] != usize::MAX {
                    if g != h {
                        return Err(Error::InvalidDiagram("inconsistent face structure".into()));
                    }
                    break;
                }
                cycle_of[g] = id;
                cyc.push(g);
                g = next(g);
            }
            cycles.push(cyc);
        }
        let half_area = |h: usize| if h % 2 == 0 { edges[h / 2].area } else { -edges[h / 2].area };
        let ring_of = |cyc: &[usize]| -> Vec<Point> {
            let mut ring = Vec::new();
            for &h in cyc {
                let pts = &edges[h / 2].points;
                if h % 2 == 0 {
                    ring.extend_from_slice(&pts[..pts.len() - 1]);
                } else {
                    ring.extend(pts[1..].iter().rev());
                }
            }
            ring
        };
        let cycle_area: Vec<f64> = cycles.iter().map(|c| c.iter().map(|&h| half_area(h)).sum()).collect();

        // Pieces: components linked by crossings.
        let mut parent: Vec<usize> = (0..nc).collect();
        for x in crossings {
            let (a, b) = (find(&mut parent, x.strands[0].component), find(&mut parent, x.strands[1].component));
            parent[a] = b;
        }
        let mut piece_of_component = vec![usize::MAX; nc];
        let mut roots = Vec::new();
        for c in 0..nc {
            let r = find(&mut parent, c);
            let id = roots.iter().position(|&x| x == r).unwrap_or_else(|| {
                roots.push(r);
                roots.len() - 1
            });
            piece_of_component[c] = id;
        }
        let piece_count = roots.len();
        let cycle_piece: Vec<usize> =
            cycles.iter().map(|c| piece_of_component[edges[c[0] / 2].component]).collect();

        let mut outer = vec![usize::MAX; piece_count];
        for (i, &p) in cycle_piece.iter().enumerate() {
            if outer[p] == usize::MAX || cycle_area[i] < cycle_area[outer[p]] {
                outer[p] = i;
            }
        }
        let rings: Vec<Vec<Point>> = cycles.iter().map(|c| ring_of(c)).collect();

        // Bounded faces are all non-outer cycles.
        let mut face_of_cycle = vec![0usize; cycles.len()];
        let mut faces = Vec::new();
        for (i, cyc) in cycles.iter().enumerate() {
            if outer[cycle_piece[i]] == i {
                continue;
            }
            if cycle_area[i] <= 0.0 {
                return Err(Error::InvalidDiagram("bounded face with non-positive area".into()));
            }
            faces.push(Face {
                cycle: cyc.clone(),
                ring: rings[i].clone(),
                area: cycle_area[i],
                piece: cycle_piece[i],
                holes: Vec::new(),
            });
            face_of_cycle[i] = faces.len();
        }

        // Nest pieces into the smallest face of another piece that contains them.
        let piece_footprint: Vec<f64> = outer.iter().map(|&o| -cycle_area[o]).collect();
        let mut piece_container = vec![0usize; piece_count];
        for p in 0..piece_count {
            let probe = rings[outer[p]][0];
            let mut best: Option<(f64, usize)> = None;
            for (fi, f) in faces.iter().enumerate() {
                if f.piece != p && winding_number(&f.ring, probe) != 0 && best.is_none_or(|(a, _)| f.area < a) {
                    best = Some((f.area, fi + 1));
                }
            }
            if let Some((_, fid)) = best {
                piece_container[p] = fid;
                faces[fid - 1].holes.push(p);
                faces[fid - 1].area -= piece_footprint[p];
                face_of_cycle[outer[p]] = fid;
            }
        }
        let left_face = (0..nh).map(|h| face_of_cycle[cycle_of[h]]).collect();

        Ok(Arrangement {
            events,
            component_edges,
            edges,
            left_face,
            faces,
            piece_of_component,
            piece_count,
            piece_footprint,
            piece_container,
        })
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Bounded face containing `p`, or 0 for the unbounded face.
    pub fn face_at(&self, p: Point) -> usize {
        let mut best: Option<(f64, usize)> = None;
        for (i, f) in self.faces.iter().enumerate() {
            let a = ring_area(&f.ring);
            if winding_number(&f.ring, p) != 0 && best.is_none_or(|(b, _)| a < b) {
                best = Some((a, i + 1));
            }
        }
        best.map_or(0, |(_, i)| i)
    }

    /// Winding number of the 1-chain `Σ coeff[e]·e` around every face (index 0 = unbounded).
    ///
    /// The chain is assumed closed; crossing edge `e` from its right to its left
    /// raises the winding by `coeff[e]`.
    pub fn chain_windings(&self, coeff: &[f64]) -> Vec<f64> {
        let nf = self.faces.len() + 1;
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nf];
        for (e, &c) in coeff.iter().enumerate() {
            let (l, r) = (self.left_face[2 * e], self.left_face[2 * e + 1]);
            adj[r].push((l, c));
            adj[l].push((r, -c));
        }
        let mut w = vec![f64::NAN; nf];
        w[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(f) = queue.pop_front() {
            for &(g, c) in &adj[f] {
                if w[g].is_nan() {
                    w[g] = w[f] + c;
                    queue.push_back(g);
                }
            }
        }
        w
    }

    /// Winding numbers of the whole diagram (every edge with coefficient one).
    pub fn diagram_windings(&self) -> Vec<f64> {
        self.chain_windings(&vec![1.0; self.edges.len()])
    }

    /// A point strictly inside face `f` (1-based), away from its boundary.
    pub fn interior_point(&self, f: usize) -> Point {
        let face = &self.faces[f - 1];
        let ring = &face.ring;
        let bb = crate::geom::BBox::of(ring.iter().copied()).expect("faces have boundary");
        let inside = |p: Point| self.face_at(p) == f;
        // Scan horizontal lines and take the midpoint of the widest interior run.
        let mut best: Option<(f64, Point)> = None;
        for k in 1..24 {
            let y = bb.min.y + bb.height() * k as f64 / 24.0;
            let mut xs: Vec<f64> = Vec::new();
            let mut all_rings: Vec<&Vec<Point>> = vec![ring];
            for &h in &face.holes {
                for g in self.faces.iter().filter(|g| g.piece == h) {
                    all_rings.push(&g.ring);
                }
            }
            for r in all_rings {
                for i in 0..r.len() {
                    let (a, b) = (r[i], r[(i + 1) % r.len()]);
                    if (a.y <= y) != (b.y <= y) {
                        xs.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
                    }
                }
            }
            xs.sort_by(f64::total_cmp);
            for w in xs.windows(2) {
                let mid = Point::new(0.5 * (w[0] + w[1]), y);
                let width = w[1] - w[0];
                if best.is_none_or(|(bw, _)| width > bw) && inside(mid) {
                    best = Some((width, mid));
                }
            }
        }
        best.map_or(bb.center(), |(_, p)| p)
    }
}

fn param_point(line: &PlanarPolyline, param: f64) -> Point {
    let n = line.len();
    let seg = param.floor();
    let t = param - seg;
    let i = (seg as usize) % n;
    line.point_at(i, t)
}
