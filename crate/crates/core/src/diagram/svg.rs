//! SVG rendering of a diagram.
//!
//! Each component is one closed path.  At a crossing the over strand is drawn
//! again on top of a background-colored halo, which opens a gap of
//! [`UNDER_GAP_PX`] pixels on either side of it in the under strand.

use std::fmt::Write as _;

use super::SliceDiagram;
use crate::geom::Point;

pub const UNDER_GAP_PX: f64 = 3.0;

#[derive(Clone, Debug)]
pub struct SvgOptions {
    /// Width and height of the square canvas.
    pub size: f64,
    pub margin: f64,
    pub stroke_width: f64,
    pub label_regions: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { size: 640.0, margin: 24.0, stroke_width: 1.5, label_regions: true }
    }
}

const COLORS: [&str; 6] = ["#1f4e79", "#a33b20", "#2e7d32", "#6a1b9a", "#b26a00", "#00695c"];

struct View {
    scale: f64,
    ox: f64,
    oy: f64,
}

impl View {
    fn px(&self, p: Point) -> (f64, f64) {
        (self.ox + self.scale * p.x, self.oy - self.scale * p.y)
    }
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn label(area: f64) -> String {
    let s = format!("{area:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn render_svg(d: &SliceDiagram, options: &SvgOptions) -> String {
    let size = options.size;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = fmt(size)
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let Some(bb) = d.bbox() else {
        out.push_str("</svg>\n");
        return out;
    };
    let span = bb.width().max(bb.height()).max(f64::MIN_POSITIVE);
    let scale = (size - 2.0 * options.margin) / span;
    let c = bb.center();
    let view = View { scale, ox: 0.5 * size - scale * c.x, oy: 0.5 * size + scale * c.y };

    for (i, line) in d.components().iter().enumerate() {
        let mut path = String::new();
        for (k, p) in line.vertices.iter().enumerate() {
            let (x, y) = view.px(*p);
            let _ = write!(path, "{}{} {} ", if k == 0 { "M" } else { "L" }, fmt(x), fmt(y));
        }
        if line.closed {
            path.push('Z');
        }
        let _ = writeln!(
            out,
            r#"<path class="component" data-component="{i}" d="{}" fill="none" stroke="{}" stroke-width="{}" stroke-linejoin="round"/>"#,
            path.trim_end(),
            COLORS[i % COLORS.len()],
            fmt(options.stroke_width)
        );
    }

    // Over strands, redrawn over a halo that cuts the under strand.
    let reach = 4.0 * (UNDER_GAP_PX + options.stroke_width);
    for (j, x) in d.crossings().iter().enumerate() {
        let over = x.over();
        let line = &d.components()[over.component];
        let dir = line.direction(over.segment());
        let n = dir.norm().max(f64::MIN_POSITIVE);
        let half = reach / scale / n;
        let (a, b) = (x.point - dir * half, x.point + dir * half);
        let ((ax, ay), (bx, by)) = (view.px(a), view.px(b));
        let seg = format!("M{} {} L{} {}", fmt(ax), fmt(ay), fmt(bx), fmt(by));
        let _ = writeln!(
            out,
            r#"<path class="gap" data-crossing="{j}" d="{seg}" stroke="white" stroke-width="{}" stroke-linecap="butt"/>"#,
            fmt(options.stroke_width + 2.0 * UNDER_GAP_PX)
        );
        let _ = writeln!(
            out,
            r#"<path class="over" data-crossing="{j}" d="{seg}" stroke="{}" stroke-width="{}" stroke-linecap="round"/>"#,
            COLORS[over.component % COLORS.len()],
            fmt(options.stroke_width)
        );
    }

    if options.label_regions {
        let arr = d.arrangement();
        for f in 1..=arr.face_count() {
            let (x, y) = view.px(arr.interior_point(f));
            let _ = writeln!(
                out,
                r#"<text class="area" data-region="{f}" x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
                fmt(x),
                fmt(y),
                label(d.region_areas()[f - 1])
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{parse_catalog, realize_catalog};

    #[test]
    fn figure_eight() {
        let d = realize_catalog(&parse_catalog("8+(1)").unwrap()).unwrap();
        let svg = render_svg(&d, &SvgOptions::default());
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches(r#"class="component""#).count(), 1);
        assert!(svg.contains("Z\" fill=\"none\""));
        assert_eq!(svg.matches(r#"class="gap""#).count(), 1);
        assert!(svg.contains(r#"stroke-width="7.5""#));
        assert_eq!(svg.matches(r#"class="area""#).count(), 2);
        assert!(svg.contains(">1</text>"));
    }

    #[test]
    fn empty_diagram() {
        let svg = render_svg(&SliceDiagram::empty(), &SvgOptions::default());
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("<path"));
    }
}
