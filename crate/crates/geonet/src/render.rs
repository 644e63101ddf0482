//! Deterministic SVG rendering of planar nets: edges as lines with width
//! encoding multiplicity, boundary vertices circled.

use crate::error::{GeonetError, Result};
use crate::netcore::{PlanarNet, VertexKind};

#[derive(Clone, Debug)]
pub struct RenderStyle {
    /// Canvas width and height in pixels.
    pub canvas: f64,
    /// Stroke width for a multiplicity-one edge, in canvas pixels.
    pub stroke_base: f64,
    /// Extra stroke width per additional multiplicity unit.
    pub stroke_per_mult: f64,
    /// Radius of the boundary-vertex marker in canvas pixels.
    pub boundary_marker: f64,
    /// Radius of interior-vertex dots (0 disables them).
    pub interior_dot: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            canvas: 800.0,
            stroke_base: 1.2,
            stroke_per_mult: 0.8,
            boundary_marker: 6.0,
            interior_dot: 0.0,
        }
    }
}

fn fmt(v: f64) -> String {
    // fixed-point with six decimals keeps output byte-identical across runs
    format!("{v:.6}")
}

/// Render a net to an SVG document. The viewBox is fitted to the vertex
/// bounding box with a five percent margin.
pub fn render_svg(net: &PlanarNet, style: &RenderStyle) -> Result<String> {
    if net.vertices().is_empty() {
        return Err(GeonetError::Precondition("cannot render an empty net".into()));
    }
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for v in net.vertices() {
        let (x, y) = v.pos.to_f64();
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let w = (max_x - min_x).max(1e-9);
    let h = (max_y - min_y).max(1e-9);
    let margin = 0.05 * w.max(h);
    let span = w.max(h) + 2.0 * margin;
    let scale = style.canvas / span;
    let ox = min_x - margin - (span - w - 2.0 * margin) / 2.0;
    let oy = min_y - margin - (span - h - 2.0 * margin) / 2.0;
    // canvas coordinates with the y axis flipped
    let tx = |x: f64| (x - ox) * scale;
    let ty = |y: f64| style.canvas - (y - oy) * scale;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
        fmt(style.canvas)
    ));
    out.push_str(&format!(
        "<rect width=\"{0}\" height=\"{0}\" fill=\"white\"/>\n",
        fmt(style.canvas)
    ));
    for e in net.edges() {
        let (va, vb) = net.edge_endpoints(e);
        let (x1, y1) = va.pos.to_f64();
        let (x2, y2) = vb.pos.to_f64();
        let width = style.stroke_base + style.stroke_per_mult * (e.mult.saturating_sub(1)) as f64;
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"{}\"/>\n",
            fmt(tx(x1)),
            fmt(ty(y1)),
            fmt(tx(x2)),
            fmt(ty(y2)),
            fmt(width)
        ));
    }
    for v in net.vertices() {
        let (x, y) = v.pos.to_f64();
        match v.kind {
            VertexKind::Boundary => {
                out.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
                    fmt(tx(x)),
                    fmt(ty(y)),
                    fmt(style.boundary_marker)
                ));
            }
            VertexKind::Interior => {
                if style.interior_dot > 0.0 {
                    out.push_str(&format!(
                        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"black\"/>\n",
                        fmt(tx(x)),
                        fmt(ty(y)),
                        fmt(style.interior_dot)
                    ));
                }
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigreal::Ctx;
    use crate::geometry::Point;

    #[test]
    fn single_segment_renders_one_line() {
        let c = Ctx::new(30);
        let mut net = PlanarNet::new(c);
        net.add_vertex("a", Point::new(c.int(0), c.int(0)), VertexKind::Boundary).unwrap();
        net.add_vertex("b", Point::new(c.int(1), c.int(1)), VertexKind::Boundary).unwrap();
        net.add_edge("a", "b", 1).unwrap();
        let svg = render_svg(&net, &RenderStyle::default()).unwrap();
        assert_eq!(svg.matches("<line").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn rendering_is_deterministic() {
        let c = Ctx::new(30);
        let net = crate::constructions::build_y_net_equilateral(c);
        let a = render_svg(&net, &RenderStyle::default()).unwrap();
        let b = render_svg(&net, &RenderStyle::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_net_rejected() {
        let net = PlanarNet::new(Ctx::new(30));
        assert!(render_svg(&net, &RenderStyle::default()).is_err());
    }
}
