//! SVG drawings of configurations. Horizontal edges are the a-type edges;
//! present edges are solid, absent ones dashed, and vertices are filled by
//! homogeneous cluster.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use onetwo::census::{ClusterMap, ObservationWindow};
use onetwo::lattice::{EdgeId, Sublattice};
use onetwo::{Configuration, Geometry, VertexId};

use crate::config::{parse_code, RenderConfig};

const SCALE: f64 = 24.0;
const HALF_SQRT3: f64 = 0.866_025_403_784_438_6;

/// Plane position in lattice units; `y` grows downwards as in SVG.
fn position(v: VertexId) -> (f64, f64) {
    let (x, y) = (v.x as f64, v.y as f64);
    let dx = if v.sublattice == Sublattice::Black { 1.0 } else { 0.0 };
    (1.5 * (x + y) + dx, HALF_SQRT3 * (x - y))
}

struct Crop {
    x0: i64,
    y0: i64,
    x1: i64,
    y1: i64,
}

impl Crop {
    fn new(g: &Geometry, crop: Option<[i64; 4]>) -> Result<Crop> {
        let (w, h) = (g.width() as i64, g.height() as i64);
        let [x0, y0, cw, ch] = crop.unwrap_or([0, 0, w, h]);
        if cw <= 0 || ch <= 0 {
            bail!("crop window must have positive width and height");
        }
        let c = Crop { x0: x0.max(0), y0: y0.max(0), x1: (x0 + cw).min(w), y1: (y0 + ch).min(h) };
        if c.x0 >= c.x1 || c.y0 >= c.y1 {
            bail!("crop window [{x0}, {y0}, {cw}, {ch}] misses the {w}x{h} geometry");
        }
        Ok(c)
    }

    fn contains(&self, v: VertexId) -> bool {
        (self.x0..self.x1).contains(&v.x) && (self.y0..self.y1).contains(&v.y)
    }

    fn vertex_count(&self) -> usize {
        (2 * (self.x1 - self.x0) * (self.y1 - self.y0)) as usize
    }
}

fn fill(i: usize) -> String {
    // golden-angle hue steps keep neighbouring labels apart
    let hue = (i as f64 * 137.507_764) % 360.0;
    format!("hsl({hue:.1},62%,58%)")
}

struct Canvas {
    body: String,
    min: (f64, f64),
    max: (f64, f64),
}

impl Canvas {
    fn new() -> Canvas {
        Canvas { body: String::new(), min: (f64::MAX, f64::MAX), max: (f64::MIN, f64::MIN) }
    }

    fn extend(&mut self, p: (f64, f64)) {
        self.min = (self.min.0.min(p.0), self.min.1.min(p.1));
        self.max = (self.max.0.max(p.0), self.max.1.max(p.1));
    }

    fn segment(&mut self, e: EdgeId, present: bool) {
        let (w, b) = e.endpoints();
        let (p, q) = (position(w), position(b));
        self.extend(p);
        self.extend(q);
        let class = if present { "on" } else { "off" };
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            p.0 * SCALE,
            p.1 * SCALE,
            q.0 * SCALE,
            q.1 * SCALE
        );
    }

    fn vertex(&mut self, v: VertexId, fill: &str, bad: bool) {
        let p = position(v);
        self.extend(p);
        let class = if bad { r#" class="bad""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<circle{class} cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{fill}"/>"#,
            p.0 * SCALE,
            p.1 * SCALE,
            0.24 * SCALE
        );
    }
}

/// Deterministic SVG of `cfg`. Geometries above `opts.max_vertices` inside the
/// crop window are refused.
pub fn render_svg(cfg: &Configuration, opts: &RenderConfig) -> Result<String> {
    let g = cfg.geometry();
    let crop = Crop::new(g, opts.crop)?;
    if crop.vertex_count() > opts.max_vertices {
        bail!(
            "{} vertices exceed the render limit of {}; pass a crop window such as --crop 0,0,32,32",
            crop.vertex_count(),
            opts.max_vertices
        );
    }
    let labels: Vec<Option<usize>> = if opts.clusters {
        let code = opts.code.map(parse_code).transpose()?;
        let map = ClusterMap::build(cfg, code, &ObservationWindow::whole(g), opts.adjacency);
        (0..g.vertex_count()).map(|v| map.label(v)).collect()
    } else {
        vec![None; g.vertex_count()]
    };

    let mut canvas = Canvas::new();
    for e in 0..g.edge_count() {
        let [w, b] = g.endpoints(e);
        if crop.contains(g.vertex_id(w)) || crop.contains(g.vertex_id(b)) {
            canvas.segment(g.edge_id(e), cfg.is_present(e));
        }
    }
    for s in 0..g.stub_count() {
        let id = g.stub_id(s);
        let (w, b) = id.endpoints();
        if crop.contains(w) || crop.contains(b) {
            canvas.segment(id, g.stub_value(s as u32));
        }
    }
    for v in 0..g.vertex_count() {
        let id = g.vertex_id(v);
        if !crop.contains(id) {
            continue;
        }
        let code = cfg.code_at(v);
        let shade = match labels[v] {
            Some(l) if code.is_valid() => fill(l),
            _ => "#ffffff".to_string(),
        };
        canvas.vertex(id, &shade, !code.is_valid());
    }

    let pad = 0.6;
    let (x0, y0) = ((canvas.min.0 - pad) * SCALE, (canvas.min.1 - pad) * SCALE);
    let (w, h) = ((canvas.max.0 - canvas.min.0 + 2.0 * pad) * SCALE, (canvas.max.1 - canvas.min.1 + 2.0 * pad) * SCALE);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.2} {y0:.2} {w:.2} {h:.2}" width="{w:.0}" height="{h:.0}">"#
    );
    let _ = writeln!(out, "<title>1-2 configuration, {}</title>", g.describe());
    out.push_str(
        "<style>\
         line.on{stroke:#1b1b1b;stroke-width:3;stroke-linecap:round}\
         line.off{stroke:#9a9a9a;stroke-width:1;stroke-dasharray:3 3}\
         circle{stroke:#333;stroke-width:1}\
         circle.bad{stroke:#d7191c;stroke-width:3}\
         </style>\n",
    );
    out.push_str(&canvas.body);
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use onetwo::EdgeKind;

    use super::*;

    fn torus(l: usize) -> Arc<Geometry> {
        Arc::new(Geometry::torus(l).unwrap())
    }

    #[test]
    fn edge_directions_form_a_honeycomb() {
        let w = VertexId::white(3, 5);
        let p = position(w);
        let mut angles = Vec::new();
        for k in EdgeKind::ALL {
            let q = position(w.neighbor(k));
            let (dx, dy) = (q.0 - p.0, q.1 - p.1);
            assert!(((dx * dx + dy * dy).sqrt() - 1.0).abs() < 1e-12);
            angles.push(dy.atan2(dx).to_degrees().round() as i64);
        }
        // a is horizontal; the three directions are 120 degrees apart
        assert_eq!(angles, vec![0, 120, -120]);
    }

    #[test]
    fn empty_configuration_draws_only_dashed_edges() {
        let cfg = Configuration::empty(torus(3));
        let svg = render_svg(&cfg, &RenderConfig { clusters: false, ..RenderConfig::default() }).unwrap();
        assert_eq!(svg.matches(r#"class="off""#).count(), 27);
        assert_eq!(svg.matches(r#"class="on""#).count(), 0);
    }

    #[test]
    fn all_horizontal_draws_exactly_the_horizontal_edges() {
        let cfg = Configuration::all_horizontal(torus(4));
        let svg = render_svg(&cfg, &RenderConfig::default()).unwrap();
        let on: Vec<&str> = svg.lines().filter(|l| l.contains(r#"class="on""#)).collect();
        assert_eq!(on.len(), 16);
        for line in on {
            let y: Vec<&str> = line.split('"').filter(|s| s.contains('.')).collect();
            // x1 y1 x2 y2: equal y coordinates
            assert_eq!(y[1], y[3], "{line}");
        }
    }

    #[test]
    fn output_is_deterministic() {
        let cfg = Configuration::all_horizontal(torus(5));
        let a = render_svg(&cfg, &RenderConfig::default()).unwrap();
        let b = render_svg(&cfg, &RenderConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oversized_geometry_asks_for_a_crop() {
        let cfg = Configuration::all_horizontal(torus(20));
        let opts = RenderConfig { max_vertices: 100, ..RenderConfig::default() };
        let err = render_svg(&cfg, &opts).unwrap_err().to_string();
        assert!(err.contains("--crop"), "{err}");
        let cropped = RenderConfig { crop: Some([2, 2, 5, 5]), ..opts };
        let svg = render_svg(&cfg, &cropped).unwrap();
        assert_eq!(svg.matches("<circle").count(), 50);
    }
}
