//! Self-contained SVG drawings in the disk chart.

use std::fmt::Write;

use crate::geometry::{Arc, BoundaryPoint, Horoball, Point};

const SIZE: f64 = 800.0;
const RADIUS: f64 = 360.0;

/// A square canvas showing the unit disk with its two axes.
#[derive(Clone, Debug)]
pub struct Canvas {
    layers: Vec<String>,
}

fn px(x: f64, y: f64) -> (f64, f64) {
    (SIZE / 2.0 + RADIUS * x, SIZE / 2.0 - RADIUS * y)
}

impl Default for Canvas {
    fn default() -> Self {
        Self::new()
    }
}

impl Canvas {
    pub fn new() -> Self {
        let c = SIZE / 2.0;
        let mut base = String::new();
        let _ = writeln!(
            base,
            r##"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##
        );
        let _ = writeln!(
            base,
            r##"<line class="axis" x1="{:.3}" y1="{c:.3}" x2="{:.3}" y2="{c:.3}" stroke="#bbbbbb" stroke-width="1"/>"##,
            c - RADIUS - 10.0,
            c + RADIUS + 10.0
        );
        let _ = writeln!(
            base,
            r##"<line class="axis" x1="{c:.3}" y1="{:.3}" x2="{c:.3}" y2="{:.3}" stroke="#bbbbbb" stroke-width="1"/>"##,
            c - RADIUS - 10.0,
            c + RADIUS + 10.0
        );
        let _ = writeln!(
            base,
            r##"<circle class="boundary" cx="{c:.3}" cy="{c:.3}" r="{RADIUS:.3}" fill="none" stroke="#000000" stroke-width="1.5"/>"##
        );
        Canvas { layers: vec![base] }
    }

    fn push(&mut self, s: String) {
        self.layers.push(s);
    }

    pub fn point(&mut self, p: Point, radius: f64, color: &str) {
        let (x, y) = p.to_disk();
        let (a, b) = px(x, y);
        self.push(format!(
            r#"<circle class="point" cx="{a:.3}" cy="{b:.3}" r="{radius:.2}" fill="{color}"/>"#
        ));
    }

    /// Horoball as a Euclidean disk tangent to the boundary.
    pub fn horoball(&mut self, h: &Horoball, color: &str) {
        let (x, y, r) = h.disk_circle();
        let (a, b) = px(x, y);
        self.push(format!(
            r#"<circle class="horoball" cx="{a:.3}" cy="{b:.3}" r="{:.3}" fill="{color}" fill-opacity="0.25" stroke="{color}" stroke-width="0.7"/>"#,
            r * RADIUS
        ));
    }

    /// Horocycle outline only.
    pub fn horocycle(&mut self, h: &Horoball, color: &str) {
        let (x, y, r) = h.disk_circle();
        let (a, b) = px(x, y);
        self.push(format!(
            r#"<circle class="horocycle" cx="{a:.3}" cy="{b:.3}" r="{:.3}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
            r * RADIUS
        ));
    }

    /// Boundary arc drawn just outside the circle, `offset` pixels out.
    pub fn arc(&mut self, arc: &Arc, offset: f64, color: &str) {
        let r = RADIUS + offset;
        let c = SIZE / 2.0;
        if arc.is_full() {
            self.push(format!(
                r#"<circle class="arc" cx="{c:.3}" cy="{c:.3}" r="{r:.3}" fill="none" stroke="{color}" stroke-width="2"/>"#
            ));
            return;
        }
        let (lo, hi) = (arc.lo(), arc.lo() + arc.len());
        let (x0, y0) = (c + r * lo.cos(), c - r * lo.sin());
        let (x1, y1) = (c + r * hi.cos(), c - r * hi.sin());
        let large = u8::from(arc.len() > std::f64::consts::PI);
        self.push(format!(
            r#"<path class="arc" d="M {x0:.3} {y0:.3} A {r:.3} {r:.3} 0 {large} 0 {x1:.3} {y1:.3}" fill="none" stroke="{color}" stroke-width="2"/>"#
        ));
    }

    /// Straight segment from the disk centre toward a boundary point.
    pub fn radius_to(&mut self, xi: BoundaryPoint, color: &str) {
        let th = xi.angle();
        let (a, b) = px(th.cos(), th.sin());
        let c = SIZE / 2.0;
        self.push(format!(
            r#"<line class="ray" x1="{c:.3}" y1="{c:.3}" x2="{a:.3}" y2="{b:.3}" stroke="{color}" stroke-width="1.2"/>"#
        ));
    }

    pub fn finish(self, title: &str, manifest_hash: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(out, "<title>{}</title>", escape(title));
        let _ = writeln!(out, "<desc>manifest {}</desc>", escape(manifest_hash));
        for l in &self.layers {
            out.push_str(l);
            if !l.ends_with('\n') {
                out.push('\n');
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
