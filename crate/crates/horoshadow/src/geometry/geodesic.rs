use super::{busemann, dist, BoundaryPoint, GeometryError, Mobius, Point};

/// A triangle vertex: inside the plane or on its boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Vertex {
    Finite(Point),
    Ideal(BoundaryPoint),
}

impl From<Point> for Vertex {
    fn from(p: Point) -> Self {
        Vertex::Finite(p)
    }
}

impl From<BoundaryPoint> for Vertex {
    fn from(p: BoundaryPoint) -> Self {
        Vertex::Ideal(p)
    }
}

/// An oriented complete geodesic with an arclength chart: `point_at(s)`
/// moves towards `to` as `s` grows.
#[derive(Clone, Copy, Debug)]
pub struct Geodesic {
    pub from: BoundaryPoint,
    pub to: BoundaryPoint,
    frame: Mobius,
}

impl Geodesic {
    pub fn new(from: BoundaryPoint, to: BoundaryPoint) -> Result<Self, GeometryError> {
        if from == to {
            return Err(GeometryError::CoincidentVertices);
        }
        Ok(Geodesic {
            from,
            to,
            frame: Mobius::axis_frame(from, to),
        })
    }

    /// The geodesic through `p` and `q`, oriented from `p` to `q`.
    pub fn through(p: Vertex, q: Vertex) -> Result<Self, GeometryError> {
        match (p, q) {
            (Vertex::Ideal(u), Vertex::Ideal(w)) => Geodesic::new(u, w),
            (Vertex::Finite(x), Vertex::Ideal(xi)) => {
                let back = Mobius::ray_frame(x, xi)
                    .inverse()
                    .apply_boundary(BoundaryPoint::Real(0.0));
                Geodesic::new(back, xi)
            }
            (Vertex::Ideal(xi), Vertex::Finite(x)) => {
                let g = Geodesic::through(Vertex::Finite(x), Vertex::Ideal(xi))?;
                Geodesic::new(g.to, g.from)
            }
            (Vertex::Finite(x), Vertex::Finite(y)) => {
                if dist(x, y) == 0.0 {
                    return Err(GeometryError::CoincidentVertices);
                }
                Geodesic::through(Vertex::Finite(x), Vertex::Ideal(forward_endpoint(x, y)))
            }
        }
    }

    pub fn frame(&self) -> &Mobius {
        &self.frame
    }

    /// Arclength coordinate of the foot of the perpendicular from `z`.
    pub fn param(&self, z: Point) -> f64 {
        let w = self.frame.apply(z);
        w.re.hypot(w.im).ln()
    }

    /// Coordinate of the foot of the perpendicular from a boundary point;
    /// `±∞` at the endpoints.
    pub fn boundary_param(&self, eta: BoundaryPoint) -> f64 {
        match self.frame.apply_boundary(eta) {
            BoundaryPoint::Infinity => f64::INFINITY,
            BoundaryPoint::Real(e) => e.abs().ln(),
        }
    }

    pub fn vertex_param(&self, v: Vertex) -> f64 {
        match v {
            Vertex::Finite(z) => self.param(z),
            Vertex::Ideal(e) => self.boundary_param(e),
        }
    }

    pub fn point_at(&self, s: f64) -> Point {
        self.frame.inverse().apply(Point::new(0.0, s.exp()))
    }

    /// Distance from `z` to the whole geodesic.
    pub fn distance(&self, z: Point) -> f64 {
        let w = self.frame.apply(z);
        (w.re.abs() / w.im).asinh()
    }
}

/// Endpoint reached by continuing the geodesic from `x` through `y`.
fn forward_endpoint(x: Point, y: Point) -> BoundaryPoint {
    let a = Mobius::center_at(x);
    let w = a.apply(y);
    let local = if w.re == 0.0 {
        if w.im > 1.0 {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Real(0.0)
        }
    } else {
        let c = (w.re * w.re + w.im * w.im - 1.0) / (2.0 * w.re);
        let r = (1.0 + c * c).sqrt();
        let e = if w.re > 0.0 {
            if c >= 0.0 {
                c + r
            } else {
                1.0 / (r - c)
            }
        } else if c <= 0.0 {
            c - r
        } else {
            -1.0 / (r + c)
        };
        BoundaryPoint::Real(e)
    };
    a.inverse().apply_boundary(local)
}

/// Projection of a vertex onto the segment `[p q]` (clamped to it).
pub fn segment_foot(a: Vertex, p: Vertex, q: Vertex) -> Result<Point, GeometryError> {
    let g = Geodesic::through(p, q)?;
    let sp = g.vertex_param(p);
    let sq = g.vertex_param(q);
    let sa = g.vertex_param(a);
    if sa.is_infinite() {
        return Err(GeometryError::InvalidProjection);
    }
    Ok(g.point_at(sa.clamp(sp.min(sq), sp.max(sq))))
}

/// `d(a, [p q])`.
pub fn segment_distance(a: Point, p: Vertex, q: Vertex) -> Result<f64, GeometryError> {
    segment_foot(Vertex::Finite(a), p, q).map(|f| dist(a, f))
}

/// Gromov product `(u|w)_v` at a finite point, extended to ideal `u`, `w`.
pub fn gromov_product(v: Point, u: Vertex, w: Vertex) -> Result<f64, GeometryError> {
    Ok(match (u, w) {
        (Vertex::Finite(u), Vertex::Finite(w)) => 0.5 * (dist(v, u) + dist(v, w) - dist(u, w)),
        (Vertex::Ideal(xi), Vertex::Finite(w)) | (Vertex::Finite(w), Vertex::Ideal(xi)) => {
            0.5 * (dist(v, w) + busemann(xi, v, w))
        }
        (Vertex::Ideal(xi), Vertex::Ideal(eta)) => {
            let y = Geodesic::new(xi, eta)?.point_at(0.0);
            0.5 * (busemann(xi, v, y) + busemann(eta, v, y))
        }
    })
}

/// Point at distance `s` from `x` towards `v`.
pub fn point_towards(x: Point, v: Vertex, s: f64) -> Result<Point, GeometryError> {
    let g = Geodesic::through(Vertex::Finite(x), v)?;
    Ok(g.point_at(g.param(x) + s))
}
