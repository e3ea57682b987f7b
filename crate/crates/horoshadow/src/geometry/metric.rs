use super::{Arc, BoundaryPoint, GeometryError, Mobius, Point};

/// Hyperbolic distance in the upper half-plane.
pub fn dist(x: Point, y: Point) -> f64 {
    let e = (x.re - y.re).hypot(x.im - y.im);
    2.0 * (e / (2.0 * (x.im * y.im).sqrt())).asinh()
}

/// Busemann function `β_ξ(x, y) = lim d(x, z) - d(y, z)` as `z → ξ`,
/// so that `β_∞(x, y) = log(Im y / Im x)`.
pub fn busemann(xi: BoundaryPoint, x: Point, y: Point) -> f64 {
    match xi {
        BoundaryPoint::Infinity => (y.im / x.im).ln(),
        BoundaryPoint::Real(r) => {
            let dx = (x.re - r).hypot(x.im);
            let dy = (y.re - r).hypot(y.im);
            (y.im / x.im).ln() + 2.0 * (dx / dy).ln()
        }
    }
}

/// Point at signed arclength `t` on the geodesic through `x` towards `xi`.
pub fn geodesic_point(x: Point, xi: BoundaryPoint, t: f64) -> Point {
    let g = Mobius::to_infinity(xi);
    let z = g.apply(x);
    g.inverse().apply(Point::new(z.re, z.im * t.exp()))
}

/// The point `ξ_x(t)` of the unit-speed ray `[xξ)`.
pub fn point_on_ray(x: Point, xi: BoundaryPoint, t: f64) -> Result<Point, GeometryError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(GeometryError::NegativeTime(t));
    }
    Ok(geodesic_point(x, xi, t))
}

/// Signed position of the foot of the perpendicular from `eta` onto the
/// geodesic `(xξ)`, measured from `x` towards `xi`.
pub fn ray_foot_parameter(
    eta: BoundaryPoint,
    x: Point,
    xi: BoundaryPoint,
) -> Result<f64, GeometryError> {
    let g = Mobius::ray_frame(x, xi);
    match g.apply_boundary(eta) {
        BoundaryPoint::Infinity => Err(GeometryError::InvalidProjection),
        BoundaryPoint::Real(e) => Ok(if e == 0.0 {
            f64::NEG_INFINITY
        } else {
            e.abs().ln()
        }),
    }
}

/// Arclength parameter on `[xξ)` of the projection of `eta` onto the ray.
pub fn project_to_ray(
    eta: BoundaryPoint,
    x: Point,
    xi: BoundaryPoint,
) -> Result<f64, GeometryError> {
    ray_foot_parameter(eta, x, xi).map(|t| t.max(0.0))
}

/// The shadow `V(x, ξ, t)`: boundary points whose projection on `(xξ)`
/// lies strictly beyond `ξ_x(t)`.
pub fn shadow_arc(x: Point, xi: BoundaryPoint, t: f64) -> Result<Arc, GeometryError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(GeometryError::NegativeTime(t));
    }
    let gi = Mobius::ray_frame(x, xi).inverse();
    let e = t.exp();
    Arc::between(
        gi.apply_boundary(BoundaryPoint::Real(e)),
        gi.apply_boundary(BoundaryPoint::Real(-e)),
    )
}

/// Visual (Gromov) distance `d_x(ξ, η)` on the boundary.
pub fn visual_distance(x: Point, xi: BoundaryPoint, eta: BoundaryPoint) -> f64 {
    let g = Mobius::center_at(x);
    match (g.apply_boundary(xi), g.apply_boundary(eta)) {
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => 0.0,
        (BoundaryPoint::Infinity, BoundaryPoint::Real(r))
        | (BoundaryPoint::Real(r), BoundaryPoint::Infinity) => 1.0 / (1.0 + r * r).sqrt(),
        (BoundaryPoint::Real(p), BoundaryPoint::Real(q)) => {
            (p - q).abs() / ((1.0 + p * p) * (1.0 + q * q)).sqrt()
        }
    }
}

/// Visual radius of `V(x, ξ, t)`.
pub fn shadow_visual_radius(t: f64) -> f64 {
    let e = (-t).exp();
    e / (1.0 + e * e).sqrt()
}

/// Membership in the Hamenstädt neighbourhood `D(x, ξ, t)`.
pub fn hamenstadt_neighborhood_contains(
    x: Point,
    xi: BoundaryPoint,
    t: f64,
    eta: BoundaryPoint,
    alpha: f64,
) -> bool {
    if xi == eta {
        return true;
    }
    let t = t.max(0.0);
    dist(geodesic_point(x, xi, t), geodesic_point(x, eta, t)) <= alpha
}
