//! Hyperbolic plane in the upper half-plane model: points, boundary arcs,
//! isometries, Busemann functions, rays, shadows and horoballs.

mod geodesic;
mod horoball;
pub mod lemmas;
mod metric;
mod mobius;
mod point;
mod triangle;

pub use geodesic::{
    gromov_product, point_towards, segment_distance, segment_foot, Geodesic, Vertex,
};
pub use horoball::Horoball;
pub use lemmas::GeometryParams;
pub use metric::{
    busemann, dist, geodesic_point, hamenstadt_neighborhood_contains, point_on_ray, project_to_ray,
    ray_foot_parameter, shadow_arc, shadow_visual_radius, visual_distance,
};
pub use mobius::Mobius;
pub use point::{angle_gap, Arc, BoundaryPoint, Point};
pub use triangle::inscribed_triangle;

/// Sullivan shadow membership: the ray `[xη)` meets the ball of radius `r`
/// around `ξ_x(t)`.
pub fn sullivan_shadow_contains(
    x: Point,
    xi: BoundaryPoint,
    t: f64,
    eta: BoundaryPoint,
    r: f64,
) -> bool {
    let c = geodesic_point(x, xi, t.max(0.0));
    segment_distance(c, Vertex::Finite(x), Vertex::Ideal(eta))
        .map(|d| d <= r)
        .unwrap_or(false)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("({re}, {im}) is not a point of the upper half-plane")]
    InvalidPoint { re: f64, im: f64 },
    #[error("{0} is not a boundary point")]
    InvalidBoundaryPoint(f64),
    #[error("cannot parse boundary point {0:?}")]
    Parse(String),
    #[error("arc [{lo}, +{len}) is not a proper arc")]
    InvalidArc { lo: f64, len: f64 },
    #[error("matrix with determinant {det} is not an orientation-preserving isometry")]
    NotAnIsometry { det: f64 },
    #[error("time {0} must be finite and non-negative")]
    NegativeTime(f64),
    #[error("boundary point coincides with the ray endpoint")]
    InvalidProjection,
    #[error("vertices coincide")]
    CoincidentVertices,
    #[error("invalid horoball parameter {0}")]
    InvalidHoroball(f64),
    #[error("point lies inside the horoball")]
    InsideHoroball,
}
