//! Discrete groups acting on the hyperbolic plane: orbit enumeration,
//! critical exponents, Patterson measures, shadows of boundary measures and
//! averages along horocycles.
//!
//! ```
//! use horoshadow::geometry::{dist, Point};
//! let d = dist(Point::new(0.0, 1.0), Point::new(0.0, 2.0_f64.exp()));
//! assert!((d - 2.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod geometry;
pub mod group;
pub mod horoflow;
pub mod numerics;
pub mod patterson;
pub mod shadows;

pub mod prelude {
    pub use crate::geometry::{
        busemann, dist, point_on_ray, project_to_ray, shadow_arc, visual_distance, Arc,
        BoundaryPoint, GeometryParams, Horoball, Mobius, Point, Vertex,
    };
}
