use serde::{Deserialize, Serialize};

use super::{busemann, BoundaryPoint, GeometryError, Mobius, Point};

/// The horoball `{y : β_center(y, o) ≤ level}` with `o` the basepoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horoball {
    pub center: BoundaryPoint,
    pub level: f64,
}

impl Horoball {
    pub fn new(center: BoundaryPoint, level: f64) -> Result<Self, GeometryError> {
        if !level.is_finite() {
            return Err(GeometryError::InvalidHoroball(level));
        }
        Ok(Horoball { center, level })
    }

    /// `{Im y ≥ height}`.
    pub fn above(height: f64) -> Result<Self, GeometryError> {
        if !(height > 0.0 && height.is_finite()) {
            return Err(GeometryError::InvalidHoroball(height));
        }
        Ok(Horoball {
            center: BoundaryPoint::Infinity,
            level: -height.ln(),
        })
    }

    /// Euclidean disk of the given diameter tangent to the real line at `r`.
    pub fn tangent_disk(r: f64, diameter: f64) -> Result<Self, GeometryError> {
        if !(diameter > 0.0 && diameter.is_finite() && r.is_finite()) {
            return Err(GeometryError::InvalidHoroball(diameter));
        }
        Ok(Horoball {
            center: BoundaryPoint::Real(r),
            level: (diameter / (1.0 + r * r)).ln(),
        })
    }

    /// The horoball through `x` centered at `center`.
    pub fn through(center: BoundaryPoint, x: Point) -> Self {
        Horoball {
            center,
            level: busemann(center, x, Point::BASE),
        }
    }

    /// Signed Busemann depth; positive strictly inside.
    pub fn depth(&self, x: Point) -> f64 {
        self.level - busemann(self.center, x, Point::BASE)
    }

    pub fn contains(&self, x: Point) -> bool {
        self.depth(x) >= 0.0
    }

    /// Shrunken horoball `H^n`: points at depth at least `n`.
    pub fn shrink(&self, n: f64) -> Horoball {
        Horoball {
            center: self.center,
            level: self.level - n,
        }
    }

    /// Image under an isometry.
    pub fn image(&self, g: &Mobius) -> Horoball {
        let c = g.apply_boundary(self.center);
        let o = Point::BASE;
        Horoball {
            center: c,
            level: self.level - busemann(c, o, g.apply(o)),
        }
    }

    /// Height for a horoball at infinity, Euclidean diameter otherwise.
    pub fn euclidean_size(&self) -> f64 {
        match self.center {
            BoundaryPoint::Infinity => (-self.level).exp(),
            BoundaryPoint::Real(r) => (1.0 + r * r) * self.level.exp(),
        }
    }

    /// Distance from the basepoint (0 when the basepoint is inside).
    pub fn distance_from_base(&self) -> f64 {
        (-self.level).max(0.0)
    }

    /// Euclidean diameter in the disk chart.
    pub fn disk_diameter(&self) -> f64 {
        2.0 / (1.0 + (-self.level).exp())
    }

    /// Euclidean center and radius in the disk chart.
    pub fn disk_circle(&self) -> (f64, f64, f64) {
        let r = self.disk_diameter() / 2.0;
        let th = self.center.angle();
        ((1.0 - r) * th.cos(), (1.0 - r) * th.sin(), r)
    }

    /// First time the ray `[xξ)` enters the horoball, if it does.
    pub fn ray_entry_time(
        &self,
        x: Point,
        xi: BoundaryPoint,
    ) -> Result<Option<f64>, GeometryError> {
        if self.depth(x) > 0.0 {
            return Err(GeometryError::InsideHoroball);
        }
        let g = Mobius::ray_frame(x, xi);
        let h = self.image(&g);
        match h.center {
            BoundaryPoint::Infinity => Ok(Some(h.euclidean_size().ln().max(0.0))),
            BoundaryPoint::Real(c) => {
                let d = h.euclidean_size();
                let disc = d * d - 4.0 * c * c;
                if disc < 0.0 {
                    return Ok(None);
                }
                let s = disc.sqrt();
                let hi = (d + s) / 2.0;
                if hi < 1.0 {
                    return Ok(None);
                }
                let lo = if d + s > 0.0 {
                    2.0 * c * c / (d + s)
                } else {
                    0.0
                };
                Ok(Some(lo.max(1.0).ln()))
            }
        }
    }
}
