use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GeometryError;

/// A point of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub re: f64,
    pub im: f64,
}

impl Point {
    /// The basepoint `(0, 1)`, center of the disk chart.
    pub const BASE: Point = Point { re: 0.0, im: 1.0 };

    pub fn new(re: f64, im: f64) -> Self {
        debug_assert!(
            re.is_finite() && im.is_finite() && im > 0.0,
            "({re}, {im}) is not in H2"
        );
        Point { re, im }
    }

    pub fn try_new(re: f64, im: f64) -> Result<Self, GeometryError> {
        if re.is_finite() && im.is_finite() && im > 0.0 {
            Ok(Point { re, im })
        } else {
            Err(GeometryError::InvalidPoint { re, im })
        }
    }

    /// Euclidean coordinates in the disk chart `w = (z - i)/(z + i)`.
    pub fn to_disk(self) -> (f64, f64) {
        let (x, y) = (self.re, self.im);
        let den = x * x + (y + 1.0) * (y + 1.0);
        ((x * x + y * y - 1.0) / den, -2.0 * x / den)
    }

    /// Endpoint of the ray from the basepoint through `self`. The basepoint
    /// itself is sent to infinity (angle 0).
    pub fn radial_direction(self) -> BoundaryPoint {
        let (x, y) = (self.re, self.im);
        let a = x * x + y * y - 1.0;
        if x == 0.0 {
            return if a < 0.0 {
                BoundaryPoint::Real(0.0)
            } else {
                BoundaryPoint::Infinity
            };
        }
        let rho = a.hypot(2.0 * x);
        let r = if a >= 0.0 {
            (rho + a) / (2.0 * x)
        } else {
            2.0 * x / (rho - a)
        };
        BoundaryPoint::Real(r)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.re, self.im)
    }
}

/// A point of the boundary `R ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryPoint {
    Real(f64),
    Infinity,
}

impl BoundaryPoint {
    /// Angle in the disk chart, in `[0, 2π)`. Infinity sits at 0, `-1` at
    /// `π/2`, `0` at `π` and `1` at `3π/2`.
    pub fn angle(self) -> f64 {
        match self {
            BoundaryPoint::Infinity => 0.0,
            BoundaryPoint::Real(r) => {
                let a = PI + 2.0 * r.atan();
                if a >= TAU {
                    0.0
                } else {
                    a
                }
            }
        }
    }

    pub fn from_angle(theta: f64) -> Self {
        let t = theta.rem_euclid(TAU);
        if t == 0.0 {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Real(((t - PI) / 2.0).tan())
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }

    pub fn try_real(r: f64) -> Result<Self, GeometryError> {
        if r.is_finite() {
            Ok(BoundaryPoint::Real(r))
        } else {
            Err(GeometryError::InvalidBoundaryPoint(r))
        }
    }

    /// Equality up to `tol` in the disk chart.
    pub fn approx_eq(self, other: BoundaryPoint, tol: f64) -> bool {
        angle_gap(self.angle(), other.angle()) <= tol
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Infinity => write!(f, "inf"),
            BoundaryPoint::Real(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BoundaryRepr {
    Num(f64),
    Text(String),
}

impl Serialize for BoundaryPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BoundaryPoint::Infinity => BoundaryRepr::Text("inf".into()).serialize(s),
            BoundaryPoint::Real(r) => BoundaryRepr::Num(*r).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for BoundaryPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match BoundaryRepr::deserialize(d)? {
            BoundaryRepr::Num(r) => Ok(BoundaryPoint::Real(r)),
            BoundaryRepr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for BoundaryPoint {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(BoundaryPoint::Infinity),
            t => {
                let r: f64 = t.parse().map_err(|_| GeometryError::Parse(t.to_string()))?;
                BoundaryPoint::try_real(r)
            }
        }
    }
}

/// Unsigned angular separation on the circle, in `[0, π]`.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// A boundary arc `[lo, lo + len)` in the disk-angle chart, counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    lo: f64,
    len: f64,
}

impl Arc {
    pub fn new(lo: f64, len: f64) -> Result<Self, GeometryError> {
        if !(lo.is_finite() && len > 0.0 && len <= TAU) {
            return Err(GeometryError::InvalidArc { lo, len });
        }
        Ok(Arc {
            lo: lo.rem_euclid(TAU),
            len,
        })
    }

    pub fn full() -> Self {
        Arc { lo: 0.0, len: TAU }
    }

    /// Counterclockwise arc from `from` to `to`.
    pub fn between(from: BoundaryPoint, to: BoundaryPoint) -> Result<Self, GeometryError> {
        let lo = from.angle();
        let len = (to.angle() - lo).rem_euclid(TAU);
        Arc::new(lo, len)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        (self.lo + self.len).rem_euclid(TAU)
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn is_full(&self) -> bool {
        self.len >= TAU
    }

    pub fn endpoints(&self) -> (BoundaryPoint, BoundaryPoint) {
        (
            BoundaryPoint::from_angle(self.lo),
            BoundaryPoint::from_angle(self.lo + self.len),
        )
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        (theta - self.lo).rem_euclid(TAU) < self.len
    }

    pub fn contains(&self, xi: BoundaryPoint) -> bool {
        self.contains_angle(xi.angle())
    }

    /// Closed containment with slack `tol`.
    pub fn contains_angle_closed(&self, theta: f64, tol: f64) -> bool {
        let off = (theta - self.lo).rem_euclid(TAU);
        off <= self.len + tol || off >= TAU - tol
    }

    /// Whether `other` lies inside the closure of `self`, up to `tol`.
    pub fn contains_arc(&self, other: &Arc, tol: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let mut off = (other.lo - self.lo).rem_euclid(TAU);
        if off > TAU - tol {
            off -= TAU;
        }
        off >= -tol && off + other.len <= self.len + tol
    }

    /// The closure of the complement, as an arc.
    pub fn complement(&self) -> Option<Arc> {
        if self.is_full() {
            None
        } else {
            Some(Arc {
                lo: self.hi(),
                len: TAU - self.len,
            })
        }
    }

    /// Whether the open arcs are disjoint, up to `tol`.
    pub fn interiors_disjoint(&self, other: &Arc, tol: f64) -> bool {
        match self.complement() {
            Some(c) => c.contains_arc(other, tol),
            None => false,
        }
    }

    /// Splits the circle into `n` equal half-open arcs starting at angle 0.
    pub fn partition(n: usize) -> Vec<Arc> {
        let w = TAU / n as f64;
        let cut = |k: usize| if k == n { TAU } else { k as f64 * w };
        (0..n)
            .map(|k| Arc {
                lo: cut(k),
                len: cut(k + 1) - cut(k),
            })
            .collect()
    }
}
