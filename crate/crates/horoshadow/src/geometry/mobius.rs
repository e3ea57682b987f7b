use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Arc, BoundaryPoint, GeometryError, Point};

/// An element of PSL(2,R) acting by `z ↦ (az + b)/(cz + d)`.
///
/// Matrices built through [`Mobius::normalized`] have determinant 1 and a
/// positive first nonzero entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub const fn raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mobius { a, b, c, d }
    }

    /// Scales to determinant 1 and fixes the sign.
    pub fn normalized(a: f64, b: f64, c: f64, d: f64) -> Result<Self, GeometryError> {
        let det = a * d - b * c;
        if !(det.is_finite() && det > 0.0) || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NotAnIsometry { det });
        }
        let s = det.sqrt().recip();
        Ok(Mobius {
            a: a * s,
            b: b * s,
            c: c * s,
            d: d * s,
        }
        .canonical())
    }

    /// Same element with the first nonzero entry made positive.
    pub fn canonical(self) -> Self {
        let lead = [self.a, self.b, self.c, self.d]
            .into_iter()
            .find(|v| *v != 0.0)
            .unwrap_or(1.0);
        if lead < 0.0 {
            Mobius {
                a: -self.a,
                b: -self.b,
                c: -self.c,
                d: -self.d,
            }
        } else {
            self
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &Mobius) -> Mobius {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .canonical()
    }

    pub fn inverse(&self) -> Mobius {
        Mobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
        .canonical()
    }

    pub fn pow(&self, n: i64) -> Mobius {
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut k = n.unsigned_abs();
        let mut acc = Mobius::IDENTITY;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }

    /// Entrywise comparison up to sign.
    pub fn approx_eq(&self, o: &Mobius, tol: f64) -> bool {
        let p = self.entries();
        let q = o.entries();
        let same = p.iter().zip(&q).all(|(x, y)| (x - y).abs() <= tol);
        let flip = p.iter().zip(&q).all(|(x, y)| (x + y).abs() <= tol);
        same || flip
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Mobius::IDENTITY, tol)
    }

    pub fn apply(&self, z: Point) -> Point {
        let (x, y) = (z.re, z.im);
        let cr = self.c * x + self.d;
        let ci = self.c * y;
        let den = cr * cr + ci * ci;
        let nr = self.a * x + self.b;
        let ni = self.a * y;
        Point {
            re: (nr * cr + ni * ci) / den,
            im: y * self.det() / den,
        }
    }

    pub fn apply_boundary(&self, xi: BoundaryPoint) -> BoundaryPoint {
        match xi {
            BoundaryPoint::Infinity => {
                if self.c == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Real(self.a / self.c)
                }
            }
            BoundaryPoint::Real(r) => {
                let den = self.c * r + self.d;
                if den == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Real((self.a * r + self.b) / den)
                }
            }
        }
    }

    /// Image of a counterclockwise arc; orientation is preserved.
    pub fn apply_arc(&self, arc: &Arc) -> Arc {
        if arc.is_full() {
            return *arc;
        }
        let (p, q) = arc.endpoints();
        let lo = self.apply_boundary(p).angle();
        let hi = self.apply_boundary(q).angle();
        let len = (hi - lo).rem_euclid(std::f64::consts::TAU);
        Arc::new(lo, if len == 0.0 { f64::MIN_POSITIVE } else { len }).expect("finite arc")
    }

    /// `z ↦ z + tau`.
    pub fn translation(tau: f64) -> Mobius {
        Mobius {
            a: 1.0,
            b: tau,
            c: 0.0,
            d: 1.0,
        }
    }

    /// An isometry sending `xi` to infinity: `z ↦ -1/(z - r)`, or the identity.
    pub fn to_infinity(xi: BoundaryPoint) -> Mobius {
        match xi {
            BoundaryPoint::Infinity => Mobius::IDENTITY,
            BoundaryPoint::Real(r) => Mobius {
                a: 0.0,
                b: -1.0,
                c: 1.0,
                d: -r,
            },
        }
    }

    /// The affine isometry `z ↦ (z - Re x)/Im x`, sending `x` to `i` and fixing infinity.
    pub fn center_at(x: Point) -> Mobius {
        let s = x.im.sqrt();
        Mobius {
            a: 1.0 / s,
            b: -x.re / s,
            c: 0.0,
            d: s,
        }
    }

    /// An isometry sending `x` to `i` and `xi` to infinity.
    pub fn ray_frame(x: Point, xi: BoundaryPoint) -> Mobius {
        let h = Mobius::to_infinity(xi);
        Mobius::center_at(h.apply(x)).compose(&h)
    }

    /// An isometry sending `u` to 0 and `w` to infinity (`u != w`).
    pub fn axis_frame(u: BoundaryPoint, w: BoundaryPoint) -> Mobius {
        match (u, w) {
            (BoundaryPoint::Real(u), BoundaryPoint::Infinity) => Mobius::translation(-u),
            (BoundaryPoint::Infinity, BoundaryPoint::Real(w)) => Mobius {
                a: 0.0,
                b: -1.0,
                c: 1.0,
                d: -w,
            },
            (BoundaryPoint::Real(u), BoundaryPoint::Real(w)) => {
                let det = u - w;
                let s = det.abs().sqrt().recip();
                if det > 0.0 {
                    Mobius {
                        a: s,
                        b: -u * s,
                        c: s,
                        d: -w * s,
                    }
                    .canonical()
                } else {
                    Mobius {
                        a: -s,
                        b: u * s,
                        c: s,
                        d: -w * s,
                    }
                    .canonical()
                }
            }
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => Mobius::IDENTITY,
        }
    }
}

impl fmt::Display for Mobius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}
