//! Unit vectors, strong unstable horocycles with their Hamenstädt metric,
//! the horocyclic measures `μ_{H^+}` and cusp excursions of horocyclic
//! averages.

mod profile;

pub use profile::{
    doubling_ratio, mean_cusp_fraction, CuspFraction, CuspMassProfile, CuspMassSummary,
    DoublingFlag, DoublingRatio, ProfileOptions,
};

use serde::Serialize;

use crate::geometry::{
    busemann, dist, visual_distance, Arc, BoundaryPoint, GeometryError, Horoball, Mobius, Point,
};
use crate::group::{classify, Classification, GroupSpec, OrbitBall};
use crate::numerics::NeumaierSum;
use crate::patterson::AtomicBoundaryMeasure;
use crate::shadows::{radial_point, HoroballIndex, PositionTag, ShadowError};

const SAME_POINT_TOL: f64 = 1e-12;
const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HoroflowError {
    #[error("a unit vector needs distinct endpoints, got {0} twice")]
    SameEndpoints(BoundaryPoint),
    #[error("vectors lie on different horocycles (centres {0} and {1}, levels {2} and {3})")]
    FrameMismatch(BoundaryPoint, BoundaryPoint, f64, f64),
    #[error("the arc contains the horocycle centre {0}")]
    CenterInArc(BoundaryPoint),
    #[error("the horoball is centred at the horocycle centre {0}")]
    CoincidentCenters(BoundaryPoint),
    #[error("horocycle level must be finite, got {0}")]
    BadLevel(f64),
    #[error("ball radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("{0} is the horocycle centre and has no vector on it")]
    AtCenter(BoundaryPoint),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
}

/// A unit tangent vector in the coordinates `(u⁻, u⁺, β_{u⁻}(π(u), o))`
/// with `o = (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnitVector {
    pub u_minus: BoundaryPoint,
    pub u_plus: BoundaryPoint,
    pub s: f64,
}

impl UnitVector {
    pub fn new(
        u_minus: BoundaryPoint,
        u_plus: BoundaryPoint,
        s: f64,
    ) -> Result<Self, HoroflowError> {
        if u_minus.approx_eq(u_plus, SAME_POINT_TOL) {
            return Err(HoroflowError::SameEndpoints(u_minus));
        }
        if !s.is_finite() {
            return Err(HoroflowError::BadLevel(s));
        }
        Ok(UnitVector { u_minus, u_plus, s })
    }

    /// The vector at `x` pointing at `u_plus`.
    pub fn at(x: Point, u_plus: BoundaryPoint) -> Self {
        let u_minus = Mobius::ray_frame(x, u_plus)
            .inverse()
            .apply_boundary(BoundaryPoint::Real(0.0));
        UnitVector {
            u_minus,
            u_plus,
            s: busemann(u_minus, x, Point::BASE),
        }
    }

    /// The vector on the geodesic `(u⁻, u⁺)` based at the foot of the
    /// perpendicular from `x`.
    pub fn nearest_to(
        x: Point,
        u_minus: BoundaryPoint,
        u_plus: BoundaryPoint,
    ) -> Result<Self, HoroflowError> {
        let v = UnitVector::new(u_minus, u_plus, 0.0)?;
        let g = Mobius::to_infinity(u_minus);
        let top = g.apply(Point::BASE).im;
        let z = g.apply(x);
        let xp = v.chart_plus();
        let foot = (z.re - xp).hypot(z.im);
        let s = (top / foot).ln();
        Ok(UnitVector { s, ..v })
    }

    fn chart_plus(&self) -> f64 {
        match Mobius::to_infinity(self.u_minus).apply_boundary(self.u_plus) {
            BoundaryPoint::Real(r) => r,
            BoundaryPoint::Infinity => unreachable!("endpoints are distinct"),
        }
    }

    /// The foot point `π(u)`.
    pub fn basepoint(&self) -> Point {
        self.frame().basepoint_at(self.chart_plus())
    }

    /// The strong unstable horocycle through `u`.
    pub fn frame(&self) -> HorocycleFrame {
        HorocycleFrame::new(self.u_minus, self.s)
    }
}

/// `g^t(u⁻, u⁺, s) = (u⁻, u⁺, s + t)`.
pub fn geodesic_flow(u: &UnitVector, t: f64) -> UnitVector {
    UnitVector { s: u.s + t, ..*u }
}

/// The horocycle `{β_c(x, o) = level}` with the isometry `g0` sending `c` to
/// infinity and the horocycle to `{Im = height}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HorocycleFrame {
    pub center: BoundaryPoint,
    pub level: f64,
    #[serde(skip)]
    pub g0: Mobius,
    pub height: f64,
}

impl HorocycleFrame {
    pub fn new(center: BoundaryPoint, level: f64) -> Self {
        let g0 = Mobius::to_infinity(center);
        let height = g0.apply(Point::BASE).im * (-level).exp();
        HorocycleFrame {
            center,
            level,
            g0,
            height,
        }
    }

    /// Abscissa of `xi` in the normalized chart.
    pub fn coordinate(&self, xi: BoundaryPoint) -> Result<f64, HoroflowError> {
        match self.g0.apply_boundary(xi) {
            BoundaryPoint::Real(r) if xi != self.center => Ok(r),
            _ => Err(HoroflowError::AtCenter(xi)),
        }
    }

    /// Point of the horocycle above chart abscissa `x`.
    pub fn basepoint_at(&self, x: f64) -> Point {
        self.g0.inverse().apply(Point::new(x, self.height))
    }

    pub fn vector_toward(&self, xi: BoundaryPoint) -> Result<UnitVector, HoroflowError> {
        self.coordinate(xi)?;
        UnitVector::new(self.center, xi, self.level)
    }

    pub fn basepoint_toward(&self, xi: BoundaryPoint) -> Result<Point, HoroflowError> {
        Ok(self.basepoint_at(self.coordinate(xi)?))
    }

    fn check(&self, u: &UnitVector) -> Result<(), HoroflowError> {
        if !u.u_minus.approx_eq(self.center, SAME_POINT_TOL) || (u.s - self.level).abs() > LEVEL_TOL
        {
            return Err(HoroflowError::FrameMismatch(
                self.center,
                u.u_minus,
                self.level,
                u.s,
            ));
        }
        Ok(())
    }

    /// Arc of endpoints `v⁺` of the Hamenstädt ball `B⁺(u, r)`.
    pub fn ball_arc(&self, u: &UnitVector, r: f64) -> Result<Arc, HoroflowError> {
        self.check(u)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(HoroflowError::BadRadius(r));
        }
        let x = self.coordinate(u.u_plus)?;
        let w = r * self.height;
        let back = self.g0.inverse();
        Ok(Arc::between(
            back.apply_boundary(BoundaryPoint::Real(x - w)),
            back.apply_boundary(BoundaryPoint::Real(x + w)),
        )?)
    }
}

/// Hamenstädt distance between two vectors of the same strong unstable
/// horocycle, read off the normalized chart as Euclidean distance over height.
pub fn hamenstadt_distance(u: &UnitVector, v: &UnitVector) -> Result<f64, HoroflowError> {
    let frame = u.frame();
    frame.check(v)?;
    Ok((frame.coordinate(u.u_plus)? - frame.coordinate(v.u_plus)?).abs() / frame.height)
}

/// `exp(½β_{u⁺}(x, π(u)) + ½β_{v⁺}(x, π(v))) · d_x(u⁺, v⁺)` for a witness
/// point `x`; agrees with [`hamenstadt_distance`] for every `x`.
pub fn hamenstadt_distance_via(
    u: &UnitVector,
    v: &UnitVector,
    x: Point,
) -> Result<f64, HoroflowError> {
    u.frame().check(v)?;
    let e = 0.5 * busemann(u.u_plus, x, u.basepoint()) + 0.5 * busemann(v.u_plus, x, v.basepoint());
    Ok(e.exp() * visual_distance(x, u.u_plus, v.u_plus))
}

/// Highest vector of a horocycle inside a horoball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HoroballIntersection {
    pub v_top: UnitVector,
    /// Depth of `π(v_top)` in the horoball.
    pub h: f64,
    /// `√(e^h − 1)`: the intersection is the closed ball `B⁺(v_top, radius)`.
    pub radius: f64,
}

pub fn horoball_ball_intersection(
    frame: &HorocycleFrame,
    horoball: &Horoball,
) -> Result<Option<HoroballIntersection>, HoroflowError> {
    if horoball.center.approx_eq(frame.center, SAME_POINT_TOL) {
        return Err(HoroflowError::CoincidentCenters(frame.center));
    }
    let v_top = frame.vector_toward(horoball.center)?;
    let h = horoball.depth(v_top.basepoint());
    if h < 0.0 {
        return Ok(None);
    }
    Ok(Some(HoroballIntersection {
        v_top,
        h,
        radius: h.exp_m1().sqrt(),
    }))
}

/// An atom seen from a horocycle: chart abscissa, `μ_{H^+}` weight and the
/// base point of the vector aimed at it.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FrameAtom {
    pub x: f64,
    pub mass: f64,
    pub basepoint: Point,
}

pub(crate) fn frame_atoms(
    frame: &HorocycleFrame,
    measure: &AtomicBoundaryMeasure,
    arc: &Arc,
    delta: f64,
) -> Result<Vec<FrameAtom>, HoroflowError> {
    if arc.contains(frame.center) || arc.is_full() {
        return Err(HoroflowError::CenterInArc(frame.center));
    }
    let o = measure.basepoint;
    let mut out = Vec::with_capacity(measure.atoms_in_arc(arc));
    for part in measure.atoms_of_arc(arc) {
        for &(theta, w) in part {
            let xi = BoundaryPoint::from_angle(theta);
            let Ok(x) = frame.coordinate(xi) else {
                continue;
            };
            let basepoint = frame.basepoint_at(x);
            out.push(FrameAtom {
                x,
                mass: w * (delta * busemann(xi, o, basepoint)).exp(),
                basepoint,
            });
        }
    }
    Ok(out)
}

/// `μ_{H^+}` mass of the vectors whose endpoints lie in `arc`:
/// `Σ w(ξ) e^{δ β_ξ(o, π(v_ξ))}` over atoms `ξ` in the arc.
pub fn mu_arc_mass(
    frame: &HorocycleFrame,
    measure: &AtomicBoundaryMeasure,
    vplus_arc: &Arc,
    delta: f64,
) -> Result<f64, HoroflowError> {
    let mut sum = NeumaierSum::new();
    for a in frame_atoms(frame, measure, vplus_arc, delta)? {
        sum.add(a.mass);
    }
    Ok(sum.value())
}

/// Vectors tangent to axes of hyperbolic group elements, with `u⁻` the
/// attracting and `u⁺` the repelling fixed point, based at the foot of the
/// perpendicular from `o`. Candidates come from the ball's cyclically reduced
/// words in ball order; a vector is kept when its base point is thick and
/// within `max_base_dist` of `o`.
pub fn thick_radial_vectors(
    spec: &GroupSpec,
    ball: &OrbitBall,
    index: &HoroballIndex,
    count: usize,
    max_base_dist: f64,
) -> Result<Vec<(String, UnitVector)>, HoroflowError> {
    let names = spec.names();
    let mut out: Vec<(String, UnitVector)> = Vec::new();
    for p in &ball.points {
        if out.len() >= count {
            break;
        }
        let Some(word) = p.gamma.word.as_ref().map(|w| w.render(&names)) else {
            continue;
        };
        let Ok(attracting) = radial_point(spec, &word) else {
            continue;
        };
        let Classification::Hyperbolic { repelling, .. } = classify(&p.gamma.m) else {
            continue;
        };
        let u = UnitVector::nearest_to(Point::BASE, attracting, repelling)?;
        let base = u.basepoint();
        if dist(Point::BASE, base) > max_base_dist
            || index.classify(base)?.tag != PositionTag::Thick
        {
            continue;
        }
        let seen = out.iter().any(|(_, v)| {
            v.u_minus.approx_eq(u.u_minus, SAME_POINT_TOL)
                && v.u_plus.approx_eq(u.u_plus, SAME_POINT_TOL)
        });
        if !seen {
            out.push((word, u));
        }
    }
    Ok(out)
}
