use serde::Serialize;

use super::{PositionClass, PositionTag, ShadowError};
use crate::geometry::{dist, Horoball, Point};
use crate::group::{coset_reps_mod_parabolic, GroupSpec, Isometry, OrbitBall};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexedHoroball {
    pub horoball: Horoball,
    /// Coset representative carrying the cusp horoball here.
    #[serde(skip)]
    pub gamma: Isometry,
    pub diameter: f64,
}

/// Dyadic diameter class, sorted by tangency angle.
#[derive(Clone, Debug)]
struct Bucket {
    max_diameter: f64,
    /// Half-width of the angular window a member can cover.
    reach: f64,
    /// `(angle, index)`.
    members: Vec<(f64, usize)>,
}

/// Γ-images of the cusp horoball down to a certified diameter.
#[derive(Clone, Debug)]
pub struct HoroballIndex {
    pub horoballs: Vec<IndexedHoroball>,
    /// Every horoball of at least this disk diameter is listed.
    pub complete_above: f64,
    buckets: Vec<Bucket>,
}

const LEVELS: usize = 60;

impl HoroballIndex {
    /// Index over the given horoballs, declared complete above `complete_above`.
    pub fn new(mut horoballs: Vec<IndexedHoroball>, complete_above: f64) -> Self {
        horoballs.sort_by(|a, b| {
            b.diameter.total_cmp(&a.diameter).then(
                a.horoball
                    .center
                    .angle()
                    .total_cmp(&b.horoball.center.angle()),
            )
        });
        let mut buckets: Vec<Bucket> = (0..LEVELS)
            .map(|l| {
                let max_diameter = if l == 0 { 2.0 } else { 0.5f64.powi(l as i32) };
                let reach = if l == 0 {
                    std::f64::consts::PI
                } else {
                    ((max_diameter / 2.0) / (1.0 - max_diameter / 2.0)).asin()
                };
                Bucket {
                    max_diameter,
                    reach,
                    members: Vec::new(),
                }
            })
            .collect();
        for (i, h) in horoballs.iter().enumerate() {
            let l = if h.diameter > 0.5 {
                0
            } else {
                ((-h.diameter.log2()).floor() as usize).min(LEVELS - 1)
            };
            buckets[l].members.push((h.horoball.center.angle(), i));
        }
        for b in &mut buckets {
            b.members
                .sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        }
        buckets.retain(|b| !b.members.is_empty());
        HoroballIndex {
            horoballs,
            complete_above,
            buckets,
        }
    }

    /// Images `γH` of the config's cusp horoball over coset representatives in
    /// the ball, keeping those of disk diameter at least `min_diameter`
    /// whose listing the ball radius certifies.
    pub fn from_ball(
        spec: &GroupSpec,
        ball: &OrbitBall,
        min_diameter: f64,
    ) -> Result<Self, ShadowError> {
        let o = Point::BASE;
        if spec.basepoint != o {
            return Err(ShadowError::UnsupportedBasepoint(spec.basepoint));
        }
        let cusp = spec.cusp.as_ref().ok_or(ShadowError::NoCusp)?;
        let mark = &spec.parabolic_marks[cusp.mark];
        let gap = cusp.horoball.distance_from_base();
        if gap <= 0.0 {
            return Err(ShadowError::BasepointInCusp);
        }
        // A horoball at distance d has a coset representative within
        // d - gap + (half a parabolic period on the horocycle through o).
        let period = 2.0 * (dist(o, mark.m.apply(o)) / 2.0).sinh();
        let slack = 2.0 * (period / 4.0).asinh();
        let certified = ball.radius + gap - slack;
        let certified_diameter = 2.0 / (1.0 + certified.exp());
        let complete_above = certified_diameter.max(min_diameter);
        let reps = coset_reps_mod_parabolic(ball, &mark.m)?;
        let horoballs = reps
            .into_iter()
            .filter_map(|r| {
                let horoball = r.gamma.apply_horoball(&cusp.horoball);
                let diameter = horoball.disk_diameter();
                (diameter >= complete_above).then_some(IndexedHoroball {
                    horoball,
                    gamma: r.gamma,
                    diameter,
                })
            })
            .collect();
        Ok(HoroballIndex::new(horoballs, complete_above))
    }

    pub fn len(&self) -> usize {
        self.horoballs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.horoballs.is_empty()
    }

    /// Indices of listed horoballs strictly containing `x`.
    pub fn containing(&self, x: Point) -> Vec<usize> {
        let (dx, dy) = x.to_disk();
        let gap = 1.0 - dx.hypot(dy);
        let theta = dy.atan2(dx).rem_euclid(std::f64::consts::TAU);
        let mut hits = Vec::new();
        for b in &self.buckets {
            if b.max_diameter < gap {
                break;
            }
            let inside = |i: usize| self.horoballs[i].horoball.depth(x) > 0.0;
            if b.reach >= std::f64::consts::PI {
                hits.extend(b.members.iter().map(|m| m.1).filter(|&i| inside(i)));
                continue;
            }
            let tau = std::f64::consts::TAU;
            let mut scan = |lo: f64, hi: f64| {
                let start = b.members.partition_point(|m| m.0 < lo);
                for m in &b.members[start..] {
                    if m.0 > hi {
                        break;
                    }
                    if inside(m.1) {
                        hits.push(m.1);
                    }
                }
            };
            let (lo, hi) = (theta - b.reach, theta + b.reach);
            scan(lo.max(0.0), hi.min(tau));
            if lo < 0.0 {
                scan(lo + tau, tau);
            }
            if hi > tau {
                scan(0.0, hi - tau);
            }
        }
        hits.sort_unstable();
        hits.dedup();
        hits
    }

    /// Thick, inside one listed horoball, or unresolved near the boundary.
    pub fn classify(&self, x: Point) -> Result<PositionClass, ShadowError> {
        let hits = self.containing(x);
        match hits.as_slice() {
            [] => {
                let (dx, dy) = x.to_disk();
                let tag = if 1.0 - dx.hypot(dy) < self.complete_above {
                    PositionTag::Unresolved
                } else {
                    PositionTag::Thick
                };
                Ok(PositionClass { tag, depth: 0.0 })
            }
            [i] => Ok(PositionClass {
                tag: PositionTag::Cusp(*i),
                depth: self.horoballs[*i].horoball.depth(x),
            }),
            [i, j, ..] => Err(ShadowError::OverlappingHoroballs {
                x,
                first: *i,
                second: *j,
            }),
        }
    }
}
