use std::f64::consts::PI;

use serde::Serialize;

use super::config::{FactorDomain, GroupSpec};
use super::{canonical_exponent, GroupError};
use crate::geometry::{Arc, BoundaryPoint, Mobius};

const ARC_TOL: f64 = 1e-9;

/// Record of the ping-pong verification of a free-product spec.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PingPongCertificate {
    /// Generator name with its arcs as `(lo angle, length)`.
    pub arcs: Vec<(String, Vec<(f64, f64)>)>,
    pub checks: Vec<String>,
}

/// Distance from the basepoint to the half-plane facing a boundary arc of
/// the given length in the basepoint chart.
pub fn half_plane_distance(arc_len: f64) -> f64 {
    if arc_len >= PI {
        0.0
    } else {
        (1.0 / (arc_len / 4.0).tan()).ln()
    }
}

/// Isometric circles for `c != 0`, a strip around the basepoint for a
/// translation, annuli for `z ↦ λz + μ`.
pub(crate) fn derive_domain(m: &Mobius, order: Option<u32>) -> Result<FactorDomain, String> {
    if order.is_some() {
        return Err("finite-order generators need an explicit `domain.arc`".into());
    }
    if m.c != 0.0 {
        let r = 1.0 / m.c.abs();
        let disk = |center: f64| {
            Arc::between(
                BoundaryPoint::Real(center - r),
                BoundaryPoint::Real(center + r),
            )
            .expect("proper arc")
        };
        return Ok(FactorDomain::Infinite {
            plus: disk(m.a / m.c),
            minus: disk(-m.d / m.c),
        });
    }
    if (m.a - 1.0).abs() < 1e-12 && (m.d - 1.0).abs() < 1e-12 {
        let half = m.b.abs() / 2.0;
        let right =
            Arc::between(BoundaryPoint::Real(half), BoundaryPoint::Infinity).expect("proper arc");
        let left =
            Arc::between(BoundaryPoint::Infinity, BoundaryPoint::Real(-half)).expect("proper arc");
        return Ok(if m.b > 0.0 {
            FactorDomain::Infinite {
                plus: right,
                minus: left,
            }
        } else {
            FactorDomain::Infinite {
                plus: left,
                minus: right,
            }
        });
    }
    if (m.a.abs() - m.d.abs()).abs() > 1e-12 {
        // z ↦ λz + μ: round annuli about the finite fixed point, with the
        // basepoint on the middle circle.
        let lambda = (m.a / m.d).abs();
        let f = m.b / (m.d - m.a);
        let rho = f.hypot(1.0);
        let inside = |r: f64| {
            Arc::between(BoundaryPoint::Real(f - r), BoundaryPoint::Real(f + r))
                .expect("proper arc")
        };
        let outside = |r: f64| {
            Arc::between(BoundaryPoint::Real(f + r), BoundaryPoint::Real(f - r))
                .expect("proper arc")
        };
        let k = lambda.sqrt();
        return Ok(if lambda > 1.0 {
            FactorDomain::Infinite {
                plus: outside(rho * k),
                minus: inside(rho / k),
            }
        } else {
            FactorDomain::Infinite {
                plus: inside(rho * k),
                minus: outside(rho / k),
            }
        });
    }
    Err("cannot derive a ping-pong domain; give `domain.plus` and `domain.minus`".into())
}

fn domain_arcs(d: &FactorDomain) -> Vec<Arc> {
    match d {
        FactorDomain::Finite(a) => vec![*a],
        FactorDomain::Infinite { plus, minus } => vec![*plus, *minus],
    }
}

/// Verifies the ping-pong configuration of a free-product spec: disjoint
/// arc interiors across factors, each factor's nontrivial powers mapping the
/// outside of its region into it, and the basepoint outside every open
/// half-plane.
pub fn ping_pong_check(spec: &GroupSpec) -> Result<PingPongCertificate, GroupError> {
    let fail = |a: &str, b: &str, reason: String| GroupError::PingPong {
        first: a.to_string(),
        second: b.to_string(),
        reason,
    };
    let mut checks = Vec::new();
    let mut arcs = Vec::new();
    let frame = Mobius::center_at(spec.basepoint);
    for g in &spec.generators {
        let Some(dom) = &g.domain else {
            return Err(fail(&g.name, &g.name, "missing domain".into()));
        };
        let list = domain_arcs(dom);
        arcs.push((
            g.name.clone(),
            list.iter().map(|a| (a.lo(), a.len())).collect(),
        ));
        for a in &list {
            if frame.apply_arc(a).len() > PI + ARC_TOL {
                return Err(fail(
                    &g.name,
                    "basepoint",
                    "basepoint lies inside the open half-plane".into(),
                ));
            }
        }
        match dom {
            FactorDomain::Finite(j) => {
                let n = g.order.expect("finite domain implies order");
                let outside = j
                    .complement()
                    .ok_or_else(|| fail(&g.name, &g.name, "full arc".into()))?;
                for k in 1..n as i64 {
                    let img = g.m.pow(k).apply_arc(&outside);
                    if !j.contains_arc(&img, ARC_TOL) {
                        return Err(fail(
                            &g.name,
                            &g.name,
                            format!("power {k} does not map the outside into the arc"),
                        ));
                    }
                }
                checks.push(format!(
                    "{}: powers 1..{} map outside into arc",
                    g.name,
                    n - 1
                ));
            }
            FactorDomain::Infinite { plus, minus } => {
                if !plus.interiors_disjoint(minus, ARC_TOL) {
                    return Err(fail(&g.name, &g.name, "plus and minus arcs overlap".into()));
                }
                let out_minus = minus.complement().expect("proper arc");
                let out_plus = plus.complement().expect("proper arc");
                if !plus.contains_arc(&g.m.apply_arc(&out_minus), ARC_TOL) {
                    return Err(fail(
                        &g.name,
                        &g.name,
                        "g does not map outside(minus) into plus".into(),
                    ));
                }
                if !minus.contains_arc(&g.m.inverse().apply_arc(&out_plus), ARC_TOL) {
                    return Err(fail(
                        &g.name,
                        &g.name,
                        "g^-1 does not map outside(plus) into minus".into(),
                    ));
                }
                checks.push(format!(
                    "{}: g(outside minus) in plus, g^-1(outside plus) in minus",
                    g.name
                ));
            }
        }
    }
    for (i, g) in spec.generators.iter().enumerate() {
        for h in &spec.generators[i + 1..] {
            for a in domain_arcs(g.domain.as_ref().unwrap()) {
                for b in domain_arcs(h.domain.as_ref().unwrap()) {
                    if !a.interiors_disjoint(&b, ARC_TOL) {
                        return Err(fail(&g.name, &h.name, "domains overlap".into()));
                    }
                }
            }
            checks.push(format!("{} and {}: disjoint domains", g.name, h.name));
        }
    }
    Ok(PingPongCertificate { arcs, checks })
}

/// Canonical exponents of a finite factor of order `n`.
pub(crate) fn finite_exponents(n: u32) -> Vec<i32> {
    let mut v: Vec<i32> = (1..n as i32).map(|k| canonical_exponent(k, n)).collect();
    v.sort_by_key(|k| (k.abs(), -k.signum()));
    v
}
