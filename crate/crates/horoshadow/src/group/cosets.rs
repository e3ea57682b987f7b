use std::collections::BTreeMap;

use super::{classify, Classification, GroupError, Isometry, OrbitBall};
use crate::geometry::{BoundaryPoint, Mobius};

/// Chosen representative of a coset γΠ meeting an orbit ball.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetRep {
    pub gamma: Isometry,
    pub dist: f64,
    /// γξ, where ξ is the fixed point of the parabolic generator.
    pub cusp_point: BoundaryPoint,
    /// Ball elements falling in this coset.
    pub members: usize,
}

const CUSP_TOL: f64 = 1e-12;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// One representative per coset of ⟨pi_gen⟩ that meets the ball: the
/// element of least orbit distance, ties broken by shortlex word. Sorted
/// the same way.
pub fn coset_reps_mod_parabolic(
    ball: &OrbitBall,
    pi_gen: &Mobius,
) -> Result<Vec<CosetRep>, GroupError> {
    let xi = match classify(pi_gen) {
        Classification::Parabolic { fixed } => fixed,
        _ => return Err(GroupError::NotParabolic(pi_gen.to_string())),
    };
    let better = |a: &super::OrbitPoint, b: &super::OrbitPoint| {
        a.dist < b.dist
            || (a.dist == b.dist
                && matches!((&a.gamma.word, &b.gamma.word), (Some(x), Some(y)) if x.shortlex_cmp(y).is_lt()))
    };
    let exact = xi == BoundaryPoint::Infinity
        && ball.points.iter().all(|p| {
            p.gamma
                .m
                .entries()
                .iter()
                .all(|v| (v - v.round()).abs() < 1e-9)
        });

    let mut groups: Vec<(BoundaryPoint, usize, usize)> = Vec::new();
    if exact {
        let mut by_key: BTreeMap<(i64, i64), (usize, usize)> = BTreeMap::new();
        for (i, p) in ball.points.iter().enumerate() {
            let (mut a, mut c) = (p.gamma.m.a.round() as i64, p.gamma.m.c.round() as i64);
            let g = gcd(a, c).max(1);
            a /= g;
            c /= g;
            if c < 0 || (c == 0 && a < 0) {
                a = -a;
                c = -c;
            }
            let e = by_key.entry((a, c)).or_insert((i, 0));
            e.1 += 1;
            if better(p, &ball.points[e.0]) {
                e.0 = i;
            }
        }
        for (_, (i, n)) in by_key {
            groups.push((ball.points[i].gamma.m.apply_boundary(xi), i, n));
        }
    } else {
        let mut imgs: Vec<(f64, usize)> = ball
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.gamma.m.apply_boundary(xi).angle(), i))
            .collect();
        imgs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut start = 0;
        while start < imgs.len() {
            let mut end = start + 1;
            while end < imgs.len() && imgs[end].0 - imgs[end - 1].0 <= CUSP_TOL {
                end += 1;
            }
            let mut best = imgs[start].1;
            for &(_, i) in &imgs[start + 1..end] {
                if better(&ball.points[i], &ball.points[best]) {
                    best = i;
                }
            }
            groups.push((
                ball.points[best].gamma.m.apply_boundary(xi),
                best,
                end - start,
            ));
            start = end;
        }
        // The chart angle wraps at ∞.
        if groups.len() > 1 {
            let first = imgs[0].0;
            let last = imgs[imgs.len() - 1].0;
            if first + std::f64::consts::TAU - last <= CUSP_TOL {
                let (_, bi, bn) = groups.pop().expect("nonempty");
                let g0 = &mut groups[0];
                g0.2 += bn;
                if better(&ball.points[bi], &ball.points[g0.1]) {
                    g0.1 = bi;
                    g0.0 = ball.points[bi].gamma.m.apply_boundary(xi);
                }
            }
        }
    }

    let mut reps: Vec<CosetRep> = groups
        .into_iter()
        .map(|(cusp_point, i, members)| CosetRep {
            gamma: ball.points[i].gamma.clone(),
            dist: ball.points[i].dist,
            cusp_point,
            members,
        })
        .collect();
    reps.sort_by(|a, b| {
        a.dist
            .total_cmp(&b.dist)
            .then_with(|| match (&a.gamma.word, &b.gamma.word) {
                (Some(x), Some(y)) => x.shortlex_cmp(y),
                _ => std::cmp::Ordering::Equal,
            })
    });
    Ok(reps)
}
