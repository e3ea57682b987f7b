use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::PattersonError;
use crate::geometry::{busemann, Arc, BoundaryPoint, Mobius, Point};
use crate::group::OrbitBall;
use crate::numerics::{compensated_sum, NeumaierSum};

pub const MEASURE_FORMAT: &str = "horoshadow measure v1";

/// Sums over at most this many atoms are taken directly instead of by
/// prefix differences.
const DIRECT_SUM_LIMIT: usize = 4096;

/// Finite measure on the boundary circle: atoms `(angle, weight)` sorted by
/// disk-chart angle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomicBoundaryMeasure {
    atoms: Vec<(f64, f64)>,
    #[serde(skip)]
    prefix: Vec<f64>,
    pub s_used: f64,
    pub t_used: f64,
    /// Total weight before normalization (the truncated Poincaré sum for a
    /// Patterson measure).
    pub normalization: f64,
    pub normalized: bool,
    /// The point `x` whose density this approximates.
    pub basepoint: Point,
    pub tail_fraction: f64,
    pub spec_hash: String,
}

impl AtomicBoundaryMeasure {
    /// Measure with the given atoms; angles are reduced to `[0, 2π)` and
    /// sorted.
    pub fn from_atoms(atoms: Vec<(f64, f64)>, basepoint: Point) -> Self {
        let mut m = AtomicBoundaryMeasure {
            atoms,
            prefix: Vec::new(),
            s_used: f64::NAN,
            t_used: f64::NAN,
            normalization: 1.0,
            normalized: false,
            basepoint,
            tail_fraction: 0.0,
            spec_hash: String::new(),
        };
        m.reindex();
        m
    }

    fn reindex(&mut self) {
        for a in &mut self.atoms {
            a.0 = a.0.rem_euclid(std::f64::consts::TAU);
            if a.0 >= std::f64::consts::TAU {
                a.0 = 0.0;
            }
        }
        self.atoms
            .par_sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut acc = NeumaierSum::new();
        self.prefix = Vec::with_capacity(self.atoms.len() + 1);
        self.prefix.push(0.0);
        for &(_, w) in &self.atoms {
            acc.add(w);
            self.prefix.push(acc.value());
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap_or(&0.0)
    }

    fn range_sum(&self, i: usize, j: usize) -> f64 {
        if j <= i {
            0.0
        } else if j - i <= DIRECT_SUM_LIMIT {
            compensated_sum(self.atoms[i..j].iter().map(|a| a.1))
        } else {
            self.prefix[j] - self.prefix[i]
        }
    }

    fn lower(&self, theta: f64) -> usize {
        self.atoms.partition_point(|a| a.0 < theta)
    }

    /// Weight of the atoms in the half-open arc `[lo, lo + len)`.
    pub fn measure_of_arc(&self, arc: &Arc) -> f64 {
        if arc.is_full() {
            return self.total();
        }
        let lo = arc.lo();
        let hi = lo + arc.len();
        let tau = std::f64::consts::TAU;
        if hi <= tau {
            self.range_sum(self.lower(lo), self.lower(hi))
        } else {
            self.range_sum(self.lower(lo), self.atoms.len())
                + self.range_sum(0, self.lower(hi - tau))
        }
    }

    /// Number of atoms in the half-open arc `[lo, lo + len)`.
    pub fn atoms_in_arc(&self, arc: &Arc) -> usize {
        if arc.is_full() {
            return self.atoms.len();
        }
        let lo = arc.lo();
        let hi = lo + arc.len();
        let tau = std::f64::consts::TAU;
        if hi <= tau {
            self.lower(hi) - self.lower(lo)
        } else {
            self.atoms.len() - self.lower(lo) + self.lower(hi - tau)
        }
    }

    /// Atoms in the half-open arc `[lo, lo + len)`, in ccw order from `lo`,
    /// as at most two slices.
    pub fn atoms_of_arc(&self, arc: &Arc) -> [&[(f64, f64)]; 2] {
        if arc.is_full() {
            return [&self.atoms, &[]];
        }
        let lo = arc.lo();
        let hi = lo + arc.len();
        let tau = std::f64::consts::TAU;
        if hi <= tau {
            [&self.atoms[self.lower(lo)..self.lower(hi)], &[]]
        } else {
            [
                &self.atoms[self.lower(lo)..],
                &self.atoms[..self.lower(hi - tau)],
            ]
        }
    }

    /// Weight of atoms within `tol` of the angle `theta`.
    pub fn mass_at_angle(&self, theta: f64, tol: f64) -> f64 {
        let tau = std::f64::consts::TAU;
        compensated_sum(
            self.atoms
                .iter()
                .filter(|a| crate::geometry::angle_gap(a.0, theta.rem_euclid(tau)) <= tol)
                .map(|a| a.1),
        )
    }

    /// Weight of atoms in the open arc `(lo, lo + len)`.
    pub fn measure_of_open_arc(&self, arc: &Arc) -> f64 {
        let closed_lo: f64 = self
            .atoms
            .iter()
            .skip(self.lower(arc.lo()))
            .take_while(|a| a.0 == arc.lo())
            .map(|a| a.1)
            .sum();
        self.measure_of_arc(arc) - closed_lo
    }

    /// Copy scaled to total mass one.
    pub fn normalize(&self) -> Self {
        let t = self.total();
        let mut m = self.clone();
        m.atoms.iter_mut().for_each(|a| a.1 /= t);
        m.normalization = self.normalization * t;
        m.normalized = true;
        m.reindex();
        m
    }
}

/// Truncated Poincaré series `Σ e^{-s d(o, γo)}` over the ball, summed in
/// the ball's order.
pub fn poincare_partial(ball: &OrbitBall, s: f64) -> f64 {
    compensated_sum(ball.points.iter().map(|p| (-s * p.dist).exp()))
}

/// Estimated share of the full series `Σ e^{-s d}` lying beyond the ball,
/// assuming shell weights continue to grow like `e^{(δ - s) k}`.
pub fn tail_fraction(ball: &OrbitBall, s: f64, delta: f64) -> f64 {
    let k_max = ball.radius.floor() as usize;
    if k_max == 0 || s <= delta {
        return if s <= delta { 1.0 } else { 0.0 };
    }
    let mut shells = vec![NeumaierSum::new(); k_max];
    for p in &ball.points {
        let k = p.dist.floor() as usize;
        if k < k_max {
            shells[k].add((-s * p.dist).exp());
        }
    }
    let rate = delta - s;
    let last: Vec<usize> = (k_max.saturating_sub(3)..k_max).collect();
    let b = last
        .iter()
        .map(|&k| shells[k].value() * (-rate * k as f64).exp())
        .sum::<f64>()
        / last.len() as f64;
    let tail = b * (rate * ball.radius).exp() / (1.0 - rate.exp());
    let partial = poincare_partial(ball, s);
    tail / (partial + tail)
}

/// Normalized atoms `e^{-s d(o, γo)}` at the radial directions of `γo`.
pub fn build_patterson(
    ball: &OrbitBall,
    s: f64,
    delta_hat: f64,
) -> Result<AtomicBoundaryMeasure, PattersonError> {
    if !(s > delta_hat) {
        return Err(PattersonError::ExponentTooSmall {
            s,
            delta: delta_hat,
        });
    }
    if ball.is_empty() {
        return Err(PattersonError::InsufficientData("empty orbit ball".into()));
    }
    let total = poincare_partial(ball, s);
    let atoms: Vec<(f64, f64)> = ball
        .points
        .par_iter()
        .map(|p| (p.direction_angle, (-s * p.dist).exp() / total))
        .collect();
    let mut m = AtomicBoundaryMeasure::from_atoms(atoms, ball.basepoint);
    m.s_used = s;
    m.t_used = ball.radius;
    m.normalization = total;
    m.normalized = true;
    m.tail_fraction = tail_fraction(ball, s, delta_hat);
    Ok(m)
}

/// Uniform probability on the directions of all orbit points in the ball.
/// Each subtree of the orbit is weighted by its point count, which scales
/// like `e^{-δ d}` without the `e^{(s-δ) R}` distortion the exponential
/// weights carry at a finite radius. `s_used` is recorded as 0 and the tail
/// estimate as NaN.
pub fn build_counting_measure(ball: &OrbitBall) -> Result<AtomicBoundaryMeasure, PattersonError> {
    if ball.is_empty() {
        return Err(PattersonError::InsufficientData("empty orbit ball".into()));
    }
    let w = 1.0 / ball.len() as f64;
    let atoms: Vec<(f64, f64)> = ball
        .points
        .par_iter()
        .map(|p| (p.direction_angle, w))
        .collect();
    let mut m = AtomicBoundaryMeasure::from_atoms(atoms, ball.basepoint);
    m.s_used = 0.0;
    m.t_used = ball.radius;
    m.normalization = ball.len() as f64;
    m.normalized = true;
    m.tail_fraction = f64::NAN;
    Ok(m)
}

/// `dν_x = e^{-δ β_ξ(x, y)} dν_y` where `y` is the measure's basepoint. Not
/// renormalized.
pub fn conformal_reweight(
    mu: &AtomicBoundaryMeasure,
    x: Point,
    delta: f64,
) -> AtomicBoundaryMeasure {
    let y = mu.basepoint;
    let atoms = mu
        .atoms
        .par_iter()
        .map(|&(theta, w)| {
            (
                theta,
                w * (-delta * busemann(BoundaryPoint::from_angle(theta), x, y)).exp(),
            )
        })
        .collect();
    let mut m = AtomicBoundaryMeasure {
        atoms,
        basepoint: x,
        normalized: false,
        ..mu.clone()
    };
    m.reindex();
    m
}

/// `g_* μ`: atoms moved by `g`, weights kept; the basepoint moves to `g(x)`.
pub fn pushforward(mu: &AtomicBoundaryMeasure, g: &Mobius) -> AtomicBoundaryMeasure {
    let atoms = mu
        .atoms
        .par_iter()
        .map(|&(theta, w)| {
            (
                g.apply_boundary(BoundaryPoint::from_angle(theta)).angle(),
                w,
            )
        })
        .collect();
    let mut m = AtomicBoundaryMeasure {
        atoms,
        basepoint: g.apply(mu.basepoint),
        ..mu.clone()
    };
    m.reindex();
    m
}

/// `Σ_k |μ(A_k) - ν(A_k)|` over `bins` equal arcs of the circle.
pub fn binned_total_variation(
    mu: &AtomicBoundaryMeasure,
    nu: &AtomicBoundaryMeasure,
    bins: usize,
) -> f64 {
    compensated_sum(
        Arc::partition(bins)
            .iter()
            .map(|a| (mu.measure_of_arc(a) - nu.measure_of_arc(a)).abs()),
    )
}

/// Versioned text format: `#` header lines, then `angle,weight` rows.
pub fn write_measure<W: Write>(mu: &AtomicBoundaryMeasure, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# {MEASURE_FORMAT}")?;
    writeln!(
        w,
        "# spec_hash {}",
        if mu.spec_hash.is_empty() {
            "-"
        } else {
            &mu.spec_hash
        }
    )?;
    writeln!(w, "# s {}", mu.s_used)?;
    writeln!(w, "# T {}", mu.t_used)?;
    writeln!(w, "# basepoint {} {}", mu.basepoint.re, mu.basepoint.im)?;
    writeln!(w, "# normalization {}", mu.normalization)?;
    writeln!(w, "# normalized {}", mu.normalized)?;
    writeln!(w, "# tail_fraction {}", mu.tail_fraction)?;
    writeln!(w, "angle,weight")?;
    for (a, x) in &mu.atoms {
        writeln!(w, "{a},{x}")?;
    }
    Ok(())
}

pub fn read_measure<R: BufRead>(r: R) -> Result<AtomicBoundaryMeasure, PattersonError> {
    let bad = |m: String| PattersonError::MeasureFile(m);
    let mut lines = r.lines().enumerate();
    let mut header = std::collections::BTreeMap::new();
    let mut atoms = Vec::new();
    let mut in_rows = false;
    let mut version_ok = false;
    for (n, line) in &mut lines {
        let line = line.map_err(|e| bad(e.to_string()))?;
        if let Some(h) = line.strip_prefix("# ") {
            if h == MEASURE_FORMAT {
                version_ok = true;
            } else if let Some((k, v)) = h.split_once(' ') {
                header.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if !in_rows {
            if line != "angle,weight" {
                return Err(bad(format!("line {}: expected `angle,weight`", n + 1)));
            }
            in_rows = true;
            continue;
        }
        let (a, x) = line
            .split_once(',')
            .ok_or_else(|| bad(format!("line {}: expected two fields", n + 1)))?;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("line {}: bad number {s:?}", n + 1)))
        };
        atoms.push((num(a)?, num(x)?));
    }
    if !version_ok {
        return Err(bad(format!("missing `{MEASURE_FORMAT}` header")));
    }
    let get = |k: &str| {
        header
            .get(k)
            .ok_or_else(|| bad(format!("missing header {k}")))
    };
    let f = |k: &str| -> Result<f64, PattersonError> {
        get(k)?
            .parse::<f64>()
            .map_err(|_| bad(format!("bad header {k}")))
    };
    let bp: Vec<f64> = get("basepoint")?
        .split(' ')
        .filter_map(|v| v.parse().ok())
        .collect();
    if bp.len() != 2 {
        return Err(bad("bad basepoint".into()));
    }
    let basepoint = Point::try_new(bp[0], bp[1]).map_err(|e| bad(e.to_string()))?;
    let mut m = AtomicBoundaryMeasure::from_atoms(atoms, basepoint);
    m.s_used = f("s")?;
    m.t_used = f("T")?;
    m.normalization = f("normalization")?;
    m.normalized = get("normalized")? == "true";
    m.tail_fraction = f("tail_fraction")?;
    let hash = get("spec_hash")?;
    m.spec_hash = if hash == "-" {
        String::new()
    } else {
        hash.clone()
    };
    Ok(m)
}
