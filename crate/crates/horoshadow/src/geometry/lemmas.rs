//! Thin-triangle constant and checks of the comparison statements relating
//! shadows, visual balls and Hamenstädt neighbourhoods.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geodesic::{segment_distance, segment_foot, Geodesic, Vertex};
use super::triangle::inscribed_triangle;
use super::{
    busemann, dist, geodesic_point, hamenstadt_neighborhood_contains, ray_foot_parameter,
    shadow_arc, visual_distance, BoundaryPoint, GeometryError, Mobius, Point,
};

/// Thin-triangle constant used throughout, from [`calibrate_alpha`] with
/// `CALIBRATION_SAMPLES` and `CALIBRATION_SEED`.
pub const CALIBRATED_ALPHA: f64 = 0.97;
pub const CALIBRATION_SAMPLES: usize = 1_000_000;
pub const CALIBRATION_SEED: u64 = 0x7468_696e;

/// Tolerance for closed-form identities.
pub const TOL_EXACT: f64 = 1e-9;
/// Tolerance against iterative oracles.
pub const TOL_ORACLE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    pub alpha: f64,
    pub tol_exact: f64,
    pub tol_oracle: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams {
            alpha: CALIBRATED_ALPHA,
            tol_exact: TOL_EXACT,
            tol_oracle: TOL_ORACLE,
        }
    }
}

impl GeometryParams {
    pub fn k1(&self) -> f64 {
        6.0 * self.alpha
    }

    pub fn k2(&self, d: f64) -> f64 {
        2.0 * d + 4.0 * self.alpha
    }

    /// `C/2 + 3α/2` where `C` bounds the distance from the basepoint to the
    /// horocycle points used for a compact set of boundary points.
    pub fn k3(&self, c: f64) -> f64 {
        c / 2.0 + 1.5 * self.alpha
    }

    /// Visual radius `ε` such that `B_o(ξ, ε) ⊂ V(x, ξ, 0)` whenever `d(o, x) ≤ d`.
    pub fn visual_epsilon(d: f64) -> f64 {
        (-d).exp() / std::f64::consts::SQRT_2
    }
}

/// Outcome of [`calibrate_alpha`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AlphaCalibration {
    pub samples: usize,
    pub seed: u64,
    pub max_diameter: f64,
    pub max_offset: f64,
    /// Largest observed value rounded up to two decimals.
    pub alpha: f64,
}

/// Random point at hyperbolic distance at most `radius` from the basepoint.
pub fn random_point<R: Rng>(rng: &mut R, radius: f64) -> Point {
    let dir = BoundaryPoint::from_angle(rng.gen::<f64>() * std::f64::consts::TAU);
    geodesic_point(Point::BASE, dir, rng.gen::<f64>() * radius)
}

pub fn random_boundary<R: Rng>(rng: &mut R) -> BoundaryPoint {
    BoundaryPoint::from_angle(rng.gen::<f64>() * std::f64::consts::TAU)
}

/// Boundary point near `xi` as seen from `x`, at a log-uniform visual scale
/// around `scale`.
pub fn random_boundary_near<R: Rng>(
    rng: &mut R,
    x: Point,
    xi: BoundaryPoint,
    scale: f64,
) -> BoundaryPoint {
    let g = Mobius::center_at(x);
    let base = g.apply_boundary(xi).angle();
    let mag = (scale.ln() + rng.gen_range(-3.0..3.0))
        .exp()
        .min(std::f64::consts::PI);
    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    g.inverse()
        .apply_boundary(BoundaryPoint::from_angle(base + sign * mag))
}

fn random_vertex<R: Rng>(rng: &mut R, radius: f64, ideal_prob: f64) -> Vertex {
    if rng.gen::<f64>() < ideal_prob {
        Vertex::Ideal(random_boundary(rng))
    } else {
        Vertex::Finite(random_point(rng, radius))
    }
}

/// Diameter of the inscribed triangle and largest vertex-projection offset.
pub fn triangle_thinness(a: Vertex, b: Vertex, c: Vertex) -> Result<(f64, f64), GeometryError> {
    let (p, q, r) = inscribed_triangle(a, b, c)?;
    let diam = dist(p, q).max(dist(q, r)).max(dist(p, r));
    let pp = segment_foot(a, b, c)?;
    let qq = segment_foot(b, a, c)?;
    let rr = segment_foot(c, a, b)?;
    let off = dist(p, pp).max(dist(q, qq)).max(dist(r, rr));
    Ok((diam, off))
}

/// Largest thinness over random finite, mixed and ideal triangles.
pub fn calibrate_alpha(samples: usize, seed: u64) -> AlphaCalibration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_diameter = 0.0f64;
    let mut max_offset = 0.0f64;
    let mut done = 0;
    while done < samples {
        let radius = rng.gen_range(0.5..12.0);
        let ideal_prob = [0.0, 0.3, 0.7, 1.0][done % 4];
        let a = random_vertex(&mut rng, radius, ideal_prob);
        let b = random_vertex(&mut rng, radius, ideal_prob);
        let c = random_vertex(&mut rng, radius, ideal_prob);
        if let Ok((d, o)) = triangle_thinness(a, b, c) {
            if d.is_finite() && o.is_finite() {
                max_diameter = max_diameter.max(d);
                max_offset = max_offset.max(o);
                done += 1;
            }
        }
    }
    let alpha = (max_diameter.max(max_offset) * 100.0).ceil() / 100.0;
    AlphaCalibration {
        samples,
        seed,
        max_diameter,
        max_offset,
        alpha,
    }
}

/// Counterexample tally for one comparison statement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaOutcome {
    pub name: String,
    pub trials: usize,
    pub counterexamples: usize,
    pub worst_margin: f64,
}

impl LemmaOutcome {
    fn new(name: &str) -> Self {
        LemmaOutcome {
            name: name.to_string(),
            trials: 0,
            counterexamples: 0,
            worst_margin: f64::INFINITY,
        }
    }

    /// Records `margin ≥ 0` as a success.
    fn record(&mut self, margin: f64) {
        self.trials += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if margin < -TOL_EXACT {
            self.counterexamples += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.trials > 0 && self.counterexamples == 0
    }
}

fn in_shadow(eta: BoundaryPoint, x: Point, xi: BoundaryPoint, t: f64) -> bool {
    shadow_arc(x, xi, t.max(0.0))
        .map(|a| a.contains(eta))
        .unwrap_or(false)
}

/// Margin by which `inner ⊆ outer` holds for shadows, sampled at the
/// endpoints of `inner`: positive when contained.
fn shadow_inclusion_margin(inner: super::Arc, outer: super::Arc) -> f64 {
    if outer.contains_arc(&inner, 0.0) {
        1.0
    } else if outer.contains_arc(&inner, TOL_EXACT) {
        0.0
    } else {
        -1.0
    }
}

/// Runs every comparison statement on `trials` random instances each.
pub fn check_comparison_lemmas(
    params: &GeometryParams,
    trials: usize,
    seed: u64,
) -> Vec<LemmaOutcome> {
    let alpha = params.alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    // Gromov product against distance to the opposite side, both directions,
    // with finite or ideal b, c.
    let mut upper = LemmaOutcome::new("gromov_product_bounded_by_side_distance");
    let mut lower = LemmaOutcome::new("side_distance_bounded_by_gromov_product");
    while upper.trials < trials {
        let radius = rng.gen_range(0.5..8.0);
        let a = random_point(&mut rng, radius);
        let b = random_vertex(&mut rng, radius, 0.3);
        let c = random_vertex(&mut rng, radius, 0.3);
        let (Ok(g), Ok(side)) = (defect(a, b, c), segment_distance(a, b, c)) else {
            continue;
        };
        upper.record(2.0 * side - g);
        lower.record(g / 2.0 + alpha - side);
    }
    out.push(upper);
    out.push(lower);

    // Projection landing on a vertex versus distance from that vertex to the
    // opposite side.
    let mut direct = LemmaOutcome::new("projection_at_vertex_implies_close_side");
    let mut converse = LemmaOutcome::new("close_side_implies_projection_near_vertex");
    while direct.trials < trials || converse.trials < trials {
        let radius = rng.gen_range(0.5..8.0);
        let a = Vertex::Finite(random_point(&mut rng, radius));
        let b = Vertex::Finite(random_point(&mut rng, radius));
        let c = random_vertex(&mut rng, radius, 0.3);
        let Vertex::Finite(bp) = b else {
            unreachable!()
        };
        let (Ok(foot), Ok(bside)) = (segment_foot(a, b, c), segment_distance(bp, a, c)) else {
            continue;
        };
        let at_vertex = dist(foot, bp) <= 1e-12;
        if at_vertex && direct.trials < trials {
            direct.record(2.0 * alpha - bside);
        }
        if bside <= 2.0 * alpha && converse.trials < trials {
            converse.record(3.0 * alpha - dist(foot, bp));
        }
    }
    out.push(direct);
    out.push(converse);

    // Hamenstädt neighbourhoods squeezed between shadows.
    let mut sand_in = LemmaOutcome::new("shadow_inside_hamenstadt_neighbourhood");
    let mut sand_out = LemmaOutcome::new("hamenstadt_neighbourhood_inside_shadow");
    let mut along = LemmaOutcome::new("busemann_along_shadow");
    let mut close = LemmaOutcome::new("ray_point_close_to_shadow_ray");
    while sand_in.trials < trials || sand_out.trials < trials {
        let x = random_point(&mut rng, 4.0);
        let xi = random_boundary(&mut rng);
        let t = rng.gen_range(2.0 * alpha..12.0);
        let eta = random_boundary_near(&mut rng, x, xi, (-t).exp());
        if eta == xi {
            continue;
        }
        let in_d = hamenstadt_neighborhood_contains(x, xi, t, eta, alpha);
        if in_shadow(eta, x, xi, t + alpha) && sand_in.trials < trials {
            sand_in.record(if in_d { 1.0 } else { -1.0 });
        }
        if in_d && sand_out.trials < trials {
            let foot = ray_foot_parameter(eta, x, xi).unwrap_or(f64::NEG_INFINITY);
            sand_out.record(foot - (t - 2.0 * alpha));
        }
        if in_shadow(eta, x, xi, t) {
            let p = geodesic_point(x, xi, t);
            let b = busemann(eta, x, p);
            along.record((t - b).min(b - (t - 4.0 * alpha)));
            if let Ok(d) = segment_distance(p, Vertex::Finite(x), Vertex::Ideal(eta)) {
                close.record(2.0 * alpha - d);
            }
        }
    }
    out.push(sand_in);
    out.push(sand_out);
    out.push(along);
    out.push(close);

    // Moving the target point, the endpoint, or the basepoint.
    let k1 = params.k1();
    let mut move_a = LemmaOutcome::new("shadow_of_hamenstadt_neighbour");
    let mut move_b = LemmaOutcome::new("shadows_of_nearby_endpoints");
    let mut move_c = LemmaOutcome::new("shadows_from_nearby_basepoints");
    while move_a.trials < trials {
        let x = random_point(&mut rng, 4.0);
        let xi = random_boundary(&mut rng);
        let t = rng.gen_range(k1..k1 + 10.0);
        let eta = random_boundary_near(&mut rng, x, xi, (-t).exp());
        if eta == xi {
            continue;
        }
        if hamenstadt_neighborhood_contains(x, xi, t, eta, alpha) {
            if let (Ok(inner), Ok(outer)) = (shadow_arc(x, eta, t), shadow_arc(x, xi, t - k1)) {
                move_a.record(shadow_inclusion_margin(inner, outer));
            }
        }
    }
    while move_b.trials < trials {
        let x = random_point(&mut rng, 4.0);
        let xi = random_boundary(&mut rng);
        let t = rng.gen_range(k1..k1 + 10.0);
        let eta = random_boundary_near(&mut rng, x, xi, (-(t + k1 + alpha)).exp());
        if eta == xi || !in_shadow(eta, x, xi, t + k1 + alpha) {
            continue;
        }
        let arcs = (
            shadow_arc(x, eta, t + k1),
            shadow_arc(x, xi, t),
            shadow_arc(x, eta, t - k1),
        );
        if let (Ok(a), Ok(b), Ok(c)) = arcs {
            move_b.record(shadow_inclusion_margin(a, b).min(shadow_inclusion_margin(b, c)));
        }
    }
    while move_c.trials < trials {
        let x = random_point(&mut rng, 4.0);
        let dmax = rng.gen_range(0.1..3.0);
        let y = geodesic_point(x, random_boundary(&mut rng), rng.gen::<f64>() * dmax);
        let k2 = params.k2(dmax);
        let xi = random_boundary(&mut rng);
        let t = rng.gen_range(k2..k2 + 8.0);
        let arcs = (
            shadow_arc(x, xi, t + k2),
            shadow_arc(y, xi, t),
            shadow_arc(x, xi, t - k2),
        );
        if let (Ok(a), Ok(b), Ok(c)) = arcs {
            move_c.record(shadow_inclusion_margin(a, b).min(shadow_inclusion_margin(b, c)));
        }
    }
    out.push(move_a);
    out.push(move_b);
    out.push(move_c);

    // Visual balls at the basepoint inside half-shadows from nearby points.
    let mut ball = LemmaOutcome::new("visual_ball_inside_half_shadow");
    while ball.trials < trials {
        let d = rng.gen_range(0.1..5.0);
        let x = geodesic_point(Point::BASE, random_boundary(&mut rng), rng.gen::<f64>() * d);
        let xi = random_boundary(&mut rng);
        let eps = GeometryParams::visual_epsilon(d);
        let eta = random_boundary_near(&mut rng, Point::BASE, xi, eps);
        if eta == xi || visual_distance(Point::BASE, xi, eta) >= eps {
            continue;
        }
        let foot = ray_foot_parameter(eta, x, xi).unwrap_or(f64::NEG_INFINITY);
        ball.record(if foot >= 0.0 { 1.0 } else { foot });
    }
    out.push(ball);

    out.extend(check_parabolic_displacement(params, trials, &mut rng));
    out
}

/// `d(a,b) + d(a,c) - d(b,c)`, with Busemann functions at ideal vertices.
fn defect(a: Point, b: Vertex, c: Vertex) -> Result<f64, GeometryError> {
    Ok(match (b, c) {
        (Vertex::Finite(b), Vertex::Finite(c)) => dist(a, b) + dist(a, c) - dist(b, c),
        (Vertex::Ideal(u), Vertex::Finite(c)) | (Vertex::Finite(c), Vertex::Ideal(u)) => {
            dist(a, c) + busemann(u, a, c)
        }
        (Vertex::Ideal(u), Vertex::Ideal(w)) => {
            let y = Geodesic::new(u, w)?.point_at(0.0);
            busemann(u, a, y) + busemann(w, a, y)
        }
    })
}

/// Parabolic translations `z ↦ z + τ` acting on a compact set `[-l, l]`.
fn check_parabolic_displacement<R: Rng>(
    params: &GeometryParams,
    trials: usize,
    rng: &mut R,
) -> Vec<LemmaOutcome> {
    let o = Point::BASE;
    let xi = BoundaryPoint::Infinity;
    let mut far = LemmaOutcome::new("parabolic_far_moves_into_shadow");
    let mut near = LemmaOutcome::new("parabolic_near_stays_out_of_shadow");
    while far.trials < trials || near.trials < trials {
        let l: f64 = rng.gen_range(0.1..4.0);
        let c = 2.0 * (l / 2.0).asinh();
        let k3 = params.k3(c);
        let t = rng.gen_range(k3..k3 + 8.0);
        let tau = (t + rng.gen_range(-4.0..4.0)).exp() * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let p = Mobius::translation(tau);
        let eta = BoundaryPoint::Real(rng.gen_range(-l..=l));
        let peta = p.apply_boundary(eta);
        let dp = dist(o, p.apply(o));
        let ot = geodesic_point(o, xi, t);
        let b = busemann(peta, ot, p.apply(ot));
        if dp >= 2.0 * t && far.trials < trials {
            let inside = in_shadow(peta, o, xi, t - k3);
            let m = (2.0 * k3 - (b - dp + 2.0 * t).abs()).min(if inside { 1.0 } else { -1.0 });
            far.record(m);
        } else if dp <= 2.0 * t && near.trials < trials {
            let outside = !in_shadow(peta, o, xi, t + k3);
            let m = (2.0 * k3 - b.abs()).min(if outside { 1.0 } else { -1.0 });
            near.record(m);
        }
    }
    vec![far, near]
}
