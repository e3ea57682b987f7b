use std::path::PathBuf;
use std::sync::OnceLock;

use horoshadow::geometry::lemmas::{random_boundary, random_point, CALIBRATED_ALPHA};
use horoshadow::geometry::*;
use horoshadow::group::*;
use horoshadow::horoflow::*;
use horoshadow::patterson::*;
use horoshadow::shadows::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Fixture {
    spec: GroupSpec,
    ball: OrbitBall,
    index: HoroballIndex,
    mu: AtomicBoundaryMeasure,
}

fn modular() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/modular.json");
        let spec = load_group_spec(&path).unwrap();
        let ball = enumerate_orbit(&spec, 10.0).unwrap();
        let index = HoroballIndex::from_ball(&spec, &ball, 1e-4).unwrap();
        let mu = build_patterson(&ball, 1.02, 1.0).unwrap();
        Fixture {
            spec,
            ball,
            index,
            mu,
        }
    })
}

fn random_vector(rng: &mut ChaCha8Rng) -> UnitVector {
    loop {
        let a = random_boundary(rng);
        let b = random_boundary(rng);
        if let Ok(u) = UnitVector::new(a, b, rng.gen_range(-3.0..3.0)) {
            if (a.angle() - b.angle()).abs() > 1e-3 {
                return u;
            }
        }
    }
}

/// Another vector on the horocycle of `u`, aimed at a random point away from
/// the centre.
fn sibling(rng: &mut ChaCha8Rng, u: &UnitVector) -> UnitVector {
    let frame = u.frame();
    loop {
        let xi = random_boundary(rng);
        if xi.approx_eq(u.u_minus, 1e-3) {
            continue;
        }
        return frame.vector_toward(xi).unwrap();
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn chart_vector(frame: &HorocycleFrame, p: Point) -> UnitVector {
    let z = frame.g0.apply(p);
    frame
        .vector_toward(frame.g0.inverse().apply_boundary(BoundaryPoint::Real(z.re)))
        .unwrap()
}

#[test]
fn vertical_frame_distance_is_horizontal_offset() {
    let u = UnitVector::new(BoundaryPoint::Infinity, BoundaryPoint::Real(0.0), 0.0).unwrap();
    let v = UnitVector::new(BoundaryPoint::Infinity, BoundaryPoint::Real(1.0), 0.0).unwrap();
    assert!((u.frame().height - 1.0).abs() < 1e-15);
    assert!((u.basepoint().re - 0.0).abs() < 1e-12 && (u.basepoint().im - 1.0).abs() < 1e-12);
    assert!((hamenstadt_distance(&u, &v).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(hamenstadt_distance(&u, &u).unwrap(), 0.0);
}

#[test]
fn mismatched_horocycles_are_rejected() {
    let u = UnitVector::new(BoundaryPoint::Infinity, BoundaryPoint::Real(0.0), 0.0).unwrap();
    let v = UnitVector::new(BoundaryPoint::Infinity, BoundaryPoint::Real(1.0), 0.5).unwrap();
    let w = UnitVector::new(BoundaryPoint::Real(2.0), BoundaryPoint::Real(1.0), 0.0).unwrap();
    assert!(matches!(
        hamenstadt_distance(&u, &v),
        Err(HoroflowError::FrameMismatch(..))
    ));
    assert!(matches!(
        hamenstadt_distance(&u, &w),
        Err(HoroflowError::FrameMismatch(..))
    ));
    assert!(matches!(
        UnitVector::new(BoundaryPoint::Real(1.0), BoundaryPoint::Real(1.0), 0.0),
        Err(HoroflowError::SameEndpoints(_))
    ));
}

#[test]
fn basepoint_sits_on_axis_at_prescribed_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let u = random_vector(&mut rng);
        let p = u.basepoint();
        let axis = Geodesic::new(u.u_minus, u.u_plus).unwrap();
        assert!(axis.distance(p) < 1e-9);
        assert!(close(busemann(u.u_minus, p, Point::BASE), u.s, 1e-9));
        if angle_gap(u.u_minus.angle(), u.u_plus.angle()) < 0.1 {
            continue;
        }
        let back = UnitVector::at(p, u.u_plus);
        assert!(back.u_minus.approx_eq(u.u_minus, 1e-8), "{back:?} vs {u:?}");
        assert!(close(back.s, u.s, 1e-9), "{back:?} vs {u:?}");
    }
}

#[test]
fn frame_chart_flattens_the_horocycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let u = random_vector(&mut rng);
        let frame = u.frame();
        let x = rng.gen_range(-5.0..5.0);
        let p = frame.basepoint_at(x);
        assert!(close(
            busemann(frame.center, p, Point::BASE),
            frame.level,
            1e-9
        ));
        let z = frame.g0.apply(p);
        assert!(close(z.im, frame.height, 1e-9) && close(z.re, x, 1e-9));
    }
}

#[test]
fn nearest_vector_is_the_perpendicular_foot() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let (a, b) = (random_boundary(&mut rng), random_boundary(&mut rng));
        let x = random_point(&mut rng, 3.0);
        let Ok(u) = UnitVector::nearest_to(x, a, b) else {
            continue;
        };
        let axis = Geodesic::new(a, b).unwrap();
        assert!(close(dist(x, u.basepoint()), axis.distance(x), 1e-8));
    }
}

#[test]
fn flow_moves_basepoint_by_elapsed_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let u = random_vector(&mut rng);
        let t = rng.gen_range(-4.0..4.0);
        let w = geodesic_flow(&u, t);
        assert!(close(dist(u.basepoint(), w.basepoint()), t.abs(), 1e-9));
        let back = geodesic_flow(&w, -t);
        assert!(
            (back.s - u.s).abs() < 1e-12 && back.u_plus == u.u_plus && back.u_minus == u.u_minus
        );
        assert_eq!(geodesic_flow(&u, 0.0), u);
        // forward flow heads toward u⁺
        if t > 0.0 {
            assert!(busemann(u.u_plus, w.basepoint(), u.basepoint()) < 0.0);
        }
    }
}

#[test]
fn distance_is_invariant_under_isometries() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let u = random_vector(&mut rng);
        let v = sibling(&mut rng, &u);
        let g = Mobius::center_at(random_point(&mut rng, 2.0))
            .compose(&Mobius::translation(rng.gen_range(-2.0..2.0)));
        let lift = |w: &UnitVector| {
            let c = g.apply_boundary(w.u_minus);
            UnitVector::new(
                c,
                g.apply_boundary(w.u_plus),
                busemann(c, g.apply(w.basepoint()), Point::BASE),
            )
            .unwrap()
        };
        let (gu, gv) = (lift(&u), lift(&v));
        let gv = UnitVector { s: gu.s, ..gv };
        assert!(close(
            hamenstadt_distance(&gu, &gv).unwrap(),
            hamenstadt_distance(&u, &v).unwrap(),
            1e-8
        ));
    }
}

#[test]
fn exact_intersection_example() {
    let hb = Horoball::above(1.0).unwrap();
    let level = busemann(BoundaryPoint::Real(0.0), Point::new(0.0, 4.0), Point::BASE);
    let frame = HorocycleFrame::new(BoundaryPoint::Real(0.0), level);
    let hit = horoball_ball_intersection(&frame, &hb).unwrap().unwrap();
    assert!((hit.h - 4f64.ln()).abs() < 1e-12);
    assert!((hit.radius - 3f64.sqrt()).abs() < 1e-12);
    let top = hit.v_top.basepoint();
    assert!(top.re.abs() < 1e-12 && (top.im - 4.0).abs() < 1e-12);
    // the circle x² + (y − 2)² = 4 crosses Im = 1 at (±√3, 1)
    for sign in [-1.0, 1.0] {
        let p = Point::new(sign * 3f64.sqrt(), 1.0);
        let v = chart_vector(&frame, p);
        assert!(dist(v.basepoint(), p) < 1e-9);
        assert!(hb.depth(p).abs() < 1e-12);
        assert!((hamenstadt_distance(&hit.v_top, &v).unwrap() - 3f64.sqrt()).abs() < 1e-9);
    }

    // top point at height D has depth ln D in {Im ≥ 1}
    let tangent_at = |d: f64| {
        HorocycleFrame::new(
            BoundaryPoint::Real(0.0),
            busemann(BoundaryPoint::Real(0.0), Point::new(0.0, d), Point::BASE),
        )
    };
    let hit = horoball_ball_intersection(&tangent_at(2.0), &hb)
        .unwrap()
        .unwrap();
    assert!((hit.h - 2f64.ln()).abs() < 1e-12 && (hit.radius - 1.0).abs() < 1e-12);
    let hit = horoball_ball_intersection(&tangent_at(1.0), &hb)
        .unwrap()
        .unwrap();
    assert!(hit.h.abs() < 1e-12 && hit.radius < 1e-6);
    assert!(horoball_ball_intersection(&tangent_at(0.5), &hb)
        .unwrap()
        .is_none());
    assert!(matches!(
        horoball_ball_intersection(
            &frame,
            &Horoball::new(BoundaryPoint::Real(0.0), 1.0).unwrap()
        ),
        Err(HoroflowError::CoincidentCenters(_))
    ));
}

/// Chart abscissa where the horocycle leaves the horoball, by bisection on
/// the depth of horocycle points.
fn exit_abscissa(frame: &HorocycleFrame, hb: &Horoball, x0: f64, dir: f64) -> f64 {
    let inside = |x: f64| hb.depth(frame.basepoint_at(x)) >= 0.0;
    let mut step = frame.height.max(1e-300);
    while inside(x0 + dir * step) {
        step *= 2.0;
    }
    let (mut a, mut b) = (0.0, step);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if inside(x0 + dir * m) {
            a = m;
        } else {
            b = m;
        }
    }
    x0 + dir * 0.5 * (a + b)
}

#[test]
fn intersection_radius_matches_measured_chord() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let alpha = CALIBRATED_ALPHA;
    let mut hits = 0;
    while hits < 1000 {
        let u = random_vector(&mut rng);
        let frame = u.frame();
        let c = random_boundary(&mut rng);
        if c.approx_eq(frame.center, 1e-3) {
            continue;
        }
        let top = frame.basepoint_toward(c).unwrap();
        let hb =
            Horoball::new(c, busemann(c, top, Point::BASE) + rng.gen_range(-1.0..6.0)).unwrap();
        let Some(hit) = horoball_ball_intersection(&frame, &hb).unwrap() else {
            assert!(hb.depth(top) < 0.0);
            continue;
        };
        hits += 1;
        let xc = frame.coordinate(c).unwrap();
        let lo = exit_abscissa(&frame, &hb, xc, -1.0);
        let hi = exit_abscissa(&frame, &hb, xc, 1.0);
        let measured = 0.5 * (hi - lo) / frame.height;
        assert!(
            close(measured, hit.radius, 1e-9),
            "{measured} vs {}",
            hit.radius
        );
        let edge = frame
            .vector_toward(frame.g0.inverse().apply_boundary(BoundaryPoint::Real(hi)))
            .unwrap();
        assert!(close(
            hamenstadt_distance(&hit.v_top, &edge).unwrap(),
            hit.radius,
            1e-9
        ));
        if hit.h >= alpha {
            assert!(((hit.h - alpha) / 2.0).exp() <= hit.radius);
        }
        assert!(hit.radius <= ((hit.h + alpha) / 2.0).exp());
    }
}

#[test]
fn ball_projection_is_squeezed_between_shadows() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let alpha = CALIBRATED_ALPHA;
    for _ in 0..1000 {
        let w = random_vector(&mut rng);
        let s = rng.gen_range(alpha..8.0);
        let x = w.basepoint();
        let ball = w.frame().ball_arc(&w, (-s).exp()).unwrap();
        let inner = shadow_arc(x, w.u_plus, s + alpha).unwrap();
        let outer = shadow_arc(x, w.u_plus, s - alpha).unwrap();
        assert!(ball.contains_arc(&inner, 1e-12));
        assert!(outer.contains_arc(&ball, 1e-12));
        let same = shadow_arc(x, w.u_plus, s).unwrap();
        assert!(ball.contains_arc(&same, 1e-9) && same.contains_arc(&ball, 1e-9));
    }
}

#[test]
fn balls_are_arcs_around_the_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..300 {
        let u = random_vector(&mut rng);
        let frame = u.frame();
        let mut prev: Option<Arc> = None;
        for k in 0..12 {
            let arc = frame.ball_arc(&u, 0.01 * 3f64.powi(k)).unwrap();
            assert!(arc.contains(u.u_plus) && !arc.contains(u.u_minus) && !arc.is_full());
            if let Some(p) = prev {
                assert!(arc.contains_arc(&p, 1e-12));
            }
            prev = Some(arc);
        }
    }
    let u = UnitVector::new(BoundaryPoint::Infinity, BoundaryPoint::Real(0.0), 0.0).unwrap();
    assert!(matches!(
        u.frame().ball_arc(&u, 0.0),
        Err(HoroflowError::BadRadius(_))
    ));
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> AtomicBoundaryMeasure {
    let atoms = (0..n)
        .map(|_| {
            (
                rng.gen::<f64>() * std::f64::consts::TAU,
                rng.gen_range(0.1..1.0),
            )
        })
        .collect();
    AtomicBoundaryMeasure::from_atoms(atoms, Point::BASE)
}

#[test]
fn horocyclic_mass_of_empty_arc_is_zero() {
    let mu = AtomicBoundaryMeasure::from_atoms(vec![(1.0, 0.5), (2.0, 0.5)], Point::BASE);
    let u = UnitVector::new(BoundaryPoint::Infinity, BoundaryPoint::Real(0.0), 0.0).unwrap();
    let arc = Arc::new(3.0, 0.1).unwrap();
    assert_eq!(mu_arc_mass(&u.frame(), &mu, &arc, 1.0).unwrap(), 0.0);
}

#[test]
fn horocyclic_mass_is_additive_over_partitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let mu = random_measure(&mut rng, 400);
        let u = random_vector(&mut rng);
        let frame = u.frame();
        let gap = 0.05;
        let whole = Arc::new(u.u_minus.angle() + gap, std::f64::consts::TAU - 2.0 * gap).unwrap();
        let k = rng.gen_range(2..12);
        let parts: f64 = (0..k)
            .map(|i| {
                let piece = Arc::new(
                    whole.lo() + whole.len() * i as f64 / k as f64,
                    whole.len() / k as f64,
                )
                .unwrap();
                mu_arc_mass(&frame, &mu, &piece, 0.8).unwrap()
            })
            .sum();
        let total = mu_arc_mass(&frame, &mu, &whole, 0.8).unwrap();
        assert!(close(parts, total, 1e-12));
        assert!(matches!(
            mu_arc_mass(
                &frame,
                &mu,
                &Arc::new(u.u_minus.angle() - 0.1, 0.2).unwrap(),
                0.8
            ),
            Err(HoroflowError::CenterInArc(_))
        ));
        assert!(mu_arc_mass(&frame, &mu, &Arc::full(), 0.8).is_err());
    }
}

#[test]
fn flow_rescales_horocyclic_mass_atom_by_atom() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..300 {
        let u = random_vector(&mut rng);
        let t = rng.gen_range(-3.0..3.0);
        let delta = rng.gen_range(0.3..1.0);
        let r = 10f64.powf(rng.gen_range(-1.0..1.0));
        let arc = u.frame().ball_arc(&u, r).unwrap();
        let w = geodesic_flow(&u, t);
        let warc = w.frame().ball_arc(&w, r * t.exp()).unwrap();
        assert!(close(arc.lo(), warc.lo(), 1e-9) && close(arc.len(), warc.len(), 1e-9));
        let theta = arc.lo() + arc.len() * rng.gen::<f64>();
        let mu = AtomicBoundaryMeasure::from_atoms(vec![(theta, 0.7)], Point::BASE);
        let before = mu_arc_mass(&u.frame(), &mu, &arc, delta).unwrap();
        let after = mu_arc_mass(&w.frame(), &mu, &warc, delta).unwrap();
        assert!(before > 0.0);
        assert!(close(after, (delta * t).exp() * before, 1e-9));
    }
}

#[test]
fn flow_leaves_horocyclic_averages_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let mu = random_measure(&mut rng, 300);
        let u = random_vector(&mut rng);
        let t = rng.gen_range(-2.0..2.0);
        let r = 10f64.powf(rng.gen_range(-0.5..1.5));
        let w = geodesic_flow(&u, t);
        let arc = u.frame().ball_arc(&u, r).unwrap();
        let sub = Arc::new(arc.lo(), arc.len() * rng.gen::<f64>()).unwrap();
        let denom = mu_arc_mass(&u.frame(), &mu, &arc, 0.9).unwrap();
        if denom == 0.0 {
            continue;
        }
        let m0 = mu_arc_mass(&u.frame(), &mu, &sub, 0.9).unwrap() / denom;
        let warc = w.frame().ball_arc(&w, r * t.exp()).unwrap();
        let m1 = mu_arc_mass(&w.frame(), &mu, &sub, 0.9).unwrap()
            / mu_arc_mass(&w.frame(), &mu, &warc, 0.9).unwrap();
        assert!(close(m0, m1, 1e-9));
    }
}

#[test]
fn doubling_of_a_lone_atom_is_one() {
    let u = UnitVector::new(BoundaryPoint::Infinity, BoundaryPoint::Real(0.0), 0.0).unwrap();
    let mu = AtomicBoundaryMeasure::from_atoms(
        vec![(BoundaryPoint::Real(0.1).angle(), 1.0)],
        Point::BASE,
    );
    let d = doubling_ratio(&u, 1.0, &mu, 1.0).unwrap();
    assert_eq!(d.ratio, 1.0);
    assert_eq!(d.flag, DoublingFlag::UnderResolved);
    let far = doubling_ratio(&u, 0.01, &mu, 1.0).unwrap();
    assert_eq!(far.flag, DoublingFlag::Empty);
    assert!(far.ratio.is_infinite());
}

#[test]
fn doubling_saturates_below_the_atom_gap() {
    let f = modular();
    let us = thick_radial_vectors(&f.spec, &f.ball, &f.index, 3, 3.0).unwrap();
    for (_, u) in &us {
        let d = doubling_ratio(u, 1e-9, &f.mu, 1.0).unwrap();
        assert_ne!(d.flag, DoublingFlag::Ok);
        let wide = doubling_ratio(u, 1.0, &f.mu, 1.0).unwrap();
        assert_eq!(wide.flag, DoublingFlag::Ok);
        assert!(wide.ratio >= 1.0 && wide.ratio.is_finite());
    }
}

#[test]
fn thick_radial_vectors_are_thick_and_distinct() {
    let f = modular();
    let us = thick_radial_vectors(&f.spec, &f.ball, &f.index, 20, 3.0).unwrap();
    assert_eq!(us.len(), 20);
    for (i, (word, u)) in us.iter().enumerate() {
        assert_eq!(
            f.index.classify(u.basepoint()).unwrap().tag,
            PositionTag::Thick
        );
        assert!(dist(Point::BASE, u.basepoint()) <= 3.0);
        assert!(radial_point(&f.spec, word)
            .unwrap()
            .approx_eq(u.u_minus, 1e-9));
        for (_, v) in &us[..i] {
            assert!(
                !(v.u_minus.approx_eq(u.u_minus, 1e-12) && v.u_plus.approx_eq(u.u_plus, 1e-12))
            );
        }
    }
}

fn test_vector() -> UnitVector {
    let f = modular();
    UnitVector::nearest_to(
        Point::BASE,
        radial_point(&f.spec, "s.r.s.r.s.r^-1").unwrap(),
        BoundaryPoint::Real(0.3),
    )
    .unwrap()
}

#[test]
fn cusp_fractions_are_bounded_and_monotone() {
    let f = modular();
    let u = test_vector();
    let r_grid: Vec<f64> = (0..=12).map(|k| 0.1 * 10f64.powf(k as f64 / 4.0)).collect();
    let n_grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
    let p = CuspMassProfile::compute(
        &u,
        &r_grid,
        &n_grid,
        &f.mu,
        &f.index,
        1.0,
        &ProfileOptions::default(),
    )
    .unwrap();
    let deepest = f
        .index
        .horoballs
        .iter()
        .map(|h| h.horoball.depth(Point::BASE))
        .fold(f64::MIN, f64::max);
    assert!(deepest.is_finite());
    for row in &p.cells {
        for c in row {
            assert!((0.0..=1.0).contains(&c.fraction));
        }
        for w in row.windows(2) {
            assert!(w[1].fraction <= w[0].fraction);
        }
        assert_eq!(row.last().unwrap().fraction, 0.0);
    }
    // larger balls weigh more
    for w in p.cells.windows(2) {
        assert!(w[1][0].mass >= w[0][0].mass);
    }
    let csv = p.to_csv();
    assert_eq!(csv.lines().count(), 1 + r_grid.len() * n_grid.len());
    assert!(csv.starts_with("r,N,f,mass,atoms,unresolved_fraction,starved,unresolved\n"));
}

#[test]
fn cusp_fraction_matches_brute_force_classification() {
    let f = modular();
    let u = test_vector();
    let frame = u.frame();
    for (r, n) in [(0.5, 0.0), (2.0, 0.5)] {
        let got =
            mean_cusp_fraction(&u, r, n, &f.mu, &f.index, 1.0, &ProfileOptions::default()).unwrap();
        let arc = frame.ball_arc(&u, r).unwrap();
        let rows: Vec<(f64, bool)> =
            f.mu.atoms()
                .par_iter()
                .filter_map(|&(theta, w)| {
                    let xi = BoundaryPoint::from_angle(theta);
                    if !arc.contains(xi) {
                        return None;
                    }
                    let p = frame.basepoint_toward(xi).unwrap();
                    let depth = f
                        .index
                        .horoballs
                        .iter()
                        .map(|h| h.horoball.depth(p))
                        .fold(f64::MIN, f64::max);
                    Some((
                        w * busemann(xi, Point::BASE, p).exp(),
                        depth > 0.0 && depth >= n,
                    ))
                })
                .collect();
        let mass: f64 = rows.iter().map(|r| r.0).sum();
        let deep: f64 = rows.iter().filter(|r| r.1).map(|r| r.0).sum();
        assert!(close(got.mass, mass, 1e-10));
        assert!(
            (got.fraction - deep / mass).abs() < 1e-10,
            "r {r} N {n}: {} vs {}",
            got.fraction,
            deep / mass
        );
    }
}

#[test]
fn summary_takes_supremum_over_vectors() {
    let f = modular();
    let us = thick_radial_vectors(&f.spec, &f.ball, &f.index, 4, 3.0).unwrap();
    let r_grid = [0.3, 3.0, 30.0];
    let n_grid: Vec<f64> = (0..=8).map(|k| k as f64 * 0.5).collect();
    let opts = ProfileOptions::default();
    let profiles: Vec<CuspMassProfile> = us
        .iter()
        .map(|(_, u)| {
            CuspMassProfile::compute(u, &r_grid, &n_grid, &f.mu, &f.index, 1.0, &opts).unwrap()
        })
        .collect();
    let s = CuspMassSummary::new(&profiles, 0.0);
    assert!(s.is_nonincreasing());
    for p in &profiles {
        for (a, b) in p.sup_over_r().iter().zip(&s.sup) {
            assert!(a <= b);
        }
    }
    if let Some(nh) = s.n_hat(0.05) {
        let k = n_grid.iter().position(|&n| n == nh).unwrap();
        assert!(s.sup[k..].iter().all(|&v| v <= 0.05));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_independent_of_witness(seed in any::<u64>(), rx in 0.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_vector(&mut rng);
        let v = sibling(&mut rng, &u);
        let x = random_point(&mut rng, rx);
        let chart = hamenstadt_distance(&u, &v).unwrap();
        let via = hamenstadt_distance_via(&u, &v, x).unwrap();
        prop_assert!(close(chart, via, 1e-9), "{} vs {}", chart, via);
    }

    #[test]
    fn flow_scales_distance(seed in any::<u64>(), t in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_vector(&mut rng);
        let v = sibling(&mut rng, &u);
        let d0 = hamenstadt_distance(&u, &v).unwrap();
        let d1 = hamenstadt_distance(&geodesic_flow(&u, t), &geodesic_flow(&v, t)).unwrap();
        prop_assert!(close(d1, t.exp() * d0, 1e-9));
    }
}
