use std::path::PathBuf;
use std::sync::OnceLock;

use horoshadow::geometry::*;
use horoshadow::group::*;
use horoshadow::patterson::*;
use horoshadow::shadows::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(name: &str) -> GroupSpec {
    load_group_spec(
        &PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("configs")
            .join(name),
    )
    .unwrap()
}

struct Fixture {
    spec: GroupSpec,
    ball: OrbitBall,
    index: HoroballIndex,
    mu: AtomicBoundaryMeasure,
}

fn modular() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let spec = config("modular.json");
        let ball = enumerate_orbit(&spec, 9.0).unwrap();
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

fn schottky() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let spec = config("schottky_parabolic.json");
        let ball = enumerate_orbit(&spec, 18.0).unwrap();
        let index = HoroballIndex::from_ball(&spec, &ball, 1e-4).unwrap();
        let mu = build_patterson(&ball, 0.6, 0.57).unwrap();
        Fixture {
            spec,
            ball,
            index,
            mu,
        }
    })
}

/// Depth in the modular cusp family by brute force over reduced fractions:
/// the image of `{Im ≥ 2}` tangent at `p/q` has Euclidean diameter `1/(2q²)`.
fn ford_depth(x: Point, q_max: i64) -> (f64, Option<(i64, i64)>) {
    let mut best = ((x.im / 2.0).ln(), None);
    let gcd = |mut a: i64, mut b: i64| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a.abs()
    };
    for q in 1..=q_max {
        let centre = (x.re * q as f64).round() as i64;
        for p in centre - 2..=centre + 2 {
            if gcd(p, q) != 1 {
                continue;
            }
            let r = p as f64 / q as f64;
            let diameter = 1.0 / (2.0 * (q * q) as f64);
            let d2 = (x.re - r).powi(2) + x.im * x.im;
            let depth = (diameter * x.im / d2).ln();
            if depth > best.0 {
                best = (depth, Some((p, q)));
            }
        }
    }
    best
}

#[test]
fn modular_positions_on_examples() {
    let f = modular();
    let high = f.index.classify(Point::new(0.0, 5.0)).unwrap();
    let PositionTag::Cusp(i) = high.tag else {
        panic!("{high:?}")
    };
    assert!(f.index.horoballs[i].horoball.center.is_infinite());
    assert!((high.depth - (5.0f64 / 2.0).ln()).abs() < 1e-12);

    let base = f.index.classify(Point::BASE).unwrap();
    assert_eq!(base.tag, PositionTag::Thick);
    assert_eq!(base.depth, 0.0);

    let low = f.index.classify(Point::new(0.5, 0.1)).unwrap();
    let (oracle, at) = ford_depth(Point::new(0.5, 0.1), 50);
    assert_eq!(at, Some((1, 2)));
    let PositionTag::Cusp(i) = low.tag else {
        panic!("{low:?}")
    };
    assert!(f.index.horoballs[i]
        .horoball
        .center
        .approx_eq(BoundaryPoint::Real(0.5), 1e-12));
    assert!((low.depth - oracle).abs() < 1e-9);
    assert!((low.depth - 1.25f64.ln()).abs() < 1e-9);
}

#[test]
fn horoball_boundary_counts_as_thick() {
    let index = HoroballIndex::new(
        vec![IndexedHoroball {
            horoball: Horoball::above(2.0).unwrap(),
            gamma: Isometry::identity(),
            diameter: 2.0 / 3.0,
        }],
        1e-4,
    );
    let on = index.classify(Point::new(0.3, 2.0)).unwrap();
    assert_eq!(on.tag, PositionTag::Thick);
    assert_eq!(on.depth, 0.0);
    let inside = index.classify(Point::new(0.3, 2.5)).unwrap();
    assert_eq!(inside.tag, PositionTag::Cusp(0));
}

#[test]
fn overlapping_horoballs_are_reported() {
    let ball = |h: Horoball| IndexedHoroball {
        diameter: h.disk_diameter(),
        horoball: h,
        gamma: Isometry::identity(),
    };
    let index = HoroballIndex::new(
        vec![
            ball(Horoball::above(1.0).unwrap()),
            ball(Horoball::tangent_disk(0.0, 2.0).unwrap()),
        ],
        1e-4,
    );
    let err = index.classify(Point::new(0.0, 1.5)).unwrap_err();
    assert!(matches!(err, ShadowError::OverlappingHoroballs { .. }));
}

#[test]
fn modular_positions_match_ford_oracle() {
    let f = modular();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..3000 {
        let x = Point::new(
            rng.gen_range(-0.5..0.5),
            (rng.gen_range(-5.0f64..1.5)).exp(),
        );
        let class = f.index.classify(x).unwrap();
        if class.tag == PositionTag::Unresolved {
            continue;
        }
        checked += 1;
        let (oracle, _) = ford_depth(x, 400);
        match class.tag {
            PositionTag::Thick => assert!(oracle <= 1e-12, "{x:?} oracle depth {oracle}"),
            PositionTag::Cusp(_) => assert!((class.depth - oracle).abs() < 1e-9, "{x:?}"),
            PositionTag::Unresolved => unreachable!(),
        }
    }
    assert!(checked > 2000, "{checked}");
}

#[test]
fn index_certifies_its_horizon() {
    let f = modular();
    assert!(f.index.complete_above >= 1e-4);
    assert!(f
        .index
        .horoballs
        .iter()
        .all(|h| h.diameter >= f.index.complete_above));
    let g = |c: f64| f.index.horoballs.iter().filter(|h| h.diameter >= c).count();
    assert!(g(0.1) < g(0.01) && g(0.01) < g(0.001));
    // Every Ford disk tangent at p/q in [0, 1) with diameter above the
    // horizon is listed.
    let listed = |r: f64| {
        f.index
            .horoballs
            .iter()
            .any(|h| h.horoball.center.approx_eq(BoundaryPoint::Real(r), 1e-12))
    };
    for q in 1..60i64 {
        for p in 0..q {
            if (1..=p).rev().any(|k| p % k == 0 && q % k == 0 && k > 1) {
                continue;
            }
            let h =
                Horoball::tangent_disk(p as f64 / q as f64, 1.0 / (2.0 * (q * q) as f64)).unwrap();
            if h.disk_diameter() >= f.index.complete_above * 1.001 {
                assert!(listed(p as f64 / q as f64), "{p}/{q}");
            }
        }
    }
}

#[test]
fn spec_without_cusp_is_rejected() {
    let spec = parse_group_spec(
        r#"{"name": "h", "structure": "free_product", "generators": [{"name": "h", "matrix": [2, 0, 0, 0.5]}]}"#,
    )
    .unwrap();
    let ball = enumerate_orbit(&spec, 3.0).unwrap();
    assert!(matches!(
        HoroballIndex::from_ball(&spec, &ball, 1e-4),
        Err(ShadowError::NoCusp)
    ));
}

#[test]
fn radial_point_examples() {
    let f = schottky();
    let h = f.spec.eval_word(&f.spec.parse_word("h").unwrap());
    let Classification::Hyperbolic { attracting, .. } = classify(&h) else {
        panic!()
    };
    assert_eq!(radial_point(&f.spec, "h").unwrap(), attracting);
    assert!(matches!(
        radial_point(&f.spec, "p"),
        Err(ShadowError::BadPattern { .. })
    ));
    assert!(matches!(
        radial_point(&f.spec, "p.h.p^-1"),
        Err(ShadowError::BadPattern { .. })
    ));
    assert!(radial_point(&f.spec, "").is_err());
    let m = modular();
    assert!(radial_point(&m.spec, "s.r").is_err());
    assert!(radial_point(&m.spec, "s").is_err());
}

#[test]
fn periodic_word_target_is_radial() {
    let spec = config("schottky_parabolic.json");
    let xi = radial_point(&spec, "p.h").unwrap();
    let g = spec.eval_word(&spec.parse_word("p.h").unwrap());
    let bound = 2.0 * dist(Point::BASE, g.apply(Point::BASE)) + 1.0;
    let ball = enumerate_orbit(&spec, 24.0).unwrap();
    for k in 1..=20 {
        let x = point_on_ray(Point::BASE, xi, k as f64).unwrap();
        let nearest = ball
            .points
            .iter()
            .map(|p| dist(p.image, x))
            .fold(f64::INFINITY, f64::min);
        assert!(nearest <= bound, "t = {k}: {nearest} > {bound}");
    }
}

#[test]
fn targets_parse() {
    let f = schottky();
    let h = f.spec.eval_word(&f.spec.parse_word("h").unwrap());
    let cusp = parse_target(&f.spec, "cusp:h").unwrap();
    assert!(cusp.approx_eq(h.apply_boundary(BoundaryPoint::Infinity), 1e-15));
    assert!(
        (match cusp {
            BoundaryPoint::Real(r) => r,
            _ => panic!(),
        } - 1.0 / 2.0f64.tanh())
        .abs()
            < 1e-12
    );
    assert_eq!(
        parse_target(&f.spec, "cusp:").unwrap(),
        BoundaryPoint::Infinity
    );
    assert_eq!(
        parse_target(&f.spec, "0.25").unwrap(),
        BoundaryPoint::Real(0.25)
    );
    assert_eq!(
        parse_target(&f.spec, "radial:h").unwrap(),
        radial_point(&f.spec, "h").unwrap()
    );
    assert!(parse_target(&f.spec, "radial:p").is_err());
    assert!(parse_target(&f.spec, "nowhere").is_err());
}

fn grid(step: f64, max: f64) -> Vec<f64> {
    (0..)
        .map(|k| k as f64 * step)
        .take_while(|&t| t <= max)
        .collect()
}

#[test]
fn shadow_at_time_zero_is_a_half_circle() {
    let f = modular();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let xi = BoundaryPoint::from_angle(rng.gen_range(0.0..std::f64::consts::TAU));
        let report = verify_shadow_lemma(
            &f.mu,
            xi,
            &[0.0],
            &f.index,
            1.0,
            0.5,
            &ShadowOptions::default(),
        )
        .unwrap();
        let nu = report.rows[0].nu;
        assert!(nu <= 1.0 + 1e-12);
        let half = Arc::new(
            xi.angle() - std::f64::consts::FRAC_PI_2,
            std::f64::consts::PI,
        )
        .unwrap();
        let direct = f.mu.measure_of_arc(&half);
        assert!((nu - direct).abs() < 1e-9, "{nu} vs {direct}");
    }
}

#[test]
fn rows_match_direct_atom_sums() {
    let f = schottky();
    let xi = parse_target(&f.spec, "cusp:h").unwrap();
    let t = grid(0.5, 18.0);
    let report = verify_shadow_lemma(
        &f.mu,
        xi,
        &t,
        &f.index,
        0.57,
        0.5,
        &ShadowOptions::default(),
    )
    .unwrap();
    for row in &report.rows {
        let arc = shadow_arc(Point::BASE, xi, row.t).unwrap();
        let inside: Vec<f64> =
            f.mu.atoms()
                .iter()
                .filter(|a| arc.contains_angle(a.0))
                .map(|a| a.1)
                .collect();
        assert_eq!(inside.len(), row.atoms);
        let direct: f64 = inside.iter().sum();
        assert!(
            (direct - row.nu).abs() <= 1e-12 + 1e-9 * direct,
            "t = {}",
            row.t
        );
        if row.atoms == 0 {
            assert_eq!(row.flag, RowFlag::Starved);
        }
        if row.nu > 0.0 {
            assert!(row.residual.is_finite());
        }
    }
    // Slope recomputed from the direct sums.
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| {
            r.flag == RowFlag::Ok
                && matches!(r.position.tag, PositionTag::Cusp(_))
                && r.position.depth >= 1.0
        })
        .map(|r| {
            let arc = shadow_arc(Point::BASE, xi, r.t).unwrap();
            let direct: f64 =
                f.mu.atoms()
                    .iter()
                    .filter(|a| arc.contains_angle(a.0))
                    .map(|a| a.1)
                    .sum();
            (r.position.depth, direct.ln() + 0.57 * r.t)
        })
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let fit = report.summary.cusp_slope.as_ref().unwrap();
    assert_eq!(fit.rows, pts.len());
    assert!((fit.slope - sxy / sxx).abs() < 1e-9);
    assert!(report.summary.flagged_rows > 0);
    assert_eq!(
        report.summary.usable_rows + report.summary.flagged_rows,
        report.rows.len()
    );
}

#[test]
fn cusp_ray_depth_grows_linearly() {
    let f = modular();
    let report = verify_shadow_lemma(
        &f.mu,
        BoundaryPoint::Real(0.0),
        &grid(0.25, 6.0),
        &f.index,
        1.0,
        0.5,
        &ShadowOptions::default(),
    )
    .unwrap();
    for row in &report.rows {
        // The ray toward 0 enters the disk of diameter 1/2 at 0 at time ln 2.
        let expected = (row.t - 2.0f64.ln()).max(0.0);
        assert!((row.position.depth - expected).abs() < 1e-9, "{row:?}");
        assert_eq!(row.position.tag == PositionTag::Thick, expected == 0.0);
    }
    assert!((report.summary.target_slope - 0.0).abs() < 1e-15);
}

#[test]
fn reference_measure_flags_drift() {
    let f = schottky();
    let xi = parse_target(&f.spec, "cusp:h").unwrap();
    let reference = build_patterson(&f.ball.truncate(17.0), 0.6, 0.57).unwrap();
    let options = ShadowOptions {
        reference: Some(&reference),
        ..Default::default()
    };
    let report =
        verify_shadow_lemma(&f.mu, xi, &grid(0.5, 18.0), &f.index, 0.57, 0.5, &options).unwrap();
    for row in &report.rows {
        let drift = row.drift.unwrap();
        if row.flag == RowFlag::Ok {
            assert!(drift.abs() <= DEFAULT_MAX_LOG_DRIFT);
        }
    }
    assert!(report.rows.iter().any(|r| r.flag == RowFlag::Unconverged));
    let csv = report.to_csv();
    assert!(csv.starts_with("t,position,depth,nu,atoms,residual,drift,flag\n"));
    assert_eq!(csv.lines().count(), report.rows.len() + 1);
}

#[test]
fn pinned_atoms_are_reported() {
    // The axis of s.r.s.r^-1 passes through the basepoint, so its powers put
    // atoms exactly at the target.
    let f = modular();
    let xi = radial_point(&f.spec, "s.r.s.r^-1").unwrap();
    let report = verify_shadow_lemma(
        &f.mu,
        xi,
        &[0.0, 5.0],
        &f.index,
        1.0,
        0.5,
        &ShadowOptions::default(),
    )
    .unwrap();
    assert!(report.summary.mass_at_target > 0.0);
    assert!(report.rows[1].nu >= report.summary.mass_at_target);
    let other = radial_point(&f.spec, "s.r.s.r.s.r^-1").unwrap();
    let report = verify_shadow_lemma(
        &f.mu,
        other,
        &[0.0],
        &f.index,
        1.0,
        0.5,
        &ShadowOptions::default(),
    )
    .unwrap();
    assert_eq!(report.summary.mass_at_target, 0.0);
}

#[test]
fn shadows_need_the_standard_basepoint() {
    let f = modular();
    let moved = conformal_reweight(&f.mu, Point::new(0.0, 2.0), 1.0);
    let err = verify_shadow_lemma(
        &moved,
        BoundaryPoint::Real(0.0),
        &[1.0],
        &f.index,
        1.0,
        0.5,
        &ShadowOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, ShadowError::UnsupportedBasepoint(_)));
}

#[test]
fn shadow_masses_are_equivariant() {
    let f = schottky();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let few: Vec<&OrbitPoint> = f.ball.points.iter().filter(|p| p.dist < 6.0).collect();
    for _ in 0..200 {
        let g = &few[rng.gen_range(0..few.len())].gamma;
        let xi = BoundaryPoint::from_angle(rng.gen_range(0.0..std::f64::consts::TAU));
        let t = rng.gen_range(0.0..8.0);
        let arc = shadow_arc(Point::BASE, xi, t).unwrap();
        let image_arc = shadow_arc(g.apply(Point::BASE), g.apply_boundary(xi), t).unwrap();
        let pushed = pushforward(&f.mu, &g.m);
        // Atoms within rounding distance of an endpoint may switch sides.
        let (a, b) = arc.endpoints();
        let near_end =
            f.mu.atoms()
                .iter()
                .any(|x| angle_gap(x.0, a.angle()) < 1e-9 || angle_gap(x.0, b.angle()) < 1e-9);
        if near_end {
            continue;
        }
        let lhs = pushed.measure_of_arc(&image_arc);
        let rhs = f.mu.measure_of_arc(&arc);
        assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs), "{lhs} vs {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shadow_mass_is_nonincreasing(theta in 0.0..std::f64::consts::TAU, step in 0.05f64..0.7) {
        let f = modular();
        let xi = BoundaryPoint::from_angle(theta);
        let report = verify_shadow_lemma(&f.mu, xi, &grid(step, 9.0), &f.index, 1.0, 0.5, &ShadowOptions::default()).unwrap();
        for w in report.rows.windows(2) {
            prop_assert!(w[1].nu <= w[0].nu + 1e-15);
            prop_assert!(w[1].atoms <= w[0].atoms);
        }
    }

    #[test]
    fn nearby_targets_are_bracketed(theta in 0.0..std::f64::consts::TAU, t in 2.5f64..7.0, u in 0.0f64..1.0) {
        let f = schottky();
        let params = GeometryParams::default();
        let k1 = params.k1();
        let xi = BoundaryPoint::from_angle(theta);
        let inner = shadow_arc(Point::BASE, xi, t + k1 + params.alpha).unwrap();
        let eta = BoundaryPoint::from_angle(inner.lo() + u * inner.len());
        let small = shadow_arc(Point::BASE, eta, t + k1).unwrap();
        let middle = shadow_arc(Point::BASE, xi, t).unwrap();
        let large = shadow_arc(Point::BASE, eta, (t - k1).max(0.0)).unwrap();
        prop_assert!(middle.contains_arc(&small, 1e-12));
        prop_assert!(large.contains_arc(&middle, 1e-12));
        let m = |a: &Arc| f.mu.measure_of_arc(a);
        prop_assert!(m(&small) <= m(&middle) + 1e-15);
        prop_assert!(m(&middle) <= m(&large) + 1e-15);
    }
}
