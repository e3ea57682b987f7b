use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use horoshadow::geometry::*;
use horoshadow::group::*;
use horoshadow::patterson::*;
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

fn cyclic(matrix: [f64; 4]) -> GroupSpec {
    parse_group_spec(&format!(
        r#"{{"name": "cyclic", "structure": "free_product", "generators": [{{"name": "g", "matrix": {matrix:?}}}]}}"#
    ))
    .unwrap()
}

fn hyperbolic_cyclic(len: f64) -> GroupSpec {
    let (a, d) = ((len / 2.0).exp(), (-len / 2.0).exp());
    cyclic([a, 0.0, 0.0, d])
}

/// `d(o, p^n o) = arccosh(1 + n²/2)` for `p = z + 1`.
fn parabolic_distances(t: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut n = 1.0f64;
    loop {
        let d = (1.0 + n * n / 2.0).acosh();
        if d > t {
            break;
        }
        out.extend([d, d]);
        n += 1.0;
    }
    out
}

#[test]
fn profile_counts_are_consistent() {
    let ball = enumerate_orbit(&config("modular.json"), 9.0).unwrap();
    let p = CountingProfile::from_ball(&ball);
    assert_eq!(p.shells.len(), 9);
    for w in p.cumulative.windows(2) {
        assert!(w[0] <= w[1]);
    }
    let on_edge = ball.points.iter().filter(|q| q.dist == 9.0).count() as u64;
    assert_eq!(p.shells.iter().sum::<u64>() + on_edge, p.total());
    assert_eq!(p.total(), ball.len() as u64);
    let csv = p.to_csv();
    assert!(csv.starts_with("T,shell,cumulative\n"));
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn parabolic_profile_matches_closed_form() {
    let ball = enumerate_orbit(&config("parabolic.json"), 21.0).unwrap();
    let from_ball = CountingProfile::from_ball(&ball);
    let oracle = CountingProfile::from_distances(&parabolic_distances(21.0), 21.0);
    assert_eq!(from_ball.shells, oracle.shells);
    assert_eq!(from_ball.cumulative, oracle.cumulative);

    let est = estimate_delta(&from_ball, (7.0, 20.0), DEFAULT_MIN_COUNT).unwrap();
    assert!((est.delta_hat - 0.5).abs() <= 0.02, "{est:?}");
    assert!(est.stderr > 0.0 && est.stderr < 0.01);
    assert_eq!(est.method, "log_count_ols");
    // N(6) = 41 is below the default minimum count.
    assert_eq!(from_ball.cumulative[6], 41);
    assert!(matches!(
        estimate_delta(&from_ball, (6.0, 20.0), DEFAULT_MIN_COUNT),
        Err(PattersonError::InsufficientData(_))
    ));
    assert!(matches!(
        estimate_delta(&from_ball, (7.0, 40.0), 1),
        Err(PattersonError::BadWindow { .. })
    ));
}

#[test]
fn modular_exponent_is_near_one() {
    let ball = enumerate_orbit(&config("modular.json"), 12.0).unwrap();
    let p = CountingProfile::from_ball(&ball);
    let est = estimate_delta(&p, (6.0, 12.0), DEFAULT_MIN_COUNT).unwrap();
    assert!((0.95..=1.05).contains(&est.delta_hat), "{est:?}");
    let alt = estimate_delta_poincare(&ball, (4.0, 11.0)).unwrap();
    assert!((alt.delta_hat - 1.0).abs() < 0.05, "{alt:?}");
    assert_eq!(alt.method, "poincare_bisection");
}

#[test]
fn hyperbolic_cyclic_exponent_vanishes() {
    let ball = enumerate_orbit(&hyperbolic_cyclic(1.0), 61.0).unwrap();
    let p = CountingProfile::from_ball(&ball);
    let est = estimate_delta(&p, (25.0, 60.0), DEFAULT_MIN_COUNT).unwrap();
    assert!(est.delta_hat.abs() < 0.05, "{est:?}");
}

#[test]
fn growth_condition_examples() {
    let p = CountingProfile::from_distances(&parabolic_distances(21.0), 21.0);
    let report = growth_condition_check(&p, 0.5, (4, 20), 4.0).unwrap();
    assert!(report.passed && report.in_scope);
    assert!(report.d_hat >= 1.0 && report.d_hat <= 4.0);
    assert!(report
        .ratios
        .iter()
        .all(|&(_, r)| (0.25..=4.0).contains(&r)));
    // Shells count about 2 (e^{1/2} - 1) e^{T/2}.
    let asymptotic = 2.0 * (0.5f64.exp() - 1.0);
    assert!((report.ratios.last().unwrap().1 - asymptotic).abs() < 0.01);

    let half: Vec<f64> = parabolic_distances(21.0)
        .into_iter()
        .skip(1)
        .step_by(2)
        .collect();
    let half = CountingProfile::from_distances(&half, 21.0);
    assert!(
        growth_condition_check(&half, 0.5, (4, 20), 4.0)
            .unwrap()
            .passed
    );

    let sparse =
        CountingProfile::from_ball(&enumerate_orbit(&hyperbolic_cyclic(2.0), 21.0).unwrap());
    assert!(matches!(
        growth_condition_check(&sparse, 0.0, (4, 20), 4.0),
        Err(PattersonError::EmptyShell { index: 5 })
    ));
    let dense =
        CountingProfile::from_ball(&enumerate_orbit(&hyperbolic_cyclic(0.5), 21.0).unwrap());
    let r = growth_condition_check(&dense, 0.0, (4, 20), 4.0).unwrap();
    assert!(!r.in_scope && !r.passed);
}

#[test]
fn poincare_partial_sums() {
    let trivial = enumerate_orbit(&config("parabolic.json"), 0.0).unwrap();
    assert_eq!(poincare_partial(&trivial, 0.7), 1.0);

    let ball = enumerate_orbit(&config("parabolic.json"), 24.0).unwrap();
    let upto = |t: f64| poincare_partial(&ball.truncate(t), 0.7);
    let full = upto(24.0);
    for t in 8..=20 {
        let tail = full - upto(t as f64);
        assert!(tail <= 10.0 * (-0.2 * t as f64).exp(), "T={t}: {tail}");
    }
    // At s = 0.4 the shell weights keep growing.
    let shell = |k: usize| -> f64 {
        ball.points
            .iter()
            .filter(|p| p.dist.floor() as usize == k)
            .map(|p| (-0.4 * p.dist).exp())
            .sum()
    };
    for k in 6..21 {
        assert!(shell(k + 2) > shell(k), "shell {k}");
    }
    let slow = |t: f64| poincare_partial(&ball.truncate(t), 0.4);
    assert!(slow(24.0) - slow(16.0) > slow(16.0) - slow(8.0));
}

#[test]
fn trivial_ball_gives_unit_atom() {
    let ball = enumerate_orbit(&config("parabolic.json"), 0.0).unwrap();
    let mu = build_patterson(&ball, 1.0, 0.5).unwrap();
    assert_eq!(mu.atoms(), &[(0.0, 1.0)]);
    assert!(matches!(
        build_patterson(&ball, 0.5, 0.5),
        Err(PattersonError::ExponentTooSmall { .. })
    ));
}

fn schottky_measure(t: f64) -> AtomicBoundaryMeasure {
    let ball = enumerate_orbit(&config("schottky_parabolic.json"), t).unwrap();
    build_patterson(&ball, 0.6, 0.5726).unwrap()
}

#[test]
fn mirror_symmetric_group_gives_mirror_symmetric_measure() {
    let mu = schottky_measure(14.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let lo = rng.gen_range(0.0..TAU);
        let len = rng.gen_range(1e-3..TAU - 1e-3);
        let arc = Arc::new(lo, len).unwrap();
        let mirror = Arc::new(TAU - lo - len, len).unwrap();
        assert!((mu.measure_of_open_arc(&arc) - mu.measure_of_open_arc(&mirror)).abs() < 1e-12);
    }
}

#[test]
fn modular_half_circles_balance() {
    let ball = enumerate_orbit(&config("modular.json"), 12.0).unwrap();
    let mu = build_patterson(&ball, 1.02, 0.998).unwrap();
    let a = mu.measure_of_open_arc(&Arc::new(0.0, PI).unwrap());
    let b = mu.measure_of_open_arc(&Arc::new(PI, PI).unwrap());
    assert!((a / b - 1.0).abs() < 0.05, "{a} vs {b}");
    assert!(mu.tail_fraction > 0.0 && mu.tail_fraction < 1.0);
}

#[test]
fn measure_round_trips_through_file() {
    let mut mu = schottky_measure(10.0);
    mu.spec_hash = config("schottky_parabolic.json").hash;
    let mut buf = Vec::new();
    write_measure(&mu, &mut buf).unwrap();
    let back = read_measure(&buf[..]).unwrap();
    assert_eq!(back.atoms(), mu.atoms());
    assert_eq!(back.s_used, mu.s_used);
    assert_eq!(back.normalization, mu.normalization);
    assert_eq!(back.tail_fraction, mu.tail_fraction);
    assert_eq!(back.spec_hash, mu.spec_hash);
    let mut again = Vec::new();
    write_measure(&back, &mut again).unwrap();
    assert_eq!(buf, again);
    assert!(read_measure("angle,weight\n0,1\n".as_bytes()).is_err());
}

#[test]
fn construction_is_deterministic() {
    let a = schottky_measure(12.0);
    let b = schottky_measure(12.0);
    assert_eq!(a.atoms(), b.atoms());
    assert_eq!(a.normalization.to_bits(), b.normalization.to_bits());
}

#[test]
fn conformal_reweighting() {
    let mu = schottky_measure(12.0);
    let o = mu.basepoint;
    let same = conformal_reweight(&mu, o, 0.57);
    assert_eq!(same.atoms(), mu.atoms());

    let x = Point::new(0.4, 0.3);
    let y = Point::new(-1.0, 2.5);
    let back = conformal_reweight(
        &conformal_reweight(&conformal_reweight(&mu, x, 0.57), y, 0.57),
        o,
        0.57,
    );
    for (p, q) in back.atoms().iter().zip(mu.atoms()) {
        assert_eq!(p.0, q.0);
        assert!((p.1 - q.1).abs() <= 1e-12 * q.1.max(1e-300) + 1e-300);
    }
    assert!(!conformal_reweight(&mu, x, 0.57).normalized);

    let far = Point::new(0.0, 2.0);
    let d = dist(o, far);
    let mass = conformal_reweight(&mu, far, 0.57).total();
    assert!(mass >= (-0.57 * d).exp() && mass <= (0.57 * d).exp());
}

#[test]
fn pushforward_relabels_atoms() {
    let mu = schottky_measure(10.0);
    let id = pushforward(&mu, &Mobius::IDENTITY);
    assert_eq!(id.atoms(), mu.atoms());
    let g = Mobius::normalized(2.0, 1.0, 1.0, 1.0).unwrap();
    let moved = pushforward(&mu, &g);
    assert_eq!(moved.basepoint, g.apply(mu.basepoint));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let arc = Arc::new(rng.gen_range(0.0..TAU), rng.gen_range(0.01..6.0)).unwrap();
        let image = g.apply_arc(&arc);
        assert!((moved.measure_of_arc(&image) - mu.measure_of_arc(&arc)).abs() < 1e-12);
    }
}

#[test]
fn quasi_invariance_defect_shrinks_with_radius() {
    let spec = config("modular.json");
    let big = enumerate_orbit(&spec, 11.0).unwrap();
    let g = spec.eval_word(&spec.parse_word("r").unwrap());
    let mut last = f64::INFINITY;
    for t in [8.0, 9.0, 10.0, 11.0] {
        let mu = build_patterson(&big.truncate(t), 1.02, 0.998).unwrap();
        let defect = binned_total_variation(
            &pushforward(&mu, &g),
            &conformal_reweight(&mu, g.apply(mu.basepoint), 1.02),
            128,
        );
        assert!(defect < last, "T={t}: {defect} !< {last}");
        last = defect;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partitions_add_up(cuts in proptest::collection::vec(0.0f64..TAU, 1..12), start in 0.0f64..TAU) {
        let ball = enumerate_orbit(&config("modular.json"), 6.0).unwrap();
        let mu = build_patterson(&ball, 1.1, 1.0).unwrap();
        let mut offsets: Vec<f64> = cuts.iter().map(|c| c / TAU * (TAU - 1e-9)).collect();
        offsets.push(0.0);
        offsets.sort_by(f64::total_cmp);
        offsets.dedup();
        let mut total = 0.0;
        for (i, off) in offsets.iter().enumerate() {
            let next = offsets.get(i + 1).copied().unwrap_or(TAU);
            total += mu.measure_of_arc(&Arc::new(start + off, next - off).unwrap());
        }
        prop_assert!((total - 1.0).abs() < 1e-12, "{}", total);
        let eq: f64 = Arc::partition(cuts.len() * 7).iter().map(|a| mu.measure_of_arc(a)).sum();
        prop_assert!((eq - 1.0).abs() < 1e-12);
    }
}
