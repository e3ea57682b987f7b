//! Shadow masses along a ray compared with the Shadow Lemma profile.
//!
//! `cargo run --release --example shadow_lemma -- configs/schottky_parabolic.json 22 cusp:h 0.25`
//!
//! Arguments: config, orbit radius, target (`radial:WORD`, `cusp:WORD` or a
//! boundary point), step of the t grid.

use horoshadow::group::{enumerate_orbit, load_group_spec};
use horoshadow::patterson::{
    build_counting_measure, build_patterson, estimate_delta, CountingProfile, DEFAULT_MIN_COUNT,
};
use horoshadow::shadows::{parse_target, verify_shadow_lemma, HoroballIndex, ShadowOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/modular.json").into());
    let radius: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12.0);
    let target = args.next().unwrap_or_else(|| "cusp:".into());
    let step: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.25);

    let spec = load_group_spec(path.as_ref())?;
    let ball = enumerate_orbit(&spec, radius)?;
    let profile = CountingProfile::from_ball(&ball);
    let est = estimate_delta(
        &profile,
        profile.default_window(DEFAULT_MIN_COUNT),
        DEFAULT_MIN_COUNT,
    )?;
    // Set SHADOW_MEASURE=counting to use the uniform measure on the ball.
    let counting = std::env::var("SHADOW_MEASURE").as_deref() == Ok("counting");
    let build = |b: &horoshadow::group::OrbitBall| {
        if counting {
            build_counting_measure(b)
        } else {
            build_patterson(b, 1.02 * est.delta_hat, est.delta_hat)
        }
    };
    let mu = build(&ball)?;
    let mu_ref = build(&ball.truncate(radius - 1.0))?;
    let index = HoroballIndex::from_ball(&spec, &ball, 1e-4)?;
    let xi = parse_target(&spec, &target)?;
    println!(
        "delta_hat {:.4}, {} horoballs complete above {:.2e}, target {xi}",
        est.delta_hat,
        index.len(),
        index.complete_above
    );

    let grid: Vec<f64> = (0..)
        .map(|k| k as f64 * step)
        .take_while(|&t| t <= radius)
        .collect();
    let report = verify_shadow_lemma(
        &mu,
        xi,
        &grid,
        &index,
        est.delta_hat,
        0.5,
        &ShadowOptions {
            reference: Some(&mu_ref),
            ..Default::default()
        },
    )?;
    print!("{}", report.to_csv());
    println!("{}", serde_json::to_string_pretty(&report.summary)?);
    Ok(())
}
