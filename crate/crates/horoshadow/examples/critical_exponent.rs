//! Orbit-growth exponent of a group by two estimators, and the growth
//! condition for the stabilizer of its cusp.
//!
//! `cargo run --release --example critical_exponent -- configs/modular.json 12`

use horoshadow::group::{enumerate_orbit, load_group_spec};
use horoshadow::patterson::{
    cyclic_orbit_distances, estimate_delta, estimate_delta_poincare, growth_condition_check,
    CountingProfile, DEFAULT_MIN_COUNT,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/modular.json").into());
    let radius: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12.0);
    let spec = load_group_spec(path.as_ref())?;
    let ball = enumerate_orbit(&spec, radius)?;
    let profile = CountingProfile::from_ball(&ball);
    let window = profile.default_window(DEFAULT_MIN_COUNT);
    let ols = estimate_delta(&profile, window, DEFAULT_MIN_COUNT)?;
    let poincare = estimate_delta_poincare(&ball, window)?;
    println!(
        "{} points within {radius}; window {:?}: log-count slope {:.4} ± {:.4}, Poincaré root {:.4}",
        ball.len(),
        window,
        ols.delta_hat,
        ols.stderr,
        poincare.delta_hat
    );

    let Some(mark) = spec.cusp_mark().or(spec.parabolic_marks.first()) else {
        println!("no parabolic mark");
        return Ok(());
    };
    let dists = cyclic_orbit_distances(&mark.m, spec.basepoint, 30.0);
    let cusp = CountingProfile::from_distances(&dists, 30.0);
    let est = estimate_delta(&cusp, (6.0, 29.0), 1)?;
    let report = growth_condition_check(&cusp, est.delta_hat, (4, 20), 4.0)?;
    println!(
        "stabilizer of {}: delta_pi {:.4}, max ratio {:.3} against cap {} -> {}",
        mark.name,
        est.delta_hat,
        report.d_hat,
        report.cap,
        if report.passed { "holds" } else { "fails" }
    );
    Ok(())
}
