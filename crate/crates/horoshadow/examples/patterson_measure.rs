//! Estimates the critical exponent of a shipped group and builds the atomic
//! Patterson measure at `s = 1.02 δ̂`.
//!
//! `cargo run --release --example patterson_measure -- configs/modular.json 12`

use horoshadow::geometry::Arc;
use horoshadow::group::{enumerate_orbit, load_group_spec};
use horoshadow::patterson::{build_patterson, estimate_delta, CountingProfile, DEFAULT_MIN_COUNT};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/modular.json").into());
    let t: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12.0);
    let spec = load_group_spec(path.as_ref())?;
    let ball = enumerate_orbit(&spec, t)?;
    let profile = CountingProfile::from_ball(&ball);
    let window = profile.default_window(DEFAULT_MIN_COUNT);
    let est = estimate_delta(&profile, window, DEFAULT_MIN_COUNT)?;
    println!(
        "{}: delta_hat = {:.4} ± {:.4} over {window:?}",
        spec.name, est.delta_hat, est.stderr
    );
    let s = 1.02 * est.delta_hat;
    let mu = build_patterson(&ball, s, est.delta_hat)?;
    println!(
        "s = {s:.4}: {} atoms, P_T(s) = {:.3}, estimated tail fraction {:.3}",
        mu.len(),
        mu.normalization,
        mu.tail_fraction
    );
    let atom_at_zero: f64 = mu
        .atoms()
        .iter()
        .take_while(|a| a.0 == 0.0)
        .map(|a| a.1)
        .sum();
    println!("mass of atoms at angle 0: {atom_at_zero:.4}");
    for (i, arc) in Arc::partition(8).iter().enumerate() {
        println!("octant {i}: {:.4}", mu.measure_of_arc(arc));
    }
    Ok(())
}
