//! Counts orbit points of a shipped group within a few radii.
//!
//! `cargo run --release --example orbit_count -- configs/modular.json 12`

use horoshadow::group::{enumerate_orbit, load_group_spec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/modular.json").into());
    let t: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10.0);
    let spec = load_group_spec(path.as_ref())?;
    let start = std::time::Instant::now();
    let ball = enumerate_orbit(&spec, t)?;
    println!(
        "{}: {} points within {t} ({} explored, {} collisions) in {:.2?}",
        spec.name,
        ball.len(),
        ball.dedup_report.explored,
        ball.dedup_report.collisions,
        start.elapsed()
    );
    for r in 1..=t.floor() as usize {
        println!("N({r}) = {}", ball.count_within(r as f64));
    }
    Ok(())
}
