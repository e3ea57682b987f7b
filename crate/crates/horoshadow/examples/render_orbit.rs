//! Writes an SVG of an orbit in the disk chart with its cusp horoballs.
//!
//! `cargo run --release --example render_orbit -- configs/modular.json 8 orbit.svg`

use horoshadow::cli::Canvas;
use horoshadow::group::{enumerate_orbit, load_group_spec};
use horoshadow::shadows::HoroballIndex;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/modular.json").into());
    let radius: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8.0);
    let out = args.next().unwrap_or_else(|| "orbit.svg".into());
    let spec = load_group_spec(path.as_ref())?;
    let ball = enumerate_orbit(&spec, radius)?;
    let mut canvas = Canvas::new();
    if spec.cusp.is_some() {
        let index = HoroballIndex::from_ball(&spec, &ball, 0.005)?;
        for h in &index.horoballs {
            canvas.horoball(&h.horoball, "#3366cc");
        }
        println!("{} horoballs", index.len());
    }
    for p in &ball.points {
        canvas.point(p.image, 1.2, "#000000");
    }
    std::fs::write(
        &out,
        canvas.finish(&format!("{} orbit, T = {radius}", spec.name), "example"),
    )?;
    println!("{} points written to {out}", ball.len());
    Ok(())
}
