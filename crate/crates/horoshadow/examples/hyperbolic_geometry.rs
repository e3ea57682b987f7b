//! Distances, Busemann functions and shadows in the upper half-plane, then a
//! seeded check of the thin-triangle constant and the comparison estimates.
//!
//! `cargo run --release --example hyperbolic_geometry`

use horoshadow::geometry::lemmas::{calibrate_alpha, check_comparison_lemmas, CALIBRATED_ALPHA};
use horoshadow::geometry::{
    busemann, dist, shadow_arc, shadow_visual_radius, BoundaryPoint, GeometryParams, Point,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let o = Point::BASE;
    let x = Point::new(0.0, std::f64::consts::E);
    println!("d(o, ie) = {:.6}", dist(o, x));
    println!(
        "beta_inf(o, ie) = {:.6}",
        busemann(BoundaryPoint::Infinity, o, x)
    );
    println!(
        "beta_0(o, ie) = {:.6}",
        busemann(BoundaryPoint::Real(0.0), o, x)
    );

    let xi = BoundaryPoint::Real(0.5);
    for t in [0.0, 1.0, 2.0, 4.0, 8.0] {
        let arc = shadow_arc(o, xi, t)?;
        println!(
            "shadow of B(xi_o({t}), 1): length {:.3e}, visual radius {:.3e}",
            arc.len(),
            shadow_visual_radius(t)
        );
    }

    let cal = calibrate_alpha(4000, 7);
    println!(
        "thinness over {} triangles: diameter {:.4}, offset {:.4}, alpha {:.2} (shipped {CALIBRATED_ALPHA})",
        cal.samples, cal.max_diameter, cal.max_offset, cal.alpha
    );
    for outcome in check_comparison_lemmas(&GeometryParams::default(), 500, 11) {
        println!(
            "{:<48} {:>5} trials, {} counterexamples, worst margin {:.3e}",
            outcome.name, outcome.trials, outcome.counterexamples, outcome.worst_margin
        );
    }
    Ok(())
}
