//! Intersections of the horocycle of a unit vector with horoballs, and the
//! Hamenstädt balls they correspond to.
//!
//! `cargo run --release --example horoball_intersection`

use horoshadow::geometry::{BoundaryPoint, Horoball, Point};
use horoshadow::horoflow::{hamenstadt_distance, horoball_ball_intersection, UnitVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u = UnitVector::at(Point::BASE, BoundaryPoint::Real(0.0));
    let frame = u.frame();
    println!(
        "u based at {:?}, horocycle centred at {:?}",
        u.basepoint(),
        u.u_minus
    );
    for diameter in [0.5, 1.0, 2.0, 4.0, 16.0] {
        let ball = Horoball::tangent_disk(0.0, diameter)?;
        match horoball_ball_intersection(&frame, &ball)? {
            None => println!("diameter {diameter:>5}: misses the horocycle"),
            Some(hit) => println!(
                "diameter {diameter:>5}: depth {:.4}, radius {:.4}, top at {:?}",
                hit.h,
                hit.radius,
                hit.v_top.basepoint()
            ),
        }
    }
    for x in [-2.0, -0.5, 0.5, 3.0] {
        let v = frame.vector_toward(BoundaryPoint::Real(x))?;
        println!("d_H(u, v -> {x:>4}) = {:.4}", hamenstadt_distance(&u, &v)?);
    }
    Ok(())
}
