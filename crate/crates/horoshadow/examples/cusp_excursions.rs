//! Share of horocyclic mass spent deep in the cusp, `sup_r f(r, N)`, and
//! doubling ratios of Hamenstädt balls.
//!
//! `cargo run --release --example cusp_excursions -- configs/modular.json 12 s.r.s.r.s.r^-1 0.3`
//!
//! Arguments: config, orbit radius, periodic word for `u⁻`, target `u⁺`.

use horoshadow::geometry::Point;
use horoshadow::group::{enumerate_orbit, load_group_spec};
use horoshadow::horoflow::{
    doubling_ratio, CuspMassProfile, CuspMassSummary, ProfileOptions, UnitVector,
};
use horoshadow::patterson::{build_patterson, estimate_delta, CountingProfile, DEFAULT_MIN_COUNT};
use horoshadow::shadows::{parse_target, radial_point, HoroballIndex};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/modular.json").into());
    let radius: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12.0);
    let word = args.next().unwrap_or_else(|| "s.r.s.r.s.r^-1".into());
    let plus = args.next().unwrap_or_else(|| "0.3".into());

    let spec = load_group_spec(path.as_ref())?;
    let ball = enumerate_orbit(&spec, radius)?;
    let profile = CountingProfile::from_ball(&ball);
    let est = estimate_delta(
        &profile,
        profile.default_window(DEFAULT_MIN_COUNT),
        DEFAULT_MIN_COUNT,
    )?;
    let mu = build_patterson(&ball, 1.02 * est.delta_hat, est.delta_hat)?;
    let index = HoroballIndex::from_ball(&spec, &ball, 1e-4)?;
    let u = UnitVector::nearest_to(
        Point::BASE,
        radial_point(&spec, &word)?,
        parse_target(&spec, &plus)?,
    )?;
    println!(
        "delta_hat {:.4}; u = ({}, {}, {:.4}) based at {:?}, {:?}",
        est.delta_hat,
        u.u_minus,
        u.u_plus,
        u.s,
        u.basepoint(),
        index.classify(u.basepoint())?.tag
    );

    let r_grid: Vec<f64> = (0..=16).map(|k| 0.1 * 10f64.powf(k as f64 / 4.0)).collect();
    let n_grid: Vec<f64> = (0..=16).map(|k| k as f64 * 0.5).collect();
    let p = CuspMassProfile::compute(
        &u,
        &r_grid,
        &n_grid,
        &mu,
        &index,
        est.delta_hat,
        &ProfileOptions::default(),
    )?;
    for (i, r) in r_grid.iter().enumerate() {
        let row: Vec<String> = p.cells[i]
            .iter()
            .map(|c| format!("{:.4}", c.fraction))
            .collect();
        println!(
            "r {r:9.3} atoms {:8} unresolved {:.4} f: {}",
            p.cells[i][0].atoms,
            p.cells[i][0].unresolved_fraction,
            row.join(" ")
        );
    }
    println!(
        "sup_r f: {:?}",
        p.sup_over_r()
            .iter()
            .map(|f| format!("{f:.4}"))
            .collect::<Vec<_>>()
    );
    let summary = CuspMassSummary::new(std::slice::from_ref(&p), 2.0 * 3f64.ln());
    println!(
        "N_hat(0.05) = {:?}, slope {:?}",
        summary.n_hat(0.05),
        summary.slope
    );
    for r in &r_grid {
        let d = doubling_ratio(&u, *r, &mu, est.delta_hat)?;
        println!("doubling r {r:9.3}: {:.3} ({:?})", d.ratio, d.flag);
    }
    Ok(())
}
