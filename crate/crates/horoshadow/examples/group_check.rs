//! Ping-pong certificate and element classification for a group config.
//!
//! `cargo run --release --example group_check -- configs/schottky_parabolic.json`

use horoshadow::group::{classify, load_group_spec, ping_pong_check};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/configs/schottky_parabolic.json"
        )
        .into()
    });
    let spec = load_group_spec(path.as_ref())?;
    println!("{}: generators {:?}", spec.name, spec.names());
    for w in ["p", "h", "p.h", "h.p^-1", "p^2.h^-1"] {
        let Ok(word) = spec.parse_word(w) else {
            continue;
        };
        println!("{w:>10}: {:?}", classify(&spec.eval_word(&word)));
    }
    let cert = ping_pong_check(&spec)?;
    for (g, arcs) in &cert.arcs {
        println!("{g}: arcs {arcs:.4?}");
    }
    for c in &cert.checks {
        println!("  {c}");
    }
    Ok(())
}
