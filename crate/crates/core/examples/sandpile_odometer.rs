//! Stabilizes a pile of sand on an open box and prints the odometer.
//!
//! `cargo run --example sandpile_odometer -- [mass] [L]`

use monoperc::automata::{abelian_check, default_cap, sandpile_stabilize, ParticleConfig};
use monoperc::lattice::Geometry;

fn main() -> monoperc::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer"));
    let mass = args.next().unwrap_or(30);
    let side = args.next().unwrap_or(8) as usize;

    let g = Geometry::open_box(2, side)?;
    let centre = g.index(&g.center())?;
    let xi = ParticleConfig::point(g.len(), centre, mass as f64)?;
    let r = sandpile_stabilize(&xi, &g, 4, default_cap(&g))?;

    println!("{mass} grains at {} on a {side}x{side} box", g.center());
    println!("topplings {}, toppled sites {}, lost to the boundary {}", r.odometer.total(), r.omega.count_open(), r.dissipated);
    println!("odometer:");
    for y in (0..side).rev() {
        let row: Vec<String> = (0..side).map(|x| format!("{:3}", r.odometer.get(x + y * side))).collect();
        println!("  {}", row.join(""));
    }
    println!("final heights:");
    for y in (0..side).rev() {
        let row: Vec<String> = (0..side).map(|x| format!("{:2}", r.final_config.get(x + y * side))).collect();
        println!("  {}", row.join(""));
    }
    println!("same result under 50 random orders: {}", abelian_check(&xi, &g, 4, 50, 1)?);
    Ok(())
}
