//! Writes a particle configuration and its toppled set in the flat binary
//! format and reads them back.

use monoperc::automata::{Automaton, ParticleConfig};
use monoperc::codec::{decode_particles, decode_sites, encode_particles, encode_sites};
use monoperc::lattice::Geometry;

fn main() -> monoperc::Result<()> {
    let g = Geometry::open_box(1, 3)?;
    let xi = ParticleConfig::from_counts(&[2, 2, 2]);
    let r = Automaton::Sandpile { threshold: Some(2), cap: None }.stabilize(&xi, &g, 0)?;

    let dir = std::env::temp_dir();
    std::fs::write(dir.join("line.bin"), encode_particles(&g, &xi)?)?;
    std::fs::write(dir.join("line_omega.bin"), encode_sites(&g, &r.omega)?)?;

    let bytes = std::fs::read(dir.join("line.bin"))?;
    println!("{} bytes: {:02x?}", bytes.len(), &bytes[..10]);
    let (g2, back) = decode_particles(&bytes)?;
    let (_, omega) = decode_sites(&std::fs::read(dir.join("line_omega.bin"))?)?;
    println!("geometry {:?}, values {:?}, toppled {:?}", g2, back.values(), omega.bits());
    println!("odometer {:?}", r.odometer.topples());
    Ok(())
}
