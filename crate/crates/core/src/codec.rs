//! Flat binary dumps of particle and site configurations.
//!
//! Layout (little endian): `d: u32`, `L: u32`, `boundary: u8` (0 open box,
//! 1 torus), `width: u8` (1 for site bits, 8 for `f64` masses), then the
//! `L^d` values in linear index order, coordinate 0 varying fastest.

use crate::automata::{ParticleConfig, SiteConfig};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, Geometry};

const HEADER: usize = 10;
const SITE_WIDTH: u8 = 1;
const MASS_WIDTH: u8 = 8;

fn header(geom: &Geometry, width: u8) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + geom.len() * width as usize);
    out.extend_from_slice(&(geom.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(geom.side() as u32).to_le_bytes());
    out.push(match geom.boundary() {
        Boundary::OpenBox => 0,
        Boundary::Torus => 1,
    });
    out.push(width);
    out
}

fn parse_header(bytes: &[u8], width: u8) -> Result<(Geometry, &[u8])> {
    if bytes.len() < HEADER {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let dim = u32::from_le_bytes(bytes[0..4].try_into().expect("4 bytes")) as usize;
    let side = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let boundary = match bytes[8] {
        0 => Boundary::OpenBox,
        1 => Boundary::Torus,
        b => return Err(Error::Format(format!("unknown boundary tag {b}"))),
    };
    if bytes[9] != width {
        return Err(Error::Format(format!("value width {} where {width} was expected", bytes[9])));
    }
    let geom = Geometry::new(dim, side, boundary)?;
    let body = &bytes[HEADER..];
    if body.len() != geom.len() * width as usize {
        return Err(Error::Format(format!(
            "body holds {} bytes, expected {}",
            body.len(),
            geom.len() * width as usize
        )));
    }
    Ok((geom, body))
}

pub fn encode_particles(geom: &Geometry, cfg: &ParticleConfig) -> Result<Vec<u8>> {
    cfg.check_shape(geom)?;
    let mut out = header(geom, MASS_WIDTH);
    for v in cfg.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_particles(bytes: &[u8]) -> Result<(Geometry, ParticleConfig)> {
    let (geom, body) = parse_header(bytes, MASS_WIDTH)?;
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((geom, ParticleConfig::new(values)?))
}

pub fn encode_sites(geom: &Geometry, cfg: &SiteConfig) -> Result<Vec<u8>> {
    cfg.check_shape(geom)?;
    let mut out = header(geom, SITE_WIDTH);
    out.extend(cfg.bits().iter().map(|&b| b as u8));
    Ok(out)
}

pub fn decode_sites(bytes: &[u8]) -> Result<(Geometry, SiteConfig)> {
    let (geom, body) = parse_header(bytes, SITE_WIDTH)?;
    let bits = body
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::Format(format!("site byte {b} is neither 0 nor 1"))),
        })
        .collect::<Result<_>>()?;
    Ok((geom, SiteConfig::new(bits)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Geometry::torus(2, 3).unwrap();
        let bytes = encode_sites(&g, &SiteConfig::from_sites(9, [0, 4])).unwrap();
        assert_eq!(&bytes[..10], &[2, 0, 0, 0, 3, 0, 0, 0, 1, 1]);
        assert_eq!(&bytes[10..], &[1, 0, 0, 0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn malformed_input_rejected() {
        let g = Geometry::open_box(1, 3).unwrap();
        let mut bytes = encode_particles(&g, &ParticleConfig::zeros(3)).unwrap();
        assert!(decode_sites(&bytes).is_err());
        bytes.pop();
        assert!(decode_particles(&bytes).is_err());
        assert!(decode_particles(&[0; 4]).is_err());
        let mut bad = encode_sites(&g, &SiteConfig::closed(3)).unwrap();
        bad[10] = 7;
        assert!(decode_sites(&bad).is_err());
    }

    proptest! {
        #[test]
        fn particles_round_trip(
            dim in 1usize..=3,
            side in 3usize..=5,
            torus in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let g = Geometry::new(dim, side, if torus { Boundary::Torus } else { Boundary::OpenBox }).unwrap();
            let values = (0..g.len()).map(|i| (crate::rng::site_uniform(seed, i) * 9.0).floor()).collect();
            let cfg = ParticleConfig::new(values).unwrap();
            let (g2, back) = decode_particles(&encode_particles(&g, &cfg).unwrap()).unwrap();
            prop_assert_eq!(g2, g);
            prop_assert_eq!(back, cfg);
        }

        #[test]
        fn sites_round_trip(side in 3usize..=9, seed in any::<u64>()) {
            let g = Geometry::open_box(2, side).unwrap();
            let cfg = SiteConfig::new((0..g.len()).map(|i| crate::rng::site_uniform(seed, i) < 0.5).collect());
            let (g2, back) = decode_sites(&encode_sites(&g, &cfg).unwrap()).unwrap();
            prop_assert_eq!(g2, g);
            prop_assert_eq!(back, cfg);
        }
    }
}
