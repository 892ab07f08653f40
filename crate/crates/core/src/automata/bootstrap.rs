use std::collections::VecDeque;

use super::config::{ParticleConfig, SiteConfig};
use crate::error::{Error, Result};
use crate::lattice::Geometry;

/// Threshold bootstrap closure.
///
/// Sites with `xi_x >= threshold` start occupied; a vacant site becomes
/// occupied once at least `theta` of its in-window neighbours are. Sinks
/// count as vacant. The result is the smallest closed set containing the
/// initial one.
pub fn bootstrap_apply(
    xi: &ParticleConfig,
    geom: &Geometry,
    theta: usize,
    threshold: f64,
) -> Result<SiteConfig> {
    xi.check_shape(geom)?;
    if theta == 0 || theta > geom.degree() {
        return Err(Error::Automaton(format!(
            "bootstrap theta must lie in 1..={}, got {theta}",
            geom.degree()
        )));
    }
    let n = geom.len();
    let mut occupied: Vec<bool> = xi.values().iter().map(|&m| m >= threshold).collect();
    let mut support = vec![0usize; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| occupied[i]).collect();
    while let Some(i) = queue.pop_front() {
        for j in geom.neighbor_indices(i) {
            if occupied[j] {
                continue;
            }
            support[j] += 1;
            if support[j] >= theta {
                occupied[j] = true;
                queue.push_back(j);
            }
        }
    }
    Ok(SiteConfig::new(occupied))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;

    #[test]
    fn empty_and_full() {
        let g = Geometry::open_box(2, 6).unwrap();
        let zero = bootstrap_apply(&ParticleConfig::zeros(g.len()), &g, 2, 1.0).unwrap();
        assert_eq!(zero.count_open(), 0);
        let full = ParticleConfig::new(vec![1.0; g.len()]).unwrap();
        assert_eq!(bootstrap_apply(&full, &g, 4, 1.0).unwrap().count_open(), g.len());
    }

    #[test]
    fn theta_range_checked() {
        let g = Geometry::open_box(2, 3).unwrap();
        let xi = ParticleConfig::zeros(g.len());
        assert!(bootstrap_apply(&xi, &g, 0, 1.0).is_err());
        assert!(bootstrap_apply(&xi, &g, 5, 1.0).is_err());
    }

    /// Sweeps the rule over the whole window until nothing changes.
    fn brute_force_closure(init: &[bool], g: &Geometry, theta: usize) -> Vec<bool> {
        let mut cur = init.to_vec();
        loop {
            let next: Vec<bool> = (0..g.len())
                .map(|i| cur[i] || g.neighbor_indices(i).filter(|&j| cur[j]).count() >= theta)
                .collect();
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    #[test]
    fn diagonal_fills_the_box() {
        let g = Geometry::open_box(2, 4).unwrap();
        let mut xi = vec![0.0; g.len()];
        for k in 0..4 {
            xi[g.index(&Site::from([k, k])).unwrap()] = 1.0;
        }
        let init: Vec<bool> = xi.iter().map(|&m| m >= 1.0).collect();
        let oracle = brute_force_closure(&init, &g, 2);
        assert!(oracle.iter().all(|&b| b));
        let got = bootstrap_apply(&ParticleConfig::new(xi).unwrap(), &g, 2, 1.0).unwrap();
        assert_eq!(got.bits(), oracle.as_slice());
    }

    #[test]
    fn matches_brute_force_on_random_inputs() {
        for seed in 0..30u64 {
            let torus = seed % 2 == 0;
            let g = if torus {
                Geometry::torus(2, 7).unwrap()
            } else {
                Geometry::open_box(2, 7).unwrap()
            };
            let theta = 1 + (seed as usize % 3);
            let xi: Vec<f64> = (0..g.len())
                .map(|i| (crate::rng::site_uniform(seed, i) < 0.3) as u8 as f64)
                .collect();
            let init: Vec<bool> = xi.iter().map(|&m| m >= 1.0).collect();
            let got = bootstrap_apply(&ParticleConfig::new(xi).unwrap(), &g, theta, 1.0).unwrap();
            assert_eq!(got.bits(), brute_force_closure(&init, &g, theta).as_slice());
        }
    }
}
