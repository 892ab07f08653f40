//! Monotone maps from particle configurations to open/closed site
//! configurations.
//!
//! Sandpile and activated random walk report the set of sites that toppled;
//! bootstrap percolation reports its occupied closure; the identity map opens
//! exactly the sites carrying mass at least `t`.

mod arw;
mod bootstrap;
mod config;
mod sandpile;

use std::collections::VecDeque;
use std::fmt;

pub use arw::{arw_stabilize, arw_stabilize_ordered, ArwResult, Instruction, InstructionStacks};
pub use bootstrap::bootstrap_apply;
pub use config::{Odometer, ParticleConfig, SiteConfig, StabilizationResult};
pub use sandpile::{
    abelian_check, default_cap, sandpile_stabilize, sandpile_stabilize_ordered, Order,
};

use crate::error::{Error, Result};
use crate::lattice::Geometry;
use crate::rng;

/// What a map produced for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub omega: SiteConfig,
    /// False when a toppling cap was exhausted.
    pub stabilized: bool,
    pub odometer: Option<Odometer>,
}

/// A (possibly seeded) map `T` from particle configurations to site
/// configurations.
pub trait Dynamics: Send + Sync {
    fn label(&self) -> String;

    /// The occupation threshold `t`: mass at least `t` forces a site open.
    fn threshold(&self, geom: &Geometry) -> f64;

    /// Applies the map. `seed` fixes the automaton's own randomness; it is
    /// ignored by deterministic maps.
    fn apply(&self, xi: &ParticleConfig, geom: &Geometry, seed: u64) -> Result<Outcome>;

    /// Whether `T(tau_z xi) = tau_z T(xi)` is expected to hold sample by
    /// sample (not just in law).
    fn pathwise_translation_covariant(&self) -> bool {
        true
    }

    /// Compares the default processing order against `trials` random orders.
    /// `None` when the map has no notion of processing order.
    fn abelian_check(
        &self,
        _xi: &ParticleConfig,
        _geom: &Geometry,
        _trials: usize,
        _seed: u64,
    ) -> Result<Option<bool>> {
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Automaton {
    /// `omega_x = 1{xi_x >= t}`; reduces the model to plain site percolation
    /// when the family is two-valued.
    Identity { threshold: f64 },
    /// Abelian sandpile; `threshold: None` means `2d`.
    Sandpile {
        threshold: Option<u64>,
        cap: Option<u64>,
    },
    Bootstrap { theta: usize, threshold: f64 },
    /// Activated random walk with sleep rate `lambda` (may be infinite).
    Arw { sleep_rate: f64, cap: Option<u64> },
}

/// A lone particle may sleep immediately, but a site holding two particles
/// keeps executing instructions until one of them jumps.
pub const ARW_THRESHOLD: f64 = 2.0;

impl Automaton {
    pub fn sandpile() -> Self {
        Automaton::Sandpile {
            threshold: None,
            cap: None,
        }
    }

    pub fn bootstrap(theta: usize) -> Self {
        Automaton::Bootstrap {
            theta,
            threshold: 1.0,
        }
    }

    pub fn arw(sleep_rate: f64) -> Self {
        Automaton::Arw {
            sleep_rate,
            cap: None,
        }
    }

    pub fn identity(threshold: f64) -> Self {
        Automaton::Identity { threshold }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Automaton::Identity { .. } => "identity",
            Automaton::Sandpile { .. } => "sandpile",
            Automaton::Bootstrap { .. } => "bootstrap",
            Automaton::Arw { .. } => "arw",
        }
    }

    /// True for the maps whose `omega` is the set of toppled sites.
    pub fn is_toppling(&self) -> bool {
        matches!(self, Automaton::Sandpile { .. } | Automaton::Arw { .. })
    }

    fn sandpile_threshold(threshold: Option<u64>, geom: &Geometry) -> u64 {
        threshold.unwrap_or(geom.degree() as u64)
    }

    /// Runs the map and keeps the full stabilization record where one exists.
    pub fn stabilize(
        &self,
        xi: &ParticleConfig,
        geom: &Geometry,
        seed: u64,
    ) -> Result<StabilizationResult> {
        match *self {
            Automaton::Sandpile { threshold, cap } => sandpile_stabilize(
                xi,
                geom,
                Self::sandpile_threshold(threshold, geom),
                cap.unwrap_or_else(|| default_cap(geom)),
            ),
            Automaton::Arw { sleep_rate, cap } => arw_stabilize(
                xi,
                geom,
                sleep_rate,
                seed,
                cap.unwrap_or_else(|| default_cap(geom)),
            ),
            _ => {
                let out = self.apply(xi, geom, seed)?;
                Ok(StabilizationResult {
                    omega: out.omega,
                    odometer: Odometer::zeros(geom.len()),
                    final_config: xi.clone(),
                    stabilized: true,
                    dissipated: 0.0,
                })
            }
        }
    }
}

impl fmt::Display for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Dynamics for Automaton {
    fn label(&self) -> String {
        match self {
            Automaton::Identity { threshold } => format!("identity(t={threshold})"),
            Automaton::Sandpile {
                threshold: Some(t), ..
            } => format!("sandpile(t={t})"),
            Automaton::Sandpile { .. } => "sandpile".into(),
            Automaton::Bootstrap { theta, threshold } => {
                format!("bootstrap(theta={theta},t={threshold})")
            }
            Automaton::Arw { sleep_rate, .. } => format!("arw(lambda={sleep_rate})"),
        }
    }

    fn threshold(&self, geom: &Geometry) -> f64 {
        match *self {
            Automaton::Identity { threshold } => threshold,
            Automaton::Sandpile { threshold, .. } => {
                Self::sandpile_threshold(threshold, geom) as f64
            }
            Automaton::Bootstrap { threshold, .. } => threshold,
            Automaton::Arw { .. } => ARW_THRESHOLD,
        }
    }

    fn apply(&self, xi: &ParticleConfig, geom: &Geometry, seed: u64) -> Result<Outcome> {
        match *self {
            Automaton::Identity { threshold } => {
                xi.check_shape(geom)?;
                Ok(Outcome {
                    omega: SiteConfig::new(xi.values().iter().map(|&m| m >= threshold).collect()),
                    stabilized: true,
                    odometer: None,
                })
            }
            Automaton::Bootstrap { theta, threshold } => Ok(Outcome {
                omega: bootstrap_apply(xi, geom, theta, threshold)?,
                stabilized: true,
                odometer: None,
            }),
            Automaton::Sandpile { .. } | Automaton::Arw { .. } => {
                let r = self.stabilize(xi, geom, seed)?;
                Ok(Outcome {
                    omega: r.omega,
                    stabilized: r.stabilized,
                    odometer: Some(r.odometer),
                })
            }
        }
    }

    fn pathwise_translation_covariant(&self) -> bool {
        // Stack randomness is indexed by absolute site, so ARW is covariant
        // only in distribution.
        !matches!(self, Automaton::Arw { .. })
    }

    fn abelian_check(
        &self,
        xi: &ParticleConfig,
        geom: &Geometry,
        trials: usize,
        seed: u64,
    ) -> Result<Option<bool>> {
        match *self {
            Automaton::Sandpile { threshold, .. } => Ok(Some(abelian_check(
                xi,
                geom,
                Self::sandpile_threshold(threshold, geom),
                trials,
                seed,
            )?)),
            Automaton::Arw { sleep_rate, cap } => {
                let cap = cap.unwrap_or_else(|| default_cap(geom));
                let reference = arw_stabilize_ordered(xi, geom, sleep_rate, seed, cap, Order::Fifo)?;
                if !reference.result.stabilized {
                    return Err(Error::NotStabilized { cap });
                }
                for k in 0..trials {
                    let order = Order::Random {
                        seed: rng::derive(seed, &[rng::tag::ORDER, k as u64]),
                    };
                    let other = arw_stabilize_ordered(xi, geom, sleep_rate, seed, cap, order)?;
                    if other.instructions_used != reference.instructions_used
                        || other.result.final_config != reference.result.final_config
                    {
                        return Ok(Some(false));
                    }
                }
                Ok(Some(true))
            }
            _ => Ok(None),
        }
    }
}

/// `omega_p1` with every site where `y >= t` switched open.
pub fn interpolate_config(omega_p1: &SiteConfig, y: &ParticleConfig, t: f64) -> Result<SiteConfig> {
    if omega_p1.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: omega_p1.len(),
            got: y.len(),
        });
    }
    Ok(SiteConfig::new(
        omega_p1
            .bits()
            .iter()
            .zip(y.values())
            .map(|(&open, &m)| open || m >= t)
            .collect(),
    ))
}

/// The effect of raising one site's mass to `max(r, xi_x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub site: usize,
    pub before: SiteConfig,
    pub after: SiteConfig,
    /// Sites open after the perturbation but not before, in index order.
    pub diff: Vec<usize>,
    /// Both runs stabilized within their caps.
    pub stabilized: bool,
}

impl Perturbation {
    pub fn is_monotone(&self) -> bool {
        self.before.le(&self.after)
    }

    /// The added open set is explained by one connected set through the
    /// perturbed site: every newly open site lies in the open cluster of
    /// `site` after the perturbation.
    pub fn is_connected_addition(&self, geom: &Geometry) -> bool {
        if self.diff.is_empty() {
            return true;
        }
        if !self.after.is_open(self.site) {
            return false;
        }
        let mut seen = vec![false; geom.len()];
        let mut queue = VecDeque::from([self.site]);
        seen[self.site] = true;
        while let Some(i) = queue.pop_front() {
            for j in geom.neighbor_indices(i) {
                if !seen[j] && self.after.is_open(j) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        self.diff.iter().all(|&j| seen[j])
    }
}

/// Applies `dynamics` to `xi` and to `xi` raised to `r` at `site`, with the
/// same automaton seed for both runs.
pub fn increase_and_diff(
    dynamics: &dyn Dynamics,
    xi: &ParticleConfig,
    geom: &Geometry,
    site: usize,
    r: f64,
    seed: u64,
) -> Result<Perturbation> {
    if site >= geom.len() {
        return Err(Error::OutOfWindow {
            coords: vec![site],
            side: geom.side(),
        });
    }
    let raised = xi.raised(site, r)?;
    let before = dynamics.apply(xi, geom, seed)?;
    let after = if raised == *xi {
        before.clone()
    } else {
        dynamics.apply(&raised, geom, seed)?
    };
    let diff = after.omega.minus(&before.omega);
    Ok(Perturbation {
        site,
        diff,
        stabilized: before.stabilized && after.stabilized,
        before: before.omega,
        after: after.omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;

    #[test]
    fn interpolation_is_pointwise_or() {
        let omega = SiteConfig::from_sites(9, [0]);
        let y0 = ParticleConfig::zeros(9);
        assert_eq!(interpolate_config(&omega, &y0, 1.0).unwrap(), omega);
        let yt = ParticleConfig::new(vec![1.0; 9]).unwrap();
        assert_eq!(interpolate_config(&omega, &yt, 1.0).unwrap().count_open(), 9);

        let g = Geometry::open_box(2, 3).unwrap();
        let corner = g.index(&Site::from([2, 2])).unwrap();
        let y = ParticleConfig::point(9, corner, 4.0).unwrap();
        let got = interpolate_config(&omega, &y, 4.0).unwrap();
        assert_eq!(got.open_sites().collect::<Vec<_>>(), vec![0, corner]);
    }

    #[test]
    fn interpolation_shape_checked() {
        assert!(interpolate_config(&SiteConfig::closed(3), &ParticleConfig::zeros(4), 1.0).is_err());
    }

    #[test]
    fn no_op_perturbation() {
        let g = Geometry::open_box(2, 5).unwrap();
        let xi = ParticleConfig::point(g.len(), 3, 2.0).unwrap();
        let p = increase_and_diff(&Automaton::sandpile(), &xi, &g, 3, 1.0, 0).unwrap();
        assert!(p.diff.is_empty());
        assert_eq!(p.before, p.after);
    }

    #[test]
    fn single_toppling_perturbation() {
        let g = Geometry::open_box(2, 5).unwrap();
        let c = g.index(&g.center()).unwrap();
        let p = increase_and_diff(
            &Automaton::sandpile(),
            &ParticleConfig::zeros(g.len()),
            &g,
            c,
            4.0,
            0,
        )
        .unwrap();
        assert_eq!(p.diff, vec![c]);
        assert!(p.is_connected_addition(&g));
    }

    #[test]
    fn arw_threshold_forces_a_jump() {
        let g = Geometry::open_box(2, 6).unwrap();
        let a = Automaton::arw(5.0);
        for seed in 0..50 {
            let xi = ParticleConfig::point(g.len(), 14, 2.0).unwrap();
            let out = a.apply(&xi, &g, seed).unwrap();
            assert!(out.omega.is_open(14));
        }
    }

    #[test]
    fn disconnected_addition_detected() {
        let g = Geometry::open_box(1, 5).unwrap();
        let p = Perturbation {
            site: 0,
            before: SiteConfig::closed(5),
            after: SiteConfig::from_sites(5, [0, 2]),
            diff: vec![0, 2],
            stabilized: true,
        };
        assert!(!p.is_connected_addition(&g));
    }
}
