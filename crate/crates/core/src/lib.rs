//! Dependent site percolation generated by monotone automata.
//!
//! A random particle configuration is drawn from a stochastically increasing
//! family of product measures and pushed through a monotone map (Abelian
//! sandpile, activated random walk, bootstrap percolation). The resulting
//! open sites are analysed as a percolation configuration on a finite window
//! of the hypercubic lattice.
//!
//! - [`lattice`]: box and torus windows, balls, geodesics, translations
//! - [`measures`]: single-site laws and the shared-uniform coupling
//! - [`automata`]: the maps themselves, perturbations and interpolation
//! - [`clusters`]: labelling, distances, trifurcations, mass transport
//! - [`experiments`]: Monte Carlo sweeps and axiom audits
//! - [`cli`]: the `monoperc` command-line front end

pub mod automata;
pub mod cli;
pub mod clusters;
pub mod codec;
mod error;
pub mod experiments;
pub mod lattice;
pub mod measures;
pub mod rng;

pub use error::{Error, Result};
