//! Abelian sandpile stabilization with odometer.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Odometer, ParticleConfig, StabilizationResult};
use crate::error::{Error, Result};
use crate::lattice::{Geometry, SINK};

/// Order in which unstable sites are processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// First-in first-out queue of unstable sites.
    Fifo,
    /// Uniformly random unstable site at every step.
    Random { seed: u64 },
}

/// Default cap on the number of topplings: `10^4 * L^d`.
pub fn default_cap(geom: &Geometry) -> u64 {
    10_000 * geom.len() as u64
}

struct Pile<'g> {
    geom: &'g Geometry,
    threshold: u64,
    mass: Vec<u64>,
    topples: Vec<u64>,
    total: u64,
    dissipated: u64,
}

impl Pile<'_> {
    #[inline]
    fn unstable(&self, i: usize) -> bool {
        self.mass[i] >= self.threshold
    }

    /// Topples `i` once and reports the neighbours that just became unstable.
    #[inline]
    fn topple(&mut self, i: usize, mut became_unstable: impl FnMut(usize)) {
        let deg = self.geom.degree() as u64;
        self.mass[i] -= deg;
        self.topples[i] += 1;
        self.total += 1;
        for &slot in self.geom.neighbor_slots(i) {
            if slot == SINK {
                self.dissipated += 1;
            } else {
                let j = slot as usize;
                self.mass[j] += 1;
                if self.mass[j] == self.threshold {
                    became_unstable(j);
                }
            }
        }
    }

    fn finish(self, stabilized: bool) -> StabilizationResult {
        let odometer = Odometer::from_counts(self.topples);
        StabilizationResult {
            omega: odometer.toppled_set(),
            odometer,
            final_config: ParticleConfig::from_counts(&self.mass),
            stabilized,
            dissipated: self.dissipated as f64,
        }
    }
}

/// Stabilizes `xi` with a FIFO queue of unstable sites.
///
/// A site is unstable when it holds at least `threshold` particles and a
/// toppling sends one particle to each of its `2d` neighbours; particles sent
/// to sinks leave the system. Exhausting `cap` topplings is reported through
/// `stabilized = false`, not as an error.
pub fn sandpile_stabilize(
    xi: &ParticleConfig,
    geom: &Geometry,
    threshold: u64,
    cap: u64,
) -> Result<StabilizationResult> {
    sandpile_stabilize_ordered(xi, geom, threshold, cap, Order::Fifo)
}

pub fn sandpile_stabilize_ordered(
    xi: &ParticleConfig,
    geom: &Geometry,
    threshold: u64,
    cap: u64,
    order: Order,
) -> Result<StabilizationResult> {
    xi.check_shape(geom)?;
    if threshold < geom.degree() as u64 {
        return Err(Error::Automaton(format!(
            "sandpile threshold {threshold} is below the degree {}",
            geom.degree()
        )));
    }
    if cap == 0 {
        return Err(Error::Automaton("toppling cap must be positive".into()));
    }
    let mass = xi.to_counts()?;
    let n = geom.len();
    let mut pile = Pile {
        geom,
        threshold,
        mass,
        topples: vec![0; n],
        total: 0,
        dissipated: 0,
    };
    let stabilized = match order {
        Order::Fifo => run_fifo(&mut pile, cap),
        Order::Random { seed } => run_random(&mut pile, cap, seed),
    };
    if !stabilized && !geom.is_torus() {
        log::error!(
            "sandpile on an open box exceeded {cap} topplings; dissipative windows always stabilize"
        );
    }
    Ok(pile.finish(stabilized))
}

fn run_fifo(pile: &mut Pile<'_>, cap: u64) -> bool {
    let n = pile.mass.len();
    let mut queued = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| pile.unstable(i)).collect();
    for &i in &queue {
        queued[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        if !pile.unstable(i) {
            continue;
        }
        if pile.total >= cap {
            return false;
        }
        pile.topple(i, |j| {
            if !queued[j] {
                queued[j] = true;
                queue.push_back(j);
            }
        });
        if pile.unstable(i) && !queued[i] {
            queued[i] = true;
            queue.push_back(i);
        }
    }
    true
}

fn run_random(pile: &mut Pile<'_>, cap: u64, seed: u64) -> bool {
    let n = pile.mass.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Set of unstable sites with O(1) insert, remove and uniform draw.
    let mut members: Vec<usize> = (0..n).filter(|&i| pile.unstable(i)).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in members.iter().enumerate() {
        pos[i] = k;
    }
    while !members.is_empty() {
        if pile.total >= cap {
            return false;
        }
        let i = members[rng.gen_range(0..members.len())];
        let mut fresh = Vec::new();
        pile.topple(i, |j| fresh.push(j));
        for j in fresh {
            if pos[j] == usize::MAX {
                pos[j] = members.len();
                members.push(j);
            }
        }
        if !pile.unstable(i) {
            let k = pos[i];
            let last = *members.last().expect("nonempty");
            members.swap_remove(k);
            if last != i {
                pos[last] = k;
            }
            pos[i] = usize::MAX;
        }
    }
    true
}

/// Stabilizes `xi` under `trials` uniformly random toppling orders and
/// reports whether every odometer and final configuration matches the FIFO
/// run.
pub fn abelian_check(
    xi: &ParticleConfig,
    geom: &Geometry,
    threshold: u64,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    let cap = default_cap(geom);
    let reference = sandpile_stabilize(xi, geom, threshold, cap)?;
    if !reference.stabilized {
        return Err(Error::NotStabilized { cap });
    }
    for k in 0..trials {
        let order = Order::Random {
            seed: crate::rng::derive(seed, &[crate::rng::tag::ORDER, k as u64]),
        };
        let other = sandpile_stabilize_ordered(xi, geom, threshold, cap, order)?;
        if other.odometer != reference.odometer || other.final_config != reference.final_config {
            return Ok(false);
        }
    }
    Ok(true)
}
