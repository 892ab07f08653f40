//! Activated random walk in the sitewise (Diaconis-Fulton) representation.
//!
//! Every site owns an infinite stack of instructions, fixed in advance by the
//! seed: "sleep" with probability `lambda / (1 + lambda)`, otherwise "jump to
//! a uniformly chosen neighbour slot". Processing an unstable site pops its
//! next instruction. A sleep instruction only takes effect on a lone
//! particle; a particle arriving at a site wakes whatever sleeps there.
//! With the stacks fixed, the number of instructions used at each site does
//! not depend on the order in which unstable sites are processed.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Odometer, ParticleConfig, StabilizationResult};
use super::sandpile::Order;
use crate::error::{Error, Result};
use crate::lattice::{Geometry, SINK};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instruction {
    Sleep,
    /// Index into the site's neighbour slots.
    Jump(usize),
}

/// Instruction stacks as a pure function of `(seed, site, position)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstructionStacks {
    seed: u64,
    sleep_prob: f64,
    degree: usize,
}

impl InstructionStacks {
    /// `sleep_rate` may be `f64::INFINITY`, in which case every instruction
    /// is a sleep.
    pub fn new(seed: u64, sleep_rate: f64, degree: usize) -> Result<Self> {
        if sleep_rate.is_nan() || sleep_rate < 0.0 {
            return Err(Error::Automaton(format!(
                "sleep rate must be nonnegative, got {sleep_rate}"
            )));
        }
        let sleep_prob = if sleep_rate.is_infinite() {
            1.0
        } else {
            sleep_rate / (1.0 + sleep_rate)
        };
        Ok(InstructionStacks {
            seed,
            sleep_prob,
            degree,
        })
    }

    pub fn get(&self, site: usize, position: u64) -> Instruction {
        let bits = rng::stream(self.seed, site as u64, position);
        if rng::unit(bits) < self.sleep_prob {
            Instruction::Sleep
        } else {
            let dir = rng::unit(rng::mix64(bits ^ 0xA5A5_5A5A_DEAD_BEEF)) * self.degree as f64;
            Instruction::Jump((dir as usize).min(self.degree - 1))
        }
    }
}

struct Walkers<'g> {
    geom: &'g Geometry,
    stacks: InstructionStacks,
    count: Vec<u64>,
    sleeping: Vec<bool>,
    used: Vec<u64>,
    jumps: Vec<u64>,
    total: u64,
    dissipated: u64,
}

impl Walkers<'_> {
    #[inline]
    fn active(&self, i: usize) -> bool {
        self.count[i] >= 2 || (self.count[i] == 1 && !self.sleeping[i])
    }

    /// Executes the next instruction at `i`; returns the site that received
    /// a particle, if any.
    fn step(&mut self, i: usize) -> Option<usize> {
        let instr = self.stacks.get(i, self.used[i]);
        self.used[i] += 1;
        self.total += 1;
        match instr {
            Instruction::Sleep => {
                if self.count[i] == 1 {
                    self.sleeping[i] = true;
                }
                None
            }
            Instruction::Jump(dir) => {
                self.count[i] -= 1;
                self.jumps[i] += 1;
                let slot = self.geom.neighbor_slots(i)[dir];
                if slot == SINK {
                    self.dissipated += 1;
                    None
                } else {
                    let j = slot as usize;
                    self.count[j] += 1;
                    self.sleeping[j] = false;
                    Some(j)
                }
            }
        }
    }
}

/// Full ARW outcome including the instruction counts used per site.
#[derive(Debug, Clone, PartialEq)]
pub struct ArwResult {
    pub result: StabilizationResult,
    pub instructions_used: Vec<u64>,
    pub sleeping: Vec<bool>,
}

/// Stabilizes `xi` (integer counts, all particles initially active). The
/// odometer counts jumps; `omega` is the set of sites that emitted at least
/// one jump. `cap` bounds the total number of instructions executed.
pub fn arw_stabilize(
    xi: &ParticleConfig,
    geom: &Geometry,
    sleep_rate: f64,
    seed: u64,
    cap: u64,
) -> Result<StabilizationResult> {
    Ok(arw_stabilize_ordered(xi, geom, sleep_rate, seed, cap, Order::Fifo)?.result)
}

pub fn arw_stabilize_ordered(
    xi: &ParticleConfig,
    geom: &Geometry,
    sleep_rate: f64,
    seed: u64,
    cap: u64,
    order: Order,
) -> Result<ArwResult> {
    xi.check_shape(geom)?;
    if cap == 0 {
        return Err(Error::Automaton("instruction cap must be positive".into()));
    }
    let stacks = InstructionStacks::new(seed, sleep_rate, geom.degree())?;
    let count = xi.to_counts()?;
    let n = geom.len();
    let mut w = Walkers {
        geom,
        stacks,
        count,
        sleeping: vec![false; n],
        used: vec![0; n],
        jumps: vec![0; n],
        total: 0,
        dissipated: 0,
    };
    let stabilized = match order {
        Order::Fifo => run_fifo(&mut w, cap),
        Order::Random { seed } => run_random(&mut w, cap, seed),
    };
    let odometer = Odometer::from_counts(w.jumps);
    Ok(ArwResult {
        result: StabilizationResult {
            omega: odometer.toppled_set(),
            odometer,
            final_config: ParticleConfig::from_counts(&w.count),
            stabilized,
            dissipated: w.dissipated as f64,
        },
        instructions_used: w.used,
        sleeping: w.sleeping,
    })
}

fn run_fifo(w: &mut Walkers<'_>, cap: u64) -> bool {
    let n = w.count.len();
    let mut queued = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| w.active(i)).collect();
    for &i in &queue {
        queued[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        if !w.active(i) {
            continue;
        }
        if w.total >= cap {
            return false;
        }
        if let Some(j) = w.step(i) {
            if w.active(j) && !queued[j] {
                queued[j] = true;
                queue.push_back(j);
            }
        }
        if w.active(i) && !queued[i] {
            queued[i] = true;
            queue.push_back(i);
        }
    }
    true
}

fn run_random(w: &mut Walkers<'_>, cap: u64, seed: u64) -> bool {
    let n = w.count.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members: Vec<usize> = (0..n).filter(|&i| w.active(i)).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in members.iter().enumerate() {
        pos[i] = k;
    }
    let remove = |members: &mut Vec<usize>, pos: &mut Vec<usize>, i: usize| {
        let k = pos[i];
        let last = *members.last().expect("nonempty");
        members.swap_remove(k);
        if last != i {
            pos[last] = k;
        }
        pos[i] = usize::MAX;
    };
    while !members.is_empty() {
        if w.total >= cap {
            return false;
        }
        let i = members[rng.gen_range(0..members.len())];
        if let Some(j) = w.step(i) {
            if w.active(j) && pos[j] == usize::MAX {
                pos[j] = members.len();
                members.push(j);
            }
        }
        if !w.active(i) {
            remove(&mut members, &mut pos, i);
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_configuration() {
        let g = Geometry::open_box(2, 5).unwrap();
        let r = arw_stabilize(&ParticleConfig::zeros(g.len()), &g, 1.0, 3, 1000).unwrap();
        assert!(r.stabilized);
        assert_eq!(r.odometer.total(), 0);
    }

    #[test]
    fn infinite_sleep_rate_freezes_lone_particles() {
        let g = Geometry::open_box(2, 6).unwrap();
        let xi = ParticleConfig::new((0..g.len()).map(|i| (i % 2) as f64).collect()).unwrap();
        let r = arw_stabilize(&xi, &g, f64::INFINITY, 9, 10_000).unwrap();
        assert!(r.stabilized);
        assert_eq!(r.omega.count_open(), 0);
        assert_eq!(r.final_config, xi);
    }

    #[test]
    fn stacks_are_deterministic_and_mixed() {
        let s = InstructionStacks::new(11, 1.0, 4).unwrap();
        let draws: Vec<Instruction> = (0..4000).map(|k| s.get(7, k)).collect();
        assert_eq!(draws, (0..4000).map(|k| s.get(7, k)).collect::<Vec<_>>());
        let sleeps = draws.iter().filter(|i| **i == Instruction::Sleep).count();
        assert!((1800..2200).contains(&sleeps), "{sleeps}");
        for dir in 0..4 {
            assert!(draws.contains(&Instruction::Jump(dir)));
        }
    }

    #[test]
    fn negative_rate_rejected() {
        assert!(InstructionStacks::new(0, -1.0, 4).is_err());
    }

    #[test]
    fn orders_agree_on_small_line() {
        let g = Geometry::open_box(1, 5).unwrap();
        let xi = ParticleConfig::new(vec![0.0, 0.0, 3.0, 0.0, 0.0]).unwrap();
        let fifo = arw_stabilize_ordered(&xi, &g, 1.0, 42, 100_000, Order::Fifo).unwrap();
        assert!(fifo.result.stabilized);
        for k in 0..20 {
            let other =
                arw_stabilize_ordered(&xi, &g, 1.0, 42, 100_000, Order::Random { seed: k })
                    .unwrap();
            assert_eq!(other.instructions_used, fifo.instructions_used);
            assert_eq!(other.result.omega, fifo.result.omega);
            assert_eq!(other.result.odometer, fifo.result.odometer);
            assert_eq!(other.result.final_config, fifo.result.final_config);
        }
    }
}
