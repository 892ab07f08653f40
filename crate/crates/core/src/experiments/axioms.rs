use rayon::prelude::*;

use super::ExperimentPlan;
use crate::automata::{increase_and_diff, Dynamics, Outcome};
use crate::error::{Error, Result};
use crate::lattice::Geometry;
use crate::measures::CouplingSampler;
use crate::rng::{self, tag};

/// Random orders compared against the default one per Abelian check.
const ABELIAN_ORDERS: usize = 5;

pub const AXIOMS: [&str; 6] = ["D1", "D2+R2", "D3", "AD4", "R3-eps", "Abelian"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub trials: usize,
    pub violations: usize,
    /// Trials where the check did not apply (no stabilization, no notion of
    /// order, or no pathwise covariance).
    pub skipped: usize,
    /// Seed of the first violating trial.
    pub reproducer: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub automaton: String,
    pub side: usize,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["automaton", "L", "axiom", "trials", "violations", "skipped", "reproducer_seed"])?;
        for c in &self.checks {
            w.write_record([
                self.automaton.clone(),
                self.side.to_string(),
                c.axiom.to_string(),
                c.trials.to_string(),
                c.violations.to_string(),
                c.skipped.to_string(),
                c.reproducer.map(|s| s.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Audits the plan's automaton; see [`verify_axioms_with`].
pub fn verify_axioms(plan: &ExperimentPlan) -> Result<AxiomReport> {
    verify_axioms_with(plan, &plan.automaton)
}

/// Runs `plan.trials` seeded audits of `dynamics` on the plan's first size.
///
/// Each trial draws a coupled triple `X <= Y <= Z` at `plan.coupling` and
/// checks monotonicity of the outputs, that mass `>= t` forces a site open,
/// translation covariance on a torus of the same size (applied to `X`), the
/// connected-addition property for one raised site of `Y`, and order
/// independence on `Y`. Insertion tolerance is checked once per coupling
/// parameter.
pub fn verify_axioms_with(plan: &ExperimentPlan, dynamics: &dyn Dynamics) -> Result<AxiomReport> {
    plan.validate()?;
    let side = plan.sizes[0];
    let geom = plan.geometry(side)?;
    let torus = Geometry::torus(plan.dim, side)?;
    let verdicts: Vec<(u64, [Verdict; 5])> = (0..plan.trials)
        .into_par_iter()
        .map(|k| {
            let seed = plan.trial_seed(side, k);
            audit(plan, dynamics, &geom, &torus, seed).map(|v| (seed, v))
        })
        .collect::<Result<_>>()?;

    let mut checks: Vec<AxiomCheck> = ["D1", "D2+R2", "D3", "AD4", "Abelian"]
        .iter()
        .enumerate()
        .map(|(i, &axiom)| {
            let mut c = AxiomCheck {
                axiom,
                trials: verdicts.len(),
                violations: 0,
                skipped: 0,
                reproducer: None,
            };
            for (seed, v) in &verdicts {
                match v[i] {
                    Verdict::Pass => {}
                    Verdict::Skip => c.skipped += 1,
                    Verdict::Fail => {
                        c.violations += 1;
                        c.reproducer.get_or_insert(*seed);
                    }
                }
            }
            c
        })
        .collect();

    let mut eps = AxiomCheck {
        axiom: "R3-eps",
        trials: 3,
        violations: 0,
        skipped: 0,
        reproducer: None,
    };
    for p in plan.coupling {
        if !plan.family.insertion_epsilon(p)?.is_tolerant() {
            eps.violations += 1;
            eps.reproducer.get_or_insert(plan.seed);
        }
    }
    checks.insert(4, eps);
    for c in checks.iter().filter(|c| c.violations > 0) {
        log::error!(
            "{} violated {} times; reproduce with trial seed {}",
            c.axiom,
            c.violations,
            c.reproducer.expect("set with the first violation")
        );
    }
    Ok(AxiomReport {
        automaton: dynamics.label(),
        side,
        checks,
    })
}

fn audit(
    plan: &ExperimentPlan,
    dynamics: &dyn Dynamics,
    geom: &Geometry,
    torus: &Geometry,
    seed: u64,
) -> Result<[Verdict; 5]> {
    let sampler = CouplingSampler::new(
        plan.family.clone(),
        plan.coupling,
        rng::derive(seed, &[tag::PARTICLES]),
    )?;
    let triple = sampler.sample(geom);
    let a = rng::derive(seed, &[tag::AUTOMATON]);
    let outs: Vec<Outcome> = [&triple.x, &triple.y, &triple.z]
        .into_iter()
        .map(|xi| dynamics.apply(xi, geom, a))
        .collect::<Result<_>>()?;
    let all_stable = outs.iter().all(|o| o.stabilized);
    let t = dynamics.threshold(geom);

    let ordered_inputs = triple.x.le(&triple.y) && triple.y.le(&triple.z);
    let monotone = if !ordered_inputs {
        Verdict::Fail
    } else if !all_stable {
        Verdict::Skip
    } else if outs[0].omega.le(&outs[1].omega) && outs[1].omega.le(&outs[2].omega) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    let forced = if !all_stable {
        Verdict::Skip
    } else if [&triple.x, &triple.y, &triple.z]
        .iter()
        .zip(&outs)
        .all(|(xi, o)| (0..geom.len()).all(|i| xi.get(i) < t || o.omega.is_open(i)))
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    let covariant = if dynamics.pathwise_translation_covariant() {
        let z = torus.site((rng::derive(seed, &[tag::TRANSLATE]) % torus.len() as u64) as usize);
        let base = dynamics.apply(&triple.x, torus, a)?;
        let moved = dynamics.apply(&triple.x.translated(torus, &z)?, torus, a)?;
        if !(base.stabilized && moved.stabilized) {
            Verdict::Skip
        } else if base.omega.translated(torus, &z)? == moved.omega {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    } else {
        Verdict::Skip
    };

    let site = (rng::derive(seed, &[tag::PERTURB]) % geom.len() as u64) as usize;
    let pert = increase_and_diff(dynamics, &triple.y, geom, site, t.ceil(), a)?;
    let connected = if !pert.stabilized {
        Verdict::Skip
    } else if pert.is_monotone() && pert.is_connected_addition(geom) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    let abelian = match dynamics.abelian_check(&triple.y, geom, ABELIAN_ORDERS, a) {
        Ok(Some(true)) => Verdict::Pass,
        Ok(Some(false)) => Verdict::Fail,
        Ok(None) | Err(Error::NotStabilized { .. }) => Verdict::Skip,
        Err(e) => return Err(e),
    };

    Ok([covariant, monotone, forced, connected, abelian])
}
