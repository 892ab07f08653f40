//! Monte Carlo drivers: critical-point sweeps, uniqueness and trifurcation
//! diagnostics, axiom audits and the geodesic merge demonstration.
//!
//! Trial `k` at side `L` uses the seed `derive(master, [TRIAL, L, k])`
//! whatever the parameter, so configurations at different `p` share their
//! uniforms and every sweep is monotonically coupled in `p`. Trials run on
//! the ambient rayon pool and are reduced in trial order.

mod axioms;
mod merge;
mod sweep;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

pub use axioms::{verify_axioms, verify_axioms_with, AxiomCheck, AxiomReport, AXIOMS};
pub use merge::{
    geodesic_merge, geodesic_merge_experiment, staged_merge_trials, MergeReport, MergeSummary,
};
pub use sweep::{
    estimate_pc_stab, estimate_pc_topple, trifurcation_scan, uniqueness_scan, PcEstimate,
    PcStatus, SizeEstimate, StabSweep, TrifurcationRow,
};

use crate::automata::{Automaton, Dynamics};
use crate::clusters::{count_coarse_trifurcations, label_clusters, Surrogate};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, Geometry};
use crate::measures::{sample_at, MeasureFamily};
use crate::rng::{self, tag};

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Bisection stops once the bracket is this narrow.
pub const BISECTION_TOLERANCE: f64 = 1.0 / 256.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ParamRange {
    Grid(Vec<f64>),
    Bracket { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub automaton: Automaton,
    pub family: MeasureFamily,
    pub dim: usize,
    pub boundary: Boundary,
    pub sizes: Vec<usize>,
    pub params: ParamRange,
    /// `p1 < p2 < p3` for coupled checks.
    pub coupling: [f64; 3],
    pub trials: usize,
    pub seed: u64,
    pub surrogate: Surrogate,
    /// Block radius `n` for trifurcation counts.
    pub block_radius: usize,
}

impl ExperimentPlan {
    /// A two-dimensional open-box plan with 50 trials and master seed
    /// `0x5EED`.
    pub fn new(automaton: Automaton, family: MeasureFamily) -> Self {
        ExperimentPlan {
            automaton,
            family,
            dim: 2,
            boundary: Boundary::OpenBox,
            sizes: vec![32],
            params: ParamRange::Grid((1..10).map(|k| k as f64 / 10.0).collect()),
            coupling: [0.2, 0.35, 0.5],
            trials: 50,
            seed: 0x5EED,
            surrogate: Surrogate::BoundaryContact,
            block_radius: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("no lattice sizes given".into()));
        }
        if let Surrogate::Macroscopic { delta } = self.surrogate {
            if !(delta > 0.0 && delta <= 1.0) {
                return Err(Error::Config(format!("surrogate delta {delta} outside (0, 1]")));
            }
        }
        for &l in &self.sizes {
            Geometry::new(self.dim, l, self.boundary)?;
        }
        Ok(())
    }

    pub fn geometry(&self, side: usize) -> Result<Geometry> {
        Geometry::new(self.dim, side, self.boundary)
    }

    /// Seed of trial `k` at side `side`.
    pub fn trial_seed(&self, side: usize, k: usize) -> u64 {
        rng::derive(self.seed, &[tag::TRIAL, side as u64, k as u64])
    }

    /// The `delta` used for macroscopic-cluster counts.
    pub fn delta(&self) -> f64 {
        match self.surrogate {
            Surrogate::Macroscopic { delta } => delta,
            Surrogate::BoundaryContact => Surrogate::DEFAULT_DELTA,
        }
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let phat = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).clamp(0.0, phat), (centre + half).clamp(phat, 1.0))
}

/// One CSV row: aggregate statistics at one `(L, p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub automaton: String,
    pub family: String,
    pub d: usize,
    #[serde(rename = "L")]
    pub side: usize,
    pub boundary: &'static str,
    pub p: f64,
    pub trials: usize,
    pub crossing_prob: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub s2_over_s1_mean: f64,
    pub macroscopic_count_mean: f64,
    pub trifurcations_mean: Option<f64>,
    pub stab_fail_freq: f64,
    pub seed: u64,
    #[serde(skip)]
    pub crossings: usize,
    #[serde(skip)]
    pub open_density_mean: f64,
    /// Mean odometer at site 0.
    #[serde(skip)]
    pub odometer_mean: f64,
}

/// What one trial at one `(L, p)` produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub crossing: bool,
    pub ratio: f64,
    pub macroscopic: usize,
    pub trifurcations: Option<usize>,
    pub stabilized: bool,
    pub open_density: f64,
    pub odometer_at_origin: u64,
}

/// Samples `xi ~ mu_p` for trial `k` and applies the plan's automaton.
pub fn run_trial(
    plan: &ExperimentPlan,
    dynamics: &dyn Dynamics,
    geom: &Geometry,
    p: f64,
    k: usize,
    trifurcations: bool,
) -> Result<TrialOutcome> {
    let seed = plan.trial_seed(geom.side(), k);
    let xi = sample_at(&plan.family, p, geom, rng::derive(seed, &[tag::PARTICLES]))?;
    let out = dynamics.apply(&xi, geom, rng::derive(seed, &[tag::AUTOMATON]))?;
    let labels = label_clusters(&out.omega, geom)?;
    let stats = labels.stats();
    let macroscopic = labels.count_infinite(geom, Surrogate::Macroscopic { delta: plan.delta() });
    let trifurcations = if trifurcations {
        Some(
            count_coarse_trifurcations(&out.omega, geom, plan.block_radius, None, plan.surrogate)?
                .count(),
        )
    } else {
        None
    };
    Ok(TrialOutcome {
        crossing: stats.crossing.first().copied().unwrap_or(false),
        ratio: stats.ratio,
        macroscopic,
        trifurcations,
        stabilized: out.stabilized,
        open_density: out.omega.density(),
        odometer_at_origin: out.odometer.map_or(0, |o| o.get(0)),
    })
}

/// Runs every trial of the plan at `(L, p)` and aggregates in trial order.
pub fn run_point(
    plan: &ExperimentPlan,
    dynamics: &dyn Dynamics,
    side: usize,
    p: f64,
    trifurcations: bool,
) -> Result<SweepRow> {
    let geom = plan.geometry(side)?;
    let outcomes: Vec<TrialOutcome> = (0..plan.trials)
        .into_par_iter()
        .map(|k| run_trial(plan, dynamics, &geom, p, k, trifurcations))
        .collect::<Result<_>>()?;
    Ok(aggregate(plan, dynamics, &geom, p, &outcomes))
}

fn aggregate(
    plan: &ExperimentPlan,
    dynamics: &dyn Dynamics,
    geom: &Geometry,
    p: f64,
    outcomes: &[TrialOutcome],
) -> SweepRow {
    let n = outcomes.len();
    let mean = |f: &dyn Fn(&TrialOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n as f64;
    let crossings = outcomes.iter().filter(|o| o.crossing).count();
    let (ci_lo, ci_hi) = wilson_interval(crossings, n);
    let trifurcations_mean = outcomes
        .iter()
        .map(|o| o.trifurcations.map(|t| t as f64))
        .sum::<Option<f64>>()
        .map(|s| s / n as f64);
    SweepRow {
        automaton: dynamics.label(),
        family: plan.family.name(),
        d: geom.dim(),
        side: geom.side(),
        boundary: geom.boundary().as_str(),
        p,
        trials: n,
        crossing_prob: crossings as f64 / n as f64,
        ci_lo,
        ci_hi,
        s2_over_s1_mean: mean(&|o| o.ratio),
        macroscopic_count_mean: mean(&|o| o.macroscopic as f64),
        trifurcations_mean,
        stab_fail_freq: mean(&|o| (!o.stabilized) as u8 as f64),
        seed: plan.seed,
        crossings,
        open_density_mean: mean(&|o| o.open_density),
        odometer_mean: mean(&|o| o.odometer_at_origin as f64),
    }
}

pub fn write_rows<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn wilson_matches_closed_form() {
        let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.975);
        assert!((z - Z95).abs() < 1e-9);
        let (lo, hi) = wilson_interval(5, 10);
        let half = z * (0.25 / 10.0 + z * z / 400.0).sqrt() / (1.0 + z * z / 10.0);
        assert!((lo - (0.5 - half)).abs() < 1e-12);
        assert!((hi - (0.5 + half)).abs() < 1e-12);
        for (k, n) in [(0, 1), (1, 1), (0, 50), (50, 50), (17, 40)] {
            let (lo, hi) = wilson_interval(k, n);
            let phat = k as f64 / n as f64;
            assert!(0.0 <= lo && lo <= phat && phat <= hi && hi <= 1.0);
        }
    }

    #[test]
    fn csv_header_and_empty_trifurcations() {
        let plan = ExperimentPlan::new(
            Automaton::identity(1.0),
            MeasureFamily::scaled_bernoulli(1.0).unwrap(),
        );
        let row = run_point(&plan, &plan.automaton, 8, 0.5, false).unwrap();
        let mut buf = Vec::new();
        write_rows(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "automaton,family,d,L,boundary,p,trials,crossing_prob,ci_lo,ci_hi,\
             s2_over_s1_mean,macroscopic_count_mean,trifurcations_mean,stab_fail_freq,seed"
        );
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 15);
        assert_eq!(fields[12], "");
        assert_eq!(fields[14], "24301");
    }

    #[test]
    fn single_trial_smoke() {
        let mut plan = ExperimentPlan::new(
            Automaton::identity(1.0),
            MeasureFamily::scaled_bernoulli(1.0).unwrap(),
        );
        plan.trials = 1;
        let row = run_point(&plan, &plan.automaton, 16, 0.6, true).unwrap();
        assert!(row.crossing_prob == 0.0 || row.crossing_prob == 1.0);
        assert!(row.ci_lo <= row.crossing_prob && row.crossing_prob <= row.ci_hi);
        assert!(row.trifurcations_mean.is_some());
    }

    #[test]
    fn plan_validation() {
        let mut plan = ExperimentPlan::new(
            Automaton::identity(1.0),
            MeasureFamily::scaled_bernoulli(1.0).unwrap(),
        );
        assert!(plan.validate().is_ok());
        plan.trials = 0;
        assert!(plan.validate().is_err());
        plan.trials = 1;
        plan.sizes.clear();
        assert!(plan.validate().is_err());
    }
}
