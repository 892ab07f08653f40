use super::{run_point, ExperimentPlan, ParamRange, SweepRow, BISECTION_TOLERANCE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PcStatus {
    /// Bisection converged to the bracket `[lo, hi]`.
    Estimated { pc_hat: f64, lo: f64, hi: f64 },
    /// The crossing probability did not straddle 1/2 over the initial
    /// points: `lo_prob` at the smallest and `hi_prob` at the largest `p`.
    BracketFailure { lo_prob: f64, hi_prob: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeEstimate {
    pub side: usize,
    pub status: PcStatus,
}

impl SizeEstimate {
    pub fn pc_hat(&self) -> Option<f64> {
        match self.status {
            PcStatus::Estimated { pc_hat, .. } => Some(pc_hat),
            PcStatus::BracketFailure { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcEstimate {
    pub sizes: Vec<SizeEstimate>,
    /// Every evaluated point, by `L` then `p`.
    pub rows: Vec<SweepRow>,
    /// Adjacent pairs (in `p`, same `L`) whose crossing count decreases.
    pub order_violations: usize,
}

fn initial_points(params: &ParamRange) -> Result<Vec<f64>> {
    let mut ps = match params {
        ParamRange::Grid(g) => g.clone(),
        ParamRange::Bracket { lo, hi } => vec![*lo, *hi],
    };
    if ps.is_empty() {
        return Err(Error::Config("empty parameter grid".into()));
    }
    if let Some(&p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::ParameterRange(p));
    }
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    Ok(ps)
}

/// Locates, for each side, the `p` where the crossing probability passes
/// 1/2, by bisection down to [`BISECTION_TOLERANCE`].
pub fn estimate_pc_topple(plan: &ExperimentPlan) -> Result<PcEstimate> {
    plan.validate()?;
    let start = initial_points(&plan.params)?;
    let mut sizes = Vec::new();
    let mut rows = Vec::new();
    let mut order_violations = 0;
    for &side in &plan.sizes {
        let mut here: Vec<SweepRow> = start
            .iter()
            .map(|&p| run_point(plan, &plan.automaton, side, p, false))
            .collect::<Result<_>>()?;
        let first_above = here.iter().position(|r| r.crossing_prob >= 0.5);
        let status = match first_above {
            Some(i) if i > 0 => {
                let (mut lo, mut hi) = (here[i - 1].p, here[i].p);
                while hi - lo > BISECTION_TOLERANCE {
                    let mid = 0.5 * (lo + hi);
                    let row = run_point(plan, &plan.automaton, side, mid, false)?;
                    if row.crossing_prob >= 0.5 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    here.push(row);
                }
                PcStatus::Estimated {
                    pc_hat: 0.5 * (lo + hi),
                    lo,
                    hi,
                }
            }
            _ => {
                log::warn!("crossing probability at L={side} does not straddle 1/2");
                PcStatus::BracketFailure {
                    lo_prob: here[0].crossing_prob,
                    hi_prob: here[here.len() - 1].crossing_prob,
                }
            }
        };
        here.sort_by(|a, b| a.p.total_cmp(&b.p));
        order_violations += here
            .windows(2)
            .filter(|w| w[1].crossings < w[0].crossings)
            .count();
        sizes.push(SizeEstimate { side, status });
        rows.extend(here);
    }
    Ok(PcEstimate {
        sizes,
        rows,
        order_violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabSweep {
    pub rows: Vec<SweepRow>,
    /// Per side, the interpolated `p` where the failure frequency reaches
    /// 1/2, if the grid straddles it.
    pub crossover: Vec<(usize, Option<f64>)>,
}

/// Frequency of cap exhaustion on the torus across the parameter grid. A
/// bracket is expanded to nine evenly spaced points.
pub fn estimate_pc_stab(plan: &ExperimentPlan) -> Result<StabSweep> {
    plan.validate()?;
    if !plan.automaton.is_toppling() {
        return Err(Error::Precondition(format!(
            "stabilization sweep needs a sandpile or ARW, got {}",
            plan.automaton.kind()
        )));
    }
    if plan.boundary != crate::lattice::Boundary::Torus {
        return Err(Error::NotTorus);
    }
    let grid = match &plan.params {
        ParamRange::Bracket { lo, hi } => {
            ParamRange::Grid((0..9).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect())
        }
        g => g.clone(),
    };
    let ps = initial_points(&grid)?;
    let mut rows = Vec::new();
    let mut crossover = Vec::new();
    for &side in &plan.sizes {
        let here: Vec<SweepRow> = ps
            .iter()
            .map(|&p| run_point(plan, &plan.automaton, side, p, false))
            .collect::<Result<_>>()?;
        let cross = here.windows(2).find_map(|w| {
            let (a, b) = (w[0].stab_fail_freq, w[1].stab_fail_freq);
            (a < 0.5 && b >= 0.5).then(|| w[0].p + (w[1].p - w[0].p) * (0.5 - a) / (b - a))
        });
        crossover.push((side, cross));
        rows.extend(here);
    }
    Ok(StabSweep { rows, crossover })
}

/// Second-to-largest cluster ratio and macroscopic-cluster count at `p` for
/// every side of the plan.
pub fn uniqueness_scan(plan: &ExperimentPlan, p: f64) -> Result<Vec<SweepRow>> {
    plan.validate()?;
    plan.sizes
        .iter()
        .map(|&side| run_point(plan, &plan.automaton, side, p, false))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrifurcationRow {
    pub side: usize,
    pub mean: f64,
    /// `mean / L^(d-1)`.
    pub per_surface: f64,
    /// `mean / L^d`.
    pub per_volume: f64,
    pub row: SweepRow,
}

/// Mean coarse-trifurcation count with block radius `n` at `p`.
pub fn trifurcation_scan(
    plan: &ExperimentPlan,
    p: f64,
    n: usize,
) -> Result<Vec<TrifurcationRow>> {
    plan.validate()?;
    let plan = ExperimentPlan {
        block_radius: n,
        ..plan.clone()
    };
    plan.sizes
        .iter()
        .map(|&side| {
            let row = run_point(&plan, &plan.automaton, side, p, true)?;
            let mean = row.trifurcations_mean.expect("requested");
            let l = side as f64;
            let d = plan.dim as i32;
            Ok(TrifurcationRow {
                side,
                mean,
                per_surface: mean / l.powi(d - 1),
                per_volume: mean / l.powi(d),
                row,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Automaton;
    use crate::lattice::Boundary;
    use crate::measures::MeasureFamily;

    fn bernoulli_plan() -> ExperimentPlan {
        ExperimentPlan::new(
            Automaton::identity(1.0),
            MeasureFamily::scaled_bernoulli(1.0).unwrap(),
        )
    }

    #[test]
    fn subcritical_grid_fails_to_bracket() {
        let mut plan = bernoulli_plan();
        plan.sizes = vec![32];
        plan.params = ParamRange::Grid(vec![0.05, 0.1, 0.15, 0.2]);
        let est = estimate_pc_topple(&plan).unwrap();
        assert!(est.rows.iter().all(|r| r.crossing_prob < 0.1));
        assert!(matches!(est.sizes[0].status, PcStatus::BracketFailure { .. }));
        assert_eq!(est.order_violations, 0);
    }

    #[test]
    fn bisection_reaches_tolerance_and_is_monotone() {
        let mut plan = bernoulli_plan();
        plan.sizes = vec![16];
        plan.trials = 40;
        plan.params = ParamRange::Bracket { lo: 0.3, hi: 0.9 };
        let est = estimate_pc_topple(&plan).unwrap();
        match est.sizes[0].status {
            PcStatus::Estimated { pc_hat, lo, hi } => {
                assert!(hi - lo <= BISECTION_TOLERANCE);
                assert!(lo <= pc_hat && pc_hat <= hi);
            }
            ref s => panic!("unexpected {s:?}"),
        }
        assert_eq!(est.order_violations, 0);
    }

    #[test]
    fn relabelling_the_threshold_changes_nothing() {
        let mut a = bernoulli_plan();
        a.sizes = vec![12];
        a.trials = 20;
        a.params = ParamRange::Bracket { lo: 0.2, hi: 0.95 };
        let mut b = a.clone();
        b.automaton = Automaton::identity(3.0);
        b.family = MeasureFamily::scaled_bernoulli(3.0).unwrap();
        let ea = estimate_pc_topple(&a).unwrap();
        let eb = estimate_pc_topple(&b).unwrap();
        assert_eq!(ea.sizes, eb.sizes);
    }

    #[test]
    fn stabilization_sweep_examples() {
        let mut plan = ExperimentPlan::new(
            Automaton::sandpile(),
            MeasureFamily::poisson(4.0, 4.0).unwrap(),
        );
        plan.boundary = Boundary::Torus;
        plan.sizes = vec![8];
        plan.trials = 10;
        plan.params = ParamRange::Grid(vec![0.0, 0.2, 1.0]);
        let sweep = estimate_pc_stab(&plan).unwrap();
        assert_eq!(sweep.rows[0].stab_fail_freq, 0.0);
        assert_eq!(sweep.rows[1].stab_fail_freq, 0.0);
        assert_eq!(sweep.rows[2].stab_fail_freq, 1.0);
        assert!(sweep.crossover[0].1.is_some());
    }

    #[test]
    fn stabilization_sweep_preconditions() {
        let mut plan = bernoulli_plan();
        plan.boundary = Boundary::Torus;
        assert!(estimate_pc_stab(&plan).is_err());
        plan.automaton = Automaton::sandpile();
        plan.boundary = Boundary::OpenBox;
        assert!(matches!(estimate_pc_stab(&plan), Err(Error::NotTorus)));
    }

    #[test]
    fn full_window_diagnostics() {
        let mut plan = bernoulli_plan();
        plan.sizes = vec![9, 17];
        plan.trials = 3;
        for row in uniqueness_scan(&plan, 1.0).unwrap() {
            assert_eq!(row.s2_over_s1_mean, 0.0);
            assert_eq!(row.macroscopic_count_mean, 1.0);
            assert_eq!(row.crossing_prob, 1.0);
        }
        for row in trifurcation_scan(&plan, 1.0, 1).unwrap() {
            assert_eq!(row.mean, 0.0);
        }
    }
}
