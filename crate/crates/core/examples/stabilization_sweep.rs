//! Frequency with which a sandpile on the torus fails to stabilize within
//! the toppling cap, as the particle density grows.

use monoperc::automata::Automaton;
use monoperc::experiments::{estimate_pc_stab, ExperimentPlan, ParamRange};
use monoperc::lattice::Boundary;
use monoperc::measures::MeasureFamily;

fn main() -> monoperc::Result<()> {
    let mut plan = ExperimentPlan::new(Automaton::sandpile(), MeasureFamily::poisson(4.0, 4.0)?);
    plan.boundary = Boundary::Torus;
    plan.sizes = vec![8, 16];
    plan.trials = 20;
    plan.params = ParamRange::Grid(vec![0.3, 0.4, 0.45, 0.5, 0.55, 0.6, 0.8]);
    let sweep = estimate_pc_stab(&plan)?;
    for r in &sweep.rows {
        println!(
            "L={:2} mean {:.1}: failure {:.2}, odometer at origin {:10.1}",
            r.side,
            4.0 * r.p,
            r.stab_fail_freq,
            r.odometer_mean
        );
    }
    for (side, c) in sweep.crossover {
        println!("L={side}: failure frequency crosses 1/2 at p = {c:?}");
    }
    Ok(())
}
