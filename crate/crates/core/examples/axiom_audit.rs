//! Audits sandpile, bootstrap and activated random walk against the
//! monotonicity, threshold, covariance and connected-addition properties.

use monoperc::automata::Automaton;
use monoperc::experiments::{verify_axioms, ExperimentPlan};
use monoperc::measures::MeasureFamily;

fn main() -> monoperc::Result<()> {
    let cases = [
        (Automaton::sandpile(), MeasureFamily::poisson(4.0, 4.0)?),
        (Automaton::bootstrap(2), MeasureFamily::scaled_bernoulli(1.0)?),
        (Automaton::arw(1.0), MeasureFamily::poisson(2.0, 2.0)?),
    ];
    for (automaton, family) in cases {
        let mut plan = ExperimentPlan::new(automaton, family);
        plan.sizes = vec![16];
        plan.trials = 100;
        let report = verify_axioms(&plan)?;
        println!("{}:", report.automaton);
        for c in &report.checks {
            println!("  {:<8} {} violations, {} skipped of {}", c.axiom, c.violations, c.skipped, c.trials);
        }
    }
    Ok(())
}
