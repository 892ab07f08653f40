//! Bisects for the crossing threshold of plain site percolation and of the
//! sandpile's toppled set.
//!
//! `cargo run --release --example critical_point`

use monoperc::automata::Automaton;
use monoperc::experiments::{estimate_pc_topple, ExperimentPlan, ParamRange, PcStatus};
use monoperc::measures::MeasureFamily;

fn main() -> monoperc::Result<()> {
    let mut plan = ExperimentPlan::new(Automaton::identity(1.0), MeasureFamily::scaled_bernoulli(1.0)?);
    plan.sizes = vec![16, 32, 64];
    plan.trials = 100;
    plan.params = ParamRange::Bracket { lo: 0.4, hi: 0.8 };
    report("identity, Bernoulli", &plan)?;

    plan.automaton = Automaton::sandpile();
    plan.family = MeasureFamily::poisson(4.0, 4.0)?;
    plan.params = ParamRange::Bracket { lo: 0.05, hi: 0.9 };
    report("sandpile, Poisson(4p)", &plan)?;
    Ok(())
}

fn report(name: &str, plan: &ExperimentPlan) -> monoperc::Result<()> {
    let est = estimate_pc_topple(plan)?;
    println!("{name}:");
    for s in &est.sizes {
        match s.status {
            PcStatus::Estimated { pc_hat, lo, hi } => {
                println!("  L={:3}  pc_hat {pc_hat:.4}  [{lo:.4}, {hi:.4}]", s.side)
            }
            PcStatus::BracketFailure { lo_prob, hi_prob } => {
                println!("  L={:3}  no bracket ({lo_prob:.2} .. {hi_prob:.2})", s.side)
            }
        }
    }
    println!("  crossing-order violations: {}", est.order_violations);
    Ok(())
}
