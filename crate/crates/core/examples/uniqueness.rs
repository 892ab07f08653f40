//! Second-largest to largest cluster ratio as the window grows.
//!
//! `cargo run --release --example uniqueness`

use monoperc::automata::Automaton;
use monoperc::experiments::{uniqueness_scan, ExperimentPlan};
use monoperc::measures::MeasureFamily;

fn main() -> monoperc::Result<()> {
    let mut plan = ExperimentPlan::new(Automaton::identity(1.0), MeasureFamily::scaled_bernoulli(1.0)?);
    plan.sizes = vec![16, 32, 64, 128];
    for p in [0.3, 0.7] {
        println!("p = {p}");
        for r in uniqueness_scan(&plan, p)? {
            println!(
                "  L={:3}  s2/s1 {:.4}  macroscopic clusters {:.2}  crossing {:.2}",
                r.side, r.s2_over_s1_mean, r.macroscopic_count_mean, r.crossing_prob
            );
        }
    }
    Ok(())
}
