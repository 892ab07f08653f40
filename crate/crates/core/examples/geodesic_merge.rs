//! Staged geodesic merge trials for a coupled sandpile.
//!
//! `cargo run --release --example geodesic_merge -- [L] [p1 p2 p3] [trials]`

use monoperc::automata::Automaton;
use monoperc::clusters::Surrogate;
use monoperc::experiments::{staged_merge_trials, ExperimentPlan};
use monoperc::measures::MeasureFamily;

fn main() -> monoperc::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("number")).collect();
    let side = args.first().map_or(32, |&l| l as usize);
    let coupling = match args.get(1..4) {
        Some(p) => [p[0], p[1], p[2]],
        None => [0.3, 0.4, 0.5],
    };
    let want = args.get(4).map_or(20, |&t| t as usize);

    let mut plan = ExperimentPlan::new(Automaton::sandpile(), MeasureFamily::poisson(4.0, 4.0)?);
    plan.sizes = vec![side];
    plan.coupling = coupling;
    plan.surrogate = Surrogate::Macroscopic { delta: 0.01 };
    let s = staged_merge_trials(&plan, want, 50 * want)?;
    println!("L={side} coupling={coupling:?}");
    println!("attempts {} found {} merged {}", s.attempts, s.found, s.merged);
    for r in s.reports.iter().filter(|r| r.found_pair).take(5) {
        let (x, y) = r.pair.expect("found");
        println!(
            "seed {:>20}  D={}  pair ({x}, {y})  raised {}  merged {}",
            r.seed,
            r.distance.expect("found"),
            r.raised.len(),
            r.merged
        );
    }
    Ok(())
}
