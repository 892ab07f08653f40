//! Sent and received mass under translation averaging on the torus.

use monoperc::automata::{interpolate_config, Automaton, Dynamics};
use monoperc::clusters::{mtp_check, DistanceAttainmentKernel, TransportKernel, UnitNeighborKernel};
use monoperc::lattice::Geometry;
use monoperc::measures::{CouplingSampler, MeasureFamily};

fn main() -> monoperc::Result<()> {
    let g = Geometry::torus(2, 16)?;
    let identity = Automaton::identity(1.0);
    let family = MeasureFamily::scaled_bernoulli(1.0)?;
    let kernels: [&dyn TransportKernel; 2] = [&DistanceAttainmentKernel, &UnitNeighborKernel];
    for seed in 0..5 {
        let triple = CouplingSampler::new(family.clone(), [0.5, 0.55, 0.6], seed)?.sample(&g);
        let lower = identity.apply(&triple.x, &g, 0)?.omega;
        let a = interpolate_config(&lower, &triple.y, 1.0)?;
        let b = identity.apply(&triple.z, &g, 0)?.omega;
        for k in kernels {
            let r = mtp_check(&g, &a, &b, k)?;
            println!(
                "seed {seed} {:>5}: mass per site {:.4}, max |sent - received| {:e}",
                k.name(),
                r.sent[0],
                r.max_discrepancy
            );
        }
    }
    Ok(())
}
