//! Activated random walk with site-wise instruction stacks: the set of sites
//! where a particle jumped, and its dependence on the sleep rate.

use monoperc::automata::{arw_stabilize_ordered, default_cap, Order};
use monoperc::lattice::Geometry;
use monoperc::measures::{sample_at, MeasureFamily};

fn main() -> monoperc::Result<()> {
    let g = Geometry::open_box(2, 32)?;
    let family = MeasureFamily::poisson(1.0, 2.0)?;
    let xi = sample_at(&family, 0.8, &g, 11)?;
    println!("{} particles on a 32x32 box", xi.total());
    for lambda in [0.1, 0.5, 1.0, 4.0, f64::INFINITY] {
        let r = arw_stabilize_ordered(&xi, &g, lambda, 3, default_cap(&g), Order::Fifo)?;
        println!(
            "lambda={lambda:<4}: jumps {:7}, sites visited {:4}, sleeping {:4}, lost {:4}",
            r.result.odometer.total(),
            r.result.omega.count_open(),
            r.sleeping.iter().filter(|&&s| s).count(),
            r.result.dissipated
        );
    }
    let fifo = arw_stabilize_ordered(&xi, &g, 1.0, 3, default_cap(&g), Order::Fifo)?;
    let shuffled = arw_stabilize_ordered(&xi, &g, 1.0, 3, default_cap(&g), Order::Random { seed: 99 })?;
    println!(
        "FIFO and random order use the same instructions: {}",
        fifo.instructions_used == shuffled.instructions_used
    );
    Ok(())
}
