//! Bootstrap percolation: random seeds grow into their 2-neighbour closure.

use monoperc::automata::bootstrap_apply;
use monoperc::lattice::Geometry;
use monoperc::measures::{sample_at, MeasureFamily};

fn main() -> monoperc::Result<()> {
    let side = 24;
    let g = Geometry::open_box(2, side)?;
    let family = MeasureFamily::scaled_bernoulli(1.0)?;
    for p in [0.03, 0.06, 0.09, 0.12] {
        let xi = sample_at(&family, p, &g, 7)?;
        let omega = bootstrap_apply(&xi, &g, 2, 1.0)?;
        let seeds = xi.values().iter().filter(|&&m| m >= 1.0).count();
        println!("p={p:.2}: {seeds:3} seeds -> {:3} occupied ({:.0}%)", omega.count_open(), 100.0 * omega.density());
    }

    let xi = sample_at(&family, 0.06, &g, 7)?;
    let omega = bootstrap_apply(&xi, &g, 2, 1.0)?;
    for y in (0..side).rev() {
        let row: String = (0..side)
            .map(|x| {
                let i = x + y * side;
                match (xi.get(i) >= 1.0, omega.is_open(i)) {
                    (true, _) => '@',
                    (false, true) => '#',
                    _ => '.',
                }
            })
            .collect();
        println!("{row}");
    }
    Ok(())
}
