//! Coarse-trifurcation counts: a hand-built three-armed cluster, then the
//! density in supercritical site percolation.

use monoperc::automata::{Automaton, SiteConfig};
use monoperc::clusters::{count_coarse_trifurcations, Surrogate};
use monoperc::experiments::{trifurcation_scan, ExperimentPlan};
use monoperc::lattice::{Geometry, Site};
use monoperc::measures::MeasureFamily;

fn main() -> monoperc::Result<()> {
    let g = Geometry::open_box(2, 17)?;
    let centre = g.index(&Site::from([8, 8]))?;
    let mut open = g.ball_indices(centre, 1);
    for k in 0..17 {
        if k != 8 {
            open.push(g.index(&Site::from([k, 8]))?);
        }
        if k > 8 {
            open.push(g.index(&Site::from([8, k]))?);
        }
    }
    let omega = SiteConfig::from_sites(g.len(), open);
    let t = count_coarse_trifurcations(&omega, &g, 1, None, Surrogate::BoundaryContact)?;
    println!("T-shaped cluster: {} of {} candidates", t.count(), t.candidates);

    let mut plan = ExperimentPlan::new(Automaton::identity(1.0), MeasureFamily::scaled_bernoulli(1.0)?);
    plan.sizes = vec![32, 64, 128];
    plan.trials = 20;
    for r in trifurcation_scan(&plan, 0.7, 1)? {
        println!(
            "L={:3}: mean {:7.2}  per L {:.4}  per L^2 {:.6}",
            r.side, r.mean, r.per_surface, r.per_volume
        );
    }
    Ok(())
}
