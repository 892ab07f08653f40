//! Labels the toppled set of a sandpile and reports cluster statistics.

use monoperc::automata::{Automaton, Dynamics};
use monoperc::clusters::{label_clusters, Surrogate};
use monoperc::lattice::Geometry;
use monoperc::measures::{sample_at, MeasureFamily};

fn main() -> monoperc::Result<()> {
    let g = Geometry::open_box(2, 64)?;
    let family = MeasureFamily::poisson(4.0, 4.0)?;
    let sandpile = Automaton::sandpile();
    for p in [0.2, 0.3, 0.4, 0.5] {
        let xi = sample_at(&family, p, &g, 5)?;
        let omega = sandpile.apply(&xi, &g, 0)?.omega;
        let labels = label_clusters(&omega, &g)?;
        let s = labels.stats();
        println!(
            "mean {:.1}: {:4} clusters, largest {:4}, s2/s1 {:.3}, crossing {:?}, boundary-touching {}",
            family.mean(p)?,
            s.count,
            s.largest,
            s.ratio,
            s.crossing,
            labels.count_infinite(&g, Surrogate::BoundaryContact)
        );
    }
    let omega = sandpile.apply(&sample_at(&family, 0.3, &g, 5)?, &g, 0)?.omega;
    let path = std::env::temp_dir().join("monoperc_labels.csv");
    label_clusters(&omega, &g)?.write_csv(std::fs::File::create(&path)?)?;
    println!("labels written to {}", path.display());
    Ok(())
}
