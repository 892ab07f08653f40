use rayon::prelude::*;

use super::ExperimentPlan;
use crate::automata::{interpolate_config, Dynamics, ParticleConfig, SiteConfig};
use crate::clusters::{label_clusters, set_distance, Surrogate};
use crate::error::Result;
use crate::lattice::Geometry;
use crate::measures::CouplingSampler;
use crate::rng::{self, tag};

/// Attempts evaluated in parallel between stopping checks.
const BATCH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct MergeReport {
    pub seed: u64,
    /// A macroscopic upper cluster not containing the lower giant exists.
    pub found_pair: bool,
    pub distance: Option<usize>,
    /// Attaining pair `(x, y)`: `x` in the giant, `y` in the other cluster.
    pub pair: Option<(usize, usize)>,
    /// Sites whose mass was raised to `t`.
    pub raised: Vec<usize>,
    pub merged: bool,
    /// Every automaton run involved stabilized.
    pub stabilized: bool,
}

/// Joins the largest cluster of `omega12` to a distinct
/// macroscopic cluster of `T(z)` by raising the interior of a geodesic
/// between an attaining pair to mass `t` and re-applying `T`.
///
/// The distinct cluster is the largest macroscopic cluster of `T(z)` that
/// contains no site of the giant; ties go to the smaller label.
pub fn geodesic_merge(
    dynamics: &dyn Dynamics,
    geom: &Geometry,
    omega12: &SiteConfig,
    z: &ParticleConfig,
    seed: u64,
    surrogate: Surrogate,
) -> Result<MergeReport> {
    let mut report = MergeReport {
        seed,
        found_pair: false,
        distance: None,
        pair: None,
        raised: Vec::new(),
        merged: false,
        stabilized: true,
    };
    let out3 = dynamics.apply(z, geom, seed)?;
    report.stabilized = out3.stabilized;
    let lower = label_clusters(omega12, geom)?;
    let Some(giant) = lower.largest() else {
        return Ok(report);
    };
    let giant_sites = lower.sites_of(giant.label);
    let upper = label_clusters(&out3.omega, geom)?;
    let mut home: Vec<usize> = giant_sites.iter().filter_map(|&s| upper.label_of(s)).collect();
    home.sort_unstable();
    home.dedup();
    let other = upper
        .clusters()
        .iter()
        .filter(|c| surrogate.is_infinite(c, geom) && home.binary_search(&c.label).is_err())
        .max_by(|a, b| a.size.cmp(&b.size).then(b.label.cmp(&a.label)));
    let Some(other) = other else {
        return Ok(report);
    };
    report.found_pair = true;
    let dist = set_distance(geom, &giant_sites, &upper.sites_of(other.label))?;
    let (x, y) = dist.attaining_pairs[0];
    report.distance = Some(dist.distance);
    report.pair = Some((x, y));

    let path = geom.geodesic_indices(x, y);
    let t = dynamics.threshold(geom);
    let mut values = z.values().to_vec();
    for &v in &path[1..path.len() - 1] {
        if values[v] < t {
            values[v] = t;
        }
        report.raised.push(v);
    }
    let after = dynamics.apply(&ParticleConfig::new(values)?, geom, seed)?;
    report.stabilized &= after.stabilized;
    report.merged = label_clusters(&after.omega, geom)?.same_cluster(x, y);
    Ok(report)
}

/// One coupled draw at `params` on a window of side `side`: the giant of
/// `T(X)` interpolated with `{Y >= t}` is merged into `T(Z)`.
pub fn geodesic_merge_experiment(
    plan: &ExperimentPlan,
    params: [f64; 3],
    side: usize,
    seed: u64,
) -> Result<MergeReport> {
    let geom = plan.geometry(side)?;
    let sampler = CouplingSampler::new(
        plan.family.clone(),
        params,
        rng::derive(seed, &[tag::PARTICLES]),
    )?;
    let triple = sampler.sample(&geom);
    let a = rng::derive(seed, &[tag::AUTOMATON]);
    let dynamics = &plan.automaton;
    let lower = dynamics.apply(&triple.x, &geom, a)?;
    let omega12 = interpolate_config(&lower.omega, &triple.y, dynamics.threshold(&geom))?;
    let mut report = geodesic_merge(dynamics, &geom, &omega12, &triple.z, a, plan.surrogate)?;
    report.seed = seed;
    report.stabilized &= lower.stabilized;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeSummary {
    pub attempts: usize,
    pub found: usize,
    /// Found pairs that merged.
    pub merged: usize,
    /// Every attempt, in order.
    pub reports: Vec<MergeReport>,
}

impl MergeSummary {
    /// Found pairs with stabilized runs that did not merge.
    pub fn failures(&self) -> impl Iterator<Item = &MergeReport> {
        self.reports
            .iter()
            .filter(|r| r.found_pair && r.stabilized && !r.merged)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial", "seed", "found_pair", "distance", "x", "y", "raised", "merged", "stabilized"])?;
        for (k, r) in self.reports.iter().enumerate() {
            let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                k.to_string(),
                r.seed.to_string(),
                r.found_pair.to_string(),
                opt(r.distance),
                opt(r.pair.map(|p| p.0)),
                opt(r.pair.map(|p| p.1)),
                r.raised.len().to_string(),
                r.merged.to_string(),
                r.stabilized.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs merge trials at `plan.coupling` on the first size until `want`
/// trials have found a distinct cluster or `max_attempts` is reached.
pub fn staged_merge_trials(
    plan: &ExperimentPlan,
    want: usize,
    max_attempts: usize,
) -> Result<MergeSummary> {
    plan.validate()?;
    let side = plan.sizes[0];
    let mut summary = MergeSummary {
        attempts: 0,
        found: 0,
        merged: 0,
        reports: Vec::new(),
    };
    let mut next = 0;
    while summary.found < want && next < max_attempts {
        let end = (next + BATCH).min(max_attempts);
        let batch: Vec<MergeReport> = (next..end)
            .into_par_iter()
            .map(|k| geodesic_merge_experiment(plan, plan.coupling, side, plan.trial_seed(side, k)))
            .collect::<Result<_>>()?;
        for r in batch {
            if summary.found == want {
                break;
            }
            summary.attempts += 1;
            if r.found_pair {
                summary.found += 1;
                summary.merged += r.merged as usize;
            }
            summary.reports.push(r);
        }
        next = end;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Automaton;
    use crate::lattice::Site;
    use crate::measures::MeasureFamily;

    #[test]
    fn parallel_rows_merge_through_one_site() {
        let g = Geometry::open_box(2, 7).unwrap();
        let row = |y: usize| -> Vec<usize> {
            (0..7).map(|x| g.index(&Site::from([x, y])).unwrap()).collect()
        };
        let mut z = vec![0.0; g.len()];
        for s in row(0).into_iter().chain(row(2)) {
            z[s] = 1.0;
        }
        let z = ParticleConfig::new(z).unwrap();
        let omega12 = SiteConfig::from_sites(g.len(), row(0));
        let r = geodesic_merge(&Automaton::identity(1.0), &g, &omega12, &z, 0, Surrogate::BoundaryContact)
            .unwrap();
        assert!(r.found_pair);
        assert_eq!(r.distance, Some(2));
        assert_eq!(r.pair, Some((row(0)[0], row(2)[0])));
        assert_eq!(r.raised, vec![g.index(&Site::from([0, 1])).unwrap()]);
        assert!(r.merged);
    }

    #[test]
    fn nothing_to_merge_when_upper_cluster_holds_the_giant() {
        let g = Geometry::open_box(2, 6).unwrap();
        let z = ParticleConfig::new(vec![1.0; g.len()]).unwrap();
        let omega12 = SiteConfig::from_sites(g.len(), [0, 1]);
        let r = geodesic_merge(&Automaton::identity(1.0), &g, &omega12, &z, 0, Surrogate::BoundaryContact)
            .unwrap();
        assert!(!r.found_pair);
        assert!(!r.merged);
    }

    #[test]
    fn subcritical_upper_parameter_finds_nothing() {
        let mut plan = ExperimentPlan::new(
            Automaton::identity(1.0),
            MeasureFamily::scaled_bernoulli(1.0).unwrap(),
        );
        plan.sizes = vec![64];
        plan.coupling = [0.02, 0.04, 0.06];
        plan.surrogate = Surrogate::Macroscopic { delta: 0.01 };
        let s = staged_merge_trials(&plan, 1, 20).unwrap();
        assert_eq!(s.attempts, 20);
        assert_eq!(s.found, 0);
    }

    #[test]
    fn sandpile_merges_whenever_a_pair_is_found() {
        let mut plan = ExperimentPlan::new(
            Automaton::sandpile(),
            MeasureFamily::poisson(4.0, 4.0).unwrap(),
        );
        plan.sizes = vec![24];
        plan.coupling = [0.3, 0.4, 0.5];
        let s = staged_merge_trials(&plan, 5, 400).unwrap();
        assert_eq!(s.found, 5, "{} attempts", s.attempts);
        assert_eq!(s.merged, 5);
        assert_eq!(s.failures().count(), 0);
    }
}
