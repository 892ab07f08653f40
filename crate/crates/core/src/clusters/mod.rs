//! Connected components of open sites and the analyses built on them.

mod distance;
mod transport;
mod trifurcation;
mod union_find;

use std::io::Write;

pub use distance::{cluster_distance, set_distance, DistanceReport};
pub use transport::{
    mtp_check, DistanceAttainmentKernel, MtpReport, TransportKernel, UnitNeighborKernel,
    ZeroKernel, MTP_TOLERANCE,
};
pub use trifurcation::{count_coarse_trifurcations, TrifurcationCount};
pub use union_find::DisjointSet;

use crate::automata::SiteConfig;
use crate::error::{Error, Result};
use crate::lattice::{Boundary, Geometry};

const UNLABELED: u32 = u32::MAX;

/// Finite-volume stand-in for "this cluster is infinite".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surrogate {
    /// The cluster touches the boundary of an open box. On a torus, where
    /// there is no boundary, this falls back to [`Surrogate::DEFAULT_DELTA`].
    BoundaryContact,
    /// The cluster holds at least `delta * L^d` sites.
    Macroscopic { delta: f64 },
}

impl Surrogate {
    pub const DEFAULT_DELTA: f64 = 0.01;

    pub fn name(&self) -> &'static str {
        match self {
            Surrogate::BoundaryContact => "boundary",
            Surrogate::Macroscopic { .. } => "macroscopic",
        }
    }

    pub fn is_infinite(&self, cluster: &Cluster, geom: &Geometry) -> bool {
        match *self {
            Surrogate::BoundaryContact if !geom.is_torus() => cluster.touches_boundary,
            Surrogate::BoundaryContact => {
                cluster.size as f64 >= Self::DEFAULT_DELTA * geom.len() as f64
            }
            Surrogate::Macroscopic { delta } => cluster.size as f64 >= delta * geom.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Smallest linear site index in the cluster.
    pub label: usize,
    pub size: usize,
    /// Some site has a sink neighbour (always false on a torus).
    pub touches_boundary: bool,
    /// Per axis: on an open box the cluster meets both faces orthogonal to
    /// the axis; on a torus it meets both slabs `x_a = 0` and `x_a = L/2`.
    pub crossing: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    labels: Vec<u32>,
    clusters: Vec<Cluster>,
}

impl ClusterLabels {
    /// Canonical label of a site, `None` when closed.
    pub fn label_of(&self, site: usize) -> Option<usize> {
        match self.labels[site] {
            UNLABELED => None,
            l => Some(l as usize),
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        (0..self.labels.len()).map(|i| self.label_of(i))
    }

    /// Clusters sorted by label.
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, label: usize) -> Option<&Cluster> {
        self.clusters
            .binary_search_by_key(&label, |c| c.label)
            .ok()
            .map(|k| &self.clusters[k])
    }

    pub fn count(&self) -> usize {
        self.clusters.len()
    }

    pub fn site_count(&self) -> usize {
        self.labels.len()
    }

    pub fn sites_of(&self, label: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l as usize == label && l != UNLABELED)
            .map(|(i, _)| i)
            .collect()
    }

    /// Largest cluster; ties go to the smaller label.
    pub fn largest(&self) -> Option<&Cluster> {
        self.clusters
            .iter()
            .max_by(|a, b| a.size.cmp(&b.size).then(b.label.cmp(&a.label)))
    }

    pub fn same_cluster(&self, a: usize, b: usize) -> bool {
        matches!((self.label_of(a), self.label_of(b)), (Some(x), Some(y)) if x == y)
    }

    pub fn stats(&self) -> ClusterStats {
        let mut sizes: Vec<usize> = self.clusters.iter().map(|c| c.size).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let s1 = sizes.first().copied().unwrap_or(0);
        let s2 = sizes.get(1).copied().unwrap_or(0);
        let axes = self.clusters.first().map_or(0, |c| c.crossing.len());
        let crossing = (0..axes)
            .map(|a| self.clusters.iter().any(|c| c.crossing[a]))
            .collect();
        ClusterStats {
            count: self.clusters.len(),
            largest: s1,
            second: s2,
            ratio: if s1 == 0 || s2 == 0 {
                0.0
            } else {
                s2 as f64 / s1 as f64
            },
            crossing,
        }
    }

    pub fn count_infinite(&self, geom: &Geometry, surrogate: Surrogate) -> usize {
        self.clusters
            .iter()
            .filter(|c| surrogate.is_infinite(c, geom))
            .count()
    }

    /// Writes `site,label` rows; closed sites get an empty label.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["site", "label"])?;
        for (i, l) in self.labels().enumerate() {
            let label = l.map(|l| l.to_string()).unwrap_or_default();
            w.write_record([i.to_string(), label])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub count: usize,
    pub largest: usize,
    pub second: usize,
    /// `second / largest`, zero with fewer than two clusters.
    pub ratio: f64,
    /// Per axis, whether any cluster crosses.
    pub crossing: Vec<bool>,
}

pub fn cluster_stats(labels: &ClusterLabels) -> ClusterStats {
    labels.stats()
}

/// Labels the open clusters of `omega` by union-find over open neighbour
/// pairs. Each cluster is named after its smallest site index.
pub fn label_clusters(omega: &SiteConfig, geom: &Geometry) -> Result<ClusterLabels> {
    omega.check_shape(geom)?;
    let n = geom.len();
    let mut dsu = DisjointSet::new(n);
    for i in omega.open_sites() {
        for j in geom.neighbor_indices(i) {
            if j > i && omega.is_open(j) {
                dsu.union(i, j);
            }
        }
    }
    let mut labels = vec![UNLABELED; n];
    let mut root_label = vec![UNLABELED; n];
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut slot_of_root = vec![usize::MAX; n];
    let side = geom.side();
    let half = side / 2;
    for i in omega.open_sites() {
        let r = dsu.find(i);
        if root_label[r] == UNLABELED {
            root_label[r] = i as u32;
            slot_of_root[r] = clusters.len();
            clusters.push(Cluster {
                label: i,
                size: 0,
                touches_boundary: false,
                crossing: vec![false; geom.dim()],
            });
        }
        labels[i] = root_label[r];
        let c = &mut clusters[slot_of_root[r]];
        c.size += 1;
        c.touches_boundary |= geom.on_boundary(i);
    }
    // Crossing needs both faces per axis; track them separately.
    let mut low = vec![vec![false; geom.dim()]; clusters.len()];
    let mut high = vec![vec![false; geom.dim()]; clusters.len()];
    for i in omega.open_sites() {
        let k = slot_of_root[dsu.find(i)];
        for (a, x) in geom.coords_of(i).enumerate() {
            match geom.boundary() {
                Boundary::OpenBox => {
                    low[k][a] |= x == 0;
                    high[k][a] |= x == side - 1;
                }
                Boundary::Torus => {
                    low[k][a] |= x == 0;
                    high[k][a] |= x == half;
                }
            }
        }
    }
    for (k, c) in clusters.iter_mut().enumerate() {
        for a in 0..geom.dim() {
            c.crossing[a] = low[k][a] && high[k][a];
        }
    }
    Ok(ClusterLabels { labels, clusters })
}

/// Finds a site's cluster label, failing when the label does not exist.
pub(crate) fn require(labels: &ClusterLabels, label: usize) -> Result<&Cluster> {
    labels.cluster(label).ok_or(Error::MissingLabel(label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;
    use std::collections::VecDeque;

    fn flood_fill(omega: &SiteConfig, g: &Geometry) -> Vec<Option<usize>> {
        let mut out = vec![None; g.len()];
        for s in omega.open_sites() {
            if out[s].is_some() {
                continue;
            }
            let mut q = VecDeque::from([s]);
            out[s] = Some(s);
            while let Some(i) = q.pop_front() {
                for j in g.neighbor_indices(i) {
                    if omega.is_open(j) && out[j].is_none() {
                        out[j] = Some(s);
                        q.push_back(j);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn empty_and_full() {
        let g = Geometry::torus(2, 6).unwrap();
        assert_eq!(label_clusters(&SiteConfig::closed(36), &g).unwrap().count(), 0);
        let full = label_clusters(&SiteConfig::filled(36), &g).unwrap();
        assert_eq!(full.count(), 1);
        assert_eq!(full.clusters()[0].size, 36);
    }

    #[test]
    fn opposite_corners_are_separate() {
        let g = Geometry::open_box(2, 4).unwrap();
        let a = g.index(&Site::from([0, 0])).unwrap();
        let b = g.index(&Site::from([3, 3])).unwrap();
        let l = label_clusters(&SiteConfig::from_sites(16, [a, b]), &g).unwrap();
        assert_eq!(l.count(), 2);
        assert!(l.clusters().iter().all(|c| c.size == 1));
    }

    #[test]
    fn stats_examples() {
        let g = Geometry::open_box(2, 8).unwrap();
        let mut sites: Vec<usize> = (0..8).map(|x| g.index(&Site::from([x, 0])).unwrap()).collect();
        sites.push(g.index(&Site::from([4, 4])).unwrap());
        let s = label_clusters(&SiteConfig::from_sites(64, sites), &g)
            .unwrap()
            .stats();
        assert_eq!((s.largest, s.second), (8, 1));
        assert_eq!(s.ratio, 1.0 / 8.0);
        assert_eq!(s.crossing, vec![true, false]);

        let single = label_clusters(&SiteConfig::from_sites(64, [0, 1]), &g)
            .unwrap()
            .stats();
        assert_eq!(single.ratio, 0.0);
        assert_eq!(single.second, 0);

        let twins = label_clusters(&SiteConfig::from_sites(64, [0, 63]), &g)
            .unwrap()
            .stats();
        assert_eq!(twins.ratio, 1.0);
    }

    #[test]
    fn torus_crossing_proxy() {
        let g = Geometry::torus(2, 8).unwrap();
        let sites: Vec<usize> = (0..=4).map(|x| g.index(&Site::from([x, 2])).unwrap()).collect();
        let s = label_clusters(&SiteConfig::from_sites(64, sites), &g)
            .unwrap()
            .stats();
        assert_eq!(s.crossing, vec![true, false]);
    }

    #[test]
    fn union_find_agrees_with_flood_fill() {
        for trial in 0..200u64 {
            let side = 2 + (trial as usize % 15);
            let torus = trial % 3 == 0 && side >= 3;
            let g = Geometry::new(2, side, if torus { Boundary::Torus } else { Boundary::OpenBox })
                .unwrap();
            let p = 0.3 + 0.4 * crate::rng::site_uniform(trial, 999_999);
            let omega = SiteConfig::new(
                (0..g.len())
                    .map(|i| crate::rng::site_uniform(trial, i) < p)
                    .collect(),
            );
            let got: Vec<Option<usize>> = label_clusters(&omega, &g).unwrap().labels().collect();
            assert_eq!(got, flood_fill(&omega, &g), "trial {trial}");
        }
    }

    #[test]
    fn sizes_sum_to_open_count() {
        let g = Geometry::open_box(3, 6).unwrap();
        let omega = SiteConfig::new((0..g.len()).map(|i| crate::rng::site_uniform(5, i) < 0.4).collect());
        let l = label_clusters(&omega, &g).unwrap();
        assert_eq!(
            l.clusters().iter().map(|c| c.size).sum::<usize>(),
            omega.count_open()
        );
    }

    #[test]
    fn csv_export() {
        let g = Geometry::open_box(1, 3).unwrap();
        let l = label_clusters(&SiteConfig::from_sites(3, [1, 2]), &g).unwrap();
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "site,label\n0,\n1,1\n2,1\n");
    }
}
