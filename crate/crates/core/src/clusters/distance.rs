use std::collections::VecDeque;

use super::{require, ClusterLabels};
use crate::error::{Error, Result};
use crate::lattice::Geometry;

/// Graph distance between two site sets and every pair attaining it.
/// Distances are measured in the full lattice, closed sites included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceReport {
    pub distance: usize,
    /// `(a, b)` site indices with `a` in the first set, `b` in the second and
    /// `dist(a, b) = distance`, sorted.
    pub attaining_pairs: Vec<(usize, usize)>,
}

/// Breadth-first depth of every site from the nearest site of `sources`.
pub(crate) fn depth_from(geom: &Geometry, sources: &[usize]) -> Vec<usize> {
    let mut depth = vec![usize::MAX; geom.len()];
    let mut queue = VecDeque::with_capacity(sources.len());
    for &s in sources {
        if depth[s] == usize::MAX {
            depth[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(i) = queue.pop_front() {
        let next = depth[i] + 1;
        for j in geom.neighbor_indices(i) {
            if depth[j] == usize::MAX {
                depth[j] = next;
                queue.push_back(j);
            }
        }
    }
    depth
}

pub fn set_distance(geom: &Geometry, a: &[usize], b: &[usize]) -> Result<DistanceReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("distance to an empty set".into()));
    }
    let depth = depth_from(geom, a);
    let distance = b.iter().map(|&y| depth[y]).min().expect("nonempty");
    let mut attaining_pairs = Vec::new();
    for &y in b.iter().filter(|&&y| depth[y] == distance) {
        for &x in a {
            if geom.distance(x, y) == distance {
                attaining_pairs.push((x, y));
            }
        }
    }
    attaining_pairs.sort_unstable();
    Ok(DistanceReport {
        distance,
        attaining_pairs,
    })
}

/// Distance between clusters `a` and `b` of the same labelling.
pub fn cluster_distance(
    labels: &ClusterLabels,
    a: usize,
    b: usize,
    geom: &Geometry,
) -> Result<DistanceReport> {
    require(labels, a)?;
    require(labels, b)?;
    if a == b {
        return Err(Error::SameCluster);
    }
    set_distance(geom, &labels.sites_of(a), &labels.sites_of(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::SiteConfig;
    use crate::clusters::label_clusters;
    use crate::lattice::Site;

    fn brute_force(g: &Geometry, a: &[usize], b: &[usize]) -> DistanceReport {
        let d = a
            .iter()
            .flat_map(|&x| b.iter().map(move |&y| g.distance(x, y)))
            .min()
            .unwrap();
        let mut pairs: Vec<(usize, usize)> = a
            .iter()
            .flat_map(|&x| b.iter().map(move |&y| (x, y)))
            .filter(|&(x, y)| g.distance(x, y) == d)
            .collect();
        pairs.sort_unstable();
        DistanceReport {
            distance: d,
            attaining_pairs: pairs,
        }
    }

    #[test]
    fn line_endpoints() {
        let g = Geometry::open_box(1, 5).unwrap();
        let l = label_clusters(&SiteConfig::from_sites(5, [0, 4]), &g).unwrap();
        let r = cluster_distance(&l, 0, 4, &g).unwrap();
        assert_eq!(r.distance, 4);
        assert_eq!(r.attaining_pairs, vec![(0, 4)]);
    }

    #[test]
    fn one_closed_site_between_clusters() {
        let g = Geometry::open_box(1, 5).unwrap();
        let l = label_clusters(&SiteConfig::from_sites(5, [0, 1, 3]), &g).unwrap();
        assert_eq!(cluster_distance(&l, 0, 3, &g).unwrap().distance, 2);
    }

    #[test]
    fn parallel_rows() {
        let g = Geometry::open_box(2, 7).unwrap();
        let row = |y: usize| -> Vec<usize> {
            (0..7).map(|x| g.index(&Site::from([x, y])).unwrap()).collect()
        };
        let omega = SiteConfig::from_sites(49, row(0).into_iter().chain(row(2)));
        let l = label_clusters(&omega, &g).unwrap();
        let b = row(2)[0];
        let r = cluster_distance(&l, 0, b, &g).unwrap();
        let oracle = brute_force(&g, &l.sites_of(0), &l.sites_of(b));
        assert_eq!(r, oracle);
        assert_eq!(r.distance, 2);
        assert_eq!(r.attaining_pairs.len(), 7);
    }

    #[test]
    fn errors() {
        let g = Geometry::open_box(1, 5).unwrap();
        let l = label_clusters(&SiteConfig::from_sites(5, [0, 4]), &g).unwrap();
        assert!(matches!(cluster_distance(&l, 0, 0, &g), Err(Error::SameCluster)));
        assert!(matches!(cluster_distance(&l, 0, 2, &g), Err(Error::MissingLabel(2))));
    }

    #[test]
    fn matches_brute_force_on_random_configurations() {
        for trial in 0..60u64 {
            let side = 4 + (trial as usize % 7);
            let g = if trial % 2 == 0 {
                Geometry::torus(2, side).unwrap()
            } else {
                Geometry::open_box(2, side).unwrap()
            };
            let omega = SiteConfig::new(
                (0..g.len())
                    .map(|i| crate::rng::site_uniform(trial + 100, i) < 0.35)
                    .collect(),
            );
            let l = label_clusters(&omega, &g).unwrap();
            if l.count() < 2 {
                continue;
            }
            let (a, b) = (l.clusters()[0].label, l.clusters()[l.count() - 1].label);
            let got = cluster_distance(&l, a, b, &g).unwrap();
            assert!(got.distance >= 2);
            assert_eq!(got, brute_force(&g, &l.sites_of(a), &l.sites_of(b)));
        }
    }
}
