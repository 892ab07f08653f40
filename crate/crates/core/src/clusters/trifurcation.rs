use std::collections::VecDeque;

use super::{label_clusters, Surrogate};
use crate::automata::SiteConfig;
use crate::error::{Error, Result};
use crate::lattice::Geometry;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrifurcationCount {
    /// Candidate block centres inside the window.
    pub candidates: usize,
    /// Candidates that are coarse-trifurcations, in index order.
    pub sites: Vec<usize>,
}

impl TrifurcationCount {
    pub fn count(&self) -> usize {
        self.sites.len()
    }
}

/// Counts coarse-trifurcations of `omega`.
///
/// Candidates are the sites `y` with `y - o` in `4n Z^d`, `o` the window
/// centre, whose ball `B_{2n}(y)` fits inside the window and inside
/// `B_R(o)` (`R = window_radius`, unbounded when `None`). A candidate counts
/// when `B_n(y)` is entirely open, its cluster is infinite under
/// `surrogate`, and closing `B_n(y)` leaves at least three distinct infinite
/// clusters adjacent to the ball.
pub fn count_coarse_trifurcations(
    omega: &SiteConfig,
    geom: &Geometry,
    block_radius: usize,
    window_radius: Option<usize>,
    surrogate: Surrogate,
) -> Result<TrifurcationCount> {
    omega.check_shape(geom)?;
    if block_radius == 0 {
        return Err(Error::Precondition("block radius must be at least 1".into()));
    }
    let n = block_radius;
    let side = geom.side();
    let spacing = 4 * n;
    if geom.is_torus() && side <= spacing {
        return Err(Error::Precondition(format!(
            "torus side {side} too small for block radius {n}"
        )));
    }
    let labels = label_clusters(omega, geom)?;
    let center = geom.index(&geom.center())?;
    let origin: Vec<usize> = geom.coords_of(center).collect();
    let radius = window_radius.unwrap_or(usize::MAX);

    let on_grid = |c: usize, o: usize| (c + spacing * side - o) % spacing == 0;
    let fits = |c: usize| geom.is_torus() || (c >= 2 * n && c + 2 * n < side);

    let mut stamp = vec![0u32; geom.len()];
    let mut generation = 0u32;
    let mut in_ball = vec![false; geom.len()];
    let mut out = TrifurcationCount {
        candidates: 0,
        sites: Vec::new(),
    };

    for y in 0..geom.len() {
        let ok = geom
            .coords_of(y)
            .zip(&origin)
            .all(|(c, &o)| on_grid(c, o) && fits(c));
        if !ok || geom.distance(center, y).saturating_add(2 * n) > radius {
            continue;
        }
        out.candidates += 1;
        let ball = geom.ball_indices(y, n);
        if !ball.iter().all(|&b| omega.is_open(b)) {
            continue;
        }
        let root = labels.label_of(y).expect("open site is labelled");
        let cluster = labels.cluster(root).expect("label exists");
        if !surrogate.is_infinite(cluster, geom) {
            continue;
        }
        for &b in &ball {
            in_ball[b] = true;
        }
        generation += 1;
        let mut arms = 0;
        'seeds: for &b in &ball {
            for s in geom.neighbor_indices(b) {
                if in_ball[s] || !omega.is_open(s) || stamp[s] == generation {
                    continue;
                }
                if arm_is_infinite(geom, omega, &in_ball, &mut stamp, generation, s, surrogate) {
                    arms += 1;
                    if arms >= 3 {
                        break 'seeds;
                    }
                }
            }
        }
        for &b in &ball {
            in_ball[b] = false;
        }
        if arms >= 3 {
            out.sites.push(y);
        }
    }
    Ok(out)
}

/// Explores the component of `start` in `omega` minus the ball and reports
/// whether it qualifies as infinite.
fn arm_is_infinite(
    geom: &Geometry,
    omega: &SiteConfig,
    in_ball: &[bool],
    stamp: &mut [u32],
    generation: u32,
    start: usize,
    surrogate: Surrogate,
) -> bool {
    let mut queue = VecDeque::from([start]);
    stamp[start] = generation;
    let mut size = 0usize;
    let mut touches = false;
    while let Some(i) = queue.pop_front() {
        size += 1;
        touches |= geom.on_boundary(i);
        for j in geom.neighbor_indices(i) {
            if stamp[j] != generation && !in_ball[j] && omega.is_open(j) {
                stamp[j] = generation;
                queue.push_back(j);
            }
        }
    }
    let probe = super::Cluster {
        label: start,
        size,
        touches_boundary: touches,
        crossing: Vec::new(),
    };
    surrogate.is_infinite(&probe, geom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;

    fn y_fixture() -> (Geometry, SiteConfig, usize) {
        let g = Geometry::open_box(2, 17).unwrap();
        let c = g.index(&Site::from([8, 8])).unwrap();
        let mut open: Vec<usize> = g.ball_indices(c, 1);
        open.extend((0..8).map(|x| g.index(&Site::from([x, 8])).unwrap()));
        open.extend((9..17).map(|x| g.index(&Site::from([x, 8])).unwrap()));
        open.extend((9..17).map(|y| g.index(&Site::from([8, y])).unwrap()));
        (g.clone(), SiteConfig::from_sites(g.len(), open), c)
    }

    /// Closes the ball, relabels, and counts boundary-touching clusters that
    /// touch the ball's outer neighbourhood.
    fn relabel_oracle(g: &Geometry, omega: &SiteConfig, y: usize, n: usize) -> usize {
        let ball = g.ball_indices(y, n);
        let mut cut = omega.clone();
        for &b in &ball {
            cut.set(b, false);
        }
        let labels = label_clusters(&cut, g).unwrap();
        let mut adjacent: Vec<usize> = ball
            .iter()
            .flat_map(|&b| g.neighbor_indices(b).collect::<Vec<_>>())
            .filter_map(|s| labels.label_of(s))
            .filter(|&l| labels.cluster(l).unwrap().touches_boundary)
            .collect();
        adjacent.sort_unstable();
        adjacent.dedup();
        adjacent.len()
    }

    #[test]
    fn hand_built_three_arm_cluster() {
        let (g, omega, c) = y_fixture();
        assert_eq!(relabel_oracle(&g, &omega, c, 1), 3);
        let got = count_coarse_trifurcations(&omega, &g, 1, None, Surrogate::BoundaryContact).unwrap();
        assert_eq!(got.sites, vec![c]);
    }

    #[test]
    fn two_arms_are_not_enough() {
        let (g, mut omega, _) = y_fixture();
        for y in 9..17 {
            omega.set(g.index(&Site::from([8, y])).unwrap(), false);
        }
        let got = count_coarse_trifurcations(&omega, &g, 1, None, Surrogate::BoundaryContact).unwrap();
        assert_eq!(got.count(), 0);
    }

    #[test]
    fn full_and_empty_windows() {
        let g = Geometry::open_box(2, 33).unwrap();
        for omega in [SiteConfig::filled(g.len()), SiteConfig::closed(g.len())] {
            let got = count_coarse_trifurcations(&omega, &g, 1, None, Surrogate::BoundaryContact).unwrap();
            assert_eq!(got.count(), 0);
            assert!(got.candidates > 0);
        }
    }

    #[test]
    fn window_radius_limits_candidates() {
        let (g, omega, _) = y_fixture();
        let got = count_coarse_trifurcations(&omega, &g, 1, Some(1), Surrogate::BoundaryContact).unwrap();
        assert_eq!(got.candidates, 0);
        let got = count_coarse_trifurcations(&omega, &g, 1, Some(2), Surrogate::BoundaryContact).unwrap();
        assert_eq!(got.candidates, 1);
        assert_eq!(got.count(), 1);
    }

    #[test]
    fn agrees_with_relabel_oracle_on_random_configurations() {
        for trial in 0..40u64 {
            let g = Geometry::open_box(2, 21).unwrap();
            let omega = SiteConfig::new(
                (0..g.len())
                    .map(|i| crate::rng::site_uniform(trial, i) < 0.62)
                    .collect(),
            );
            let labels = label_clusters(&omega, &g).unwrap();
            let got = count_coarse_trifurcations(&omega, &g, 1, None, Surrogate::BoundaryContact).unwrap();
            let o: Vec<usize> = g.center().coords().to_vec();
            let mut expect = Vec::new();
            for y in 0..g.len() {
                let c: Vec<usize> = g.coords_of(y).collect();
                let grid = c.iter().zip(&o).all(|(&a, &b)| a.abs_diff(b) % 4 == 0 && a >= 2 && a + 2 < 21);
                if !grid || !g.ball_indices(y, 1).iter().all(|&b| omega.is_open(b)) {
                    continue;
                }
                if !labels.cluster(labels.label_of(y).unwrap()).unwrap().touches_boundary {
                    continue;
                }
                if relabel_oracle(&g, &omega, y, 1) >= 3 {
                    expect.push(y);
                }
            }
            assert_eq!(got.sites, expect, "trial {trial}");
        }
    }
}
