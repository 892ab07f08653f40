//! Mass transport on the torus.
//!
//! A kernel `F(x, y; a, b)` sends mass from `x` to `y` given a pair of site
//! configurations. Averaging over every torus translation of the pair gives
//! `f(x, y) = (1/N) sum_z F(x, y; tau_z a, tau_z b)`. When `F` is
//! translation covariant, the mass each site sends under `f` equals the mass
//! it receives; [`mtp_check`] measures how far that fails.

use rayon::prelude::*;

use super::distance::depth_from;
use super::label_clusters;
use crate::automata::SiteConfig;
use crate::error::{Error, Result};
use crate::lattice::Geometry;

/// Additive tolerance for sent/received equality.
pub const MTP_TOLERANCE: f64 = 1e-12;

/// Largest window accepted; the averaged kernel is stored densely.
const MAX_SITES: usize = 2048;

pub trait TransportKernel: Sync {
    fn name(&self) -> &'static str;

    /// Nonzero entries `(x, y, F(x, y; a, b))`.
    fn transport(
        &self,
        geom: &Geometry,
        a: &SiteConfig,
        b: &SiteConfig,
    ) -> Result<Vec<(usize, usize, f64)>>;
}

pub struct ZeroKernel;

impl TransportKernel for ZeroKernel {
    fn name(&self) -> &'static str {
        "zero"
    }

    fn transport(&self, _: &Geometry, _: &SiteConfig, _: &SiteConfig) -> Result<Vec<(usize, usize, f64)>> {
        Ok(Vec::new())
    }
}

/// Every open site of `a` sends mass 1 to each open neighbour in `a`.
pub struct UnitNeighborKernel;

impl TransportKernel for UnitNeighborKernel {
    fn name(&self) -> &'static str {
        "unit"
    }

    fn transport(
        &self,
        geom: &Geometry,
        a: &SiteConfig,
        _: &SiteConfig,
    ) -> Result<Vec<(usize, usize, f64)>> {
        Ok(a.open_sites()
            .flat_map(|x| {
                geom.neighbor_indices(x)
                    .filter(|&y| a.is_open(y))
                    .map(move |y| (x, y, 1.0))
            })
            .collect())
    }
}

/// Distance-attainment kernel on `(a, b) = (interpolated, upper)` pairs.
///
/// Let `G` be the union of the largest clusters of `a` (usually one). For
/// `x` open in `b` with cluster `C` disjoint from `G`, mass `1/N` goes from
/// `x` to each of the `N` sites of `C` at minimal distance from `G`.
/// Clusters meeting `G` send nothing. Taking every largest cluster, rather
/// than breaking ties by position, keeps the kernel translation covariant.
pub struct DistanceAttainmentKernel;

impl TransportKernel for DistanceAttainmentKernel {
    fn name(&self) -> &'static str {
        "step2"
    }

    fn transport(
        &self,
        geom: &Geometry,
        a: &SiteConfig,
        b: &SiteConfig,
    ) -> Result<Vec<(usize, usize, f64)>> {
        let la = label_clusters(a, geom)?;
        let Some(top) = la.largest().map(|c| c.size) else {
            return Ok(Vec::new());
        };
        let giant_sites: Vec<usize> = la
            .clusters()
            .iter()
            .filter(|c| c.size == top)
            .flat_map(|c| la.sites_of(c.label))
            .collect();
        let depth = depth_from(geom, &giant_sites);
        let lb = label_clusters(b, geom)?;

        let slot = |label: usize| {
            lb.clusters()
                .binary_search_by_key(&label, |c| c.label)
                .expect("label exists")
        };
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); lb.count()];
        for x in b.open_sites() {
            members[slot(lb.label_of(x).expect("open"))].push(x);
        }
        let mut meets = vec![false; lb.count()];
        for &g in &giant_sites {
            if let Some(l) = lb.label_of(g) {
                meets[slot(l)] = true;
            }
        }

        let mut out = Vec::new();
        for (k, sites) in members.iter().enumerate() {
            if meets[k] {
                continue;
            }
            let d = sites.iter().map(|&s| depth[s]).min().expect("nonempty");
            let attaining: Vec<usize> = sites.iter().copied().filter(|&s| depth[s] == d).collect();
            let w = 1.0 / attaining.len() as f64;
            for &x in sites {
                out.extend(attaining.iter().map(|&y| (x, y, w)));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MtpReport {
    /// `sum_y f(x, y)` per site.
    pub sent: Vec<f64>,
    /// `sum_y f(y, x)` per site.
    pub received: Vec<f64>,
    pub max_discrepancy: f64,
    /// `sum_x sum_y f(x, y)` accumulated row by row and column by column.
    pub total_by_rows: f64,
    pub total_by_columns: f64,
    pub pass: bool,
}

pub fn mtp_check(
    geom: &Geometry,
    a: &SiteConfig,
    b: &SiteConfig,
    kernel: &dyn TransportKernel,
) -> Result<MtpReport> {
    if !geom.is_torus() {
        return Err(Error::NotTorus);
    }
    a.check_shape(geom)?;
    b.check_shape(geom)?;
    let n = geom.len();
    if n > MAX_SITES {
        return Err(Error::Precondition(format!(
            "mass-transport check limited to {MAX_SITES} sites, got {n}"
        )));
    }
    let per_shift: Vec<Vec<(usize, usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|z| {
            let z = geom.site(z);
            let ta = a.translated(geom, &z)?;
            let tb = b.translated(geom, &z)?;
            kernel.transport(geom, &ta, &tb)
        })
        .collect::<Result<_>>()?;
    let mut f = vec![0.0f64; n * n];
    for triples in &per_shift {
        for &(x, y, m) in triples {
            f[x * n + y] += m;
        }
    }
    let scale = 1.0 / n as f64;
    f.iter_mut().for_each(|v| *v *= scale);

    let sent: Vec<f64> = (0..n).map(|x| f[x * n..(x + 1) * n].iter().sum()).collect();
    let received: Vec<f64> = (0..n).map(|x| (0..n).map(|y| f[y * n + x]).sum()).collect();
    let max_discrepancy = sent
        .iter()
        .zip(&received)
        .map(|(s, r)| (s - r).abs())
        .fold(0.0, f64::max);
    let total_by_rows = sent.iter().sum();
    let total_by_columns = received.iter().sum();
    Ok(MtpReport {
        pass: max_discrepancy < MTP_TOLERANCE,
        sent,
        received,
        max_discrepancy,
        total_by_rows,
        total_by_columns,
    })
}
