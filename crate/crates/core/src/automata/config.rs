use crate::error::{Error, Result};
use crate::lattice::Geometry;

/// Nonnegative mass per site, stored in linear site order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleConfig {
    values: Vec<f64>,
}

impl ParticleConfig {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (site, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::InvalidMass {
                    site,
                    value,
                    reason: "mass must be finite",
                });
            }
            if value < 0.0 {
                return Err(Error::InvalidMass {
                    site,
                    value,
                    reason: "mass must be nonnegative",
                });
            }
        }
        Ok(ParticleConfig { values })
    }

    pub fn zeros(len: usize) -> Self {
        ParticleConfig {
            values: vec![0.0; len],
        }
    }

    /// `mass` particles at a single site, zero elsewhere.
    pub fn point(len: usize, site: usize, mass: f64) -> Result<Self> {
        let mut values = vec![0.0; len];
        values[site] = mass;
        Self::new(values)
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        ParticleConfig {
            values: counts.iter().map(|&c| c as f64).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, site: usize) -> f64 {
        self.values[site]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.values.len() as f64
    }

    /// The configuration equal to `max(r, xi_x)` at `site` and unchanged
    /// elsewhere.
    pub fn raised(&self, site: usize, r: f64) -> Result<Self> {
        let mut values = self.values.clone();
        values[site] = values[site].max(r);
        Self::new(values)
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    pub fn check_shape(&self, geom: &Geometry) -> Result<()> {
        check_len(geom, self.values.len())
    }

    /// Integer particle counts, rejecting fractional masses.
    pub fn to_counts(&self) -> Result<Vec<u64>> {
        self.values
            .iter()
            .enumerate()
            .map(|(site, &value)| {
                if value.fract() != 0.0 || value > u64::MAX as f64 {
                    Err(Error::InvalidMass {
                        site,
                        value,
                        reason: "integer particle counts required",
                    })
                } else {
                    Ok(value as u64)
                }
            })
            .collect()
    }

    pub fn translated(&self, geom: &Geometry, z: &crate::lattice::Site) -> Result<Self> {
        Ok(ParticleConfig {
            values: geom.translate(&self.values, z)?,
        })
    }
}

/// One open/closed bit per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteConfig {
    open: Vec<bool>,
}

impl SiteConfig {
    pub fn new(open: Vec<bool>) -> Self {
        SiteConfig { open }
    }

    pub fn closed(len: usize) -> Self {
        SiteConfig {
            open: vec![false; len],
        }
    }

    pub fn filled(len: usize) -> Self {
        SiteConfig {
            open: vec![true; len],
        }
    }

    pub fn from_sites(len: usize, sites: impl IntoIterator<Item = usize>) -> Self {
        let mut open = vec![false; len];
        for s in sites {
            open[s] = true;
        }
        SiteConfig { open }
    }

    pub fn bits(&self) -> &[bool] {
        &self.open
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    #[inline]
    pub fn is_open(&self, site: usize) -> bool {
        self.open[site]
    }

    pub fn set(&mut self, site: usize, open: bool) {
        self.open[site] = open;
    }

    pub fn count_open(&self) -> usize {
        self.open.iter().filter(|&&b| b).count()
    }

    pub fn density(&self) -> f64 {
        self.count_open() as f64 / self.open.len() as f64
    }

    pub fn open_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.open
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.open.len() == other.open.len()
            && self.open.iter().zip(&other.open).all(|(&a, &b)| !a || b)
    }

    /// Sites open in `self` but closed in `other`.
    pub fn minus(&self, other: &Self) -> Vec<usize> {
        self.open
            .iter()
            .zip(&other.open)
            .enumerate()
            .filter(|(_, (&a, &b))| a && !b)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn check_shape(&self, geom: &Geometry) -> Result<()> {
        check_len(geom, self.open.len())
    }

    pub fn translated(&self, geom: &Geometry, z: &crate::lattice::Site) -> Result<Self> {
        Ok(SiteConfig {
            open: geom.translate(&self.open, z)?,
        })
    }
}

fn check_len(geom: &Geometry, got: usize) -> Result<()> {
    if got != geom.len() {
        return Err(Error::ShapeMismatch {
            expected: geom.len(),
            got,
        });
    }
    Ok(())
}

/// Topple counts per site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Odometer {
    topples: Vec<u64>,
    total: u64,
}

impl Odometer {
    pub fn zeros(len: usize) -> Self {
        Odometer {
            topples: vec![0; len],
            total: 0,
        }
    }

    pub(crate) fn from_counts(topples: Vec<u64>) -> Self {
        let total = topples
            .iter()
            .try_fold(0u64, |acc, &t| acc.checked_add(t))
            .expect("odometer total overflow");
        Odometer { topples, total }
    }

    pub fn topples(&self) -> &[u64] {
        &self.topples
    }

    pub fn get(&self, site: usize) -> u64 {
        self.topples[site]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Sites that toppled at least once.
    pub fn toppled_set(&self) -> SiteConfig {
        SiteConfig::new(self.topples.iter().map(|&t| t > 0).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizationResult {
    pub omega: SiteConfig,
    pub odometer: Odometer,
    pub final_config: ParticleConfig,
    pub stabilized: bool,
    /// Mass that left the window through sink neighbours.
    pub dissipated: f64,
}
