//! Stochastically increasing one-parameter families of single-site laws and
//! the shared-uniform coupling of several parameters.
//!
//! Every site draws one uniform `U_x`. The mass at parameter `p` is the
//! generalized inverse CDF `Q_p(U_x)`. Because `Q_p(u)` is nondecreasing in
//! both `p` and `u`, samples at `p1 < p2 < p3` built from the same uniforms
//! are ordered pointwise, and each is an i.i.d. product of the marginal law.

use crate::automata::ParticleConfig;
use crate::error::{Error, Result};
use crate::lattice::Geometry;
use crate::rng;

/// Largest Poisson rate accepted; `exp(-rate)` must stay representable.
pub const MAX_POISSON_RATE: f64 = 500.0;

/// One row of a [`QuantileTable`]: a finite law valid from parameter `p` on.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub p: f64,
    /// `(mass, probability)` pairs with strictly increasing masses.
    pub atoms: Vec<(f64, f64)>,
}

/// A user-supplied family given by finitely many laws on a grid of
/// parameters. The law at `p` is that of the last grid point `<= p`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    entries: Vec<TableEntry>,
}

impl QuantileTable {
    /// Validates the table: sorted parameters, proper laws, and stochastic
    /// increase from each row to the next.
    pub fn new(entries: Vec<TableEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Family("quantile table is empty".into()));
        }
        for e in &entries {
            if !(0.0..=1.0).contains(&e.p) {
                return Err(Error::ParameterRange(e.p));
            }
            if e.atoms.is_empty() {
                return Err(Error::Family(format!("law at p={} has no atoms", e.p)));
            }
            let mut prev = f64::NEG_INFINITY;
            for &(m, q) in &e.atoms {
                if !(m.is_finite() && m >= 0.0 && m > prev) {
                    return Err(Error::Family(format!(
                        "masses at p={} must be finite, nonnegative and increasing",
                        e.p
                    )));
                }
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::Family(format!("probability {q} at p={}", e.p)));
                }
                prev = m;
            }
            let total: f64 = e.atoms.iter().map(|a| a.1).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Family(format!(
                    "law at p={} sums to {total}",
                    e.p
                )));
            }
        }
        for w in entries.windows(2) {
            if w[1].p <= w[0].p {
                return Err(Error::Family("table parameters must increase".into()));
            }
            let masses = w[0].atoms.iter().chain(&w[1].atoms).map(|a| a.0);
            for m in masses {
                if tail(&w[1].atoms, m) + 1e-12 < tail(&w[0].atoms, m) {
                    return Err(Error::Family(format!(
                        "law at p={} is not stochastically above p={} at mass {m}",
                        w[1].p, w[0].p
                    )));
                }
            }
        }
        Ok(QuantileTable { entries })
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    fn law(&self, p: f64) -> &[(f64, f64)] {
        let i = self.entries.partition_point(|e| e.p <= p).saturating_sub(1);
        &self.entries[i].atoms
    }
}

fn tail(atoms: &[(f64, f64)], m: f64) -> f64 {
    atoms.iter().filter(|a| a.0 >= m).map(|a| a.1).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// Poisson with rate `p * rho_max`.
    Poisson { rho_max: f64 },
    /// Mass `t` with probability `p`, else 0.
    ScaledBernoulli,
    Table(QuantileTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFamily {
    kind: FamilyKind,
    threshold: f64,
}

impl MeasureFamily {
    pub fn poisson(rho_max: f64, threshold: f64) -> Result<Self> {
        if !(rho_max.is_finite() && rho_max >= 0.0 && rho_max <= MAX_POISSON_RATE) {
            return Err(Error::Family(format!(
                "Poisson rho_max must lie in [0, {MAX_POISSON_RATE}], got {rho_max}"
            )));
        }
        Self::with_threshold(FamilyKind::Poisson { rho_max }, threshold)
    }

    pub fn scaled_bernoulli(threshold: f64) -> Result<Self> {
        Self::with_threshold(FamilyKind::ScaledBernoulli, threshold)
    }

    pub fn table(table: QuantileTable, threshold: f64) -> Result<Self> {
        Self::with_threshold(FamilyKind::Table(table), threshold)
    }

    fn with_threshold(kind: FamilyKind, threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::Family(format!(
                "threshold must be positive, got {threshold}"
            )));
        }
        Ok(MeasureFamily { kind, threshold })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// The insertion threshold `t`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn name(&self) -> String {
        match &self.kind {
            FamilyKind::Poisson { rho_max } => format!("poisson(rho_max={rho_max})"),
            FamilyKind::ScaledBernoulli => format!("bernoulli(t={})", self.threshold),
            FamilyKind::Table(t) => format!("table({} rows)", t.entries.len()),
        }
    }

    /// Mean of the single-site law at `p`.
    pub fn mean(&self, p: f64) -> Result<f64> {
        check_param(p)?;
        Ok(match &self.kind {
            FamilyKind::Poisson { rho_max } => p * rho_max,
            FamilyKind::ScaledBernoulli => p * self.threshold,
            FamilyKind::Table(t) => t.law(p).iter().map(|(m, q)| m * q).sum(),
        })
    }

    /// Generalized inverse CDF `inf { m : F_p(m) > u }` of the law at `p`.
    pub fn quantile(&self, p: f64, u: f64) -> Result<f64> {
        check_param(p)?;
        if !(0.0..1.0).contains(&u) {
            return Err(Error::Precondition(format!("uniform {u} outside [0, 1)")));
        }
        Ok(self.quantile_unchecked(p, u))
    }

    fn quantile_unchecked(&self, p: f64, u: f64) -> f64 {
        match &self.kind {
            FamilyKind::ScaledBernoulli => {
                if u < 1.0 - p {
                    0.0
                } else {
                    self.threshold
                }
            }
            FamilyKind::Poisson { rho_max } => poisson_quantile(p * rho_max, u),
            FamilyKind::Table(t) => {
                let atoms = t.law(p);
                let mut cdf = 0.0;
                for &(m, q) in atoms {
                    cdf += q;
                    if cdf > u {
                        return m;
                    }
                }
                atoms.last().map(|a| a.0).unwrap_or(0.0)
            }
        }
    }

    /// `mu_p([t, inf))`, the conditional probability with which a product
    /// measure forces a single site to mass at least `t`.
    pub fn insertion_epsilon(&self, p: f64) -> Result<InsertionEpsilon> {
        check_param(p)?;
        let t = self.threshold;
        let epsilon = match &self.kind {
            FamilyKind::ScaledBernoulli => p,
            FamilyKind::Poisson { rho_max } => {
                let rho = p * rho_max;
                if rho == 0.0 {
                    0.0
                } else {
                    // P(X >= t) = 1 - sum_{k < t} e^-rho rho^k / k!
                    let below = t.ceil() as u64;
                    let mut pmf = (-rho).exp();
                    let mut cdf = 0.0;
                    for k in 0..below {
                        cdf += pmf;
                        pmf *= rho / (k + 1) as f64;
                    }
                    (1.0 - cdf).max(0.0)
                }
            }
            FamilyKind::Table(table) => tail(table.law(p), t),
        };
        if epsilon == 0.0 {
            log::warn!(
                "{} at p={p} puts no mass on [{t}, inf): insertion tolerance fails",
                self.name()
            );
        }
        Ok(InsertionEpsilon { p, epsilon })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionEpsilon {
    pub p: f64,
    pub epsilon: f64,
}

impl InsertionEpsilon {
    /// False when the family puts no mass at or above the threshold.
    pub fn is_tolerant(&self) -> bool {
        self.epsilon > 0.0
    }
}

fn check_param(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParameterRange(p));
    }
    Ok(())
}

fn poisson_quantile(rho: f64, u: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let mut k = 0u64;
    let mut pmf = (-rho).exp();
    let mut cdf = pmf;
    // Past this point the remaining tail is below double precision.
    let limit = (rho + 40.0 * rho.sqrt() + 60.0) as u64;
    while cdf <= u && k < limit {
        k += 1;
        pmf *= rho / k as f64;
        cdf += pmf;
    }
    k as f64
}

/// Coupled configurations `X <= Y <= Z` at three parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledTriple {
    pub x: ParticleConfig,
    pub y: ParticleConfig,
    pub z: ParticleConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSampler {
    family: MeasureFamily,
    params: [f64; 3],
    seed: u64,
}

impl CouplingSampler {
    pub fn new(family: MeasureFamily, params: [f64; 3], seed: u64) -> Result<Self> {
        for &p in &params {
            check_param(p)?;
        }
        if !(params[0] < params[1] && params[1] < params[2]) {
            return Err(Error::UnorderedParameters(params));
        }
        Ok(CouplingSampler {
            family,
            params,
            seed,
        })
    }

    pub fn family(&self) -> &MeasureFamily {
        &self.family
    }

    pub fn params(&self) -> [f64; 3] {
        self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample(&self, geom: &Geometry) -> CoupledTriple {
        let [p1, p2, p3] = self.params;
        let n = geom.len();
        let (mut x, mut y, mut z) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for site in 0..n {
            let u = rng::site_uniform(self.seed, site);
            x.push(self.family.quantile_unchecked(p1, u));
            y.push(self.family.quantile_unchecked(p2, u));
            z.push(self.family.quantile_unchecked(p3, u));
        }
        CoupledTriple {
            x: ParticleConfig::new(x).expect("quantiles are nonnegative"),
            y: ParticleConfig::new(y).expect("quantiles are nonnegative"),
            z: ParticleConfig::new(z).expect("quantiles are nonnegative"),
        }
    }
}

/// Samples `X`, `Y`, `Z` from one set of per-site uniforms.
pub fn sample_coupled(geom: &Geometry, sampler: &CouplingSampler) -> CoupledTriple {
    sampler.sample(geom)
}

/// A single configuration at `p`. Calls with the same seed and different `p`
/// share uniforms and are therefore monotonically coupled.
pub fn sample_at(
    family: &MeasureFamily,
    p: f64,
    geom: &Geometry,
    seed: u64,
) -> Result<ParticleConfig> {
    check_param(p)?;
    let values = (0..geom.len())
        .map(|site| family.quantile_unchecked(p, rng::site_uniform(seed, site)))
        .collect();
    ParticleConfig::new(values)
}
