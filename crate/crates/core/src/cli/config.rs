//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. List values are
//! comma separated. Command-line overrides replace file values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::automata::{Automaton, Dynamics};
use crate::clusters::Surrogate;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentPlan, ParamRange};
use crate::lattice::{Boundary, Geometry};
use crate::measures::{MeasureFamily, QuantileTable, TableEntry};

pub const DEFAULT_SEED: u64 = 0x5EED;

pub const KEYS: &[&str] = &[
    "seed",
    "automaton.kind",
    "automaton.t",
    "automaton.theta",
    "automaton.lambda",
    "automaton.cap",
    "family.kind",
    "family.rho_max",
    "family.t",
    "family.table",
    "geometry.d",
    "geometry.L",
    "geometry.boundary",
    "params.grid",
    "params.lo",
    "params.hi",
    "params.p",
    "params.coupling",
    "trials",
    "surrogate.kind",
    "surrogate.delta",
    "trifurcations.n",
    "merge.max_attempts",
    "input.particles",
    "input.point_mass",
    "mtp.kernel",
    "mtp.configs",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    pub fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim()
                            .parse()
                            .map_err(|_| Error::Config(format!("{key}: cannot parse {x:?}")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn seed(&self) -> Result<Option<u64>> {
        self.raw("seed").map(parse_seed).transpose()
    }

    pub fn automaton(&self) -> Result<Automaton> {
        let kind = self.raw("automaton.kind").unwrap_or("sandpile");
        Ok(match kind {
            "identity" => Automaton::identity(self.get_or("automaton.t", 1.0)?),
            "sandpile" => Automaton::Sandpile {
                threshold: self.get("automaton.t")?,
                cap: self.get("automaton.cap")?,
            },
            "bootstrap" => Automaton::Bootstrap {
                theta: self.get_or("automaton.theta", 2)?,
                threshold: self.get_or("automaton.t", 1.0)?,
            },
            "arw" => Automaton::Arw {
                sleep_rate: self.get_or("automaton.lambda", 1.0)?,
                cap: self.get("automaton.cap")?,
            },
            k => return Err(Error::Config(format!("unknown automaton.kind {k:?}"))),
        })
    }

    pub fn boundary(&self) -> Result<Boundary> {
        match self.raw("geometry.boundary").unwrap_or("open") {
            "open" => Ok(Boundary::OpenBox),
            "torus" => Ok(Boundary::Torus),
            b => Err(Error::Config(format!("unknown geometry.boundary {b:?}"))),
        }
    }

    /// The family's threshold defaults to the automaton's.
    pub fn family(&self, automaton: &Automaton, dim: usize) -> Result<MeasureFamily> {
        let probe = Geometry::open_box(dim, 1)?;
        let t = self.get_or("family.t", automaton.threshold(&probe))?;
        match self.raw("family.kind").unwrap_or("poisson") {
            "poisson" => MeasureFamily::poisson(self.get_or("family.rho_max", t)?, t),
            "bernoulli" => MeasureFamily::scaled_bernoulli(t),
            "table" => {
                let spec = self
                    .raw("family.table")
                    .ok_or_else(|| Error::Config("family.kind = table needs family.table".into()))?;
                MeasureFamily::table(parse_table(spec)?, t)
            }
            k => Err(Error::Config(format!("unknown family.kind {k:?}"))),
        }
    }

    pub fn surrogate(&self) -> Result<Surrogate> {
        match self.raw("surrogate.kind").unwrap_or("boundary") {
            "boundary" => Ok(Surrogate::BoundaryContact),
            "macroscopic" => Ok(Surrogate::Macroscopic {
                delta: self.get_or("surrogate.delta", Surrogate::DEFAULT_DELTA)?,
            }),
            k => Err(Error::Config(format!("unknown surrogate.kind {k:?}"))),
        }
    }

    pub fn plan(&self, seed: u64) -> Result<ExperimentPlan> {
        let automaton = self.automaton()?;
        let dim = self.get_or("geometry.d", 2usize)?;
        let family = self.family(&automaton, dim)?;
        let mut plan = ExperimentPlan::new(automaton, family);
        plan.dim = dim;
        plan.boundary = self.boundary()?;
        plan.sizes = self.list("geometry.L")?.unwrap_or_else(|| vec![16]);
        plan.params = match (self.get("params.lo")?, self.get("params.hi")?) {
            (Some(lo), Some(hi)) => ParamRange::Bracket { lo, hi },
            (None, None) => match self.list("params.grid")? {
                Some(g) => ParamRange::Grid(g),
                None => plan.params,
            },
            _ => return Err(Error::Config("params.lo and params.hi go together".into())),
        };
        if let Some(c) = self.list::<f64>("params.coupling")? {
            plan.coupling = c
                .try_into()
                .map_err(|_| Error::Config("params.coupling needs three values".into()))?;
        }
        plan.trials = self.get_or("trials", plan.trials)?;
        plan.seed = seed;
        plan.surrogate = self.surrogate()?;
        plan.block_radius = self.get_or("trifurcations.n", 1)?;
        plan.validate()?;
        Ok(plan)
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| Error::Config(format!("bad seed {s:?}")))
}

/// `p:mass@prob,mass@prob;p:...`
fn parse_table(spec: &str) -> Result<QuantileTable> {
    let bad = |what: &str| Error::Config(format!("family.table: cannot parse {what:?}"));
    let entries = spec
        .split(';')
        .map(|row| {
            let (p, atoms) = row.split_once(':').ok_or_else(|| bad(row))?;
            let atoms = atoms
                .split(',')
                .map(|a| {
                    let (m, q) = a.split_once('@').ok_or_else(|| bad(a))?;
                    Ok((
                        m.trim().parse().map_err(|_| bad(m))?,
                        q.trim().parse().map_err(|_| bad(q))?,
                    ))
                })
                .collect::<Result<_>>()?;
            Ok(TableEntry {
                p: p.trim().parse().map_err(|_| bad(p))?,
                atoms,
            })
        })
        .collect::<Result<_>>()?;
    QuantileTable::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::FamilyKind;

    #[test]
    fn parses_file_text() {
        let s = Settings::parse(
            "# demo\nautomaton.kind = bootstrap\nautomaton.theta=3\n\ngeometry.L = 8, 16\ntrials = 7\n",
        )
        .unwrap();
        let plan = s.plan(1).unwrap();
        assert_eq!(plan.automaton, Automaton::Bootstrap { theta: 3, threshold: 1.0 });
        assert_eq!(plan.sizes, vec![8, 16]);
        assert_eq!(plan.trials, 7);
        assert_eq!(plan.seed, 1);
    }

    #[test]
    fn defaults() {
        let plan = Settings::default().plan(DEFAULT_SEED).unwrap();
        assert_eq!(plan.automaton, Automaton::sandpile());
        assert_eq!(plan.family, MeasureFamily::poisson(4.0, 4.0).unwrap());
        assert_eq!(plan.sizes, vec![16]);
        assert_eq!(plan.boundary, Boundary::OpenBox);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Settings::parse("no equals sign").is_err());
        assert!(Settings::parse("automaton.colour = red").is_err());
        let s = Settings::parse("automaton.kind = sandpiles").unwrap();
        assert!(s.plan(0).is_err());
        let s = Settings::parse("trials = many").unwrap();
        assert!(s.plan(0).is_err());
        let s = Settings::parse("params.lo = 0.2").unwrap();
        assert!(s.plan(0).is_err());
        let s = Settings::parse("params.coupling = 0.1, 0.2").unwrap();
        assert!(s.plan(0).is_err());
    }

    #[test]
    fn seeds_in_both_bases() {
        assert_eq!(parse_seed("0x5EED").unwrap(), 24301);
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert!(parse_seed("0xZZ").is_err());
    }

    #[test]
    fn table_family() {
        let s = Settings::parse(
            "family.kind = table\nfamily.t = 1\nfamily.table = 0:0@1; 0.5:0@0.5,1@0.5; 1:1@1",
        )
        .unwrap();
        let plan = s.plan(0).unwrap();
        assert!(matches!(plan.family.kind(), FamilyKind::Table(t) if t.entries().len() == 3));
        assert_eq!(plan.family.quantile(0.7, 0.6).unwrap(), 1.0);
    }
}
